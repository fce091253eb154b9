#pragma once

#include <string>
#include <utility>

#include "fpk/grid.hpp"

namespace fpk {

/// Binary field dump, little-endian throughout:
///   "FPK1" | u32 n | n x u32 sizes | f64 time | prod(N_i) f64 values
/// with values row-major, axis 0 slowest.  Round-trips are bit-exact.
void save_snapshot(const DensityField& f, double t, const std::string& path);

std::pair<DensityField, double> load_snapshot(const std::string& path);

}  // namespace fpk
