#pragma once

#include <string>
#include <vector>

#include "fpk/grid.hpp"
#include "fpk/potential.hpp"

namespace fpk {

enum class Scheme { Imex, Picard };
enum class InitialKind { Uniform, CosinePerturbed, GibbsLike };

/// Full description of one solver run.  parse_config fills it from the
/// key = value file format; render_config writes the canonical form back.
struct RunConfig {
  int dim = 0;
  std::vector<int> grid_sizes;
  double beta = 0.0;
  PotentialSpec potential;
  InitialKind initial = InitialKind::Uniform;
  double initial_amplitude = 0.5;  // cosine-perturbed only
  double dt = 0.0;
  double t_final = 0.0;
  Scheme scheme = Scheme::Imex;
  double picard_tol = 1e-10;
  int picard_max_iter = 50;
  bool conservative_form = true;
  double domain_floor = 1e-12;
  bool supersolution = true;
  int series_every = 1;
  int snapshot_every = 0;  // 0 disables snapshots
  std::string output_dir = "out";
  std::vector<std::string> checks;

  bool operator==(const RunConfig&) const = default;
};

/// Parses the line-oriented `key = value` format.  '#' starts a comment.
/// Unknown keys, malformed values, missing required keys and constraint
/// violations all raise with the offending line number in the message.
RunConfig parse_config(const std::string& text);

/// Canonical rendering; parse_config(render_config(c)) == c.
std::string render_config(const RunConfig& c);

/// Initial density: clipped to stay positive where needed, then normalized
/// to unit mass.
DensityField build_initial(const RunConfig& c);

const char* to_string(Scheme s);
const char* to_string(InitialKind k);

/// True if `name` is a check identifier the diagnostics suite understands.
bool is_known_check(const std::string& name);

}  // namespace fpk
