#pragma once

#include <cmath>
#include <cstdint>
#include <cstring>
#include <span>
#include <vector>

namespace fpk {

// Compensated (Neumaier) accumulator.  All quadrature and norm reductions in
// the library go through this in a fixed serial order, so sums are
// reproducible bit-for-bit independent of thread count.  The Neumaier variant
// also keeps sums of N equal terms exact, which several cancellation checks
// lean on.
class KahanSum {
 public:
  void add(double x) {
    double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x))
      comp_ += (sum_ - t) + x;
    else
      comp_ += (x - t) + sum_;
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

inline double kahan_sum(std::span<const double> xs) {
  KahanSum acc;
  for (double x : xs) acc.add(x);
  return acc.value();
}

// FNV-1a over raw bytes; used to tag a field so downstream consumers can
// detect stale derived data.
inline std::uint64_t fnv1a(const void* data, std::size_t bytes) {
  const auto* p = static_cast<const unsigned char*>(data);
  std::uint64_t h = 1469598103934665603ull;
  for (std::size_t i = 0; i < bytes; ++i) {
    h ^= p[i];
    h *= 1099511628211ull;
  }
  return h;
}

inline std::uint64_t hash_doubles(std::span<const double> xs) {
  return fnv1a(xs.data(), xs.size() * sizeof(double));
}

}  // namespace fpk
