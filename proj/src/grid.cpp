#include "fpk/grid.hpp"

#include <fftw3.h>

#include <cmath>
#include <map>
#include <mutex>

#include "fpk/util.hpp"

namespace fpk {

std::size_t Grid::total() const {
  std::size_t t = 1;
  for (int N : sizes) t *= std::size_t(N);
  return t;
}

std::size_t Grid::stride(int axis) const {
  std::size_t s = 1;
  for (int a = axis + 1; a < n; ++a) s *= std::size_t(sizes[a]);
  return s;
}

Grid make_grid(int n, const std::vector<int>& sizes) {
  if (n < 1) raise(ErrorCode::ZeroDim, "grid dimension must be at least 1, got " + std::to_string(n));
  if (int(sizes.size()) != n)
    raise(ErrorCode::GridMismatch, "expected " + std::to_string(n) + " sizes, got " +
                                       std::to_string(sizes.size()));
  for (int N : sizes) {
    if (N < 8) raise(ErrorCode::TooSmall, "axis size " + std::to_string(N) + " below minimum 8");
    if (N % 2 != 0) raise(ErrorCode::OddSize, "axis size " + std::to_string(N) + " must be even");
  }
  Grid g;
  g.n = n;
  g.sizes = sizes;
  g.spacing.resize(n);
  for (int a = 0; a < n; ++a) g.spacing[a] = 1.0 / double(sizes[a]);
  return g;
}

DensityField make_field(const Grid& g, double fill) {
  DensityField f;
  f.grid = g;
  f.values.assign(g.total(), fill);
  return f;
}

double integrate(const DensityField& f) {
  if (f.values.size() != f.grid.total())
    raise(ErrorCode::GridMismatch, "value count does not match grid");
  double scale = 1.0;
  for (double h : f.grid.spacing) scale *= h;
  return scale * kahan_sum(f.values);
}

namespace detail {

namespace {
int g_pointwise_threads = 1;
}

void set_pointwise_threads(int k) { g_pointwise_threads = k < 1 ? 1 : k; }
int pointwise_threads() { return g_pointwise_threads; }

}  // namespace detail

namespace {

// One cached FFTW plan pair per grid shape.  Plans are created with
// FFTW_ESTIMATE (deterministic algorithm choice) and executed under a global
// lock on plan-private buffers, so transforms give identical bits no matter
// how many caller threads are active.
struct PlanEntry {
  fftw_complex* in = nullptr;
  fftw_complex* out = nullptr;
  fftw_plan fwd = nullptr;
  fftw_plan bwd = nullptr;
  std::size_t total = 0;
};

std::mutex& fft_mutex() {
  static std::mutex m;
  return m;
}

PlanEntry& plan_for(const Grid& g) {
  static std::map<std::vector<int>, PlanEntry> cache;
  auto it = cache.find(g.sizes);
  if (it != cache.end()) return it->second;

  PlanEntry e;
  e.total = g.total();
  e.in = fftw_alloc_complex(e.total);
  e.out = fftw_alloc_complex(e.total);
  e.fwd = fftw_plan_dft(g.n, g.sizes.data(), e.in, e.out, FFTW_FORWARD, FFTW_ESTIMATE);
  e.bwd = fftw_plan_dft(g.n, g.sizes.data(), e.in, e.out, FFTW_BACKWARD, FFTW_ESTIMATE);
  return cache.emplace(g.sizes, e).first->second;
}

}  // namespace

SpectralCoeffs forward_transform(const DensityField& f) {
  if (f.values.size() != f.grid.total())
    raise(ErrorCode::GridMismatch, "value count does not match grid");
  SpectralCoeffs c;
  c.grid = f.grid;
  c.coeffs.resize(f.values.size());

  std::lock_guard<std::mutex> lock(fft_mutex());
  PlanEntry& e = plan_for(f.grid);
  for (std::size_t i = 0; i < e.total; ++i) {
    e.in[i][0] = f.values[i];
    e.in[i][1] = 0.0;
  }
  fftw_execute(e.fwd);
  // Normalize so coeffs[0] is the field mean.
  double s = 1.0 / double(e.total);
  for (std::size_t i = 0; i < e.total; ++i)
    c.coeffs[i] = std::complex<double>(e.out[i][0] * s, e.out[i][1] * s);
  return c;
}

DensityField inverse_transform(const SpectralCoeffs& c) {
  if (c.coeffs.size() != c.grid.total())
    raise(ErrorCode::GridMismatch, "coefficient count does not match grid");
  DensityField f;
  f.grid = c.grid;
  f.values.resize(c.coeffs.size());

  std::lock_guard<std::mutex> lock(fft_mutex());
  PlanEntry& e = plan_for(c.grid);
  for (std::size_t i = 0; i < e.total; ++i) {
    e.in[i][0] = c.coeffs[i].real();
    e.in[i][1] = c.coeffs[i].imag();
  }
  fftw_execute(e.bwd);
  for (std::size_t i = 0; i < e.total; ++i) f.values[i] = e.out[i][0];
  return f;
}

void apply_derivative(SpectralCoeffs& c, int axis, int order) {
  if (axis < 0 || axis >= c.grid.n)
    raise(ErrorCode::AxisOutOfRange, "axis " + std::to_string(axis) + " for dimension " +
                                         std::to_string(c.grid.n));
  if (order != 1 && order != 2)
    raise(ErrorCode::UnsupportedOrder, "derivative order " + std::to_string(order));

  const std::size_t total = c.coeffs.size();
  const std::size_t stride = c.grid.stride(axis);
  const int N = c.grid.sizes[axis];
  const double two_pi = 2.0 * M_PI;

  if (order == 1) {
#pragma omp parallel for schedule(static) num_threads(detail::pointwise_threads())
    for (std::ptrdiff_t i = 0; i < std::ptrdiff_t(total); ++i) {
      int idx = int((std::size_t(i) / stride) % std::size_t(N));
      int k = idx < N / 2 ? idx : idx - N;
      if (k == -N / 2) {
        c.coeffs[i] = 0.0;  // odd derivative has no consistent sign at Nyquist
      } else {
        c.coeffs[i] *= std::complex<double>(0.0, two_pi * double(k));
      }
    }
  } else {
#pragma omp parallel for schedule(static) num_threads(detail::pointwise_threads())
    for (std::ptrdiff_t i = 0; i < std::ptrdiff_t(total); ++i) {
      int idx = int((std::size_t(i) / stride) % std::size_t(N));
      int k = idx < N / 2 ? idx : idx - N;
      c.coeffs[i] *= -two_pi * two_pi * double(k) * double(k);
    }
  }
}

DensityField spectral_derivative(const DensityField& f, int axis, int order) {
  SpectralCoeffs c = forward_transform(f);
  apply_derivative(c, axis, order);
  return inverse_transform(c);
}

}  // namespace fpk
