#include "fpk/potential.hpp"

#include <algorithm>
#include <cmath>

namespace fpk {

PotentialSpec PotentialSpec::zero() { return PotentialSpec{}; }

PotentialSpec PotentialSpec::cosine1d(double a) {
  PotentialSpec s;
  s.kind = PotentialKind::Cosine1d;
  s.a = a;
  return s;
}

PotentialSpec PotentialSpec::coupled(double a, double c) {
  PotentialSpec s;
  s.kind = PotentialKind::Coupled;
  s.a = a;
  s.c = c;
  return s;
}

PotentialSpec PotentialSpec::custom(std::vector<PotentialTerm> terms) {
  PotentialSpec s;
  s.kind = PotentialKind::CustomSeries;
  s.terms = std::move(terms);
  return s;
}

std::vector<PotentialTerm> PotentialSpec::term_list() const {
  switch (kind) {
    case PotentialKind::Zero:
      return {};
    case PotentialKind::Cosine1d:
      return {{a, {1}}};
    case PotentialKind::Coupled:
      return {{a, {1}}, {c, {1, 1}}};
    case PotentialKind::CustomSeries:
      return terms;
  }
  return {};
}

bool PotentialSpec::depends_on_x1_only() const {
  for (const auto& t : term_list())
    for (std::size_t i = 1; i < t.modes.size(); ++i)
      if (t.modes[i] != 0) return false;
  return true;
}

namespace {

constexpr double kTwoPi = 2.0 * M_PI;

int term_mode(const PotentialTerm& t, int axis) {
  return axis < int(t.modes.size()) ? t.modes[axis] : 0;
}

}  // namespace

double eval_potential(const PotentialSpec& spec, std::span<const double> x) {
  double v = 0.0;
  for (const auto& t : spec.term_list()) {
    double p = t.amplitude;
    for (std::size_t i = 0; i < x.size(); ++i) p *= std::cos(kTwoPi * term_mode(t, int(i)) * x[i]);
    v += p;
  }
  return v;
}

double eval_derivative(const PotentialSpec& spec, std::span<const double> x, int axis) {
  double v = 0.0;
  for (const auto& t : spec.term_list()) {
    double w = kTwoPi * term_mode(t, axis);
    if (w == 0.0) continue;
    double p = -t.amplitude * w * std::sin(kTwoPi * term_mode(t, axis) * x[axis]);
    for (std::size_t i = 0; i < x.size(); ++i)
      if (int(i) != axis) p *= std::cos(kTwoPi * term_mode(t, int(i)) * x[i]);
    v += p;
  }
  return v;
}

double eval_second_derivative(const PotentialSpec& spec, std::span<const double> x, int axis_i,
                              int axis_j) {
  double v = 0.0;
  for (const auto& t : spec.term_list()) {
    double wi = kTwoPi * term_mode(t, axis_i);
    double wj = kTwoPi * term_mode(t, axis_j);
    if (wi == 0.0 || wj == 0.0) continue;
    double p = t.amplitude;
    if (axis_i == axis_j) {
      p *= -wi * wi;
      for (std::size_t i = 0; i < x.size(); ++i) p *= std::cos(kTwoPi * term_mode(t, int(i)) * x[i]);
    } else {
      p *= wi * wj;
      for (std::size_t i = 0; i < x.size(); ++i) {
        int m = term_mode(t, int(i));
        if (int(i) == axis_i || int(i) == axis_j)
          p *= std::sin(kTwoPi * m * x[i]);
        else
          p *= std::cos(kTwoPi * m * x[i]);
      }
    }
    v += p;
  }
  return v;
}

namespace {

// Per-term, per-axis tables of cos/sin at every node of a resolution, so the
// big scans below cost table lookups instead of libm calls.
struct TermTables {
  double amplitude;
  double weight2;                       // sum over axes of (2 pi m_a)^2
  std::vector<double> w;                // 2 pi m_a
  std::vector<std::vector<double>> cs;  // [axis][node]
  std::vector<std::vector<double>> sn;  // [axis][node]
};

std::vector<TermTables> build_tables(const std::vector<PotentialTerm>& terms,
                                     const std::vector<int>& sizes) {
  std::vector<TermTables> out;
  out.reserve(terms.size());
  int n = int(sizes.size());
  for (const auto& t : terms) {
    TermTables tt;
    tt.amplitude = t.amplitude;
    tt.weight2 = 0.0;
    tt.w.resize(n);
    tt.cs.resize(n);
    tt.sn.resize(n);
    for (int a = 0; a < n; ++a) {
      int m = term_mode(t, a);
      tt.w[a] = kTwoPi * m;
      tt.weight2 += tt.w[a] * tt.w[a];
      tt.cs[a].resize(sizes[a]);
      tt.sn[a].resize(sizes[a]);
      for (int j = 0; j < sizes[a]; ++j) {
        double arg = kTwoPi * m * (double(j) / double(sizes[a]));
        tt.cs[a][j] = std::cos(arg);
        tt.sn[a][j] = std::sin(arg);
      }
    }
    out.push_back(std::move(tt));
  }
  return out;
}

// Walks all nodes of `sizes` in row-major order and hands (index vector) to fn.
template <typename Fn>
void for_each_node(const std::vector<int>& sizes, Fn&& fn) {
  int n = int(sizes.size());
  std::vector<int> idx(n, 0);
  for (;;) {
    fn(idx);
    int a = n - 1;
    while (a >= 0) {
      if (++idx[a] < sizes[a]) break;
      idx[a] = 0;
      --a;
    }
    if (a < 0) return;
  }
}

struct NodeDerivatives {
  double d1;
  double grad2;  // |grad V|^2
  double lap;
};

NodeDerivatives derivatives_at(const std::vector<TermTables>& tables, const std::vector<int>& idx,
                               std::vector<double>& grad) {
  int n = int(idx.size());
  NodeDerivatives d{0.0, 0.0, 0.0};
  std::fill(grad.begin(), grad.end(), 0.0);
  for (const auto& t : tables) {
    double prod = t.amplitude;
    for (int a = 0; a < n; ++a) prod *= t.cs[a][idx[a]];
    d.lap += -t.weight2 * prod;
    for (int a = 0; a < n; ++a) {
      if (t.w[a] == 0.0) continue;
      double g = -t.amplitude * t.w[a] * t.sn[a][idx[a]];
      for (int b = 0; b < n; ++b)
        if (b != a) g *= t.cs[b][idx[b]];
      grad[a] += g;
    }
  }
  d.d1 = grad[0];
  for (int a = 0; a < n; ++a) d.grad2 += grad[a] * grad[a];
  return d;
}

double delta_scan(const PotentialSpec& spec, const std::vector<int>& sizes, double beta) {
  auto tables = build_tables(spec.term_list(), sizes);
  std::vector<double> grad(sizes.size());

  double d1_sup = 0.0;
  for_each_node(sizes, [&](const std::vector<int>& idx) {
    double d1 = std::abs(derivatives_at(tables, idx, grad).d1);
    if (d1 > d1_sup) d1_sup = d1;
  });

  double maximand = -HUGE_VAL;
  for_each_node(sizes, [&](const std::vector<int>& idx) {
    NodeDerivatives d = derivatives_at(tables, idx, grad);
    double m = 0.5 * d.lap - 0.25 * beta * d.grad2 + 0.5 * beta * std::abs(d.d1) * d1_sup;
    if (m > maximand) maximand = m;
  });
  return -maximand;
}

NodeDerivatives derivatives_at_point(const std::vector<PotentialTerm>& terms,
                                     std::span<const double> x, std::vector<double>& grad) {
  int n = int(x.size());
  NodeDerivatives d{0.0, 0.0, 0.0};
  std::fill(grad.begin(), grad.end(), 0.0);
  for (const auto& t : terms) {
    double prod = t.amplitude;
    double weight2 = 0.0;
    for (int a = 0; a < n; ++a) {
      double w = kTwoPi * term_mode(t, a);
      weight2 += w * w;
      prod *= std::cos(w * x[a]);
    }
    d.lap += -weight2 * prod;
    for (int a = 0; a < n; ++a) {
      double w = kTwoPi * term_mode(t, a);
      if (w == 0.0) continue;
      double g = -t.amplitude * w * std::sin(w * x[a]);
      for (int b = 0; b < n; ++b)
        if (b != a) g *= std::cos(kTwoPi * term_mode(t, b) * x[b]);
      grad[a] += g;
    }
  }
  d.d1 = grad[0];
  for (int a = 0; a < n; ++a) d.grad2 += grad[a] * grad[a];
  return d;
}

/// Global periodic lattice scan, then repeated window shrinks around the
/// running argmax.  Doubling a uniform grid only inserts midpoints and can
/// leave its max unchanged for many rounds, so a plain refine-until-stable
/// loop stalls; zooming instead converges the value past 1e-9 relative.
template <typename F>
double zoom_max(int n, int max_mode, F&& value_at) {
  constexpr int kBasePerAxis[] = {4096, 512, 96, 32};
  int coarse = (n <= 4 ? kBasePerAxis[n - 1] : 16) * std::max(1, max_mode);
  while (std::pow(double(coarse), n) > double(1 << 22)) coarse /= 2;

  std::vector<double> x(n), best_x(n, 0.0), lo(n);
  double best = -HUGE_VAL;
  std::vector<int> sizes(n, coarse);
  for_each_node(sizes, [&](const std::vector<int>& idx) {
    for (int a = 0; a < n; ++a) x[a] = double(idx[a]) / double(coarse);
    double v = value_at(x);
    if (v > best) {
      best = v;
      best_x = x;
    }
  });

  const int kZoomPerAxis = 32;
  double half_width = 2.0 / double(coarse);
  std::vector<int> zoom_sizes(n, kZoomPerAxis + 1);
  for (int round = 0; round < 12; ++round) {
    for (int a = 0; a < n; ++a) lo[a] = best_x[a] - half_width;
    double step = 2.0 * half_width / double(kZoomPerAxis);
    for_each_node(zoom_sizes, [&](const std::vector<int>& idx) {
      for (int a = 0; a < n; ++a) x[a] = lo[a] + step * double(idx[a]);
      double v = value_at(x);
      if (v > best) {
        best = v;
        best_x = x;
      }
    });
    half_width = 2.0 * step;
  }
  return best;
}

int max_abs_mode(const std::vector<PotentialTerm>& terms) {
  int m = 0;
  for (const auto& t : terms)
    for (int mode : t.modes) m = std::max(m, std::abs(mode));
  return m;
}

}  // namespace

double compute_delta_at(const PotentialSpec& spec, const std::vector<int>& sizes, double beta) {
  if (beta <= 0.0) raise(ErrorCode::NonPositiveBeta, "beta must be positive");
  return delta_scan(spec, sizes, beta);
}

double compute_delta(const PotentialSpec& spec, const Grid& g, double beta) {
  if (beta <= 0.0) raise(ErrorCode::NonPositiveBeta, "beta must be positive");
  auto terms = spec.term_list();
  if (terms.empty()) return 0.0;

  // The maximand of an x1-only potential is itself x1-only; scan in 1-D.
  int n = spec.depends_on_x1_only() ? 1 : g.n;
  int mode = max_abs_mode(terms);
  std::vector<double> grad(n);

  double d1_sup = zoom_max(n, mode, [&](std::span<const double> x) {
    return std::abs(derivatives_at_point(terms, x, grad).d1);
  });
  double maximand = zoom_max(n, mode, [&](std::span<const double> x) {
    NodeDerivatives d = derivatives_at_point(terms, x, grad);
    return 0.5 * d.lap - 0.25 * beta * d.grad2 + 0.5 * beta * std::abs(d.d1) * d1_sup;
  });
  return -maximand;
}

PotentialFields eval_fields(const PotentialSpec& spec, const Grid& g) {
  PotentialFields f;
  f.v = make_field(g);
  f.d1 = make_field(g);
  f.d11 = make_field(g);
  f.lap = make_field(g);
  f.grad.assign(g.n, make_field(g));

  auto tables = build_tables(spec.term_list(), g.sizes);
  const std::size_t total = g.total();
  std::vector<int> idx(g.n, 0);
  std::vector<double> grad(g.n);
  for (std::size_t i = 0; i < total; ++i) {
    double v = 0.0, lap = 0.0, d11 = 0.0;
    std::fill(grad.begin(), grad.end(), 0.0);
    for (const auto& t : tables) {
      double prod = t.amplitude;
      for (int a = 0; a < g.n; ++a) prod *= t.cs[a][idx[a]];
      v += prod;
      lap += -t.weight2 * prod;
      d11 += -t.w[0] * t.w[0] * prod;
      for (int a = 0; a < g.n; ++a) {
        if (t.w[a] == 0.0) continue;
        double gcomp = -t.amplitude * t.w[a] * t.sn[a][idx[a]];
        for (int b = 0; b < g.n; ++b)
          if (b != a) gcomp *= t.cs[b][idx[b]];
        grad[a] += gcomp;
      }
    }
    f.v.values[i] = v;
    f.lap.values[i] = lap;
    f.d11.values[i] = d11;
    f.d1.values[i] = grad[0];
    for (int a = 0; a < g.n; ++a) f.grad[a].values[i] = grad[a];

    int a = g.n - 1;
    while (a >= 0) {
      if (++idx[a] < g.sizes[a]) break;
      idx[a] = 0;
      --a;
    }
  }
  return f;
}

PotentialNorms sup_norms(const PotentialSpec& spec, const Grid& g) {
  PotentialFields f = eval_fields(spec, g);
  PotentialNorms n;

  double v_sup = 0.0;
  const std::size_t total = g.total();
  for (std::size_t i = 0; i < total; ++i) {
    v_sup = std::max(v_sup, std::abs(f.v.values[i]));
    n.d1_sup = std::max(n.d1_sup, std::abs(f.d1.values[i]));
    n.lap_sup = std::max(n.lap_sup, std::abs(f.lap.values[i]));
    n.d11_sup = std::max(n.d11_sup, std::abs(f.d11.values[i]));
    double g2 = 0.0;
    for (int a = 0; a < g.n; ++a) g2 += f.grad[a].values[i] * f.grad[a].values[i];
    n.grad_sup = std::max(n.grad_sup, std::sqrt(g2));
  }

  // Sup of every derivative up to second order, plus the largest
  // second-derivative sup in place of the Hoelder seminorm.
  double first_sup = 0.0, second_sup = 0.0;
  std::vector<int> idx(g.n, 0);
  std::vector<double> x(g.n);
  for (std::size_t i = 0; i < total; ++i) {
    for (int a = 0; a < g.n; ++a) x[a] = g.node(a, idx[a]);
    for (int a = 0; a < g.n; ++a) {
      first_sup = std::max(first_sup, std::abs(eval_derivative(spec, x, a)));
      for (int b = a; b < g.n; ++b)
        second_sup = std::max(second_sup, std::abs(eval_second_derivative(spec, x, a, b)));
    }
    int a = g.n - 1;
    while (a >= 0) {
      if (++idx[a] < g.sizes[a]) break;
      idx[a] = 0;
      --a;
    }
  }
  n.c2 = std::max({v_sup, first_sup, second_sup}) + second_sup;
  return n;
}

}  // namespace fpk
