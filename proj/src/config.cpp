#include "fpk/config.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <map>
#include <sstream>

#include "fpk/util.hpp"

namespace fpk {

const char* to_string(Scheme s) { return s == Scheme::Imex ? "imex" : "picard"; }

const char* to_string(InitialKind k) {
  switch (k) {
    case InitialKind::Uniform: return "uniform";
    case InitialKind::CosinePerturbed: return "cosine-perturbed";
    case InitialKind::GibbsLike: return "gibbs-like";
  }
  return "?";
}

namespace {

const char* kKnownChecks[] = {"mass",          "positivity",   "marginal_heat",
                              "phi_bound",     "supersolution", "f_bound",
                              "orbit_bounded", "formulation_equivalence"};

}  // namespace

bool is_known_check(const std::string& name) {
  for (const char* c : kKnownChecks)
    if (name == c) return true;
  return false;
}

namespace {

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_ws(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream in(s);
  std::string tok;
  while (in >> tok) out.push_back(tok);
  return out;
}

[[noreturn]] void fail(ErrorCode code, int line, const std::string& msg) {
  raise(code, "line " + std::to_string(line) + ": " + msg);
}

double parse_double(const std::string& s, int line, const std::string& key) {
  const char* p = s.c_str();
  char* end = nullptr;
  double v = std::strtod(p, &end);
  if (end != p + s.size() || s.empty())
    fail(ErrorCode::TypeMismatch, line, key + " expects a number, got '" + s + "'");
  return v;
}

long parse_int(const std::string& s, int line, const std::string& key) {
  const char* p = s.c_str();
  char* end = nullptr;
  long v = std::strtol(p, &end, 10);
  if (end != p + s.size() || s.empty())
    fail(ErrorCode::TypeMismatch, line, key + " expects an integer, got '" + s + "'");
  return v;
}

bool parse_bool(const std::string& s, int line, const std::string& key) {
  if (s == "true") return true;
  if (s == "false") return false;
  fail(ErrorCode::TypeMismatch, line, key + " expects true or false, got '" + s + "'");
}

// "name k=v k=v" with numeric params.
std::map<std::string, double> parse_params(const std::vector<std::string>& toks, int line,
                                           const std::string& what) {
  std::map<std::string, double> params;
  for (std::size_t i = 1; i < toks.size(); ++i) {
    std::size_t eq = toks[i].find('=');
    if (eq == std::string::npos)
      fail(ErrorCode::TypeMismatch, line, what + " parameter '" + toks[i] + "' is not k=v");
    params[toks[i].substr(0, eq)] =
        parse_double(toks[i].substr(eq + 1), line, what + " parameter " + toks[i].substr(0, eq));
  }
  return params;
}

PotentialSpec parse_potential(const std::string& value, int line) {
  auto toks = split_ws(value);
  if (toks.empty()) fail(ErrorCode::TypeMismatch, line, "potential expects a kind");
  const std::string& kind = toks[0];
  if (kind == "zero") {
    if (toks.size() != 1) fail(ErrorCode::TypeMismatch, line, "zero potential takes no parameters");
    return PotentialSpec::zero();
  }
  if (kind == "cosine1d") {
    auto p = parse_params(toks, line, "potential");
    if (p.size() != 1 || !p.count("a"))
      fail(ErrorCode::TypeMismatch, line, "cosine1d expects exactly a=<value>");
    return PotentialSpec::cosine1d(p["a"]);
  }
  if (kind == "coupled") {
    auto p = parse_params(toks, line, "potential");
    if (p.size() != 2 || !p.count("a") || !p.count("c"))
      fail(ErrorCode::TypeMismatch, line, "coupled expects a=<value> c=<value>");
    return PotentialSpec::coupled(p["a"], p["c"]);
  }
  if (kind == "custom-series") {
    // term tokens amp:m1:m2:...
    std::vector<PotentialTerm> terms;
    for (std::size_t i = 1; i < toks.size(); ++i) {
      PotentialTerm t;
      std::istringstream in(toks[i]);
      std::string piece;
      bool first = true;
      while (std::getline(in, piece, ':')) {
        if (first) {
          t.amplitude = parse_double(piece, line, "custom-series amplitude");
          first = false;
        } else {
          t.modes.push_back(int(parse_int(piece, line, "custom-series mode")));
        }
      }
      if (first) fail(ErrorCode::TypeMismatch, line, "empty custom-series term");
      terms.push_back(std::move(t));
    }
    return PotentialSpec::custom(std::move(terms));
  }
  fail(ErrorCode::TypeMismatch, line, "unknown potential kind '" + kind + "'");
}

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

RunConfig parse_config(const std::string& text) {
  RunConfig c;
  std::map<std::string, int> seen;  // key -> line of last occurrence

  std::istringstream in(text);
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    std::string s = raw;
    std::size_t hash = s.find('#');
    if (hash != std::string::npos) s = s.substr(0, hash);
    s = trim(s);
    if (s.empty()) continue;

    std::size_t eq = s.find('=');
    if (eq == std::string::npos)
      fail(ErrorCode::TypeMismatch, line, "expected key = value, got '" + s + "'");
    std::string key = trim(s.substr(0, eq));
    std::string value = trim(s.substr(eq + 1));
    seen[key] = line;

    if (key == "dim") {
      c.dim = int(parse_int(value, line, key));
      if (c.dim < 2)
        fail(ErrorCode::ConstraintViolation, line, "dim must be at least 2 (the solver needs a marginal direction)");
    } else if (key == "grid") {
      c.grid_sizes.clear();
      for (const auto& tok : split_ws(value)) c.grid_sizes.push_back(int(parse_int(tok, line, key)));
      if (c.grid_sizes.empty()) fail(ErrorCode::TypeMismatch, line, "grid expects sizes");
      for (int N : c.grid_sizes) {
        if (N < 8) fail(ErrorCode::ConstraintViolation, line, "grid size " + std::to_string(N) + " below minimum 8");
        if (N % 2) fail(ErrorCode::ConstraintViolation, line, "grid size " + std::to_string(N) + " must be even");
      }
    } else if (key == "beta") {
      c.beta = parse_double(value, line, key);
      if (c.beta <= 0.0) fail(ErrorCode::ConstraintViolation, line, "beta must be positive");
    } else if (key == "potential") {
      c.potential = parse_potential(value, line);
    } else if (key == "initial") {
      auto toks = split_ws(value);
      if (toks.empty()) fail(ErrorCode::TypeMismatch, line, "initial expects a kind");
      if (toks[0] == "uniform") {
        if (toks.size() != 1) fail(ErrorCode::TypeMismatch, line, "uniform takes no parameters");
        c.initial = InitialKind::Uniform;
      } else if (toks[0] == "gibbs-like") {
        if (toks.size() != 1) fail(ErrorCode::TypeMismatch, line, "gibbs-like takes no parameters");
        c.initial = InitialKind::GibbsLike;
      } else if (toks[0] == "cosine-perturbed") {
        c.initial = InitialKind::CosinePerturbed;
        auto p = parse_params(toks, line, "initial");
        if (p.count("a")) {
          c.initial_amplitude = p["a"];
          p.erase("a");
        }
        if (!p.empty()) fail(ErrorCode::TypeMismatch, line, "cosine-perturbed takes only a=<value>");
        if (c.initial_amplitude < 0.0)
          fail(ErrorCode::ConstraintViolation, line, "perturbation amplitude must be non-negative");
      } else {
        fail(ErrorCode::TypeMismatch, line, "unknown initial kind '" + toks[0] + "'");
      }
    } else if (key == "dt") {
      c.dt = parse_double(value, line, key);
      if (c.dt <= 0.0) fail(ErrorCode::ConstraintViolation, line, "dt must be positive");
    } else if (key == "t_final") {
      c.t_final = parse_double(value, line, key);
      if (c.t_final < 0.0) fail(ErrorCode::ConstraintViolation, line, "t_final must be non-negative");
    } else if (key == "scheme") {
      if (value == "imex") c.scheme = Scheme::Imex;
      else if (value == "picard") c.scheme = Scheme::Picard;
      else fail(ErrorCode::TypeMismatch, line, "scheme must be imex or picard");
    } else if (key == "picard_tol") {
      c.picard_tol = parse_double(value, line, key);
      if (c.picard_tol <= 0.0) fail(ErrorCode::ConstraintViolation, line, "picard_tol must be positive");
    } else if (key == "picard_max_iter") {
      c.picard_max_iter = int(parse_int(value, line, key));
      if (c.picard_max_iter < 1) fail(ErrorCode::ConstraintViolation, line, "picard_max_iter must be >= 1");
    } else if (key == "conservative_form") {
      c.conservative_form = parse_bool(value, line, key);
    } else if (key == "domain_floor") {
      c.domain_floor = parse_double(value, line, key);
      if (c.domain_floor < 0.0) fail(ErrorCode::ConstraintViolation, line, "domain_floor must be non-negative");
    } else if (key == "supersolution") {
      c.supersolution = parse_bool(value, line, key);
    } else if (key == "series_every") {
      c.series_every = int(parse_int(value, line, key));
      if (c.series_every < 1) fail(ErrorCode::ConstraintViolation, line, "series_every must be >= 1");
    } else if (key == "snapshot_every") {
      c.snapshot_every = int(parse_int(value, line, key));
      if (c.snapshot_every < 0) fail(ErrorCode::ConstraintViolation, line, "snapshot_every must be >= 0");
    } else if (key == "output_dir") {
      if (value.empty()) fail(ErrorCode::TypeMismatch, line, "output_dir expects a path");
      c.output_dir = value;
    } else if (key == "checks") {
      c.checks = split_ws(value);
      for (const auto& name : c.checks)
        if (!is_known_check(name))
          fail(ErrorCode::ConstraintViolation, line, "unknown check '" + name + "'");
    } else {
      fail(ErrorCode::UnknownKey, line, "'" + key + "'");
    }
  }

  for (const char* req : {"dim", "grid", "beta", "potential", "dt", "t_final"})
    if (!seen.count(req)) raise(ErrorCode::MissingRequired, std::string("'") + req + "' was not set");

  if (int(c.grid_sizes.size()) != c.dim)
    fail(ErrorCode::ConstraintViolation, seen["grid"],
         "grid lists " + std::to_string(c.grid_sizes.size()) + " sizes for dim = " +
             std::to_string(c.dim));
  return c;
}

std::string render_config(const RunConfig& c) {
  std::ostringstream out;
  out << "dim = " << c.dim << "\n";
  out << "grid =";
  for (int N : c.grid_sizes) out << " " << N;
  out << "\n";
  out << "beta = " << fmt_double(c.beta) << "\n";
  out << "potential = ";
  switch (c.potential.kind) {
    case PotentialKind::Zero:
      out << "zero";
      break;
    case PotentialKind::Cosine1d:
      out << "cosine1d a=" << fmt_double(c.potential.a);
      break;
    case PotentialKind::Coupled:
      out << "coupled a=" << fmt_double(c.potential.a) << " c=" << fmt_double(c.potential.c);
      break;
    case PotentialKind::CustomSeries:
      out << "custom-series";
      for (const auto& t : c.potential.terms) {
        out << " " << fmt_double(t.amplitude);
        for (int m : t.modes) out << ":" << m;
      }
      break;
  }
  out << "\n";
  out << "initial = " << to_string(c.initial);
  if (c.initial == InitialKind::CosinePerturbed) out << " a=" << fmt_double(c.initial_amplitude);
  out << "\n";
  out << "dt = " << fmt_double(c.dt) << "\n";
  out << "t_final = " << fmt_double(c.t_final) << "\n";
  out << "scheme = " << to_string(c.scheme) << "\n";
  out << "picard_tol = " << fmt_double(c.picard_tol) << "\n";
  out << "picard_max_iter = " << c.picard_max_iter << "\n";
  out << "conservative_form = " << (c.conservative_form ? "true" : "false") << "\n";
  out << "domain_floor = " << fmt_double(c.domain_floor) << "\n";
  out << "supersolution = " << (c.supersolution ? "true" : "false") << "\n";
  out << "series_every = " << c.series_every << "\n";
  out << "snapshot_every = " << c.snapshot_every << "\n";
  out << "output_dir = " << c.output_dir << "\n";
  if (!c.checks.empty()) {
    out << "checks =";
    for (const auto& name : c.checks) out << " " << name;
    out << "\n";
  }
  return out.str();
}

DensityField build_initial(const RunConfig& c) {
  Grid g = make_grid(c.dim, c.grid_sizes);
  DensityField psi = make_field(g, 1.0);

  if (c.initial == InitialKind::CosinePerturbed) {
    const double two_pi = 2.0 * M_PI;
    const std::size_t total = g.total();
    for (std::size_t i = 0; i < total; ++i) {
      double x0 = g.node(0, g.axis_index(0, i));
      double x1 = g.node(1, g.axis_index(1, i));
      double v = 1.0 + c.initial_amplitude * std::cos(two_pi * x0) * std::cos(two_pi * x1);
      psi.values[i] = v < 1e-12 ? 1e-12 : v;  // keep strictly positive
    }
  } else if (c.initial == InitialKind::GibbsLike) {
    PotentialFields pot = eval_fields(c.potential, g);
    const std::size_t total = g.total();
    for (std::size_t i = 0; i < total; ++i) psi.values[i] = std::exp(-c.beta * pot.v.values[i]);
  }

  double mass = integrate(psi);
  for (double& v : psi.values) v /= mass;
  return psi;
}

}  // namespace fpk
