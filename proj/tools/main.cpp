#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "fpk/config.hpp"
#include "fpk/diagnostics.hpp"
#include "fpk/errors.hpp"
#include "fpk/evolution.hpp"
#include "fpk/output.hpp"
#include "fpk/semigroup.hpp"
#include "fpk/snapshot.hpp"

namespace {

// Exit-status contract: 0 checks pass or converge, 1 a check failed,
// 2 solver error, 3 config error.
constexpr int kExitPass = 0;
constexpr int kExitCheckFailed = 1;
constexpr int kExitSolverError = 2;
constexpr int kExitConfigError = 3;

bool is_refinement_check(const std::string& name) {
  return name == "marginal_heat" || name == "supersolution" ||
         name == "formulation_equivalence";
}

std::vector<std::string> split_commas(const std::string& s) {
  std::vector<std::string> out;
  std::string item;
  std::stringstream ss(s);
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(item);
  return out;
}

struct RunOptions {
  std::string config_path;
  std::string output_dir;  // overrides the config when set
  std::string checks;      // comma-separated override
  int threads = 0;         // 0 keeps the default
};

int do_run(const RunOptions& opt) {
  std::ifstream is(opt.config_path);
  if (!is) {
    std::cerr << "cannot read config '" << opt.config_path << "'\n";
    return kExitConfigError;
  }
  std::stringstream buffer;
  buffer << is.rdbuf();

  fpk::RunConfig cfg;
  try {
    cfg = fpk::parse_config(buffer.str());
  } catch (const fpk::Error& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfigError;
  }

  if (!opt.output_dir.empty()) cfg.output_dir = opt.output_dir;
  if (!opt.checks.empty()) {
    cfg.checks = split_commas(opt.checks);
    for (const auto& name : cfg.checks)
      if (!fpk::is_known_check(name)) {
        std::cerr << "config error: unknown check '" << name << "'\n";
        return kExitConfigError;
      }
  }
  if (opt.threads > 0) fpk::detail::set_pointwise_threads(opt.threads);

  std::error_code ec;
  std::filesystem::create_directories(cfg.output_dir, ec);
  if (ec) {
    std::cerr << "cannot create output directory '" << cfg.output_dir << "': " << ec.message()
              << '\n';
    return kExitConfigError;
  }

  fpk::SnapshotSink sink;
  if (cfg.snapshot_every > 0)
    sink = [&cfg](long long step, double t, const fpk::DensityField& f) {
      fpk::save_snapshot(f, t, cfg.output_dir + "/snapshot_" + std::to_string(step) + ".fpk");
    };

  std::vector<fpk::RunHistory> ladder;
  try {
    ladder.push_back(fpk::run(cfg, sink));
  } catch (const fpk::Error& e) {
    std::cerr << "solver error: " << e.what() << '\n';
    return kExitSolverError;
  }

  bool needs_ladder =
      std::any_of(cfg.checks.begin(), cfg.checks.end(), is_refinement_check);
  if (needs_ladder && !ladder.front().aborted) {
    for (int rung = 1; rung < 3; ++rung) {
      fpk::RunConfig refined = cfg;
      refined.dt = cfg.dt / double(1 << rung);
      refined.snapshot_every = 0;
      try {
        ladder.push_back(fpk::run(refined));
      } catch (const fpk::Error& e) {
        std::cerr << "solver error on the dt/" << (1 << rung) << " refinement: " << e.what()
                  << '\n';
        return kExitSolverError;
      }
    }
  }

  const fpk::RunHistory& base = ladder.front();
  fpk::write_series_csv(base, cfg.output_dir + "/series.csv");
  fpk::write_plot_data(base, cfg.output_dir + "/plots");
  fpk::write_plot_svgs(base, cfg.output_dir + "/plots");

  std::vector<fpk::PropertyReport> reports;
  int rc = kExitPass;
  if (base.aborted) {
    fpk::PropertyReport r;
    r.name = "solver_error";
    r.status = fpk::CheckStatus::Fail;
    r.t_worst = base.abort_time;
    r.details = base.abort_message;
    reports.push_back(r);
    rc = kExitSolverError;
    std::cerr << "solver error at t = " << base.abort_time << ": " << base.abort_message << '\n';
  } else {
    try {
      reports = fpk::run_checks(cfg.checks, ladder);
    } catch (const fpk::Error& e) {
      std::cerr << "check error: " << e.what() << '\n';
      bool config_level = e.code() == fpk::ErrorCode::SupersolutionNotEnabled ||
                          e.code() == fpk::ErrorCode::UnknownKey;
      return config_level ? kExitConfigError : kExitSolverError;
    }
    for (const auto& r : reports) {
      std::printf("%-24s %-11s measured %.6g  threshold %.6g\n", r.name.c_str(),
                  fpk::to_string(r.status), r.measured, r.threshold);
      if (!r.details.empty()) std::printf("%-24s %s\n", "", r.details.c_str());
      if (r.status == fpk::CheckStatus::Fail) rc = kExitCheckFailed;
    }
  }
  fpk::write_reports_csv(reports, cfg.output_dir + "/reports.csv");
  return rc;
}

struct SemigroupOptions {
  double sigma = 0.0;
  double beta = 1.0;
  int grid = 64;
  int samples = 40;
};

int do_verify_semigroup(const SemigroupOptions& opt) {
  fpk::Grid g = fpk::make_grid(2, {opt.grid, opt.grid});
  auto ts = fpk::log_spaced(1e-4, 10.0, opt.samples);
  fpk::EstimateReport rep = fpk::verify_decay_estimate(g, opt.sigma, opt.beta, ts);
  std::printf("sigma      %.6g\n", rep.sigma);
  std::printf("beta       %.6g\n", rep.beta);
  std::printf("kappa      %.17g\n", rep.kappa);
  std::printf("C_sigma    %.17g  (peak at t = %.6g)\n", rep.c_sigma, rep.t_at_max);
  std::printf("refined    %.17g  (growth %.3g%%)\n", rep.c_sigma_refined, 100.0 * rep.growth);
  std::printf("stable     %s\n", rep.stable ? "yes" : "no");
  return rep.stable ? kExitPass : kExitCheckFailed;
}

int do_inspect(const std::string& path) {
  auto [f, t] = fpk::load_snapshot(path);
  std::printf("dimensions %d\n", f.grid.n);
  std::printf("sizes     ");
  for (int s : f.grid.sizes) std::printf(" %d", s);
  std::printf("\n");
  std::printf("time       %.17g\n", t);
  double mn = f.values.front(), mx = f.values.front();
  for (double v : f.values) {
    mn = std::min(mn, v);
    mx = std::max(mx, v);
  }
  std::printf("min        %.17g\n", mn);
  std::printf("max        %.17g\n", mx);
  std::printf("mass       %.17g\n", fpk::integrate(f));
  return kExitPass;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"pseudospectral solver and property harness for the biased Fokker-Planck equation"};
  app.require_subcommand(1);

  RunOptions run_opt;
  auto* run_cmd = app.add_subcommand("run", "integrate a config and run its checks");
  run_cmd->add_option("config", run_opt.config_path, "path to a key = value config file")
      ->required();
  run_cmd->add_option("--output-dir", run_opt.output_dir, "override the config output_dir");
  run_cmd->add_option("--checks", run_opt.checks, "comma-separated check names to run");
  run_cmd->add_option("--threads", run_opt.threads, "worker threads for element-wise loops");

  SemigroupOptions semi_opt;
  auto* semi_cmd =
      app.add_subcommand("verify-semigroup", "measure the heat-semigroup decay constant");
  semi_cmd->add_option("--sigma", semi_opt.sigma, "Sobolev smoothing exponent in [0, 4]")
      ->required();
  semi_cmd->add_option("--beta", semi_opt.beta, "inverse temperature")->required();
  semi_cmd->add_option("--grid", semi_opt.grid, "per-axis grid size (default 64)");
  semi_cmd->add_option("--samples", semi_opt.samples, "log-spaced sample count (default 40)");

  std::string snapshot_path;
  auto* inspect_cmd = app.add_subcommand("inspect", "print a snapshot header and field summary");
  inspect_cmd->add_option("snapshot", snapshot_path, "path to a .fpk snapshot")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? kExitPass : kExitConfigError;
  }

  try {
    if (run_cmd->parsed()) return do_run(run_opt);
    if (semi_cmd->parsed()) return do_verify_semigroup(semi_opt);
    if (inspect_cmd->parsed()) return do_inspect(snapshot_path);
  } catch (const fpk::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitSolverError;
  }
  return kExitConfigError;
}
