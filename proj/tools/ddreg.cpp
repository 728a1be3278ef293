// ddreg: fit, select, baseline, study and simulate subcommands.
//
// Exit codes: 0 success, 2 configuration error, 3 data error,
// 4 numerical failure.

#include <CLI11.hpp>

#include <iostream>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "ddreg/commands.hpp"

namespace {

void add_data_flags(CLI::App* cmd, ddreg::DataOptions& d) {
  cmd->add_option("--data", d.path, "input CSV (header row, empty cell = missing)")->required();
  cmd->add_option("--response", d.response, "response column")->capture_default_str();
  cmd->add_option("--covariates", d.covariates, "covariate columns (default: all but the response)")
      ->delimiter(',');
  cmd->add_option("--transform", d.transforms, "NAME=identity|log1p|bspline[:DF], repeatable");
  cmd->add_option("--threshold", d.threshold, "threshold t in (0,1)")->capture_default_str();
}

void add_chain_flags(CLI::App* cmd, ddreg::ChainConfig& c) {
  cmd->add_option("--iters", c.total_iters, "total sampler iterations")->capture_default_str();
  cmd->add_option("--burn-in", c.burn_in, "iterations discarded")->capture_default_str();
  cmd->add_option("--keep", c.keep, "thinned draws retained")->capture_default_str();
  cmd->add_option("--seed", c.seed, "sampler seed")->capture_default_str();
}

template <class F>
int guarded(F&& f) {
  try {
    f();
    return 0;
  } catch (const ddreg::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const ddreg::DataError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return 3;
  } catch (const ddreg::NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return 4;
  } catch (const std::domain_error& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return 4;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Regression with a density discontinuity at a known threshold"};
  app.require_subcommand(1);
  std::string out_dir;
  app.add_option("--out-dir", out_dir, "output directory (env DDREG_OUT_DIR, default ddreg-out)");

  ddreg::BayesOptions fit_opt;
  auto* fit = app.add_subcommand("fit", "Bayesian fit on one trimming window");
  add_data_flags(fit, fit_opt.data);
  add_chain_flags(fit, fit_opt.chain);
  std::optional<double> fit_delta;
  fit->add_option("--delta", fit_delta, "window half-width (default: whole unit interval)");
  fit->add_option("--contour", fit_opt.contour, "two covariates for the contour grid")->expected(2);
  fit->add_option("--out-dir", out_dir, "output directory");

  ddreg::BayesOptions sel_opt;
  auto* sel = app.add_subcommand("select", "fit every window of a grid and pick the minimum WAIC");
  add_data_flags(sel, sel_opt.data);
  add_chain_flags(sel, sel_opt.chain);
  sel->add_option("--delta-grid", sel_opt.deltas, "comma-separated window half-widths")
      ->delimiter(',');
  sel->add_option("--contour", sel_opt.contour, "two covariates for the contour grid")->expected(2);
  sel->add_option("--out-dir", out_dir, "output directory");

  ddreg::BaselineOptions base_opt;
  auto* base = app.add_subcommand("baseline", "trimmed binary-outcome regression");
  add_data_flags(base, base_opt.data);
  base->add_option("--delta", base_opt.delta, "window half-width")->capture_default_str();
  base->add_option("--method", base_opt.method, "logistic or ols")->capture_default_str();
  base->add_option("--out-dir", out_dir, "output directory");

  ddreg::SimulateOptions sim_opt;
  auto* sim = app.add_subcommand("simulate", "write a synthetic dataset");
  sim->add_option("--design", sim_opt.design, "matching, mixture or decaying")->capture_default_str();
  sim->add_option("--alpha", sim_opt.alpha, "easy or hard")->capture_default_str();
  sim->add_option("--n", sim_opt.n, "sample size")->capture_default_str();
  sim->add_option("--seed", sim_opt.seed, "generator seed")->capture_default_str();
  sim->add_option("--config", sim_opt.config_path, "JSON design file (overrides the flags above)");
  sim->add_option("--out-dir", out_dir, "output directory");

  ddreg::StudyOptions study_opt;
  auto* study = app.add_subcommand("study", "replicate study on synthetic data");
  study->add_option("--design", study_opt.design, "matching, mixture or decaying")
      ->capture_default_str();
  study->add_option("--alpha", study_opt.alpha, "easy or hard")->capture_default_str();
  study->add_option("--estimator", study_opt.estimator,
                    "full | trimmed:D | adaptive[:D1,D2,..] | bolr:D | ols:D")
      ->capture_default_str();
  study->add_option("--replicates", study_opt.replicates, "replicate count (default 20)");
  study->add_option("--n", study_opt.n, "sample size per replicate (default 2000)");
  study->add_option("--iters", study_opt.iters, "total sampler iterations (default 4000)");
  study->add_option("--burn-in", study_opt.burn_in, "burn-in (default 2000)");
  study->add_option("--keep", study_opt.keep, "retained draws (default 500)");
  study->add_option("--seed", study_opt.seed, "study seed (default 1)");
  study->add_flag("--paper-scale", study_opt.paper_scale,
                  "100 replicates, n = 5000, 10000/5000/1000 iterations");
  study->add_option("--threads", study_opt.threads, "worker threads")->capture_default_str();
  study->add_option("--config", study_opt.config_path, "JSON study file");
  study->add_option("--out-dir", out_dir, "output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  return guarded([&] {
    if (*fit) {
      fit_opt.out_dir = out_dir;
      if (fit_delta) fit_opt.deltas = {*fit_delta};
      ddreg::run_bayes_command("fit", fit_opt, std::cout);
    } else if (*sel) {
      sel_opt.out_dir = out_dir;
      ddreg::run_bayes_command("select", sel_opt, std::cout);
    } else if (*base) {
      base_opt.out_dir = out_dir;
      ddreg::run_baseline_command(base_opt, std::cout);
    } else if (*sim) {
      sim_opt.out_dir = out_dir;
      ddreg::run_simulate_command(sim_opt, std::cout);
    } else if (*study) {
      study_opt.out_dir = out_dir;
      ddreg::run_study_command(study_opt, std::cout);
    }
  });
}
