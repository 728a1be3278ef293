#pragma once

// Orchestration behind the command-line subcommands. Each command validates
// its options, runs the library, and writes its artifacts into an output
// directory.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "ddreg/baseline.hpp"
#include "ddreg/config.hpp"
#include "ddreg/harness.hpp"
#include "ddreg/ingest.hpp"
#include "ddreg/report.hpp"
#include "ddreg/selection.hpp"
#include "ddreg/synth.hpp"

namespace ddreg {

inline constexpr const char* kOutDirEnv = "DDREG_OUT_DIR";

// Flag value if given, else $DDREG_OUT_DIR, else "ddreg-out".
inline std::string resolve_out_dir(const std::string& flag) {
  if (!flag.empty()) return flag;
  if (const char* env = std::getenv(kOutDirEnv); env && *env) return env;
  return "ddreg-out";
}

inline std::filesystem::path prepare_out_dir(const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw ConfigError("cannot create output directory '" + dir + "': " + ec.message());
  return dir;
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write '" + path.string() + "'");
  out << text;
}

struct DataOptions {
  std::string path;
  std::string response = "y";
  std::vector<std::string> covariates;  // empty: every other column
  std::vector<std::string> transforms;  // "name=identity|log1p|bspline[:df]"
  double threshold = 0.5;

  [[nodiscard]] json to_json() const {
    return {{"data", path}, {"response", response}, {"covariates", covariates},
            {"transforms", transforms}, {"threshold", threshold}};
  }
};

inline IngestSpec make_ingest_spec(const DataOptions& o) {
  if (o.path.empty()) throw ConfigError("--data is required");
  IngestSpec s;
  s.path = o.path;
  s.response_column = o.response;
  s.threshold = o.threshold;
  s.covariate_columns = o.covariates;
  if (s.covariate_columns.empty()) {
    const CsvTable t = read_csv(o.path);
    for (const auto& h : t.header)
      if (h != o.response) s.covariate_columns.push_back(h);
  }
  for (const auto& tr : o.transforms) {
    const auto eq = tr.find('=');
    if (eq == std::string::npos || eq == 0)
      throw ConfigError("transform '" + tr + "' must look like name=kind");
    s.transforms[tr.substr(0, eq)] = Transform::parse(tr.substr(eq + 1));
  }
  return s;
}

inline IngestReport load_data(const DataOptions& o, std::ostream& log) {
  IngestReport rep = ingest(make_ingest_spec(o));
  log << "read " << rep.rows_read << " rows; dropped " << rep.dropped_missing << " with missing values, "
      << rep.dropped_boundary << " with response outside (0,1); using n = " << rep.data.n()
      << ", p = " << rep.data.p() << '\n';
  return rep;
}

struct BayesOptions {
  DataOptions data;
  std::vector<double> deltas;  // select: grid (default 1/2, 4/10, 1/4, 1/10); fit: one value
  ChainConfig chain;
  std::vector<std::string> contour;  // two covariate names; default first two
  std::string out_dir;
};

// Shared by `fit` (one window) and `select` (a grid).
inline json run_bayes_command(const std::string& command, const BayesOptions& o, std::ostream& log) {
  o.chain.validate();
  const IngestReport rep = load_data(o.data, log);
  const Dataset& data = rep.data;
  const bool untrimmed = command == "fit" && o.deltas.empty();
  if (command == "fit" && o.deltas.size() > 1) throw ConfigError("fit takes a single --delta");
  const DeltaGrid grid = o.deltas.empty() ? DeltaGrid() : DeltaGrid(o.deltas);
  if (!untrimmed) grid.validate(data.t);

  json cfg{{"command", command}, {"data", o.data.to_json()},
           {"deltas", untrimmed ? json(nullptr) : json(grid.deltas())},
           {"chain", to_json(o.chain)}, {"contour", o.contour}};
  const Provenance prov{config_hash(cfg), o.chain.seed};

  const AdaptiveResult res = untrimmed ? full_fit(data, o.chain) : adaptive_fit(data, grid, o.chain);
  const json report = bayes_report(command, data, res, prov);

  const auto dir = prepare_out_dir(resolve_out_dir(o.out_dir));
  write_text(dir / "report.json", report.dump(2) + "\n");
  write_text(dir / "report.txt", format_report_text(report));
  {
    std::ostringstream s;
    write_draws_csv(res.selected().draws.draws, s);
    write_text(dir / "draws.csv", s.str());
  }
  const Eigen::Index p = data.p();
  const Eigen::MatrixXd alpha_draws = res.selected().draws.draws.rightCols(p);
  {
    std::ostringstream s;
    write_jump_profiles(alpha_draws, data.names, s);
    write_text(dir / "jump_profiles.csv", s.str());
  }
  if (p >= 3) {
    Eigen::Index u = 1, v = 2;
    if (!o.contour.empty()) {
      if (o.contour.size() != 2) throw ConfigError("--contour takes exactly two covariate names");
      auto idx = [&](const std::string& name) {
        for (std::size_t k = 1; k < data.names.size(); ++k)
          if (data.names[k] == name) return static_cast<Eigen::Index>(k);
        throw ConfigError("--contour: unknown covariate '" + name + "'");
      };
      u = idx(o.contour[0]);
      v = idx(o.contour[1]);
    }
    std::ostringstream s;
    write_jump_contour(alpha_draws, data.names, u, v, s);
    write_text(dir / "jump_contour.csv", s.str());
  }
  log << format_report_text(report);
  log << "wrote " << dir.string() << "/report.json\n";
  return report;
}

struct BaselineOptions {
  DataOptions data;
  double delta = 0.1;
  std::string method = "logistic";  // or "ols"
  std::string out_dir;
};

inline json run_baseline_command(const BaselineOptions& o, std::ostream& log) {
  BorMethod m;
  if (o.method == "logistic")
    m = BorMethod::Logistic;
  else if (o.method == "ols" || o.method == "least_squares")
    m = BorMethod::LeastSquares;
  else
    throw ConfigError("--method must be logistic or ols");
  const IngestReport rep = load_data(o.data, log);
  const BorFit fit = fit_bor(rep.data, o.delta, m);
  json cfg{{"command", "baseline"}, {"data", o.data.to_json()}, {"delta", o.delta},
           {"method", to_string(m)}};
  const json report = baseline_report(rep.data, o.delta, fit, Provenance{config_hash(cfg), 0});
  const auto dir = prepare_out_dir(resolve_out_dir(o.out_dir));
  write_text(dir / "report.json", report.dump(2) + "\n");
  write_text(dir / "report.txt", format_report_text(report));
  log << format_report_text(report);
  return report;
}

struct SimulateOptions {
  std::string design = "matching";
  std::string alpha = "easy";
  int n = 5000;
  std::uint64_t seed = 1;
  std::string config_path;  // JSON design file; overrides the named design
  std::string out_dir;
};

inline GenDesign resolve_design(const SimulateOptions& o) {
  if (!o.config_path.empty()) return design_from_json(read_json_file(o.config_path));
  GenDesign d = named_design(o.design, parse_alpha_setting(o.alpha), o.n, o.seed);
  d.validate();
  return d;
}

inline Dataset run_simulate_command(const SimulateOptions& o, std::ostream& log) {
  const GenDesign d = resolve_design(o);
  const Dataset data = gen_dataset(d);
  const auto dir = prepare_out_dir(resolve_out_dir(o.out_dir));
  write_dataset_csv(data, (dir / "data.csv").string());
  write_text(dir / "design.json", to_json(d).dump(2) + "\n");
  log << "wrote " << data.n() << " rows to " << (dir / "data.csv").string() << '\n';
  return data;
}

struct StudyOptions {
  std::string design = "matching";
  std::string alpha = "easy";
  std::string estimator = "full";
  std::optional<int> replicates, n, iters, burn_in, keep;
  std::optional<std::uint64_t> seed;
  bool paper_scale = false;
  unsigned threads = default_threads();
  std::string config_path;  // JSON: {design:{..}, estimator, replicates, seed, chain:{..}, paper_scale}
  std::string out_dir;
};

// Precedence: desk defaults, then --paper-scale or the config file, then
// explicit flags.
inline StudyConfig resolve_study(const StudyOptions& o) {
  std::string estimator = o.estimator;
  GenDesign design;
  json j = json::object();
  if (!o.config_path.empty()) {
    j = read_json_file(o.config_path);
    if (!j.is_object()) throw ConfigError("study config must be a JSON object");
    detail::reject_unknown_keys(j, {"design", "estimator", "replicates", "seed", "chain", "paper_scale"},
                                "study");
    design = design_from_json(j.value("design", json::object()));
    estimator = j.value("estimator", estimator);
  } else {
    design = named_design(o.design, parse_alpha_setting(o.alpha));
  }
  const bool design_sets_n = j.contains("design") && j["design"].contains("n");
  const int n_from_file = design.n;
  StudyConfig c = StudyConfig::desk(std::move(design), EstimatorSpec::parse(estimator));
  if (o.paper_scale || j.value("paper_scale", false)) c.use_paper_scale();
  if (design_sets_n) c.design.n = n_from_file;
  detail::read_opt(j, "replicates", c.replicates);
  detail::read_opt(j, "seed", c.seed);
  if (j.contains("chain")) c.chain = chain_from_json(j["chain"], c.chain);
  if (o.replicates) c.replicates = *o.replicates;
  if (o.n) c.design.n = *o.n;
  if (o.seed) c.seed = *o.seed;
  if (o.iters) c.chain.total_iters = *o.iters;
  if (o.burn_in) c.chain.burn_in = *o.burn_in;
  if (o.keep) c.chain.keep = *o.keep;
  c.chain.validate();
  c.design.validate();
  c.threads = std::max(1u, o.threads);
  return c;
}

inline StudyResult run_study_command(const StudyOptions& o, std::ostream& log) {
  StudyConfig c = resolve_study(o);
  const auto dir = prepare_out_dir(resolve_out_dir(o.out_dir));
  c.records_path = (dir / "records.jsonl").string();
  log << "study: " << c.replicates << " replicates, n = " << c.design.n << ", estimator "
      << c.estimator.str() << ", chain " << c.chain.total_iters << "/" << c.chain.burn_in << "/"
      << c.chain.keep << '\n';
  const StudyResult res = run_study(c);
  const DeltaGrid* grid =
      c.estimator.kind == EstimatorSpec::Kind::BayesAdaptive ? &c.estimator.grid : nullptr;
  const std::string table = format_metrics_table(res.metrics, res.trim_percent, grid);
  write_text(dir / "table.txt", table);
  write_text(dir / "metrics.csv", format_metrics_csv(res.metrics));
  json summary{{"config", c.to_json_config()},
               {"config_hash", config_hash(c.to_json_config())},
               {"failures", res.failures},
               {"trim_percent", res.trim_percent}};
  json errors = json::array();
  for (const auto& r : res.records)
    if (!r.ok) errors.push_back({{"replicate", r.replicate}, {"error", r.error}});
  summary["errors"] = errors;
  write_text(dir / "study.json", summary.dump(2) + "\n");
  log << table;
  if (res.failures) log << res.failures << " replicate(s) failed; see study.json\n";
  return res;
}

}  // namespace ddreg
