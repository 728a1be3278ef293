#pragma once

// Replicate studies: generate data sets from a design, fit each with one
// estimator, and fold the per-replicate results into bias / rmse / coverage /
// sign-recovery rows. Per-replicate records are appended to a JSON-lines file
// so an interrupted study resumes where it stopped.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "ddreg/baseline.hpp"
#include "ddreg/config.hpp"
#include "ddreg/parallel.hpp"
#include "ddreg/sampler.hpp"
#include "ddreg/selection.hpp"
#include "ddreg/synth.hpp"

namespace ddreg {

struct EstimatorSpec {
  enum class Kind { BayesFull, BayesTrimmed, BayesAdaptive, Bolr, Ols };
  Kind kind = Kind::BayesFull;
  double delta = 0.5;  // BayesTrimmed, Bolr, Ols
  DeltaGrid grid{};    // BayesAdaptive

  [[nodiscard]] bool is_bayes() const {
    return kind == Kind::BayesFull || kind == Kind::BayesTrimmed || kind == Kind::BayesAdaptive;
  }

  // "full", "trimmed:0.25", "adaptive", "adaptive:0.5,0.25", "bolr:0.1", "ols:0.1"
  static EstimatorSpec parse(const std::string& s) {
    EstimatorSpec e;
    const auto colon = s.find(':');
    const std::string head = s.substr(0, colon);
    const std::string arg = colon == std::string::npos ? "" : s.substr(colon + 1);
    auto number = [&](const std::string& v) {
      try {
        std::size_t used = 0;
        const double x = std::stod(v, &used);
        if (used != v.size()) throw std::invalid_argument(v);
        return x;
      } catch (const std::exception&) {
        throw ConfigError("estimator '" + s + "': '" + v + "' is not a number");
      }
    };
    if (head == "full") {
      e.kind = Kind::BayesFull;
    } else if (head == "trimmed" || head == "bolr" || head == "ols") {
      if (arg.empty()) throw ConfigError("estimator '" + head + "' needs a delta, e.g. " + head + ":0.1");
      e.kind = head == "trimmed" ? Kind::BayesTrimmed : head == "bolr" ? Kind::Bolr : Kind::Ols;
      e.delta = number(arg);
    } else if (head == "adaptive") {
      e.kind = Kind::BayesAdaptive;
      if (!arg.empty()) {
        std::vector<double> ds;
        std::stringstream ss(arg);
        for (std::string tok; std::getline(ss, tok, ',');) ds.push_back(number(tok));
        e.grid = DeltaGrid(ds);
      }
    } else {
      throw ConfigError("unknown estimator '" + s +
                        "' (expected full, trimmed:D, adaptive[:D1,D2,..], bolr:D, ols:D)");
    }
    return e;
  }

  [[nodiscard]] std::string str() const {
    auto num = [](double v) {
      std::ostringstream o;
      o << v;
      return o.str();
    };
    switch (kind) {
      case Kind::BayesFull: return "full";
      case Kind::BayesTrimmed: return "trimmed:" + num(delta);
      case Kind::Bolr: return "bolr:" + num(delta);
      case Kind::Ols: return "ols:" + num(delta);
      case Kind::BayesAdaptive: {
        std::string s = "adaptive:";
        for (std::size_t k = 0; k < grid.size(); ++k) s += (k ? "," : "") + num(grid.deltas()[k]);
        return s;
      }
    }
    return "";
  }
};

struct DeltaEstimate {
  double delta = 0.0;
  std::size_t n_window = 0;
  WaicReport waic;
  std::vector<CoefSummary> alpha;
};

struct ReplicateRecord {
  int replicate = 0;
  std::uint64_t dataset_seed = 0;
  std::uint64_t chain_seed = 0;
  bool ok = true;
  std::string error;
  std::vector<CoefSummary> alpha;  // estimates and intervals of the coefficients of interest
  std::optional<double> selected_delta;
  std::vector<DeltaEstimate> per_delta;  // adaptive runs only
};

inline json to_json(const CoefSummary& c) {
  return {{"estimate", c.estimate}, {"lo95", c.lo95}, {"hi95", c.hi95}};
}
inline CoefSummary coef_from_json(const json& j) {
  return {j.at("estimate").get<double>(), j.at("lo95").get<double>(), j.at("hi95").get<double>()};
}

inline json to_json(const ReplicateRecord& r, const std::string& study_hash) {
  json j{{"study", study_hash},  {"replicate", r.replicate}, {"dataset_seed", r.dataset_seed},
         {"chain_seed", r.chain_seed}, {"ok", r.ok}};
  if (!r.ok) j["error"] = r.error;
  json a = json::array();
  for (const auto& c : r.alpha) a.push_back(to_json(c));
  j["alpha"] = a;
  if (r.selected_delta) j["selected_delta"] = *r.selected_delta;
  if (!r.per_delta.empty()) {
    json pd = json::array();
    for (const auto& d : r.per_delta) {
      json aa = json::array();
      for (const auto& c : d.alpha) aa.push_back(to_json(c));
      pd.push_back({{"delta", d.delta},
                    {"n_window", d.n_window},
                    {"waic_fit", d.waic.fit_term},
                    {"waic_complexity", d.waic.complexity_term},
                    {"waic_total", d.waic.total},
                    {"subset_size", d.waic.subset_size},
                    {"alpha", aa}});
    }
    j["per_delta"] = pd;
  }
  return j;
}

inline ReplicateRecord record_from_json(const json& j) {
  ReplicateRecord r;
  r.replicate = j.at("replicate").get<int>();
  r.dataset_seed = j.at("dataset_seed").get<std::uint64_t>();
  r.chain_seed = j.at("chain_seed").get<std::uint64_t>();
  r.ok = j.at("ok").get<bool>();
  if (j.contains("error")) r.error = j["error"].get<std::string>();
  for (const auto& c : j.at("alpha")) r.alpha.push_back(coef_from_json(c));
  if (j.contains("selected_delta")) r.selected_delta = j["selected_delta"].get<double>();
  if (j.contains("per_delta"))
    for (const auto& d : j["per_delta"]) {
      DeltaEstimate e;
      e.delta = d.at("delta").get<double>();
      e.n_window = d.at("n_window").get<std::size_t>();
      e.waic.fit_term = d.at("waic_fit").get<double>();
      e.waic.complexity_term = d.at("waic_complexity").get<double>();
      e.waic.total = d.at("waic_total").get<double>();
      e.waic.subset_size = d.at("subset_size").get<std::size_t>();
      for (const auto& c : d.at("alpha")) e.alpha.push_back(coef_from_json(c));
      r.per_delta.push_back(std::move(e));
    }
  return r;
}

struct MetricRow {
  int coef_index = 0;
  double true_value = 0.0;
  double bias = 0.0;
  double rmse = 0.0;
  double coverage = 0.0;                // percent
  std::optional<double> sign_recovery;  // percent; empty when the true value is 0
  int replicates = 0;
};

// Pure fold over successful replicate records.
inline std::vector<MetricRow> compute_metrics(const std::vector<ReplicateRecord>& records,
                                              const Eigen::VectorXd& truth) {
  std::vector<MetricRow> rows;
  for (Eigen::Index k = 0; k < truth.size(); ++k) {
    MetricRow m;
    m.coef_index = static_cast<int>(k) + 1;
    m.true_value = truth[k];
    double sum = 0.0, sum2 = 0.0;
    int covered = 0, signed_ok = 0, count = 0;
    for (const auto& r : records) {
      if (!r.ok) continue;
      const CoefSummary& c = r.alpha.at(static_cast<std::size_t>(k));
      const double err = c.estimate - truth[k];
      sum += err;
      sum2 += err * err;
      covered += (c.lo95 <= truth[k] && truth[k] <= c.hi95) ? 1 : 0;
      if (truth[k] != 0.0) signed_ok += sign_recovered(c, truth[k]) ? 1 : 0;
      ++count;
    }
    m.replicates = count;
    if (count > 0) {
      m.bias = sum / count;
      m.rmse = std::sqrt(sum2 / count);
      m.coverage = 100.0 * covered / count;
      if (truth[k] != 0.0) m.sign_recovery = 100.0 * signed_ok / count;
    }
    rows.push_back(m);
  }
  return rows;
}

// Records of an adaptive study re-expressed as fixed-window records for one
// grid member.
inline std::vector<ReplicateRecord> records_for_delta(const std::vector<ReplicateRecord>& records,
                                                      double delta) {
  std::vector<ReplicateRecord> out;
  for (const auto& r : records) {
    ReplicateRecord c = r;
    c.per_delta.clear();
    c.selected_delta.reset();
    if (r.ok) {
      auto it = std::find_if(r.per_delta.begin(), r.per_delta.end(),
                             [&](const DeltaEstimate& d) { return std::abs(d.delta - delta) < 1e-12; });
      if (it == r.per_delta.end()) throw ConfigError("records carry no fit for delta " + std::to_string(delta));
      c.alpha = it->alpha;
    }
    out.push_back(std::move(c));
  }
  return out;
}

struct StudyConfig {
  GenDesign design;
  EstimatorSpec estimator;
  int replicates = 20;
  std::uint64_t seed = 1;
  ChainConfig chain{4000, 2000, 500, 1, 6.0, 100};
  LinkConfig link{};
  unsigned threads = default_threads();
  std::string records_path;  // empty: keep records in memory only

  // Desk-scale defaults: 20 replicates, n = 2000, 4000/2000/500 iterations.
  static StudyConfig desk(GenDesign design, EstimatorSpec est, std::uint64_t seed = 1) {
    StudyConfig c;
    c.design = std::move(design);
    c.design.n = 2000;
    c.estimator = std::move(est);
    c.seed = seed;
    return c;
  }
  // Reference scale: 100 replicates, n = 5000, 10000/5000/1000 iterations.
  void use_paper_scale() {
    replicates = 100;
    design.n = 5000;
    chain.total_iters = 10000;
    chain.burn_in = 5000;
    chain.keep = 1000;
  }

  [[nodiscard]] json to_json_config() const {
    json d = to_json(design);
    d.erase("seed");  // per-replicate seeds derive from `seed`
    json c = to_json(chain);
    c.erase("seed");
    return {{"design", d},          {"estimator", estimator.str()}, {"replicates", replicates},
            {"seed", seed},         {"chain", c},                   {"link", {link.lo, link.hi}}};
  }
  // Identity of the computation behind each record (replicate count excluded,
  // so a study can be extended).
  [[nodiscard]] std::string record_key() const {
    json j = to_json_config();
    j.erase("replicates");
    return config_hash(j);
  }
};

inline std::uint64_t replicate_dataset_seed(std::uint64_t seed, int r) {
  return derive_seed(seed, {static_cast<std::uint64_t>(r), 0});
}
inline std::uint64_t replicate_chain_seed(std::uint64_t seed, int r) {
  return derive_seed(seed, {static_cast<std::uint64_t>(r), 1});
}

// Fits one replicate; failures are captured in the record.
inline ReplicateRecord run_replicate(const StudyConfig& cfg, int r) {
  ReplicateRecord rec;
  rec.replicate = r;
  rec.dataset_seed = replicate_dataset_seed(cfg.seed, r);
  rec.chain_seed = replicate_chain_seed(cfg.seed, r);
  try {
    GenDesign design = cfg.design;
    design.seed = rec.dataset_seed;
    const Dataset data = gen_dataset(design);
    ChainConfig chain = cfg.chain;
    chain.seed = rec.chain_seed;
    const auto& est = cfg.estimator;
    switch (est.kind) {
      case EstimatorSpec::Kind::BayesFull:
      case EstimatorSpec::Kind::BayesTrimmed: {
        const Window w = est.kind == EstimatorSpec::Kind::BayesFull ? full_window(data)
                                                                     : make_window(data, est.delta);
        rec.alpha = summarize_alpha(run_chain(data, w, chain, cfg.link));
        break;
      }
      case EstimatorSpec::Kind::BayesAdaptive: {
        // Replicates already run in parallel; per-window fits stay sequential.
        const AdaptiveResult res = adaptive_fit(data, est.grid, chain, cfg.link, 1);
        for (const auto& f : res.fits) {
          DeltaEstimate d;
          d.delta = f.delta;
          d.n_window = f.n_window;
          d.waic = f.waic;
          d.alpha = summarize_alpha(f.draws);
          rec.per_delta.push_back(std::move(d));
        }
        rec.alpha = rec.per_delta[res.selected_index].alpha;
        rec.selected_delta = res.selected_delta();
        break;
      }
      case EstimatorSpec::Kind::Bolr:
      case EstimatorSpec::Kind::Ols: {
        const BorFit f = fit_bor(data, est.delta,
                                 est.kind == EstimatorSpec::Kind::Bolr ? BorMethod::Logistic
                                                                       : BorMethod::LeastSquares);
        for (Eigen::Index k = 0; k < f.coefficients.size(); ++k)
          rec.alpha.push_back({f.coefficients[k], f.ci95[static_cast<std::size_t>(k)].first,
                               f.ci95[static_cast<std::size_t>(k)].second});
        break;
      }
    }
  } catch (const std::exception& e) {
    rec.ok = false;
    rec.error = e.what();
    rec.alpha.clear();
    rec.per_delta.clear();
    rec.selected_delta.reset();
  }
  return rec;
}

struct StudyResult {
  std::vector<ReplicateRecord> records;  // ordered by replicate index
  std::vector<MetricRow> metrics;
  std::vector<double> trim_percent;  // adaptive only, grid order
  int failures = 0;
};

inline std::vector<double> trim_frequencies(const std::vector<ReplicateRecord>& records,
                                            const DeltaGrid& grid) {
  std::vector<double> pct(grid.size(), 0.0);
  int count = 0;
  for (const auto& r : records) {
    if (!r.ok || !r.selected_delta) continue;
    ++count;
    for (std::size_t k = 0; k < grid.size(); ++k)
      if (std::abs(grid.deltas()[k] - *r.selected_delta) < 1e-12) pct[k] += 1.0;
  }
  if (count > 0)
    for (auto& v : pct) v = 100.0 * v / count;
  return pct;
}

inline StudyResult summarize_study(std::vector<ReplicateRecord> records, const StudyConfig& cfg) {
  std::sort(records.begin(), records.end(),
            [](const auto& a, const auto& b) { return a.replicate < b.replicate; });
  StudyResult out;
  out.metrics = compute_metrics(records, cfg.design.alpha);
  if (cfg.estimator.kind == EstimatorSpec::Kind::BayesAdaptive)
    out.trim_percent = trim_frequencies(records, cfg.estimator.grid);
  for (const auto& r : records) out.failures += r.ok ? 0 : 1;
  out.records = std::move(records);
  return out;
}

// Reads records matching `key` from a JSON-lines file (last record per
// replicate wins; malformed trailing lines from an interrupted write are skipped).
inline std::map<int, ReplicateRecord> load_records(const std::string& path, const std::string& key) {
  std::map<int, ReplicateRecord> out;
  std::ifstream in(path);
  if (!in) return out;
  for (std::string line; std::getline(in, line);) {
    if (line.empty()) continue;
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object() || j.value("study", "") != key) continue;
    try {
      ReplicateRecord r = record_from_json(j);
      out[r.replicate] = std::move(r);
    } catch (const json::exception&) {
    }
  }
  return out;
}

inline StudyResult run_study(const StudyConfig& cfg) {
  if (cfg.replicates < 1) throw ConfigError("study needs at least one replicate");
  cfg.design.validate();
  cfg.chain.validate();
  if (cfg.estimator.kind == EstimatorSpec::Kind::BayesAdaptive) cfg.estimator.grid.validate(cfg.design.t);

  const std::string key = cfg.record_key();
  std::map<int, ReplicateRecord> done;
  std::ofstream sink;
  if (!cfg.records_path.empty()) {
    done = load_records(cfg.records_path, key);
    const auto parent = std::filesystem::path(cfg.records_path).parent_path();
    if (!parent.empty()) std::filesystem::create_directories(parent);
    sink.open(cfg.records_path, std::ios::app);
    if (!sink) throw ConfigError("cannot append to records file '" + cfg.records_path + "'");
  }
  std::vector<int> todo;
  for (int r = 0; r < cfg.replicates; ++r)
    if (!done.count(r)) todo.push_back(r);

  std::vector<ReplicateRecord> fresh(todo.size());
  std::mutex sink_mutex;
  parallel_for(todo.size(), cfg.threads, [&](std::size_t k) {
    fresh[k] = run_replicate(cfg, todo[k]);
    if (sink.is_open()) {
      std::lock_guard lock(sink_mutex);
      sink << to_json(fresh[k], key).dump() << '\n' << std::flush;
    }
  });

  std::vector<ReplicateRecord> all;
  for (auto& [r, rec] : done)
    if (r < cfg.replicates) all.push_back(std::move(rec));
  for (auto& rec : fresh) all.push_back(std::move(rec));
  return summarize_study(std::move(all), cfg);
}

// Fixed-width table: j, alpha_j, bias, rmse, cvrg, sign (+ trim percentages).
inline std::string format_metrics_table(const std::vector<MetricRow>& rows,
                                        const std::vector<double>& trim_percent = {},
                                        const DeltaGrid* grid = nullptr) {
  std::ostringstream o;
  o << std::fixed;
  o << std::setw(3) << "j" << std::setw(9) << "alpha_j" << std::setw(9) << "bias" << std::setw(8)
    << "rmse" << std::setw(7) << "cvrg" << std::setw(7) << "sign" << '\n';
  for (const auto& m : rows) {
    o << std::setw(3) << m.coef_index << std::setw(9) << std::setprecision(2) << m.true_value
      << std::setw(9) << std::setprecision(3) << m.bias << std::setw(8) << std::setprecision(2)
      << m.rmse << std::setw(7) << std::setprecision(0) << m.coverage << std::setw(7);
    if (m.sign_recovery)
      o << std::setprecision(0) << *m.sign_recovery;
    else
      o << "--";
    o << '\n';
  }
  if (!trim_percent.empty()) {
    o << "trim";
    if (grid) {
      o << " (";
      for (std::size_t k = 0; k < grid->size(); ++k)
        o << (k ? "/" : "") << std::setprecision(2) << grid->deltas()[k];
      o << ")";
    }
    o << ": ";
    for (std::size_t k = 0; k < trim_percent.size(); ++k)
      o << (k ? "/" : "") << std::setprecision(0) << trim_percent[k];
    o << '\n';
  }
  return o.str();
}

inline std::string format_metrics_csv(const std::vector<MetricRow>& rows) {
  std::ostringstream o;
  o << std::setprecision(17);
  o << "j,alpha_j,bias,rmse,coverage,sign_recovery,replicates\n";
  for (const auto& m : rows) {
    o << m.coef_index << ',' << m.true_value << ',' << m.bias << ',' << m.rmse << ','
      << m.coverage << ',';
    if (m.sign_recovery) o << *m.sign_recovery;
    o << ',' << m.replicates << '\n';
  }
  return o.str();
}

}  // namespace ddreg
