// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fails.
//
//   acceptance [--cli PATH] [N ...]
//
// With no numbers every criterion runs. Criterion 11 needs the ddreg binary.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <boost/math/distributions/beta.hpp>

#include "ddreg/ddreg.hpp"
#include "oracles.hpp"

using namespace ddreg;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(double v, int digits = 3) {
  std::ostringstream o;
  o << std::setprecision(digits) << v;
  return o.str();
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("ddreg_accept_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

// Desk-scale studies are shared between criteria; each runs at most once.
struct Studies {
  std::optional<StudyResult> matching_full, mixture_adaptive, matching_bolr, mixture_bolr;
  std::vector<double> matching_full_seconds;

  static StudyConfig config(const char* design, const char* estimator) {
    StudyConfig c = StudyConfig::desk(named_design(design, AlphaSetting::Easy), EstimatorSpec::parse(estimator));
    c.threads = 1;
    return c;
  }

  const StudyResult& matching_full_study() {
    if (!matching_full) {
      const StudyConfig c = config("matching", "full");
      std::vector<ReplicateRecord> recs;
      for (int r = 0; r < c.replicates; ++r) {
        const auto start = Clock::now();
        recs.push_back(run_replicate(c, r));
        matching_full_seconds.push_back(seconds_since(start));
        std::cerr << "  matching/full replicate " << r << ": " << fmt(matching_full_seconds.back(), 3) << " s\n";
      }
      matching_full = summarize_study(std::move(recs), c);
    }
    return *matching_full;
  }
  const StudyResult& mixture_adaptive_study() {
    if (!mixture_adaptive) {
      const auto start = Clock::now();
      mixture_adaptive = run_study(config("mixture", "adaptive"));
      std::cerr << "  mixture/adaptive study: " << fmt(seconds_since(start), 4) << " s\n";
    }
    return *mixture_adaptive;
  }
  const StudyResult& matching_bolr_study() {
    if (!matching_bolr) matching_bolr = run_study(config("matching", "bolr:0.1"));
    return *matching_bolr;
  }
  const StudyResult& mixture_bolr_study() {
    if (!mixture_bolr) mixture_bolr = run_study(config("mixture", "bolr:0.1"));
    return *mixture_bolr;
  }
};

std::string failures_note(const StudyResult& s) {
  return s.failures ? ", " + std::to_string(s.failures) + " failed replicate(s)" : "";
}

// 1. Closed-form normalizing constants against adaptive quadrature.
Outcome special_functions() {
  const auto start = Clock::now();
  std::mt19937_64 rng(20261);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst = 0.0;
  for (int k = 0; k < 500; ++k) {
    const double t = 0.05 + 0.9 * u(rng), j = 3.0 * u(rng);
    const double a = 0.1 + 29.9 * u(rng), b = 0.1 + 29.9 * u(rng);
    const double t1 = t * u(rng), t2 = t + (1.0 - t) * u(rng);
    const ShapePair s{a, b};
    const double trunc = std::exp(log_norm_const_trunc(t, j, s, t1, t2));
    const double full = std::exp(log_norm_const(t, j, s));
    const double q_trunc = oracle::jump_kernel_integral(t, j, a, b, t1, t2);
    const double q_full = oracle::jump_kernel_integral(t, j, a, b, 0.0, 1.0);
    worst = std::max({worst, std::abs(trunc - q_trunc) / q_trunc, std::abs(full - q_full) / q_full});
  }
  const double secs = seconds_since(start);
  return {worst < 1e-8 && secs < 10.0,
          "max relative error " + fmt(worst) + " over 500 tuples in " + fmt(secs) + " s (limits 1e-8, 10 s)"};
}

// 2. The windowed density integrates to one; the jump ratio at t is exp((x'α)+).
Outcome normalization() {
  std::mt19937_64 rng(20262);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::normal_distribution<double> z;
  double worst_mass = 0.0, worst_ratio = 0.0, worst_spread = 0.0;
  for (int rep = 0; rep < 100; ++rep) {
    const Eigen::VectorXd x = Eigen::Vector3d(1.0, z(rng), z(rng));
    Eigen::VectorXd th(9);
    for (auto& v : th) v = z(rng);
    const ParamVector theta(th);
    const double t = 0.2 + 0.6 * u(rng);
    const bool full = rep % 4 == 0;
    const double delta = std::min(t, 1.0 - t) * (0.05 + 0.95 * u(rng));
    const double t1 = full ? 0.0 : t - delta, t2 = full ? 1.0 : t + delta;
    const double a = link_s(x.dot(theta.gamma1())), b = link_s(x.dot(theta.gamma2()));
    const double j = jump_link(x.dot(theta.alpha()));
    // log normalizer implied by the model at interior points; it must not depend on y
    std::vector<double> implied;
    for (double w : {0.1, 0.3, 0.5, 0.7, 0.9}) {
      const double y = t1 + w * (t2 - t1);
      implied.push_back((a - 1.0) * std::log(y) + (b - 1.0) * std::log1p(-y) - (y < t ? j : 0.0) -
                        conditional_log_density(y, x, theta, t, t1, t2));
    }
    const auto [lo, hi] = std::minmax_element(implied.begin(), implied.end());
    worst_spread = std::max(worst_spread, *hi - *lo);
    const long double log_c = implied[2];
    auto kernel = [&](long double jump) {
      return [&, jump](long double u, long double v) {
        return std::exp(static_cast<long double>(a - 1.0) * std::log(u) +
                        static_cast<long double>(b - 1.0) * std::log(v) - jump - log_c);
      };
    };
    const double mass = static_cast<double>(oracle::integrate_unit(kernel(j), t1, t) +
                                            oracle::integrate_unit(kernel(0.0L), t, t2));
    worst_mass = std::max(worst_mass, std::abs(mass - 1.0));
    const double up = conditional_log_density(t, x, theta, t, t1, t2);
    const double down = conditional_log_density(std::nextafter(t, 0.0), x, theta, t, t1, t2);
    worst_ratio = std::max(worst_ratio, std::abs(std::exp(up - down) - std::exp(jump_link(x.dot(theta.alpha())))));
  }
  return {worst_mass < 1e-6 && worst_ratio < 1e-8 && worst_spread < 1e-10,
          "max |mass - 1| " + fmt(worst_mass) + ", max jump-ratio error " + fmt(worst_ratio) +
              ", normalizer spread " + fmt(worst_spread) + " over 100 tuples (limits 1e-6, 1e-8, 1e-10)"};
}

// 3. With a constant L* the chain targets the t6 ellipse itself.
Outcome sampler_prior() {
  const auto start = Clock::now();
  const int p = 6;
  const Eigen::VectorXd sd = prior_sd(p);
  const EllipseT ellipse(sd, 6.0);
  const int keep = 50000, stride = 4, burn = 1000;
  const PosteriorDraws d = run_chain_on([&](const Eigen::VectorXd& th) { return ellipse.log_density(th); }, sd,
                                        ChainConfig{burn + keep * stride, burn, keep, 2026});
  double worst = 0.0;
  for (Eigen::Index c = 0; c < d.draws.cols(); ++c) {
    const double mean = d.draws.col(c).mean();
    const double var = (d.draws.col(c).array() - mean).square().sum() / (keep - 1);
    worst = std::max(worst, std::abs(var / (1.5 * sd[c] * sd[c]) - 1.0));
  }
  const bool no_shrink = std::all_of(d.shrinks.begin(), d.shrinks.end(), [](int s) { return s == 0; });
  const double secs = seconds_since(start);
  return {worst < 0.05 && secs < 120.0 && no_shrink,
          "max relative diagonal error " + fmt(worst) + " over " + std::to_string(d.draws.cols()) +
              " coordinates, " + (no_shrink ? "no" : "unexpected") + " bracket shrinks, " + fmt(secs) +
              " s (limits 5%, 120 s)"};
}

// 4. Matching design, easy α, untrimmed fit.
Outcome matching_recovery(Studies& st) {
  const StudyResult& s = st.matching_full_study();
  const MetricRow& m = s.metrics.at(0);
  const double slowest = *std::max_element(st.matching_full_seconds.begin(), st.matching_full_seconds.end());
  return {std::abs(m.bias) < 0.10 && m.coverage >= 85.0 && slowest < 300.0 && s.failures == 0,
          "alpha1 bias " + fmt(m.bias) + ", rmse " + fmt(m.rmse) + ", coverage " + fmt(m.coverage) +
              "%, slowest replicate " + fmt(slowest) + " s" + failures_note(s) +
              " (limits |bias| < 0.10, coverage >= 85%, 300 s)"};
}

// 5. Mixture base, untrimmed fit (the delta = 1/2 member of each adaptive run).
Outcome misspecified_bias(Studies& st) {
  const StudyResult& s = st.mixture_adaptive_study();
  const auto m = compute_metrics(records_for_delta(s.records, 0.5), named_design("mixture", AlphaSetting::Easy).alpha).at(0);
  return {m.bias >= 0.9 && m.bias <= 1.6 && m.coverage <= 10.0 && s.failures == 0,
          "alpha1 bias " + fmt(m.bias) + ", coverage " + fmt(m.coverage) + "%" + failures_note(s) +
              " (limits bias in [0.9, 1.6], coverage <= 10%)"};
}

// 6. WAIC picks delta = 1/4 on the mixture design; adaptive bias is small.
Outcome adaptive_selection(Studies& st) {
  const StudyResult& s = st.mixture_adaptive_study();
  const DeltaGrid grid;
  const auto& g = grid.deltas();
  const auto quarter = static_cast<std::size_t>(std::find(g.begin(), g.end(), 0.25) - g.begin());
  const double pct = s.trim_percent.at(quarter);
  const MetricRow& m = s.metrics.at(0);
  std::string freq;
  for (std::size_t k = 0; k < g.size(); ++k)
    freq += (k ? " " : "") + fmt(g[k], 2) + ":" + fmt(s.trim_percent[k], 3) + "%";
  return {pct >= 80.0 && m.bias >= -0.15 && m.bias <= 0.20 && s.failures == 0,
          "selected delta=0.25 in " + fmt(pct) + "% [" + freq + "], adaptive alpha1 bias " + fmt(m.bias) +
              failures_note(s) + " (limits >= 80%, bias in [-0.15, 0.20])"};
}

// 7. Trimmed binary-outcome logistic regression is biased on the intercept.
Outcome bolr_bias(Studies& st) {
  const StudyResult& s = st.matching_bolr_study();
  const MetricRow& m = s.metrics.at(0);
  return {m.bias >= 0.6 && m.bias <= 1.1 && m.coverage <= 10.0 && s.failures == 0,
          "intercept bias " + fmt(m.bias) + ", rmse " + fmt(m.rmse) + ", coverage " + fmt(m.coverage) + "%" +
              failures_note(s) + " (limits bias in [0.6, 1.1], coverage <= 10%)"};
}

// 8. Adaptive Bayes beats the logistic baseline on the mixture design.
Outcome dominance(Studies& st) {
  const double bayes = st.mixture_adaptive_study().metrics.at(0).rmse;
  const double bolr = st.mixture_bolr_study().metrics.at(0).rmse;
  return {bayes < bolr, "alpha1 rmse adaptive " + fmt(bayes) + " vs logistic baseline " + fmt(bolr)};
}

// Target density of one response given x from Boost beta pdfs.
double target_density(const Eigen::VectorXd& x, const GenDesign& d, double y) {
  using boost::math::beta_distribution;
  double base = boost::math::pdf(beta_distribution<>(link_s(x.dot(d.gamma1)), link_s(x.dot(d.gamma2))), y);
  if (d.base_kind == BaseKind::MixtureBeta)
    base = d.mixture_weight * base +
           (1.0 - d.mixture_weight) *
               boost::math::pdf(beta_distribution<>(d.contaminant_shapes.a, d.contaminant_shapes.b), y);
  const double u = d.t - y;
  double k = 0.0;
  if (u >= 0.0) k = d.kernel_kind == KernelKind::Indicator ? 1.0 : std::exp(-d.decay_rate * u * u);
  return base * std::exp(-k * std::max(0.0, x.dot(d.alpha)));
}

// 9. Rejection sampler against inverse-CDF draws; jump prevalence.
Outcome generator_exactness() {
  const int n = 100000;
  const std::vector<Eigen::VectorXd> points = {
      (Eigen::VectorXd(6) << 1, 0, 0, 0, 0, 0).finished(),
      (Eigen::VectorXd(6) << 1, 1.2, -0.7, 0.3, 0.9, -1.1).finished(),
      (Eigen::VectorXd(6) << 1, -0.8, 0.5, -1.0, 0.2, 0.6).finished(),
      (Eigen::VectorXd(6) << 1, 0.4, 1.1, 0.7, -0.9, 0.1).finished(),
      (Eigen::VectorXd(6) << 1, -1.3, -0.4, 0.8, 1.0, -0.5).finished()};
  double worst = 0.0;
  std::uint64_t seed = 900;
  for (const char* name : {"matching", "mixture", "decaying"}) {
    for (std::size_t k = 0; k < points.size(); ++k) {
      // alternate the two reference α settings across the fixed points
      const GenDesign d = named_design(name, k % 2 == 0 ? AlphaSetting::Easy : AlphaSetting::Hard);
      const Eigen::VectorXd& x = points[k];
      Engine rng = make_stream(++seed);
      std::vector<double> rej(n), inv(n);
      for (auto& y : rej) y = sample_response(x, d, rng);
      const oracle::TabulatedCdf cdf([&](double y) { return target_density(x, d, y); }, d.t, 20000);
      std::mt19937_64 g(seed);
      std::uniform_real_distribution<double> u(0.0, 1.0);
      for (auto& y : inv) y = cdf.inverse(u(g));
      worst = std::max(worst, oracle::ks_two_sample(rej, inv));
    }
  }
  Engine rng = make_stream(77);
  const Eigen::MatrixXd X = gen_covariates(n, 6, rng);
  const double easy = jump_prevalence(X, reference_alpha(AlphaSetting::Easy));
  const double hard = jump_prevalence(X, reference_alpha(AlphaSetting::Hard));
  return {worst < 0.01 && std::abs(easy - 0.99) <= 0.01 && std::abs(hard - 0.96) <= 0.01,
          "max two-sample KS " + fmt(worst) + " over 15 (x, design) pairs at n=1e5; prevalence easy " + fmt(easy) +
              ", hard " + fmt(hard) + " (limits 0.01; 0.99 and 0.96 +- 0.01)"};
}

// 10. Same seeds, same bytes: draws, reports, study tables.
Outcome determinism() {
  std::vector<std::string> problems;
  const Dataset data = gen_dataset(named_design("mixture", AlphaSetting::Hard, 400, 31));
  const ChainConfig cfg{400, 200, 100, 17};
  if (!(run_chain(data, full_window(data), cfg).draws == run_chain(data, full_window(data), cfg).draws))
    problems.push_back("draw matrices differ");

  const fs::path root = scratch("determinism");
  write_dataset_csv(data, (root / "data.csv").string());
  std::ostringstream log;
  for (const char* run : {"a", "b"}) {
    BayesOptions o;
    o.data.path = (root / "data.csv").string();
    o.chain = cfg;
    o.out_dir = (root / "select" / run).string();
    run_bayes_command("select", o, log);
    StudyOptions so;
    so.design = "mixture";
    so.estimator = "adaptive";
    so.replicates = 3;
    so.n = 300;
    so.iters = 300;
    so.burn_in = 150;
    so.keep = 50;
    so.threads = run[0] == 'a' ? 1 : 2;
    so.out_dir = (root / "study" / run).string();
    run_study_command(so, log);
  }
  int compared = 0;
  for (const char* kind : {"select", "study"})
    for (const auto& entry : fs::directory_iterator(root / kind / "a")) {
      const fs::path other = root / kind / "b" / entry.path().filename();
      ++compared;
      if (!fs::exists(other) || slurp(entry.path()) != slurp(other))
        problems.push_back(std::string(kind) + "/" + entry.path().filename().string() + " differs");
    }
  fs::remove_all(root);
  std::string detail = "draw matrices plus " + std::to_string(compared) + " report and study files compared";
  for (const auto& p : problems) detail += "; " + p;
  return {problems.empty(), detail};
}

// 11. CLI path on an exported synthetic data set.
Outcome cli_path(const std::string& cli) {
  if (cli.empty() || !fs::exists(cli)) return {false, "ddreg binary not found (pass --cli PATH)"};
  const fs::path root = scratch("cli");
  const std::uint64_t data_seed = 1101, chain_seed = 1102;
  const ChainConfig cfg{4000, 2000, 500, chain_seed};
  const std::string sim = cli + " simulate --design matching --alpha easy --n 2000 --seed " +
                          std::to_string(data_seed) + " --out-dir " + (root / "sim").string() + " > /dev/null";
  const std::string fit = cli + " fit --data " + (root / "sim" / "data.csv").string() + " --iters 4000" +
                          " --burn-in 2000 --keep 500 --seed " + std::to_string(chain_seed) + " --out-dir " +
                          (root / "fit").string() + " > /dev/null";
  if (std::system(sim.c_str()) != 0 || std::system(fit.c_str()) != 0) {
    fs::remove_all(root);
    return {false, "ddreg simulate or fit exited nonzero"};
  }
  std::ifstream in(root / "fit" / "draws.csv");
  const Eigen::MatrixXd cli_draws = read_draws_csv(in);
  const Dataset direct = gen_dataset(named_design("matching", AlphaSetting::Easy, 2000, data_seed));
  const Eigen::MatrixXd direct_draws = full_fit(direct, cfg).selected().draws.draws;
  const bool same = cli_draws == direct_draws;
  const auto alpha = summarize(cli_draws.rightCols(direct.p()));
  const double a1 = alpha.at(0).estimate;
  fs::remove_all(root);
  return {same && std::abs(a1 - 1.0) <= 0.3,
          "alpha1 estimate " + fmt(a1) + " (truth 1.0, limit +-0.3); CLI draws " +
              (same ? "identical to" : "DIFFER from") + " the direct run"};
}

}  // namespace

int main(int argc, char** argv) {
  std::string cli;
  std::set<int> only;
  for (int k = 1; k < argc; ++k) {
    const std::string a = argv[k];
    if (a == "--cli" && k + 1 < argc) {
      cli = argv[++k];
    } else {
      only.insert(std::stoi(a));
    }
  }

  Studies st;
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"special-function oracle equivalence", special_functions},
      {"density normalization and jump ratio", normalization},
      {"sampler on a constant-likelihood target", sampler_prior},
      {"matching/easy recovery", [&] { return matching_recovery(st); }},
      {"misspecification bias of the untrimmed fit", [&] { return misspecified_bias(st); }},
      {"adaptive window selection", [&] { return adaptive_selection(st); }},
      {"logistic baseline bias", [&] { return bolr_bias(st); }},
      {"adaptive beats the logistic baseline", [&] { return dominance(st); }},
      {"synthetic generator exactness", generator_exactness},
      {"determinism", determinism},
      {"CLI path on exported synthetic data", [&] { return cli_path(cli); }},
  };

  int failed = 0;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    const int id = static_cast<int>(k) + 1;
    if (!only.empty() && !only.count(id)) continue;
    const auto start = Clock::now();
    Outcome out;
    try {
      out = criteria[k].second();
    } catch (const std::exception& e) {
      out = {false, std::string("threw: ") + e.what()};
    }
    failed += out.pass ? 0 : 1;
    std::cout << (out.pass ? "PASS" : "FAIL") << "  criterion " << std::setw(2) << id << "  "
              << criteria[k].first << ": " << out.detail << "  [" << fmt(seconds_since(start), 4) << " s]"
              << std::endl;
  }
  std::cout << (failed ? std::to_string(failed) + " criterion/criteria failed" : std::string("all criteria passed"))
            << std::endl;
  return failed ? 1 : 0;
}
