#pragma once

// Elliptical slice sampling with a heavy-tailed (multivariate t) ellipse.
//
// The posterior p(θ) ∝ L(θ) π0(θ) with Gaussian prior π0 is rewritten as
// L*(θ) π(θ), where π is a multivariate t with the prior covariance as its
// scale matrix and L* = p / π. π is a scale mixture of Gaussians,
// π(θ) = ∫ N(θ; 0, sΣ) IG(s; ν/2, ν/2) ds, so each transition first draws the
// scale s | θ and then performs a Gaussian ellipse move with covariance sΣ.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include "ddreg/errors.hpp"
#include "ddreg/model.hpp"
#include "ddreg/rng.hpp"
#include "ddreg/special_fn.hpp"

namespace ddreg {

struct ChainConfig {
  int total_iters = 10000;
  int burn_in = 5000;
  int keep = 1000;
  std::uint64_t seed = 1;
  double ellipse_dof = 6.0;
  int max_shrinks = 100;

  void validate() const {
    if (total_iters <= 0 || burn_in < 0 || burn_in >= total_iters)
      throw ConfigError("chain config: need 0 <= burn_in < total_iters");
    if (keep <= 0 || keep > total_iters - burn_in)
      throw ConfigError("chain config: need 0 < keep <= total_iters - burn_in");
    if (!(ellipse_dof > 2.0)) throw ConfigError("chain config: ellipse dof must exceed 2");
    if (max_shrinks <= 0) throw ConfigError("chain config: max_shrinks must be positive");
  }
  [[nodiscard]] int stride() const { return (total_iters - burn_in) / keep; }
};

// Multivariate t with diagonal scale matrix diag(scale_sd^2).
class EllipseT {
 public:
  EllipseT(Eigen::VectorXd scale_sd, double dof) : sd_(std::move(scale_sd)), dof_(dof) {
    if (!(dof_ > 0.0)) throw ConfigError("ellipse dof must be positive");
    const double q = static_cast<double>(sd_.size());
    log_norm_ = detail::lgamma_pos(0.5 * (dof_ + q)) - detail::lgamma_pos(0.5 * dof_) -
                0.5 * q * std::log(dof_ * std::numbers::pi) - sd_.array().log().sum();
  }

  [[nodiscard]] Eigen::Index dim() const { return sd_.size(); }
  [[nodiscard]] double dof() const { return dof_; }
  [[nodiscard]] const Eigen::VectorXd& scale_sd() const { return sd_; }

  [[nodiscard]] double mahalanobis2(const Eigen::VectorXd& theta) const {
    return (theta.array() / sd_.array()).square().sum();
  }

  [[nodiscard]] double log_density(const Eigen::VectorXd& theta) const {
    const double q = static_cast<double>(sd_.size());
    return log_norm_ - 0.5 * (dof_ + q) * std::log1p(mahalanobis2(theta) / dof_);
  }

  // Unconditional draw: Gaussian scaled by sqrt(dof / chi-square(dof)).
  [[nodiscard]] Eigen::VectorXd draw(Engine& rng) const {
    const double w = 2.0 * gamma_variate(rng, 0.5 * dof_);
    return gaussian(rng) * std::sqrt(dof_ / w);
  }

  // Auxiliary point for an ellipse through `theta`: the mixing scale is drawn
  // from its conditional given theta, then the point from N(0, sΣ).
  [[nodiscard]] Eigen::VectorXd draw_auxiliary(const Eigen::VectorXd& theta, Engine& rng) const {
    const double q = static_cast<double>(sd_.size());
    const double rate = 0.5 * (dof_ + mahalanobis2(theta));
    const double s = rate / gamma_variate(rng, 0.5 * (dof_ + q));
    return gaussian(rng) * std::sqrt(s);
  }

 private:
  [[nodiscard]] Eigen::VectorXd gaussian(Engine& rng) const {
    Eigen::VectorXd z(sd_.size());
    for (Eigen::Index k = 0; k < z.size(); ++k) z[k] = std_normal(rng) * sd_[k];
    return z;
  }

  Eigen::VectorXd sd_;
  double dof_;
  double log_norm_ = 0.0;
};

struct EssResult {
  Eigen::VectorXd theta;
  double log_lstar = 0.0;
  int shrinks = 0;
  int evaluations = 0;
  double log_threshold = 0.0;
};

// One elliptical slice transition from `theta`, whose log L* is known.
// `log_lstar` maps a state to log L*; `auxiliary` maps (theta, rng) to the
// ellipse's second axis.
template <class LogLStar, class Auxiliary>
EssResult ess_step(const Eigen::VectorXd& theta, double current_log_lstar, LogLStar&& log_lstar,
                   Auxiliary&& auxiliary, Engine& rng, int max_shrinks = 100) {
  const Eigen::VectorXd nu = auxiliary(theta, rng);
  EssResult out;
  out.log_threshold = current_log_lstar + std::log(uniform01(rng));
  constexpr double two_pi = 2.0 * std::numbers::pi;
  double angle = two_pi * uniform01(rng) - std::numbers::pi;
  double a_min = -std::numbers::pi;
  double a_max = std::numbers::pi;
  for (;;) {
    Eigen::VectorXd proposal = theta * std::cos(angle) + nu * std::sin(angle);
    const double value = log_lstar(proposal);
    ++out.evaluations;
    if (value > out.log_threshold) {
      out.theta = std::move(proposal);
      out.log_lstar = value;
      return out;
    }
    if (++out.shrinks > max_shrinks)
      throw NumericalError("elliptical slice bracket failed to shrink onto an acceptable point in " +
                           std::to_string(max_shrinks) + " steps");
    (angle > 0.0 ? a_max : a_min) = angle;
    angle = a_min + (a_max - a_min) * uniform01(rng);
  }
}

template <class LogLStar, class Auxiliary>
EssResult ess_step(const Eigen::VectorXd& theta, LogLStar&& log_lstar, Auxiliary&& auxiliary,
                   Engine& rng, int max_shrinks = 100) {
  const double current = log_lstar(theta);
  EssResult r = ess_step(theta, current, log_lstar, auxiliary, rng, max_shrinks);
  ++r.evaluations;
  return r;
}

struct PosteriorDraws {
  Eigen::MatrixXd draws;            // keep x 3p, columns γ1 | γ2 | α
  Eigen::VectorXd log_posterior;    // per retained draw
  std::vector<int> shrinks;         // per iteration, including burn-in
  ChainConfig config;

  [[nodiscard]] Eigen::Index p() const { return draws.cols() / 3; }
  [[nodiscard]] ParamVector row(Eigen::Index m) const {
    return ParamVector(Eigen::VectorXd(draws.row(m).transpose()));
  }
};

// Runs a chain on an arbitrary log target with Gaussian-scaled t ellipse.
// `log_target` returns the log posterior up to a constant.
template <class LogTarget>
PosteriorDraws run_chain_on(LogTarget&& log_target, const Eigen::VectorXd& prior_sd,
                            const ChainConfig& cfg) {
  cfg.validate();
  const EllipseT ellipse(prior_sd, cfg.ellipse_dof);
  auto log_lstar = [&](const Eigen::VectorXd& th) {
    return log_target(th) - ellipse.log_density(th);
  };
  auto aux = [&](const Eigen::VectorXd& th, Engine& g) { return ellipse.draw_auxiliary(th, g); };

  Engine rng = make_stream(cfg.seed, {0x455353});
  Eigen::VectorXd theta = Eigen::VectorXd::Zero(prior_sd.size());
  double current = log_lstar(theta);
  if (!std::isfinite(current)) throw NumericalError("log target is not finite at the origin");

  PosteriorDraws out;
  out.config = cfg;
  out.draws.resize(cfg.keep, prior_sd.size());
  out.log_posterior.resize(cfg.keep);
  out.shrinks.reserve(static_cast<std::size_t>(cfg.total_iters));
  const int stride = cfg.stride();
  Eigen::Index kept = 0;
  for (int it = 1; it <= cfg.total_iters; ++it) {
    EssResult r;
    try {
      r = ess_step(theta, current, log_lstar, aux, rng, cfg.max_shrinks);
    } catch (const NumericalError& e) {
      throw NumericalError("iteration " + std::to_string(it) + ": " + e.what());
    }
    theta = std::move(r.theta);
    current = r.log_lstar;
    out.shrinks.push_back(r.shrinks);
    const int after = it - cfg.burn_in;
    if (after > 0 && after % stride == 0 && kept < cfg.keep) {
      const double lp = current + ellipse.log_density(theta);
      if (!std::isfinite(lp)) throw NumericalError("non-finite posterior at retained draw");
      out.draws.row(kept) = theta.transpose();
      out.log_posterior[kept] = lp;
      ++kept;
    }
  }
  return out;
}

// Posterior sampling of the discontinuity model on the rows of a window.
inline PosteriorDraws run_chain(const Dataset& data, const Window& w, const ChainConfig& cfg,
                                const LinkConfig& link = {}) {
  check_window_fittable(data, w);
  const WindowedLikelihood lik(data, w, link);
  const Eigen::Index p = data.p();
  auto target = [&](const Eigen::VectorXd& th) {
    const ParamVector theta(th);
    return lik.log_likelihood(theta) + log_prior(theta, p);
  };
  return run_chain_on(target, prior_sd(p), cfg);
}

struct CoefSummary {
  double estimate = 0.0;
  double lo95 = 0.0;
  double hi95 = 0.0;
};

// Percentile with linear interpolation between order statistics
// (h = (n-1) q on the sorted sample).
inline double percentile_sorted(const std::vector<double>& sorted, double q) {
  if (sorted.empty()) throw std::invalid_argument("percentile of empty sample");
  const double h = (static_cast<double>(sorted.size()) - 1.0) * q;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

inline CoefSummary summarize_column(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  return {percentile_sorted(v, 0.5), percentile_sorted(v, 0.025), percentile_sorted(v, 0.975)};
}

inline std::vector<CoefSummary> summarize(const Eigen::MatrixXd& draws) {
  if (draws.rows() < 40) throw std::invalid_argument("summaries need at least 40 draws");
  std::vector<CoefSummary> out;
  out.reserve(static_cast<std::size_t>(draws.cols()));
  for (Eigen::Index c = 0; c < draws.cols(); ++c) {
    std::vector<double> v(draws.col(c).data(), draws.col(c).data() + draws.rows());
    out.push_back(summarize_column(std::move(v)));
  }
  return out;
}

// Full-θ summaries, in θ order (γ1, γ2, α).
inline std::vector<CoefSummary> summarize(const PosteriorDraws& d) { return summarize(d.draws); }

// α-block summaries only.
inline std::vector<CoefSummary> summarize_alpha(const PosteriorDraws& d) {
  const Eigen::Index p = d.p();
  return summarize(Eigen::MatrixXd(d.draws.rightCols(p)));
}

// Interval lies strictly on the side of zero given by the reference's sign.
// Undefined for a zero reference.
inline bool sign_recovered(const CoefSummary& s, double reference) {
  return reference > 0.0 ? s.lo95 > 0.0 : s.hi95 < 0.0;
}

}  // namespace ddreg
