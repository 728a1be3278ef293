#pragma once

// Synthetic data from f(y|x) ∝ b(y|x) exp{-K(t - y) (x'α)_+}, with b a beta
// regression density (optionally mixed with a fixed beta contaminant) and K a
// half kernel.

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "ddreg/errors.hpp"
#include "ddreg/model.hpp"
#include "ddreg/rng.hpp"
#include "ddreg/special_fn.hpp"

namespace ddreg {

enum class BaseKind { MatchingBeta, MixtureBeta };
enum class KernelKind { Indicator, DecayingGaussian };
enum class AlphaSetting { Easy, Hard };

struct GenDesign {
  BaseKind base_kind = BaseKind::MatchingBeta;
  KernelKind kernel_kind = KernelKind::Indicator;
  Eigen::VectorXd gamma1;
  Eigen::VectorXd gamma2;
  Eigen::VectorXd alpha;
  double mixture_weight = 0.5;
  ShapePair contaminant_shapes{15.0, 10.0};
  double decay_rate = 19.5;
  int n = 5000;
  int p = 6;
  double t = 0.5;
  std::uint64_t seed = 1;
  LinkConfig link{};

  void validate() const {
    if (n < 1 || p < 1) throw ConfigError("design needs n >= 1 and p >= 1");
    if (gamma1.size() != p || gamma2.size() != p || alpha.size() != p)
      throw ConfigError("design coefficient vectors must have length p");
    if (!(t > 0.0 && t < 1.0)) throw ConfigError("design threshold must lie in (0,1)");
    if (!(mixture_weight >= 0.0 && mixture_weight <= 1.0))
      throw ConfigError("mixture weight must lie in [0,1]");
    if (!(contaminant_shapes.a > 0.0 && contaminant_shapes.b > 0.0))
      throw ConfigError("contaminant shapes must be positive");
    if (!(decay_rate >= 0.0)) throw ConfigError("decay rate must be non-negative");
    link.validate();
  }
};

inline Eigen::VectorXd reference_gamma1() {
  Eigen::VectorXd v(6);
  v << -1.5, -0.4, -0.1, 0.0, 0.4, -0.1;
  return v;
}
inline Eigen::VectorXd reference_gamma2() {
  Eigen::VectorXd v(6);
  v << -3.0, -0.1, 0.2, -0.6, 0.0, -0.1;
  return v;
}
inline Eigen::VectorXd reference_alpha(AlphaSetting s) {
  Eigen::VectorXd v(6);
  if (s == AlphaSetting::Easy)
    v << 1.0, 0.3, 0.2, 0.2, 0.1, -0.1;
  else
    v << 0.5, 0.2, -0.2, 0.0, 0.0, 0.0;
  return v;
}

// The three (b, K) pairs of the reference study: "matching", "mixture", "decaying".
inline GenDesign named_design(std::string_view name, AlphaSetting alpha, int n = 5000,
                              std::uint64_t seed = 1) {
  GenDesign d;
  if (name == "matching") {
  } else if (name == "mixture") {
    d.base_kind = BaseKind::MixtureBeta;
  } else if (name == "decaying") {
    d.kernel_kind = KernelKind::DecayingGaussian;
  } else {
    throw ConfigError("unknown design '" + std::string(name) +
                      "' (expected matching, mixture or decaying)");
  }
  d.gamma1 = reference_gamma1();
  d.gamma2 = reference_gamma2();
  d.alpha = reference_alpha(alpha);
  d.n = n;
  d.p = 6;
  d.seed = seed;
  return d;
}

inline AlphaSetting parse_alpha_setting(std::string_view s) {
  if (s == "easy") return AlphaSetting::Easy;
  if (s == "hard") return AlphaSetting::Hard;
  throw ConfigError("unknown alpha setting '" + std::string(s) + "' (expected easy or hard)");
}

// Half kernel K(u): zero for u < 0, K(0) = 1, non-increasing.
inline double half_kernel(const GenDesign& d, double u) {
  if (u < 0.0) return 0.0;
  return d.kernel_kind == KernelKind::Indicator ? 1.0 : std::exp(-d.decay_rate * u * u);
}

inline Eigen::MatrixXd gen_covariates(int n, int p, Engine& rng) {
  if (n < 1 || p < 1) throw ConfigError("gen_covariates needs n >= 1 and p >= 1");
  Eigen::MatrixXd X(n, p);
  X.col(0).setOnes();
  for (int i = 0; i < n; ++i)
    for (int c = 1; c < p; ++c) X(i, c) = std_normal(rng);
  return X;
}

inline constexpr long kMaxRejections = 1000000;

// Exact draw by rejection: propose y ~ b(.|x), accept with prob exp(-K(t-y) j(x)).
inline double sample_response(const Eigen::VectorXd& x, const GenDesign& d, Engine& rng) {
  const double a = link_s(x.dot(d.gamma1), d.link);
  const double b = link_s(x.dot(d.gamma2), d.link);
  const double j = jump_link(x.dot(d.alpha));
  for (long tries = 0; tries < kMaxRejections; ++tries) {
    double y;
    if (d.base_kind == BaseKind::MixtureBeta && uniform01(rng) >= d.mixture_weight)
      y = beta_variate(rng, d.contaminant_shapes.a, d.contaminant_shapes.b);
    else
      y = beta_variate(rng, a, b);
    if (!(y > 0.0 && y < 1.0)) continue;  // underflow at extreme shapes
    const double k = half_kernel(d, d.t - y);
    if (k == 0.0 || j == 0.0 || uniform01(rng) < std::exp(-k * j)) return y;
  }
  throw NumericalError("rejection sampler exceeded " + std::to_string(kMaxRejections) +
                       " proposals");
}

// Raw (unstandardized) covariates and responses of a synthetic data set.
struct RawSample {
  Eigen::MatrixXd X;  // n x p with intercept column
  Eigen::VectorXd y;
};

inline RawSample gen_raw(const GenDesign& d) {
  d.validate();
  Engine cov_rng = make_stream(d.seed, {1});
  RawSample s;
  s.X = gen_covariates(d.n, d.p, cov_rng);
  s.y.resize(d.n);
  for (int i = 0; i < d.n; ++i) {
    Engine row_rng = make_stream(d.seed, {2, static_cast<std::uint64_t>(i)});
    s.y[i] = sample_response(Eigen::VectorXd(s.X.row(i).transpose()), d, row_rng);
  }
  return s;
}

// Generated data, standardized after generation.
inline Dataset gen_dataset(const GenDesign& d) {
  RawSample s = gen_raw(d);
  return make_dataset(std::move(s.y), Eigen::MatrixXd(s.X.rightCols(d.p - 1)), d.t);
}

// Share of rows with a strictly positive jump x'α > 0.
inline double jump_prevalence(const Eigen::MatrixXd& X, const Eigen::VectorXd& alpha) {
  const Eigen::VectorXd z = X * alpha;
  return static_cast<double>((z.array() > 0.0).count()) / static_cast<double>(z.size());
}

}  // namespace ddreg
