#pragma once

// Beta regression with a covariate-dependent, non-negative density jump at a
// known threshold t:
//
//   f(y | x) ∝ y^{a(x)-1} (1-y)^{b(x)-1} exp{-I(y < t) (x'α)_+},
//   a(x) = s(x'γ1), b(x) = s(x'γ2), s(z) = lo + (hi - lo) logistic(z),
//
// optionally restricted to the window [t - Δ, t + Δ].

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include "ddreg/errors.hpp"
#include "ddreg/special_fn.hpp"

namespace ddreg {

struct LinkConfig {
  double lo = 0.1;
  double hi = 30.0;

  void validate() const {
    if (!(lo > 0.0 && lo < hi && std::isfinite(hi)))
      throw ConfigError("link bounds must satisfy 0 < lo < hi < inf");
  }
};

inline double link_s(double z, const LinkConfig& cfg = {}) {
  // logistic(z) written to avoid overflow for large |z|
  const double sig = z >= 0.0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z));
  return cfg.lo + (cfg.hi - cfg.lo) * sig;
}

inline double jump_link(double z) { return z > 0.0 ? z : 0.0; }

// Response, standardized design (intercept first) and the constants used to
// standardize. `raw` keeps the pre-standardization covariates so datasets can
// be written out and re-read exactly.
struct Dataset {
  Eigen::VectorXd y;
  Eigen::MatrixXd X;
  double t = 0.5;
  Eigen::VectorXd column_means;  // length p; intercept entry is 0
  Eigen::VectorXd column_sds;    // length p; intercept entry is 1
  Eigen::MatrixXd raw;           // n x (p-1)
  std::vector<std::string> names;  // length p; names[0] == "(Intercept)"

  [[nodiscard]] Eigen::Index n() const { return y.size(); }
  [[nodiscard]] Eigen::Index p() const { return X.cols(); }
};

// Builds a Dataset from raw covariates: prepends the intercept and scales
// every other column to zero sample mean and unit sample variance.
inline Dataset make_dataset(Eigen::VectorXd y, Eigen::MatrixXd raw, double t,
                            std::vector<std::string> covariate_names = {}) {
  if (!(t > 0.0 && t < 1.0)) throw ConfigError("threshold must lie in (0,1)");
  const Eigen::Index n = y.size();
  if (raw.rows() != n) throw DataError("response and covariates have different row counts");
  for (Eigen::Index i = 0; i < n; ++i)
    if (!(y[i] > 0.0 && y[i] < 1.0))
      throw DataError("response value outside (0,1) at row " + std::to_string(i));
  const Eigen::Index k = raw.cols();
  if (covariate_names.empty())
    for (Eigen::Index c = 0; c < k; ++c) covariate_names.push_back("x" + std::to_string(c + 1));
  if (static_cast<Eigen::Index>(covariate_names.size()) != k)
    throw ConfigError("covariate name count does not match column count");
  if (k > 0 && n < 2) throw DataError("standardization needs at least two rows");

  Dataset d;
  d.t = t;
  d.X.resize(n, k + 1);
  d.X.col(0).setOnes();
  d.column_means = Eigen::VectorXd::Zero(k + 1);
  d.column_sds = Eigen::VectorXd::Ones(k + 1);
  for (Eigen::Index c = 0; c < k; ++c) {
    const double mean = raw.col(c).mean();
    const double var = (raw.col(c).array() - mean).square().sum() / static_cast<double>(n - 1);
    const double sd = std::sqrt(var);
    if (!(sd > 0.0) || !std::isfinite(sd))
      throw DataError("covariate '" + covariate_names[c] + "' has zero or non-finite variance");
    d.column_means[c + 1] = mean;
    d.column_sds[c + 1] = sd;
    d.X.col(c + 1) = (raw.col(c).array() - mean) / sd;
  }
  d.names.reserve(k + 1);
  d.names.emplace_back("(Intercept)");
  for (auto& s : covariate_names) d.names.push_back(std::move(s));
  d.y = std::move(y);
  d.raw = std::move(raw);
  return d;
}

// θ = (γ1, γ2, α), each block of length p.
class ParamVector {
 public:
  ParamVector() = default;
  explicit ParamVector(Eigen::VectorXd values) : values_(std::move(values)) {
    if (values_.size() % 3 != 0) throw std::invalid_argument("parameter vector length must be 3p");
  }
  static ParamVector zeros(Eigen::Index p) { return ParamVector(Eigen::VectorXd::Zero(3 * p)); }
  static ParamVector from_blocks(const Eigen::VectorXd& g1, const Eigen::VectorXd& g2,
                                 const Eigen::VectorXd& alpha) {
    if (g1.size() != g2.size() || g1.size() != alpha.size())
      throw std::invalid_argument("parameter blocks must share length p");
    Eigen::VectorXd v(3 * g1.size());
    v << g1, g2, alpha;
    return ParamVector(std::move(v));
  }

  [[nodiscard]] Eigen::Index p() const { return values_.size() / 3; }
  [[nodiscard]] const Eigen::VectorXd& values() const { return values_; }
  Eigen::VectorXd& values() { return values_; }

  [[nodiscard]] auto gamma1() const { return values_.segment(0, p()); }
  [[nodiscard]] auto gamma2() const { return values_.segment(p(), p()); }
  [[nodiscard]] auto alpha() const { return values_.segment(2 * p(), p()); }
  auto gamma1() { return values_.segment(0, p()); }
  auto gamma2() { return values_.segment(p(), p()); }
  auto alpha() { return values_.segment(2 * p(), p()); }

 private:
  Eigen::VectorXd values_;
};

// Trimming window [t - delta, t + delta] and the rows it keeps.
struct Window {
  double delta = 0.5;
  double t1 = 0.0;
  double t2 = 1.0;
  std::vector<Eigen::Index> indices;

  [[nodiscard]] bool is_full() const { return t1 <= 0.0 && t2 >= 1.0; }
};

inline constexpr double kDeltaSlack = 1e-12;

inline Window make_window(const Dataset& data, double delta) {
  const double max_delta = std::min(data.t, 1.0 - data.t);
  if (!(delta > 0.0 && delta <= max_delta + kDeltaSlack))
    throw ConfigError("window half-width " + std::to_string(delta) + " outside (0, " +
                      std::to_string(max_delta) + "]");
  Window w;
  w.delta = delta;
  w.t1 = std::max(0.0, data.t - delta);
  w.t2 = std::min(1.0, data.t + delta);
  for (Eigen::Index i = 0; i < data.n(); ++i)
    if (std::abs(data.y[i] - data.t) <= delta) w.indices.push_back(i);
  return w;
}

inline Window full_window(const Dataset& data) {
  Window w;
  w.delta = std::min(data.t, 1.0 - data.t);
  w.t1 = 0.0;
  w.t2 = 1.0;
  w.indices.resize(static_cast<std::size_t>(data.n()));
  for (Eigen::Index i = 0; i < data.n(); ++i) w.indices[static_cast<std::size_t>(i)] = i;
  return w;
}

// Refuses windows whose posterior would be prior-dominated.
inline void check_window_fittable(const Dataset& data, const Window& w) {
  const auto need = static_cast<std::size_t>(3 * data.p());
  if (w.indices.size() < need)
    throw DataError("window delta=" + std::to_string(w.delta) + " keeps " +
                    std::to_string(w.indices.size()) + " rows; at least " + std::to_string(need) +
                    " (3p) required");
  bool below = false, above = false;
  for (auto i : w.indices) (data.y[i] < data.t ? below : above) = true;
  if (!below || !above)
    throw DataError("window delta=" + std::to_string(w.delta) +
                    " has no observations on one side of the threshold");
}

inline Eigen::VectorXd jump_surface(const ParamVector& theta, const Eigen::MatrixXd& rows) {
  if (rows.cols() != theta.p()) throw std::invalid_argument("jump_surface: row width != p");
  Eigen::VectorXd j = rows * theta.alpha();
  for (auto& v : j) v = jump_link(v);
  return j;
}

// Normalized log density of one response y on [t1, t2] given the three
// linear predictors of its covariate row.
inline double conditional_log_density(double y, double eta1, double eta2, double eta3, double t,
                                      double t1, double t2, const LinkConfig& link = {}) {
  const ShapePair s{link_s(eta1, link), link_s(eta2, link)};
  const double j = jump_link(eta3);
  const double log_c = (t1 <= 0.0 && t2 >= 1.0) ? log_norm_const(t, j, s)
                                                 : log_norm_const_trunc(t, j, s, t1, t2);
  return (s.a - 1.0) * std::log(y) + (s.b - 1.0) * std::log1p(-y) - (y < t ? j : 0.0) - log_c;
}

inline double conditional_log_density(double y, const Eigen::VectorXd& x, const ParamVector& theta,
                                      double t, double t1, double t2,
                                      const LinkConfig& link = {}) {
  return conditional_log_density(y, x.dot(theta.gamma1()), x.dot(theta.gamma2()),
                                 x.dot(theta.alpha()), t, t1, t2, link);
}

// Likelihood of the rows retained by a window, with the per-row quantities
// that do not depend on θ cached once.
class WindowedLikelihood {
 public:
  WindowedLikelihood(const Dataset& data, const Window& w, LinkConfig link = {})
      : t_(data.t), t1_(w.t1), t2_(w.t2), full_(w.is_full()), link_(link) {
    link_.validate();
    const auto m = static_cast<Eigen::Index>(w.indices.size());
    X_.resize(m, data.p());
    log_y_.resize(m);
    log1m_y_.resize(m);
    below_.resize(static_cast<std::size_t>(m));
    for (Eigen::Index r = 0; r < m; ++r) {
      const Eigen::Index i = w.indices[static_cast<std::size_t>(r)];
      X_.row(r) = data.X.row(i);
      log_y_[r] = std::log(data.y[i]);
      log1m_y_[r] = std::log1p(-data.y[i]);
      below_[static_cast<std::size_t>(r)] = data.y[i] < data.t;
    }
  }

  [[nodiscard]] Eigen::Index size() const { return X_.rows(); }
  [[nodiscard]] Eigen::Index p() const { return X_.cols(); }

  // Per-row log densities, in window order.
  [[nodiscard]] Eigen::VectorXd pointwise(const ParamVector& theta) const {
    if (theta.p() != p()) throw std::invalid_argument("parameter dimension does not match data");
    const Eigen::VectorXd e1 = X_ * theta.gamma1();
    const Eigen::VectorXd e2 = X_ * theta.gamma2();
    const Eigen::VectorXd e3 = X_ * theta.alpha();
    Eigen::VectorXd out(size());
    for (Eigen::Index r = 0; r < size(); ++r) out[r] = row_term(r, e1[r], e2[r], e3[r]);
    return out;
  }

  [[nodiscard]] double log_likelihood(const ParamVector& theta) const {
    return pointwise(theta).sum();
  }

 private:
  [[nodiscard]] double row_term(Eigen::Index r, double eta1, double eta2, double eta3) const {
    const ShapePair s{link_s(eta1, link_), link_s(eta2, link_)};
    const double j = jump_link(eta3);
    const double log_c =
        full_ ? log_norm_const(t_, j, s) : log_norm_const_trunc(t_, j, s, t1_, t2_);
    return (s.a - 1.0) * log_y_[r] + (s.b - 1.0) * log1m_y_[r] -
           (below_[static_cast<std::size_t>(r)] ? j : 0.0) - log_c;
  }

  double t_, t1_, t2_;
  bool full_;
  LinkConfig link_;
  Eigen::MatrixXd X_;
  Eigen::VectorXd log_y_, log1m_y_;
  std::vector<bool> below_;
};

inline double log_likelihood(const ParamVector& theta, const Dataset& data, const Window& w,
                             const LinkConfig& link = {}) {
  return WindowedLikelihood(data, w, link).log_likelihood(theta);
}

// Independent N(0,1) on α and N(0,1/p) on each γ coordinate, normalizers included.
inline double log_prior(const ParamVector& theta, Eigen::Index p) {
  if (theta.p() != p) throw std::invalid_argument("log_prior: parameter dimension mismatch");
  const double pd = static_cast<double>(p);
  const double log_2pi = std::log(2.0 * std::numbers::pi);
  const double quad = theta.alpha().squaredNorm() +
                      pd * (theta.gamma1().squaredNorm() + theta.gamma2().squaredNorm());
  // p α-terms with variance 1, 2p γ-terms with variance 1/p
  const double norm = -0.5 * pd * log_2pi - pd * (log_2pi - std::log(pd));
  return norm - 0.5 * quad;
}

// Prior standard deviations in θ order.
inline Eigen::VectorXd prior_sd(Eigen::Index p) {
  Eigen::VectorXd sd(3 * p);
  sd.head(2 * p).setConstant(1.0 / std::sqrt(static_cast<double>(p)));
  sd.tail(p).setConstant(1.0);
  return sd;
}

inline double log_posterior_unnorm(const ParamVector& theta, const Dataset& data, const Window& w,
                                   const LinkConfig& link = {}) {
  return log_likelihood(theta, data, w, link) + log_prior(theta, data.p());
}

inline double log_density_pointwise(const ParamVector& theta, const Dataset& data, const Window& w,
                                    Eigen::Index i, const LinkConfig& link = {}) {
  if (std::find(w.indices.begin(), w.indices.end(), i) == w.indices.end())
    throw std::out_of_range("sample " + std::to_string(i) + " is not inside the window");
  return conditional_log_density(data.y[i], Eigen::VectorXd(data.X.row(i).transpose()), theta,
                                 data.t, w.t1, w.t2, link);
}

}  // namespace ddreg
