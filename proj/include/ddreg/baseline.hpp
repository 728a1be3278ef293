#pragma once

// Binary-outcome regression baselines: keep rows with |y - t| <= Δ, code
// y* = I(y >= t), then regress y* on x by logistic regression or least squares.

#include <Eigen/Dense>

#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "ddreg/errors.hpp"
#include "ddreg/model.hpp"

namespace ddreg {

enum class BorMethod { Logistic, LeastSquares };

inline const char* to_string(BorMethod m) {
  return m == BorMethod::Logistic ? "logistic" : "least_squares";
}

struct BorFit {
  Eigen::VectorXd coefficients;
  Eigen::VectorXd standard_errors;
  std::vector<std::pair<double, double>> ci95;
  std::size_t n_trimmed = 0;
  BorMethod method = BorMethod::Logistic;
  int iterations = 0;
};

struct TrimmedBinary {
  Eigen::MatrixXd X;
  Eigen::VectorXd ystar;
  std::vector<Eigen::Index> rows;
};

inline TrimmedBinary trim_binarize(const Dataset& data, double delta) {
  const double max_delta = std::min(data.t, 1.0 - data.t);
  if (!(delta > 0.0 && delta <= max_delta + kDeltaSlack))
    throw ConfigError("trim half-width " + std::to_string(delta) + " outside (0, " +
                      std::to_string(max_delta) + "]");
  TrimmedBinary out;
  for (Eigen::Index i = 0; i < data.n(); ++i)
    if (std::abs(data.y[i] - data.t) <= delta) out.rows.push_back(i);
  const auto m = static_cast<Eigen::Index>(out.rows.size());
  if (m == 0) throw DataError("trimmed data set is empty");
  out.X.resize(m, data.p());
  out.ystar.resize(m);
  for (Eigen::Index r = 0; r < m; ++r) {
    const auto i = out.rows[static_cast<std::size_t>(r)];
    out.X.row(r) = data.X.row(i);
    out.ystar[r] = data.y[i] >= data.t ? 1.0 : 0.0;
  }
  const double ones = out.ystar.sum();
  if (ones == 0.0 || ones == static_cast<double>(m))
    throw DataError("trimmed data set has a single outcome class");
  return out;
}

namespace detail {

inline void require_full_rank(const Eigen::MatrixXd& X) {
  if (X.rows() < X.cols()) throw DataError("fewer rows than coefficients");
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
  if (qr.rank() < X.cols()) throw DataError("design matrix is rank deficient");
}

inline void fill_wald(BorFit& f, const Eigen::MatrixXd& cov) {
  f.standard_errors = cov.diagonal().cwiseSqrt();
  f.ci95.clear();
  for (Eigen::Index k = 0; k < f.coefficients.size(); ++k)
    f.ci95.emplace_back(f.coefficients[k] - 1.96 * f.standard_errors[k],
                        f.coefficients[k] + 1.96 * f.standard_errors[k]);
}

}  // namespace detail

inline constexpr double kIrlsTolerance = 1e-10;
inline constexpr int kIrlsMaxIter = 100;
inline constexpr double kSeparationNorm = 1e3;
inline constexpr double kSeparationFit = 1e-6;

// Maximum likelihood logistic regression by IRLS (Newton steps), with Wald
// standard errors from the inverse observed information.
inline BorFit fit_logistic(const Eigen::MatrixXd& X, const Eigen::VectorXd& ystar) {
  if (X.rows() != ystar.size()) throw std::invalid_argument("fit_logistic: row mismatch");
  const double ones = ystar.sum();
  if (ones == 0.0 || ones == static_cast<double>(ystar.size()))
    throw DataError("logistic regression needs both outcome classes");
  detail::require_full_rank(X);

  BorFit f;
  f.method = BorMethod::Logistic;
  f.n_trimmed = static_cast<std::size_t>(X.rows());
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(X.cols());
  Eigen::MatrixXd info(X.cols(), X.cols());
  bool converged = false;
  for (int it = 1; it <= kIrlsMaxIter; ++it) {
    const Eigen::ArrayXd prob = 1.0 / (1.0 + (-(X * beta).array()).exp());
    const Eigen::ArrayXd wts = prob * (1.0 - prob);
    info = X.transpose() * (X.array().colwise() * wts).matrix();
    const Eigen::VectorXd score = X.transpose() * (ystar.array() - prob).matrix();
    const Eigen::VectorXd step = info.ldlt().solve(score);
    beta += step;
    f.iterations = it;
    if (!beta.allFinite() || beta.norm() > kSeparationNorm)
      throw DataError("logistic regression diverged (separation detected)");
    // fitted probabilities reproducing every outcome: complete separation
    if ((ystar.array() - prob).abs().maxCoeff() < kSeparationFit)
      throw DataError("logistic regression diverged (separation detected)");
    if (step.cwiseAbs().maxCoeff() < kIrlsTolerance) {
      converged = true;
      break;
    }
  }
  if (!converged) throw NumericalError("IRLS did not converge in 100 iterations");
  const Eigen::ArrayXd prob = 1.0 / (1.0 + (-(X * beta).array()).exp());
  info = X.transpose() * (X.array().colwise() * (prob * (1.0 - prob))).matrix();
  f.coefficients = beta;
  detail::fill_wald(f, info.inverse());
  return f;
}

// Ordinary least squares with classical (homoskedastic) standard errors.
inline BorFit fit_ols(const Eigen::MatrixXd& X, const Eigen::VectorXd& ystar) {
  if (X.rows() != ystar.size()) throw std::invalid_argument("fit_ols: row mismatch");
  detail::require_full_rank(X);
  if (X.rows() <= X.cols()) throw DataError("least squares needs more rows than coefficients");
  BorFit f;
  f.method = BorMethod::LeastSquares;
  f.n_trimmed = static_cast<std::size_t>(X.rows());
  f.coefficients = X.colPivHouseholderQr().solve(ystar);
  const Eigen::VectorXd resid = ystar - X * f.coefficients;
  const double sigma2 = resid.squaredNorm() / static_cast<double>(X.rows() - X.cols());
  const Eigen::MatrixXd xtx_inv = (X.transpose() * X).inverse();
  detail::fill_wald(f, sigma2 * xtx_inv);
  return f;
}

inline BorFit fit_bor(const Dataset& data, double delta, BorMethod method) {
  const TrimmedBinary tb = trim_binarize(data, delta);
  return method == BorMethod::Logistic ? fit_logistic(tb.X, tb.ystar) : fit_ols(tb.X, tb.ystar);
}

}  // namespace ddreg
