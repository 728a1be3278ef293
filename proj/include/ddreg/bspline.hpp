#pragma once

// Polynomial B-spline bases for covariate transforms. Interior knots sit at
// equally spaced sample quantiles, boundary knots at the sample range.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "ddreg/errors.hpp"

namespace ddreg {

struct BSplineKnots {
  int degree = 3;
  std::vector<double> knots;  // full knot vector, boundary knots repeated degree+1 times

  [[nodiscard]] int num_basis() const {
    return static_cast<int>(knots.size()) - degree - 1;
  }
};

// Sample quantile with linear interpolation between order statistics.
inline double sample_quantile(std::vector<double> v, double q) {
  std::sort(v.begin(), v.end());
  const double h = (static_cast<double>(v.size()) - 1.0) * q;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (h - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

// Knots for a basis with `df` columns once the first basis function is
// dropped: cubic when df >= 3 (df - 3 interior knots), quadratic for df = 2.
inline BSplineKnots bspline_knots(const Eigen::VectorXd& column, int df) {
  if (df < 2) throw ConfigError("bspline df must be at least 2");
  std::vector<double> v(column.data(), column.data() + column.size());
  std::vector<double> distinct = v;
  std::sort(distinct.begin(), distinct.end());
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
  if (static_cast<int>(distinct.size()) < std::max(df, 2))
    throw DataError("bspline transform needs at least " + std::to_string(std::max(df, 2)) +
                    " distinct values, column has " + std::to_string(distinct.size()));
  BSplineKnots k;
  k.degree = std::min(3, df);
  const int interior = df - k.degree;
  const double lo = distinct.front(), hi = distinct.back();
  k.knots.assign(static_cast<std::size_t>(k.degree + 1), lo);
  for (int m = 1; m <= interior; ++m)
    k.knots.push_back(sample_quantile(v, static_cast<double>(m) / (interior + 1)));
  k.knots.insert(k.knots.end(), static_cast<std::size_t>(k.degree + 1), hi);
  return k;
}

// All basis functions at x (x clamped to the boundary knots); uses the
// triangular recurrence on the non-zero functions of the knot span.
inline std::vector<double> bspline_eval(const BSplineKnots& k, double x) {
  const int deg = k.degree;
  const int nb = k.num_basis();
  const auto& t = k.knots;
  x = std::clamp(x, t[static_cast<std::size_t>(deg)], t[static_cast<std::size_t>(nb)]);
  // span index s with t[s] <= x < t[s+1], the last non-empty span at the right end
  int s = deg;
  while (s < nb - 1 && x >= t[static_cast<std::size_t>(s + 1)]) ++s;

  std::vector<double> n(static_cast<std::size_t>(deg + 1), 0.0);
  std::vector<double> left(static_cast<std::size_t>(deg + 1)), right(static_cast<std::size_t>(deg + 1));
  n[0] = 1.0;
  for (int j = 1; j <= deg; ++j) {
    left[static_cast<std::size_t>(j)] = x - t[static_cast<std::size_t>(s + 1 - j)];
    right[static_cast<std::size_t>(j)] = t[static_cast<std::size_t>(s + j)] - x;
    double saved = 0.0;
    for (int r = 0; r < j; ++r) {
      const double denom = right[static_cast<std::size_t>(r + 1)] + left[static_cast<std::size_t>(j - r)];
      const double tmp = denom > 0.0 ? n[static_cast<std::size_t>(r)] / denom : 0.0;
      n[static_cast<std::size_t>(r)] = saved + right[static_cast<std::size_t>(r + 1)] * tmp;
      saved = left[static_cast<std::size_t>(j - r)] * tmp;
    }
    n[static_cast<std::size_t>(j)] = saved;
  }
  std::vector<double> out(static_cast<std::size_t>(nb), 0.0);
  for (int r = 0; r <= deg; ++r) out[static_cast<std::size_t>(s - deg + r)] = n[static_cast<std::size_t>(r)];
  return out;
}

// Every basis function (rows sum to one).
inline Eigen::MatrixXd bspline_full_basis(const Eigen::VectorXd& column, const BSplineKnots& k) {
  Eigen::MatrixXd B(column.size(), k.num_basis());
  for (Eigen::Index i = 0; i < column.size(); ++i) {
    const auto row = bspline_eval(k, column[i]);
    for (int c = 0; c < k.num_basis(); ++c) B(i, c) = row[static_cast<std::size_t>(c)];
  }
  return B;
}

// df-column basis: the full basis without its first function, whose
// contribution the intercept absorbs.
inline Eigen::MatrixXd bspline_basis(const Eigen::VectorXd& column, int df) {
  const BSplineKnots k = bspline_knots(column, df);
  const Eigen::MatrixXd full = bspline_full_basis(column, k);
  return full.rightCols(df);
}

}  // namespace ddreg
