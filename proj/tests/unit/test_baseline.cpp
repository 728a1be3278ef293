#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "ddreg/baseline.hpp"
#include "ddreg/synth.hpp"

using namespace ddreg;

namespace {

Dataset tiny(std::vector<double> ys, double t = 0.5) {
  Eigen::VectorXd y = Eigen::Map<Eigen::VectorXd>(ys.data(), static_cast<Eigen::Index>(ys.size()));
  Eigen::MatrixXd raw(y.size(), 1);
  for (Eigen::Index i = 0; i < y.size(); ++i) raw(i, 0) = std::sin(static_cast<double>(i));
  return make_dataset(y, raw, t);
}

struct Problem {
  Eigen::MatrixXd X;
  Eigen::VectorXd y;
};

Problem random_logistic(int n, std::uint64_t seed) {
  std::mt19937_64 g(seed);
  std::normal_distribution<double> z;
  std::uniform_real_distribution<double> u;
  Problem pr{Eigen::MatrixXd(n, 3), Eigen::VectorXd(n)};
  for (int i = 0; i < n; ++i) {
    pr.X(i, 0) = 1.0;
    pr.X(i, 1) = z(g);
    pr.X(i, 2) = z(g);
    const double eta = 0.3 + 0.8 * pr.X(i, 1) - 0.5 * pr.X(i, 2);
    pr.y[i] = u(g) < 1.0 / (1.0 + std::exp(-eta)) ? 1.0 : 0.0;
  }
  return pr;
}

}  // namespace

TEST(TrimBinarize, KeepsWindowRowsAndCodesTheUpperSide) {
  const Dataset d = tiny({0.1, 0.42, 0.5, 0.55, 0.61, 0.9, 0.45});
  const TrimmedBinary tb = trim_binarize(d, 0.1);
  EXPECT_EQ(tb.rows, (std::vector<Eigen::Index>{1, 2, 3, 6}));
  EXPECT_EQ(tb.ystar, (Eigen::Vector4d(0, 1, 1, 0)));  // y = t codes as 1
  EXPECT_TRUE(tb.X.row(1) == d.X.row(2));
  EXPECT_EQ(to_string(BorMethod::Logistic), std::string("logistic"));
}

TEST(TrimBinarize, Errors) {
  const Dataset d = tiny({0.1, 0.42, 0.55, 0.9});
  EXPECT_THROW(trim_binarize(d, 0.0), ConfigError);
  EXPECT_THROW(trim_binarize(d, 0.6), ConfigError);
  EXPECT_THROW(trim_binarize(tiny({0.1, 0.9, 0.2}), 0.1), DataError);   // empty
  EXPECT_THROW(trim_binarize(tiny({0.1, 0.52, 0.55}), 0.1), DataError);  // one class
}

TEST(Logistic, InterceptOnlyIsTheLogOdds) {
  const Eigen::MatrixXd X = Eigen::MatrixXd::Ones(4, 1);
  EXPECT_NEAR(fit_logistic(X, Eigen::Vector4d(1, 0, 1, 0)).coefficients[0], 0.0, 1e-12);
  const BorFit f = fit_logistic(X, Eigen::Vector4d(1, 1, 0, 1));
  EXPECT_NEAR(f.coefficients[0], std::log(3.0), 1e-10);
  // information is n p (1 - p) = 4 * 3/16
  EXPECT_NEAR(f.standard_errors[0], 1.0 / std::sqrt(0.75), 1e-9);
}

TEST(Logistic, SolvesTheScoreEquations) {
  const Problem pr = random_logistic(2000, 3);
  const BorFit f = fit_logistic(pr.X, pr.y);
  const Eigen::ArrayXd prob = 1.0 / (1.0 + (-(pr.X * f.coefficients).array()).exp());
  const Eigen::VectorXd score = pr.X.transpose() * (pr.y.array() - prob).matrix();
  EXPECT_LT(score.cwiseAbs().maxCoeff(), 1e-8);
  EXPECT_NEAR(f.coefficients[1], 0.8, 0.2);
  EXPECT_NEAR(f.coefficients[2], -0.5, 0.2);
  EXPECT_EQ(f.n_trimmed, 2000u);
  EXPECT_GT(f.iterations, 1);
}

TEST(Logistic, ShiftingACovariateOnlyMovesTheIntercept) {
  const Problem pr = random_logistic(800, 4);
  Eigen::MatrixXd shifted = pr.X;
  shifted.col(1).array() += 2.5;
  const BorFit a = fit_logistic(pr.X, pr.y), b = fit_logistic(shifted, pr.y);
  EXPECT_NEAR(b.coefficients[1], a.coefficients[1], 1e-8);
  EXPECT_NEAR(b.coefficients[2], a.coefficients[2], 1e-8);
  EXPECT_NEAR(b.coefficients[0], a.coefficients[0] - 2.5 * a.coefficients[1], 1e-8);
  EXPECT_NEAR(b.standard_errors[1], a.standard_errors[1], 1e-8);
}

TEST(Logistic, SeparationAndRankErrors) {
  Eigen::MatrixXd X(6, 2);
  X << 1, -3, 1, -2, 1, -1, 1, 1, 1, 2, 1, 3;
  const Eigen::VectorXd y = (Eigen::VectorXd(6) << 0, 0, 0, 1, 1, 1).finished();
  EXPECT_THROW(fit_logistic(X, y), DataError);
  Eigen::MatrixXd collinear(6, 3);
  collinear << X, 2.0 * X.col(1);
  EXPECT_THROW(fit_logistic(collinear, (Eigen::VectorXd(6) << 0, 1, 0, 1, 0, 1).finished()), DataError);
  EXPECT_THROW(fit_logistic(X, Eigen::VectorXd::Zero(6)), DataError);
  EXPECT_THROW(fit_logistic(X, Eigen::VectorXd::Zero(5)), std::invalid_argument);
}

TEST(Ols, InterceptOnlyIsTheMean) {
  const Eigen::MatrixXd X = Eigen::MatrixXd::Ones(5, 1);
  const BorFit f = fit_ols(X, (Eigen::VectorXd(5) << 1, 0, 1, 1, 0).finished());
  EXPECT_NEAR(f.coefficients[0], 0.6, 1e-14);
  // s^2 / n with s^2 = 0.3
  EXPECT_NEAR(f.standard_errors[0], std::sqrt(0.3 / 5.0), 1e-14);
}

TEST(Ols, MatchesNormalEquationsAndResidualsAreOrthogonal) {
  const Problem pr = random_logistic(500, 5);
  const BorFit f = fit_ols(pr.X, pr.y);
  const Eigen::VectorXd ref = (pr.X.transpose() * pr.X).llt().solve(pr.X.transpose() * pr.y);
  EXPECT_LT((f.coefficients - ref).cwiseAbs().maxCoeff(), 1e-10);
  const Eigen::VectorXd resid = pr.y - pr.X * f.coefficients;
  EXPECT_LT((pr.X.transpose() * resid).cwiseAbs().maxCoeff(), 1e-9);
  EXPECT_THROW(fit_ols(pr.X.topRows(3), pr.y.head(3)), DataError);
}

TEST(Wald, IntervalsAreEstimatePlusMinus196Se) {
  const Problem pr = random_logistic(400, 6);
  for (const BorFit& f : {fit_logistic(pr.X, pr.y), fit_ols(pr.X, pr.y)}) {
    ASSERT_EQ(f.ci95.size(), 3u);
    for (Eigen::Index k = 0; k < 3; ++k) {
      EXPECT_GT(f.standard_errors[k], 0.0);
      EXPECT_NEAR(f.ci95[k].first, f.coefficients[k] - 1.96 * f.standard_errors[k], 1e-14);
      EXPECT_NEAR(f.ci95[k].second, f.coefficients[k] + 1.96 * f.standard_errors[k], 1e-14);
    }
  }
}

TEST(FitBor, RunsOnSyntheticData) {
  const Dataset data = gen_dataset(named_design("matching", AlphaSetting::Easy, 2000, 3));
  const BorFit lg = fit_bor(data, 0.1, BorMethod::Logistic);
  const BorFit ls = fit_bor(data, 0.1, BorMethod::LeastSquares);
  EXPECT_EQ(lg.n_trimmed, trim_binarize(data, 0.1).rows.size());
  EXPECT_EQ(ls.method, BorMethod::LeastSquares);
  EXPECT_EQ(lg.coefficients.size(), 6);
  // the jump pushes mass above t, so the log-odds intercept is positive
  EXPECT_GT(lg.coefficients[0], 0.0);
}
