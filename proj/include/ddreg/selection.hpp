#pragma once

// Window selection by a WAIC whose sum runs over the rows shared by every
// candidate window (the rows of the narrowest one). Each candidate's density
// is renormalized to the narrowest window before scoring, so all candidates
// predict the same event.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "ddreg/errors.hpp"
#include "ddreg/model.hpp"
#include "ddreg/parallel.hpp"
#include "ddreg/sampler.hpp"

namespace ddreg {

class DeltaGrid {
 public:
  DeltaGrid() : DeltaGrid(std::vector<double>{0.5, 0.4, 0.25, 0.1}) {}
  explicit DeltaGrid(std::vector<double> deltas) : deltas_(std::move(deltas)) {
    if (deltas_.empty()) throw ConfigError("delta grid is empty");
    std::sort(deltas_.begin(), deltas_.end(), std::greater<>());
    if (std::adjacent_find(deltas_.begin(), deltas_.end()) != deltas_.end())
      throw ConfigError("delta grid has repeated values");
  }

  void validate(double t) const {
    const double max_delta = std::min(t, 1.0 - t);
    for (double d : deltas_)
      if (!(d > 0.0 && d <= max_delta + kDeltaSlack))
        throw ConfigError("delta " + std::to_string(d) + " outside (0, " +
                          std::to_string(max_delta) + "]");
  }

  [[nodiscard]] const std::vector<double>& deltas() const { return deltas_; }
  [[nodiscard]] double smallest() const { return deltas_.back(); }
  [[nodiscard]] std::size_t size() const { return deltas_.size(); }

 private:
  std::vector<double> deltas_;
};

struct WaicReport {
  double fit_term = 0.0;
  double complexity_term = 0.0;
  double total = 0.0;
  std::size_t subset_size = 0;
};

inline std::vector<Eigen::Index> common_subset(const Dataset& data, const DeltaGrid& grid) {
  grid.validate(data.t);
  std::vector<Eigen::Index> s;
  for (Eigen::Index i = 0; i < data.n(); ++i)
    if (std::abs(data.y[i] - data.t) <= grid.smallest()) s.push_back(i);
  if (s.empty()) throw DataError("no observations inside the narrowest window");
  return s;
}

// WAIC from a matrix of log densities (draws x observations).
inline WaicReport waic_from_log_densities(const Eigen::MatrixXd& ld) {
  const Eigen::Index m = ld.rows();
  if (m < 1) throw std::invalid_argument("waic needs at least one draw");
  if (!ld.allFinite()) throw NumericalError("non-finite pointwise log density in WAIC");
  WaicReport r;
  r.subset_size = static_cast<std::size_t>(ld.cols());
  double lppd = 0.0, pen = 0.0;
  for (Eigen::Index i = 0; i < ld.cols(); ++i) {
    const auto col = ld.col(i);
    const double mx = col.maxCoeff();
    lppd += mx + std::log((col.array() - mx).exp().sum()) - std::log(static_cast<double>(m));
    if (m > 1) {
      const double mean = col.mean();
      pen += (col.array() - mean).square().sum() / static_cast<double>(m - 1);
    }
  }
  r.fit_term = -2.0 * lppd;
  r.complexity_term = 2.0 * pen;
  r.total = r.fit_term + r.complexity_term;
  return r;
}

// Log densities of the rows in `subset` under window `w`'s normalization, one
// row per draw.
inline Eigen::MatrixXd subset_log_densities(const Eigen::MatrixXd& draws, const Dataset& data,
                                            const Window& w, const std::vector<Eigen::Index>& subset,
                                            const LinkConfig& link = {}) {
  for (auto i : subset)
    if (std::abs(data.y[i] - data.t) > w.delta)
      throw std::invalid_argument("WAIC subset row " + std::to_string(i) +
                                  " lies outside the fitted window");
  Window sub = w;
  sub.indices = subset;
  const WindowedLikelihood lik(data, sub, link);
  Eigen::MatrixXd ld(draws.rows(), static_cast<Eigen::Index>(subset.size()));
  for (Eigen::Index m = 0; m < draws.rows(); ++m)
    ld.row(m) = lik.pointwise(ParamVector(Eigen::VectorXd(draws.row(m).transpose()))).transpose();
  return ld;
}

inline WaicReport waic(const PosteriorDraws& draws, const Dataset& data, const Window& w,
                       const std::vector<Eigen::Index>& subset, const LinkConfig& link = {}) {
  return waic_from_log_densities(subset_log_densities(draws.draws, data, w, subset, link));
}

struct FitReport {
  double delta = 0.0;
  std::size_t n_window = 0;
  PosteriorDraws draws;
  std::vector<CoefSummary> summaries;  // θ order: γ1, γ2, α
  WaicReport waic;

  [[nodiscard]] CoefSummary alpha(Eigen::Index k) const {
    return summaries[static_cast<std::size_t>(2 * draws.p() + k)];
  }
};

struct AdaptiveResult {
  std::vector<FitReport> fits;  // in grid (descending delta) order
  std::vector<Eigen::Index> subset;
  std::size_t selected_index = 0;

  [[nodiscard]] double selected_delta() const { return fits[selected_index].delta; }
  [[nodiscard]] const FitReport& selected() const { return fits[selected_index]; }
};

namespace detail {
template <class E>
[[noreturn]] void rethrow_with_delta(const E& e, double delta) {
  throw E("delta=" + std::to_string(delta) + ": " + e.what());
}
}  // namespace detail

// Fits one window and scores it on the rows of `test`, with every candidate's
// density renormalized to the test window so scores compare the same event.
inline FitReport fit_window(const Dataset& data, double delta, const ChainConfig& cfg,
                            const Window& test, const LinkConfig& link = {}) {
  try {
    const Window w = make_window(data, delta);
    FitReport r;
    r.delta = delta;
    r.n_window = w.indices.size();
    r.draws = run_chain(data, w, cfg, link);
    r.summaries = summarize(r.draws);
    r.waic = waic(r.draws, data, test, test.indices, link);
    return r;
  } catch (const DataError& e) {
    detail::rethrow_with_delta(e, delta);
  } catch (const NumericalError& e) {
    detail::rethrow_with_delta(e, delta);
  } catch (const ConfigError& e) {
    detail::rethrow_with_delta(e, delta);
  }
}

// Index of the smallest WAIC total; earlier (larger) deltas win ties.
inline std::size_t select_min_waic(const std::vector<FitReport>& fits) {
  std::size_t best = 0;
  for (std::size_t k = 1; k < fits.size(); ++k)
    if (fits[k].waic.total < fits[best].waic.total) best = k;
  return best;
}

inline AdaptiveResult adaptive_fit(const Dataset& data, const DeltaGrid& grid,
                                   const ChainConfig& cfg, const LinkConfig& link = {},
                                   unsigned threads = default_threads()) {
  AdaptiveResult out;
  out.subset = common_subset(data, grid);
  const Window test = make_window(data, grid.smallest());
  // All windows must be fittable before any chain runs.
  for (double d : grid.deltas()) {
    try {
      check_window_fittable(data, make_window(data, d));
    } catch (const DataError& e) {
      detail::rethrow_with_delta(e, d);
    }
  }
  out.fits.resize(grid.size());
  parallel_for(grid.size(), threads, [&](std::size_t k) {
    out.fits[k] = fit_window(data, grid.deltas()[k], cfg, test, link);
  });
  out.selected_index = select_min_waic(out.fits);
  return out;
}

// Untrimmed fit packaged like a one-window selection; WAIC covers every row.
inline AdaptiveResult full_fit(const Dataset& data, const ChainConfig& cfg, const LinkConfig& link = {}) {
  const Window w = full_window(data);
  AdaptiveResult out;
  out.subset = w.indices;
  FitReport r;
  r.delta = w.delta;
  r.n_window = w.indices.size();
  r.draws = run_chain(data, w, cfg, link);
  r.summaries = summarize(r.draws);
  r.waic = waic(r.draws, data, w, out.subset, link);
  out.fits.push_back(std::move(r));
  return out;
}

}  // namespace ddreg
