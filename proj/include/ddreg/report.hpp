#pragma once

// Versioned JSON reports, posterior draw dumps and plot-ready jump surfaces.
//
// Report layout ("ddreg.report/1"):
//   schema, command, method ("bayes" | "logistic" | "least_squares"),
//   provenance {config_hash, seed, build}, threshold, n, p, covariates[],
//   standardization {means[], sds[]}, subset_size (null for baselines),
//   fits[] {delta, n_window, waic_fit, waic_complexity, waic_total,
//           coefficients {alpha[], gamma1[], gamma2[]}}, selected_delta.
// Coefficient entries: {name, estimate, lo95, hi95} (+ se for baselines).

#include <Eigen/Dense>

#include <cstdint>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

#include "ddreg/baseline.hpp"
#include "ddreg/config.hpp"
#include "ddreg/csv.hpp"
#include "ddreg/model.hpp"
#include "ddreg/sampler.hpp"
#include "ddreg/selection.hpp"

#ifndef DDREG_BUILD_ID
#define DDREG_BUILD_ID "unknown"
#endif

namespace ddreg {

inline constexpr const char* kReportSchema = "ddreg.report/1";

struct Provenance {
  std::string config_hash;
  std::uint64_t seed = 0;
  std::string build = DDREG_BUILD_ID;
};

inline json to_json(const Provenance& p) {
  return {{"config_hash", p.config_hash}, {"seed", p.seed}, {"build", p.build}};
}

namespace detail {

inline json report_header(const std::string& command, const std::string& method,
                          const Dataset& data, const Provenance& prov) {
  json j;
  j["schema"] = kReportSchema;
  j["command"] = command;
  j["method"] = method;
  j["provenance"] = to_json(prov);
  j["threshold"] = data.t;
  j["n"] = data.n();
  j["p"] = data.p();
  j["covariates"] = data.names;
  j["standardization"] = {{"means", vec_to_json(data.column_means)},
                          {"sds", vec_to_json(data.column_sds)}};
  return j;
}

inline json coef_block(const std::vector<CoefSummary>& s, std::size_t offset,
                       const std::vector<std::string>& names) {
  json a = json::array();
  for (std::size_t k = 0; k < names.size(); ++k) {
    const auto& c = s[offset + k];
    a.push_back({{"name", names[k]}, {"estimate", c.estimate}, {"lo95", c.lo95}, {"hi95", c.hi95}});
  }
  return a;
}

}  // namespace detail

inline json bayes_report(const std::string& command, const Dataset& data,
                         const AdaptiveResult& res, const Provenance& prov) {
  json j = detail::report_header(command, "bayes", data, prov);
  j["subset_size"] = res.subset.size();
  const auto p = static_cast<std::size_t>(data.p());
  json fits = json::array();
  for (const auto& f : res.fits) {
    fits.push_back({{"delta", f.delta},
                    {"n_window", f.n_window},
                    {"waic_fit", f.waic.fit_term},
                    {"waic_complexity", f.waic.complexity_term},
                    {"waic_total", f.waic.total},
                    {"coefficients",
                     {{"gamma1", detail::coef_block(f.summaries, 0, data.names)},
                      {"gamma2", detail::coef_block(f.summaries, p, data.names)},
                      {"alpha", detail::coef_block(f.summaries, 2 * p, data.names)}}}});
  }
  j["fits"] = fits;
  j["selected_delta"] = res.selected_delta();
  return j;
}

inline json baseline_report(const Dataset& data, double delta, const BorFit& f,
                            const Provenance& prov) {
  json j = detail::report_header("baseline", to_string(f.method), data, prov);
  j["subset_size"] = nullptr;
  json alpha = json::array();
  for (std::size_t k = 0; k < data.names.size(); ++k) {
    const auto kk = static_cast<Eigen::Index>(k);
    alpha.push_back({{"name", data.names[k]},
                     {"estimate", f.coefficients[kk]},
                     {"se", f.standard_errors[kk]},
                     {"lo95", f.ci95[k].first},
                     {"hi95", f.ci95[k].second}});
  }
  j["fits"] = json::array({{{"delta", delta},
                            {"n_window", f.n_trimmed},
                            {"waic_fit", nullptr},
                            {"waic_complexity", nullptr},
                            {"waic_total", nullptr},
                            {"coefficients", {{"alpha", alpha}}}}});
  j["selected_delta"] = delta;
  return j;
}

// Structural check against the published report schema; returns the list of
// problems (empty when valid).
inline std::vector<std::string> validate_report(const json& j) {
  std::vector<std::string> bad;
  auto need = [&](const json& obj, const char* key, auto pred, const std::string& where) {
    if (!obj.is_object() || !obj.contains(key) || !pred(obj.at(key))) {
      bad.push_back(where + "." + key + " missing or mistyped");
      return false;
    }
    return true;
  };
  auto is_num = [](const json& v) { return v.is_number(); };
  auto is_num_or_null = [](const json& v) { return v.is_number() || v.is_null(); };
  auto is_str = [](const json& v) { return v.is_string(); };
  auto is_arr = [](const json& v) { return v.is_array(); };
  auto is_obj = [](const json& v) { return v.is_object(); };
  auto is_uint = [](const json& v) { return v.is_number_unsigned() || v.is_number_integer(); };

  if (!j.is_object()) return {"report is not an object"};
  if (need(j, "schema", is_str, "$") && j["schema"] != kReportSchema)
    bad.push_back("$.schema is not " + std::string(kReportSchema));
  need(j, "command", is_str, "$");
  if (need(j, "method", is_str, "$")) {
    const auto m = j["method"].get<std::string>();
    if (m != "bayes" && m != "logistic" && m != "least_squares") bad.push_back("$.method unknown");
  }
  if (need(j, "provenance", is_obj, "$")) {
    need(j["provenance"], "config_hash", is_str, "$.provenance");
    need(j["provenance"], "seed", is_uint, "$.provenance");
    need(j["provenance"], "build", is_str, "$.provenance");
  }
  need(j, "threshold", is_num, "$");
  need(j, "n", is_uint, "$");
  const bool has_p = need(j, "p", is_uint, "$");
  const bool has_cov = need(j, "covariates", is_arr, "$");
  const std::size_t p = has_p ? j["p"].get<std::size_t>() : 0;
  if (has_p && has_cov && j["covariates"].size() != p) bad.push_back("$.covariates length != p");
  if (need(j, "standardization", is_obj, "$")) {
    for (const char* k : {"means", "sds"})
      if (need(j["standardization"], k, is_arr, "$.standardization") &&
          j["standardization"][k].size() != p)
        bad.push_back(std::string("$.standardization.") + k + " length != p");
  }
  need(j, "subset_size", [](const json& v) { return v.is_null() || v.is_number_unsigned() || v.is_number_integer(); }, "$");
  need(j, "selected_delta", is_num, "$");
  if (need(j, "fits", is_arr, "$")) {
    if (j["fits"].empty()) bad.push_back("$.fits is empty");
    for (std::size_t f = 0; f < j["fits"].size(); ++f) {
      const json& fit = j["fits"][f];
      const std::string where = "$.fits[" + std::to_string(f) + "]";
      need(fit, "delta", is_num, where);
      need(fit, "n_window", is_uint, where);
      for (const char* k : {"waic_fit", "waic_complexity", "waic_total"}) need(fit, k, is_num_or_null, where);
      if (need(fit, "coefficients", is_obj, where)) {
        if (!fit["coefficients"].contains("alpha")) bad.push_back(where + ".coefficients.alpha missing");
        for (auto it = fit["coefficients"].begin(); it != fit["coefficients"].end(); ++it) {
          const std::string cw = where + ".coefficients." + it.key();
          if (!it->is_array() || it->size() != p) {
            bad.push_back(cw + " must be an array of length p");
            continue;
          }
          for (const auto& c : *it) {
            need(c, "name", is_str, cw);
            need(c, "estimate", is_num, cw);
            need(c, "lo95", is_num, cw);
            need(c, "hi95", is_num, cw);
          }
        }
      }
    }
  }
  return bad;
}

// Fixed-width summary of a report's α estimates and WAIC values.
inline std::string format_report_text(const json& j) {
  std::ostringstream o;
  o << std::fixed << std::setprecision(3);
  o << "method: " << j["method"].get<std::string>() << "   threshold: " << j["threshold"].get<double>()
    << "   n: " << j["n"].get<long>() << "   p: " << j["p"].get<long>() << '\n';
  for (const auto& fit : j["fits"]) {
    o << "\ndelta = " << fit["delta"].get<double>() << "   n_window = " << fit["n_window"].get<long>();
    if (!fit["waic_total"].is_null())
      o << "   WAIC = " << std::setprecision(2) << fit["waic_total"].get<double>() << " ("
        << fit["waic_fit"].get<double>() << " + " << fit["waic_complexity"].get<double>() << ")"
        << std::setprecision(3);
    if (fit["delta"] == j["selected_delta"] && j["fits"].size() > 1) o << "   [selected]";
    o << '\n';
    o << std::left << std::setw(24) << "  coefficient" << std::right << std::setw(10) << "estimate"
      << std::setw(10) << "lo95" << std::setw(10) << "hi95" << '\n';
    for (const auto& c : fit["coefficients"]["alpha"])
      o << "  " << std::left << std::setw(22) << c["name"].get<std::string>() << std::right
        << std::setw(10) << c["estimate"].get<double>() << std::setw(10) << c["lo95"].get<double>()
        << std::setw(10) << c["hi95"].get<double>() << '\n';
  }
  return o.str();
}

// Draw matrix as CSV; columns gamma1_1..gamma1_p, gamma2_1.., alpha_1..alpha_p.
inline void write_draws_csv(const Eigen::MatrixXd& draws, std::ostream& out) {
  const Eigen::Index p = draws.cols() / 3;
  const char* blocks[] = {"gamma1", "gamma2", "alpha"};
  for (int b = 0; b < 3; ++b)
    for (Eigen::Index k = 0; k < p; ++k)
      out << (b || k ? "," : "") << blocks[b] << '_' << (k + 1);
  out << '\n';
  for (Eigen::Index m = 0; m < draws.rows(); ++m) {
    for (Eigen::Index c = 0; c < draws.cols(); ++c) out << (c ? "," : "") << format_double(draws(m, c));
    out << '\n';
  }
}

inline Eigen::MatrixXd read_draws_csv(std::istream& in) {
  const CsvTable t = parse_csv(in);
  if (t.header.size() % 3 != 0) throw DataError("draws file must have 3p columns");
  Eigen::MatrixXd d(static_cast<Eigen::Index>(t.rows.size()), static_cast<Eigen::Index>(t.header.size()));
  for (std::size_t r = 0; r < t.rows.size(); ++r)
    for (std::size_t c = 0; c < t.header.size(); ++c) {
      const auto v = parse_number(t.rows[r][c]);
      if (!v) throw DataError("non-numeric draw at row " + std::to_string(r + 1));
      d(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = *v;
    }
  return d;
}

// Posterior median and central 95% band of j(x) = (x'α)_+ at one covariate row.
inline CoefSummary jump_at(const Eigen::MatrixXd& alpha_draws, const Eigen::VectorXd& x) {
  const Eigen::VectorXd z = alpha_draws * x;
  std::vector<double> v(static_cast<std::size_t>(z.size()));
  for (Eigen::Index m = 0; m < z.size(); ++m) v[static_cast<std::size_t>(m)] = jump_link(z[m]);
  return summarize_column(std::move(v));
}

// Profiles of j(x) along each standardized covariate over [-2, 2], others at 0.
inline void write_jump_profiles(const Eigen::MatrixXd& alpha_draws,
                                const std::vector<std::string>& names, std::ostream& out,
                                int points = 41) {
  out << "covariate,z,j_median,j_lo95,j_hi95\n";
  const Eigen::Index p = alpha_draws.cols();
  for (Eigen::Index k = 1; k < p; ++k)
    for (int g = 0; g < points; ++g) {
      const double z = -2.0 + 4.0 * g / (points - 1);
      Eigen::VectorXd x = Eigen::VectorXd::Zero(p);
      x[0] = 1.0;
      x[k] = z;
      const CoefSummary s = jump_at(alpha_draws, x);
      out << csv_escape(names[static_cast<std::size_t>(k)]) << ',' << format_double(z) << ','
          << format_double(s.estimate) << ',' << format_double(s.lo95) << ','
          << format_double(s.hi95) << '\n';
    }
}

// Grid of posterior-median j(x) over two standardized covariates in [-2,2]^2;
// no_jump = 1 marks the region where the median jump is zero.
inline void write_jump_contour(const Eigen::MatrixXd& alpha_draws,
                               const std::vector<std::string>& names, Eigen::Index u,
                               Eigen::Index v, std::ostream& out, int points = 41) {
  const Eigen::Index p = alpha_draws.cols();
  if (u < 1 || v < 1 || u >= p || v >= p || u == v)
    throw ConfigError("contour covariates must be two distinct non-intercept columns");
  out << csv_escape(names[static_cast<std::size_t>(u)]) << ','
      << csv_escape(names[static_cast<std::size_t>(v)]) << ",j_median,no_jump\n";
  for (int a = 0; a < points; ++a)
    for (int b = 0; b < points; ++b) {
      Eigen::VectorXd x = Eigen::VectorXd::Zero(p);
      x[0] = 1.0;
      x[u] = -2.0 + 4.0 * a / (points - 1);
      x[v] = -2.0 + 4.0 * b / (points - 1);
      const double j = jump_at(alpha_draws, x).estimate;
      out << format_double(x[u]) << ',' << format_double(x[v]) << ',' << format_double(j) << ','
          << (j == 0.0 ? 1 : 0) << '\n';
    }
}

}  // namespace ddreg
