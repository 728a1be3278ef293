#pragma once

// CSV -> Dataset: column selection, missing/boundary row policy, covariate
// transforms, intercept and standardization.
//
// Drop policy, applied in this order to each row:
//   1. any selected cell empty                  -> dropped (missing)
//   2. response outside the open interval (0,1) -> dropped (boundary)
// A non-empty cell that is not a number is an error, not a drop.

#include <Eigen/Dense>

#include <cmath>
#include <fstream>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "ddreg/bspline.hpp"
#include "ddreg/csv.hpp"
#include "ddreg/errors.hpp"
#include "ddreg/model.hpp"

namespace ddreg {

struct Transform {
  enum class Kind { Identity, Log1p, BSpline };
  Kind kind = Kind::Identity;
  int df = 3;

  // "identity", "log1p", "bspline" (df 3) or "bspline:DF"
  static Transform parse(std::string_view s) {
    Transform t;
    if (s == "identity") return t;
    if (s == "log1p") {
      t.kind = Kind::Log1p;
      return t;
    }
    if (s.rfind("bspline", 0) == 0) {
      t.kind = Kind::BSpline;
      if (s.size() > 7) {
        if (s[7] != ':') throw ConfigError("bad transform '" + std::string(s) + "'");
        const auto df = parse_number(s.substr(8));
        if (!df || *df != std::floor(*df)) throw ConfigError("bad bspline df in '" + std::string(s) + "'");
        t.df = static_cast<int>(*df);
      }
      if (t.df < 2) throw ConfigError("bspline df must be at least 2");
      return t;
    }
    throw ConfigError("unknown transform '" + std::string(s) +
                      "' (expected identity, log1p or bspline[:df])");
  }
};

struct IngestSpec {
  std::string path;
  std::string response_column = "y";
  std::vector<std::string> covariate_columns;
  double threshold = 0.5;
  std::map<std::string, Transform> transforms;  // absent: identity
  bool enforce_min_rows = true;                 // refuse fewer than 3p usable rows

  void validate() const {
    if (!(threshold > 0.0 && threshold < 1.0)) throw ConfigError("threshold must lie in (0,1)");
    for (const auto& c : covariate_columns)
      if (c == response_column) throw ConfigError("response column '" + c + "' is also a covariate");
    for (const auto& [name, tr] : transforms) {
      bool found = false;
      for (const auto& c : covariate_columns) found = found || c == name;
      if (!found) throw ConfigError("transform given for '" + name + "', which is not a covariate");
    }
  }
};

struct IngestReport {
  Dataset data;
  std::size_t rows_read = 0;
  std::size_t dropped_missing = 0;
  std::size_t dropped_boundary = 0;
};

inline IngestReport ingest_table(const CsvTable& table, const IngestSpec& spec) {
  spec.validate();
  auto find = [&](const std::string& name) {
    const auto c = table.column(name);
    if (!c) throw ConfigError("unknown column '" + name + "'");
    return *c;
  };
  const std::size_t ycol = find(spec.response_column);
  std::vector<std::size_t> xcols;
  for (const auto& c : spec.covariate_columns) xcols.push_back(find(c));

  IngestReport rep;
  rep.rows_read = table.rows.size();
  std::vector<double> ys;
  std::vector<std::vector<double>> xs(xcols.size());
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    auto value = [&](std::size_t c) -> std::optional<double> {
      const std::string& cell = row[c];
      if (cell.find_first_not_of(" \t") == std::string::npos) return std::nullopt;
      const auto v = parse_number(cell);
      if (!v || !std::isfinite(*v))
        throw DataError("non-numeric cell '" + cell + "' at data row " + std::to_string(r + 1) +
                        ", column '" + table.header[c] + "'");
      return v;
    };
    const auto y = value(ycol);
    std::vector<std::optional<double>> x;
    for (auto c : xcols) x.push_back(value(c));
    bool missing = !y;
    for (const auto& v : x) missing = missing || !v;
    if (missing) {
      ++rep.dropped_missing;
      continue;
    }
    if (!(*y > 0.0 && *y < 1.0)) {
      ++rep.dropped_boundary;
      continue;
    }
    ys.push_back(*y);
    for (std::size_t k = 0; k < x.size(); ++k) xs[k].push_back(*x[k]);
  }

  const auto n = static_cast<Eigen::Index>(ys.size());
  std::vector<Eigen::VectorXd> cols;
  std::vector<std::string> names;
  for (std::size_t k = 0; k < xcols.size(); ++k) {
    Eigen::VectorXd c = Eigen::Map<const Eigen::VectorXd>(xs[k].data(), n);
    const auto it = spec.transforms.find(spec.covariate_columns[k]);
    const Transform tr = it == spec.transforms.end() ? Transform{} : it->second;
    const std::string& name = spec.covariate_columns[k];
    switch (tr.kind) {
      case Transform::Kind::Identity:
        cols.push_back(std::move(c));
        names.push_back(name);
        break;
      case Transform::Kind::Log1p:
        for (auto& v : c) {
          if (!(v > -1.0)) throw DataError("log1p transform of '" + name + "' needs values > -1");
          v = std::log1p(v);
        }
        cols.push_back(std::move(c));
        names.push_back(name);
        break;
      case Transform::Kind::BSpline: {
        const Eigen::MatrixXd B = bspline_basis(c, tr.df);
        for (Eigen::Index b = 0; b < B.cols(); ++b) {
          cols.emplace_back(B.col(b));
          names.push_back(name + "_bs" + std::to_string(b + 1));
        }
        break;
      }
    }
  }
  const auto p = static_cast<Eigen::Index>(cols.size()) + 1;
  if (spec.enforce_min_rows && n < 3 * p)
    throw DataError("only " + std::to_string(n) + " usable rows; at least 3p = " +
                    std::to_string(3 * p) + " required");
  Eigen::MatrixXd raw(n, p - 1);
  for (Eigen::Index k = 0; k < p - 1; ++k) raw.col(k) = cols[static_cast<std::size_t>(k)];
  Eigen::VectorXd y = Eigen::Map<const Eigen::VectorXd>(ys.data(), n);
  rep.data = make_dataset(std::move(y), std::move(raw), spec.threshold, std::move(names));
  return rep;
}

inline IngestReport ingest(const IngestSpec& spec) { return ingest_table(read_csv(spec.path), spec); }

// Writes the response and the pre-standardization covariates, so that
// ingesting the file with identity transforms reproduces `data` exactly.
inline void write_dataset_csv(const Dataset& data, std::ostream& out,
                              const std::string& response_name = "y") {
  out << csv_escape(response_name);
  for (std::size_t k = 1; k < data.names.size(); ++k) out << ',' << csv_escape(data.names[k]);
  out << '\n';
  for (Eigen::Index i = 0; i < data.n(); ++i) {
    out << format_double(data.y[i]);
    for (Eigen::Index c = 0; c < data.raw.cols(); ++c) out << ',' << format_double(data.raw(i, c));
    out << '\n';
  }
}

inline void write_dataset_csv(const Dataset& data, const std::string& path,
                              const std::string& response_name = "y") {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write '" + path + "'");
  write_dataset_csv(data, out, response_name);
}

inline IngestSpec identity_spec_for(const Dataset& data, std::string path,
                                    const std::string& response_name = "y") {
  IngestSpec s;
  s.path = std::move(path);
  s.response_column = response_name;
  s.covariate_columns.assign(data.names.begin() + 1, data.names.end());
  s.threshold = data.t;
  return s;
}

}  // namespace ddreg
