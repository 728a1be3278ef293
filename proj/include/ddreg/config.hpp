#pragma once

// JSON forms of the configuration types, plus a stable content hash used for
// report provenance and for matching resumable study records.

#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>

#include "json.hpp"

#include "ddreg/errors.hpp"
#include "ddreg/sampler.hpp"
#include "ddreg/synth.hpp"

namespace ddreg {

using json = nlohmann::json;

// 64-bit FNV-1a of a string, hex encoded.
inline std::string fnv1a_hex(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  static constexpr char digits[] = "0123456789abcdef";
  std::string out(16, '0');
  for (int k = 15; k >= 0; --k, h >>= 4) out[static_cast<std::size_t>(k)] = digits[h & 0xf];
  return out;
}

// Hash of the canonical (sorted-key, compact) serialization.
inline std::string config_hash(const json& j) { return fnv1a_hex(j.dump()); }

inline json vec_to_json(const Eigen::VectorXd& v) {
  json a = json::array();
  for (double x : v) a.push_back(x);
  return a;
}

inline Eigen::VectorXd vec_from_json(const json& a, const char* what) {
  if (!a.is_array()) throw ConfigError(std::string(what) + " must be an array of numbers");
  Eigen::VectorXd v(static_cast<Eigen::Index>(a.size()));
  for (std::size_t k = 0; k < a.size(); ++k) {
    if (!a[k].is_number()) throw ConfigError(std::string(what) + " must be an array of numbers");
    v[static_cast<Eigen::Index>(k)] = a[k].get<double>();
  }
  return v;
}

inline json to_json(const ChainConfig& c) {
  return {{"total_iters", c.total_iters}, {"burn_in", c.burn_in}, {"keep", c.keep},
          {"seed", c.seed}, {"ellipse_dof", c.ellipse_dof}, {"max_shrinks", c.max_shrinks}};
}

inline json to_json(const GenDesign& d) {
  return {{"base_kind", d.base_kind == BaseKind::MatchingBeta ? "matching_beta" : "mixture_beta"},
          {"kernel_kind",
           d.kernel_kind == KernelKind::Indicator ? "indicator" : "decaying_gaussian"},
          {"gamma1", vec_to_json(d.gamma1)},
          {"gamma2", vec_to_json(d.gamma2)},
          {"alpha", vec_to_json(d.alpha)},
          {"mixture_weight", d.mixture_weight},
          {"contaminant_shapes", {d.contaminant_shapes.a, d.contaminant_shapes.b}},
          {"decay_rate", d.decay_rate},
          {"n", d.n},
          {"p", d.p},
          {"t", d.t},
          {"seed", d.seed},
          {"link", {d.link.lo, d.link.hi}}};
}

namespace detail {
template <class T>
void read_opt(const json& j, const char* key, T& out) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config key '") + key + "': " + e.what());
  }
}

inline void reject_unknown_keys(const json& j, std::initializer_list<const char*> known,
                                const char* what) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool ok = false;
    for (const char* k : known) ok = ok || it.key() == k;
    if (!ok) throw ConfigError(std::string("unknown ") + what + " key '" + it.key() + "'");
  }
}
}  // namespace detail

inline ChainConfig chain_from_json(const json& j, ChainConfig c = {}) {
  if (!j.is_object()) throw ConfigError("chain config must be a JSON object");
  detail::reject_unknown_keys(
      j, {"total_iters", "burn_in", "keep", "seed", "ellipse_dof", "max_shrinks"}, "chain");
  detail::read_opt(j, "total_iters", c.total_iters);
  detail::read_opt(j, "burn_in", c.burn_in);
  detail::read_opt(j, "keep", c.keep);
  detail::read_opt(j, "seed", c.seed);
  detail::read_opt(j, "ellipse_dof", c.ellipse_dof);
  detail::read_opt(j, "max_shrinks", c.max_shrinks);
  c.validate();
  return c;
}

// Keys mirror GenDesign fields. A "design" key ("matching", "mixture",
// "decaying") with optional "alpha_setting" ("easy"/"hard") seeds the
// reference values before the explicit keys are applied.
inline GenDesign design_from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("design config must be a JSON object");
  detail::reject_unknown_keys(
      j, {"design", "alpha_setting", "base_kind", "kernel_kind", "gamma1", "gamma2", "alpha",
          "mixture_weight", "contaminant_shapes", "decay_rate", "n", "p", "t", "seed", "link"},
      "design");
  GenDesign d = named_design(j.value("design", std::string("matching")),
                             parse_alpha_setting(j.value("alpha_setting", std::string("easy"))));
  if (j.contains("base_kind")) {
    const auto s = j["base_kind"].get<std::string>();
    if (s == "matching_beta")
      d.base_kind = BaseKind::MatchingBeta;
    else if (s == "mixture_beta")
      d.base_kind = BaseKind::MixtureBeta;
    else
      throw ConfigError("base_kind must be matching_beta or mixture_beta");
  }
  if (j.contains("kernel_kind")) {
    const auto s = j["kernel_kind"].get<std::string>();
    if (s == "indicator")
      d.kernel_kind = KernelKind::Indicator;
    else if (s == "decaying_gaussian")
      d.kernel_kind = KernelKind::DecayingGaussian;
    else
      throw ConfigError("kernel_kind must be indicator or decaying_gaussian");
  }
  if (j.contains("gamma1")) d.gamma1 = vec_from_json(j["gamma1"], "gamma1");
  if (j.contains("gamma2")) d.gamma2 = vec_from_json(j["gamma2"], "gamma2");
  if (j.contains("alpha")) d.alpha = vec_from_json(j["alpha"], "alpha");
  detail::read_opt(j, "mixture_weight", d.mixture_weight);
  if (j.contains("contaminant_shapes")) {
    const auto v = vec_from_json(j["contaminant_shapes"], "contaminant_shapes");
    if (v.size() != 2) throw ConfigError("contaminant_shapes must have two entries");
    d.contaminant_shapes = {v[0], v[1]};
  }
  if (j.contains("link")) {
    const auto v = vec_from_json(j["link"], "link");
    if (v.size() != 2) throw ConfigError("link must be [lo, hi]");
    d.link = {v[0], v[1]};
  }
  detail::read_opt(j, "decay_rate", d.decay_rate);
  detail::read_opt(j, "n", d.n);
  detail::read_opt(j, "p", d.p);
  detail::read_opt(j, "t", d.t);
  detail::read_opt(j, "seed", d.seed);
  d.validate();
  return d;
}

inline json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config file '" + path + "' is not valid JSON: " + e.what());
  }
}

}  // namespace ddreg
