#pragma once

#include <fstream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "renev/error.hpp"
#include "renev/montecarlo.hpp"
#include "renev/radio.hpp"
#include "renev/scenario.hpp"
#include "renev/slicing.hpp"

namespace renev {

/// Raised when the config file itself cannot be opened.
class MissingFileError : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

/// One scheme variant of a comparison run.
struct Variant {
  SliceScheme scheme;
  bool renev = false;
};

struct ProgramConfig {
  RunConfig run;
  std::vector<Variant> compare;  // `compare` sweeps these
  double validate_tolerance = 0.05;
  int validate_iterations = 200;
  int state_bucket = 5;  // RBs per level in the signalling chain
};

inline std::vector<double> default_loads() {
  std::vector<double> v;
  for (int mbps = 18; mbps <= 96; mbps += 6) v.push_back(mbps * 1e6);
  return v;
}

inline std::vector<Variant> default_variants() {
  return {{SliceScheme::nvs(), false},
          {SliceScheme::prr(0.5), false},
          {SliceScheme::prr(0.5), true},
          {SliceScheme::prr(1.0), false},
          {SliceScheme::prr(1.0), true}};
}

inline std::string to_string(TriggerMode t) { return t == TriggerMode::PerStation ? "per_station" : "per_admission"; }
inline std::string to_string(OverlapSource o) { return o == OverlapSource::Realized ? "realized" : "formula"; }

/// The full document with every key at its default; --set may only touch
/// keys that appear here.
inline nlohmann::json default_document() {
  ProgramConfig d;
  d.run.loads = default_loads();
  d.compare = default_variants();
  std::vector<double> mbps;
  for (double l : d.run.loads) mbps.push_back(l / 1e6);
  auto variants = nlohmann::json::array();
  for (const auto& v : d.compare) variants.push_back({{"scheme", v.scheme.name()}, {"renev", v.renev}});
  return {{"scenario", d.run.scenario},
          {"channel", d.run.channel},
          {"mcs_table", to_json(d.run.mcs)},
          {"scheme", d.run.scheme.name()},
          {"slices", d.run.scheme.slice_count},
          {"renev", d.run.renev},
          {"donor_floor", d.run.renev_params.donor_floor},
          {"trigger", to_string(d.run.trigger)},
          {"partial_retry", d.run.partial_retry},
          {"loads_mbps", mbps},
          {"iterations", d.run.iterations},
          {"seed", d.run.seed},
          {"jobs", d.run.jobs},
          {"check_invariants", d.run.check_invariants},
          {"analysis",
           {{"points", d.run.analysis_points},
            {"overlap", to_string(d.run.overlap_source)},
            {"state_bucket", d.state_bucket}}},
          {"compare", variants},
          {"validate", {{"tolerance", d.validate_tolerance}, {"iterations", d.validate_iterations}}}};
}

namespace detail {

/// Recursively overlays `src` on `dst`; object keys must exist in `dst`.
inline void overlay(nlohmann::json& dst, const nlohmann::json& src, const std::string& path) {
  if (!src.is_object() || !dst.is_object()) {
    dst = src;
    return;
  }
  for (const auto& [k, v] : src.items()) {
    const std::string p = path + "/" + k;
    if (!dst.contains(k)) throw ConfigError("config: unknown key '" + p + "'");
    // mcs_table and compare are replaced whole.
    if (p == "/mcs_table" || p == "/compare" || p == "/loads_mbps") dst[k] = v;
    else overlay(dst[k], v, p);
  }
}

inline std::string trigger_key(const std::string& s) {
  if (s == "per_station" || s == "per_admission") return s;
  throw ConfigError("config: trigger must be per_station or per_admission, got '" + s + "'");
}

}  // namespace detail

/// Applies one `key=value` override; dotted keys address nested objects.
/// The value is parsed as JSON and falls back to a plain string.
inline void apply_override(nlohmann::json& doc, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) throw ConfigError("config: override '" + assignment + "' is not key=value");
  const std::string key = assignment.substr(0, eq);
  const std::string text = assignment.substr(eq + 1);
  nlohmann::json* node = &doc;
  std::stringstream ss(key);
  std::string part;
  while (std::getline(ss, part, '.')) {
    if (!node->is_object() || !node->contains(part)) throw ConfigError("config: unknown key '" + key + "'");
    node = &(*node)[part];
  }
  nlohmann::json value = nlohmann::json::parse(text, nullptr, false);
  if (value.is_discarded()) value = text;
  *node = value;
}

inline SliceScheme scheme_from(const nlohmann::json& j, int slices) {
  if (!j.is_string()) throw ConfigError("config: scheme must be a string such as \"nvs\" or \"prr:1\"");
  return parse_slice_scheme(j.get<std::string>(), slices);
}

inline ProgramConfig config_from_document(const nlohmann::json& doc) {
  ProgramConfig c;
  try {
    auto& r = c.run;
    r.scenario = ScenarioConfig{};
    from_json(doc.at("scenario"), r.scenario);
    from_json(doc.at("channel"), r.channel);
    r.mcs = mcs_table_from_json(doc.at("mcs_table"));
    const int slices = doc.at("slices").get<int>();
    r.scheme = scheme_from(doc.at("scheme"), slices);
    r.renev = doc.at("renev").get<bool>();
    r.renev_params.donor_floor = doc.at("donor_floor").get<int>();
    r.trigger = detail::trigger_key(doc.at("trigger").get<std::string>()) == "per_station" ? TriggerMode::PerStation
                                                                                         : TriggerMode::PerAdmission;
    r.partial_retry = doc.at("partial_retry").get<bool>();
    r.loads.clear();
    for (const auto& l : doc.at("loads_mbps")) r.loads.push_back(l.get<double>() * 1e6);
    r.iterations = doc.at("iterations").get<int>();
    r.seed = doc.at("seed").get<std::uint64_t>();
    r.jobs = doc.at("jobs").get<int>();
    r.check_invariants = doc.at("check_invariants").get<bool>();
    r.analysis_points = doc.at("analysis").at("points").get<int>();
    c.state_bucket = doc.at("analysis").at("state_bucket").get<int>();
    const auto ov = doc.at("analysis").at("overlap").get<std::string>();
    if (ov == "realized") r.overlap_source = OverlapSource::Realized;
    else if (ov == "formula") r.overlap_source = OverlapSource::Formula;
    else throw ConfigError("config: analysis.overlap must be realized or formula, got '" + ov + "'");
    c.compare.clear();
    for (const auto& v : doc.at("compare"))
      c.compare.push_back({scheme_from(v.at("scheme"), slices), v.at("renev").get<bool>()});
    c.validate_tolerance = doc.at("validate").at("tolerance").get<double>();
    c.validate_iterations = doc.at("validate").at("iterations").get<int>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  c.run.validate();
  if (c.state_bucket < 1) throw ConfigError("config: analysis.state_bucket must be >= 1");
  if (c.validate_iterations < 1) throw ConfigError("config: validate.iterations must be >= 1");
  if (!(c.validate_tolerance > 0.0)) throw ConfigError("config: validate.tolerance must be > 0");
  return c;
}

/// Defaults, then the file (if any), then each override in order.
inline ProgramConfig load_config(const std::string& path, const std::vector<std::string>& overrides,
                                 nlohmann::json* resolved = nullptr) {
  nlohmann::json doc = default_document();
  if (!path.empty()) {
    std::ifstream in(path);
    if (!in) throw MissingFileError("config: cannot open '" + path + "'");
    const auto file = nlohmann::json::parse(in, nullptr, false);
    if (file.is_discarded()) throw ConfigError("config: '" + path + "' is not valid JSON");
    if (!file.is_object()) throw ConfigError("config: top level must be an object");
    detail::overlay(doc, file, "");
  }
  for (const auto& o : overrides) apply_override(doc, o);
  auto cfg = config_from_document(doc);
  if (resolved) *resolved = doc;
  return cfg;
}

}  // namespace renev
