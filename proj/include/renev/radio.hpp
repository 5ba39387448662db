#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "renev/error.hpp"
#include "renev/log.hpp"
#include "renev/scenario.hpp"

namespace renev {

/// Distance law `intercept + slope * log10(R[km])` in dB.
struct PathLossLaw {
  double intercept_db = 0.0;
  double slope_db = 0.0;

  double loss_db(double meters) const { return intercept_db + slope_db * std::log10(meters / 1000.0); }
};

inline constexpr double kRbBandwidthHz = 180e3;
inline constexpr double kThermalNoiseDbmPerHz = -174.0;

struct ChannelModel {
  PathLossLaw macro_law{140.7, 36.7};
  PathLossLaw small_law{128.1, 37.6};
  double macro_shadow_sigma_db = 8.0;
  double small_shadow_sigma_db = 10.0;
  /// Noise power over one RB, dBm.
  double noise_dbm = kThermalNoiseDbmPerHz + 9.0 + 10.0 * std::log10(kRbBandwidthHz);

  const PathLossLaw& law(Tier t) const { return t == Tier::Macro ? macro_law : small_law; }
  double shadow_sigma(Tier t) const {
    return t == Tier::Macro ? macro_shadow_sigma_db : small_shadow_sigma_db;
  }

  void validate() const {
    if (!(macro_shadow_sigma_db >= 0.0) || !(small_shadow_sigma_db >= 0.0))
      throw ConfigError("channel: shadowing std must be >= 0");
    if (!(macro_law.slope_db > 0.0) || !(small_law.slope_db > 0.0))
      throw ConfigError("channel: path-loss slope must be > 0");
  }
};

/// Received SNR in dB; `shadow_db` is the slow-fading loss drawn for this link.
inline double compute_snr(const BaseStation& bs, Point position, double shadow_db,
                          const ChannelModel& channel) {
  double d = distance(bs.position, position);
  if (d < 1.0) {
    log::debug("compute_snr: distance ", d, " m to BS ", bs.id, " clamped to 1 m");
    d = 1.0;
  }
  return bs.tx_power_per_rb - channel.law(bs.tier).loss_db(d) - shadow_db - channel.noise_dbm;
}

/// Resource elements in one RB over a 1 ms subframe (12 subcarriers x 14 symbols).
inline constexpr double kResourceElementsPerRb = 168.0;
inline constexpr double kSubframeSeconds = 1e-3;

struct McsEntry {
  std::string name;
  int bits_per_symbol = 2;
  int code_rate_num = 1;
  int code_rate_den = 8;
  double snr_min = 0.0;  // dB, inclusive
  double snr_max = std::numeric_limits<double>::infinity();  // dB, exclusive
  double rate_per_rb = 0.0;  // bit/s

  double code_rate() const { return static_cast<double>(code_rate_num) / code_rate_den; }
};

inline double nominal_rate_per_rb(int bits_per_symbol, double code_rate) {
  return bits_per_symbol * code_rate * kResourceElementsPerRb / kSubframeSeconds;
}

class McsTable {
 public:
  McsTable() = default;

  /// Builds the table from entries carrying name, modulation, code rate and
  /// lower threshold; upper thresholds and rates are derived.
  explicit McsTable(std::vector<McsEntry> entries) : entries_(std::move(entries)) {
    if (entries_.empty()) throw ConfigError("mcs table: no entries");
    for (std::size_t k = 0; k < entries_.size(); ++k) {
      auto& e = entries_[k];
      if (e.bits_per_symbol <= 0 || e.code_rate_num <= 0 || e.code_rate_den <= 0 ||
          e.code_rate_num > e.code_rate_den)
        throw ConfigError("mcs table: entry '" + e.name + "' has an invalid modulation or code rate");
      if (!std::isfinite(e.snr_min))
        throw ConfigError("mcs table: entry '" + e.name + "' has a non-finite snr_min");
      e.rate_per_rb = nominal_rate_per_rb(e.bits_per_symbol, e.code_rate());
      if (k > 0) {
        const auto& prev = entries_[k - 1];
        if (!(e.snr_min > prev.snr_min))
          throw ConfigError("mcs table: thresholds not increasing at entry '" + e.name + "'");
        if (!(e.rate_per_rb > prev.rate_per_rb))
          throw ConfigError("mcs table: rate not increasing at entry '" + e.name + "'");
      }
    }
    for (std::size_t k = 0; k + 1 < entries_.size(); ++k) entries_[k].snr_max = entries_[k + 1].snr_min;
    entries_.back().snr_max = std::numeric_limits<double>::infinity();
  }

  const std::vector<McsEntry>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }
  const McsEntry& operator[](std::size_t k) const { return entries_[k]; }
  double lowest_threshold() const { return entries_.front().snr_min; }

  /// Index of the entry whose [snr_min, snr_max) holds `snr`; nullopt is outage.
  std::optional<std::size_t> index_for(double snr) const {
    if (std::isnan(snr) || snr < entries_.front().snr_min) return std::nullopt;
    auto it = std::upper_bound(entries_.begin(), entries_.end(), snr,
                               [](double v, const McsEntry& e) { return v < e.snr_min; });
    return static_cast<std::size_t>(std::distance(entries_.begin(), it)) - 1;
  }

 private:
  std::vector<McsEntry> entries_;
};

/// The thirteen LTE-A downlink schemes with switching points spread evenly
/// between -6.7 dB (QPSK 1/8) and 17.5 dB (64QAM 4/5).
inline McsTable default_mcs_table() {
  struct Row {
    const char* name;
    int bits, num, den;
  };
  static constexpr Row rows[] = {
      {"QPSK-1/8", 2, 1, 8},    {"QPSK-1/5", 2, 1, 5},    {"QPSK-1/4", 2, 1, 4},
      {"QPSK-1/3", 2, 1, 3},    {"QPSK-1/2", 2, 1, 2},    {"QPSK-2/3", 2, 2, 3},
      {"QPSK-3/4", 2, 3, 4},    {"16QAM-1/2", 4, 1, 2},   {"16QAM-2/3", 4, 2, 3},
      {"16QAM-3/4", 4, 3, 4},   {"64QAM-2/3", 6, 2, 3},   {"64QAM-3/4", 6, 3, 4},
      {"64QAM-4/5", 6, 4, 5},
  };
  constexpr double lo = -6.7, hi = 17.5;
  constexpr std::size_t n = std::size(rows);
  std::vector<McsEntry> entries;
  for (std::size_t k = 0; k < n; ++k) {
    McsEntry e;
    e.name = rows[k].name;
    e.bits_per_symbol = rows[k].bits;
    e.code_rate_num = rows[k].num;
    e.code_rate_den = rows[k].den;
    e.snr_min = lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(n - 1);
    entries.push_back(e);
  }
  return McsTable(std::move(entries));
}

/// Selected entry for `snr`, or nullopt when the user is in outage.
inline std::optional<McsEntry> select_mcs(double snr, const McsTable& table) {
  if (auto k = table.index_for(snr)) return table[*k];
  return std::nullopt;
}

/// RBs needed to carry `demand` at `rate_per_rb`.
inline int rb_demand(double demand, double rate_per_rb) {
  if (demand <= 0.0) return 0;
  if (!(rate_per_rb > 0.0)) throw ContractViolation("rb_demand: rate_per_rb must be > 0");
  const double ratio = demand / rate_per_rb;
  // Absorb representation error so exact multiples do not round up.
  return static_cast<int>(std::ceil(ratio - 1e-9 * ratio));
}

inline int rb_demand(const UserEquipment& user, const McsEntry& serving) {
  return rb_demand(user.demand, serving.rate_per_rb);
}

// JSON ----------------------------------------------------------------------

namespace detail {

inline void parse_code_rate(const nlohmann::json& j, McsEntry& e) {
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    const auto slash = s.find('/');
    if (slash == std::string::npos) throw ConfigError("mcs table: code_rate '" + s + "' is not a/b");
    try {
      e.code_rate_num = std::stoi(s.substr(0, slash));
      e.code_rate_den = std::stoi(s.substr(slash + 1));
    } catch (const std::exception&) {
      throw ConfigError("mcs table: code_rate '" + s + "' is not a/b");
    }
  } else if (j.is_array() && j.size() == 2) {
    e.code_rate_num = j[0].get<int>();
    e.code_rate_den = j[1].get<int>();
  } else {
    throw ConfigError("mcs table: code_rate must be \"a/b\" or [a, b]");
  }
}

}  // namespace detail

inline McsTable mcs_table_from_json(const nlohmann::json& j) {
  if (!j.is_array()) throw ConfigError("mcs table: expected an array of entries");
  std::vector<McsEntry> entries;
  for (const auto& row : j) {
    try {
      McsEntry e;
      e.name = row.at("name").get<std::string>();
      e.bits_per_symbol = row.at("bits_per_symbol").get<int>();
      detail::parse_code_rate(row.at("code_rate"), e);
      e.snr_min = row.at("snr_min").get<double>();
      entries.push_back(e);
    } catch (const nlohmann::json::exception& ex) {
      throw ConfigError(std::string("mcs table: malformed entry: ") + ex.what());
    }
  }
  return McsTable(std::move(entries));
}

inline nlohmann::json to_json(const McsTable& table) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& e : table.entries())
    out.push_back({{"name", e.name},
                   {"bits_per_symbol", e.bits_per_symbol},
                   {"code_rate", std::to_string(e.code_rate_num) + "/" + std::to_string(e.code_rate_den)},
                   {"snr_min", e.snr_min}});
  return out;
}

inline void to_json(nlohmann::json& j, const ChannelModel& c) {
  j = nlohmann::json{{"macro_path_loss", {c.macro_law.intercept_db, c.macro_law.slope_db}},
                     {"small_path_loss", {c.small_law.intercept_db, c.small_law.slope_db}},
                     {"macro_shadow_sigma_db", c.macro_shadow_sigma_db},
                     {"small_shadow_sigma_db", c.small_shadow_sigma_db},
                     {"noise_dbm", c.noise_dbm}};
}

inline void from_json(const nlohmann::json& j, ChannelModel& c) {
  if (!j.is_object()) throw ConfigError("channel: expected a JSON object");
  for (const auto& [key, value] : j.items()) {
    try {
      if (key == "macro_path_loss") c.macro_law = {value.at(0).get<double>(), value.at(1).get<double>()};
      else if (key == "small_path_loss") c.small_law = {value.at(0).get<double>(), value.at(1).get<double>()};
      else if (key == "macro_shadow_sigma_db") c.macro_shadow_sigma_db = value.get<double>();
      else if (key == "small_shadow_sigma_db") c.small_shadow_sigma_db = value.get<double>();
      else if (key == "noise_dbm") c.noise_dbm = value.get<double>();
      else throw ConfigError("channel: unknown key '" + key + "'");
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError("channel: bad value for '" + key + "': " + e.what());
    }
  }
}

}  // namespace renev
