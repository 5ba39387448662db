#pragma once

#include <cmath>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "renev/error.hpp"
#include "renev/ledger.hpp"
#include "renev/scenario.hpp"

namespace renev {

enum class SliceKind { Nvs, Prr };

struct SliceScheme {
  SliceKind kind = SliceKind::Prr;
  int slice_count = 2;
  std::vector<double> shares;   // NVS; empty means equal
  double shared_fraction = 1.0; // PRR p; 1.0 = everything shared

  static SliceScheme nvs(int slices = 2) { return {SliceKind::Nvs, slices, {}, 0.0}; }
  static SliceScheme prr(double p, int slices = 2) { return {SliceKind::Prr, slices, {}, p}; }

  /// Number of ledger partitions: one per slice plus the shared pool.
  int partition_count() const { return slice_count + 1; }
  int shared_partition() const { return slice_count; }

  std::vector<double> effective_shares() const {
    if (shares.empty()) return std::vector<double>(slice_count, 1.0 / slice_count);
    return shares;
  }

  void validate() const {
    if (slice_count < 1) throw ConfigError("slicing: slice_count must be >= 1");
    if (kind == SliceKind::Nvs && !shares.empty()) {
      if (static_cast<int>(shares.size()) != slice_count)
        throw ConfigError("slicing: NVS needs one share per slice");
      double sum = 0.0;
      for (double s : shares) {
        if (!(s >= 0.0)) throw ConfigError("slicing: NVS shares must be >= 0");
        sum += s;
      }
      if (std::abs(sum - 1.0) > 1e-9) throw ConfigError("slicing: NVS shares must sum to 1");
    }
    if (kind == SliceKind::Prr && !(shared_fraction >= 0.0 && shared_fraction <= 1.0))
      throw ConfigError("slicing: PRR shared fraction must lie in [0,1]");
  }

  std::string name() const {
    if (kind == SliceKind::Nvs) return "nvs";
    char buf[32];
    std::snprintf(buf, sizeof buf, "prr:%g", shared_fraction);
    return buf;
  }
};

/// Parses `nvs` or `prr:<shared-fraction>`.
inline SliceScheme parse_slice_scheme(const std::string& text, int slices = 2) {
  SliceScheme s;
  if (text == "nvs") {
    s = SliceScheme::nvs(slices);
  } else if (text.rfind("prr:", 0) == 0) {
    const auto arg = text.substr(4);
    std::size_t used = 0;
    double p = 0.0;
    try {
      p = std::stod(arg, &used);
    } catch (const std::exception&) {
      throw ConfigError("slicing: cannot parse PRR fraction '" + arg + "'");
    }
    if (used != arg.size()) throw ConfigError("slicing: cannot parse PRR fraction '" + arg + "'");
    s = SliceScheme::prr(p, slices);
  } else {
    throw ConfigError("slicing: scheme must be 'nvs' or 'prr:<fraction>', got '" + text + "'");
  }
  s.validate();
  return s;
}

/// Splits every station's initial RBs into slice budgets and the shared pool.
inline void apply_scheme(ResourceLedger& ledger, const SliceScheme& scheme) {
  scheme.validate();
  for (int i = 0; i < ledger.station_count(); ++i) {
    auto& st = ledger.station(i);
    const int total = ledger.initial_count(i);
    st.partitions.assign(scheme.partition_count(), Partition{});
    std::vector<int> reserved;
    int shared = 0;
    if (scheme.kind == SliceKind::Nvs) {
      reserved = detail::largest_remainder(total, scheme.effective_shares());
    } else {
      shared = static_cast<int>(std::lround(scheme.shared_fraction * total));
      reserved = detail::largest_remainder(total - shared, std::vector<double>(scheme.slice_count, 1.0));
    }
    for (int k = 0; k < scheme.slice_count; ++k) st.partitions[k].budget = reserved[k];
    st.partitions[scheme.shared_partition()].budget = shared;
  }
}

/// Partition that borrowed RBs are credited to for a user of `slice_id`.
inline int credit_partition(const SliceScheme& scheme, int slice_id) {
  return scheme.kind == SliceKind::Nvs ? slice_id : scheme.shared_partition();
}

struct Admission {
  int user = 0;
  int station = 0;
  int slice = 0;
  Grant grant;
};

enum class RejectCause { SliceExhausted, ExceedsStationBudget };

struct Rejection {
  int user = 0;
  int station = 0;
  int slice = 0;
  int demand_rbs = 0;
  int accessible_free = 0;  // RBs the user's slice could reach
  RejectCause cause = RejectCause::SliceExhausted;

  int deficit() const { return demand_rbs - accessible_free; }
};

using AdmitResult = std::variant<Admission, Rejection>;

/// RBs a user of `slice_id` could be granted right now at `station`.
inline int accessible_free(const ResourceLedger& ledger, int station, int slice_id, const SliceScheme& scheme) {
  const auto& parts = ledger.station(station).partitions;
  const int own = parts.at(slice_id).free();
  return scheme.kind == SliceKind::Nvs ? own : own + parts.at(scheme.shared_partition()).free();
}

/// Admits a user in full or not at all.
inline AdmitResult admit(ResourceLedger& ledger, int station, int user_id, int demand_rbs, int slice_id,
                         const SliceScheme& scheme) {
  if (slice_id < 0 || slice_id >= scheme.slice_count)
    throw ContractViolation("admit: unknown slice id " + std::to_string(slice_id));
  if (demand_rbs < 1) throw ContractViolation("admit: demand_rbs must be >= 1");
  const auto& parts = ledger.station(station).partitions;
  if (static_cast<int>(parts.size()) != scheme.partition_count())
    throw ContractViolation("admit: ledger partitions do not match the slice scheme");

  const int avail = accessible_free(ledger, station, slice_id, scheme);
  if (avail < demand_rbs) {
    int total_budget = 0;
    for (const auto& p : parts) total_budget += p.budget;
    Rejection r{user_id, station, slice_id, demand_rbs, avail,
                demand_rbs > total_budget ? RejectCause::ExceedsStationBudget : RejectCause::SliceExhausted};
    return r;
  }
  std::vector<std::pair<int, int>> take;
  const int from_reserved = std::min(demand_rbs, parts[slice_id].free());
  if (from_reserved > 0) take.emplace_back(slice_id, from_reserved);
  if (demand_rbs > from_reserved) take.emplace_back(scheme.shared_partition(), demand_rbs - from_reserved);
  return Admission{user_id, station, slice_id, ledger.allocate(station, take)};
}

}  // namespace renev
