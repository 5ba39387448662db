#pragma once

#include <algorithm>
#include <optional>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "renev/error.hpp"
#include "renev/ledger.hpp"
#include "renev/signaling.hpp"

namespace renev {

struct RenevParams {
  int donor_floor = 0;  // spare a donor must keep after giving
};

struct DetectResult {
  std::optional<int> donor;
  bool polled_macro = false;
  std::vector<int> polled;  // in poll order
};

enum class RenevFailure { NoDonor };

struct RenevOutcome {
  std::optional<TransferRecord> record;
  DetectResult detection;

  bool succeeded() const { return record.has_value(); }
};

namespace detail {

inline void poll(const ResourceLedger& ledger, int requester, int target, int deficit, MessageLog& log) {
  const int spare = ledger.spare_for(target, requester);
  const int owned = ledger.initial_count(target);
  X2Payload req;
  req.requested_rbs = deficit;
  log.append({X2MessageKind::ResourceStatusRequest, requester, target, req});
  X2Payload resp;
  resp.rb_usage_percent = owned > 0 ? 100.0 * ledger.used_count(target) / owned : 0.0;
  resp.spare_rbs = spare;
  log.append({X2MessageKind::ResourceStatusResponse, target, requester, resp});
  X2Payload load;
  load.spare_rbs = spare;
  load.rb_usage_percent = resp.rb_usage_percent;
  log.append({X2MessageKind::LoadInformation, target, requester, load});
}

}  // namespace detail

/// Polls every other small cell nearest first, then the macro if none of
/// them qualifies. Candidates need spare - deficit >= donor_floor; the best
/// has the most spare, then the shortest distance, then the lowest id.
inline DetectResult detect_donor(ResourceLedger& ledger, int requester, int deficit, MessageLog& log,
                                 const RenevParams& params = {}) {
  if (ledger.station(requester).tier != Tier::Small)
    throw ContractViolation("detect_donor: requester must be a small cell");
  if (deficit < 1) throw ContractViolation("detect_donor: deficit must be >= 1");

  DetectResult out;
  std::vector<int> neighbours;
  for (int j = 1; j < ledger.station_count(); ++j)
    if (j != requester) neighbours.push_back(j);
  std::stable_sort(neighbours.begin(), neighbours.end(), [&](int a, int b) {
    const double da = ledger.distance_between(requester, a), db = ledger.distance_between(requester, b);
    return da != db ? da < db : a < b;
  });

  ledger.set_role(requester, Role::Requesting);
  auto better = [&](int cand, int spare, int best, int best_spare) {
    if (best < 0) return true;
    if (spare != best_spare) return spare > best_spare;
    const double dc = ledger.distance_between(requester, cand), db = ledger.distance_between(requester, best);
    if (dc != db) return dc < db;
    return cand < best;
  };
  int best = -1, best_spare = 0;
  for (int j : neighbours) {
    ledger.set_role(j, Role::Requested);
    detail::poll(ledger, requester, j, deficit, log);
    out.polled.push_back(j);
    const int spare = ledger.spare_for(j, requester);
    if (spare - deficit >= params.donor_floor && better(j, spare, best, best_spare)) {
      best = j;
      best_spare = spare;
    }
  }
  if (best < 0) {
    out.polled_macro = true;
    ledger.set_role(0, Role::Requested);
    detail::poll(ledger, requester, 0, deficit, log);
    out.polled.push_back(0);
    if (ledger.spare_for(0, requester) - deficit >= params.donor_floor) best = 0;
  }
  if (best >= 0) out.donor = best;
  return out;
}

/// Hands `credits` worth of RBs from donor to recipient and logs messages 4-5.
inline TransferRecord transfer(ResourceLedger& ledger, int donor, int recipient,
                               const std::vector<std::pair<int, int>>& credits, MessageLog& log) {
  int count = 0;
  for (auto [p, c] : credits) count += c;
  X2Payload req;
  req.requested_rbs = count;
  log.append({X2MessageKind::MetasignallingInformationRequest, recipient, donor, req});
  auto rec = ledger.lend(donor, recipient, credits);
  X2Payload ack;
  ack.requested_rbs = count;
  ack.admitted = rec.rb_ids;
  log.append({X2MessageKind::MetasignallingInformationAcknowledge, donor, recipient, ack});
  return rec;
}

/// One full negotiation for `requester`: detection, then transfer on
/// success. On failure nothing but roles and the message log changes.
inline RenevOutcome trigger_renev(ResourceLedger& ledger, int requester,
                                  const std::vector<std::pair<int, int>>& credits, MessageLog& log,
                                  const RenevParams& params = {}) {
  int deficit = 0;
  for (auto [p, c] : credits) deficit += c;
  RenevOutcome out;
  out.detection = detect_donor(ledger, requester, deficit, log, params);
  if (out.detection.donor) out.record = transfer(ledger, *out.detection.donor, requester, credits, log);
  log.record_round({requester, out.detection.polled_macro, out.succeeded()});
  for (int j : out.detection.polled) ledger.refresh_role(j);
  ledger.refresh_role(requester);
  return out;
}

inline RenevOutcome trigger_renev(ResourceLedger& ledger, int requester, int deficit, int credit_partition,
                                  MessageLog& log, const RenevParams& params = {}) {
  return trigger_renev(ledger, requester, {{credit_partition, deficit}}, log, params);
}

inline nlohmann::json to_json(const TransferRecord& r) {
  return {{"donor", r.donor},
          {"recipient", r.recipient},
          {"band", r.band == Band::Macro ? "macro" : "small"},
          {"ids", r.rb_ids},
          {"returned", r.returned_ids},
          {"epoch", r.event_index},
          {"reverted", r.reverted}};
}

inline nlohmann::json transfer_trace(const ResourceLedger& ledger) {
  auto out = nlohmann::json::array();
  for (const auto& r : ledger.records()) out.push_back(to_json(r));
  return out;
}

}  // namespace renev
