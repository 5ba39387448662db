#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "renev/error.hpp"
#include "renev/scenario.hpp"

namespace renev {

/// Carrier band an RB id belongs to.
enum class Band : int { Macro = 0, Small = 1 };

struct RbId {
  Band band = Band::Small;
  int index = 0;

  friend bool operator==(const RbId&, const RbId&) = default;
  friend auto operator<=>(const RbId&, const RbId&) = default;
};

enum class Role { Idle, Requesting, Requested, Donor, Recipient };

inline constexpr const char* to_string(Role r) {
  switch (r) {
    case Role::Idle: return "idle";
    case Role::Requesting: return "requesting";
    case Role::Requested: return "requested";
    case Role::Donor: return "donor";
    case Role::Recipient: return "recipient";
  }
  return "?";
}

/// A counted budget: a slice's reserved part or the shared pool.
struct Partition {
  int budget = 0;
  int used = 0;
  int free() const { return budget - used; }
};

struct TransferRecord {
  int donor = 0;
  int recipient = 0;
  Band band = Band::Small;
  std::vector<int> rb_ids;       // ids handed over, in the donor's band
  std::vector<int> returned_ids; // subset already given back
  std::vector<int> credited;     // recipient partition grown for each id, parallel to rb_ids
  std::uint64_t event_index = 0;
  bool reverted = false;

  int active_count() const { return static_cast<int>(rb_ids.size() - returned_ids.size()); }
};

/// Per-band RB bookkeeping of one station. Arrays are indexed by RB id.
struct BandState {
  std::vector<char> owned;
  std::vector<char> in_use;
  std::vector<std::vector<int>> lent_to;  // recipients holding the id (donor side)
  std::vector<int> lent_partition;        // partition debited for the id, -1 if not lent
  std::vector<int> borrowed_from;         // donor id, -1 if not borrowed (recipient side)

  explicit BandState(int size = 0)
      : owned(size, 0), in_use(size, 0), lent_to(size), lent_partition(size, -1), borrowed_from(size, -1) {}

  int size() const { return static_cast<int>(owned.size()); }
};

struct StationLedger {
  int id = 0;
  Tier tier = Tier::Small;
  std::array<BandState, 2> bands;
  std::vector<Partition> partitions;  // slices' reserved parts, then the shared pool
  Role role = Role::Idle;

  BandState& band(Band b) { return bands[static_cast<int>(b)]; }
  const BandState& band(Band b) const { return bands[static_cast<int>(b)]; }
  Band home_band() const { return tier == Tier::Macro ? Band::Macro : Band::Small; }
};

/// A set of RBs granted to one user.
struct Grant {
  int handle = -1;  // ledger-side key; ids may move when borrowed RBs are returned
  int station = 0;
  std::vector<std::pair<int, int>> parts;  // (partition, count)
  std::vector<RbId> ids;

  int count() const { return static_cast<int>(ids.size()); }
};

/// RB accounting of every station of one deployment: ownership, use, and
/// the lent/borrowed relation created by transfers.
class ResourceLedger {
 public:
  ResourceLedger() = default;

  /// Macro owns the whole macro band; small cells split the small band in
  /// contiguous id blocks sized by their initial RB counts. `partitions`
  /// gives the number of budget partitions per station (all start in the
  /// last one until a slice scheme redistributes them).
  explicit ResourceLedger(const Deployment& dep, int partitions = 1) {
    if (partitions < 1) throw ContractViolation("ResourceLedger: need at least one partition");
    const int band_size = dep.config.rb_count_per_tier;
    const int n = static_cast<int>(dep.stations.size());
    stations_.reserve(n);
    int next_small = 0;
    for (const auto& bs : dep.stations) {
      StationLedger s;
      s.id = bs.id;
      s.tier = bs.tier;
      s.bands = {BandState(band_size), BandState(band_size)};
      auto& home = s.band(s.home_band());
      if (bs.tier == Tier::Macro) {
        for (int k = 0; k < std::min(bs.initial_rb_count, band_size); ++k) home.owned[k] = 1;
      } else {
        for (int k = 0; k < bs.initial_rb_count; ++k) {
          if (next_small >= band_size) throw ContractViolation("ResourceLedger: small band over-allocated");
          home.owned[next_small++] = 1;
        }
      }
      s.partitions.assign(partitions, Partition{});
      s.partitions.back().budget = bs.initial_rb_count;
      stations_.push_back(std::move(s));
    }
    overlap_.assign(n, std::vector<char>(n, 0));
    positions_.reserve(n);
    for (const auto& bs : dep.stations) positions_.push_back(bs.position);
    for (int i = 1; i < n; ++i)
      for (int j = 1; j < n; ++j)
        overlap_[i][j] = (i != j && overlaps(dep.stations[i], dep.stations[j])) ? 1 : 0;
    small_band_total_ = next_small;
  }

  int station_count() const { return static_cast<int>(stations_.size()); }
  StationLedger& station(int i) { return stations_.at(i); }
  const StationLedger& station(int i) const { return stations_.at(i); }
  bool overlapping(int a, int b) const { return overlap_[a][b] != 0; }
  double distance_between(int a, int b) const { return distance(positions_[a], positions_[b]); }
  int small_band_total() const { return small_band_total_; }

  // Derived counts ------------------------------------------------------------

  /// RB_i: ids initially owned.
  int initial_count(int i) const { return count_if_band(i, station(i).home_band(), [](const BandState& b, int k) {
    return b.owned[k] != 0;
  }); }

  /// u_i: ids in use by the station's users.
  int used_count(int i) const {
    return count_all(i, [](const BandState& b, int k) { return b.in_use[k] != 0; });
  }

  /// Distinct own ids currently lent out.
  int lent_count(int i) const {
    return count_all(i, [](const BandState& b, int k) { return !b.lent_to[k].empty(); });
  }

  int borrowed_count(int i) const {
    return count_all(i, [](const BandState& b, int k) { return b.borrowed_from[k] >= 0; });
  }

  int borrowed_count_from_tier(int i, Tier donor_tier) const {
    const Band b = donor_tier == Tier::Macro ? Band::Macro : Band::Small;
    return count_if_band(i, b, [](const BandState& s, int k) { return s.borrowed_from[k] >= 0; });
  }

  /// r_i = RB_i - u_i - lent + borrowed.
  int available(int i) const {
    return initial_count(i) - used_count(i) - lent_count(i) + borrowed_count(i);
  }

  /// Own ids that are neither in use nor lent: what a donor can give away.
  int own_spare(int i) const {
    const auto& s = station(i);
    const auto& b = s.band(s.home_band());
    int n = 0;
    for (int k = 0; k < b.size(); ++k)
      if (b.owned[k] && !b.in_use[k] && b.lent_to[k].empty()) ++n;
    return n;
  }

  /// Macro ids that can be lent to `recipient`: free at the macro and not
  /// held by the recipient or by any small cell overlapping it.
  std::vector<int> macro_lendable_ids(int recipient) const {
    const auto& b = station(0).band(Band::Macro);
    std::vector<int> reuse, fresh;
    for (int k = 0; k < b.size(); ++k) {
      if (!b.owned[k] || b.in_use[k]) continue;
      bool blocked = false;
      for (int holder : b.lent_to[k])
        if (holder == recipient || overlapping(holder, recipient)) {
          blocked = true;
          break;
        }
      if (blocked) continue;
      (b.lent_to[k].empty() ? fresh : reuse).push_back(k);
    }
    // Ids already out with non-overlapping cells go first so the macro keeps
    // as much as possible for itself.
    reuse.insert(reuse.end(), fresh.begin(), fresh.end());
    return reuse;
  }

  /// Spare a donor reports to `requester`.
  int spare_for(int donor, int requester) const {
    if (station(donor).tier == Tier::Macro) return static_cast<int>(macro_lendable_ids(requester).size());
    return own_spare(donor);
  }

  /// Ids the station may serve its users with and that are idle.
  std::vector<RbId> free_usable_ids(int i) const {
    const auto& s = station(i);
    std::vector<RbId> own, borrowed;
    for (int bi = 0; bi < 2; ++bi) {
      const auto& b = s.bands[bi];
      for (int k = 0; k < b.size(); ++k) {
        if (b.in_use[k]) continue;
        if (b.owned[k] && b.lent_to[k].empty()) own.push_back({static_cast<Band>(bi), k});
        else if (b.borrowed_from[k] >= 0) borrowed.push_back({static_cast<Band>(bi), k});
      }
    }
    own.insert(own.end(), borrowed.begin(), borrowed.end());
    return own;
  }

  int usable_count(int i) const {
    return count_all(i, [](const BandState& b, int k) {
      return (b.owned[k] && b.lent_to[k].empty()) || b.borrowed_from[k] >= 0;
    });
  }

  // Grants --------------------------------------------------------------------

  /// Marks `parts` worth of idle usable ids as in use and charges the
  /// partitions. Caller has checked the budgets.
  Grant allocate(int i, const std::vector<std::pair<int, int>>& parts) {
    auto& s = station(i);
    int total = 0;
    for (auto [p, c] : parts) {
      if (c < 0 || s.partitions.at(p).free() < c)
        throw ContractViolation("allocate: partition " + std::to_string(p) + " cannot cover " +
                                std::to_string(c) + " RBs at station " + std::to_string(i));
      total += c;
    }
    auto ids = free_usable_ids(i);
    if (static_cast<int>(ids.size()) < total)
      throw ContractViolation("allocate: station " + std::to_string(i) + " has fewer idle ids than budgeted");
    ids.resize(total);
    for (auto id : ids) s.band(id.band).in_use[id.index] = 1;
    for (auto [p, c] : parts) s.partitions[p].used += c;
    const int handle = next_grant_++;
    live_grants_[handle] = ids;
    grant_owner_[handle] = i;
    return Grant{handle, i, parts, std::move(ids)};
  }

  void release(const Grant& g) {
    auto it = live_grants_.find(g.handle);
    if (it == live_grants_.end()) throw ContractViolation("release: unknown or already released grant");
    auto& s = station(g.station);
    for (auto id : it->second) s.band(id.band).in_use[id.index] = 0;
    for (auto [p, c] : g.parts) s.partitions[p].used -= c;
    live_grants_.erase(it);
    grant_owner_.erase(g.handle);
  }

  /// Ids currently held by a live grant.
  const std::vector<RbId>& grant_ids(const Grant& g) const { return live_grants_.at(g.handle); }

  // Transfers -----------------------------------------------------------------

  /// Moves RBs from donor to recipient; `credits` lists (partition, count)
  /// pairs at the recipient. Donor must have enough spare towards it.
  TransferRecord lend(int donor, int recipient, const std::vector<std::pair<int, int>>& credits) {
    if (donor == recipient) throw ContractViolation("lend: donor equals recipient");
    auto& d = station(donor);
    auto& r = station(recipient);
    if (r.tier == Tier::Macro) throw ContractViolation("lend: the macro station cannot receive RBs");
    int count = 0;
    for (auto [p, c] : credits) {
      if (c < 0 || p < 0 || p >= static_cast<int>(r.partitions.size()))
        throw ContractViolation("lend: bad credit partition");
      count += c;
    }
    const Band band = d.home_band();
    std::vector<int> ids;
    if (d.tier == Tier::Macro) {
      ids = macro_lendable_ids(recipient);
    } else {
      const auto& b = d.band(band);
      for (int k = 0; k < b.size(); ++k)
        if (b.owned[k] && !b.in_use[k] && b.lent_to[k].empty()) ids.push_back(k);
    }
    if (static_cast<int>(ids.size()) < count)
      throw ContractViolation("lend: donor " + std::to_string(donor) + " has " + std::to_string(ids.size()) +
                              " spare RBs, " + std::to_string(count) + " requested");
    ids.resize(count);

    auto& db = d.band(band);
    auto& rb = r.band(band);
    for (int k : ids) {
      if (db.lent_to[k].empty()) {
        const int p = pick_debit_partition(d);
        if (p < 0) throw ContractViolation("lend: donor partitions exhausted");
        --d.partitions[p].budget;
        db.lent_partition[k] = p;
      }
      db.lent_to[k].push_back(recipient);
      rb.borrowed_from[k] = donor;
    }
    TransferRecord rec;
    for (auto [p, c] : credits) {
      r.partitions[p].budget += c;
      rec.credited.insert(rec.credited.end(), c, p);
    }
    rec.donor = donor;
    rec.recipient = recipient;
    rec.band = band;
    rec.rb_ids = std::move(ids);
    rec.event_index = next_event_++;
    records_.push_back(rec);
    refresh_role(donor);
    refresh_role(recipient);
    return rec;
  }

  TransferRecord lend(int donor, int recipient, int count, int credited_partition) {
    return lend(donor, recipient, {{credited_partition, count}});
  }

  /// Gives back every borrowed RB the recipient no longer needs, newest
  /// transfer first. Returns the number of RBs handed back.
  int revert(int recipient) {
    auto& r = station(recipient);
    int returned_total = 0;
    for (int p = 0; p < static_cast<int>(r.partitions.size()); ++p) {
      int excess = std::min(active_credit(recipient, p), r.partitions[p].free());
      for (auto it = records_.rbegin(); it != records_.rend() && excess > 0; ++it) {
        auto& rec = *it;
        if (rec.recipient != recipient || rec.reverted) continue;
        std::vector<int> candidates;
        for (std::size_t x = 0; x < rec.rb_ids.size(); ++x)
          if (rec.credited[x] == p && !is_returned(rec, rec.rb_ids[x])) candidates.push_back(rec.rb_ids[x]);
        // Idle ids go back first to avoid moving users around.
        auto& rb = r.band(rec.band);
        std::stable_partition(candidates.begin(), candidates.end(), [&](int k) { return !rb.in_use[k]; });
        for (int k : candidates) {
          if (excess == 0) break;
          give_back(rec, k, p);
          --excess;
          ++returned_total;
        }
        if (rec.active_count() == 0) rec.reverted = true;
      }
    }
    refresh_role(recipient);
    return returned_total;
  }

  const std::vector<TransferRecord>& records() const { return records_; }

  // Roles ---------------------------------------------------------------------

  void set_role(int i, Role role) {
    auto& s = station(i);
    if (s.role == role) return;
    s.role = role;
    role_history_.emplace_back(i, role);
  }

  /// Steady-state role implied by the lent/borrowed sets.
  void refresh_role(int i) {
    if (borrowed_count(i) > 0) set_role(i, Role::Recipient);
    else if (lent_count(i) > 0) set_role(i, Role::Donor);
    else set_role(i, Role::Idle);
  }

  const std::vector<std::pair<int, Role>>& role_history() const { return role_history_; }

  /// Empty when every bookkeeping invariant holds, otherwise a description
  /// of the first violation found.
  std::optional<std::string> check_invariants() const {
    const int n = station_count();
    int small_total = 0;
    for (int i = 0; i < n; ++i) {
      const auto& s = station(i);
      for (int bi = 0; bi < 2; ++bi) {
        const auto& b = s.bands[bi];
        for (int k = 0; k < b.size(); ++k) {
          const auto& holders = b.lent_to[k];
          if (!holders.empty() && !b.owned[k]) return fail(i, "lends an id it does not own");
          if (!holders.empty() && b.in_use[k]) return fail(i, "uses an id it has lent");
          if (s.tier == Tier::Small && holders.size() > 1) return fail(i, "small cell lent an id twice");
          for (std::size_t x = 0; x < holders.size(); ++x) {
            if (station(holders[x]).bands[bi].borrowed_from[k] != i)
              return fail(i, "lent id missing at recipient " + std::to_string(holders[x]));
            for (std::size_t y = x + 1; y < holders.size(); ++y)
              if (holders[x] == holders[y] || overlapping(holders[x], holders[y]))
                return fail(i, "macro id reused by overlapping cells");
          }
          if (b.borrowed_from[k] >= 0) {
            const auto& donor_band = station(b.borrowed_from[k]).bands[bi];
            if (std::find(donor_band.lent_to[k].begin(), donor_band.lent_to[k].end(), i) ==
                donor_band.lent_to[k].end())
              return fail(i, "borrowed id not recorded at its donor");
          }
          if (b.in_use[k] && !((b.owned[k] && holders.empty()) || b.borrowed_from[k] >= 0))
            return fail(i, "uses an id it may not use");
        }
      }
      int budget = 0, used = 0;
      for (const auto& p : s.partitions) {
        if (p.used < 0 || p.used > p.budget) return fail(i, "partition usage out of range");
        budget += p.budget;
        used += p.used;
      }
      if (budget != usable_count(i)) return fail(i, "partition budgets disagree with usable ids");
      if (used != used_count(i)) return fail(i, "partition usage disagrees with ids in use");
      if (available(i) != usable_count(i) - used_count(i)) return fail(i, "available count inconsistent");
      if (s.tier == Tier::Small)
        small_total += initial_count(i) - lent_count(i) + borrowed_count_from_tier(i, Tier::Small);
      if (s.role == Role::Recipient && borrowed_count(i) == 0) return fail(i, "recipient without borrowed RBs");
      if (s.role == Role::Donor && lent_count(i) == 0) return fail(i, "donor without lent RBs");
    }
    if (small_total != small_band_total_) return std::string("small-tier RB total not conserved");
    for (auto [bs, role] : role_history_)
      if (bs == 0 && (role == Role::Requesting || role == Role::Recipient))
        return std::string("macro station took a requesting/recipient role");
    return std::nullopt;
  }

 private:
  template <typename Pred>
  int count_if_band(int i, Band band, Pred pred) const {
    const auto& b = station(i).band(band);
    int n = 0;
    for (int k = 0; k < b.size(); ++k)
      if (pred(b, k)) ++n;
    return n;
  }

  template <typename Pred>
  int count_all(int i, Pred pred) const {
    return count_if_band(i, Band::Macro, pred) + count_if_band(i, Band::Small, pred);
  }

  static std::optional<std::string> fail(int i, const std::string& what) {
    return "station " + std::to_string(i) + ": " + what;
  }

  /// Shared pool first, then the reserved part with the most idle RBs.
  static int pick_debit_partition(const StationLedger& s) {
    const int shared = static_cast<int>(s.partitions.size()) - 1;
    if (s.partitions[shared].free() > 0) return shared;
    int best = -1;
    for (int p = 0; p < shared; ++p)
      if (s.partitions[p].free() > 0 && (best < 0 || s.partitions[p].free() > s.partitions[best].free()))
        best = p;
    return best;
  }

  static bool is_returned(const TransferRecord& rec, int k) {
    return std::find(rec.returned_ids.begin(), rec.returned_ids.end(), k) != rec.returned_ids.end();
  }

  int active_credit(int recipient, int partition) const {
    int n = 0;
    for (const auto& rec : records_) {
      if (rec.recipient != recipient || rec.reverted) continue;
      for (std::size_t x = 0; x < rec.rb_ids.size(); ++x)
        if (rec.credited[x] == partition && !is_returned(rec, rec.rb_ids[x])) ++n;
    }
    return n;
  }

  /// Returns one borrowed id to its donor, moving its user to another idle
  /// usable id first if needed.
  void give_back(TransferRecord& rec, int k, int partition) {
    auto& r = station(rec.recipient);
    auto& d = station(rec.donor);
    auto& rb = r.band(rec.band);
    auto& db = d.band(rec.band);
    if (rb.in_use[k]) {
      std::optional<RbId> target;
      for (auto id : free_usable_ids(rec.recipient)) {
        if (id.band == rec.band && id.index == k) continue;
        target = id;
        break;
      }
      if (!target) throw ContractViolation("revert: no idle RB to move a user onto");
      r.band(target->band).in_use[target->index] = 1;
      rb.in_use[k] = 0;
      for (auto& [h, ids] : live_grants_)
        for (auto& id : ids)
          if (id.band == rec.band && id.index == k && grant_station(h) == rec.recipient) id = *target;
    }
    rb.borrowed_from[k] = -1;
    auto& holders = db.lent_to[k];
    holders.erase(std::remove(holders.begin(), holders.end(), rec.recipient), holders.end());
    if (holders.empty()) {
      ++d.partitions[db.lent_partition[k]].budget;
      db.lent_partition[k] = -1;
    }
    --r.partitions[partition].budget;
    rec.returned_ids.push_back(k);
    refresh_role(rec.donor);
  }

  std::vector<StationLedger> stations_;
  std::vector<std::vector<char>> overlap_;
  std::vector<Point> positions_;
  std::vector<TransferRecord> records_;
  std::vector<std::pair<int, Role>> role_history_;
  std::uint64_t next_event_ = 0;
  int small_band_total_ = 0;
  std::map<int, std::vector<RbId>> live_grants_;
  std::map<int, int> grant_owner_;
  int next_grant_ = 0;

  int grant_station(int handle) const { return grant_owner_.at(handle); }
};

}  // namespace renev
