#pragma once

// Reference implementations shared by the unit and acceptance suites.

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "renev/renev.hpp"

namespace oracles {

/// Cluster radius at which two centres drawn uniformly in the disc come
/// closer than `reach` with probability `p_o` (empirical quantile of the
/// unit-disc pair distance).
inline double calibrated_cluster_radius(double p_o, double reach = 50.0, std::size_t samples = 400000,
                                        std::uint64_t seed = 17) {
  std::mt19937_64 rng(seed);
  std::vector<double> d(samples);
  for (auto& x : d)
    x = renev::distance(renev::sample_in_disc(rng, {0, 0}, 1.0), renev::sample_in_disc(rng, {0, 0}, 1.0));
  const auto k = static_cast<std::size_t>(p_o * static_cast<double>(samples));
  std::nth_element(d.begin(), d.begin() + static_cast<long>(k), d.end());
  return reach / d[k];
}

/// Q distribution by placement: N discs, the first M are requesters, Q is the
/// number of connected components of the requesters' overlap graph.
inline std::vector<double> geometric_q_distribution(int n, int m, double p_o, std::size_t samples,
                                                    std::uint64_t seed) {
  const double rc = calibrated_cluster_radius(p_o);
  std::mt19937_64 rng(seed);
  std::vector<double> h(static_cast<std::size_t>(m), 0.0);
  std::vector<renev::Point> pos(static_cast<std::size_t>(n));
  std::vector<int> parent(static_cast<std::size_t>(m));
  std::function<int(int)> find = [&](int x) { return parent[x] == x ? x : parent[x] = find(parent[x]); };
  for (std::size_t t = 0; t < samples; ++t) {
    for (auto& p : pos) p = renev::sample_in_disc(rng, {0, 0}, rc);
    std::iota(parent.begin(), parent.end(), 0);
    for (int i = 0; i < m; ++i)
      for (int j = i + 1; j < m; ++j)
        if (renev::distance(pos[i], pos[j]) < 50.0) parent[find(i)] = find(j);
    int groups = 0;
    for (int i = 0; i < m; ++i) groups += find(i) == i;
    h[groups - 1] += 1.0;
  }
  for (auto& x : h) x /= static_cast<double>(samples);
  return h;
}

inline double total_variation(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t k = 0; k < std::max(a.size(), b.size()); ++k)
    s += std::abs((k < a.size() ? a[k] : 0.0) - (k < b.size() ? b[k] : 0.0));
  return s / 2.0;
}

/// The seven transition conditions, written out per station list rather
/// than per level vector.
inline bool transition_ok(const renev::analysis::SystemState& a, const renev::analysis::SystemState& b) {
  auto expand = [](const renev::analysis::SystemState& s) {
    std::vector<int> v;
    for (int k = 0; k < s.levels(); ++k) v.insert(v.end(), s.s[k], s.level(k));
    return v;
  };
  const auto x = expand(a), y = expand(b);
  if (x.size() != y.size()) return false;
  auto total = [](const std::vector<int>& v) { return std::accumulate(v.begin(), v.end(), 0L); };
  auto neg = [](const std::vector<int>& v) { return std::count_if(v.begin(), v.end(), [](int r) { return r < 0; }); };
  auto need = [](const std::vector<int>& v) {
    long t = 0;
    for (int r : v) t += r < 0 ? -r : 0;
    return t;
  };
  auto at = [](const std::vector<int>& v, int r) { return std::count(v.begin(), v.end(), r); };
  if (total(x) != total(y)) return false;
  if (!(neg(y) < neg(x))) return false;
  if (!(need(y) < need(x))) return false;
  for (int r = a.r_min; r < 0; ++r)
    if (at(y, r) > at(x, r)) return false;
  long given = 0, got = 0;
  for (int r = 1; r <= a.r_max; ++r) given += (at(x, r) - at(y, r)) * r;
  for (int r = a.r_min; r < 0; ++r) got += (at(x, r) - at(y, r)) * -r;
  if (given != got) return false;
  const int top = std::max(0, *std::max_element(x.begin(), x.end()));
  for (int r = a.r_min; r < 0; ++r)
    if (at(x, r) > 0 && -r > top && at(y, r) == 0) return false;
  const int best = *std::max_element(y.begin(), y.end());
  for (int r : y)
    if (r < 0 && best >= -r) return false;
  return true;
}

/// Every state with `count` stations over [lo, hi], by odometer.
inline std::vector<renev::analysis::SystemState> all_states(int lo, int hi, int count) {
  std::vector<renev::analysis::SystemState> out;
  std::vector<int> digits(static_cast<std::size_t>(count), lo);
  while (true) {
    if (std::is_sorted(digits.begin(), digits.end()))
      out.push_back(renev::analysis::SystemState::from_levels(lo, hi, digits));
    int k = 0;
    while (k < count && digits[k] == hi) digits[k++] = lo;
    if (k == count) break;
    ++digits[k];
  }
  return out;
}

inline std::vector<renev::analysis::SystemState> feasible_by_enumeration(const renev::analysis::SystemState& sn) {
  std::vector<renev::analysis::SystemState> out;
  for (const auto& sj : all_states(sn.r_min, sn.r_max, sn.count()))
    if (transition_ok(sn, sj)) out.push_back(sj);
  return out;
}

struct SequenceStats {
  int sequences = 0;
  int transfers = 0;
  int reverted = 0;
  int reused = 0;
  std::string failure;  // empty when every check held
};

/// Random admissions, departures, RENEV rounds and reversions on small
/// deployments; after every event the ledger invariants must hold, and per
/// sequence the message formula, acknowledge pairing and macro roles.
inline SequenceStats random_event_sequences(int sequences, std::uint64_t seed) {
  using namespace renev;
  std::mt19937_64 rng(seed);
  SequenceStats st;
  auto fail = [&](int seq, const std::string& what) {
    st.failure = "sequence " + std::to_string(seq) + ": " + what;
    return st;
  };
  for (int seq = 0; seq < sequences; ++seq) {
    ++st.sequences;
    std::uniform_real_distribution<double> coord(-90, 90);
    const int n = std::uniform_int_distribution<int>(2, 5)(rng);
    std::vector<Point> pos;
    for (int i = 0; i < n; ++i) pos.push_back({coord(rng), coord(rng)});
    ScenarioConfig cfg;
    cfg.n_small_cells = n;
    cfg.user_count = 0;
    cfg.rb_count_per_tier = 6 * n;
    Deployment dep;
    dep.config = cfg;
    dep.stations.push_back({0, Tier::Macro, {0, 0}, 26.0, 250.0, 12});
    for (int i = 0; i < n; ++i) dep.stations.push_back({i + 1, Tier::Small, pos[i], -3.0, 25.0, 6});
    const SliceScheme scheme = seq % 3 == 0 ? SliceScheme::nvs() : SliceScheme::prr(seq % 3 == 1 ? 1.0 : 0.5);
    ResourceLedger l(dep, scheme.partition_count());
    apply_scheme(l, scheme);
    MessageLog log;
    std::vector<Grant> live;
    const int events = std::uniform_int_distribution<int>(5, 40)(rng);
    for (int e = 0; e < events; ++e) {
      const int kind = std::uniform_int_distribution<int>(0, 9)(rng);
      if (kind < 5) {
        const int bs = std::uniform_int_distribution<int>(0, n)(rng);
        const int slice = std::uniform_int_distribution<int>(0, 1)(rng);
        const int rbs = std::uniform_int_distribution<int>(1, 3)(rng);
        auto r = admit(l, bs, static_cast<int>(live.size()), rbs, slice, scheme);
        if (auto* a = std::get_if<Admission>(&r)) {
          live.push_back(a->grant);
        } else if (bs > 0) {
          const auto out = trigger_renev(l, bs, std::get<Rejection>(r).deficit(), credit_partition(scheme, slice), log);
          if (out.succeeded()) {
            ++st.transfers;
            auto again = admit(l, bs, static_cast<int>(live.size()), rbs, slice, scheme);
            if (!std::holds_alternative<Admission>(again)) return fail(seq, "admission failed after a transfer");
            live.push_back(std::get<Admission>(again).grant);
          }
        }
      } else if (kind < 8 && !live.empty()) {
        const std::size_t k = std::uniform_int_distribution<std::size_t>(0, live.size() - 1)(rng);
        l.release(live[k]);
        live.erase(live.begin() + static_cast<long>(k));
      } else {
        st.reverted += l.revert(std::uniform_int_distribution<int>(1, n)(rng));
      }
      if (auto v = l.check_invariants()) return fail(seq, "event " + std::to_string(e) + ": " + *v);
    }
    for (const auto& holders : l.station(0).band(Band::Macro).lent_to)
      if (holders.size() > 1) ++st.reused;
    const auto c = count_messages(log, n);
    if (c.total != c.formula(n)) return fail(seq, "message count differs from the formula");
    if (!acknowledges_are_paired(log)) return fail(seq, "unpaired acknowledge");
    for (auto [bs, role] : l.role_history())
      if (bs == 0 && (role == Role::Requesting || role == Role::Recipient)) return fail(seq, "macro took a requester role");
  }
  return st;
}

}  // namespace oracles
