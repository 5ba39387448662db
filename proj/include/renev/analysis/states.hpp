#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <numeric>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "renev/analysis/throughput.hpp"
#include "renev/error.hpp"

namespace renev::analysis {

/// Count of stations per available-resource level r_min..r_max.
struct SystemState {
  int r_min = 0;
  int r_max = 0;
  std::vector<int> s;  // s[k] stations at level r_min + k

  SystemState() = default;
  SystemState(int lo, int hi) : r_min(lo), r_max(hi), s(static_cast<std::size_t>(hi - lo + 1), 0) {
    if (hi < lo) throw ContractViolation("SystemState: r_max < r_min");
  }

  static SystemState from_levels(int lo, int hi, const std::vector<int>& levels) {
    SystemState st(lo, hi);
    for (int r : levels) st.add(r);
    return st;
  }

  int levels() const { return static_cast<int>(s.size()); }
  int level(int k) const { return r_min + k; }
  int count() const { return std::accumulate(s.begin(), s.end(), 0); }
  int& at_level(int r) { return s.at(static_cast<std::size_t>(r - r_min)); }
  int at_level(int r) const { return s.at(static_cast<std::size_t>(r - r_min)); }
  void add(int r, int n = 1) {
    if (r < r_min || r > r_max) throw ContractViolation("SystemState: level out of range");
    at_level(r) += n;
  }

  /// n_R: stations with negative availability.
  int requesters() const {
    int n = 0;
    for (int k = 0; k < levels(); ++k)
      if (level(k) < 0) n += s[k];
    return n;
  }

  long resources() const {
    long t = 0;
    for (int k = 0; k < levels(); ++k) t += static_cast<long>(s[k]) * level(k);
    return t;
  }

  /// Same stations on a wider level range.
  SystemState widened(int lo, int hi) const {
    SystemState out(std::min(lo, r_min), std::max(hi, r_max));
    for (int k = 0; k < levels(); ++k) out.add(level(k), s[k]);
    return out;
  }

  friend bool operator==(const SystemState&, const SystemState&) = default;
  friend auto operator<=>(const SystemState& a, const SystemState& b) {
    return std::tie(a.r_min, a.r_max, a.s) <=> std::tie(b.r_min, b.r_max, b.s);
  }
};

inline std::string to_string(const SystemState& st) {
  std::string out = "{";
  bool first = true;
  for (int k = 0; k < st.levels(); ++k) {
    if (st.s[k] == 0) continue;
    if (!first) out += ",";
    out += std::to_string(st.level(k)) + ":" + std::to_string(st.s[k]);
    first = false;
  }
  return out + "}";
}

/// The seven feasibility conditions for S_j as a post-RENEV state of S_n.
/// Both states must share r_min, r_max and the station count.
inline bool is_feasible_transition(const SystemState& n, const SystemState& j) {
  if (n.r_min != j.r_min || n.r_max != j.r_max || n.count() != j.count()) return false;
  const int L = n.levels();
  // 1: resources conserved
  if (n.resources() != j.resources()) return false;
  // 2: fewer requesters
  if (!(j.requesters() < n.requesters())) return false;
  // 3: fewer requested RBs, compared as magnitudes
  long req_n = 0, req_j = 0;
  for (int k = 0; k < L; ++k)
    if (n.level(k) < 0) {
      req_n += static_cast<long>(n.s[k]) * -n.level(k);
      req_j += static_cast<long>(j.s[k]) * -j.level(k);
    }
  if (!(req_j < req_n)) return false;
  // 4: no new requesters, none of the old ones deepened
  for (int k = 0; k < L; ++k)
    if (n.level(k) < 0 && j.s[k] > n.s[k]) return false;
  // 5: given == received (levels >= 1 against levels < 0)
  long given = 0, received = 0;
  for (int k = 0; k < L; ++k) {
    if (n.level(k) >= 1) given += static_cast<long>(n.s[k] - j.s[k]) * n.level(k);
    if (n.level(k) < 0) received += static_cast<long>(n.s[k] - j.s[k]) * -n.level(k);
  }
  if (given != received) return false;
  // 6: a requester level whose need exceeds every spare of S_n stays occupied
  int top = 0;
  for (int k = 0; k < L; ++k)
    if (n.s[k] > 0 && n.level(k) > top) top = n.level(k);
  for (int k = 0; k < L; ++k)
    if (n.level(k) < 0 && n.s[k] > 0 && -n.level(k) > top && j.s[k] == 0) return false;
  // 7: completion: no remaining requester could still be covered
  for (int k = 0; k < L; ++k) {
    if (n.level(k) >= 0 || j.s[k] == 0) continue;
    for (int m = 0; m < L; ++m)
      if (j.level(m) >= -j.level(k) && j.s[m] > 0) return false;
  }
  return true;
}

inline constexpr double kDefaultStateCap = 1e7;

/// Number of states with `count` stations over `levels` levels.
inline double state_space_size(int count, int levels) {
  return std::exp(std::lgamma(count + levels) - std::lgamma(count + 1.0) - std::lgamma(static_cast<double>(levels)));
}

/// F(S_n): every state over the same range and count that passes the seven
/// conditions. Candidates are generated with the requester part bounded by
/// S_n and the resource total fixed, then filtered; more than `cap`
/// candidates is refused.
inline std::vector<SystemState> feasible_states(const SystemState& sn, double cap = kDefaultStateCap) {
  const int L = sn.levels();
  const int N = sn.count();
  double candidates = 0.0;
  std::vector<SystemState> out;
  if (sn.requesters() == 0) return out;

  const long target = sn.resources();
  SystemState cur(sn.r_min, sn.r_max);
  std::function<void(int, int, long)> rec = [&](int k, int left, long sum) {
    if (k == L) {
      if (++candidates > cap)
        throw CapacityError("feasible_states: more than " + std::to_string(static_cast<long long>(cap)) +
                            " candidate states for " + to_string(sn) + " (full space " +
                            std::to_string(static_cast<long double>(state_space_size(N, L))) + ")");
      if (left == 0 && sum == target && is_feasible_transition(sn, cur)) out.push_back(cur);
      return;
    }
    const int lv = sn.level(k);
    // Levels after k add between rest*level(k+1) and rest*r_max.
    int hi = left;
    if (lv < 0) hi = std::min(hi, sn.s[k]);
    for (int c = 0; c <= hi; ++c) {
      const long s2 = sum + static_cast<long>(c) * lv;
      const int rest = left - c;
      if (k + 1 < L) {
        const long lo_add = static_cast<long>(rest) * sn.level(k + 1);
        const long hi_add = static_cast<long>(rest) * sn.r_max;
        if (s2 + lo_add > target || s2 + hi_add < target) continue;
      } else if (rest != 0) {
        continue;
      }
      cur.s[k] = c;
      rec(k + 1, rest, s2);
      cur.s[k] = 0;
    }
  };
  rec(0, N, 0);
  return out;
}

/// Weighted set of states.
using StateDistribution = std::map<SystemState, double>;

inline double total_mass(const StateDistribution& d) {
  double t = 0.0;
  for (const auto& [s, p] : d) t += p;
  return t;
}

inline double expected_requesters(const StateDistribution& d) {
  double e = 0.0;
  for (const auto& [s, p] : d) e += p * s.requesters();
  return e;
}

/// Kernel giving, for an initial state, its distribution after RENEV.
using TransitionKernel = std::function<StateDistribution(const SystemState&)>;

/// Uniform over F(S_n); stays put when F is empty.
inline TransitionKernel uniform_kernel(double cap = kDefaultStateCap) {
  return [cap](const SystemState& sn) {
    StateDistribution out;
    const auto f = feasible_states(sn, cap);
    if (f.empty()) {
      out[sn] = 1.0;
      return out;
    }
    const double w = 1.0 / static_cast<double>(f.size());
    for (const auto& sj : f) out[sj] += w;
    return out;
  };
}

/// Kernel estimated from observed (before, after) pairs; states never seen
/// fall back to `fallback`.
inline TransitionKernel empirical_kernel(const std::map<SystemState, StateDistribution>& observed,
                                         TransitionKernel fallback) {
  return [observed, fallback](const SystemState& sn) {
    auto it = observed.find(sn);
    if (it == observed.end()) return fallback(sn);
    StateDistribution out = it->second;
    const double t = total_mass(out);
    for (auto& [s, p] : out) p /= t;
    return out;
  };
}

inline StateDistribution apply_kernel(const StateDistribution& pi, const TransitionKernel& kernel) {
  StateDistribution out;
  std::map<SystemState, StateDistribution> cache;
  for (const auto& [sn, p] : pi) {
    if (p == 0.0) continue;
    auto it = cache.find(sn);
    if (it == cache.end()) it = cache.emplace(sn, kernel(sn)).first;
    for (const auto& [sj, q] : it->second) out[sj] += p * q;
  }
  return out;
}

/// sum_j n_R(S_j) (pi_j - pi'_j) over the union of both supports.
inline double expected_successes(const StateDistribution& before, const StateDistribution& after) {
  return expected_requesters(before) - expected_requesters(after);
}

enum class QFirstBranch {
  AllOthers,      ///< q = 1 uses P_RB(m = M - 1): every other requester overlaps
  PrintedNMinus1, ///< q = 1 uses P_RB(m = N - 1) as printed
};

/// P_RB(m_i = m | N, M): requesters overlapping a given requester.
inline double p_rb(int m, int n, int big_m, double p_o) {
  if (m < 0 || n < 1) return 0.0;
  const double p_nm = n > 1 ? static_cast<double>(big_m - 1) / (n - 1) : 0.0;
  double s = 0.0;
  for (int k = m; k <= n - 1; ++k)
    s += binomial_pmf(n - 1, k, p_o) * binomial_pmf(k, m, p_nm);
  return s;
}

/// Distribution of the number Q of non-overlapping requester groups, index
/// q - 1 for q = 1..M, renormalised. Sub-problems of the q > 2 branch are
/// themselves renormalised distributions.
inline std::vector<double> p_q_groups(int n, int big_m, double p_o, QFirstBranch first = QFirstBranch::AllOthers) {
  if (big_m <= 0) return {};
  if (big_m > n) throw ContractViolation("p_q_groups: M must not exceed N");
  if (!(p_o >= 0.0 && p_o <= 1.0)) throw ContractViolation("p_q_groups: P_o must lie in [0,1]");
  std::map<std::pair<int, int>, std::vector<double>> memo;
  std::function<std::vector<double>(int, int)> dist = [&](int nn, int mm) -> std::vector<double> {
    if (mm <= 0 || nn < mm) return {};
    if (mm == 1) return {1.0};
    auto key = std::make_pair(nn, mm);
    if (auto it = memo.find(key); it != memo.end()) return it->second;
    std::vector<double> v(mm, 0.0);
    v[0] = p_rb(first == QFirstBranch::AllOthers ? mm - 1 : nn - 1, nn, mm, p_o);
    for (int k = 0; k <= mm - 1; ++k) v[1] += p_rb(k, nn, mm, p_o) * p_rb(mm - 2 - k, nn, mm, p_o);
    for (int q = 3; q <= mm; ++q)
      for (int k = 0; k <= mm - q; ++k) {
        const auto sub = dist(nn - 1 - k, mm - 1 - k);
        if (q - 2 < static_cast<int>(sub.size())) v[q - 1] += p_rb(k, nn, mm, p_o) * sub[q - 2];
      }
    const double t = std::accumulate(v.begin(), v.end(), 0.0);
    if (t > 0.0) {
      for (auto& x : v) x /= t;
    } else {
      v.assign(mm, 0.0);
      v[mm - 1] = 1.0;
    }
    memo[key] = v;
    return v;
  };
  return dist(n, big_m);
}

/// Distribution of the macro's spare level r_0.
using SpareDistribution = std::map<int, double>;

struct SignalingExpectations {
  double e_nr = 0.0;        // E[n_R]
  double e_ns = 0.0;        // E[n_s]
  double e_nr_prime = 0.0;  // E[n'_R]
  double e_ns_prime = 0.0;  // E[n'_s]
  double e_ns_total = 0.0;
  double success_probability = 0.0;
  double e_messages = 0.0;  // I
  std::size_t states_initial = 0;
  std::size_t states_after_sc = 0;
  std::size_t states_extended = 0;
};

/// I = 3(N-1) E[n_R] + 3 E[n'_R] + 2 E[n_s_total].
inline double expected_messages(int n, double e_nr, double e_nr_prime, double e_ns_total) {
  return 3.0 * (n - 1) * e_nr + 3.0 * e_nr_prime + 2.0 * e_ns_total;
}

/// Two-stage chain: the small-cell tier first, then the macro's spare
/// inserted Q times at level r_0 and a second RENEV pass.
inline SignalingExpectations signaling_expectations(const StateDistribution& pi, const SpareDistribution& p_enb,
                                                    int n, double p_o, const TransitionKernel& sc_kernel,
                                                    const TransitionKernel& enb_kernel,
                                                    QFirstBranch first = QFirstBranch::AllOthers) {
  SignalingExpectations out;
  const double mass = total_mass(pi);
  if (std::abs(mass - 1.0) > 1e-6) throw ContractViolation("signaling_expectations: pi does not sum to 1");
  out.states_initial = pi.size();
  out.e_nr = expected_requesters(pi);
  const auto pi1 = apply_kernel(pi, sc_kernel);
  out.states_after_sc = pi1.size();
  out.e_ns = expected_successes(pi, pi1);

  StateDistribution pi2;
  for (const auto& [sj, p] : pi1) {
    const int m = sj.requesters();
    if (m == 0) {
      pi2[sj] += p;
      continue;
    }
    const auto pq = p_q_groups(n, m, p_o, first);
    for (const auto& [r0, pe] : p_enb) {
      for (int q = 1; q <= m; ++q) {
        const double w = p * pq[q - 1] * pe;
        if (w == 0.0) continue;
        auto ext = sj.widened(std::min(sj.r_min, r0), std::max(sj.r_max, r0));
        ext.add(r0, q);
        pi2[ext] += w;
      }
    }
  }
  out.states_extended = pi2.size();
  out.e_nr_prime = expected_requesters(pi2);
  const auto pi3 = apply_kernel(pi2, enb_kernel);
  out.e_ns_prime = expected_successes(pi2, pi3);
  out.e_ns_total = out.e_ns + out.e_ns_prime;
  out.success_probability = out.e_nr > 0.0 ? out.e_ns_total / out.e_nr : 0.0;
  out.e_messages = expected_messages(n, out.e_nr, out.e_nr_prime, out.e_ns_total);
  return out;
}

inline SignalingExpectations signaling_expectations(const StateDistribution& pi, const SpareDistribution& p_enb,
                                                    int n, double p_o, double cap = kDefaultStateCap) {
  const auto k = uniform_kernel(cap);
  return signaling_expectations(pi, p_enb, n, p_o, k, k);
}

inline nlohmann::json to_json(const SignalingExpectations& e) {
  return {{"E_nR", e.e_nr},
          {"E_ns", e.e_ns},
          {"E_nR_prime", e.e_nr_prime},
          {"E_ns_prime", e.e_ns_prime},
          {"E_ns_total", e.e_ns_total},
          {"success_probability", e.success_probability},
          {"E_I", e.e_messages},
          {"states_initial", e.states_initial},
          {"states_after_sc", e.states_after_sc},
          {"states_extended", e.states_extended}};
}

/// Level of r RBs in buckets of `bucket`, rounded away from zero so any
/// shortfall stays negative.
inline int quantize_level(int r, int bucket) {
  if (bucket < 1) throw ContractViolation("quantize_level: bucket must be >= 1");
  if (r >= 0) return r / bucket;
  return -((-r + bucket - 1) / bucket);
}

}  // namespace renev::analysis
