#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include <nlohmann/json.hpp>

#include "renev/error.hpp"

namespace renev::analysis {

/// P_o for two discs whose centres are uniform in a cluster of radius rc.
inline double overlap_probability(double r_a, double r_b, double rc) {
  if (!(rc > 0.0)) throw ContractViolation("overlap_probability: cluster radius must be > 0");
  const double v = (r_a + r_b) / rc;
  return std::min(1.0, v * v);
}

inline double binomial_pmf(int n, int k, double p) {
  if (k < 0 || k > n) return 0.0;
  if (p <= 0.0) return k == 0 ? 1.0 : 0.0;
  if (p >= 1.0) return k == n ? 1.0 : 0.0;
  const double lc = std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
  return std::exp(lc + k * std::log(p) + (n - k) * std::log1p(-p));
}

/// E[RB_s / (n_i + 1)] in closed form; the P_o -> 0 limit is RB_s.
inline double enb_share_equal(int n, double p_o, double rb_s) {
  if (n < 1) throw ContractViolation("enb_share: N must be >= 1");
  if (!(p_o >= 0.0 && p_o <= 1.0)) throw ContractViolation("enb_share: P_o must lie in [0,1]");
  if (p_o == 0.0) return rb_s;
  // 1 - (1-p)^N without cancellation for tiny p.
  const double one_minus = -std::expm1(n * std::log1p(-p_o));
  return rb_s / (n * p_o) * one_minus;
}

/// Same expectation by summing over the binomial overlap count.
inline double enb_share_equal_direct(int n, double p_o, double rb_s) {
  double s = 0.0;
  for (int k = 0; k <= n - 1; ++k) s += rb_s / (k + 1) * binomial_pmf(n - 1, k, p_o);
  return s;
}

inline constexpr int kEnbShareExactLimit = 12;
inline constexpr int kEnbShareSamples = 100000;

/// E[RB_i^s] for every requester i (0-based over the small cells): each
/// other cell overlaps i independently with probability P_o and the
/// overlapping group splits RB_s in proportion to the a weights.
inline std::vector<double> enb_share_weighted(double p_o, double rb_s, const std::vector<double>& a,
                                              std::uint64_t seed = 1) {
  const int n = static_cast<int>(a.size());
  if (n < 1) throw ContractViolation("enb_share: N must be >= 1");
  if (!(p_o >= 0.0 && p_o <= 1.0)) throw ContractViolation("enb_share: P_o must lie in [0,1]");
  auto share = [&](int i, double others, int count) {
    const double den = a[i] + others;
    return den > 0.0 ? a[i] / den : 1.0 / (count + 1);
  };
  std::vector<double> out(n, 0.0);
  if (n <= kEnbShareExactLimit) {
    for (int i = 0; i < n; ++i) {
      std::vector<int> others;
      for (int k = 0; k < n; ++k)
        if (k != i) others.push_back(k);
      const int m = static_cast<int>(others.size());
      double e = 0.0;
      for (std::uint32_t mask = 0; mask < (1u << m); ++mask) {
        double sum = 0.0;
        int cnt = 0;
        for (int b = 0; b < m; ++b)
          if (mask & (1u << b)) {
            sum += a[others[b]];
            ++cnt;
          }
        const double w = std::pow(p_o, cnt) * std::pow(1.0 - p_o, m - cnt);
        if (w > 0.0) e += w * share(i, sum, cnt);
      }
      out[i] = rb_s * e;
    }
    return out;
  }
  std::mt19937_64 rng(seed);
  std::bernoulli_distribution hit(p_o);
  for (int i = 0; i < n; ++i) {
    double e = 0.0;
    for (int t = 0; t < kEnbShareSamples; ++t) {
      double sum = 0.0;
      int cnt = 0;
      for (int k = 0; k < n; ++k)
        if (k != i && hit(rng)) {
          sum += a[k];
          ++cnt;
        }
      e += share(i, sum, cnt);
    }
    out[i] = rb_s * e / kEnbShareSamples;
  }
  return out;
}

/// Inputs of the closed forms; vectors are indexed by station, 0 = macro.
struct ThroughputInputs {
  double users = 0.0;                 // X
  double demand = 0.0;                // d, bit/s
  std::vector<double> a;              // layer shares, sum 1
  std::vector<double> rate;           // E[R_i]
  std::vector<double> rate_via_macro; // E[R_i^0] (entry 0 unused)
  std::vector<double> rb;             // RB_i
  double p_overlap = 0.0;             // P_o between small cells
  bool weighted_share = true;         // E[RB_i^s] weighted by a_i, else equal split

  int small_cells() const { return static_cast<int>(a.size()) - 1; }

  void validate() const {
    const std::size_t n = a.size();
    if (n < 2) throw ContractViolation("throughput: need the macro and at least one small cell");
    if (rate.size() != n || rb.size() != n || rate_via_macro.size() != n)
      throw ContractViolation("throughput: input vectors differ in length");
    if (users < 0.0 || demand < 0.0) throw ContractViolation("throughput: negative users or demand");
    for (std::size_t i = 0; i < n; ++i)
      if (a[i] < 0.0 || rate[i] < 0.0 || rb[i] < 0.0 || rate_via_macro[i] < 0.0)
        throw ContractViolation("throughput: negative input");
  }
};

struct ThroughputReport {
  // with RENEV
  double t_r0 = 0.0;
  double t_r_scs = 0.0;
  double t_r = 0.0;
  double rb_s = 0.0;                   // macro RBs left for transfers
  double overflow_users = 0.0;         // script E
  std::vector<double> overflow_per_sc; // script E_i
  std::vector<double> enb_share;       // E[RB_i^s]
  double rate_total = 0.0;             // E[R_TOT]
  // without RENEV
  double t_nr00 = 0.0;
  double t_nr_scs0 = 0.0;
  std::vector<double> t_nr_i;
  std::vector<double> x_ii;  // E[X_i^i]
  std::vector<double> x_i0;  // E[X_i^0]
  double t_nr = 0.0;
};

namespace detail {

inline double rate_total(const ThroughputInputs& in) {
  if (in.a[0] >= 1.0) return 0.0;
  double s = 0.0;
  for (std::size_t i = 1; i < in.a.size(); ++i) s += in.a[i] * in.rate[i];
  return s / (1.0 - in.a[0]);
}

inline double macro_own_rbs(double t0, double r0) { return r0 > 0.0 ? t0 / r0 : 0.0; }

}  // namespace detail

/// Fills the without-RENEV half of `rep`.
inline void without_renev_into(const ThroughputInputs& in, ThroughputReport& rep);

/// T_R: macro layer on its own band, small-cell tier on the pooled band
/// plus its share of the macro leftovers.
inline ThroughputReport throughput_with_renev(const ThroughputInputs& in) {
  in.validate();
  ThroughputReport rep;
  const int n = in.small_cells();
  const double x = in.users, d = in.demand;
  rep.t_r0 = std::min(x * in.a[0] * d, in.rate[0] * in.rb[0]);
  rep.rb_s = std::max(0.0, in.rb[0] - detail::macro_own_rbs(rep.t_r0, in.rate[0]));
  rep.rate_total = detail::rate_total(in);

  double rb_t = 0.0;
  for (int i = 1; i <= n; ++i) rb_t += in.rb[i];
  const double sc_share = 1.0 - in.a[0];

  std::vector<double> a_sc(in.a.begin() + 1, in.a.end());
  if (in.weighted_share) {
    rep.enb_share = enb_share_weighted(in.p_overlap, rep.rb_s, a_sc);
  } else {
    rep.enb_share.assign(n, enb_share_equal(n, in.p_overlap, rep.rb_s));
  }

  rep.overflow_users = std::max(0.0, x * sc_share - (d > 0.0 ? rb_t / d * rep.rate_total : 0.0));
  rep.overflow_per_sc.assign(n, 0.0);
  double capacity = 0.0;
  for (int i = 1; i <= n; ++i) {
    if (sc_share > 0.0) {
      rep.overflow_per_sc[i - 1] = in.a[i] / sc_share * rep.overflow_users;
      capacity += in.rate[i] * (in.a[i] * rb_t / sc_share);
    }
    capacity += in.rate[i] * rep.enb_share[i - 1];
  }
  rep.t_r_scs = std::min(x * sc_share * d, capacity);
  rep.t_r = rep.t_r0 + rep.t_r_scs;

  without_renev_into(in, rep);
  return rep;
}

/// T_NR: every small cell alone, overflow carried by what the macro has left.
inline ThroughputReport throughput_without_renev(const ThroughputInputs& in) {
  in.validate();
  ThroughputReport rep;
  without_renev_into(in, rep);
  return rep;
}

inline void without_renev_into(const ThroughputInputs& in, ThroughputReport& rep) {
  const int n = in.small_cells();
  const double x = in.users, d = in.demand;
  rep.t_nr_i.assign(n + 1, 0.0);
  rep.x_ii.assign(n + 1, 0.0);
  rep.x_i0.assign(n + 1, 0.0);
  double sc_sum = 0.0, overflow = 0.0, overflow_rate = 0.0;
  for (int i = 1; i <= n; ++i) {
    const double xi = x * in.a[i];
    rep.t_nr_i[i] = std::min(xi * d, in.rate[i] * in.rb[i]);
    rep.x_ii[i] = d > 0.0 ? std::min(xi, in.rb[i] * in.rate[i] / d) : xi;
    rep.x_i0[i] = xi - rep.x_ii[i];
    sc_sum += rep.t_nr_i[i];
    overflow += rep.x_i0[i];
    overflow_rate += rep.x_i0[i] * in.rate_via_macro[i];
  }
  // E[R_i^0] of the overflow as a whole: weighted by who overflows.
  overflow_rate = overflow > 0.0 ? overflow_rate / overflow : 0.0;
  rep.t_nr00 = std::min(x * in.a[0] * d, in.rate[0] * in.rb[0]);
  const double left = std::max(0.0, in.rb[0] - detail::macro_own_rbs(rep.t_nr00, in.rate[0]));
  rep.t_nr_scs0 = std::min(overflow * d, overflow_rate * left);
  rep.t_nr = rep.t_nr00 + rep.t_nr_scs0 + sc_sum;
}

inline nlohmann::json to_json(const ThroughputReport& r) {
  return {{"T_R0", r.t_r0},
          {"T_R_SCs", r.t_r_scs},
          {"T_R", r.t_r},
          {"RB_s", r.rb_s},
          {"E_overflow", r.overflow_users},
          {"E_overflow_i", r.overflow_per_sc},
          {"E_RB_s_i", r.enb_share},
          {"E_R_TOT", r.rate_total},
          {"T_NR00", r.t_nr00},
          {"T_NR_SCs0", r.t_nr_scs0},
          {"T_NR_i", r.t_nr_i},
          {"E_X_ii", r.x_ii},
          {"E_X_i0", r.x_i0},
          {"T_NR", r.t_nr}};
}

}  // namespace renev::analysis
