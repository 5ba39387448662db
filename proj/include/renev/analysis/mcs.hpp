#pragma once

#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <random>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "renev/error.hpp"
#include "renev/geometry.hpp"
#include "renev/log.hpp"
#include "renev/radio.hpp"
#include "renev/scenario.hpp"

namespace renev::analysis {

/// How the competitor conditioning is evaluated.
enum class McsRoute {
  Exact,      ///< integrates the Gaussian product, one integral per MCS bin
  AsWritten,  ///< closed-form denominator and per-pair product numerator
};

/// P(MCS = k) per table entry; `outage` is the mass below the lowest
/// threshold before conditioning it away.
struct McsDistribution {
  std::vector<double> p;
  double outage = 0.0;
  double serve_probability = 0.0;  // P(the BS is the best one)

  double sum() const { return std::accumulate(p.begin(), p.end(), 0.0); }
};

/// Area a traffic layer spans.
struct LayerArea {
  Point center;
  double radius = 0.0;
};

inline LayerArea layer_area(const Deployment& dep, int layer) {
  const auto& bs = dep.stations.at(layer);
  return {bs.position, bs.coverage_radius};
}

namespace detail {

inline double phi(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }
inline double q_func(double x) { return 0.5 * std::erfc(x / std::numbers::sqrt2); }
inline double gauss_pdf(double x, double sigma) {
  return std::exp(-0.5 * (x / sigma) * (x / sigma)) / (sigma * std::sqrt(2.0 * std::numbers::pi));
}

/// P(S > x) for S ~ N(0, sigma); step function when sigma is zero.
inline double tail(double x, double sigma) {
  if (sigma == 0.0) return x < 0.0 ? 1.0 : 0.0;
  return q_func(x / sigma);
}

inline double cdf(double x, double sigma) {
  if (sigma == 0.0) return x >= 0.0 ? 1.0 : 0.0;
  return phi(x / sigma);
}

inline double halton(unsigned index, unsigned base) {
  double f = 1.0, r = 0.0;
  while (index > 0) {
    f /= base;
    r += f * (index % base);
    index /= base;
  }
  return r;
}

inline double mean_snr(const BaseStation& bs, Point y, const ChannelModel& ch) {
  return compute_snr(bs, y, 0.0, ch);
}

}  // namespace detail

inline constexpr double kQuadratureTol = 1e-6;
inline constexpr int kDefaultAreaPoints = 1024;

/// Unnormalised masses at one position: entry k < K is
/// P(MCS_j = k and BS j is the best), entry K the joint outage, entry K+1
/// P(BS j is the best).
inline std::vector<double> joint_mass_at(Point y, int serving, const std::vector<BaseStation>& stations,
                                         const ChannelModel& ch, const McsTable& table,
                                         McsRoute route = McsRoute::Exact) {
  const auto& bj = stations.at(serving);
  const double mj = detail::mean_snr(bj, y, ch);
  const double sj = ch.shadow_sigma(bj.tier);
  std::vector<double> mc, sc;
  for (const auto& b : stations) {
    if (b.id == bj.id) continue;
    mc.push_back(detail::mean_snr(b, y, ch));
    sc.push_back(ch.shadow_sigma(b.tier));
  }
  const std::size_t K = table.size();
  std::vector<double> out(K + 2, 0.0);

  // SNR_j = mj - s lies in [lo, hi) iff s in (mj - hi, mj - lo].
  auto win = [&](std::size_t k, double& a, double& b) {
    const double lo = k < K ? table[k].snr_min : -std::numeric_limits<double>::infinity();
    const double hi = k < K ? table[k].snr_max : table.lowest_threshold();
    a = mj - hi;
    b = mj - lo;
  };

  if (route == McsRoute::Exact) {
    auto beats_all = [&](double s) {
      double prod = 1.0;
      for (std::size_t c = 0; c < mc.size(); ++c) prod *= detail::tail(s + mc[c] - mj, sc[c]);
      return prod;
    };
    for (std::size_t k = 0; k <= K; ++k) {
      double a, b;
      win(k, a, b);
      if (sj == 0.0) {
        out[k] = (0.0 > a && 0.0 <= b) ? beats_all(0.0) : 0.0;
        continue;
      }
      const double span = 9.0 * sj;
      a = std::max(a, -span);
      b = std::min(b, span);
      if (!(b > a)) continue;
      auto f = [&](double s) { return detail::gauss_pdf(s, sj) * beats_all(s); };
      out[k] = boost::math::quadrature::gauss_kronrod<double, 21>::integrate(f, a, b, 12, kQuadratureTol);
    }
    out[K + 1] = std::accumulate(out.begin(), out.begin() + K + 1, 0.0);
    return out;
  }

  // Closed forms as printed: per-pair product numerator over the bin and
  // the product of F_{S_j}(sigma_j mu / (sigma_c sqrt 2)) as denominator.
  double denom = 1.0;
  for (std::size_t c = 0; c < mc.size(); ++c) {
    const double mu = mc[c] - mj;
    denom *= sc[c] == 0.0 ? (mu < 0.0 ? 1.0 : 0.0)
                          : detail::cdf(sj * mu / (sc[c] * std::numbers::sqrt2), sj);
  }
  for (std::size_t k = 0; k <= K; ++k) {
    double a, b;
    win(k, a, b);
    const double bin = detail::cdf(b, sj) - detail::cdf(a, sj);
    if (mc.empty()) {
      out[k] = bin;
      continue;
    }
    double prod = 1.0;
    for (std::size_t c = 0; c < mc.size(); ++c) {
      const double mu = mc[c] - mj;
      double integral = 0.0;
      if (sj == 0.0) {
        integral = (0.0 > a && 0.0 <= b) ? detail::cdf(mu, sj) : 0.0;
      } else {
        const double lo = std::max(a, -9.0 * sj), hi = std::min(b, 9.0 * sj);
        if (hi > lo) {
          auto f = [&](double s) { return detail::cdf(s + mu, sj) * detail::gauss_pdf(s, sj); };
          integral = boost::math::quadrature::gauss_kronrod<double, 21>::integrate(f, lo, hi, 12, kQuadratureTol);
        }
      }
      prod *= bin - integral;
    }
    out[k] = prod;
  }
  out[K + 1] = denom;
  return out;
}

/// Distribution of the MCS used by `serving` for users uniform over `area`,
/// conditioned on `serving` being their best station and on non-outage.
/// Spatial averaging takes the ratio of the averaged joint and marginal.
inline McsDistribution mcs_probability(const LayerArea& area, int serving, const std::vector<BaseStation>& stations,
                                       const ChannelModel& ch, const McsTable& table,
                                       int points = kDefaultAreaPoints, McsRoute route = McsRoute::Exact) {
  if (points < 1) throw ContractViolation("mcs_probability: need at least one point");
  const std::size_t K = table.size();
  std::vector<double> acc(K + 2, 0.0);
  for (int n = 0; n < points; ++n) {
    const Point y = square_to_disc(detail::halton(n + 1, 2), detail::halton(n + 1, 3), area.center, area.radius);
    const auto m = joint_mass_at(y, serving, stations, ch, table, route);
    for (std::size_t k = 0; k < K + 2; ++k) acc[k] += m[k];
  }
  McsDistribution d;
  const double served = acc[K + 1];
  d.serve_probability = served / points;
  const double inside = served - acc[K];
  d.outage = served > 0.0 ? acc[K] / served : 0.0;
  d.p.assign(K, 0.0);
  if (inside > 0.0)
    for (std::size_t k = 0; k < K; ++k) d.p[k] = acc[k] / inside;
  return d;
}

/// The eNB's MCS for users of a small-cell layer, with no best-server
/// conditioning: what such a user gets when pushed onto the macro.
inline McsDistribution mcs_probability_via_macro(const LayerArea& area, const BaseStation& macro,
                                                 const ChannelModel& ch, const McsTable& table,
                                                 int points = kDefaultAreaPoints) {
  return mcs_probability(area, 0, std::vector<BaseStation>{macro}, ch, table, points, McsRoute::Exact);
}

/// Brute-force estimate of the same conditional distribution by sampling
/// positions and shadowing.
template <typename Rng>
McsDistribution sample_mcs_distribution(const LayerArea& area, int serving, const std::vector<BaseStation>& stations,
                                        const ChannelModel& ch, const McsTable& table, std::size_t samples,
                                        Rng& rng) {
  const std::size_t K = table.size();
  std::vector<double> hits(K, 0.0);
  double best = 0.0, outage = 0.0;
  std::normal_distribution<double> unit(0.0, 1.0);
  std::vector<double> snr(stations.size());
  for (std::size_t n = 0; n < samples; ++n) {
    const Point y = sample_in_disc(rng, area.center, area.radius);
    for (std::size_t b = 0; b < stations.size(); ++b)
      snr[b] = compute_snr(stations[b], y, ch.shadow_sigma(stations[b].tier) * unit(rng), ch);
    std::size_t arg = 0;
    for (std::size_t b = 1; b < stations.size(); ++b)
      if (snr[b] > snr[arg]) arg = b;
    if (stations[arg].id != stations.at(serving).id) continue;
    best += 1.0;
    if (auto k = table.index_for(snr[arg])) hits[*k] += 1.0;
    else outage += 1.0;
  }
  McsDistribution d;
  d.serve_probability = best / static_cast<double>(samples);
  d.outage = best > 0.0 ? outage / best : 0.0;
  d.p.assign(K, 0.0);
  const double inside = best - outage;
  if (inside > 0.0)
    for (std::size_t k = 0; k < K; ++k) d.p[k] = hits[k] / inside;
  return d;
}

/// Rate of entry k as seen by a user of demand `d`: the whole RBs it
/// occupies carry exactly d. Zero demand keeps the nominal rate.
inline double effective_rate(const McsEntry& e, double demand) {
  if (demand <= 0.0) return e.rate_per_rb;
  return demand / rb_demand(demand, e.rate_per_rb);
}

/// E[R] = sum_k P(k) R_k, with R_k nominal or demand-quantised.
inline double expected_rate(const McsDistribution& d, const McsTable& table, double demand = 0.0) {
  double r = 0.0;
  for (std::size_t k = 0; k < d.p.size(); ++k) r += d.p[k] * effective_rate(table[k], demand);
  return r;
}

struct ExpectedRates {
  std::vector<double> r;      // E[R_i], i = 0..N
  std::vector<double> r_via0; // E[R_i^0], index 0 holds E[R_0]
  double r_tot = 0.0;         // E[R_TOT]
};

/// E[R_TOT] = sum_{i>0} a_i E[R_i] / (1 - a_0); zero when a_0 = 1.
inline double expected_rate_total(const std::vector<double>& a, const std::vector<double>& r) {
  if (a.empty() || a[0] >= 1.0) return 0.0;
  double s = 0.0;
  for (std::size_t i = 1; i < a.size(); ++i) s += a[i] * r[i];
  return s / (1.0 - a[0]);
}

/// Per-layer expected rates of one deployment.
inline ExpectedRates expected_rates(const Deployment& dep, const std::vector<double>& a, const ChannelModel& ch,
                                    const McsTable& table, double demand = 0.0, int points = kDefaultAreaPoints) {
  ExpectedRates out;
  const int n = dep.small_cell_count();
  out.r.assign(n + 1, 0.0);
  out.r_via0.assign(n + 1, 0.0);
  for (int i = 0; i <= n; ++i) {
    const auto area = layer_area(dep, i);
    out.r[i] = expected_rate(mcs_probability(area, i, dep.stations, ch, table, points), table, demand);
    out.r_via0[i] = i == 0 ? out.r[0]
                           : expected_rate(mcs_probability_via_macro(area, dep.macro(), ch, table, points), table,
                                           demand);
  }
  out.r_tot = expected_rate_total(a, out.r);
  return out;
}

}  // namespace renev::analysis
