#pragma once

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <exception>
#include <functional>
#include <cmath>
#include <cstdint>
#include <map>
#include <mutex>
#include <numeric>
#include <optional>
#include <ostream>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "renev/algorithm.hpp"
#include "renev/analysis/mcs.hpp"
#include "renev/analysis/states.hpp"
#include "renev/analysis/throughput.hpp"
#include "renev/error.hpp"
#include "renev/ledger.hpp"
#include "renev/log.hpp"
#include "renev/radio.hpp"
#include "renev/scenario.hpp"
#include "renev/signaling.hpp"
#include "renev/slicing.hpp"

namespace renev {

/// When a small cell short of RBs starts a negotiation.
enum class TriggerMode {
  PerStation,    ///< after the arrival pass, once per short cell for its whole shortfall
  PerAdmission,  ///< at every rejected admission, for that user's shortfall
};

/// Where P_o comes from in the per-deployment closed forms.
enum class OverlapSource { Realized, Formula };

struct RunConfig {
  ScenarioConfig scenario;
  ChannelModel channel;
  McsTable mcs = default_mcs_table();
  SliceScheme scheme = SliceScheme::prr(1.0);
  bool renev = true;
  RenevParams renev_params;
  TriggerMode trigger = TriggerMode::PerStation;
  bool partial_retry = true;   // per-station mode: retry once for what the best responder can spare
  std::vector<double> loads;  // offered load points, bit/s
  int iterations = 1000;
  std::uint64_t seed = 1;
  int jobs = 0;  // 0 = hardware concurrency
  bool check_invariants = true;
  bool with_analysis = false;
  int analysis_points = 256;
  OverlapSource overlap_source = OverlapSource::Realized;

  void validate() const {
    scenario.validate();
    channel.validate();
    scheme.validate();
    if (iterations < 1) throw ConfigError("run: iterations must be >= 1");
    if (renev_params.donor_floor < 0) throw ConfigError("run: donor_floor must be >= 0");
    for (double l : loads)
      if (!(l >= 0.0)) throw ConfigError("run: offered loads must be >= 0");
    if (jobs < 0) throw ConfigError("run: jobs must be >= 0");
    if (analysis_points < 1) throw ConfigError("run: analysis_points must be >= 1");
  }

  /// X for an offered load: load / d rounded to the nearest user.
  int users_for(double load) const {
    return static_cast<int>(std::lround(load / scenario.per_user_demand));
  }
};

// Seeds ---------------------------------------------------------------------

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

/// Seeds of one iteration. Geometry depends on the iteration only, so every
/// load point and every scheme sees the same cluster for a given iteration.
struct IterationSeeds {
  std::uint64_t stations = 0;
  std::uint64_t users = 0;
  std::uint64_t channel = 0;
  std::uint64_t order = 0;
};

inline IterationSeeds iteration_seeds(std::uint64_t base, std::size_t load_index, std::size_t iteration) {
  const std::uint64_t it = splitmix64(base ^ splitmix64(0x5157A7E5ull + iteration));
  const std::uint64_t li = splitmix64(it ^ splitmix64(0x10ADull + load_index));
  return {splitmix64(it + 1), splitmix64(li + 2), splitmix64(li + 3), splitmix64(li + 4)};
}

// One iteration ---------------------------------------------------------------

struct IterationResult {
  std::uint64_t iteration = 0;
  int users = 0;
  double offered = 0.0;
  double served = 0.0;
  double served_by_small = 0.0;
  double served_by_macro = 0.0;
  int served_users = 0;
  int blocked_users = 0;
  int outage_users = 0;
  std::vector<double> user_rates;  // d if served, 0 otherwise
  double transferred_small_pct = 0.0;
  double transferred_macro_pct = 0.0;
  MessageCounts messages;
  bool formula_holds = true;
  std::optional<std::string> invariant_violation;
  // Association and per-station observations.
  std::vector<int> associated;             // users whose best station is i
  std::vector<double> rate_sum;            // nominal per-RB rate over associated users
  std::vector<double> effective_rate_sum;  // demand-quantised per-RB rate
  std::vector<int> demand_rbs;             // u_i before any negotiation
  std::vector<int> availability;           // RB_i - u_i
  std::vector<int> availability_after_sc;  // after the small-cell transfers only
  int macro_spare = 0;                     // RB_0 minus its own users' demand, >= 0
  double realized_overlap = 0.0;           // fraction of overlapping small-cell pairs
  // Closed forms on this deployment, when requested.
  double analytic_t_r = 0.0;
  double analytic_t_nr = 0.0;
};

namespace detail {

struct UserLink {
  int best = -1;                       // -1: outage everywhere
  std::optional<McsEntry> serving;     // at `best`
  std::optional<McsEntry> via_macro;   // at the macro
};

/// Keeps credits in order until `limit` RBs are covered.
inline std::vector<std::pair<int, int>> truncate_credits(const std::vector<std::pair<int, int>>& credits, int limit) {
  std::vector<std::pair<int, int>> out;
  for (auto [p, c] : credits) {
    if (limit <= 0) break;
    const int take = std::min(c, limit);
    out.emplace_back(p, take);
    limit -= take;
  }
  return out;
}

inline double realized_overlap_fraction(const Deployment& dep) {
  const int n = dep.small_cell_count();
  if (n < 2) return 0.0;
  int hits = 0, pairs = 0;
  for (int i = 1; i <= n; ++i)
    for (int j = i + 1; j <= n; ++j) {
      ++pairs;
      if (overlaps(dep.stations[i], dep.stations[j])) ++hits;
    }
  return static_cast<double>(hits) / pairs;
}

}  // namespace detail

/// Cache of per-deployment expected rates, keyed by iteration.
class RateCache {
 public:
  explicit RateCache(std::size_t iterations = 0) : slots_(iterations) {}
  std::optional<analysis::ExpectedRates>& slot(std::size_t it) { return slots_.at(it); }

 private:
  std::vector<std::optional<analysis::ExpectedRates>> slots_;
};

/// Runs one admission batch on a fixed deployment.
inline IterationResult simulate_deployment(const RunConfig& cfg, const Deployment& dep,
                                           std::uint64_t channel_seed, std::uint64_t order_seed,
                                           MessageLog* log_out = nullptr, ResourceLedger* ledger_out = nullptr) {
  const int n = dep.small_cell_count();
  const int stations = n + 1;
  const double d = dep.config.per_user_demand;
  IterationResult res;
  res.users = static_cast<int>(dep.users.size());
  res.offered = res.users * d;
  res.associated.assign(stations, 0);
  res.rate_sum.assign(stations, 0.0);
  res.effective_rate_sum.assign(stations, 0.0);
  res.demand_rbs.assign(stations, 0);
  res.realized_overlap = detail::realized_overlap_fraction(dep);

  // Channel and association.
  std::mt19937_64 chan(channel_seed);
  std::normal_distribution<double> unit(0.0, 1.0);
  std::vector<detail::UserLink> links(dep.users.size());
  for (std::size_t u = 0; u < dep.users.size(); ++u) {
    double best_snr = -std::numeric_limits<double>::infinity();
    double macro_snr = 0.0;
    int best = -1;
    for (const auto& bs : dep.stations) {
      const double snr =
          compute_snr(bs, dep.users[u].position, cfg.channel.shadow_sigma(bs.tier) * unit(chan), cfg.channel);
      if (bs.tier == Tier::Macro) macro_snr = snr;
      if (snr > best_snr) {
        best_snr = snr;
        best = bs.id;
      }
    }
    auto& l = links[u];
    l.serving = select_mcs(best_snr, cfg.mcs);
    l.via_macro = select_mcs(macro_snr, cfg.mcs);
    if (l.serving) {
      l.best = best;
      ++res.associated[best];
      res.rate_sum[best] += l.serving->rate_per_rb;
      res.effective_rate_sum[best] += analysis::effective_rate(*l.serving, d);
      res.demand_rbs[best] += rb_demand(d, l.serving->rate_per_rb);
    } else {
      ++res.outage_users;
    }
  }

  // Arrival order and slices.
  std::mt19937_64 ord(order_seed);
  std::uniform_int_distribution<int> pick_slice(0, cfg.scheme.slice_count - 1);
  std::vector<int> slice(dep.users.size());
  for (auto& s : slice) s = pick_slice(ord);
  std::vector<int> order(dep.users.size());
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), ord);

  ResourceLedger ledger(dep, cfg.scheme.partition_count());
  apply_scheme(ledger, cfg.scheme);
  MessageLog log;

  res.availability.assign(stations, 0);
  for (int i = 0; i < stations; ++i) res.availability[i] = ledger.initial_count(i) - res.demand_rbs[i];
  res.macro_spare = std::max(0, res.availability[0]);

  std::vector<char> served(dep.users.size(), 0);
  std::vector<char> on_macro(dep.users.size(), 0);
  auto try_admit = [&](int u, int station, const McsEntry& mcs) -> std::optional<Rejection> {
    const auto r = admit(ledger, station, u, rb_demand(d, mcs.rate_per_rb), slice[u], cfg.scheme);
    if (const auto* rej = std::get_if<Rejection>(&r)) return *rej;
    served[u] = 1;
    on_macro[u] = station == 0;
    return std::nullopt;
  };

  std::vector<int> fallback;
  auto shortfall_credits = [&](int station, const std::vector<int>& users) {
    std::vector<std::pair<int, int>> credits;
    const auto& parts = ledger.station(station).partitions;
    const int shared = cfg.scheme.shared_partition();
    std::vector<int> need(cfg.scheme.slice_count, 0);
    for (int u : users) need[slice[u]] += rb_demand(d, links[u].serving->rate_per_rb);
    if (cfg.scheme.kind == SliceKind::Nvs) {
      for (int k = 0; k < cfg.scheme.slice_count; ++k) {
        const int gap = need[k] - parts[k].free();
        if (gap > 0) credits.emplace_back(k, gap);
      }
    } else {
      int beyond = 0;
      for (int k = 0; k < cfg.scheme.slice_count; ++k) beyond += std::max(0, need[k] - parts[k].free());
      const int gap = beyond - parts[shared].free();
      if (gap > 0) credits.emplace_back(shared, gap);
    }
    return credits;
  };

  // Small-cell-only view of availability, for the empirical kernel.
  std::vector<int> sc_gain(stations, 0);
  auto note_transfer = [&](const TransferRecord& rec) {
    if (rec.donor != 0) {
      sc_gain[rec.donor] -= static_cast<int>(rec.rb_ids.size());
      sc_gain[rec.recipient] += static_cast<int>(rec.rb_ids.size());
    }
  };

  std::map<int, std::vector<int>> pending;
  std::vector<int> pending_order;
  for (int u : order) {
    const auto& l = links[u];
    if (l.best < 0) continue;
    auto rej = try_admit(u, l.best, *l.serving);
    if (!rej) continue;
    if (l.best == 0) continue;  // macro users have nowhere else to go
    if (!cfg.renev) {
      fallback.push_back(u);
      continue;
    }
    if (cfg.trigger == TriggerMode::PerAdmission) {
      const auto credits = shortfall_credits(l.best, {u});
      if (!credits.empty()) {
        const auto out = trigger_renev(ledger, l.best, credits, log, cfg.renev_params);
        if (out.record) note_transfer(*out.record);
        if (out.succeeded() && !try_admit(u, l.best, *l.serving)) continue;
      }
      fallback.push_back(u);
    } else {
      if (!pending.count(l.best)) pending_order.push_back(l.best);
      pending[l.best].push_back(u);
    }
  }

  for (int station : pending_order) {
    const auto& users = pending[station];
    const auto credits = shortfall_credits(station, users);
    bool ok = credits.empty();
    if (!ok) {
      const auto out = trigger_renev(ledger, station, credits, log, cfg.renev_params);
      if (out.record) note_transfer(*out.record);
      ok = out.succeeded();
      if (!ok && cfg.partial_retry) {
        // One more round for what the best responder said it could spare.
        int best = 0;
        for (int j : out.detection.polled) best = std::max(best, ledger.spare_for(j, station));
        const auto cut = detail::truncate_credits(credits, best - cfg.renev_params.donor_floor);
        if (!cut.empty()) {
          const auto again = trigger_renev(ledger, station, cut, log, cfg.renev_params);
          if (again.record) note_transfer(*again.record);
          ok = again.succeeded();
        }
      }
    }
    for (int u : users) {
      if (ok && !try_admit(u, station, *links[u].serving)) continue;
      fallback.push_back(u);
    }
  }

  // Users the small cells could not take try the macro with its own MCS.
  for (int u : fallback) {
    if (links[u].via_macro) try_admit(u, 0, *links[u].via_macro);
  }

  for (int i = 1; i < stations; ++i) ledger.revert(i);
  if (cfg.check_invariants) res.invariant_violation = ledger.check_invariants();

  res.availability_after_sc.assign(stations, 0);
  for (int i = 1; i < stations; ++i) res.availability_after_sc[i] = res.availability[i] + sc_gain[i];
  res.availability_after_sc[0] = res.availability[0];

  res.user_rates.resize(dep.users.size());
  for (std::size_t u = 0; u < dep.users.size(); ++u) {
    res.user_rates[u] = served[u] ? d : 0.0;
    if (served[u]) {
      ++res.served_users;
      res.served += d;
      (on_macro[u] ? res.served_by_macro : res.served_by_small) += d;
    } else {
      ++res.blocked_users;
    }
  }

  int lent_small = 0, lent_macro = 0;
  for (int i = 0; i < stations; ++i) {
    if (i == 0) lent_macro += ledger.lent_count(0);
    else lent_small += ledger.lent_count(i);
  }
  const int band = dep.config.rb_count_per_tier;
  res.transferred_small_pct = 100.0 * lent_small / ledger.small_band_total();
  res.transferred_macro_pct = 100.0 * lent_macro / band;

  res.messages = count_messages(log, n);
  res.formula_holds = res.messages.total == res.messages.formula(n);
  if (log_out) *log_out = std::move(log);
  if (ledger_out) *ledger_out = std::move(ledger);
  return res;
}

/// Closed forms of both throughput bounds on one iteration's deployment,
/// with the realised user count and association shares.
inline analysis::ThroughputReport analytic_bounds(const RunConfig& cfg, const Deployment& dep,
                                                  const IterationResult& res, const analysis::ExpectedRates& rates) {
  const int stations = dep.small_cell_count() + 1;
  analysis::ThroughputInputs in;
  const int assoc_total = std::accumulate(res.associated.begin(), res.associated.end(), 0);
  in.users = assoc_total;
  in.demand = dep.config.per_user_demand;
  in.a.assign(stations, 0.0);
  if (assoc_total > 0)
    for (int i = 0; i < stations; ++i) in.a[i] = static_cast<double>(res.associated[i]) / assoc_total;
  in.rate = rates.r;
  in.rate_via_macro = rates.r_via0;
  in.rb.resize(stations);
  for (int i = 0; i < stations; ++i) in.rb[i] = dep.stations[i].initial_rb_count;
  in.p_overlap = cfg.overlap_source == OverlapSource::Realized
                     ? res.realized_overlap
                     : analysis::overlap_probability(dep.config.sc_radius, dep.config.sc_radius,
                                                     dep.config.cluster_radius);
  return analysis::throughput_with_renev(in);
}

inline Deployment iteration_deployment(const RunConfig& cfg, double load, const IterationSeeds& seeds) {
  ScenarioConfig sc = cfg.scenario;
  sc.user_count = cfg.users_for(load);
  sc.rng_seed = seeds.stations;
  return generate_deployment(sc, seeds.stations, seeds.users);
}

inline IterationResult run_iteration(const RunConfig& cfg, std::size_t load_index, std::size_t iteration,
                                     RateCache* cache = nullptr, MessageLog* log_out = nullptr) {
  const double load = cfg.loads.at(load_index);
  const auto seeds = iteration_seeds(cfg.seed, load_index, iteration);
  try {
    const auto dep = iteration_deployment(cfg, load, seeds);
    auto res = simulate_deployment(cfg, dep, seeds.channel, seeds.order, log_out);
    res.iteration = iteration;
    if (cfg.with_analysis) {
      std::optional<analysis::ExpectedRates> local;
      auto& slot = cache ? cache->slot(iteration) : local;
      if (!slot) {
        const std::vector<double> a_dummy(dep.stations.size(), 0.0);
        slot = analysis::expected_rates(dep, a_dummy, cfg.channel, cfg.mcs, dep.config.per_user_demand,
                                        cfg.analysis_points);
      }
      const auto rep = analytic_bounds(cfg, dep, res, *slot);
      res.analytic_t_r = rep.t_r;
      res.analytic_t_nr = rep.t_nr;
    }
    return res;
  } catch (const Error& e) {
    const std::string where = "iteration " + std::to_string(iteration) + " at load " + std::to_string(load) + ": ";
    if (dynamic_cast<const CapacityError*>(&e)) throw CapacityError(where + e.what());
    if (dynamic_cast<const ConfigError*>(&e)) throw ConfigError(where + e.what());
    if (dynamic_cast<const ContractViolation*>(&e)) throw ContractViolation(where + e.what());
    throw Error(where + e.what());
  }
}

// Campaign --------------------------------------------------------------------

struct MeanCi {
  double mean = 0.0;
  double ci95 = 0.0;  // half-width, normal approximation
};

inline MeanCi mean_ci(const std::vector<double>& v) {
  MeanCi m;
  if (v.empty()) return m;
  m.mean = std::accumulate(v.begin(), v.end(), 0.0) / v.size();
  if (v.size() < 2) return m;
  double ss = 0.0;
  for (double x : v) ss += (x - m.mean) * (x - m.mean);
  m.ci95 = 1.96 * std::sqrt(ss / (v.size() - 1) / v.size());
  return m;
}

struct LoadPointMetrics {
  double offered = 0.0;  // bit/s
  int users = 0;
  int iterations = 0;
  MeanCi throughput;
  MeanCi served_small;
  MeanCi served_macro;
  MeanCi transferred_small_pct;
  MeanCi transferred_macro_pct;
  double success_pct = 0.0;  // pooled successes / pooled requests
  double success_ci95 = 0.0;
  MeanCi messages_per_sc;
  MeanCi requests;
  MeanCi macro_polls;
  MeanCi successes;
  MeanCi analytic_t_r;
  MeanCi analytic_t_nr;
  int formula_mismatches = 0;
  int invariant_failures = 0;
  std::string first_invariant_failure;
  std::map<double, std::uint64_t> rate_histogram;  // user rate -> count
  std::vector<double> mean_rate_per_station;        // measured nominal per-RB rate
  std::vector<double> mean_effective_rate_per_station;
};

struct MetricsReport {
  std::string scheme;
  bool renev = false;
  int n_small_cells = 0;
  std::vector<LoadPointMetrics> points;
};

inline LoadPointMetrics aggregate(double offered, int users, const std::vector<IterationResult>& runs) {
  LoadPointMetrics m;
  m.offered = offered;
  m.users = users;
  m.iterations = static_cast<int>(runs.size());
  std::vector<double> t, ss, sm, ps, pm, msg, req, mp, suc, atr, atnr;
  double req_total = 0.0, suc_total = 0.0;
  const std::size_t stations = runs.empty() ? 0 : runs.front().associated.size();
  std::vector<double> rs(stations, 0.0), ers(stations, 0.0), cnt(stations, 0.0);
  for (const auto& r : runs) {
    t.push_back(r.served);
    ss.push_back(r.served_by_small);
    sm.push_back(r.served_by_macro);
    ps.push_back(r.transferred_small_pct);
    pm.push_back(r.transferred_macro_pct);
    msg.push_back(r.messages.per_small_cell);
    req.push_back(static_cast<double>(r.messages.requests));
    mp.push_back(static_cast<double>(r.messages.macro_polls));
    suc.push_back(static_cast<double>(r.messages.successes));
    atr.push_back(r.analytic_t_r);
    atnr.push_back(r.analytic_t_nr);
    req_total += r.messages.requests;
    suc_total += r.messages.successes;
    if (!r.formula_holds) ++m.formula_mismatches;
    if (r.invariant_violation) {
      if (m.invariant_failures == 0) m.first_invariant_failure = *r.invariant_violation;
      ++m.invariant_failures;
    }
    for (double x : r.user_rates) ++m.rate_histogram[x];
    for (std::size_t i = 0; i < stations && i < r.rate_sum.size(); ++i) {
      rs[i] += r.rate_sum[i];
      ers[i] += r.effective_rate_sum[i];
      cnt[i] += r.associated[i];
    }
  }
  m.throughput = mean_ci(t);
  m.served_small = mean_ci(ss);
  m.served_macro = mean_ci(sm);
  m.transferred_small_pct = mean_ci(ps);
  m.transferred_macro_pct = mean_ci(pm);
  m.messages_per_sc = mean_ci(msg);
  m.requests = mean_ci(req);
  m.macro_polls = mean_ci(mp);
  m.successes = mean_ci(suc);
  m.analytic_t_r = mean_ci(atr);
  m.analytic_t_nr = mean_ci(atnr);
  if (req_total > 0.0) {
    const double p = suc_total / req_total;
    m.success_pct = 100.0 * p;
    m.success_ci95 = 100.0 * 1.96 * std::sqrt(p * (1.0 - p) / req_total);
  }
  m.mean_rate_per_station.assign(stations, 0.0);
  m.mean_effective_rate_per_station.assign(stations, 0.0);
  for (std::size_t i = 0; i < stations; ++i)
    if (cnt[i] > 0.0) {
      m.mean_rate_per_station[i] = rs[i] / cnt[i];
      m.mean_effective_rate_per_station[i] = ers[i] / cnt[i];
    }
  return m;
}

inline int resolve_jobs(int jobs) {
  if (jobs > 0) return jobs;
  const unsigned hc = std::thread::hardware_concurrency();
  return hc == 0 ? 1 : static_cast<int>(hc);
}

/// Calls `fn(i)` for i in [0, count) on up to `jobs` threads; the first
/// exception is rethrown after all workers stop.
template <typename Fn>
void parallel_for(std::size_t count, int jobs, Fn&& fn) {
  const int workers = std::max(1, std::min<int>(resolve_jobs(jobs), static_cast<int>(count)));
  if (workers == 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (;;) {
        const std::size_t i = next.fetch_add(1);
        if (i >= count) return;
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(failure_mutex);
          if (!failure) failure = std::current_exception();
          next.store(count);
        }
      }
    });
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

/// Optional per-iteration sink, called from the single aggregating thread
/// in iteration order.
using IterationSink = std::function<void(std::size_t load_index, const IterationResult&, const MessageLog&)>;

inline MetricsReport run_campaign(const RunConfig& cfg, const IterationSink& sink = {}) {
  cfg.validate();
  MetricsReport rep;
  rep.scheme = cfg.scheme.name();
  rep.renev = cfg.renev;
  rep.n_small_cells = cfg.scenario.n_small_cells;
  RateCache cache(static_cast<std::size_t>(cfg.iterations));
  for (std::size_t li = 0; li < cfg.loads.size(); ++li) {
    std::vector<IterationResult> runs(cfg.iterations);
    std::vector<MessageLog> logs(sink ? cfg.iterations : 0);
    parallel_for(static_cast<std::size_t>(cfg.iterations), cfg.jobs, [&](std::size_t it) {
      runs[it] = run_iteration(cfg, li, it, &cache, sink ? &logs[it] : nullptr);
    });
    if (sink)
      for (std::size_t it = 0; it < runs.size(); ++it) sink(li, runs[it], logs[it]);
    rep.points.push_back(aggregate(cfg.loads[li], cfg.users_for(cfg.loads[li]), runs));
    log::info("load ", cfg.loads[li] / 1e6, " Mbps: T = ", rep.points.back().throughput.mean / 1e6, " Mbps");
  }
  return rep;
}

// Output ----------------------------------------------------------------------

inline constexpr const char* kMetricsCsvHeader =
    "scheme,renev,n_small_cells,offered_mbps,users,iterations,throughput_mbps,throughput_ci95,"
    "served_small_mbps,served_macro_mbps,transferred_small_pct,transferred_small_ci95,"
    "transferred_macro_pct,transferred_macro_ci95,success_pct,success_ci95,messages_per_sc,"
    "messages_per_sc_ci95,requests,macro_polls,successes,analytic_t_r_mbps,analytic_t_nr_mbps,"
    "formula_mismatches,invariant_failures\n";

inline void write_metrics_rows(std::ostream& os, const MetricsReport& rep) {
  char buf[1024];
  for (const auto& p : rep.points) {
    std::snprintf(buf, sizeof buf,
                  "%s,%d,%d,%.6g,%d,%d,%.6f,%.6f,%.6f,%.6f,%.4f,%.4f,%.4f,%.4f,%.4f,%.4f,%.4f,%.4f,%.4f,%.4f,%.4f,"
                  "%.6f,%.6f,%d,%d\n",
                  rep.scheme.c_str(), rep.renev ? 1 : 0, rep.n_small_cells, p.offered / 1e6, p.users, p.iterations,
                  p.throughput.mean / 1e6, p.throughput.ci95 / 1e6, p.served_small.mean / 1e6,
                  p.served_macro.mean / 1e6, p.transferred_small_pct.mean, p.transferred_small_pct.ci95,
                  p.transferred_macro_pct.mean, p.transferred_macro_pct.ci95, p.success_pct, p.success_ci95,
                  p.messages_per_sc.mean, p.messages_per_sc.ci95, p.requests.mean, p.macro_polls.mean,
                  p.successes.mean, p.analytic_t_r.mean / 1e6, p.analytic_t_nr.mean / 1e6, p.formula_mismatches,
                  p.invariant_failures);
    os << buf;
  }
}

inline constexpr const char* kCdfCsvHeader = "scheme,renev,offered_mbps,rate_kbps,cdf\n";

inline void write_cdf_rows(std::ostream& os, const MetricsReport& rep) {
  char buf[256];
  for (const auto& p : rep.points) {
    std::uint64_t total = 0;
    for (const auto& [r, c] : p.rate_histogram) total += c;
    std::uint64_t acc = 0;
    for (const auto& [r, c] : p.rate_histogram) {
      acc += c;
      std::snprintf(buf, sizeof buf, "%s,%d,%.6g,%.3f,%.6f\n", rep.scheme.c_str(), rep.renev ? 1 : 0,
                    p.offered / 1e6, r / 1e3, total ? static_cast<double>(acc) / total : 0.0);
      os << buf;
    }
  }
}

inline nlohmann::json to_json(const MeanCi& m) { return {{"mean", m.mean}, {"ci95", m.ci95}}; }

inline nlohmann::json to_json(const MetricsReport& rep) {
  auto pts = nlohmann::json::array();
  for (const auto& p : rep.points) {
    pts.push_back({{"offered", p.offered},
                   {"users", p.users},
                   {"iterations", p.iterations},
                   {"throughput", to_json(p.throughput)},
                   {"served_small", to_json(p.served_small)},
                   {"served_macro", to_json(p.served_macro)},
                   {"transferred_small_pct", to_json(p.transferred_small_pct)},
                   {"transferred_macro_pct", to_json(p.transferred_macro_pct)},
                   {"success_pct", p.success_pct},
                   {"success_ci95", p.success_ci95},
                   {"messages_per_sc", to_json(p.messages_per_sc)},
                   {"requests", to_json(p.requests)},
                   {"macro_polls", to_json(p.macro_polls)},
                   {"successes", to_json(p.successes)},
                   {"analytic_T_R", to_json(p.analytic_t_r)},
                   {"analytic_T_NR", to_json(p.analytic_t_nr)},
                   {"formula_mismatches", p.formula_mismatches},
                   {"invariant_failures", p.invariant_failures},
                   {"mean_rate_per_station", p.mean_rate_per_station},
                   {"mean_effective_rate_per_station", p.mean_effective_rate_per_station}});
  }
  return {{"scheme", rep.scheme}, {"renev", rep.renev}, {"n_small_cells", rep.n_small_cells}, {"points", pts}};
}

}  // namespace renev
