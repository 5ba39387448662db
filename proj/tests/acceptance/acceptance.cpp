// One PASS/FAIL line per acceptance criterion. Lines starting with '#' carry
// the measured values behind each verdict.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "renev/renev.hpp"

using namespace renev;

namespace {

int iterations_from_env() {
  if (const char* s = std::getenv("RENEV_ACCEPTANCE_ITERATIONS")) return std::max(1, std::atoi(s));
  return 1000;
}

struct Verdicts {
  int failed = 0;
  void line(int id, const std::string& name, bool pass, const std::string& detail) {
    std::printf("%s criterion-%d %s %s\n", pass ? "PASS" : "FAIL", id, name.c_str(), detail.c_str());
    std::fflush(stdout);
    failed += !pass;
  }
};

void note(const char* fmt, auto... args) {
  std::printf("# ");
  std::printf(fmt, args...);
  std::printf("\n");
  std::fflush(stdout);
}

std::string fmt(const char* f, auto... args) {
  char buf[1024];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

const LoadPointMetrics& at_load(const MetricsReport& rep, double mbps) {
  for (const auto& p : rep.points)
    if (std::abs(p.offered - mbps * 1e6) < 1.0) return p;
  throw std::runtime_error("load point missing: " + std::to_string(mbps));
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

RunConfig table1(int iterations) {
  RunConfig c = load_config("", {}).run;
  c.iterations = iterations;
  return c;
}

}  // namespace

int main() {
  const int iters = iterations_from_env();
  Verdicts v;
  note("iterations per load point: %d", iters);

  // Table-1 sweep, PRR 100% with and without RENEV, closed forms alongside.
  auto t0 = std::chrono::steady_clock::now();
  RunConfig base = table1(iters);
  base.scheme = SliceScheme::prr(1.0);
  base.with_analysis = true;
  base.renev = false;
  const auto nr = run_campaign(base);
  base.renev = true;
  const auto r = run_campaign(base);
  note("PRR-100%% sweeps done in %.0f s", seconds_since(t0));

  // 1
  {
    double worst = 0.0;
    std::string where;
    for (const auto* rep : {&nr, &r}) {
      for (const auto& p : rep->points) {
        const double analytic = rep->renev ? p.analytic_t_r.mean : p.analytic_t_nr.mean;
        const double gap = relative_gap(analytic, p.throughput.mean);
        note("%s %5.1f Mbps: simulated %.3f analytic %.3f gap %.2f%%", rep->renev ? "renev+prr:1" : "prr:1",
             p.offered / 1e6, p.throughput.mean / 1e6, analytic / 1e6, 100 * gap);
        if (gap > worst) {
          worst = gap;
          where = fmt("%s@%.0f", rep->renev ? "renev+prr:1" : "prr:1", p.offered / 1e6);
        }
      }
    }
    v.line(1, "analysis_vs_simulation", worst <= 0.05,
           fmt("worst_gap=%.2f%% at %s limit=5%%", 100 * worst, where.c_str()));
  }

  // 2
  {
    const double t_r = at_load(r, 78).throughput.mean / 1e6;
    const double t_nr = at_load(nr, 78).throughput.mean / 1e6;
    const double gain = 100.0 * (t_r / t_nr - 1.0);
    const bool ok_t = std::abs(t_r - 60.93) <= 0.10 * 60.93;
    const bool ok_g = std::abs(gain - 50.68) <= 10.0;
    v.line(2, "saturation_78mbps", ok_t && ok_g,
           fmt("T_renev=%.2f Mbps (target 60.93 +-10%%) T_prr=%.2f gain=%.2f%% (target 50.68 +-10pp)", t_r, t_nr,
               gain));
  }

  // 3
  {
    t0 = std::chrono::steady_clock::now();
    RunConfig c = table1(iters);
    c.scheme = SliceScheme::nvs();
    c.renev = false;
    const auto rep = run_campaign(c);
    double best = 0.0, at = 0.0;
    for (const auto& p : rep.points)
      if (p.throughput.mean > best) {
        best = p.throughput.mean;
        at = p.offered;
      }
    best /= 1e6;
    note("NVS sweep done in %.0f s", seconds_since(t0));
    v.line(3, "nvs_plateau", std::abs(best - 23.19) <= 0.10 * 23.19,
           fmt("max=%.2f Mbps at %.0f Mbps offered (target 23.19 +-10%%)", best, at / 1e6));
  }

  // 4
  {
    auto peak = [&](auto field) {
      double best = -1.0, at = 0.0;
      for (const auto& p : r.points) {
        const double x = (p.*field).mean;
        if (x > best) {
          best = x;
          at = p.offered / 1e6;
        }
      }
      return std::make_pair(best, at);
    };
    const auto [sc, sc_at] = peak(&LoadPointMetrics::transferred_small_pct);
    const auto [mc, mc_at] = peak(&LoadPointMetrics::transferred_macro_pct);
    const bool ok = std::abs(sc - 32.2) <= 5 && std::abs(sc_at - 60) <= 6 && std::abs(mc - 32.64) <= 5 &&
                    std::abs(mc_at - 78) <= 6;
    v.line(4, "transfer_peaks", ok,
           fmt("sc_peak=%.2f%% at %.0f (target 32.2 at 60) enb_peak=%.2f%% at %.0f (target 32.64 at 78)", sc, sc_at,
               mc, mc_at));
  }

  // 5 and 6 share the N = 6 sweep; N = 10 needs its own.
  RunConfig ten = table1(iters);
  ten.scheme = SliceScheme::prr(1.0);
  ten.scenario.n_small_cells = 10;
  ten.loads = {42e6, 66e6, 78e6};
  t0 = std::chrono::steady_clock::now();
  const auto r10 = run_campaign(ten);
  note("N=10 sweep done in %.0f s", seconds_since(t0));
  {
    const double loads[] = {42, 66, 78};
    const double want6[] = {86.5, 80, 72}, want10[] = {77, 70, 61};
    bool ok = true;
    std::string d;
    for (int k = 0; k < 3; ++k) {
      const double s6 = at_load(r, loads[k]).success_pct, s10 = at_load(r10, loads[k]).success_pct;
      ok = ok && std::abs(s6 - want6[k]) <= 8 && std::abs(s10 - want10[k]) <= 8;
      d += fmt("%.0f:N6=%.1f(%.1f),N10=%.1f(%.1f) ", loads[k], s6, want6[k], s10, want10[k]);
    }
    v.line(5, "request_success", ok, d + "tolerance +-8pp");
  }
  {
    const double loads[] = {42, 66, 78};
    const double want[] = {8.5, 10.4, 12.4};
    bool ok = true;
    std::string d;
    for (int k = 0; k < 3; ++k) {
      const double m = at_load(r, loads[k]).messages_per_sc.mean;
      ok = ok && std::abs(m - want[k]) <= 0.15 * want[k];
      d += fmt("%.0f:%.2f(%.1f) ", loads[k], m, want[k]);
    }
    int mismatches = 0;
    for (const auto* rep : {&r, &r10})
      for (const auto& p : rep->points) mismatches += p.formula_mismatches;
    v.line(6, "messages_per_sc", ok && mismatches == 0,
           d + fmt("tolerance +-15%% formula_mismatches=%d", mismatches));
  }

  // 7
  {
    t0 = std::chrono::steady_clock::now();
    std::vector<std::string> failed;
    std::string d;

    const auto seq = oracles::random_event_sequences(10000, 7);
    if (!seq.failure.empty()) failed.push_back("sequences(" + seq.failure + ")");
    d += fmt("sequences=%d transfers=%d ", seq.sequences, seq.transfers);

    int states = 0, mism = 0;
    for (int n = 1; n <= 3; ++n)
      for (const auto& sn : oracles::all_states(-2, 3, n)) {
        auto got = analysis::feasible_states(sn);
        auto want = oracles::feasible_by_enumeration(sn);
        std::sort(got.begin(), got.end());
        std::sort(want.begin(), want.end());
        ++states;
        mism += got != want;
      }
    if (mism) failed.push_back("feasible_states");
    d += fmt("feasible_states=%d/%d ", states - mism, states);

    RunConfig two = table1(1);
    two.scenario.n_small_cells = 2;
    const auto mcs = check_mcs_vs_sampling(two, 1000000, 1e-2);
    if (!mcs.pass) failed.push_back("mcs");
    d += fmt("mcs_max_err=%.2e ", mcs.measured);

    const double p_o = analysis::overlap_probability(25, 25, two.scenario.cluster_radius);
    double worst_tv = 0.0;
    int wn = 0, wm = 0;
    for (int n = 1; n <= 6; ++n)
      for (int m = 1; m <= n; ++m) {
        const double tv = oracles::total_variation(analysis::p_q_groups(n, m, p_o),
                                                   oracles::geometric_q_distribution(n, m, p_o, 200000, 100 + n * 7 + m));
        note("Q distribution N=%d M=%d P_o=%.3f TV=%.4f", n, m, p_o, tv);
        if (tv > worst_tv) {
          worst_tv = tv;
          wn = n;
          wm = m;
        }
      }
    if (worst_tv > 2e-2) failed.push_back("q_groups");
    d += fmt("q_tv_max=%.4f(N=%d,M=%d) ", worst_tv, wn, wm);

    const auto enb = check_enb_share(20, 1e-9);
    if (!enb.pass) failed.push_back("enb_share");
    d += fmt("enb_share_err=%.1e", enb.measured);

    std::string which;
    for (const auto& f : failed) which += (which.empty() ? "" : ",") + f;
    note("property suites done in %.0f s", seconds_since(t0));
    v.line(7, "property_suites", failed.empty(), d + (failed.empty() ? "" : " failed=" + which));
  }

  // 8
  {
    t0 = std::chrono::steady_clock::now();
    std::mt19937_64 rng(8);
    const int per_config = std::max(1, std::min(iters, 20));
    int points = 0, analytic_bad = 0, sim_bad = 0;
    for (int k = 0; k < 50; ++k) {
      RunConfig c = table1(per_config);
      c.scenario.n_small_cells = std::uniform_int_distribution<int>(2, 10)(rng);
      c.scenario.cluster_radius = std::uniform_real_distribution<double>(50, 200)(rng);
      const int kind = std::uniform_int_distribution<int>(0, 2)(rng);
      c.scheme = kind == 0 ? SliceScheme::nvs() : SliceScheme::prr(kind == 1 ? 0.5 : 1.0);
      c.renev_params.donor_floor = std::uniform_int_distribution<int>(0, 2)(rng);
      c.seed = rng();
      c.loads.clear();
      for (int l = 0; l < 3; ++l) c.loads.push_back(6e6 * std::uniform_int_distribution<int>(3, 16)(rng));
      std::sort(c.loads.begin(), c.loads.end());
      c.loads.erase(std::unique(c.loads.begin(), c.loads.end()), c.loads.end());
      c.with_analysis = true;
      c.analysis_points = 64;
      c.renev = false;
      const auto off = run_campaign(c);
      c.renev = true;
      const auto on = run_campaign(c);
      for (std::size_t i = 0; i < on.points.size(); ++i) {
        ++points;
        const auto& a = on.points[i];
        const auto& b = off.points[i];
        if (a.analytic_t_r.mean < a.analytic_t_nr.mean * (1 - 1e-9)) {
          ++analytic_bad;
          note("analytic dominance violated: config %d (%s, N=%d, rc=%.0f) %.0f Mbps T_R=%.3f T_NR=%.3f", k,
               c.scheme.name().c_str(), c.scenario.n_small_cells, c.scenario.cluster_radius, a.offered / 1e6,
               a.analytic_t_r.mean / 1e6, a.analytic_t_nr.mean / 1e6);
        }
        if (a.throughput.mean < b.throughput.mean * (1 - 1e-9)) {
          ++sim_bad;
          note("simulated dominance violated: config %d (%s, N=%d, rc=%.0f) %.0f Mbps renev=%.3f none=%.3f", k,
               c.scheme.name().c_str(), c.scenario.n_small_cells, c.scenario.cluster_radius, a.offered / 1e6,
               a.throughput.mean / 1e6, b.throughput.mean / 1e6);
        }
      }
    }
    note("dominance sweep done in %.0f s (%d iterations per point)", seconds_since(t0), per_config);
    v.line(8, "dominance", analytic_bad == 0 && sim_bad == 0,
           fmt("configs=50 points=%d analytic_violations=%d simulated_violations=%d", points, analytic_bad, sim_bad));
  }

  note("%d of 8 criteria failed", v.failed);
  return v.failed == 0 ? 0 : 1;
}
