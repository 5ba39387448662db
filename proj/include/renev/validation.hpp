#pragma once

#include <cmath>
#include <cstdio>
#include <random>
#include <string>
#include <vector>

#include "renev/analysis/mcs.hpp"
#include "renev/analysis/throughput.hpp"
#include "renev/config.hpp"
#include "renev/montecarlo.hpp"

namespace renev {

struct CheckResult {
  std::string name;
  bool pass = false;
  double measured = 0.0;
  double limit = 0.0;
  std::string detail;
};

inline std::string format_check(const CheckResult& c) {
  char buf[512];
  std::snprintf(buf, sizeof buf, "%s %s measured=%.6g limit=%.6g%s%s", c.pass ? "PASS" : "FAIL", c.name.c_str(),
                c.measured, c.limit, c.detail.empty() ? "" : " ", c.detail.c_str());
  return buf;
}

inline double relative_gap(double a, double b) {
  const double den = std::max(std::abs(a), std::abs(b));
  return den > 0.0 ? std::abs(a - b) / den : 0.0;
}

/// Analytical bound vs campaign mean, per load point, for one PRR run.
struct AnalysisComparison {
  std::vector<CheckResult> checks;
  std::vector<MetricsReport> reports;  // without, then with RENEV
};

inline AnalysisComparison check_analysis_vs_simulation(const RunConfig& base, double tolerance) {
  AnalysisComparison res;
  auto& out = res.checks;
  for (bool renev : {false, true}) {
    RunConfig cfg = base;
    cfg.renev = renev;
    cfg.with_analysis = true;
    const auto rep = run_campaign(cfg);
    for (const auto& p : rep.points) {
      const double sim = p.throughput.mean;
      const double ana = renev ? p.analytic_t_r.mean : p.analytic_t_nr.mean;
      CheckResult c;
      char name[128];
      std::snprintf(name, sizeof name, "analysis_vs_sim[%s%s,%gMbps]", renev ? "renev+" : "", rep.scheme.c_str(),
                    p.offered / 1e6);
      c.name = name;
      c.measured = sim > 0.0 ? std::abs(ana - sim) / sim : 0.0;
      c.limit = tolerance;
      c.pass = c.measured <= tolerance;
      char det[128];
      std::snprintf(det, sizeof det, "analytic=%.4f sim=%.4f Mbps", ana / 1e6, sim / 1e6);
      c.detail = det;
      out.push_back(c);
    }
    res.reports.push_back(rep);
  }
  return res;
}

/// Closed-form MCS distribution against position-and-shadowing sampling on
/// one deployment; the measure is the worst per-component gap.
inline CheckResult check_mcs_vs_sampling(const RunConfig& cfg, std::size_t samples, double limit) {
  ScenarioConfig sc = cfg.scenario;
  sc.user_count = 0;
  const auto dep = generate_deployment(sc, splitmix64(cfg.seed), splitmix64(cfg.seed + 1));
  std::mt19937_64 rng(splitmix64(cfg.seed + 2));
  double worst = 0.0;
  for (int i = 0; i < static_cast<int>(dep.stations.size()); ++i) {
    const auto area = analysis::layer_area(dep, i);
    const auto a = analysis::mcs_probability(area, i, dep.stations, cfg.channel, cfg.mcs, 2048);
    const auto b = analysis::sample_mcs_distribution(area, i, dep.stations, cfg.channel, cfg.mcs, samples, rng);
    if (b.serve_probability * samples < 1000.0) continue;  // too few hits to compare
    for (std::size_t k = 0; k < a.p.size(); ++k) worst = std::max(worst, std::abs(a.p[k] - b.p[k]));
  }
  return {"mcs_closed_form_vs_sampling", worst <= limit, worst, limit, ""};
}

inline CheckResult check_message_formula(const MetricsReport& rep) {
  int bad = 0;
  for (const auto& p : rep.points) bad += p.formula_mismatches;
  return {"message_count_formula", bad == 0, static_cast<double>(bad), 0.0, "iterations with a mismatch"};
}

inline CheckResult check_invariants(const MetricsReport& rep) {
  int bad = 0;
  std::string first;
  for (const auto& p : rep.points) {
    if (p.invariant_failures > 0 && first.empty()) first = p.first_invariant_failure;
    bad += p.invariant_failures;
  }
  return {"ledger_invariants", bad == 0, static_cast<double>(bad), 0.0, first};
}

inline CheckResult check_enb_share(int max_n, double limit) {
  double worst = 0.0;
  for (int n = 1; n <= max_n; ++n)
    for (double p : {0.0, 0.01, 0.1, 0.25, 0.5, 0.9, 1.0})
      worst = std::max(worst, std::abs(analysis::enb_share_equal(n, p, 37.0) -
                                       analysis::enb_share_equal_direct(n, p, 37.0)));
  return {"enb_share_closed_vs_direct", worst <= limit, worst, limit, ""};
}

}  // namespace renev
