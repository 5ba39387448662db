#pragma once

#include <algorithm>
#include <map>
#include <vector>

#include <nlohmann/json.hpp>

#include "renev/analysis/states.hpp"
#include "renev/montecarlo.hpp"

namespace renev {

/// Inputs of the signalling chain, measured from simulated iterations.
struct OverheadInputs {
  int n_small_cells = 0;
  int bucket = 1;
  double p_overlap = 0.0;
  analysis::StateDistribution pi;                                       // small-cell levels before RENEV
  analysis::SpareDistribution p_enb;                                    // macro spare level
  std::map<analysis::SystemState, analysis::StateDistribution> observed; // before -> after the small-cell stage
};

/// Quantises per-iteration availabilities into states sharing one level range.
inline OverheadInputs overhead_inputs(const std::vector<IterationResult>& runs, int bucket) {
  OverheadInputs in;
  in.bucket = bucket;
  if (runs.empty()) return in;
  in.n_small_cells = static_cast<int>(runs.front().availability.size()) - 1;
  int lo = 0, hi = 0;
  for (const auto& r : runs) {
    for (int i = 1; i <= in.n_small_cells; ++i) {
      lo = std::min({lo, analysis::quantize_level(r.availability[i], bucket),
                     analysis::quantize_level(r.availability_after_sc[i], bucket)});
      hi = std::max({hi, analysis::quantize_level(r.availability[i], bucket),
                     analysis::quantize_level(r.availability_after_sc[i], bucket)});
    }
    hi = std::max(hi, analysis::quantize_level(r.macro_spare, bucket));
  }
  const double w = 1.0 / static_cast<double>(runs.size());
  double overlap = 0.0;
  for (const auto& r : runs) {
    analysis::SystemState before(lo, hi), after(lo, hi);
    for (int i = 1; i <= in.n_small_cells; ++i) {
      before.add(analysis::quantize_level(r.availability[i], bucket));
      after.add(analysis::quantize_level(r.availability_after_sc[i], bucket));
    }
    in.pi[before] += w;
    in.observed[before][after] += w;
    in.p_enb[analysis::quantize_level(r.macro_spare, bucket)] += w;
    overlap += r.realized_overlap * w;
  }
  in.p_overlap = overlap;
  return in;
}

struct OverheadComparison {
  analysis::SignalingExpectations uniform;
  analysis::SignalingExpectations empirical;
  double simulated_messages = 0.0;  // mean per iteration
  double simulated_requests = 0.0;
  double simulated_successes = 0.0;
};

inline OverheadComparison compare_overhead(const std::vector<IterationResult>& runs, int bucket,
                                           double cap = analysis::kDefaultStateCap) {
  OverheadComparison c;
  if (runs.empty()) return c;
  const auto in = overhead_inputs(runs, bucket);
  const auto uk = analysis::uniform_kernel(cap);
  c.uniform = analysis::signaling_expectations(in.pi, in.p_enb, in.n_small_cells, in.p_overlap, uk, uk);
  c.empirical = analysis::signaling_expectations(in.pi, in.p_enb, in.n_small_cells, in.p_overlap,
                                                 analysis::empirical_kernel(in.observed, uk), uk);
  for (const auto& r : runs) {
    c.simulated_messages += static_cast<double>(r.messages.total);
    c.simulated_requests += static_cast<double>(r.messages.requests);
    c.simulated_successes += static_cast<double>(r.messages.successes);
  }
  c.simulated_messages /= runs.size();
  c.simulated_requests /= runs.size();
  c.simulated_successes /= runs.size();
  return c;
}

inline nlohmann::json to_json(const OverheadComparison& c) {
  return {{"chain_uniform", analysis::to_json(c.uniform)},
          {"chain_empirical_sc_kernel", analysis::to_json(c.empirical)},
          {"simulated", {{"messages", c.simulated_messages},
                         {"requests", c.simulated_requests},
                         {"successes", c.simulated_successes}}}};
}

}  // namespace renev
