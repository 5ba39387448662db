#pragma once

#include <vector>

#include "renev/renev.hpp"

namespace testing_helpers {

/// Macro at the origin plus small cells at `sc`, each owning `sc_rbs` RBs.
inline renev::Deployment make_deployment(const std::vector<renev::Point>& sc, int macro_rbs = 100, int sc_rbs = 10,
                                         int band = 100) {
  renev::Deployment dep;
  dep.config.rb_count_per_tier = band;
  dep.config.n_small_cells = static_cast<int>(sc.size());
  dep.stations.push_back({0, renev::Tier::Macro, {0.0, 0.0}, 26.0, 250.0, macro_rbs});
  for (std::size_t i = 0; i < sc.size(); ++i)
    dep.stations.push_back({static_cast<int>(i) + 1, renev::Tier::Small, sc[i], -3.0, 25.0, sc_rbs});
  return dep;
}

/// Occupies `count` RBs of station i from its shared pool.
inline renev::Grant occupy(renev::ResourceLedger& l, int i, int count) {
  const int p = static_cast<int>(l.station(i).partitions.size()) - 1;
  return l.allocate(i, {{p, count}});
}

}  // namespace testing_helpers
