#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "renev/error.hpp"
#include "renev/geometry.hpp"

namespace renev {

enum class Tier { Macro, Small };

/// How the small-cell share of the users is spread over the cluster.
enum class ScUserDrop {
  PerCell,  ///< each user picks a small cell uniformly, then a point in its disc
  Union,    ///< uniform over the union of the small-cell discs
};

struct ScenarioConfig {
  double macro_isd = 500.0;            // m
  double sc_radius = 25.0;             // m
  int n_small_cells = 6;
  double cluster_radius = 100.0;       // m
  double macro_tx_power_per_rb = 26.0; // dBm
  double sc_tx_power_per_rb = -3.0;    // dBm
  int rb_count_per_tier = 100;
  int user_count = 0;
  double sc_tier_user_fraction = 2.0 / 3.0;
  double per_user_demand = 300e3;      // bit/s
  std::uint64_t rng_seed = 1;
  ScUserDrop sc_user_drop = ScUserDrop::PerCell;

  double macro_radius() const { return macro_isd / 2.0; }

  void validate() const {
    auto fail = [](const std::string& what) { throw ConfigError("scenario: " + what); };
    if (n_small_cells < 1) fail("n_small_cells must be >= 1");
    if (!(macro_isd > 0.0)) fail("macro_isd must be > 0");
    if (!(sc_radius > 0.0)) fail("sc_radius must be > 0");
    if (!(cluster_radius > 0.0)) fail("cluster_radius must be > 0");
    if (cluster_radius > macro_radius()) fail("cluster disc does not fit in macro coverage");
    if (rb_count_per_tier < 1) fail("rb_count_per_tier must be >= 1");
    if (rb_count_per_tier < n_small_cells)
      fail("rb_count_per_tier smaller than the number of small cells");
    if (user_count < 0) fail("user_count must be >= 0");
    if (!(sc_tier_user_fraction >= 0.0 && sc_tier_user_fraction <= 1.0))
      fail("sc_tier_user_fraction must lie in [0,1]");
    if (!(per_user_demand > 0.0)) fail("per_user_demand must be > 0");
  }
};

struct BaseStation {
  int id = 0;
  Tier tier = Tier::Small;
  Point position;
  double tx_power_per_rb = 0.0;  // dBm
  double coverage_radius = 0.0;  // m
  int initial_rb_count = 0;
};

struct UserEquipment {
  int id = 0;
  Point position;
  int home_layer = 0;  // 0 = macro layer, i = small cell i
  double demand = 0.0; // bit/s
};

struct Deployment {
  ScenarioConfig config;
  Point cluster_center;
  std::vector<BaseStation> stations;  // stations[0] is the macro eNB
  std::vector<UserEquipment> users;

  int small_cell_count() const { return static_cast<int>(stations.size()) - 1; }
  const BaseStation& macro() const { return stations.front(); }

  /// Users dropped in each traffic layer, index 0 = macro layer.
  std::vector<int> layer_counts() const {
    std::vector<int> counts(stations.size(), 0);
    for (const auto& u : users) ++counts[u.home_layer];
    return counts;
  }

  /// Layer shares a_i. All zero for an empty user set.
  std::vector<double> layer_shares() const {
    const auto counts = layer_counts();
    std::vector<double> a(counts.size(), 0.0);
    if (users.empty()) return a;
    for (std::size_t i = 0; i < counts.size(); ++i)
      a[i] = static_cast<double>(counts[i]) / static_cast<double>(users.size());
    return a;
  }
};

/// Strict overlap test between two small-cell discs.
inline bool overlaps(const BaseStation& a, const BaseStation& b) {
  if (a.tier != Tier::Small || b.tier != Tier::Small)
    throw ContractViolation("overlaps: both stations must be small cells");
  if (a.id == b.id) return false;
  return distance(a.position, b.position) < a.coverage_radius + b.coverage_radius;
}

namespace detail {

/// Largest-remainder rounding of `total * weights` into integers summing to total.
inline std::vector<int> largest_remainder(int total, const std::vector<double>& weights) {
  std::vector<int> out(weights.size(), 0);
  if (weights.empty()) return out;
  const double wsum = std::accumulate(weights.begin(), weights.end(), 0.0);
  std::vector<std::pair<double, std::size_t>> rem;
  int assigned = 0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    const double exact = wsum > 0.0 ? total * weights[i] / wsum : 0.0;
    out[i] = static_cast<int>(std::floor(exact + 1e-12));
    assigned += out[i];
    rem.emplace_back(exact - out[i], i);
  }
  std::stable_sort(rem.begin(), rem.end(),
                   [](const auto& l, const auto& r) { return l.first > r.first; });
  for (std::size_t k = 0; assigned < total; ++k, ++assigned) ++out[rem[k % rem.size()].second];
  return out;
}

}  // namespace detail

inline constexpr int kPlacementAttempts = 1000;

/// Places the cluster and the small cells. No users.
template <typename Rng>
Deployment place_stations(const ScenarioConfig& config, Rng& rng) {
  config.validate();
  Deployment dep;
  dep.config = config;

  const Point origin{0.0, 0.0};
  const double macro_r = config.macro_radius();
  dep.cluster_center = sample_in_disc(rng, origin, macro_r - config.cluster_radius);

  const int n = config.n_small_cells;
  dep.stations.push_back(BaseStation{0, Tier::Macro, origin, config.macro_tx_power_per_rb, macro_r,
                                     config.rb_count_per_tier});

  // The small-cell band is split evenly between the cells.
  const auto sc_rbs = detail::largest_remainder(config.rb_count_per_tier, std::vector<double>(n, 1.0));

  for (int i = 1; i <= n; ++i) {
    Point p;
    bool placed = false;
    for (int attempt = 0; attempt < kPlacementAttempts; ++attempt) {
      p = sample_in_disc(rng, dep.cluster_center, config.cluster_radius);
      if (distance(p, dep.cluster_center) + config.sc_radius <= config.cluster_radius) {
        placed = true;
        break;
      }
    }
    if (!placed)
      throw ConfigError("scenario: small cell " + std::to_string(i) +
                        " disc exceeds the cluster boundary after " +
                        std::to_string(kPlacementAttempts) + " attempts (sc_radius " +
                        std::to_string(config.sc_radius) + " m vs cluster_radius " +
                        std::to_string(config.cluster_radius) + " m)");
    dep.stations.push_back(
        BaseStation{i, Tier::Small, p, config.sc_tx_power_per_rb, config.sc_radius, sc_rbs[i - 1]});
  }
  return dep;
}

/// Replaces the users of `dep` with `config.user_count` fresh ones.
template <typename Rng>
void drop_users(Deployment& dep, Rng& rng) {
  const auto& config = dep.config;
  const int n = dep.small_cell_count();
  const Point origin{0.0, 0.0};
  dep.users.clear();

  const int x = config.user_count;
  const auto split = detail::largest_remainder(
      x, {config.sc_tier_user_fraction, 1.0 - config.sc_tier_user_fraction});
  const int sc_users = split[0];

  std::uniform_int_distribution<int> pick_cell(1, n);
  int next_id = 0;
  for (int k = 0; k < sc_users; ++k) {
    UserEquipment u{next_id++, {}, 0, config.per_user_demand};
    if (config.sc_user_drop == ScUserDrop::PerCell) {
      u.home_layer = pick_cell(rng);
      u.position = sample_in_disc(rng, dep.stations[u.home_layer].position, config.sc_radius);
    } else {
      // Rejection sampling keeps the density flat over the union of discs.
      std::uniform_real_distribution<double> unit(0.0, 1.0);
      for (;;) {
        const int cell = pick_cell(rng);
        const Point p = sample_in_disc(rng, dep.stations[cell].position, config.sc_radius);
        int covering = 0;
        for (int j = 1; j <= n; ++j)
          if (distance(p, dep.stations[j].position) <= config.sc_radius) ++covering;
        if (unit(rng) * covering <= 1.0) {
          u.home_layer = cell;
          u.position = p;
          break;
        }
      }
    }
    dep.users.push_back(u);
  }
  for (int k = sc_users; k < x; ++k) {
    UserEquipment u{next_id++, sample_in_disc(rng, origin, config.macro_radius()), 0, config.per_user_demand};
    dep.users.push_back(u);
  }
}

inline Deployment generate_deployment(const ScenarioConfig& config) {
  std::mt19937_64 rng(config.rng_seed);
  auto dep = place_stations(config, rng);
  drop_users(dep, rng);
  return dep;
}

/// Geometry from one seed, users from another.
inline Deployment generate_deployment(const ScenarioConfig& config, std::uint64_t station_seed,
                                      std::uint64_t user_seed) {
  std::mt19937_64 geo(station_seed);
  auto dep = place_stations(config, geo);
  std::mt19937_64 users(user_seed);
  drop_users(dep, users);
  return dep;
}

// JSON ----------------------------------------------------------------------

inline void to_json(nlohmann::json& j, ScUserDrop d) {
  j = d == ScUserDrop::PerCell ? "per_cell" : "union";
}
inline void from_json(const nlohmann::json& j, ScUserDrop& d) {
  const auto s = j.get<std::string>();
  if (s == "per_cell") d = ScUserDrop::PerCell;
  else if (s == "union") d = ScUserDrop::Union;
  else throw ConfigError("scenario: sc_user_drop must be per_cell or union, got '" + s + "'");
}
inline void to_json(nlohmann::json& j, const ScenarioConfig& c) {
  j = nlohmann::json{{"macro_isd", c.macro_isd},
                     {"sc_radius", c.sc_radius},
                     {"n_small_cells", c.n_small_cells},
                     {"cluster_radius", c.cluster_radius},
                     {"macro_tx_power_per_rb", c.macro_tx_power_per_rb},
                     {"sc_tx_power_per_rb", c.sc_tx_power_per_rb},
                     {"rb_count_per_tier", c.rb_count_per_tier},
                     {"user_count", c.user_count},
                     {"sc_tier_user_fraction", c.sc_tier_user_fraction},
                     {"per_user_demand", c.per_user_demand},
                     {"rng_seed", c.rng_seed},
                     {"sc_user_drop", c.sc_user_drop}};
}

/// Reads the keys present in `j` over the defaults; unknown keys are rejected.
inline void from_json(const nlohmann::json& j, ScenarioConfig& c) {
  if (!j.is_object()) throw ConfigError("scenario: expected a JSON object");
  for (const auto& [key, value] : j.items()) {
    try {
      if (key == "macro_isd") c.macro_isd = value.get<double>();
      else if (key == "sc_radius") c.sc_radius = value.get<double>();
      else if (key == "n_small_cells") c.n_small_cells = value.get<int>();
      else if (key == "cluster_radius") c.cluster_radius = value.get<double>();
      else if (key == "macro_tx_power_per_rb") c.macro_tx_power_per_rb = value.get<double>();
      else if (key == "sc_tx_power_per_rb") c.sc_tx_power_per_rb = value.get<double>();
      else if (key == "rb_count_per_tier") c.rb_count_per_tier = value.get<int>();
      else if (key == "user_count") c.user_count = value.get<int>();
      else if (key == "sc_tier_user_fraction") c.sc_tier_user_fraction = value.get<double>();
      else if (key == "per_user_demand") c.per_user_demand = value.get<double>();
      else if (key == "rng_seed") c.rng_seed = value.get<std::uint64_t>();
      else if (key == "sc_user_drop") c.sc_user_drop = value.get<ScUserDrop>();
      else throw ConfigError("scenario: unknown key '" + key + "'");
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError("scenario: bad value for '" + key + "': " + e.what());
    }
  }
}

}  // namespace renev
