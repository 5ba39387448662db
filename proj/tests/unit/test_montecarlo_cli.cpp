#include <gtest/gtest.h>

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <sys/wait.h>

#include "helpers.hpp"

using namespace renev;
namespace fs = std::filesystem;

namespace {

RunConfig small_run(bool renev = true) {
  RunConfig c;
  c.loads = {42e6, 78e6};
  c.iterations = 3;
  c.jobs = 1;
  c.seed = 9;
  c.renev = renev;
  return c;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST(Signaling, CsvRows) {
  MessageLog log;
  log.append({X2MessageKind::MetasignallingInformationRequest, 1, 2, {}});
  log.append({X2MessageKind::MetasignallingInformationAcknowledge, 2, 1, {}});
  std::ostringstream os;
  write_csv_rows(os, log, 7);
  const std::string s = os.str();
  EXPECT_EQ(std::count(s.begin(), s.end(), '\n'), 2);
  EXPECT_EQ(s.rfind("7,0,", 0), 0u);
  EXPECT_NE(s.find("7,1,"), std::string::npos);
  EXPECT_EQ(s.find('\r'), std::string::npos);
  EXPECT_TRUE(acknowledges_are_paired(log));
  MessageLog bad;
  bad.append({X2MessageKind::MetasignallingInformationAcknowledge, 2, 1, {}});
  EXPECT_FALSE(acknowledges_are_paired(bad));
}

TEST(Seeds, DistinctAndStable) {
  std::set<std::uint64_t> seen;
  for (std::size_t li = 0; li < 4; ++li)
    for (std::size_t it = 0; it < 50; ++it) {
      const auto s = iteration_seeds(1, li, it);
      seen.insert(s.users);
      seen.insert(s.channel);
      seen.insert(s.order);
      EXPECT_EQ(s.stations, iteration_seeds(1, 0, it).stations);  // geometry follows the iteration only
    }
  EXPECT_EQ(seen.size(), 3u * 4 * 50);
  EXPECT_EQ(splitmix64(0), splitmix64(0));
  EXPECT_NE(iteration_seeds(1, 0, 0).users, iteration_seeds(2, 0, 0).users);
}

TEST(Montecarlo, IterationIsDeterministicAndCapped) {
  const auto cfg = small_run();
  for (std::size_t li = 0; li < cfg.loads.size(); ++li) {
    const auto a = run_iteration(cfg, li, 1);
    const auto b = run_iteration(cfg, li, 1);
    EXPECT_EQ(a.served, b.served);
    EXPECT_EQ(a.messages.total, b.messages.total);
    EXPECT_LE(a.served, a.offered + 1e-6);
    EXPECT_NEAR(a.served, a.served_by_small + a.served_by_macro, 1e-6);
    EXPECT_EQ(a.served_users + a.blocked_users + a.outage_users, a.users);
    EXPECT_TRUE(a.formula_holds);
    EXPECT_FALSE(a.invariant_violation.has_value());
    EXPECT_GE(a.transferred_small_pct, 0.0);
    EXPECT_LE(a.transferred_small_pct, 100.0);
  }
}

TEST(Montecarlo, CampaignIndependentOfWorkerCount) {
  auto one = small_run();
  auto two = small_run();
  two.jobs = 2;
  std::ostringstream a, b;
  write_metrics_rows(a, run_campaign(one));
  write_metrics_rows(b, run_campaign(two));
  EXPECT_EQ(a.str(), b.str());
}

TEST(Montecarlo, WithoutRenevNoMessages) {
  const auto rep = run_campaign(small_run(false));
  for (const auto& p : rep.points) {
    EXPECT_EQ(p.messages_per_sc.mean, 0.0);
    EXPECT_EQ(p.transferred_small_pct.mean, 0.0);
  }
}

TEST(Montecarlo, MetricsShape) {
  const auto rep = run_campaign(small_run());
  ASSERT_EQ(rep.points.size(), 2u);
  for (const auto& p : rep.points) {
    std::uint64_t users = 0;
    for (const auto& [rate, n] : p.rate_histogram) users += n;
    EXPECT_EQ(users, static_cast<std::uint64_t>(p.users) * p.iterations);
    EXPECT_GE(p.success_pct, 0.0);
    EXPECT_LE(p.success_pct, 100.0);
    EXPECT_GE(p.throughput.ci95, 0.0);
  }
  EXPECT_LT(rep.points[0].throughput.mean, rep.points[1].throughput.mean + 1e-6);
}

TEST(Montecarlo, MeanCi) {
  const auto m = mean_ci({1.0, 2.0, 3.0, 4.0});
  EXPECT_DOUBLE_EQ(m.mean, 2.5);
  EXPECT_NEAR(m.ci95, 1.96 * std::sqrt(5.0 / 3.0) / 2.0, 1e-12);
  EXPECT_EQ(mean_ci({5.0}).ci95, 0.0);
}

TEST(Config, Overrides) {
  auto doc = default_document();
  apply_override(doc, "scenario.n_small_cells=10");
  apply_override(doc, "scheme=nvs");
  apply_override(doc, "loads_mbps=[42,66]");
  const auto c = config_from_document(doc);
  EXPECT_EQ(c.run.scenario.n_small_cells, 10);
  EXPECT_EQ(c.run.scheme.kind, SliceKind::Nvs);
  EXPECT_EQ(c.run.loads, (std::vector<double>{42e6, 66e6}));
  EXPECT_THROW(apply_override(doc, "no_such_key=1"), ConfigError);
  EXPECT_THROW(apply_override(doc, "scenario.bogus=1"), ConfigError);
  EXPECT_THROW(apply_override(doc, "iterations"), ConfigError);
  apply_override(doc, "iterations=0");
  EXPECT_THROW(config_from_document(doc), ConfigError);
  EXPECT_THROW(load_config("/nonexistent/cfg.json", {}), MissingFileError);
}

TEST(Config, ShippedFileIsTheDefault) {
  const auto c = load_config(std::string(RENEV_CONFIG_DIR) + "/table1.json", {});
  EXPECT_EQ(c.run.iterations, 1000);
  EXPECT_EQ(c.run.scenario.n_small_cells, 6);
  nlohmann::json resolved;
  load_config(std::string(RENEV_CONFIG_DIR) + "/table1.json", {}, &resolved);
  EXPECT_EQ(resolved, default_document());
}

#ifdef RENEV_CLI_PATH

namespace {

int run_cli(const std::string& args) {
  const std::string cmd = std::string(RENEV_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int rc = std::system(cmd.c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

fs::path scratch(const std::string& name) {
  const auto p = fs::temp_directory_path() / ("renev_cli_test_" + name);
  fs::remove_all(p);
  return p;
}

const std::string kSmall = " --set iterations=1 --set loads_mbps=[42,78] --jobs 1";

}  // namespace

TEST(Cli, UnknownOverrideIsSchemaErrorWithoutOutput) {
  const auto out = scratch("schema");
  EXPECT_EQ(run_cli("simulate --out " + out.string() + " --set bogus=1"), 4);
  EXPECT_FALSE(fs::exists(out));
}

TEST(Cli, MissingConfigFile) {
  const auto out = scratch("missing");
  EXPECT_EQ(run_cli("simulate --config /nonexistent/x.json --out " + out.string()), 3);
  EXPECT_FALSE(fs::exists(out));
}

TEST(Cli, NoSubcommandIsUsage) { EXPECT_EQ(run_cli(""), 2); }

TEST(Cli, CorruptMcsTableRejected) {
  const auto dir = scratch("mcs");
  fs::create_directories(dir);
  const auto cfg = dir / "bad.json";
  std::ofstream(cfg) << R"({"mcs_table": [{"name": "hi", "bits_per_symbol": 4, "code_rate": "1/2", "snr_min": 9},
                                          {"name": "lo", "bits_per_symbol": 2, "code_rate": "1/2", "snr_min": 1}]})";
  EXPECT_EQ(run_cli("validate --config " + cfg.string() + " --out " + (dir / "o").string()), 4);
  EXPECT_FALSE(fs::exists(dir / "o"));
}

TEST(Cli, SmokeRunIsFastAndReproducible) {
  const auto a = scratch("a"), b = scratch("b");
  const std::string cfg = std::string(RENEV_CONFIG_DIR) + "/table1.json";
  const auto before = slurp(cfg);
  const auto t0 = std::chrono::steady_clock::now();
  ASSERT_EQ(run_cli("simulate --config " + cfg + " --out " + a.string() + " --set iterations=1"), 0);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  EXPECT_LT(secs, 5.0);
  ASSERT_EQ(run_cli("simulate --config " + cfg + " --out " + b.string() + " --set iterations=1"), 0);
  for (const char* f : {"metrics.csv", "cdf.csv", "messages.csv", "iterations.csv", "analysis.json"}) {
    ASSERT_TRUE(fs::exists(a / f)) << f;
    EXPECT_EQ(slurp(a / f), slurp(b / f)) << f;
  }
  EXPECT_EQ(slurp(cfg), before);
  const auto metrics = slurp(a / "metrics.csv");
  EXPECT_EQ(metrics.find('\r'), std::string::npos);
  EXPECT_EQ(std::count(metrics.begin(), metrics.end(), '\n'), 1 + 14);
}

TEST(Cli, SeedChangesOutput) {
  const auto a = scratch("s1"), b = scratch("s2");
  ASSERT_EQ(run_cli("simulate --out " + a.string() + kSmall + " --seed 1"), 0);
  ASSERT_EQ(run_cli("simulate --out " + b.string() + kSmall + " --seed 2"), 0);
  EXPECT_NE(slurp(a / "messages.csv"), slurp(b / "messages.csv"));
}

TEST(Cli, AnalyzeAndCompareWriteJson) {
  const auto a = scratch("an"), c = scratch("cmp");
  ASSERT_EQ(run_cli("analyze --out " + a.string() + kSmall), 0);
  const auto j = nlohmann::json::parse(slurp(a / "analysis.json"));
  ASSERT_EQ(j.at("analysis").size(), 2u);
  EXPECT_GT(j["analysis"][0]["T_R"]["mean"].get<double>(), 0.0);
  EXPECT_TRUE(j["signaling"][0].contains("chain_uniform"));
  ASSERT_EQ(run_cli("compare --out " + c.string() + kSmall), 0);
  const auto m = slurp(c / "metrics.csv");
  EXPECT_EQ(std::count(m.begin(), m.end(), '\n'), 1 + 5 * 2);
}

#endif
