#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "renev/renev.hpp"

namespace fs = std::filesystem;
using namespace renev;

namespace {

enum Exit : int {
  kOk = 0,
  kCheckFailed = 1,
  kUsage = 2,
  kMissingFile = 3,
  kSchema = 4,
  kCapacity = 5,
  kInternal = 6,
  kIo = 7,
};

struct Options {
  std::string config;
  std::string out = "out";
  std::vector<std::string> sets;
  int jobs = -1;
  std::uint64_t seed = 0;
  bool seed_given = false;
  bool verbose = false;
};

class IoError : public Error {
 public:
  using Error::Error;
};

std::ofstream open_out(const fs::path& p) {
  std::ofstream f(p, std::ios::binary);
  if (!f) throw IoError("cannot write '" + p.string() + "'");
  return f;
}

ProgramConfig resolve(const Options& o, nlohmann::json& doc) {
  auto sets = o.sets;
  if (o.jobs >= 0) sets.push_back("jobs=" + std::to_string(o.jobs));
  if (o.seed_given) sets.push_back("seed=" + std::to_string(o.seed));
  return load_config(o.config, sets, &doc);
}

void prepare_out(const Options& o) {
  std::error_code ec;
  fs::create_directories(o.out, ec);
  if (ec) throw IoError("cannot create '" + o.out + "': " + ec.message());
}

const char* kIterationCsvHeader =
    "scheme,renev,offered_mbps,iteration,users,requests,macro_polls,successes,messages,formula,per_sc\n";

struct IterationRows {
  std::string scheme;
  bool renev = false;
  const RunConfig* cfg = nullptr;
  std::ostream* os = nullptr;

  std::ostream* log_os = nullptr;

  void operator()(std::size_t li, const IterationResult& r, const MessageLog& log) const {
    const auto& m = r.messages;
    char buf[256];
    std::snprintf(buf, sizeof buf, "%s,%d,%.6g,%llu,%d,%llu,%llu,%llu,%llu,%llu,%.6f\n", scheme.c_str(),
                  renev ? 1 : 0, cfg->loads[li] / 1e6, static_cast<unsigned long long>(r.iteration), r.users,
                  static_cast<unsigned long long>(m.requests), static_cast<unsigned long long>(m.macro_polls),
                  static_cast<unsigned long long>(m.successes), static_cast<unsigned long long>(m.total),
                  static_cast<unsigned long long>(m.formula(cfg->scenario.n_small_cells)), m.per_small_cell);
    *os << buf;
    std::snprintf(buf, sizeof buf, "%s,%d,%.6g,", scheme.c_str(), renev ? 1 : 0, cfg->loads[li] / 1e6);
    std::uint64_t seq = 0;
    for (const auto& msg : log.messages())
      *log_os << buf << r.iteration << ',' << seq++ << ',' << to_string(msg.kind) << ',' << msg.src << ','
              << msg.dst << '\n';
  }
};

void write_log_header(std::ostream& os) { os << "scheme,renev,offered_mbps," << kMessageCsvHeader; }

// true if any iteration broke a ledger invariant or the message-count formula
bool report_failures(const MetricsReport& rep) {
  bool bad = false;
  for (const auto& c : {check_invariants(rep), check_message_formula(rep)})
    if (!c.pass) {
      std::fprintf(stderr, "renev: %s\n", format_check(c).c_str());
      bad = true;
    }
  return bad;
}

int cmd_simulate(const Options& o) {
  nlohmann::json doc;
  const auto cfg = resolve(o, doc);
  prepare_out(o);
  auto metrics = open_out(fs::path(o.out) / "metrics.csv");
  auto cdf = open_out(fs::path(o.out) / "cdf.csv");
  auto iters = open_out(fs::path(o.out) / "iterations.csv");
  auto msgs = open_out(fs::path(o.out) / "messages.csv");
  iters << kIterationCsvHeader;
  write_log_header(msgs);
  RunConfig run = cfg.run;
  const auto rep = run_campaign(run, IterationRows{run.scheme.name(), run.renev, &run, &iters, &msgs});
  metrics << kMetricsCsvHeader;
  write_metrics_rows(metrics, rep);
  cdf << kCdfCsvHeader;
  write_cdf_rows(cdf, rep);
  auto js = open_out(fs::path(o.out) / "analysis.json");
  js << nlohmann::json{{"config", doc}, {"simulation", to_json(rep)}}.dump(2) << '\n';
  for (const auto& p : rep.points)
    std::printf("%6.1f Mbps offered  T = %7.3f +- %.3f Mbps  success %.1f%%  msgs/SC %.2f\n", p.offered / 1e6,
                p.throughput.mean / 1e6, p.throughput.ci95 / 1e6, p.success_pct, p.messages_per_sc.mean);
  return report_failures(rep) ? kCheckFailed : kOk;
}

int cmd_analyze(const Options& o) {
  nlohmann::json doc;
  auto cfg = resolve(o, doc);
  prepare_out(o);
  RunConfig run = cfg.run;
  run.with_analysis = true;
  std::vector<std::vector<IterationResult>> per_load(run.loads.size());
  const auto rep = run_campaign(run, [&](std::size_t li, const IterationResult& r, const MessageLog&) {
    per_load[li].push_back(r);
  });
  auto overhead = nlohmann::json::array();
  for (std::size_t li = 0; li < run.loads.size(); ++li) {
    auto j = to_json(compare_overhead(per_load[li], cfg.state_bucket));
    j["offered"] = run.loads[li];
    overhead.push_back(j);
  }
  // One fully expanded report on the first iteration's deployment.
  auto detail = nlohmann::json::array();
  for (std::size_t li = 0; li < run.loads.size(); ++li) {
    const auto seeds = iteration_seeds(run.seed, li, 0);
    const auto dep = iteration_deployment(run, run.loads[li], seeds);
    const auto res = simulate_deployment(run, dep, seeds.channel, seeds.order);
    const auto rates = analysis::expected_rates(dep, std::vector<double>(dep.stations.size(), 0.0), run.channel,
                                                run.mcs, dep.config.per_user_demand, run.analysis_points);
    detail.push_back({{"offered", run.loads[li]},
                      {"E_R", rates.r},
                      {"E_R_via_eNB", rates.r_via0},
                      {"report", analysis::to_json(analytic_bounds(run, dep, res, rates))}});
  }
  auto points = nlohmann::json::array();
  for (const auto& p : rep.points)
    points.push_back({{"offered", p.offered},
                      {"T_R", to_json(p.analytic_t_r)},
                      {"T_NR", to_json(p.analytic_t_nr)}});
  auto js = open_out(fs::path(o.out) / "analysis.json");
  js << nlohmann::json{{"config", doc}, {"analysis", points}, {"signaling", overhead}, {"first_iteration", detail}}.dump(2) << '\n';
  for (const auto& p : rep.points)
    std::printf("%6.1f Mbps offered  T_R = %7.3f  T_NR = %7.3f Mbps\n", p.offered / 1e6, p.analytic_t_r.mean / 1e6,
                p.analytic_t_nr.mean / 1e6);
  return kOk;
}

int cmd_compare(const Options& o) {
  nlohmann::json doc;
  const auto cfg = resolve(o, doc);
  prepare_out(o);
  auto metrics = open_out(fs::path(o.out) / "metrics.csv");
  auto cdf = open_out(fs::path(o.out) / "cdf.csv");
  auto iters = open_out(fs::path(o.out) / "iterations.csv");
  auto msgs = open_out(fs::path(o.out) / "messages.csv");
  metrics << kMetricsCsvHeader;
  cdf << kCdfCsvHeader;
  iters << kIterationCsvHeader;
  write_log_header(msgs);
  auto runs = nlohmann::json::array();
  bool failed = false;
  for (const auto& v : cfg.compare) {
    RunConfig run = cfg.run;
    run.scheme = v.scheme;
    run.renev = v.renev;
    run.with_analysis = v.scheme.kind == SliceKind::Prr && v.scheme.shared_fraction == 1.0;
    const auto rep = run_campaign(run, IterationRows{run.scheme.name(), run.renev, &run, &iters, &msgs});
    write_metrics_rows(metrics, rep);
    write_cdf_rows(cdf, rep);
    runs.push_back(to_json(rep));
    failed = report_failures(rep) || failed;
    std::printf("%s%s\n", v.renev ? "renev+" : "", v.scheme.name().c_str());
    for (const auto& p : rep.points) {
      std::printf("  %6.1f Mbps  T = %7.3f Mbps", p.offered / 1e6, p.throughput.mean / 1e6);
      if (run.with_analysis)
        std::printf("  analytic %7.3f", (v.renev ? p.analytic_t_r.mean : p.analytic_t_nr.mean) / 1e6);
      std::printf("\n");
    }
  }
  auto js = open_out(fs::path(o.out) / "analysis.json");
  js << nlohmann::json{{"config", doc}, {"runs", runs}}.dump(2) << '\n';
  return failed ? kCheckFailed : kOk;
}

int cmd_validate(const Options& o) {
  nlohmann::json doc;
  const auto cfg = resolve(o, doc);
  prepare_out(o);
  std::vector<CheckResult> checks;
  RunConfig run = cfg.run;
  run.scheme = SliceScheme::prr(1.0, run.scheme.slice_count);
  run.iterations = cfg.validate_iterations;
  auto cmp = check_analysis_vs_simulation(run, cfg.validate_tolerance);
  checks = cmp.checks;
  checks.push_back(check_message_formula(cmp.reports.back()));
  for (const auto& r : cmp.reports) checks.push_back(check_invariants(r));
  checks.push_back(check_mcs_vs_sampling(run, 200000, 1e-2));
  checks.push_back(check_enb_share(20, 1e-9));
  auto txt = open_out(fs::path(o.out) / "validate.txt");
  bool ok = true;
  for (const auto& c : checks) {
    const auto line = format_check(c);
    txt << line << '\n';
    std::printf("%s\n", line.c_str());
    ok = ok && c.pass;
  }
  return ok ? kOk : kCheckFailed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"RENEV heterogeneous-network simulator and analysis"};
  app.require_subcommand(1);
  Options o;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", o.config, "JSON config file");
    sub->add_option("--out", o.out, "output directory");
    sub->add_option("--set", o.sets, "override key=value (repeatable, dotted keys)")->take_all();
    sub->add_option("--jobs", o.jobs, "worker threads (0 = all cores)")->check(CLI::NonNegativeNumber);
    sub->add_option("--seed", o.seed, "base seed")->each([&](const std::string&) { o.seed_given = true; });
    sub->add_flag("-v,--verbose", o.verbose, "progress on stderr");
  };
  auto* sim = app.add_subcommand("simulate", "Monte-Carlo campaign of the configured scheme");
  auto* ana = app.add_subcommand("analyze", "closed-form throughput bounds per load point");
  auto* cmp = app.add_subcommand("compare", "every configured scheme variant on matched seeds");
  auto* val = app.add_subcommand("validate", "oracle cross-checks with pass/fail per check");
  for (auto* s : {sim, ana, cmp, val}) add_common(s);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kOk : kUsage;
  }
  if (o.verbose) log::set_level(log::Level::Info);

  try {
    if (sim->parsed()) return cmd_simulate(o);
    if (ana->parsed()) return cmd_analyze(o);
    if (cmp->parsed()) return cmd_compare(o);
    if (val->parsed()) return cmd_validate(o);
  } catch (const MissingFileError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kMissingFile;
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kSchema;
  } catch (const CapacityError& e) {
    std::fprintf(stderr, "capacity exceeded: %s\n", e.what());
    return kCapacity;
  } catch (const IoError& e) {
    std::fprintf(stderr, "i/o error: %s\n", e.what());
    return kIo;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "internal error: %s\n", e.what());
    return kInternal;
  }
  return kUsage;
}
