// Command-line front end: data collection, closed-loop episodes, metrics and
// comparison reports.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "hubdeepc/config_io.hpp"
#include "hubdeepc/harness.hpp"

namespace fs = std::filesystem;
using namespace hubdeepc;

namespace {

struct CommonOptions {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<int> days;
  std::string out = ".";
};

void add_common(CLI::App* cmd, CommonOptions& o) {
  cmd->add_option("--config", o.config, "JSON scenario file (preset plus overrides)")
      ->check(CLI::ExistingFile);
  cmd->add_option("--seed", o.seed, "scenario seed");
  cmd->add_option("--days", o.days, "episode length in days")->check(CLI::PositiveNumber);
  cmd->add_option("--out", o.out, "output directory");
}

ScenarioConfig resolve(const CommonOptions& o) {
  ScenarioConfig cfg = o.config.empty() ? ScenarioConfig::desk() : load_scenario(o.config);
  if (o.seed) cfg.seed = *o.seed;
  if (o.days) cfg.horizon_days = *o.days;
  cfg.validate();
  return cfg;
}

std::string out_path(const CommonOptions& o, const std::string& file) {
  fs::create_directories(o.out);
  return (fs::path(o.out) / file).string();
}

void print_pe(const ExcitationReport& pe) {
  std::printf("persistently exciting: %s (rank %d of %d, length slack %ld, sigma ratio %.3g)\n",
              pe.exciting ? "yes" : "no", pe.rank, pe.required_rank, pe.length_slack,
              pe.sigma_ratio);
}

void print_metrics(const MetricsReport& r) {
  std::printf("%s  LBV %.4f  UBV %.4f  %%LBV %.2f  %%UBV %.2f  cost %.3f  cycles %.3f  loss %.4f%%\n",
              r.controller.c_str(), r.lbv_per_room_hour, r.ubv_per_room_hour, r.pct_lbv, r.pct_ubv,
              r.cost, r.cycles, r.capacity_loss);
  if (r.eps) {
    std::printf("prediction error: zones mean %.4f max %.4f degC, voltage mean %.4f max %.4f V\n",
                r.eps->zones.mean(), r.eps->zones.maxCoeff(), r.eps->voltage.mean(),
                r.eps->voltage.maxCoeff());
  }
}

int cmd_collect(const CommonOptions& o) {
  const ScenarioConfig cfg = resolve(o);
  const CollectionResult c = collect_data(cfg, false);
  write_trajectory_csv(out_path(o, "data.csv"), c.data);
  save_scenario(out_path(o, "config.json"), cfg);
  print_pe(c.pe);
  require(c.pe.exciting, ErrorKind::NotExciting, "collected data is not persistently exciting");
  return 0;
}

int cmd_validate_pe(const CommonOptions& o, const std::string& data) {
  const ScenarioConfig cfg = resolve(o);
  const ExcitationReport pe =
      data.empty() ? collect_data(cfg, false).pe : validate_pe(read_trajectory_csv(data), cfg);
  print_pe(pe);
  require(pe.exciting, ErrorKind::NotExciting, "data is not persistently exciting");
  return 0;
}

int cmd_run(const CommonOptions& o, const std::string& controller, int progress) {
  const ScenarioConfig cfg = resolve(o);
  EpisodeOptions opt;
  opt.progress_every = progress;
  EpisodeLog log;
  if (controller == "deepc") {
    const CollectionResult c = collect_data(cfg);
    const HubDeepcController ctl(c.blocks, HubLayout{}, cfg.deepc, cfg.comfort);
    log = run_episode(cfg, ControllerKind::Deepc, &ctl, opt);
    write_plans_csv(out_path(o, "plans.csv"), log);
  } else {
    log = run_episode(cfg, ControllerKind::Rbc, nullptr, opt);
  }
  write_episode_csv(out_path(o, "episode.csv"), log);
  write_runtime_file(out_path(o, "runtime.csv"), log);
  save_scenario(out_path(o, "config.json"), cfg);
  const MetricsReport m = compute_violation_metrics(log, cfg.comfort, cfg.T_s);
  write_metrics_csv(out_path(o, "metrics.csv"), m);
  print_metrics(m);
  std::printf("runtime %.2f s for %d h\n", log.runtime_s, log.length());
  return 0;
}

int cmd_metrics(const CommonOptions& o, const std::string& episode, const std::string& plans) {
  ComfortSchedule sched;
  double T_s = 1.0;
  if (!o.config.empty()) {
    const ScenarioConfig cfg = load_scenario(o.config);
    sched = cfg.comfort;
    T_s = cfg.T_s;
  }
  const EpisodeLog log = read_episode_csv(episode, plans);
  const MetricsReport m = compute_violation_metrics(log, sched, T_s);
  write_metrics_csv(out_path(o, "metrics.csv"), m);
  print_metrics(m);
  return 0;
}

int cmd_compare(const CommonOptions& o, const std::string& deepc, const std::string& rbc) {
  const Comparison c = compare_report(read_metrics_csv(deepc), read_metrics_csv(rbc));
  write_comparison_csv(out_path(o, "compare.csv"), c);
  std::cout << format_comparison(c);
  return 0;
}

int cmd_calibrate(const CommonOptions& o, double target) {
  const double k = calibrate_k_fade(resolve(o), target / 100.0);
  std::printf("k_fade %.10g\n", k);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Data-driven predictive control of a building energy hub"};
  app.require_subcommand(1);

  CommonOptions o;
  std::string controller = "deepc", data, episode, plans, deepc_metrics, rbc_metrics;
  int progress = 0;
  double target = 0.8;

  auto* collect = app.add_subcommand("collect", "collect excitation data with the baseline controller");
  add_common(collect, o);

  auto* run = app.add_subcommand("run", "run a closed-loop episode");
  add_common(run, o);
  run->add_option("--controller", controller, "controller")
      ->check(CLI::IsMember({"deepc", "rbc"}));
  run->add_option("--progress", progress, "report progress every N hours");

  auto* metrics = app.add_subcommand("metrics", "recompute metrics from an episode file");
  add_common(metrics, o);
  metrics->add_option("--episode", episode, "episode.csv")->required()->check(CLI::ExistingFile);
  metrics->add_option("--plans", plans, "plans.csv for prediction errors")->check(CLI::ExistingFile);

  auto* compare = app.add_subcommand("compare", "compare DeePC and RBC metrics");
  add_common(compare, o);
  compare->add_option("--deepc", deepc_metrics, "DeePC metrics.csv")->required()->check(CLI::ExistingFile);
  compare->add_option("--rbc", rbc_metrics, "RBC metrics.csv")->required()->check(CLI::ExistingFile);

  auto* pe = app.add_subcommand("validate-pe", "check persistent excitation of collected data");
  add_common(pe, o);
  pe->add_option("--data", data, "data.csv from collect; collects afresh when omitted")
      ->check(CLI::ExistingFile);

  auto* cal = app.add_subcommand("calibrate-fade", "fit k_fade to a yearly baseline capacity loss");
  add_common(cal, o);
  cal->add_option("--target", target, "yearly capacity loss in percent");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*collect) return cmd_collect(o);
    if (*run) return cmd_run(o, controller, progress);
    if (*metrics) return cmd_metrics(o, episode, plans);
    if (*compare) return cmd_compare(o, deepc_metrics, rbc_metrics);
    if (*pe) return cmd_validate_pe(o, data);
    if (*cal) return cmd_calibrate(o, target);
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return static_cast<int>(e.kind());
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 100;
  }
  return 0;
}
