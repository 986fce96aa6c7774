// Command-line front end: run presets or config files, list presets, and
// run the fast invariant suite.
//
// Exit codes: 0 success, 1 configuration error, 2 runtime error.

#include <cstdio>
#include <exception>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "cmi/checks.hpp"
#include "cmi/runner/config.hpp"
#include "cmi/runner/experiment.hpp"
#include "cmi/runner/presets.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitRuntime = 2;

int do_run(const std::string& target, const std::vector<std::string>& overrides, const std::string& seeds,
           const std::string& out, std::size_t jobs, bool quiet) {
  using namespace cmi::runner;
  ExperimentConfig cfg;
  try {
    if (is_preset(target)) {
      cfg = preset(target);
    } else if (std::filesystem::exists(target)) {
      cfg = load_file(target);
    } else {
      throw cmi::ConfigError("'" + target + "' is neither a preset name nor a readable config file");
    }
    for (const std::string& o : overrides) apply_override(cfg, o);
    if (!seeds.empty()) set_value(cfg, "run.seeds", seeds);
    if (!out.empty()) cfg.output_dir = out;
    if (jobs > 0) cfg.jobs = jobs;
    plan_runs(cfg);  // validates every sweep arm up front
  } catch (const cmi::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  }
  try {
    const auto records = run_experiment(cfg, std::filesystem::path(cfg.output_dir));
    if (!quiet) {
      std::printf("%-16s %5s %12s %10s %10s %10s\n", "sweep_value", "runs", "final_mi", "mi_std", "knn", "logistic");
      for (const ArmSummary& a : summarize_arms(records)) {
        std::printf("%-16s %5zu %12.6g %10.3g %10.4f %10.4f\n", a.sweep_value.empty() ? "-" : a.sweep_value.c_str(),
                    a.runs, a.mean_final_mi, a.std_final_mi, a.mean_knn, a.mean_logistic);
      }
      std::printf("wrote %s/{steps,summary,sweep,probes}.csv\n", cfg.output_dir.c_str());
    }
  } catch (const cmi::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const RunError& e) {
    std::cerr << "runtime error at step " << e.step() << ": " << e.what() << '\n';
    return kExitRuntime;
  } catch (const std::exception& e) {
    std::cerr << "runtime error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitOk;
}

int do_check(std::uint64_t seed) {
  bool all = true;
  for (const auto& r : cmi::checks::run_fast_checks(seed)) {
    std::printf("%s  %-62s worst=%-10.3g tol=%-8.3g n=%zu\n", r.passed ? "PASS" : "FAIL", r.name.c_str(), r.worst,
                r.tolerance, r.instances);
    all = all && r.passed;
  }
  return all ? kExitOk : kExitRuntime;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"contrastive mutual-information experiments"};
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "run a preset or a config file");
  std::string target, seeds, out;
  std::vector<std::string> overrides;
  std::size_t jobs = 0;
  bool quiet = false;
  run->add_option("target", target, "preset name or config file")->required();
  run->add_option("--override,-o", overrides, "key=value, repeatable");
  run->add_option("--seeds", seeds, "comma-separated seeds, e.g. 0,1,2");
  run->add_option("--out", out, "output directory");
  run->add_option("--jobs,-j", jobs, "runs in parallel");
  run->add_flag("--quiet,-q", quiet, "no summary table");

  auto* list = app.add_subcommand("list-presets", "list preset names");
  auto* keys = app.add_subcommand("list-keys", "list every config key with its default");
  auto* show = app.add_subcommand("show", "print the resolved config of a preset or file");
  std::string show_target;
  std::vector<std::string> show_overrides;
  show->add_option("target", show_target, "preset name or config file")->required();
  show->add_option("--override,-o", show_overrides, "key=value, repeatable");

  auto* check = app.add_subcommand("check", "run the fast invariant suite");
  std::uint64_t check_seed = 0;
  check->add_option("--seed", check_seed, "seed for the random instances");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  if (*run) return do_run(target, overrides, seeds, out, jobs, quiet);
  if (*list) {
    for (const auto& p : cmi::runner::preset_catalog()) std::printf("%-18s %s\n", p.name.c_str(), p.description.c_str());
    return kExitOk;
  }
  if (*keys) {
    const cmi::runner::ExperimentConfig defaults;
    for (const auto& f : cmi::runner::fields())
      std::printf("%-34s %-24s %s\n", f.key.c_str(), f.get(defaults).c_str(), f.help.c_str());
    return kExitOk;
  }
  if (*show) {
    try {
      using namespace cmi::runner;
      ExperimentConfig cfg = is_preset(show_target) ? preset(show_target) : load_file(show_target);
      for (const std::string& o : show_overrides) apply_override(cfg, o);
      std::fputs(serialize(cfg).c_str(), stdout);
    } catch (const cmi::ConfigError& e) {
      std::cerr << "config error: " << e.what() << '\n';
      return kExitConfig;
    }
    return kExitOk;
  }
  if (*check) return do_check(check_seed);
  return kExitConfig;
}
