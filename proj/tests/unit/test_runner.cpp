#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "cmi/runner/experiment.hpp"

using namespace cmi::runner;

namespace {

std::filesystem::path fresh_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("cmi_runner_" + name);
  std::filesystem::remove_all(dir);
  return dir;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

ExperimentConfig small_gaussian() {
  ExperimentConfig c = preset("gaussian-mi");
  c.n_points = 256;
  c.epochs = 2;
  c.negatives = 16;
  c.mi_eval_points = 300;
  c.sweep_key.clear();
  c.sweep_values.clear();
  c.seeds = {0};
  return c;
}

ExperimentConfig small_spirals() {
  ExperimentConfig c = preset("spiral-sweep");
  c.n_points = 200;
  c.test_points = 100;
  c.negatives = 32;
  c.batch_size = 32;
  c.steps = 30;
  c.encoder_hidden = 16;
  c.sweep_key.clear();
  c.sweep_values.clear();
  c.seeds = {0};
  return c;
}

}  // namespace

TEST(Runner, SmallGaussianRunLogsEveryStep) {
  const ExperimentConfig c = small_gaussian();
  std::size_t seen = 0;
  RunObserver obs;
  obs.on_step = [&](const StepRecord& s) { EXPECT_EQ(s.step, seen++); };
  const RunRecord r = run_single(c, 0, obs);
  EXPECT_EQ(r.steps.size(), detail::total_steps(c));
  EXPECT_EQ(seen, r.steps.size());
  EXPECT_TRUE(std::isfinite(r.final_mi));
  EXPECT_LE(r.final_mi, std::log(static_cast<double>(c.negatives + 1)) + 1e-12);
  EXPECT_TRUE(std::isnan(r.knn_acc));
  EXPECT_EQ(r.wall_seconds, 0.0);
  EXPECT_EQ(r.config_hash, config_hash(c));
}

TEST(Runner, ZeroTrainingStepsGiveEmptyLogAndInitProbe) {
  ExperimentConfig c = small_spirals();
  c.steps = 0;
  c.epochs = 0;
  const RunRecord r = run_single(c, 0);
  EXPECT_TRUE(r.steps.empty());
  EXPECT_GE(r.knn_acc, 0.0);
  EXPECT_LE(r.knn_acc, 1.0);
  EXPECT_GE(r.logistic_acc, 0.0);
  // The probe then reflects the untrained encoder, which differs from a trained one.
  const RunRecord trained = run_single(small_spirals(), 0);
  EXPECT_FALSE(trained.steps.empty());
}

TEST(Runner, ReplayIsByteIdentical) {
  ExperimentConfig c = small_gaussian();
  c.seeds = {0, 1};
  const auto a = fresh_dir("replay_a");
  const auto b = fresh_dir("replay_b");
  run_experiment(c, a);
  run_experiment(c, b);
  for (const char* f : {"summary.csv", "steps.csv", "sweep.csv", "config.txt"})
    EXPECT_EQ(slurp(a / f), slurp(b / f)) << f;
}

TEST(Runner, SweepArmsShareDataAndInitialization) {
  RunStreams a(7), b(7), c(8);
  EXPECT_EQ(a.data, b.data);
  EXPECT_EQ(a.init, b.init);
  EXPECT_NE(a.data, c.data);
  EXPECT_NE(a.data, a.init);
}

TEST(Runner, PlanIsSweepMajor) {
  ExperimentConfig c = small_gaussian();
  c.sweep_key = "negatives.outer_percent";
  c.sweep_values = {"100", "50"};
  c.seeds = {3, 4, 5};
  const auto plan = plan_runs(c);
  ASSERT_EQ(plan.size(), 6u);
  for (std::size_t i = 0; i < plan.size(); ++i) {
    EXPECT_EQ(plan[i].index, i);
    EXPECT_EQ(plan[i].sweep_value, i < 3 ? "100" : "50");
    EXPECT_EQ(plan[i].seed, 3 + i % 3);
  }
  EXPECT_EQ(plan[4].config.objective.negatives.outer_percent, 50.0);
  c.sweep_values = {"100", "-4"};
  EXPECT_THROW(plan_runs(c), cmi::ConfigError);
}

TEST(Runner, InvalidConfigIsAConfigError) {
  ExperimentConfig c = small_gaussian();
  c.batch_size = 0;
  EXPECT_THROW(run_single(c, 0), cmi::ConfigError);
}

TEST(Runner, DivergenceRaisesRunErrorAndLeavesParseableFiles) {
  ExperimentConfig c = small_gaussian();
  c.optimizer.learning_rate = 1e300;
  c.optimizer.kind = cmi::OptimizerKind::SgdMomentum;
  c.optimizer.momentum = 0.0;
  const auto dir = fresh_dir("diverge");
  try {
    run_experiment(c, dir);
    FAIL() << "expected a RunError";
  } catch (const RunError& e) {
    const CsvTable steps = read_csv(dir / "steps.csv");
    EXPECT_EQ(steps.rows.size(), e.step());
    for (const auto& row : steps.rows) EXPECT_EQ(row.size(), steps.header.size());
    const CsvTable errors = read_csv(dir / "errors.csv");
    ASSERT_EQ(errors.rows.size(), 1u);
    EXPECT_EQ(errors.rows[0][errors.column("step")], std::to_string(e.step()));
  }
}

TEST(Runner, SmallViewsRunWithProbes) {
  ExperimentConfig c = small_spirals();
  c.steps = 0;
  c.epochs = 2;
  c.probe_every_epochs = 1;
  std::vector<ProbeRecord> probes;
  RunObserver obs;
  obs.on_probe = [&](const ProbeRecord& p) { probes.push_back(p); };
  Representations reps;
  const RunRecord r = run_single(c, 1, obs, &reps);
  EXPECT_EQ(r.steps.size(), 2 * detail::steps_per_epoch(c));
  EXPECT_EQ(probes.size(), r.probes.size());
  ASSERT_FALSE(r.probes.empty());
  EXPECT_EQ(r.probes.back().knn_acc, r.knn_acc);
  EXPECT_EQ(reps.train.rows(), c.n_points);
  EXPECT_EQ(reps.train.cols(), c.encoder_output);
  EXPECT_EQ(reps.train_labels.size(), c.n_points);
  for (const auto& s : r.steps) EXPECT_TRUE(std::isfinite(s.loss));
}

TEST(Runner, ParallelJobsMatchSerial) {
  ExperimentConfig c = small_gaussian();
  c.sweep_key = "negatives.outer_percent";
  c.sweep_values = {"100", "50", "10"};
  c.seeds = {0, 1};
  const auto serial_dir = fresh_dir("serial");
  const auto parallel_dir = fresh_dir("parallel");
  c.jobs = 1;
  const auto serial = run_experiment(c, serial_dir);
  c.jobs = 4;
  const auto parallel = run_experiment(c, parallel_dir);
  EXPECT_EQ(slurp(serial_dir / "summary.csv"), slurp(parallel_dir / "summary.csv"));
  ASSERT_EQ(serial.size(), parallel.size());
  for (std::size_t i = 0; i < serial.size(); ++i) EXPECT_EQ(serial[i].final_mi, parallel[i].final_mi);
}

TEST(Runner, SummarizeArms) {
  std::vector<RunRecord> recs(4);
  const double mi[] = {1.0, 3.0, 2.0, 2.0};
  for (std::size_t i = 0; i < 4; ++i) {
    recs[i].sweep_value = i < 2 ? "a" : "b";
    recs[i].final_mi = mi[i];
    recs[i].knn_acc = 0.5 + 0.1 * i;
  }
  const auto arms = summarize_arms(recs);
  ASSERT_EQ(arms.size(), 2u);
  EXPECT_EQ(arms[0].sweep_value, "a");
  EXPECT_EQ(arms[0].runs, 2u);
  EXPECT_DOUBLE_EQ(arms[0].mean_final_mi, 2.0);
  EXPECT_DOUBLE_EQ(arms[0].std_final_mi, std::sqrt(2.0));
  EXPECT_DOUBLE_EQ(arms[1].std_final_mi, 0.0);
  EXPECT_NEAR(arms[1].mean_knn, 0.75, 1e-12);
}

TEST(Runner, RandomBankInitializationIsAnOption) {
  ExperimentConfig c = small_spirals();
  c.steps = 5;
  const RunRecord encoded = run_single(c, 0);
  c.bank_random_init = true;
  const RunRecord random = run_single(c, 0);
  ASSERT_EQ(random.steps.size(), 5u);
  for (const auto& s : random.steps) EXPECT_TRUE(std::isfinite(s.loss));
  // An untrained encoder maps every view to nearly the same direction, so the
  // encoded bank starts near the uniform loss log K; random rows do not.
  EXPECT_NEAR(encoded.steps[0].loss, std::log(static_cast<double>(c.negatives + 1)), 0.1);
  EXPECT_NE(encoded.steps[0].loss, random.steps[0].loss);
  EXPECT_NE(config_hash(c), config_hash(small_spirals()));
}
