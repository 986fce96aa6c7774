#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <functional>
#include <mutex>
#include <numeric>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "cmi/bank.hpp"
#include "cmi/datasets.hpp"
#include "cmi/errors.hpp"
#include "cmi/estimators.hpp"
#include "cmi/kmeans.hpp"
#include "cmi/ndmath/autodiff.hpp"
#include "cmi/ndmath/mlp.hpp"
#include "cmi/ndmath/optim.hpp"
#include "cmi/objectives.hpp"
#include "cmi/probes.hpp"
#include "cmi/rng.hpp"
#include "cmi/runner/config.hpp"
#include "cmi/runner/metrics.hpp"
#include "cmi/runner/presets.hpp"
#include "cmi/samplers.hpp"

namespace cmi::runner {

/// A run that failed partway; carries the step at which it stopped.
class RunError : public std::runtime_error {
 public:
  RunError(const std::string& what, std::size_t step) : std::runtime_error(what), step_(step) {}
  std::size_t step() const { return step_; }

 private:
  std::size_t step_;
};

/// Callbacks for incremental output; any may be empty.
struct RunObserver {
  std::function<void(const StepRecord&)> on_step;
  std::function<void(const ProbeRecord&)> on_probe;
};

/// Final train/test embeddings of a views run (for scatter plots).
struct Representations {
  Tensor train;
  std::vector<std::size_t> train_labels;
};

/// Independent random streams of one run, all derived from its seed. The
/// data and initialization streams do not depend on the sweep value, so
/// arms of a sweep with the same seed share data and starting weights.
struct RunStreams {
  Rng data;
  Rng init;
  Rng train;
  Rng eval;

  explicit RunStreams(std::uint64_t seed)
      : data(derive_seed(seed, 1)), init(derive_seed(seed, 2)), train(derive_seed(seed, 3)), eval(derive_seed(seed, 4)) {}
};

namespace detail {

inline std::size_t steps_per_epoch(const ExperimentConfig& c) { return (c.n_points + c.batch_size - 1) / c.batch_size; }

inline std::size_t total_steps(const ExperimentConfig& c) {
  return c.steps > 0 ? c.steps : c.epochs * steps_per_epoch(c);
}

/// Epoch-ordered minibatches: a fresh shuffle per epoch, the last batch may be short.
class BatchStream {
 public:
  BatchStream(std::size_t n, std::size_t batch) : order_(n), batch_(batch) { std::iota(order_.begin(), order_.end(), 0); }

  std::vector<std::size_t> next(Rng& rng) {
    if (pos_ == 0) std::shuffle(order_.begin(), order_.end(), rng);
    const std::size_t end = std::min(pos_ + batch_, order_.size());
    std::vector<std::size_t> out(order_.begin() + static_cast<std::ptrdiff_t>(pos_),
                                 order_.begin() + static_cast<std::ptrdiff_t>(end));
    pos_ = end == order_.size() ? 0 : end;
    return out;
  }

 private:
  std::vector<std::size_t> order_;
  std::size_t batch_;
  std::size_t pos_ = 0;
};

inline double anneal_clock(const ExperimentConfig& c, std::size_t step) {
  if (c.anneal_granularity == AnnealGranularity::Step) return static_cast<double>(step);
  return static_cast<double>(step / steps_per_epoch(c));
}

inline Tensor gather(const Tensor& x, std::span<const std::size_t> rows) {
  Tensor out = Tensor::zeros(rows.size(), x.cols());
  for (std::size_t i = 0; i < rows.size(); ++i)
    std::copy_n(x.row_span(rows[i]).begin(), x.cols(), out.row_span(i).begin());
  return out;
}

inline Tensor select_columns(const Tensor& x, std::span<const std::size_t> cols) {
  Tensor out = Tensor::zeros(x.rows(), cols.size());
  for (std::size_t i = 0; i < x.rows(); ++i)
    for (std::size_t j = 0; j < cols.size(); ++j) out.at(i, j) = x.at(i, cols[j]);
  return out;
}

inline Tensor concat_columns(const Tensor& a, const Tensor& b) {
  Tensor out = Tensor::zeros(a.rows(), a.cols() + b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    std::copy_n(a.row_span(i).begin(), a.cols(), out.row_span(i).begin());
    std::copy_n(b.row_span(i).begin(), b.cols(), out.row_span(i).begin() + static_cast<std::ptrdiff_t>(a.cols()));
  }
  return out;
}

inline double mean_of(const std::vector<double>& xs) {
  if (xs.empty()) return std::nan("");
  double s = 0.0;
  for (double x : xs) s += x;
  return s / static_cast<double>(xs.size());
}

// -------------------------------------------------------------------------
// paired experiments: two encoders on (x, y) samples of a 2-D Gaussian

inline RunRecord run_paired(const ExperimentConfig& c, std::uint64_t seed, const RunObserver& obs) {
  RunStreams rs(seed);
  const std::size_t n = c.n_points;
  const GaussianPairs pairs = sample_gaussian_pairs(c.gaussian, n, rs.data);
  const Tensor x = Tensor::column(pairs.x);
  const Tensor y = Tensor::column(pairs.y);

  Mlp gx = Mlp::make(1, c.encoder_hidden, c.encoder_output, c.encoder_layers, c.encoder_l2, rs.init);
  Mlp gy = Mlp::make(1, c.encoder_hidden, c.encoder_output, c.encoder_layers, c.encoder_l2, rs.init);
  Witness witness =
      Witness::make(c.witness, c.encoder_output, c.objective.temperature, rs.init, c.witness_depth, c.witness_hidden);
  std::vector<Parameter*> params = gx.parameters();
  for (Parameter* p : gy.parameters()) params.push_back(p);
  for (Parameter* p : witness.parameters()) params.push_back(p);
  Optimizer opt(c.optimizer, params);

  const ObjectiveSpec spec = c.objective.family == ObjectiveFamily::TDisc ? c.objective : c.objective.as_t_disc();
  if (spec.negatives.needs_clusters()) throw ConfigError("paired experiments do not support cave negatives");
  const std::size_t k = c.negatives + 1;
  const double log_k = std::log(static_cast<double>(k));

  RunRecord rec;
  BatchStream batches(n, c.batch_size);
  const std::size_t total = total_steps(c);
  for (std::size_t step = 0; step < total; ++step) {
    const NegativeSpec neg = spec.negatives.at(anneal_clock(c, step));
    const std::vector<std::size_t> batch = batches.next(rs.train);
    Graph g;
    Var qx = gx.forward(g, g.constant(gather(x, batch)));
    // Every y is re-encoded each step: the negatives' embeddings are current
    // and receive gradient (a bank with alpha = 0).
    Var ty = gy.forward(g, g.constant(y));
    const MemoryBank view_of_y(g.value(ty), 0.0);
    const Tensor& queries = g.value(qx);
    std::vector<AnchorTerm> terms;
    terms.reserve(batch.size());
    for (std::size_t b = 0; b < batch.size(); ++b) {
      const std::size_t i = batch[b];
      // Restricted negatives are the y's whose representation is closest to
      // the query's (the current x), i.e. the highest-scoring ones.
      std::vector<std::size_t> negs = sample_negatives(neg, view_of_y, queries.row_span(b), i, c.negatives, rs.train);
      AnchorTerm t{b, {i}, {i}};
      t.denominator.insert(t.denominator.end(), negs.begin(), negs.end());
      terms.push_back(std::move(t));
    }
    Var loss = contrastive_loss(g, witness, qx, ty, terms);
    const double lv = g.value(loss).item();
    opt.zero_grad();
    g.backward(loss);
    opt.step();
    StepRecord sr{step, lv, -lv + log_k, neg.outer_percent};
    rec.steps.push_back(sr);
    if (obs.on_step) obs.on_step(sr);
  }

  // Final estimate on fresh pairs with the trained critic frozen.
  const NegativeSpec neg = spec.negatives.at(anneal_clock(c, total));
  const std::size_t m = std::max<std::size_t>(c.mi_eval_points, 2);
  const GaussianPairs held = sample_gaussian_pairs(c.gaussian, m, rs.eval);
  const Tensor ex = gx.apply(Tensor::column(held.x));
  const MemoryBank ey(gy.apply(Tensor::column(held.y)), 0.0);
  std::vector<AnchorTerm> terms;
  terms.reserve(m);
  for (std::size_t i = 0; i < m; ++i) {
    std::vector<std::size_t> negs = sample_negatives(neg, ey, ex.row_span(i), i, c.negatives, rs.eval);
    AnchorTerm t{i, {i}, {i}};
    t.denominator.insert(t.denominator.end(), negs.begin(), negs.end());
    terms.push_back(std::move(t));
  }
  const std::vector<double> losses = contrastive_loss_terms(ex, ey.entries(), witness, terms);
  rec.final_mi = -mean_of(losses) + log_k;
  return rec;
}

// -------------------------------------------------------------------------
// views experiments: one encoder per channel, memory banks, labeled probes

struct Channel {
  std::vector<std::size_t> coords;  // input coordinates this encoder sees
  Mlp encoder;
  MemoryBank bank;
  std::vector<std::size_t> clusters;
};

inline RunRecord run_views(const ExperimentConfig& c, std::uint64_t seed, const RunObserver& obs,
                           Representations* reps) {
  RunStreams rs(seed);
  const std::size_t n = c.n_points;
  LabeledPoints all = c.data == DataKind::Spirals
                          ? make_spirals(n + c.test_points, rs.data)
                          : make_blobs(n + c.test_points, c.blob_classes, c.blob_dim, c.blob_separation, c.blob_spread,
                                       rs.data);
  std::vector<std::size_t> train_rows(n), test_rows(c.test_points);
  std::iota(train_rows.begin(), train_rows.end(), 0);
  std::iota(test_rows.begin(), test_rows.end(), n);
  const Tensor x = gather(all.points, train_rows);
  const Tensor x_test = gather(all.points, test_rows);
  const std::vector<std::size_t> y(all.labels.begin(), all.labels.begin() + static_cast<std::ptrdiff_t>(n));
  const std::vector<std::size_t> y_test(all.labels.begin() + static_cast<std::ptrdiff_t>(n), all.labels.end());
  const std::size_t dim = x.cols();

  const ObjectiveSpec spec = [&] {
    if (c.objective.family == ObjectiveFamily::IrNce || c.objective.family == ObjectiveFamily::LaNce) {
      return c.objective.as_t_disc();
    }
    return c.objective;
  }();
  const bool legacy_softmax = c.objective.family == ObjectiveFamily::IrSoftmax;
  const bool legacy_la = c.objective.family == ObjectiveFamily::LaOriginal;

  // One channel normally; two for the channel-split objective.
  std::vector<Channel> channels;
  std::vector<std::vector<std::size_t>> coord_groups;
  if (c.objective.channel_split) {
    c.objective.channel_split->validate(dim);
    coord_groups = {c.objective.channel_split->first, c.objective.channel_split->second};
  } else {
    std::vector<std::size_t> allc(dim);
    std::iota(allc.begin(), allc.end(), 0);
    coord_groups = {allc};
  }
  for (const auto& coords : coord_groups) {
    Channel ch{coords,
               Mlp::make(coords.size(), c.encoder_hidden, c.encoder_output, c.encoder_layers, c.encoder_l2, rs.init),
               MemoryBank(n, c.encoder_output, c.bank_alpha, c.bank_renormalize),
               {}};
    channels.push_back(std::move(ch));
  }
  Witness witness =
      Witness::make(c.witness, c.encoder_output, c.objective.temperature, rs.init, c.witness_depth, c.witness_hidden);
  std::vector<Parameter*> params;
  for (Channel& ch : channels)
    for (Parameter* p : ch.encoder.parameters()) params.push_back(p);
  for (Parameter* p : witness.parameters()) params.push_back(p);
  Optimizer opt(c.optimizer, params);

  auto draw_views = [&](std::span<const std::size_t> rows, Rng& rng) {
    Tensor v = Tensor::zeros(rows.size(), dim);
    for (std::size_t b = 0; b < rows.size(); ++b) {
      const std::vector<double> view = apply_view(c.view, x.row_span(rows[b]), rng);
      std::copy(view.begin(), view.end(), v.row_span(b).begin());
    }
    return v;
  };

  // Seed every bank with random unit rows or with the encoding of one view
  // of each point.
  if (c.objective.use_memory_bank && c.bank_random_init) {
    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<double> row(c.encoder_output);
    for (Channel& ch : channels) {
      for (std::size_t i = 0; i < n; ++i) {
        double norm = 0.0;
        while (!(norm > 0.0)) {
          for (double& v : row) v = normal(rs.init);
          norm = std::sqrt(dot(row, row));
        }
        for (double& v : row) v /= norm;
        ch.bank.assign(i, row);
      }
    }
  } else if (c.objective.use_memory_bank) {
    const Tensor v0 = draw_views(train_rows, rs.train);
    for (Channel& ch : channels) {
      const Tensor e = ch.encoder.apply(select_columns(v0, ch.coords));
      for (std::size_t i = 0; i < n; ++i) ch.bank.assign(i, e.row_span(i));
    }
  }

  const bool needs_clusters = spec.negatives.needs_clusters() || spec.neighbors.needs_clusters();
  const std::size_t cluster_k =
      spec.negatives.needs_clusters() ? spec.negatives.kmeans_k : spec.neighbors.kmeans_k;
  const std::size_t cluster_restarts =
      spec.negatives.needs_clusters() ? spec.negatives.kmeans_restarts : spec.neighbors.kmeans_restarts;
  auto recluster = [&] {
    for (Channel& ch : channels) ch.clusters = kmeans(ch.bank.entries(), cluster_k, cluster_restarts, rs.train).assignment;
  };

  auto embed = [&](const Tensor& pts) {
    Tensor out = channels[0].encoder.apply(select_columns(pts, channels[0].coords));
    for (std::size_t k = 1; k < channels.size(); ++k)
      out = concat_columns(out, channels[k].encoder.apply(select_columns(pts, channels[k].coords)));
    return out;
  };
  const LogisticOptions probe_opts{c.logistic_max_epochs, c.logistic_lr, 1e-7};
  auto probe = [&](ProbeRecord& pr) {
    const Tensor tr = embed(x);
    const Tensor te = embed(x_test);
    pr.knn_acc = knn_probe(tr, y, te, y_test, c.knn_k).accuracy;
    pr.logistic_acc = logistic_probe(tr, y, te, y_test, probe_opts).accuracy;
  };

  const std::size_t spe = steps_per_epoch(c);
  const std::size_t total = total_steps(c);
  const std::size_t k_total = c.objective.use_memory_bank ? c.negatives + 1 : std::min(c.batch_size, n);
  RunRecord rec;
  BatchStream batches(n, c.batch_size);
  std::vector<double> last_epoch_mi;
  for (std::size_t step = 0; step < total; ++step) {
    const double clock = anneal_clock(c, step);
    const NegativeSpec neg = spec.negatives.at(clock);
    const NeighborSpec nb = spec.neighbors.at(clock);
    if (needs_clusters && c.objective.use_memory_bank && step % (spe * std::max<std::size_t>(c.kmeans_every_epochs, 1)) == 0) {
      recluster();
    }
    const std::vector<std::size_t> batch = batches.next(rs.train);
    const Tensor views = draw_views(batch, rs.train);
    Graph g;
    std::vector<Var> queries;
    for (Channel& ch : channels) queries.push_back(ch.encoder.forward(g, g.constant(select_columns(views, ch.coords))));

    Var loss;
    std::size_t close_size = 1;
    const std::size_t nch = channels.size();
    for (std::size_t qc = 0; qc < nch; ++qc) {
      // Query channel qc is contrasted against the other channel's bank (or its own with one channel).
      Channel& target = channels[(qc + 1) % nch];
      Var targets;
      std::vector<AnchorTerm> terms;
      terms.reserve(batch.size());
      if (c.objective.use_memory_bank) {
        targets = g.constant(target.bank.entries());
        const Tensor& qv = g.value(queries[qc]);
        for (std::size_t b = 0; b < batch.size(); ++b) {
          const std::size_t i = batch[b];
          std::vector<std::size_t> negs =
              sample_negatives(neg, target.bank, qv.row_span(b), i, c.negatives, rs.train, target.clusters);
          AnchorTerm t{b, sample_close_neighbors(nb, target.bank, qv.row_span(b), i, c.neighbor_count - 1, rs.train,
                                                 target.clusters),
                       {i}};
          if (legacy_la && !c.objective.enforce_anchor_in_close && t.numerator.size() > 1) {
            t.numerator.erase(t.numerator.begin());
          }
          t.denominator.insert(t.denominator.end(), negs.begin(), negs.end());
          if (legacy_la) t.denominator.insert(t.denominator.end(), t.numerator.begin(), t.numerator.end());
          close_size = t.numerator.size();
          terms.push_back(std::move(t));
        }
      } else {
        // Second fresh view of each minibatch item: positives and negatives
        // come from the batch itself.
        const Tensor views2 = draw_views(batch, rs.train);
        targets = target.encoder.forward(g, g.constant(select_columns(views2, target.coords)));
        for (std::size_t b = 0; b < batch.size(); ++b) {
          AnchorTerm t{b, {b}, {b}};
          for (std::size_t j = 0; j < batch.size(); ++j)
            if (j != b) t.denominator.push_back(j);
          terms.push_back(std::move(t));
        }
      }
      Var part;
      if (legacy_softmax) part = legacy::ir_softmax_loss(g, witness, queries[qc], targets, terms, c.objective.kappa);
      else if (legacy_la) part = legacy::la_original_loss(g, witness, queries[qc], targets, terms, c.objective.kappa);
      else part = contrastive_loss(g, witness, queries[qc], targets, terms);
      loss = loss.valid() ? g.add(loss, part) : part;
    }
    const double lv = g.value(loss).item();
    opt.zero_grad();
    g.backward(loss);
    opt.step();
    if (c.objective.use_memory_bank) {
      for (std::size_t qc = 0; qc < nch; ++qc) {
        const Tensor& qv = g.value(queries[qc]);
        for (std::size_t b = 0; b < batch.size(); ++b) channels[qc].bank.update(batch[b], qv.row_span(b));
      }
    }
    const double per_channel = lv / static_cast<double>(nch);
    const double mi = -per_channel + std::log(static_cast<double>(k_total)) - std::log(static_cast<double>(close_size));
    StepRecord sr{step, lv, mi, neg.outer_percent};
    rec.steps.push_back(sr);
    if (obs.on_step) obs.on_step(sr);
    if (step + spe >= total) last_epoch_mi.push_back(mi);
    const std::size_t epoch_done = (step + 1) / spe;
    if (c.probe_every_epochs > 0 && (step + 1) % spe == 0 && epoch_done % c.probe_every_epochs == 0) {
      ProbeRecord pr{epoch_done, 0.0, 0.0};
      probe(pr);
      rec.probes.push_back(pr);
      if (obs.on_probe) obs.on_probe(pr);
    }
  }
  ProbeRecord final_probe;
  probe(final_probe);
  rec.knn_acc = final_probe.knn_acc;
  rec.logistic_acc = final_probe.logistic_acc;
  rec.final_mi = mean_of(last_epoch_mi);
  if (reps != nullptr) {
    reps->train = embed(x);
    reps->train_labels = y;
  }
  return rec;
}

}  // namespace detail

/// Trains one configuration with one seed. Errors abort the run; the
/// thrown RunError names the step that failed.
inline RunRecord run_single(const ExperimentConfig& c, std::uint64_t seed, const RunObserver& obs = {},
                            Representations* reps = nullptr) {
  validate(c);
  const auto t0 = std::chrono::steady_clock::now();
  std::size_t last_step = 0;
  RunObserver tracking = obs;
  tracking.on_step = [&](const StepRecord& s) {
    last_step = s.step + 1;
    if (obs.on_step) obs.on_step(s);
  };
  RunRecord rec;
  try {
    rec = c.kind == ExperimentKind::Paired ? detail::run_paired(c, seed, tracking)
                                           : detail::run_views(c, seed, tracking, reps);
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw RunError(std::string(e.what()), last_step);
  }
  rec.config_hash = config_hash(c);
  rec.seed = seed;
  rec.wall_seconds =
      c.wall_clock ? std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count() : 0.0;
  return rec;
}

/// One (sweep arm, seed) unit of work.
struct PlannedRun {
  std::size_t index = 0;
  ExperimentConfig config;
  std::uint64_t seed = 0;
  std::string sweep_value;
};

/// Expands sweep values and seeds into concrete runs (sweep-major order).
inline std::vector<PlannedRun> plan_runs(const ExperimentConfig& base) {
  validate(base);
  std::vector<std::string> values = base.sweep_values;
  if (base.sweep_key.empty()) values = {""};
  std::vector<PlannedRun> runs;
  for (const std::string& v : values) {
    ExperimentConfig c = base;
    if (!base.sweep_key.empty()) {
      if (base.sweep_key == "variant") apply_variant(c, v);
      else set_value(c, base.sweep_key, v);
    }
    validate(c);
    for (std::uint64_t s : base.seeds) runs.push_back({runs.size(), c, s, v});
  }
  return runs;
}

/// Runs every planned run, streaming metrics into `out_dir` (when given).
/// Runs are independent and may execute on `jobs` threads; the returned
/// records and summary.csv are in plan order regardless.
inline std::vector<RunRecord> run_experiment(const ExperimentConfig& base,
                                             const std::optional<std::filesystem::path>& out_dir = std::nullopt) {
  std::vector<PlannedRun> plan = plan_runs(base);
  std::optional<MetricsWriter> writer;
  if (out_dir) {
    writer.emplace(*out_dir);
    writer->write_config(base);
  }
  std::vector<std::optional<RunRecord>> results(plan.size());
  std::mutex mu;
  std::exception_ptr failure;
  std::atomic<std::size_t> next{0};

  auto publish_summary = [&] {
    if (!writer) return;
    std::vector<const RunRecord*> rows;
    for (const auto& r : results)
      if (r) rows.push_back(&*r);
    writer->write_summary(rows);
  };

  auto worker = [&] {
    while (true) {
      {
        std::lock_guard lock(mu);
        if (failure) return;
      }
      const std::size_t idx = next.fetch_add(1);
      if (idx >= plan.size()) return;
      const PlannedRun& pr = plan[idx];
      const std::string hash = config_hash(pr.config);
      RunObserver obs;
      if (writer) {
        writer->sweep_arm(hash, pr.seed, base.sweep_key, pr.sweep_value);
        obs.on_step = [&, hash](const StepRecord& s) { writer->step(hash, pr.seed, s); };
        obs.on_probe = [&, hash](const ProbeRecord& p) { writer->probe(hash, pr.seed, p); };
      }
      try {
        Representations reps;
        const bool want_reps = writer && pr.config.representations && pr.config.kind == ExperimentKind::Views;
        RunRecord rec = run_single(pr.config, pr.seed, obs, want_reps ? &reps : nullptr);
        rec.sweep_key = base.sweep_key;
        rec.sweep_value = pr.sweep_value;
        if (want_reps) {
          write_points_csv(writer->dir() / ("representations_" + hash + "_" + std::to_string(pr.seed) + ".csv"),
                           reps.train, reps.train_labels);
        }
        std::lock_guard lock(mu);
        results[idx] = std::move(rec);
        publish_summary();
      } catch (const RunError& e) {
        if (writer) writer->error(hash, pr.seed, e.step(), e.what());
        std::lock_guard lock(mu);
        if (!failure) failure = std::current_exception();
      } catch (...) {
        if (writer) writer->error(hash, pr.seed, 0, "run failed before training");
        std::lock_guard lock(mu);
        if (!failure) failure = std::current_exception();
      }
    }
  };

  const std::size_t jobs = std::min<std::size_t>(std::max<std::size_t>(base.jobs, 1), plan.size());
  if (jobs <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < jobs; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (failure) std::rethrow_exception(failure);
  std::vector<RunRecord> out;
  for (auto& r : results) out.push_back(std::move(*r));
  return out;
}

/// Mean and sample standard deviation of final_mi per sweep value, in plan order.
struct ArmSummary {
  std::string sweep_value;
  std::size_t runs = 0;
  double mean_final_mi = 0.0;
  double std_final_mi = 0.0;
  double mean_knn = 0.0;
  double mean_logistic = 0.0;
};

inline std::vector<ArmSummary> summarize_arms(const std::vector<RunRecord>& records) {
  std::vector<ArmSummary> arms;
  for (const RunRecord& r : records) {
    auto it = std::find_if(arms.begin(), arms.end(), [&](const ArmSummary& a) { return a.sweep_value == r.sweep_value; });
    if (it == arms.end()) {
      arms.push_back({r.sweep_value});
      it = arms.end() - 1;
    }
    it->runs += 1;
  }
  for (ArmSummary& a : arms) {
    std::vector<double> mi, knn, lg;
    for (const RunRecord& r : records) {
      if (r.sweep_value != a.sweep_value) continue;
      mi.push_back(r.final_mi);
      knn.push_back(r.knn_acc);
      lg.push_back(r.logistic_acc);
    }
    a.mean_final_mi = detail::mean_of(mi);
    a.mean_knn = detail::mean_of(knn);
    a.mean_logistic = detail::mean_of(lg);
    double ss = 0.0;
    for (double v : mi) ss += (v - a.mean_final_mi) * (v - a.mean_final_mi);
    a.std_final_mi = mi.size() > 1 ? std::sqrt(ss / static_cast<double>(mi.size() - 1)) : 0.0;
  }
  return arms;
}

}  // namespace cmi::runner
