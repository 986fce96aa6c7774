#pragma once

#include <array>
#include <charconv>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <functional>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <utility>
#include <vector>

#include "cmi/datasets.hpp"
#include "cmi/errors.hpp"
#include "cmi/estimators.hpp"
#include "cmi/ndmath/optim.hpp"
#include "cmi/objectives.hpp"
#include "cmi/samplers.hpp"

namespace cmi::runner {

enum class ExperimentKind { Paired, Views };
enum class DataKind { Gaussian, Spirals, Blobs };
enum class AnnealGranularity { Epoch, Step };

/// Everything a run needs. Defaults are the Gaussian mutual-information
/// setup; presets override from there.
struct ExperimentConfig {
  std::string name = "custom";
  ExperimentKind kind = ExperimentKind::Paired;

  DataKind data = DataKind::Gaussian;
  std::size_t n_points = 2000;
  std::size_t test_points = 2000;  // held-out labeled points (views experiments)
  GaussianPairFamily gaussian;
  std::size_t blob_classes = 4;
  std::size_t blob_dim = 8;
  double blob_separation = 3.0;
  double blob_spread = 1.0;

  ViewFunction view;

  std::size_t encoder_layers = 5;
  std::size_t encoder_hidden = 10;
  std::size_t encoder_output = 10;
  bool encoder_l2 = true;

  WitnessKind witness = WitnessKind::ScaledDot;
  std::size_t witness_depth = 2;
  std::size_t witness_hidden = 128;

  ObjectiveSpec objective;

  std::size_t negatives = 100;  // K - 1
  std::size_t neighbor_count = 1;  // L, including the anchor
  std::size_t batch_size = 128;
  std::size_t epochs = 100;
  std::size_t steps = 0;  // > 0 overrides epochs with a fixed iteration count
  AnnealGranularity anneal_granularity = AnnealGranularity::Epoch;

  double bank_alpha = 0.5;
  bool bank_renormalize = true;
  bool bank_random_init = false;  // false: seed rows with encoded views
  std::size_t kmeans_every_epochs = 1;

  OptimizerConfig optimizer{OptimizerKind::Adam, 0.03, 0.9, 0.0, 0.9, 0.999, 1e-8};

  std::size_t knn_k = 1;
  std::size_t logistic_max_epochs = 500;
  double logistic_lr = 0.1;
  std::size_t mi_eval_points = 10000;
  std::size_t probe_every_epochs = 0;  // 0: probes only at the end

  std::string sweep_key;
  std::vector<std::string> sweep_values;

  std::vector<std::uint64_t> seeds{0, 1, 2, 3, 4};
  std::size_t jobs = 1;

  std::string output_dir = "runs";
  bool wall_clock = false;
  bool representations = false;
};

// ---------------------------------------------------------------------------
// value formatting and parsing

inline std::string format_double(double v) {
  std::array<char, 64> buf{};
  auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), res.ptr);
}

inline std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

inline std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  if (trim(s).empty()) return out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    out.push_back(trim(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

inline double parse_double(const std::string& key, const std::string& v) {
  double out = 0.0;
  const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (res.ec != std::errc() || res.ptr != v.data() + v.size()) {
    throw ConfigError("config key '" + key + "': expected a number, got '" + v + "'");
  }
  return out;
}

inline std::uint64_t parse_uint(const std::string& key, const std::string& v) {
  std::uint64_t out = 0;
  const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (res.ec != std::errc() || res.ptr != v.data() + v.size()) {
    throw ConfigError("config key '" + key + "': expected a non-negative integer, got '" + v + "'");
  }
  return out;
}

inline bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true") return true;
  if (v == "false") return false;
  throw ConfigError("config key '" + key + "': expected true or false, got '" + v + "'");
}

inline std::string format_bool(bool b) { return b ? "true" : "false"; }

template <class T>
std::string format_list(const std::vector<T>& xs, char sep = ',') {
  std::string out;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i) out += sep;
    if constexpr (std::is_same_v<T, std::string>) out += xs[i];
    else if constexpr (std::is_floating_point_v<T>) out += format_double(xs[i]);
    else out += std::to_string(xs[i]);
  }
  return out;
}

inline Mat2 parse_mat2(const std::string& key, const std::string& v) {
  const auto parts = split(v, ',');
  if (parts.size() != 4) throw ConfigError("config key '" + key + "': expected four comma-separated numbers");
  Mat2 m{};
  for (std::size_t i = 0; i < 4; ++i) m[i] = parse_double(key, parts[i]);
  return m;
}

inline std::string format_mat2(const Mat2& m) {
  return format_double(m[0]) + "," + format_double(m[1]) + "," + format_double(m[2]) + "," + format_double(m[3]);
}

/// Anneal schedule as "start_percent,end_percent,start_epoch,end_epoch"; "none" when absent.
inline std::optional<AnnealSchedule> parse_anneal(const std::string& key, const std::string& v) {
  if (v == "none" || v.empty()) return std::nullopt;
  const auto parts = split(v, ',');
  if (parts.size() != 4) throw ConfigError("config key '" + key + "': expected none or start%,end%,start_epoch,end_epoch");
  AnnealSchedule s{parse_double(key, parts[0]), parse_double(key, parts[1]), parse_double(key, parts[2]),
                   parse_double(key, parts[3])};
  if (!(s.end_epoch >= s.start_epoch)) throw ConfigError("config key '" + key + "': end epoch precedes start epoch");
  return s;
}

inline std::string format_anneal(const std::optional<AnnealSchedule>& s) {
  if (!s) return "none";
  return format_double(s->start_percent) + "," + format_double(s->end_percent) + "," + format_double(s->start_epoch) +
         "," + format_double(s->end_epoch);
}

inline std::vector<std::size_t> parse_index_list(const std::string& key, const std::string& v) {
  std::vector<std::size_t> out;
  for (const auto& p : split(v, ',')) out.push_back(parse_uint(key, p));
  return out;
}

/// Channel split as "0,1|2,3"; "none" when absent.
inline std::optional<ChannelSplit> parse_channel_split(const std::string& key, const std::string& v) {
  if (v == "none" || v.empty()) return std::nullopt;
  const auto groups = split(v, '|');
  if (groups.size() != 2) throw ConfigError("config key '" + key + "': expected none or a,b|c,d");
  return ChannelSplit{parse_index_list(key, groups[0]), parse_index_list(key, groups[1])};
}

inline std::string format_channel_split(const std::optional<ChannelSplit>& s) {
  if (!s) return "none";
  return format_list(s->first) + "|" + format_list(s->second);
}

// ---------------------------------------------------------------------------
// field table

struct Field {
  std::string key;
  std::string help;
  std::function<std::string(const ExperimentConfig&)> get;
  std::function<void(ExperimentConfig&, const std::string&)> set;
};

namespace detail {

template <class T>
Field size_field(std::string key, std::string help, T ExperimentConfig::* m) {
  return {key, std::move(help), [m](const ExperimentConfig& c) { return std::to_string(c.*m); },
          [m, key](ExperimentConfig& c, const std::string& v) { c.*m = static_cast<T>(parse_uint(key, v)); }};
}

inline Field double_field(std::string key, std::string help, std::function<double&(ExperimentConfig&)> ref) {
  return {key, std::move(help),
          [ref](const ExperimentConfig& c) { return format_double(ref(const_cast<ExperimentConfig&>(c))); },
          [ref, key](ExperimentConfig& c, const std::string& v) { ref(c) = parse_double(key, v); }};
}

inline Field bool_field(std::string key, std::string help, std::function<bool&(ExperimentConfig&)> ref) {
  return {key, std::move(help),
          [ref](const ExperimentConfig& c) { return format_bool(ref(const_cast<ExperimentConfig&>(c))); },
          [ref, key](ExperimentConfig& c, const std::string& v) { ref(c) = parse_bool(key, v); }};
}

inline Field count_field(std::string key, std::string help, std::function<std::size_t&(ExperimentConfig&)> ref) {
  return {key, std::move(help),
          [ref](const ExperimentConfig& c) { return std::to_string(ref(const_cast<ExperimentConfig&>(c))); },
          [ref, key](ExperimentConfig& c, const std::string& v) { ref(c) = static_cast<std::size_t>(parse_uint(key, v)); }};
}

}  // namespace detail

/// Every config key in serialization order.
inline const std::vector<Field>& fields() {
  using C = ExperimentConfig;
  using detail::bool_field;
  using detail::count_field;
  using detail::double_field;
  static const std::vector<Field> table = {
      {"experiment.name", "free-form run label", [](const C& c) { return c.name; },
       [](C& c, const std::string& v) { c.name = v; }},
      {"experiment.kind", "paired (two encoders on (x, y) pairs) | views (one encoder, views of one datum)",
       [](const C& c) { return std::string(c.kind == ExperimentKind::Paired ? "paired" : "views"); },
       [](C& c, const std::string& v) {
         if (v == "paired") c.kind = ExperimentKind::Paired;
         else if (v == "views") c.kind = ExperimentKind::Views;
         else throw ConfigError("experiment.kind: expected paired or views, got '" + v + "'");
       }},
      {"data.kind", "gaussian | spirals | blobs",
       [](const C& c) {
         switch (c.data) {
           case DataKind::Gaussian: return std::string("gaussian");
           case DataKind::Spirals: return std::string("spirals");
           case DataKind::Blobs: return std::string("blobs");
         }
         return std::string("?");
       },
       [](C& c, const std::string& v) {
         if (v == "gaussian") c.data = DataKind::Gaussian;
         else if (v == "spirals") c.data = DataKind::Spirals;
         else if (v == "blobs") c.data = DataKind::Blobs;
         else throw ConfigError("data.kind: expected gaussian, spirals or blobs, got '" + v + "'");
       }},
      count_field("data.n_points", "training points", [](C& c) -> std::size_t& { return c.n_points; }),
      count_field("data.test_points", "held-out labeled points for the probes",
                  [](C& c) -> std::size_t& { return c.test_points; }),
      {"data.sigma_z", "latent covariance, row-major a,b,c,d", [](const C& c) { return format_mat2(c.gaussian.sigma_z); },
       [](C& c, const std::string& v) { c.gaussian.sigma_z = parse_mat2("data.sigma_z", v); }},
      {"data.sigma_eps", "noise covariance, row-major a,b,c,d",
       [](const C& c) { return format_mat2(c.gaussian.sigma_eps); },
       [](C& c, const std::string& v) { c.gaussian.sigma_eps = parse_mat2("data.sigma_eps", v); }},
      count_field("data.blob_classes", "number of blob classes", [](C& c) -> std::size_t& { return c.blob_classes; }),
      count_field("data.blob_dim", "blob ambient dimension", [](C& c) -> std::size_t& { return c.blob_dim; }),
      double_field("data.blob_separation", "norm of each blob center",
                   [](C& c) -> double& { return c.blob_separation; }),
      double_field("data.blob_spread", "per-coordinate std around a center",
                   [](C& c) -> double& { return c.blob_spread; }),
      {"view.kind", "identity | uniform-noise | channel | permute", [](const C& c) { return std::string(to_string(c.view.kind)); },
       [](C& c, const std::string& v) { c.view.kind = view_kind_from_string(v); }},
      double_field("view.eta", "uniform-noise width: offsets ~ U(0, eta)", [](C& c) -> double& { return c.view.eta; }),
      {"view.selector", "channel view: kept coordinates", [](const C& c) { return format_list(c.view.selector); },
       [](C& c, const std::string& v) { c.view.selector = parse_index_list("view.selector", v); }},
      count_field("encoder.layers", "linear layers", [](C& c) -> std::size_t& { return c.encoder_layers; }),
      count_field("encoder.hidden", "hidden width", [](C& c) -> std::size_t& { return c.encoder_hidden; }),
      count_field("encoder.output_dim", "embedding width", [](C& c) -> std::size_t& { return c.encoder_output; }),
      bool_field("encoder.l2_normalize", "unit-normalize embeddings", [](C& c) -> bool& { return c.encoder_l2; }),
      {"witness.kind", "dot | scaled-dot | bilinear | concat-linear | concat-mlp",
       [](const C& c) { return std::string(to_string(c.witness)); },
       [](C& c, const std::string& v) { c.witness = witness_kind_from_string(v); }},
      count_field("witness.depth", "hidden layers of the concat-mlp head", [](C& c) -> std::size_t& { return c.witness_depth; }),
      count_field("witness.hidden", "hidden width of the concat-mlp head", [](C& c) -> std::size_t& { return c.witness_hidden; }),
      {"objective.family", "ir-nce | t-disc | la-nce | ir-softmax | la-original",
       [](const C& c) { return std::string(to_string(c.objective.family)); },
       [](C& c, const std::string& v) { c.objective.family = objective_family_from_string(v); }},
      double_field("objective.temperature", "witness temperature omega",
                   [](C& c) -> double& { return c.objective.temperature; }),
      double_field("objective.kappa", "normalizer constant of the legacy objectives",
                   [](C& c) -> double& { return c.objective.kappa; }),
      bool_field("objective.use_memory_bank", "false: a second fresh view of the minibatch is the positive set",
                 [](C& c) -> bool& { return c.objective.use_memory_bank; }),
      {"objective.channel_split", "two-channel objective: none or a,b|c,d",
       [](const C& c) { return format_channel_split(c.objective.channel_split); },
       [](C& c, const std::string& v) { c.objective.channel_split = parse_channel_split("objective.channel_split", v); }},
      bool_field("objective.legacy", "allow the legacy ir-softmax / la-original formulations",
                 [](C& c) -> bool& { return c.objective.legacy; }),
      bool_field("objective.enforce_anchor_in_close", "la-original: insert the anchor into its close set",
                 [](C& c) -> bool& { return c.objective.enforce_anchor_in_close; }),
      {"negatives.kind", "marginal | ball | ring | cave",
       [](const C& c) { return std::string(to_string(c.objective.negatives.kind)); },
       [](C& c, const std::string& v) { c.objective.negatives.kind = negative_kind_from_string(v); }},
      double_field("negatives.outer_percent", "ball radius as a rank percentile",
                   [](C& c) -> double& { return c.objective.negatives.outer_percent; }),
      double_field("negatives.inner_percent", "ring hole as a rank percentile",
                   [](C& c) -> double& { return c.objective.negatives.inner_percent; }),
      count_field("negatives.kmeans_k", "clusters for cave", [](C& c) -> std::size_t& { return c.objective.negatives.kmeans_k; }),
      count_field("negatives.kmeans_restarts", "k-means restarts for cave",
                  [](C& c) -> std::size_t& { return c.objective.negatives.kmeans_restarts; }),
      {"negatives.anneal", "none or start%,end%,start_epoch,end_epoch on the outer percent",
       [](const C& c) { return format_anneal(c.objective.negatives.anneal); },
       [](C& c, const std::string& v) { c.objective.negatives.anneal = parse_anneal("negatives.anneal", v); }},
      {"negatives.anneal_inner", "none or start%,end%,start_epoch,end_epoch on the inner percent",
       [](const C& c) { return format_anneal(c.objective.negatives.anneal_inner); },
       [](C& c, const std::string& v) { c.objective.negatives.anneal_inner = parse_anneal("negatives.anneal_inner", v); }},
      {"neighbors.kind", "none | s-neigh | k-neigh",
       [](const C& c) { return std::string(to_string(c.objective.neighbors.kind)); },
       [](C& c, const std::string& v) { c.objective.neighbors.kind = neighbor_kind_from_string(v); }},
      double_field("neighbors.close_percent", "s-neigh radius as a rank percentile",
                   [](C& c) -> double& { return c.objective.neighbors.close_percent; }),
      count_field("neighbors.kmeans_k", "clusters for k-neigh",
                  [](C& c) -> std::size_t& { return c.objective.neighbors.kmeans_k; }),
      count_field("neighbors.kmeans_restarts", "k-means restarts for k-neigh",
                  [](C& c) -> std::size_t& { return c.objective.neighbors.kmeans_restarts; }),
      {"neighbors.anneal", "none or start%,end%,start_epoch,end_epoch on the close percent",
       [](const C& c) { return format_anneal(c.objective.neighbors.anneal); },
       [](C& c, const std::string& v) { c.objective.neighbors.anneal = parse_anneal("neighbors.anneal", v); }},
      count_field("neighbors.count", "L: close-set draws per anchor including the anchor",
                  [](C& c) -> std::size_t& { return c.neighbor_count; }),
      count_field("train.negatives", "negatives per anchor (K - 1)", [](C& c) -> std::size_t& { return c.negatives; }),
      count_field("train.batch_size", "minibatch size", [](C& c) -> std::size_t& { return c.batch_size; }),
      count_field("train.epochs", "passes over the training set", [](C& c) -> std::size_t& { return c.epochs; }),
      count_field("train.steps", "fixed iteration count; 0 uses train.epochs", [](C& c) -> std::size_t& { return c.steps; }),
      {"train.anneal_granularity", "epoch | step: unit of the anneal schedules",
       [](const C& c) { return std::string(c.anneal_granularity == AnnealGranularity::Epoch ? "epoch" : "step"); },
       [](C& c, const std::string& v) {
         if (v == "epoch") c.anneal_granularity = AnnealGranularity::Epoch;
         else if (v == "step") c.anneal_granularity = AnnealGranularity::Step;
         else throw ConfigError("train.anneal_granularity: expected epoch or step, got '" + v + "'");
       }},
      double_field("bank.alpha", "memory-bank mixing rate in [0, 1)", [](C& c) -> double& { return c.bank_alpha; }),
      bool_field("bank.renormalize", "re-unit-normalize bank rows after each update",
                 [](C& c) -> bool& { return c.bank_renormalize; }),
      bool_field("bank.random_init", "start from random unit rows instead of encoding one view per point",
                 [](C& c) -> bool& { return c.bank_random_init; }),
      count_field("bank.kmeans_recompute_epochs", "recluster the bank every this many epochs",
                  [](C& c) -> std::size_t& { return c.kmeans_every_epochs; }),
      {"optimizer.kind", "sgd | adam",
       [](const C& c) { return std::string(c.optimizer.kind == OptimizerKind::Adam ? "adam" : "sgd"); },
       [](C& c, const std::string& v) {
         if (v == "adam") c.optimizer.kind = OptimizerKind::Adam;
         else if (v == "sgd") c.optimizer.kind = OptimizerKind::SgdMomentum;
         else throw ConfigError("optimizer.kind: expected sgd or adam, got '" + v + "'");
       }},
      double_field("optimizer.lr", "learning rate", [](C& c) -> double& { return c.optimizer.learning_rate; }),
      double_field("optimizer.momentum", "sgd momentum", [](C& c) -> double& { return c.optimizer.momentum; }),
      double_field("optimizer.weight_decay", "sgd weight decay", [](C& c) -> double& { return c.optimizer.weight_decay; }),
      double_field("optimizer.beta1", "adam beta1", [](C& c) -> double& { return c.optimizer.beta1; }),
      double_field("optimizer.beta2", "adam beta2", [](C& c) -> double& { return c.optimizer.beta2; }),
      double_field("optimizer.epsilon", "adam epsilon", [](C& c) -> double& { return c.optimizer.epsilon; }),
      count_field("eval.knn_k", "neighbors in the kNN probe", [](C& c) -> std::size_t& { return c.knn_k; }),
      count_field("eval.logistic_max_epochs", "logistic probe epoch cap",
                  [](C& c) -> std::size_t& { return c.logistic_max_epochs; }),
      double_field("eval.logistic_lr", "logistic probe learning rate", [](C& c) -> double& { return c.logistic_lr; }),
      count_field("eval.mi_eval_points", "fresh pairs for the final MI estimate (paired experiments)",
                  [](C& c) -> std::size_t& { return c.mi_eval_points; }),
      count_field("eval.probe_every_epochs", "probe during training every this many epochs; 0 = end only",
                  [](C& c) -> std::size_t& { return c.probe_every_epochs; }),
      {"sweep.key", "config key (or 'variant') varied across runs; empty for none",
       [](const C& c) { return c.sweep_key; }, [](C& c, const std::string& v) { c.sweep_key = v; }},
      {"sweep.values", "comma-separated values for sweep.key", [](const C& c) { return format_list(c.sweep_values); },
       [](C& c, const std::string& v) { c.sweep_values = split(v, ','); }},
      {"run.seeds", "comma-separated seeds", [](const C& c) { return format_list(c.seeds); },
       [](C& c, const std::string& v) {
         c.seeds.clear();
         for (const auto& s : split(v, ',')) c.seeds.push_back(parse_uint("run.seeds", s));
       }},
      count_field("run.jobs", "runs executed in parallel", [](C& c) -> std::size_t& { return c.jobs; }),
      {"output.dir", "directory for the CSV files", [](const C& c) { return c.output_dir; },
       [](C& c, const std::string& v) { c.output_dir = v; }},
      bool_field("output.wall_clock", "record elapsed seconds (breaks byte-identical replay)",
                 [](C& c) -> bool& { return c.wall_clock; }),
      bool_field("output.representations", "write final embeddings per run",
                 [](C& c) -> bool& { return c.representations; }),
  };
  return table;
}

inline const Field* find_field(std::string_view key) {
  for (const Field& f : fields())
    if (f.key == key) return &f;
  return nullptr;
}

inline void set_value(ExperimentConfig& c, const std::string& key, const std::string& value) {
  const Field* f = find_field(key);
  if (f == nullptr) throw ConfigError("unknown config key '" + key + "'");
  f->set(c, value);
}

inline std::string get_value(const ExperimentConfig& c, const std::string& key) {
  const Field* f = find_field(key);
  if (f == nullptr) throw ConfigError("unknown config key '" + key + "'");
  return f->get(c);
}

/// Applies a `key=value` override string.
inline void apply_override(ExperimentConfig& c, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos) throw ConfigError("override '" + assignment + "' is not of the form key=value");
  set_value(c, trim(std::string_view(assignment).substr(0, eq)), trim(std::string_view(assignment).substr(eq + 1)));
}

/// `key = value` per line, in field-table order.
inline std::string serialize(const ExperimentConfig& c) {
  std::string out;
  for (const Field& f : fields()) out += f.key + " = " + f.get(c) + "\n";
  return out;
}

/// Parses the flat text format on top of `base`. Blank lines and lines
/// starting with '#' are ignored; later keys win.
inline ExperimentConfig parse(std::string_view text, ExperimentConfig base = {}) {
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto nl = text.find('\n', start);
    const std::string_view raw = text.substr(start, nl == std::string_view::npos ? std::string_view::npos : nl - start);
    ++line_no;
    const std::string line = trim(raw);
    if (!line.empty() && line[0] != '#') {
      const auto eq = line.find('=');
      if (eq == std::string::npos) {
        throw ConfigError("config line " + std::to_string(line_no) + ": expected 'key = value', got '" + line + "'");
      }
      try {
        set_value(base, trim(std::string_view(line).substr(0, eq)), trim(std::string_view(line).substr(eq + 1)));
      } catch (const ConfigError& e) {
        throw ConfigError("config line " + std::to_string(line_no) + ": " + e.what());
      }
    }
    if (nl == std::string_view::npos) break;
    start = nl + 1;
  }
  return base;
}

inline ExperimentConfig load_file(const std::string& path, ExperimentConfig base = {}) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str(), std::move(base));
}

/// 64-bit FNV-1a over the serialized config without run/output keys, so all
/// seeds of one configuration share a hash.
inline std::string config_hash(const ExperimentConfig& c) {
  std::uint64_t h = 14695981039346656037ull;
  for (const Field& f : fields()) {
    if (f.key.rfind("run.", 0) == 0 || f.key.rfind("output.", 0) == 0 || f.key.rfind("sweep.", 0) == 0) continue;
    const std::string line = f.key + "=" + f.get(c) + "\n";
    for (unsigned char ch : line) {
      h ^= ch;
      h *= 1099511628211ull;
    }
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

/// Cross-field checks that individual parsers cannot make.
inline void validate(const ExperimentConfig& c) {
  c.objective.validate();
  c.view.validate();
  if (c.n_points < 2) throw ConfigError("data.n_points must be at least 2");
  if (c.batch_size == 0) throw ConfigError("train.batch_size must be positive");
  if (c.encoder_layers == 0) throw ConfigError("encoder.layers must be positive");
  if (c.encoder_output == 0) throw ConfigError("encoder.output_dim must be positive");
  if (c.seeds.empty()) throw ConfigError("run.seeds must list at least one seed");
  if (c.jobs == 0) throw ConfigError("run.jobs must be positive");
  if (!(c.bank_alpha >= 0.0 && c.bank_alpha < 1.0)) throw ConfigError("bank.alpha must lie in [0, 1)");
  if (c.negatives == 0 && c.objective.use_memory_bank) throw ConfigError("train.negatives must be positive");
  if (c.neighbor_count == 0) throw ConfigError("neighbors.count must be at least 1 (the anchor)");
  if (c.kind == ExperimentKind::Paired && c.data != DataKind::Gaussian) {
    throw ConfigError("experiment.kind = paired needs data.kind = gaussian");
  }
  if (c.kind == ExperimentKind::Views && c.data == DataKind::Gaussian) {
    throw ConfigError("experiment.kind = views needs labeled data (spirals or blobs)");
  }
  if (c.data == DataKind::Gaussian) c.gaussian.validate();
  if (c.data == DataKind::Spirals && (c.n_points % 2 != 0 || c.test_points % 2 != 0)) {
    throw ConfigError("spirals need even data.n_points and data.test_points");
  }
  if (!c.sweep_key.empty() && c.sweep_values.empty()) throw ConfigError("sweep.key is set but sweep.values is empty");
}

}  // namespace cmi::runner
