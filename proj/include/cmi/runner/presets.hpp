#pragma once

#include <string>
#include <utility>
#include <vector>

#include "cmi/errors.hpp"
#include "cmi/runner/config.hpp"

namespace cmi::runner {

struct PresetInfo {
  std::string name;
  std::string description;
};

inline const std::vector<PresetInfo>& preset_catalog() {
  static const std::vector<PresetInfo> list = {
      {"gaussian-mi", "InfoNCE vs restricted-negative estimates on correlated 2-D Gaussians (restriction sweep)"},
      {"spiral-sweep", "two spirals, uniform view noise eta swept from 0 to 5, logistic/kNN transfer"},
      {"alpha-sweep", "two spirals at eta = 0.4, memory-bank rate alpha swept from 0 to 0.99"},
      {"stability-compare", "legacy ir-softmax vs ir-nce on labeled blobs, identical seeds"},
      {"witness-ablation", "dot / bilinear / concat-linear / concat-mlp witnesses on labeled blobs"},
      {"cifar-style-toy", "marginal, ball, ring, cave, annealed and neighbor variants on labeled blobs"},
  };
  return list;
}

/// Named bundles of overrides, selectable with `sweep.key = variant`.
inline const std::vector<std::pair<std::string, std::vector<std::pair<std::string, std::string>>>>& variant_table() {
  static const std::vector<std::pair<std::string, std::vector<std::pair<std::string, std::string>>>> table = {
      {"ir-nce", {{"objective.family", "ir-nce"}, {"negatives.kind", "marginal"}}},
      {"ball", {{"objective.family", "t-disc"}, {"negatives.kind", "ball"}, {"negatives.outer_percent", "10"}}},
      {"ball-anneal",
       {{"objective.family", "t-disc"},
        {"negatives.kind", "ball"},
        {"negatives.outer_percent", "10"},
        {"negatives.anneal", "100,10,0,8"}}},
      {"ring",
       {{"objective.family", "t-disc"},
        {"negatives.kind", "ring"},
        {"negatives.inner_percent", "2"},
        {"negatives.outer_percent", "20"}}},
      {"ring-anneal",
       {{"objective.family", "t-disc"},
        {"negatives.kind", "ring"},
        {"negatives.inner_percent", "2"},
        {"negatives.outer_percent", "20"},
        {"negatives.anneal", "100,20,0,8"}}},
      {"cave",
       {{"objective.family", "t-disc"},
        {"negatives.kind", "cave"},
        {"negatives.outer_percent", "30"},
        {"negatives.kmeans_k", "10"}}},
      {"cave-anneal",
       {{"objective.family", "t-disc"},
        {"negatives.kind", "cave"},
        {"negatives.outer_percent", "30"},
        {"negatives.kmeans_k", "10"},
        {"negatives.anneal", "100,30,0,8"}}},
      {"la-nce",
       {{"objective.family", "la-nce"},
        {"negatives.kind", "ball"},
        {"negatives.outer_percent", "20"},
        {"neighbors.kind", "k-neigh"},
        {"neighbors.kmeans_k", "10"},
        {"neighbors.count", "4"}}},
      {"s-neigh",
       {{"objective.family", "t-disc"},
        {"negatives.kind", "ball"},
        {"negatives.outer_percent", "20"},
        {"neighbors.kind", "s-neigh"},
        {"neighbors.close_percent", "1"},
        {"neighbors.count", "4"}}},
  };
  return table;
}

inline void apply_variant(ExperimentConfig& c, const std::string& name) {
  for (const auto& [vname, overrides] : variant_table()) {
    if (vname != name) continue;
    for (const auto& [k, v] : overrides) set_value(c, k, v);
    return;
  }
  throw ConfigError("unknown variant '" + name + "'");
}

namespace detail {

inline ExperimentConfig spiral_base() {
  ExperimentConfig c;
  c.kind = ExperimentKind::Views;
  c.data = DataKind::Spirals;
  c.n_points = 10000;
  c.test_points = 2000;
  c.view.kind = ViewKind::UniformNoise;
  c.view.eta = 0.4;
  c.encoder_layers = 5;
  c.encoder_hidden = 128;
  c.encoder_output = 2;
  c.encoder_l2 = true;
  c.objective.family = ObjectiveFamily::IrNce;
  c.objective.temperature = 0.07;
  c.negatives = 4096;
  c.batch_size = 128;
  c.steps = 10000;
  c.bank_alpha = 0.5;
  c.optimizer = OptimizerConfig{OptimizerKind::SgdMomentum, 0.03, 0.9, 1e-5, 0.9, 0.999, 1e-8};
  c.seeds = {0, 1, 2};
  return c;
}

inline ExperimentConfig blobs_base() {
  ExperimentConfig c;
  c.kind = ExperimentKind::Views;
  c.data = DataKind::Blobs;
  c.n_points = 2000;
  c.test_points = 1000;
  c.blob_classes = 10;
  c.blob_dim = 16;
  c.blob_separation = 4.0;
  c.blob_spread = 1.0;
  c.view.kind = ViewKind::UniformNoise;
  c.view.eta = 1.0;
  c.encoder_layers = 3;
  c.encoder_hidden = 64;
  c.encoder_output = 16;
  c.encoder_l2 = true;
  c.objective.family = ObjectiveFamily::IrNce;
  c.objective.temperature = 0.07;
  c.negatives = 256;
  c.batch_size = 128;
  c.epochs = 10;
  c.bank_alpha = 0.5;
  c.optimizer = OptimizerConfig{OptimizerKind::SgdMomentum, 0.03, 0.9, 1e-5, 0.9, 0.999, 1e-8};
  c.seeds = {0, 1, 2};
  return c;
}

}  // namespace detail

/// Named experiment defaults.
inline ExperimentConfig preset(const std::string& name) {
  if (name == "gaussian-mi") {
    ExperimentConfig c;  // the struct defaults are this experiment
    c.name = name;
    c.objective.family = ObjectiveFamily::TDisc;
    c.objective.negatives.kind = NegativeKind::Ball;
    c.sweep_key = "negatives.outer_percent";
    c.sweep_values = {"100", "90", "75", "50", "25", "10", "5"};
    return c;
  }
  if (name == "spiral-sweep") {
    ExperimentConfig c = detail::spiral_base();
    c.name = name;
    c.sweep_key = "view.eta";
    c.sweep_values = {"0", "0.1", "0.2", "0.4", "1", "2", "5"};
    return c;
  }
  if (name == "alpha-sweep") {
    ExperimentConfig c = detail::spiral_base();
    c.name = name;
    c.sweep_key = "bank.alpha";
    c.sweep_values = {"0", "0.25", "0.5", "0.9", "0.99"};
    return c;
  }
  if (name == "stability-compare") {
    ExperimentConfig c = detail::blobs_base();
    c.name = name;
    c.objective.legacy = true;
    c.sweep_key = "objective.family";
    c.sweep_values = {"ir-softmax", "ir-nce"};
    return c;
  }
  if (name == "witness-ablation") {
    ExperimentConfig c = detail::blobs_base();
    c.name = name;
    c.sweep_key = "witness.kind";
    c.sweep_values = {"dot", "bilinear", "concat-linear", "concat-mlp"};
    return c;
  }
  if (name == "cifar-style-toy") {
    ExperimentConfig c = detail::blobs_base();
    c.name = name;
    c.sweep_key = "variant";
    c.sweep_values = {"ir-nce", "ball", "ball-anneal", "ring", "ring-anneal", "cave", "cave-anneal", "la-nce", "s-neigh"};
    return c;
  }
  throw ConfigError("unknown preset '" + name + "'");
}

inline bool is_preset(const std::string& name) {
  for (const auto& p : preset_catalog())
    if (p.name == name) return true;
  return false;
}

}  // namespace cmi::runner
