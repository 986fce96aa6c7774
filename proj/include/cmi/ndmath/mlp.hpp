#pragma once

#include <cmath>
#include <cstddef>
#include <memory>
#include <string>
#include <vector>

#include "cmi/ndmath/autodiff.hpp"
#include "cmi/ndmath/tensor.hpp"
#include "cmi/rng.hpp"

namespace cmi {

/// Fully connected ReLU network; the last layer is linear and may be followed
/// by row-wise L2 normalization (the encoder g_theta).
class Mlp {
 public:
  Mlp() = default;

  /// `sizes` lists widths from input to output, so sizes.size() - 1 layers.
  Mlp(std::vector<std::size_t> sizes, bool l2_normalize, Rng& rng)
      : sizes_(std::move(sizes)), l2_normalize_(l2_normalize) {
    if (sizes_.size() < 2) throw std::domain_error("Mlp: need at least input and output widths");
    for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) {
      const std::size_t fan_in = sizes_[l], fan_out = sizes_[l + 1];
      const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
      Tensor w = Tensor::zeros(fan_in, fan_out);
      Tensor b = Tensor::zeros(1, fan_out);
      for (double& v : w.storage()) v = uniform_real(rng, -bound, bound);
      for (double& v : b.storage()) v = uniform_real(rng, -bound, bound);
      weights_.push_back(std::make_unique<Parameter>("layer" + std::to_string(l) + ".weight", std::move(w)));
      biases_.push_back(std::make_unique<Parameter>("layer" + std::to_string(l) + ".bias", std::move(b)));
    }
  }

  /// Convenience: `layers` linear maps, `hidden` units between them.
  static Mlp make(std::size_t input_dim, std::size_t hidden, std::size_t output_dim, std::size_t layers,
                  bool l2_normalize, Rng& rng) {
    std::vector<std::size_t> sizes{input_dim};
    for (std::size_t l = 1; l < layers; ++l) sizes.push_back(hidden);
    sizes.push_back(output_dim);
    return Mlp(std::move(sizes), l2_normalize, rng);
  }

  std::size_t input_dim() const { return sizes_.front(); }
  std::size_t output_dim() const { return sizes_.back(); }
  std::size_t layer_count() const { return weights_.size(); }
  bool l2_normalize() const { return l2_normalize_; }

  std::vector<Parameter*> parameters() {
    std::vector<Parameter*> out;
    for (std::size_t l = 0; l < weights_.size(); ++l) {
      out.push_back(weights_[l].get());
      out.push_back(biases_[l].get());
    }
    return out;
  }

  Parameter& weight(std::size_t layer) { return *weights_.at(layer); }
  Parameter& bias(std::size_t layer) { return *biases_.at(layer); }

  /// Records the network on `g`. Input must be (batch x input_dim).
  Var forward(Graph& g, Var input) {
    if (g.value(input).cols() != input_dim()) {
      throw std::domain_error("Mlp::forward: expected input width " + std::to_string(input_dim()) + ", got " +
                              g.value(input).shape_string());
    }
    Var h = input;
    for (std::size_t l = 0; l < weights_.size(); ++l) {
      h = g.add_bias(g.matmul(h, g.parameter(*weights_[l])), g.parameter(*biases_[l]));
      if (l + 1 < weights_.size()) h = g.relu(h);
    }
    return l2_normalize_ ? g.l2_normalize_rows(h) : h;
  }

  /// Gradient-free evaluation.
  Tensor apply(const Tensor& input) const {
    if (input.cols() != input_dim()) {
      throw std::domain_error("Mlp::apply: expected input width " + std::to_string(input_dim()) + ", got " +
                              input.shape_string());
    }
    Tensor h = input;
    for (std::size_t l = 0; l < weights_.size(); ++l) {
      Tensor z = matmul(h, weights_[l]->value);
      const std::size_t m = z.cols();
      for (std::size_t i = 0; i < z.size(); ++i) {
        z[i] += biases_[l]->value[i % m];
        if (l + 1 < weights_.size() && z[i] < 0.0) z[i] = 0.0;
      }
      h = std::move(z);
    }
    if (l2_normalize_) {
      const std::size_t d = h.cols();
      for (std::size_t i = 0; i < h.rows(); ++i) {
        auto r = h.row_span(i);
        const double norm = std::sqrt(dot(r, r));
        if (!(norm > 0.0)) throw NonFiniteError("Mlp::apply: zero-norm output row");
        for (std::size_t j = 0; j < d; ++j) r[j] /= norm;
      }
    }
    h.require_finite("Mlp::apply");
    return h;
  }

  Mlp clone() const {
    Mlp out;
    out.sizes_ = sizes_;
    out.l2_normalize_ = l2_normalize_;
    for (std::size_t l = 0; l < weights_.size(); ++l) {
      out.weights_.push_back(std::make_unique<Parameter>(*weights_[l]));
      out.biases_.push_back(std::make_unique<Parameter>(*biases_[l]));
    }
    return out;
  }

 private:
  std::vector<std::size_t> sizes_;
  bool l2_normalize_ = false;
  // Heap-allocated so that Parameter addresses stay stable when the Mlp moves.
  std::vector<std::unique_ptr<Parameter>> weights_;
  std::vector<std::unique_ptr<Parameter>> biases_;
};

}  // namespace cmi
