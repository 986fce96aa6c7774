#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "cmi/ndmath/tensor.hpp"

namespace cmi {

/// Per-datum embedding store; row i holds M[i] for dataset index i.
class MemoryBank {
 public:
  MemoryBank() = default;
  MemoryBank(std::size_t n, std::size_t dim, double alpha, bool renormalize = false)
      : entries_(Tensor::zeros(n, dim)), alpha_(alpha), renormalize_(renormalize) {
    if (!(alpha >= 0.0 && alpha < 1.0)) throw std::domain_error("MemoryBank: alpha must lie in [0, 1)");
  }

  /// Wraps existing rows (e.g. a freshly encoded dataset).
  MemoryBank(Tensor entries, double alpha, bool renormalize = false)
      : entries_(std::move(entries)), alpha_(alpha), renormalize_(renormalize) {
    if (!(alpha >= 0.0 && alpha < 1.0)) throw std::domain_error("MemoryBank: alpha must lie in [0, 1)");
  }

  std::size_t size() const { return entries_.rows(); }
  std::size_t dim() const { return entries_.cols(); }
  double alpha() const { return alpha_; }
  bool renormalize() const { return renormalize_; }

  const Tensor& entries() const { return entries_; }
  std::span<const double> row(std::size_t i) const { return entries_.row_span(i); }

  /// M[i] = alpha * M[i] + (1 - alpha) * embedding, then optionally re-unit-normalized.
  void update(std::size_t index, std::span<const double> embedding) {
    if (index >= size()) {
      throw std::out_of_range("MemoryBank::update: index " + std::to_string(index) + " >= " + std::to_string(size()));
    }
    if (embedding.size() != dim()) throw std::domain_error("MemoryBank::update: embedding dimension mismatch");
    auto r = entries_.row_span(index);
    for (std::size_t j = 0; j < r.size(); ++j) r[j] = alpha_ * r[j] + (1.0 - alpha_) * embedding[j];
    if (renormalize_) {
      const double norm = std::sqrt(dot(r, r));
      if (norm > 0.0)
        for (double& v : r) v /= norm;
    }
  }

  /// Overwrites a row without mixing (used to seed the bank).
  void assign(std::size_t index, std::span<const double> embedding) {
    if (index >= size()) throw std::out_of_range("MemoryBank::assign: index out of range");
    std::copy(embedding.begin(), embedding.end(), entries_.row_span(index).begin());
  }

 private:
  Tensor entries_;
  double alpha_ = 0.0;
  bool renormalize_ = false;
};

/// Weighted view-set encoding: sum_m weights[m] * g(view_m).
inline std::vector<double> weighted_view_encode(const std::function<std::vector<double>(std::size_t)>& encode_view,
                                                std::span<const std::size_t> view_indices,
                                                std::span<const double> weights) {
  if (view_indices.size() != weights.size()) {
    throw std::domain_error("weighted_view_encode: " + std::to_string(view_indices.size()) + " views but " +
                            std::to_string(weights.size()) + " weights");
  }
  std::vector<double> out;
  for (std::size_t m = 0; m < view_indices.size(); ++m) {
    const std::vector<double> e = encode_view(view_indices[m]);
    if (out.empty()) out.assign(e.size(), 0.0);
    if (e.size() != out.size()) throw std::domain_error("weighted_view_encode: views encode to different widths");
    for (std::size_t j = 0; j < e.size(); ++j) out[j] += weights[m] * e[j];
  }
  return out;
}

/// Bank indices sorted by ascending L2 distance to `query`; ties by index.
inline std::vector<std::size_t> rank_by_similarity(const Tensor& points, std::span<const double> query) {
  if (query.size() != points.cols()) throw std::domain_error("rank_by_similarity: query dimension mismatch");
  const std::size_t n = points.rows();
  std::vector<double> dist(n);
  for (std::size_t i = 0; i < n; ++i) dist[i] = squared_distance(points.row_span(i), query);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return dist[a] < dist[b] || (dist[a] == dist[b] && a < b);
  });
  return order;
}

inline std::vector<std::size_t> rank_by_similarity(const MemoryBank& bank, std::span<const double> query) {
  return rank_by_similarity(bank.entries(), query);
}

}  // namespace cmi
