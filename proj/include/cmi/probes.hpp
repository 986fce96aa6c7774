#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <set>
#include <span>
#include <stdexcept>
#include <vector>

#include "cmi/ndmath/tensor.hpp"

namespace cmi {

/// Accuracy of a frozen-representation probe on a held-out set.
struct ProbeResult {
  double accuracy = 0.0;
  std::size_t correct = 0;
  std::size_t total = 0;
  std::size_t epochs = 0;  // logistic only
};

namespace detail {

inline void check_probe_inputs(const Tensor& train, std::span<const std::size_t> train_labels, const Tensor& test,
                               std::span<const std::size_t> test_labels) {
  if (train.rows() == 0 || test.rows() == 0) throw std::domain_error("probe: empty train or test set");
  if (train.rows() != train_labels.size() || test.rows() != test_labels.size()) {
    throw std::domain_error("probe: label count does not match row count");
  }
  if (train.cols() != test.cols()) throw std::domain_error("probe: train and test widths differ");
}

}  // namespace detail

/// k-nearest-neighbor classifier (Euclidean). Majority vote among the k
/// nearest training points; vote ties and distance ties go to the lowest
/// training index.
inline ProbeResult knn_probe(const Tensor& train, std::span<const std::size_t> train_labels, const Tensor& test,
                             std::span<const std::size_t> test_labels, std::size_t k = 1) {
  detail::check_probe_inputs(train, train_labels, test, test_labels);
  if (k == 0) throw std::domain_error("knn_probe: k must be positive");
  k = std::min(k, train.rows());
  std::size_t n_classes = 0;
  for (std::size_t l : train_labels) n_classes = std::max(n_classes, l + 1);
  ProbeResult res;
  res.total = test.rows();
  std::vector<std::pair<double, std::size_t>> best;
  for (std::size_t i = 0; i < test.rows(); ++i) {
    best.clear();
    for (std::size_t j = 0; j < train.rows(); ++j) {
      const double d = squared_distance(test.row_span(i), train.row_span(j));
      if (best.size() < k || d < best.back().first) {
        auto pos = std::upper_bound(best.begin(), best.end(), std::make_pair(d, j));
        best.insert(pos, {d, j});
        if (best.size() > k) best.pop_back();
      }
    }
    std::vector<std::size_t> votes(n_classes, 0);
    std::vector<std::size_t> first_seen(n_classes, std::numeric_limits<std::size_t>::max());
    for (const auto& [d, j] : best) {
      ++votes[train_labels[j]];
      first_seen[train_labels[j]] = std::min(first_seen[train_labels[j]], j);
    }
    std::size_t pred = 0;
    for (std::size_t c = 1; c < n_classes; ++c) {
      if (votes[c] > votes[pred] || (votes[c] == votes[pred] && first_seen[c] < first_seen[pred])) pred = c;
    }
    if (pred == test_labels[i]) ++res.correct;
  }
  res.accuracy = static_cast<double>(res.correct) / static_cast<double>(res.total);
  return res;
}

struct LogisticOptions {
  std::size_t max_epochs = 500;
  double learning_rate = 0.1;
  double tolerance = 1e-7;  // stop when the mean loss changes by less than this
};

/// Multinomial logistic regression trained full-batch with Adam on the
/// frozen features, then scored on the test set.
inline ProbeResult logistic_probe(const Tensor& train, std::span<const std::size_t> train_labels, const Tensor& test,
                                  std::span<const std::size_t> test_labels, const LogisticOptions& opt = {}) {
  detail::check_probe_inputs(train, train_labels, test, test_labels);
  const std::set<std::size_t> distinct(train_labels.begin(), train_labels.end());
  if (distinct.size() < 2) throw std::domain_error("logistic_probe: training labels contain a single class");
  std::size_t c = 0;
  for (std::size_t l : train_labels) c = std::max(c, l + 1);
  const std::size_t n = train.rows(), d = train.cols();
  const std::size_t p = (d + 1) * c;  // weights then bias, class-major
  std::vector<double> w(p, 0.0), m(p, 0.0), v(p, 0.0), grad(p);
  const double b1 = 0.9, b2 = 0.999, eps = 1e-8;
  std::vector<double> logits(c);
  auto forward = [&](std::span<const double> x) {
    for (std::size_t k = 0; k < c; ++k) {
      double z = w[k * (d + 1) + d];
      for (std::size_t j = 0; j < d; ++j) z += w[k * (d + 1) + j] * x[j];
      logits[k] = z;
    }
  };
  double prev = std::numeric_limits<double>::infinity();
  ProbeResult res;
  for (std::size_t epoch = 1; epoch <= opt.max_epochs; ++epoch) {
    std::fill(grad.begin(), grad.end(), 0.0);
    double loss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      auto x = train.row_span(i);
      forward(x);
      const double lse = logsumexp(logits);
      loss += lse - logits[train_labels[i]];
      for (std::size_t k = 0; k < c; ++k) {
        const double g = std::exp(logits[k] - lse) - (k == train_labels[i] ? 1.0 : 0.0);
        for (std::size_t j = 0; j < d; ++j) grad[k * (d + 1) + j] += g * x[j];
        grad[k * (d + 1) + d] += g;
      }
    }
    loss /= static_cast<double>(n);
    const double bc1 = 1.0 - std::pow(b1, static_cast<double>(epoch));
    const double bc2 = 1.0 - std::pow(b2, static_cast<double>(epoch));
    for (std::size_t q = 0; q < p; ++q) {
      const double g = grad[q] / static_cast<double>(n);
      m[q] = b1 * m[q] + (1 - b1) * g;
      v[q] = b2 * v[q] + (1 - b2) * g * g;
      w[q] -= opt.learning_rate * (m[q] / bc1) / (std::sqrt(v[q] / bc2) + eps);
    }
    res.epochs = epoch;
    if (std::abs(prev - loss) < opt.tolerance) break;
    prev = loss;
  }
  res.total = test.rows();
  for (std::size_t i = 0; i < test.rows(); ++i) {
    forward(test.row_span(i));
    std::size_t pred = 0;
    for (std::size_t k = 1; k < c; ++k)
      if (logits[k] > logits[pred]) pred = k;
    if (pred == test_labels[i]) ++res.correct;
  }
  res.accuracy = static_cast<double>(res.correct) / static_cast<double>(res.total);
  return res;
}

}  // namespace cmi
