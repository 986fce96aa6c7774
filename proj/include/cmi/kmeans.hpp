#pragma once

#include <cstddef>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "cmi/ndmath/tensor.hpp"
#include "cmi/rng.hpp"

namespace cmi {

struct KMeansResult {
  std::vector<std::size_t> assignment;
  Tensor centroids;
  double inertia = 0.0;
  std::size_t iterations = 0;
  std::vector<double> inertia_trace;  // after each assignment step of the winning restart
};

namespace detail {

inline double assign_points(const Tensor& points, const Tensor& centroids, std::vector<std::size_t>& assignment,
                            bool& changed) {
  changed = false;
  double inertia = 0.0;
  for (std::size_t i = 0; i < points.rows(); ++i) {
    std::size_t best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < centroids.rows(); ++c) {
      const double d = squared_distance(points.row_span(i), centroids.row_span(c));
      if (d < best_d) {
        best_d = d;
        best = c;
      }
    }
    if (assignment[i] != best) changed = true;
    assignment[i] = best;
    inertia += best_d;
  }
  return inertia;
}

inline Tensor seed_plus_plus(const Tensor& points, std::size_t k, Rng& rng) {
  const std::size_t n = points.rows(), d = points.cols();
  Tensor centroids = Tensor::zeros(k, d);
  std::vector<double> nearest(n, std::numeric_limits<double>::infinity());
  std::size_t pick = uniform_index(rng, n);
  for (std::size_t c = 0; c < k; ++c) {
    if (c > 0) {
      double total = 0.0;
      for (double v : nearest) total += v;
      if (total > 0.0) {
        double r = uniform_real(rng, 0.0, total);
        pick = n - 1;
        for (std::size_t i = 0; i < n; ++i) {
          r -= nearest[i];
          if (r < 0.0) {
            pick = i;
            break;
          }
        }
      } else {
        pick = uniform_index(rng, n);
      }
    }
    std::copy_n(points.row_span(pick).begin(), d, centroids.row_span(c).begin());
    for (std::size_t i = 0; i < n; ++i) {
      const double dist = squared_distance(points.row_span(i), centroids.row_span(c));
      if (dist < nearest[i]) nearest[i] = dist;
    }
  }
  return centroids;
}

}  // namespace detail

/// Lloyd's algorithm with k-means++ seeding; keeps the restart with the
/// lowest within-cluster sum of squares. Stops when assignments settle or
/// after `max_iterations`.
inline KMeansResult kmeans(const Tensor& points, std::size_t k, std::size_t restarts, Rng& rng,
                           std::size_t max_iterations = 100) {
  const std::size_t n = points.rows(), d = points.cols();
  if (k == 0) throw std::domain_error("kmeans: k must be positive");
  if (k > n) throw std::domain_error("kmeans: k = " + std::to_string(k) + " exceeds point count " + std::to_string(n));
  if (restarts == 0) restarts = 1;

  KMeansResult best;
  best.inertia = std::numeric_limits<double>::infinity();
  for (std::size_t r = 0; r < restarts; ++r) {
    KMeansResult run;
    run.centroids = detail::seed_plus_plus(points, k, rng);
    run.assignment.assign(n, k);  // sentinel: forces "changed" on the first pass
    for (std::size_t it = 0; it < max_iterations; ++it) {
      bool changed = false;
      run.inertia = detail::assign_points(points, run.centroids, run.assignment, changed);
      run.inertia_trace.push_back(run.inertia);
      run.iterations = it + 1;
      if (!changed) break;
      Tensor sums = Tensor::zeros(k, d);
      std::vector<std::size_t> counts(k, 0);
      for (std::size_t i = 0; i < n; ++i) {
        ++counts[run.assignment[i]];
        for (std::size_t j = 0; j < d; ++j) sums.at(run.assignment[i], j) += points.at(i, j);
      }
      for (std::size_t c = 0; c < k; ++c) {
        if (counts[c] == 0) continue;  // empty cluster keeps its previous centroid
        for (std::size_t j = 0; j < d; ++j) run.centroids.at(c, j) = sums.at(c, j) / static_cast<double>(counts[c]);
      }
    }
    if (run.inertia < best.inertia) best = std::move(run);
  }
  return best;
}

}  // namespace cmi
