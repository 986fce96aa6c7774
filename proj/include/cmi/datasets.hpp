#pragma once

#include <algorithm>
#include <array>
#include <cstdio>
#include <cmath>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "cmi/errors.hpp"
#include "cmi/ndmath/tensor.hpp"
#include "cmi/rng.hpp"

namespace cmi {

using Mat2 = std::array<double, 4>;  // row-major 2x2

inline bool is_symmetric_pd(const Mat2& m) {
  return m[1] == m[2] && m[0] > 0.0 && m[0] * m[3] - m[1] * m[2] > 0.0;
}

inline Mat2 cholesky(const Mat2& m) {
  if (!is_symmetric_pd(m)) throw std::domain_error("cholesky: matrix is not symmetric positive definite");
  const double l00 = std::sqrt(m[0]);
  const double l10 = m[2] / l00;
  const double l11 = std::sqrt(m[3] - l10 * l10);
  return {l00, 0.0, l10, l11};
}

/// (X, Y) = Z + eps with Z ~ N(0, sigma_z), eps ~ N(0, sigma_eps).
struct GaussianPairFamily {
  Mat2 sigma_z{1.0, -0.5, -0.5, 1.0};
  Mat2 sigma_eps{1.0, 0.9, 0.9, 1.0};

  Mat2 sigma() const {
    return {sigma_z[0] + sigma_eps[0], sigma_z[1] + sigma_eps[1], sigma_z[2] + sigma_eps[2], sigma_z[3] + sigma_eps[3]};
  }

  void validate() const {
    // sigma_eps = 0 is allowed (degenerate noise); everything else must be PD.
    const bool eps_zero = sigma_eps == Mat2{0.0, 0.0, 0.0, 0.0};
    if (!is_symmetric_pd(sigma_z) || (!eps_zero && !is_symmetric_pd(sigma_eps)) || !is_symmetric_pd(sigma())) {
      throw std::domain_error("GaussianPairFamily: covariances must be symmetric positive definite");
    }
  }

  double log_marginal_x(double x) const {
    const double v = sigma()[0];
    return -0.5 * std::log(2.0 * std::numbers::pi * v) - 0.5 * x * x / v;
  }

  /// log p(x | y) of the joint Gaussian.
  double log_conditional_x(double x, double y) const {
    const Mat2 s = sigma();
    const double mean = s[1] / s[3] * y;
    const double var = s[0] - s[1] * s[1] / s[3];
    const double d = x - mean;
    return -0.5 * std::log(2.0 * std::numbers::pi * var) - 0.5 * d * d / var;
  }
};

/// I(X;Y) = -1/2 log(1 - s12 s21 / (s11 s22)) in nats.
inline double analytic_gaussian_mi(const GaussianPairFamily& family) {
  family.validate();
  const Mat2 s = family.sigma();
  return -0.5 * std::log(1.0 - (s[1] * s[2]) / (s[0] * s[3]));
}

struct GaussianPairs {
  std::vector<double> x;
  std::vector<double> y;
};

inline GaussianPairs sample_gaussian_pairs(const GaussianPairFamily& family, std::size_t n, Rng& rng) {
  family.validate();
  const Mat2 lz = cholesky(family.sigma_z);
  const bool eps_zero = family.sigma_eps == Mat2{0.0, 0.0, 0.0, 0.0};
  const Mat2 le = eps_zero ? Mat2{0.0, 0.0, 0.0, 0.0} : cholesky(family.sigma_eps);
  std::normal_distribution<double> normal(0.0, 1.0);
  GaussianPairs out;
  out.x.reserve(n);
  out.y.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double a = normal(rng), b = normal(rng), c = normal(rng), d = normal(rng);
    const double zx = lz[0] * a, zy = lz[2] * a + lz[3] * b;
    const double ex = le[0] * c, ey = le[2] * c + le[3] * d;
    out.x.push_back(zx + ex);
    out.y.push_back(zy + ey);
  }
  return out;
}

/// Labeled 2-D points; rows of `points` are (c_x, c_y).
struct LabeledPoints {
  Tensor points;
  std::vector<std::size_t> labels;

  std::size_t size() const { return labels.size(); }
};

/// Two interleaved Archimedean arms, 1.5 turns each (t in [0, 3 pi]), the
/// second rotated by pi, scaled into [-2, 2]^2. t = 3 pi sqrt(u) keeps the
/// density roughly uniform along the arc.
inline LabeledPoints make_spirals(std::size_t n, Rng& rng) {
  if (n % 2 != 0) throw std::domain_error("make_spirals: n must be even");
  constexpr double t_max = 3.0 * std::numbers::pi;
  const double scale = 2.0 / t_max;
  LabeledPoints out{Tensor::zeros(n, 2), std::vector<std::size_t>(n)};
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t arm = i % 2;
    const double t = t_max * std::sqrt(uniform_real(rng, 0.0, 1.0));
    const double sign = arm == 0 ? 1.0 : -1.0;
    out.points.at(i, 0) = sign * scale * t * std::cos(t);
    out.points.at(i, 1) = sign * scale * t * std::sin(t);
    out.labels[i] = arm;
  }
  return out;
}

/// Gaussian blobs with well-separated centers on a scaled hypercube corner set.
inline LabeledPoints make_blobs(std::size_t n, std::size_t classes, std::size_t dim, double separation, double spread,
                                Rng& rng) {
  if (classes == 0 || dim == 0) throw std::domain_error("make_blobs: need classes > 0 and dim > 0");
  std::normal_distribution<double> normal(0.0, 1.0);
  Tensor centers = Tensor::zeros(classes, dim);
  for (double& v : centers.storage()) v = normal(rng);
  for (std::size_t c = 0; c < classes; ++c) {
    auto r = centers.row_span(c);
    const double norm = std::sqrt(dot(r, r));
    for (double& v : r) v *= separation / (norm > 0.0 ? norm : 1.0);
  }
  LabeledPoints out{Tensor::zeros(n, dim), std::vector<std::size_t>(n)};
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t c = i % classes;
    out.labels[i] = c;
    for (std::size_t j = 0; j < dim; ++j) out.points.at(i, j) = centers.at(c, j) + spread * normal(rng);
  }
  return out;
}

enum class ViewKind { Identity, UniformNoise, Channel, PermuteCoordinates };

inline const char* to_string(ViewKind k) {
  switch (k) {
    case ViewKind::Identity: return "identity";
    case ViewKind::UniformNoise: return "uniform-noise";
    case ViewKind::Channel: return "channel";
    case ViewKind::PermuteCoordinates: return "permute";
  }
  return "?";
}

inline ViewKind view_kind_from_string(const std::string& s) {
  if (s == "identity") return ViewKind::Identity;
  if (s == "uniform-noise") return ViewKind::UniformNoise;
  if (s == "channel") return ViewKind::Channel;
  if (s == "permute") return ViewKind::PermuteCoordinates;
  throw ConfigError("unknown view kind '" + s + "'");
}

/// Stochastic view nu(x, a); the augmentation index a is the rng draw.
struct ViewFunction {
  ViewKind kind = ViewKind::Identity;
  double eta = 0.0;                    // uniform-noise: offsets ~ U(0, eta) per coordinate
  std::vector<std::size_t> selector;   // channel: kept coordinates, others zeroed

  void validate() const {
    if (eta < 0.0) throw std::domain_error("ViewFunction: eta must be non-negative");
  }
};

/// Returns a fresh viewed copy; the input is never modified.
inline std::vector<double> apply_view(const ViewFunction& view, std::span<const double> point, Rng& rng) {
  view.validate();
  std::vector<double> out(point.begin(), point.end());
  switch (view.kind) {
    case ViewKind::Identity: break;
    case ViewKind::UniformNoise:
      if (view.eta > 0.0)
        for (double& v : out) v += uniform_real(rng, 0.0, view.eta);
      break;
    case ViewKind::Channel: {
      std::vector<double> masked(out.size(), 0.0);
      for (std::size_t j : view.selector) {
        if (j >= out.size()) throw std::out_of_range("apply_view: channel selector out of range");
        masked[j] = out[j];
      }
      out = std::move(masked);
      break;
    }
    case ViewKind::PermuteCoordinates: std::shuffle(out.begin(), out.end(), rng); break;
  }
  return out;
}

/// Writes `index,label,c0,c1,...` with a header row.
inline void write_points_csv(const std::filesystem::path& path, const Tensor& points,
                             std::span<const std::size_t> labels) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << "index,label";
  for (std::size_t j = 0; j < points.cols(); ++j) out << ",c" << j;
  out << '\n';
  char buf[64];
  for (std::size_t i = 0; i < points.rows(); ++i) {
    out << i << ',' << (labels.empty() ? 0 : labels[i]);
    for (std::size_t j = 0; j < points.cols(); ++j) {
      std::snprintf(buf, sizeof buf, "%.17g", points.at(i, j));
      out << ',' << buf;
    }
    out << '\n';
  }
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

}  // namespace cmi
