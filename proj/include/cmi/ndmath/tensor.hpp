#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <initializer_list>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "cmi/errors.hpp"

namespace cmi {

/// Dense row-major array of doubles. Matrices are rank 2; column vectors are
/// stored as n x 1 and scalars as 1 x 1 so that every graph op sees rank 2.
class Tensor {
 public:
  Tensor() = default;

  explicit Tensor(std::vector<std::size_t> shape, double fill = 0.0)
      : shape_(std::move(shape)), data_(extent(shape_), fill) {}

  Tensor(std::vector<std::size_t> shape, std::vector<double> data)
      : shape_(std::move(shape)), data_(std::move(data)) {
    if (extent(shape_) != data_.size()) {
      throw std::domain_error("Tensor: shape extent " + std::to_string(extent(shape_)) +
                              " does not match data length " + std::to_string(data_.size()));
    }
  }

  static Tensor zeros(std::size_t rows, std::size_t cols) { return Tensor({rows, cols}); }
  static Tensor filled(std::size_t rows, std::size_t cols, double v) { return Tensor({rows, cols}, v); }
  static Tensor scalar(double v) { return Tensor({1, 1}, std::vector<double>{v}); }
  static Tensor column(std::vector<double> v) {
    const std::size_t n = v.size();
    return Tensor({n, 1}, std::move(v));
  }
  static Tensor row(std::vector<double> v) {
    const std::size_t n = v.size();
    return Tensor({1, n}, std::move(v));
  }
  static Tensor from_rows(std::initializer_list<std::initializer_list<double>> rows) {
    const std::size_t r = rows.size();
    const std::size_t c = r == 0 ? 0 : rows.begin()->size();
    std::vector<double> data;
    data.reserve(r * c);
    for (const auto& row : rows) {
      if (row.size() != c) throw std::domain_error("Tensor::from_rows: ragged rows");
      data.insert(data.end(), row.begin(), row.end());
    }
    return Tensor({r, c}, std::move(data));
  }

  const std::vector<std::size_t>& shape() const { return shape_; }
  std::size_t rank() const { return shape_.size(); }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  std::size_t rows() const { return shape_.empty() ? 1 : shape_[0]; }
  std::size_t cols() const {
    if (shape_.size() < 2) return 1;
    return data_.size() / (shape_[0] == 0 ? 1 : shape_[0]);
  }

  std::span<double> data() { return data_; }
  std::span<const double> data() const { return data_; }
  std::vector<double>& storage() { return data_; }
  const std::vector<double>& storage() const { return data_; }

  double& operator[](std::size_t i) { return data_[i]; }
  const double& operator[](std::size_t i) const { return data_[i]; }
  double& at(std::size_t r, std::size_t c) { return data_[r * cols() + c]; }
  double at(std::size_t r, std::size_t c) const { return data_[r * cols() + c]; }

  std::span<double> row_span(std::size_t r) { return {data_.data() + r * cols(), cols()}; }
  std::span<const double> row_span(std::size_t r) const { return {data_.data() + r * cols(), cols()}; }

  double item() const {
    if (data_.size() != 1) throw std::domain_error("Tensor::item: tensor is not a scalar");
    return data_[0];
  }

  bool same_shape(const Tensor& other) const { return shape_ == other.shape_; }

  bool all_finite() const {
    for (double v : data_) {
      if (!std::isfinite(v)) return false;
    }
    return true;
  }

  void require_finite(std::string_view context) const {
    if (!all_finite()) throw NonFiniteError(std::string(context) + ": non-finite value");
  }

  void fill(double v) { std::fill(data_.begin(), data_.end(), v); }

  std::string shape_string() const {
    std::string s = "[";
    for (std::size_t i = 0; i < shape_.size(); ++i) {
      if (i) s += "x";
      s += std::to_string(shape_[i]);
    }
    return s + "]";
  }

 private:
  static std::size_t extent(const std::vector<std::size_t>& shape) {
    return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
  }

  std::vector<std::size_t> shape_;
  std::vector<double> data_;
};

inline double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double squared_distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

/// Numerically stable log(sum(exp(v))). Throws on empty input.
inline double logsumexp(std::span<const double> values) {
  if (values.empty()) throw std::domain_error("logsumexp: empty input");
  double m = values[0];
  for (double v : values) {
    if (!std::isfinite(v)) throw NonFiniteError("logsumexp: non-finite input");
    if (v > m) m = v;
  }
  double s = 0.0;
  for (double v : values) s += std::exp(v - m);
  return m + std::log(s);
}

inline double logsumexp(std::initializer_list<double> values) {
  return logsumexp(std::span<const double>(values.begin(), values.size()));
}

/// Row-major matrix product into a fresh tensor: (n x k) * (k x m).
inline Tensor matmul(const Tensor& a, const Tensor& b) {
  if (a.cols() != b.rows()) {
    throw std::domain_error("matmul: shape mismatch " + a.shape_string() + " * " + b.shape_string());
  }
  const std::size_t n = a.rows(), k = a.cols(), m = b.cols();
  Tensor out = Tensor::zeros(n, m);
  const double* pa = a.data().data();
  const double* pb = b.data().data();
  double* po = out.data().data();
  for (std::size_t i = 0; i < n; ++i) {
    double* orow = po + i * m;
    for (std::size_t p = 0; p < k; ++p) {
      const double av = pa[i * k + p];
      if (av == 0.0) continue;
      const double* brow = pb + p * m;
      for (std::size_t j = 0; j < m; ++j) orow[j] += av * brow[j];
    }
  }
  return out;
}

}  // namespace cmi
