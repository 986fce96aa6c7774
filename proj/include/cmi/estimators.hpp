#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <memory>
#include <numbers>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "cmi/errors.hpp"
#include "cmi/ndmath/autodiff.hpp"
#include "cmi/ndmath/mlp.hpp"
#include "cmi/ndmath/tensor.hpp"
#include "cmi/rng.hpp"

namespace cmi {

enum class WitnessKind { Dot, ScaledDot, Bilinear, ConcatLinear, ConcatMlp };

inline const char* to_string(WitnessKind k) {
  switch (k) {
    case WitnessKind::Dot: return "dot";
    case WitnessKind::ScaledDot: return "scaled-dot";
    case WitnessKind::Bilinear: return "bilinear";
    case WitnessKind::ConcatLinear: return "concat-linear";
    case WitnessKind::ConcatMlp: return "concat-mlp";
  }
  return "?";
}

inline WitnessKind witness_kind_from_string(const std::string& s) {
  if (s == "dot") return WitnessKind::Dot;
  if (s == "scaled-dot") return WitnessKind::ScaledDot;
  if (s == "bilinear") return WitnessKind::Bilinear;
  if (s == "concat-linear") return WitnessKind::ConcatLinear;
  if (s == "concat-mlp") return WitnessKind::ConcatMlp;
  throw ConfigError("unknown witness kind '" + s + "'");
}

/// Compatibility score f(x, y) between two d-dim embeddings.
///
/// Every kind divides its raw score by the temperature; plain `Dot` pins the
/// temperature to 1. Bilinear starts at W = I so it initially matches the dot
/// product; the concat kinds own their own small parameter sets.
class Witness {
 public:
  static Witness dot() { return Witness(WitnessKind::Dot, 1.0); }
  static Witness scaled_dot(double temperature) { return Witness(WitnessKind::ScaledDot, temperature); }

  static Witness make(WitnessKind kind, std::size_t dim, double temperature, Rng& rng, std::size_t mlp_depth = 2,
                      std::size_t mlp_hidden = 128) {
    Witness w(kind, kind == WitnessKind::Dot ? 1.0 : temperature);
    w.dim_ = dim;
    switch (kind) {
      case WitnessKind::Dot:
      case WitnessKind::ScaledDot: break;
      case WitnessKind::Bilinear: {
        Tensor m = Tensor::zeros(dim, dim);
        for (std::size_t i = 0; i < dim; ++i) m.at(i, i) = 1.0;
        w.bilinear_ = std::make_unique<Parameter>("witness.bilinear", std::move(m));
        break;
      }
      case WitnessKind::ConcatLinear:
        w.head_ = std::make_unique<Mlp>(std::vector<std::size_t>{2 * dim, 1}, false, rng);
        break;
      case WitnessKind::ConcatMlp: {
        std::vector<std::size_t> sizes{2 * dim};
        for (std::size_t l = 0; l < mlp_depth; ++l) sizes.push_back(mlp_hidden);
        sizes.push_back(1);
        w.head_ = std::make_unique<Mlp>(std::move(sizes), false, rng);
        break;
      }
    }
    return w;
  }

  WitnessKind kind() const { return kind_; }
  double temperature() const { return temperature_; }

  std::vector<Parameter*> parameters() {
    std::vector<Parameter*> out;
    if (bilinear_) out.push_back(bilinear_.get());
    if (head_) {
      for (Parameter* p : head_->parameters()) out.push_back(p);
    }
    return out;
  }

  /// Scores for pairs (a[ia[p]], b[ib[p]]) recorded on `g`; returns P x 1.
  Var pair_scores(Graph& g, Var a, Var b, std::vector<std::size_t> ia, std::vector<std::size_t> ib) {
    const double inv_t = 1.0 / temperature_;
    switch (kind_) {
      case WitnessKind::Dot:
      case WitnessKind::ScaledDot: return g.scale(g.pair_dot(a, b, std::move(ia), std::move(ib)), inv_t);
      case WitnessKind::Bilinear: {
        Var aw = g.matmul(a, g.parameter(*bilinear_));
        return g.scale(g.pair_dot(aw, b, std::move(ia), std::move(ib)), inv_t);
      }
      case WitnessKind::ConcatLinear:
      case WitnessKind::ConcatMlp: {
        Var joined = g.concat_cols(g.gather_rows(a, std::move(ia)), g.gather_rows(b, std::move(ib)));
        return g.scale(head_->forward(g, joined), inv_t);
      }
    }
    throw std::logic_error("Witness: unhandled kind");
  }

  /// Gradient-free score of one pair.
  double score(std::span<const double> a, std::span<const double> b) const {
    if (a.size() != b.size()) throw std::domain_error("Witness::score: embedding dimension mismatch");
    switch (kind_) {
      case WitnessKind::Dot:
      case WitnessKind::ScaledDot: return cmi::dot(a, b) / temperature_;
      case WitnessKind::Bilinear: {
        const std::size_t d = a.size();
        double s = 0.0;
        for (std::size_t i = 0; i < d; ++i)
          for (std::size_t j = 0; j < d; ++j) s += a[i] * bilinear_->value.at(i, j) * b[j];
        return s / temperature_;
      }
      case WitnessKind::ConcatLinear:
      case WitnessKind::ConcatMlp: {
        Tensor joined = Tensor::zeros(1, a.size() + b.size());
        std::copy(a.begin(), a.end(), joined.data().begin());
        std::copy(b.begin(), b.end(), joined.data().begin() + static_cast<std::ptrdiff_t>(a.size()));
        return head_->apply(joined).item() / temperature_;
      }
    }
    throw std::logic_error("Witness: unhandled kind");
  }

 private:
  Witness(WitnessKind kind, double temperature) : kind_(kind), temperature_(temperature) {
    if (!(temperature > 0.0)) throw std::domain_error("Witness: temperature must be positive");
  }

  WitnessKind kind_;
  double temperature_;
  std::size_t dim_ = 0;
  std::unique_ptr<Parameter> bilinear_;
  std::unique_ptr<Mlp> head_;
};

/// One anchor x, its positive y_1 and negatives y_2..y_K (rows of `negatives`).
struct BatchSample {
  std::vector<double> anchor;
  std::vector<double> positive;
  Tensor negatives;  // (K - 1) x d

  std::size_t k() const { return negatives.rows() + 1; }
};

/// InfoNCE from raw witness values: scores[0] is f(x, y_1), the rest are the
/// negatives. The positive sits in its own denominator, so the value is at
/// most log K.
inline double estimate_infonce(std::span<const double> scores) {
  if (scores.size() < 2) throw std::domain_error("estimate_infonce: need K >= 2 scores");
  const double k = static_cast<double>(scores.size());
  return scores[0] - logsumexp(scores) + std::log(k);
}

inline double estimate_infonce(const BatchSample& batch, const Witness& witness) {
  if (batch.k() < 2) throw std::domain_error("estimate_infonce: need K >= 2");
  if (batch.anchor.size() != batch.positive.size() || batch.negatives.cols() != batch.anchor.size()) {
    throw std::domain_error("estimate_infonce: embeddings differ in dimension");
  }
  std::vector<double> scores;
  scores.reserve(batch.k());
  scores.push_back(witness.score(batch.anchor, batch.positive));
  for (std::size_t j = 0; j < batch.negatives.rows(); ++j) {
    scores.push_back(witness.score(batch.anchor, batch.negatives.row_span(j)));
  }
  return estimate_infonce(scores);
}

/// VINCE: the InfoNCE arithmetic applied to negatives drawn from a restricted
/// distribution q_T. The restriction is the caller's to record; only the
/// provenance of the negatives differs.
inline double estimate_vince(std::span<const double> scores) { return estimate_infonce(scores); }

inline double estimate_vince(const BatchSample& batch, const Witness& witness) {
  return estimate_infonce(batch, witness);
}

/// Mean of log q(x|y) - log p(x) over joint samples (normalized Barber-Agakov).
template <class Pair, class LogQ, class LogP>
double estimate_ba(std::span<const Pair> joint, LogQ&& log_q_given_y, LogP&& log_p) {
  if (joint.empty()) throw std::domain_error("estimate_ba: no samples");
  double s = 0.0;
  for (const Pair& xy : joint) {
    const double v = log_q_given_y(xy) - log_p(xy);
    if (!std::isfinite(v)) throw NonFiniteError("estimate_ba: non-finite log density");
    s += v;
  }
  return s / static_cast<double>(joint.size());
}

/// Unnormalized Barber-Agakov: mean of f(x,y) - log Z(y), q(x|y) = p(x) e^f / Z(y).
template <class Pair, class F, class LogZ>
double estimate_uba(std::span<const Pair> joint, F&& f, LogZ&& log_partition) {
  if (joint.empty()) throw std::domain_error("estimate_uba: no samples");
  double s = 0.0;
  for (const Pair& xy : joint) {
    const double v = f(xy) - log_partition(xy);
    if (!std::isfinite(v)) throw NonFiniteError("estimate_uba: non-finite term");
    s += v;
  }
  return s / static_cast<double>(joint.size());
}

/// NWJ from witness values on joint pairs and on fresh product-of-marginal pairs.
inline double estimate_nwj(std::span<const double> joint_scores, std::span<const double> marginal_scores) {
  if (joint_scores.empty() || marginal_scores.empty()) {
    throw std::domain_error("estimate_nwj: need at least one joint and one marginal pair");
  }
  double joint = 0.0;
  for (double f : joint_scores) joint += f;
  joint /= static_cast<double>(joint_scores.size());
  double partition = 0.0;
  for (double f : marginal_scores) {
    const double e = std::exp(f);
    if (!std::isfinite(e)) {
      throw NonFiniteError("estimate_nwj: exp(f) overflowed; rescale the witness (e.g. raise its temperature)");
    }
    partition += e;
  }
  partition /= static_cast<double>(marginal_scores.size());
  return joint - partition / std::numbers::e;
}

/// Pairs are rows: joint[i] = (x_i, y_i), marginal[i] = (x_i, y'_i) with y' fresh.
inline double estimate_nwj(const Tensor& joint_x, const Tensor& joint_y, const Tensor& marginal_x,
                           const Tensor& marginal_y, const Witness& witness) {
  std::vector<double> js, ms;
  for (std::size_t i = 0; i < joint_x.rows(); ++i) js.push_back(witness.score(joint_x.row_span(i), joint_y.row_span(i)));
  for (std::size_t i = 0; i < marginal_x.rows(); ++i)
    ms.push_back(witness.score(marginal_x.row_span(i), marginal_y.row_span(i)));
  return estimate_nwj(js, ms);
}

/// Expectations of g = e^f under a finite distribution P and under its
/// restriction Q_T to S_T = {i : f_i in T}.
struct RestrictedPartition {
  double mean_under_p = 0.0;
  double mean_under_q = 0.0;
  double mass_of_restriction = 0.0;
  double log_mean_under_p = 0.0;
};

inline RestrictedPartition restricted_partition(std::span<const double> probs, std::span<const double> f,
                                                const std::function<bool(double)>& in_t) {
  if (probs.size() != f.size() || probs.empty()) throw std::domain_error("restricted_partition: size mismatch");
  RestrictedPartition out;
  double q_num = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    const double g = std::exp(f[i]);
    out.mean_under_p += probs[i] * g;
    if (in_t(f[i])) {
      out.mass_of_restriction += probs[i];
      q_num += probs[i] * g;
    }
  }
  if (!(out.mass_of_restriction > 0.0)) throw DegeneratePoolError("restricted_partition: P(S_T) = 0");
  out.mean_under_q = q_num / out.mass_of_restriction;
  out.log_mean_under_p = std::log(out.mean_under_p);
  return out;
}

}  // namespace cmi
