#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "cmi/bank.hpp"
#include "cmi/datasets.hpp"
#include "cmi/errors.hpp"
#include "cmi/estimators.hpp"
#include "cmi/ndmath/autodiff.hpp"
#include "cmi/ndmath/mlp.hpp"
#include "cmi/samplers.hpp"

namespace cmi {

/// kappa used by the original instance-discrimination code for ImageNet.
inline constexpr double kImageNetKappa = 2876934.2 / 1281167.0;
inline constexpr double kDefaultTemperature = 0.07;

enum class ObjectiveFamily { IrSoftmax, IrNce, LaOriginal, LaNce, TDisc };

inline const char* to_string(ObjectiveFamily f) {
  switch (f) {
    case ObjectiveFamily::IrSoftmax: return "ir-softmax";
    case ObjectiveFamily::IrNce: return "ir-nce";
    case ObjectiveFamily::LaOriginal: return "la-original";
    case ObjectiveFamily::LaNce: return "la-nce";
    case ObjectiveFamily::TDisc: return "t-disc";
  }
  return "?";
}

inline ObjectiveFamily objective_family_from_string(const std::string& s) {
  if (s == "ir-softmax") return ObjectiveFamily::IrSoftmax;
  if (s == "ir-nce") return ObjectiveFamily::IrNce;
  if (s == "la-original") return ObjectiveFamily::LaOriginal;
  if (s == "la-nce") return ObjectiveFamily::LaNce;
  if (s == "t-disc") return ObjectiveFamily::TDisc;
  throw ConfigError("unknown objective family '" + s + "'");
}

/// Coordinate bipartition for the two-channel (CMC-style) objective.
struct ChannelSplit {
  std::vector<std::size_t> first;
  std::vector<std::size_t> second;

  void validate(std::size_t dim) const {
    if (first.empty() || second.empty()) throw ConfigError("ChannelSplit: both channel groups must be non-empty");
    std::vector<int> seen(dim, 0);
    for (std::size_t j : first) {
      if (j >= dim) throw ConfigError("ChannelSplit: coordinate out of range");
      ++seen[j];
    }
    for (std::size_t j : second) {
      if (j >= dim) throw ConfigError("ChannelSplit: coordinate out of range");
      ++seen[j];
    }
    for (int s : seen)
      if (s != 1) throw ConfigError("ChannelSplit: groups must partition the coordinates");
  }
};

struct ObjectiveSpec {
  ObjectiveFamily family = ObjectiveFamily::IrNce;
  NegativeSpec negatives;
  NeighborSpec neighbors;
  double temperature = kDefaultTemperature;
  double kappa = kImageNetKappa;
  bool use_memory_bank = true;  // off: second fresh view is the positive (SimCLR)
  std::optional<ChannelSplit> channel_split;
  bool legacy = false;                  // required for ir-softmax and la-original
  bool enforce_anchor_in_close = true;  // la-original only

  void validate() const {
    if (!(temperature > 0.0)) throw ConfigError("ObjectiveSpec: temperature must be positive");
    const bool is_legacy = family == ObjectiveFamily::IrSoftmax || family == ObjectiveFamily::LaOriginal;
    if (is_legacy && !legacy) {
      throw ConfigError(std::string("ObjectiveSpec: ") + to_string(family) + " is a legacy objective; set objective.legacy = true");
    }
    if (is_legacy && !(kappa > 0.0)) throw ConfigError("ObjectiveSpec: kappa must be positive");
    negatives.validate();
  }

  /// The t-disc form of the nce families: ir-nce is t-disc with marginal
  /// negatives and no neighbors; la-nce is ball negatives plus k-neigh.
  ObjectiveSpec as_t_disc() const {
    ObjectiveSpec out = *this;
    if (family == ObjectiveFamily::IrNce) {
      out.negatives = NegativeSpec{};
      out.neighbors = NeighborSpec{};
    } else if (family == ObjectiveFamily::LaNce) {
      if (out.negatives.kind == NegativeKind::Marginal) out.negatives.kind = NegativeKind::Ball;
      if (out.neighbors.kind == NeighborKind::None) out.neighbors.kind = NeighborKind::KNeigh;
    }
    out.family = ObjectiveFamily::TDisc;
    return out;
  }
};

/// One anchor's contrastive term. `query` is a row of the query matrix (the
/// current view embeddings); numerator and denominator index target rows.
struct AnchorTerm {
  std::size_t query = 0;
  std::vector<std::size_t> numerator;    // close set, anchor's own entry first
  std::vector<std::size_t> denominator;  // anchor's own entry followed by negatives
};

namespace detail {

struct PairLayout {
  std::vector<std::size_t> query_rows;
  std::vector<std::size_t> target_rows;
  std::vector<Segment> numerators;
  std::vector<Segment> denominators;
};

inline PairLayout layout_pairs(const std::vector<AnchorTerm>& terms) {
  PairLayout lay;
  for (const AnchorTerm& t : terms) {
    if (t.numerator.empty() || t.denominator.empty()) throw std::domain_error("AnchorTerm: empty numerator or denominator");
    Segment num, den;
    for (std::size_t r : t.numerator) {
      num.push_back(lay.query_rows.size());
      lay.query_rows.push_back(t.query);
      lay.target_rows.push_back(r);
    }
    for (std::size_t r : t.denominator) {
      den.push_back(lay.query_rows.size());
      lay.query_rows.push_back(t.query);
      lay.target_rows.push_back(r);
    }
    lay.numerators.push_back(std::move(num));
    lay.denominators.push_back(std::move(den));
  }
  return lay;
}

}  // namespace detail

/// Mean over terms of logsumexp(denominator) - logsumexp(numerator). With a
/// single-entry numerator this is IR^nce / BALL / RING / CAVE; with a close set
/// it is the neighbor form (and la-nce). Returns a scalar node.
inline Var contrastive_loss(Graph& g, Witness& witness, Var queries, Var targets, const std::vector<AnchorTerm>& terms) {
  if (terms.empty()) throw std::domain_error("contrastive_loss: no anchor terms");
  detail::PairLayout lay = detail::layout_pairs(terms);
  Var scores = witness.pair_scores(g, queries, targets, std::move(lay.query_rows), std::move(lay.target_rows));
  Var num = g.segment_logsumexp(scores, std::move(lay.numerators));
  Var den = g.segment_logsumexp(scores, std::move(lay.denominators));
  return g.mean(g.sub(den, num));
}

/// Per-term values of the same quantity (for logging per-anchor estimates).
inline std::vector<double> contrastive_loss_terms(const Tensor& queries, const Tensor& targets, const Witness& witness,
                                                  const std::vector<AnchorTerm>& terms) {
  std::vector<double> out;
  std::vector<double> buf;
  for (const AnchorTerm& t : terms) {
    buf.clear();
    for (std::size_t r : t.numerator) buf.push_back(witness.score(queries.row_span(t.query), targets.row_span(r)));
    const double num = logsumexp(buf);
    buf.clear();
    for (std::size_t r : t.denominator) buf.push_back(witness.score(queries.row_span(t.query), targets.row_span(r)));
    out.push_back(logsumexp(buf) - num);
  }
  return out;
}

/// IR^nce on raw witness values, scores[0] the anchor's own entry:
/// logsumexp(scores) - scores[0].
inline double ir_nce_from_scores(std::span<const double> scores) {
  if (scores.empty()) throw std::domain_error("ir_nce_from_scores: no scores");
  return logsumexp(scores) - scores[0];
}

/// MI estimate attached to an nce-family loss: -loss + log K.
inline double mi_estimate(double loss, std::size_t k) { return -loss + std::log(static_cast<double>(k)); }

namespace detail {

inline std::vector<std::size_t> with_anchor(std::size_t anchor, std::span<const std::size_t> rest) {
  std::vector<std::size_t> out{anchor};
  out.insert(out.end(), rest.begin(), rest.end());
  return out;
}

inline double evaluate_terms(std::span<const double> view, const MemoryBank& bank, const AnchorTerm& term,
                             double temperature) {
  Graph g;
  Tensor q({1, view.size()}, std::vector<double>(view.begin(), view.end()));
  Var qv = g.constant(std::move(q));
  Var tv = g.constant(bank.entries());
  Witness w = Witness::scaled_dot(temperature);
  return g.value(contrastive_loss(g, w, qv, tv, {term})).item();
}

}  // namespace detail

/// IR^nce for one anchor: -(f(view, M[anchor]) - logsumexp_j f(view, M[j]))
/// over j in {anchor} + negatives.
inline double loss_ir_nce(std::span<const double> view, const MemoryBank& bank, std::size_t anchor,
                          std::span<const std::size_t> negatives, double temperature) {
  AnchorTerm t{0, {anchor}, detail::with_anchor(anchor, negatives)};
  return detail::evaluate_terms(view, bank, t, temperature);
}

/// T-discrimination with explicit negatives and close set (close set must
/// contain the anchor; an empty one means {anchor}).
inline double loss_t_disc(std::span<const double> view, const MemoryBank& bank, std::size_t anchor,
                          std::span<const std::size_t> negatives, std::span<const std::size_t> close,
                          double temperature) {
  AnchorTerm t{0, {}, detail::with_anchor(anchor, negatives)};
  if (close.empty()) t.numerator = {anchor};
  else t.numerator.assign(close.begin(), close.end());
  if (std::find(t.numerator.begin(), t.numerator.end(), anchor) == t.numerator.end()) {
    throw std::domain_error("loss_t_disc: close set must contain the anchor");
  }
  return detail::evaluate_terms(view, bank, t, temperature);
}

struct TDiscDraw {
  std::vector<std::size_t> negatives;  // K - 1
  std::vector<std::size_t> close;      // anchor first, then L - 1 draws
  std::vector<double> view;            // embedding of the drawn view
};

/// Full t-disc step for one datum: draw a view, encode it, sample negatives
/// and close neighbors around it, and evaluate the loss.
inline double loss_t_disc(Mlp& encoder, std::span<const double> datum, const ViewFunction& view_fn,
                          const MemoryBank& bank, std::size_t anchor, const NegativeSpec& neg_spec,
                          const NeighborSpec& neigh_spec, double temperature, std::size_t k, std::size_t l, Rng& rng,
                          std::span<const std::size_t> clusters = {}, TDiscDraw* draw = nullptr) {
  if (k < 2) throw std::domain_error("loss_t_disc: K must be at least 2");
  const std::vector<double> v = apply_view(view_fn, datum, rng);
  Tensor in({1, v.size()}, v);
  Tensor emb = encoder.apply(in);
  std::span<const double> e = emb.row_span(0);
  TDiscDraw d;
  d.view.assign(e.begin(), e.end());
  d.negatives = sample_negatives(neg_spec, bank, e, anchor, k - 1, rng, clusters);
  d.close = sample_close_neighbors(neigh_spec, bank, e, anchor, l == 0 ? 0 : l - 1, rng, clusters);
  const double loss = loss_t_disc(e, bank, anchor, d.negatives, d.close, temperature);
  if (draw != nullptr) *draw = std::move(d);
  return loss;
}

/// la-nce: the two-logsumexp form of local aggregation. Its loss is the
/// t-disc loss with background set B = {anchor} + negatives and close set C.
inline double loss_la_nce(std::span<const double> view, const MemoryBank& bank, std::size_t anchor,
                          std::span<const std::size_t> negatives, std::span<const std::size_t> close,
                          double temperature) {
  return loss_t_disc(view, bank, anchor, negatives, close, temperature);
}

/// MI-scale estimate for la-nce: both sets mean-normalized,
/// (lse_C - log|C|) - (lse_B - log|B|) = -loss + log|B| - log|C|.
inline double la_nce_estimate(double loss, std::size_t background_size, std::size_t close_size) {
  return -loss + std::log(static_cast<double>(background_size)) - std::log(static_cast<double>(close_size));
}

/// The objective that extends the view set with close neighbors, written
/// with the sum over neighbors outside the log and averaged over a uniform
/// q_C: mean over l in C of -(f_l - logsumexp_B f). Jensen puts la-nce below it.
inline double loss_view_set_extended(std::span<const double> view, const MemoryBank& bank,
                                     std::span<const std::size_t> background, std::span<const std::size_t> close,
                                     double temperature) {
  if (close.empty() || background.empty()) throw std::domain_error("loss_view_set_extended: empty set");
  Witness w = Witness::scaled_dot(temperature);
  std::vector<double> den;
  for (std::size_t j : background) den.push_back(w.score(view, bank.row(j)));
  const double lse = logsumexp(den);
  double s = 0.0;
  for (std::size_t l : close) s += -(w.score(view, bank.row(l)) - lse);
  return s / static_cast<double>(close.size());
}

/// Two-channel objective: IR^nce of the first channel's view against the
/// second channel's bank plus the swapped term.
inline double loss_cmc(std::span<const double> view_first, std::span<const double> view_second,
                       const MemoryBank& bank_first, const MemoryBank& bank_second, std::size_t anchor,
                       std::span<const std::size_t> negatives, double temperature) {
  return loss_ir_nce(view_first, bank_second, anchor, negatives, temperature) +
         loss_ir_nce(view_second, bank_first, anchor, negatives, temperature);
}

/// CMC MI estimate: half the summed loss, then the usual log K.
inline double cmc_mi_estimate(double loss_sum, std::size_t k) { return mi_estimate(loss_sum / 2.0, k); }

/// SimCLR with explicit views: rows of `first` and `second` are two fresh views
/// of the same K minibatch items; the anchor's second view is the positive and
/// the other items' second views are the negatives.
inline double loss_simclr(const Tensor& first, const Tensor& second, std::size_t anchor, double temperature) {
  if (first.rows() < 2 || first.rows() != second.rows()) throw std::domain_error("loss_simclr: need K >= 2 paired views");
  if (anchor >= first.rows()) throw std::out_of_range("loss_simclr: anchor out of range");
  Graph g;
  Var q = g.constant(first);
  Var t = g.constant(second);
  AnchorTerm term{anchor, {anchor}, {anchor}};
  for (std::size_t j = 0; j < second.rows(); ++j)
    if (j != anchor) term.denominator.push_back(j);
  Witness w = Witness::scaled_dot(temperature);
  return g.value(contrastive_loss(g, w, q, t, {term})).item();
}

struct PermutationCheck {
  double loss_before = 0.0;
  double loss_after = 0.0;
};

/// Total full-denominator IR loss for embeddings g_i against bank rows M[i],
/// before and after relabeling every datum i as perm[i].
inline PermutationCheck check_permutation_invariance(const Tensor& embeddings, const Tensor& bank, double temperature,
                                                     std::span<const std::size_t> permutation) {
  const std::size_t n = embeddings.rows();
  if (bank.rows() != n || permutation.size() != n) throw std::domain_error("check_permutation_invariance: size mismatch");
  auto total = [&](const std::vector<std::size_t>& p) {
    double s = 0.0;
    std::vector<double> row(n);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) row[j] = dot(embeddings.row_span(p[i]), bank.row_span(p[j])) / temperature;
      s += logsumexp(row) - row[i];
    }
    return s;
  };
  std::vector<std::size_t> id(n);
  for (std::size_t i = 0; i < n; ++i) id[i] = i;
  return {total(id), total(std::vector<std::size_t>(permutation.begin(), permutation.end()))};
}

/// Quarantined formulations from the original instance-discrimination and
/// local-aggregation code. They exponentiate directly and are allowed to
/// overflow; they exist for comparison against the nce forms.
namespace legacy {

/// -log(e^{f_0} / (kappa * (1/K) sum_j e^{f_j})) with scores[0] the anchor's
/// own entry. Computed naively; the result may be inf or NaN.
inline double ir_softmax_from_scores(std::span<const double> scores, double kappa) {
  double sum = 0.0;
  for (double f : scores) sum += std::exp(f);
  const double z = kappa * sum / static_cast<double>(scores.size());
  return -std::log(std::exp(scores[0]) / z);
}

inline double loss_ir_softmax(std::span<const double> view, const MemoryBank& bank, std::size_t anchor,
                              std::span<const std::size_t> negatives, double kappa, double temperature) {
  std::vector<double> scores{dot(view, bank.row(anchor)) / temperature};
  for (std::size_t j : negatives) scores.push_back(dot(view, bank.row(j)) / temperature);
  return ir_softmax_from_scores(scores, kappa);
}

/// -log(p(C n B) / p(B)) with p(I) = sum_{i in I} e^{f_i} / Z and Z the
/// kappa-scaled sampled normalizer. C must be a sub-multiset of B.
inline double loss_la_original(std::span<const double> view, const MemoryBank& bank, std::size_t anchor,
                               std::span<const std::size_t> background, std::span<const std::size_t> close,
                               double kappa, double temperature, bool enforce_anchor = true) {
  if (background.empty()) throw std::domain_error("loss_la_original: empty background set");
  std::vector<std::size_t> b(background.begin(), background.end());
  std::vector<std::size_t> c(close.begin(), close.end());
  if (enforce_anchor && std::find(c.begin(), c.end(), anchor) == c.end()) c.insert(c.begin(), anchor);
  {
    std::vector<std::size_t> bs = b, cs = c;
    std::sort(bs.begin(), bs.end());
    std::sort(cs.begin(), cs.end());
    if (!std::includes(bs.begin(), bs.end(), cs.begin(), cs.end())) {
      throw std::domain_error("loss_la_original: close set must be a subset of the background set");
    }
  }
  double sum_b = 0.0;
  for (std::size_t j : b) sum_b += std::exp(dot(view, bank.row(j)) / temperature);
  const double z = kappa * sum_b / static_cast<double>(b.size());
  double p_c = 0.0;
  for (std::size_t j : c) p_c += std::exp(dot(view, bank.row(j)) / temperature) / z;
  double p_b = 0.0;
  for (std::size_t j : b) p_b += std::exp(dot(view, bank.row(j)) / temperature) / z;
  return -std::log(p_c / p_b);
}

/// Graph form of ir-softmax for training comparisons. Non-finite values
/// raise NonFiniteError from the graph.
inline Var ir_softmax_loss(Graph& g, Witness& witness, Var queries, Var targets, const std::vector<AnchorTerm>& terms,
                           double kappa) {
  std::vector<std::size_t> qa, ta;
  std::vector<Segment> dens;
  Segment anchors;
  for (const AnchorTerm& t : terms) {
    Segment den;
    anchors.push_back(qa.size());
    for (std::size_t r : t.denominator) {
      den.push_back(qa.size());
      qa.push_back(t.query);
      ta.push_back(r);
    }
    dens.push_back(std::move(den));
  }
  std::vector<Segment> anchor_segments;
  for (std::size_t a : anchors) anchor_segments.push_back({a});
  Var scores = witness.pair_scores(g, queries, targets, std::move(qa), std::move(ta));
  Var expd = g.exp(scores);
  std::vector<double> log_scale;  // log(kappa / K) per term
  for (const Segment& d : dens) log_scale.push_back(std::log(kappa / static_cast<double>(d.size())));
  Var sums = g.segment_sum(expd, std::move(dens));
  Var z = g.add(g.log(sums), g.constant(Tensor::column(std::move(log_scale))));
  Var own = g.segment_sum(scores, std::move(anchor_segments));
  return g.mean(g.sub(z, own));
}

/// Graph form of la-original: -log(sum_{C n B} e^f / Z) + log(sum_B e^f / Z),
/// Z = kappa * mean_B e^f. Numerator entries are the close rows that also
/// appear in the denominator; an empty intersection yields -log 0 and raises
/// NonFiniteError.
inline Var la_original_loss(Graph& g, Witness& witness, Var queries, Var targets, const std::vector<AnchorTerm>& terms,
                            double kappa) {
  std::vector<std::size_t> qa, ta;
  std::vector<Segment> nums, dens;
  std::vector<double> log_z_scale;
  for (const AnchorTerm& t : terms) {
    Segment den, num;
    const std::size_t base = qa.size();
    for (std::size_t r : t.denominator) {
      den.push_back(qa.size());
      qa.push_back(t.query);
      ta.push_back(r);
    }
    for (std::size_t r : t.numerator) {
      for (std::size_t k = 0; k < t.denominator.size(); ++k) {
        if (t.denominator[k] == r) {
          num.push_back(base + k);
          break;
        }
      }
    }
    log_z_scale.push_back(std::log(kappa / static_cast<double>(den.size())));
    nums.push_back(std::move(num));
    dens.push_back(std::move(den));
  }
  Var scores = witness.pair_scores(g, queries, targets, std::move(qa), std::move(ta));
  Var expd = g.exp(scores);
  Var log_z = g.add(g.log(g.segment_sum(expd, dens)), g.constant(Tensor::column(log_z_scale)));
  Var log_pc = g.sub(g.log(g.segment_sum(expd, std::move(nums))), log_z);
  Var log_pb = g.sub(g.log(g.segment_sum(expd, std::move(dens))), log_z);
  return g.mean(g.sub(log_pb, log_pc));
}

}  // namespace legacy

}  // namespace cmi
