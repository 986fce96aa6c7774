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
#include "cmi/errors.hpp"
#include "cmi/rng.hpp"

namespace cmi {

/// Linear schedule on a percentage, clamped at both ends.
struct AnnealSchedule {
  double start_percent = 100.0;
  double end_percent = 100.0;
  double start_epoch = 0.0;
  double end_epoch = 0.0;
};

inline double anneal_value(const AnnealSchedule& s, double epoch_or_step) {
  if (epoch_or_step <= s.start_epoch) return s.start_percent;
  if (epoch_or_step >= s.end_epoch) return s.end_percent;
  const double t = (epoch_or_step - s.start_epoch) / (s.end_epoch - s.start_epoch);
  return s.start_percent + t * (s.end_percent - s.start_percent);
}

enum class NegativeKind { Marginal, Ball, Ring, Cave };
enum class NeighborKind { None, SNeigh, KNeigh };

inline const char* to_string(NegativeKind k) {
  switch (k) {
    case NegativeKind::Marginal: return "marginal";
    case NegativeKind::Ball: return "ball";
    case NegativeKind::Ring: return "ring";
    case NegativeKind::Cave: return "cave";
  }
  return "?";
}

inline const char* to_string(NeighborKind k) {
  switch (k) {
    case NeighborKind::None: return "none";
    case NeighborKind::SNeigh: return "s-neigh";
    case NeighborKind::KNeigh: return "k-neigh";
  }
  return "?";
}

inline NegativeKind negative_kind_from_string(const std::string& s) {
  if (s == "marginal") return NegativeKind::Marginal;
  if (s == "ball") return NegativeKind::Ball;
  if (s == "ring") return NegativeKind::Ring;
  if (s == "cave") return NegativeKind::Cave;
  throw ConfigError("unknown negative kind '" + s + "'");
}

inline NeighborKind neighbor_kind_from_string(const std::string& s) {
  if (s == "none") return NeighborKind::None;
  if (s == "s-neigh") return NeighborKind::SNeigh;
  if (s == "k-neigh") return NeighborKind::KNeigh;
  throw ConfigError("unknown neighbor kind '" + s + "'");
}

/// Restriction set T for negatives, expressed as rank percentiles of the bank
/// ordered by distance to the anchor's current view.
struct NegativeSpec {
  NegativeKind kind = NegativeKind::Marginal;
  double outer_percent = 100.0;  // ball radius tau
  double inner_percent = 0.0;    // ring hole gamma
  std::size_t kmeans_k = 10;
  std::size_t kmeans_restarts = 1;
  std::optional<AnnealSchedule> anneal;        // on outer_percent
  std::optional<AnnealSchedule> anneal_inner;  // optional, ring only

  void validate() const {
    if (!(outer_percent > 0.0 && outer_percent <= 100.0)) {
      throw ConfigError("NegativeSpec: outer_percent must lie in (0, 100]");
    }
    if (kind == NegativeKind::Ring && !(inner_percent > 0.0 && inner_percent < outer_percent)) {
      throw ConfigError("NegativeSpec: ring needs 0 < inner_percent < outer_percent");
    }
  }

  /// Copy with annealed percentages for the given epoch (or step).
  NegativeSpec at(double epoch_or_step) const {
    NegativeSpec out = *this;
    if (anneal) out.outer_percent = anneal_value(*anneal, epoch_or_step);
    if (anneal_inner) out.inner_percent = anneal_value(*anneal_inner, epoch_or_step);
    if (out.kind == NegativeKind::Ring && out.inner_percent >= out.outer_percent) {
      out.inner_percent = out.outer_percent / 2.0;
    }
    return out;
  }

  bool needs_clusters() const { return kind == NegativeKind::Cave; }

  static NegativeSpec marginal() { return {}; }
  static NegativeSpec ball(double outer) {
    NegativeSpec s;
    s.kind = NegativeKind::Ball;
    s.outer_percent = outer;
    return s;
  }
  static NegativeSpec ring(double inner, double outer) {
    NegativeSpec s = ball(outer);
    s.kind = NegativeKind::Ring;
    s.inner_percent = inner;
    return s;
  }
  static NegativeSpec cave(double outer, std::size_t k) {
    NegativeSpec s = ball(outer);
    s.kind = NegativeKind::Cave;
    s.kmeans_k = k;
    return s;
  }
};

/// Close-neighbor set C (always containing the anchor) and its sample count L.
struct NeighborSpec {
  NeighborKind kind = NeighborKind::None;
  double close_percent = 1.0;
  std::size_t kmeans_k = 10;
  std::size_t kmeans_restarts = 1;
  std::size_t count = 1;  // L, including the anchor
  std::optional<AnnealSchedule> anneal;  // on close_percent, typically from 0

  NeighborSpec at(double epoch_or_step) const {
    NeighborSpec out = *this;
    if (anneal) out.close_percent = anneal_value(*anneal, epoch_or_step);
    return out;
  }

  bool needs_clusters() const { return kind == NeighborKind::KNeigh; }

  static NeighborSpec none() { return {}; }
  static NeighborSpec s_neigh(double close_percent) {
    NeighborSpec s;
    s.kind = NeighborKind::SNeigh;
    s.close_percent = close_percent;
    return s;
  }
  static NeighborSpec k_neigh(std::size_t k) {
    NeighborSpec s;
    s.kind = NeighborKind::KNeigh;
    s.kmeans_k = k;
    return s;
  }
};

/// Number of leading ranks covered by `percent` of n, at least 1 when percent > 0.
inline std::size_t rank_cutoff(double percent, std::size_t n) {
  if (percent <= 0.0) return 0;
  const double raw = percent / 100.0 * static_cast<double>(n);
  // Guard against 10% of 1000 evaluating to 100.00000000000001.
  const auto c = static_cast<std::size_t>(std::ceil(raw - 1e-9));
  return std::clamp<std::size_t>(c, 1, n);
}

/// The candidate pool for negatives: indices satisfying the NegativeSpec's
/// rank/cluster predicate, anchor excluded, in rank order.
inline std::vector<std::size_t> negative_pool(const NegativeSpec& spec, std::span<const std::size_t> ranking,
                                              std::size_t anchor_index,
                                              std::span<const std::size_t> clusters = {}) {
  const std::size_t n = ranking.size();
  std::vector<std::size_t> pool;
  std::size_t lo = 0, hi = n;  // ranks [lo, hi) in 0-based positions
  switch (spec.kind) {
    case NegativeKind::Marginal: break;
    case NegativeKind::Ball:
    case NegativeKind::Cave: hi = rank_cutoff(spec.outer_percent, n); break;
    case NegativeKind::Ring:
      lo = rank_cutoff(spec.inner_percent, n);
      hi = rank_cutoff(spec.outer_percent, n);
      break;
  }
  if (spec.kind == NegativeKind::Cave && clusters.size() != n) {
    throw std::domain_error("negative_pool: cave needs a cluster label for every bank entry");
  }
  pool.reserve(hi > lo ? hi - lo : 0);
  for (std::size_t r = lo; r < hi; ++r) {
    const std::size_t idx = ranking[r];
    if (idx == anchor_index) continue;
    if (spec.kind == NegativeKind::Cave && clusters[idx] == clusters[anchor_index]) continue;
    pool.push_back(idx);
  }
  return pool;
}

inline std::vector<std::size_t> identity_ranking(std::size_t n) {
  std::vector<std::size_t> r(n);
  for (std::size_t i = 0; i < n; ++i) r[i] = i;
  return r;
}

/// Indices whose rank (ascending L2 distance to `query`, ties by index) lies
/// in [lo, hi). Same set as that slice of rank_by_similarity; the order is
/// deterministic but unspecified.
inline std::vector<std::size_t> ranked_window(const Tensor& points, std::span<const double> query, std::size_t lo,
                                              std::size_t hi) {
  if (query.size() != points.cols()) throw std::domain_error("ranked_window: query dimension mismatch");
  const std::size_t n = points.rows();
  hi = std::min(hi, n);
  if (lo >= hi) return {};
  std::vector<std::pair<double, std::size_t>> keyed(n);
  for (std::size_t i = 0; i < n; ++i) keyed[i] = {squared_distance(points.row_span(i), query), i};
  if (hi < n) std::nth_element(keyed.begin(), keyed.begin() + static_cast<std::ptrdiff_t>(hi), keyed.end());
  if (lo > 0) std::nth_element(keyed.begin(), keyed.begin() + static_cast<std::ptrdiff_t>(lo), keyed.begin() + static_cast<std::ptrdiff_t>(hi));
  std::vector<std::size_t> out;
  out.reserve(hi - lo);
  for (std::size_t r = lo; r < hi; ++r) out.push_back(keyed[r].second);
  return out;
}

/// Draws `count` negatives i.i.d. (with replacement) from the NegativeSpec's pool.
/// `clusters` is required for cave. Marginal skips the ranking entirely.
inline std::vector<std::size_t> sample_negatives(const NegativeSpec& spec, const MemoryBank& bank,
                                                 std::span<const double> anchor_embedding, std::size_t anchor_index,
                                                 std::size_t count, Rng& rng,
                                                 std::span<const std::size_t> clusters = {}) {
  const std::size_t n = bank.size();
  if (anchor_index >= n) throw std::out_of_range("sample_negatives: anchor index out of range");
  std::vector<std::size_t> out;
  out.reserve(count);
  if (spec.kind == NegativeKind::Marginal || (spec.kind == NegativeKind::Ball && rank_cutoff(spec.outer_percent, n) == n)) {
    if (n < 2) throw DegeneratePoolError("sample_negatives: marginal pool is empty (bank holds only the anchor)");
    for (std::size_t k = 0; k < count; ++k) {
      std::size_t j = uniform_index(rng, n - 1);
      if (j >= anchor_index) ++j;
      out.push_back(j);
    }
    return out;
  }
  std::vector<std::size_t> pool;
  if (spec.kind == NegativeKind::Cave) {
    pool = negative_pool(spec, rank_by_similarity(bank, anchor_embedding), anchor_index, clusters);
  } else {
    // Ball and ring only need the set of indices in a rank window, not a full sort.
    const std::size_t lo = spec.kind == NegativeKind::Ring ? rank_cutoff(spec.inner_percent, n) : 0;
    pool = ranked_window(bank.entries(), anchor_embedding, lo, rank_cutoff(spec.outer_percent, n));
    std::erase(pool, anchor_index);
  }
  if (pool.empty()) {
    throw DegeneratePoolError(std::string("sample_negatives: empty pool for ") + to_string(spec.kind) +
                              " (outer " + std::to_string(spec.outer_percent) + "%, inner " +
                              std::to_string(spec.inner_percent) + "%)");
  }
  for (std::size_t k = 0; k < count; ++k) out.push_back(pool[uniform_index(rng, pool.size())]);
  return out;
}

/// Close set C for the anchor: rank-based for s-neigh, cluster-based for k-neigh.
inline std::vector<std::size_t> close_set(const NeighborSpec& spec, std::span<const std::size_t> ranking,
                                          std::size_t anchor_index, std::span<const std::size_t> clusters = {}) {
  std::vector<std::size_t> c{anchor_index};
  switch (spec.kind) {
    case NeighborKind::None: break;
    case NeighborKind::SNeigh: {
      const std::size_t hi = rank_cutoff(spec.close_percent, ranking.size());
      for (std::size_t r = 0; r < hi; ++r)
        if (ranking[r] != anchor_index) c.push_back(ranking[r]);
      break;
    }
    case NeighborKind::KNeigh: {
      if (clusters.empty()) throw std::domain_error("close_set: k-neigh needs cluster labels");
      for (std::size_t i = 0; i < clusters.size(); ++i)
        if (i != anchor_index && clusters[i] == clusters[anchor_index]) c.push_back(i);
      break;
    }
  }
  return c;
}

/// The anchor followed by L - 1 i.i.d. draws from C \ {anchor}; just the
/// anchor when the NeighborSpec is none or C holds nothing else.
inline std::vector<std::size_t> sample_close_neighbors(const NeighborSpec& spec, const MemoryBank& bank,
                                                       std::span<const double> anchor_embedding,
                                                       std::size_t anchor_index, std::size_t count, Rng& rng,
                                                       std::span<const std::size_t> clusters = {}) {
  std::vector<std::size_t> out{anchor_index};
  if (spec.kind == NeighborKind::None || count == 0) return out;
  std::vector<std::size_t> ranking;
  if (spec.kind == NeighborKind::SNeigh) ranking = rank_by_similarity(bank, anchor_embedding);
  else ranking = identity_ranking(bank.size());
  const std::vector<std::size_t> c = close_set(spec, ranking, anchor_index, clusters);
  if (c.size() < 2) return out;
  for (std::size_t k = 0; k < count; ++k) out.push_back(c[1 + uniform_index(rng, c.size() - 1)]);
  return out;
}

}  // namespace cmi
