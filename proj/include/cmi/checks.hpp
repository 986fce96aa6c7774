#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "cmi/bank.hpp"
#include "cmi/datasets.hpp"
#include "cmi/errors.hpp"
#include "cmi/estimators.hpp"
#include "cmi/kmeans.hpp"
#include "cmi/ndmath/autodiff.hpp"
#include "cmi/ndmath/mlp.hpp"
#include "cmi/objectives.hpp"
#include "cmi/rng.hpp"
#include "cmi/samplers.hpp"

/// Deterministic property checks shared by the CLI `check` verb, the unit
/// tests and the acceptance suite. Each returns the worst observed value so
/// callers can report margins, not just pass/fail.
namespace cmi::checks {

struct CheckResult {
  std::string name;
  bool passed = false;
  double worst = 0.0;      // largest violation / error observed
  double tolerance = 0.0;  // threshold it is compared against
  std::size_t instances = 0;
  std::string detail;
};

// ---------------------------------------------------------------------------
// random instance helpers

inline Tensor random_normal(std::size_t rows, std::size_t cols, Rng& rng, double scale = 1.0) {
  std::normal_distribution<double> nd(0.0, scale);
  Tensor t = Tensor::zeros(rows, cols);
  for (double& v : t.storage()) v = nd(rng);
  return t;
}

inline Tensor random_unit_rows(std::size_t rows, std::size_t cols, Rng& rng) {
  Tensor t = random_normal(rows, cols, rng);
  for (std::size_t i = 0; i < rows; ++i) {
    auto r = t.row_span(i);
    const double norm = std::sqrt(dot(r, r));
    for (double& v : r) v /= norm;
  }
  return t;
}

inline std::vector<double> random_unit(std::size_t d, Rng& rng) {
  Tensor t = random_unit_rows(1, d, rng);
  return {t.data().begin(), t.data().end()};
}

// ---------------------------------------------------------------------------
// gradient checking

/// Relative error ||analytic - numeric|| / max(||analytic||, ||numeric||, 1e-12)
/// of the gradient of the scalar built by `build` with respect to `params`,
/// using central differences with step h.
inline double gradient_relative_error(const std::vector<Parameter*>& params, const std::function<Var(Graph&)>& build,
                                      double h = 1e-6) {
  for (Parameter* p : params) p->zero_grad();
  {
    Graph g;
    Var loss = build(g);
    g.backward(loss);
  }
  double diff2 = 0.0, a2 = 0.0, n2 = 0.0;
  for (Parameter* p : params) {
    for (std::size_t i = 0; i < p->value.size(); ++i) {
      const double orig = p->value[i];
      p->value[i] = orig + h;
      double up = 0.0, down = 0.0;
      {
        Graph g;
        up = g.value(build(g)).item();
      }
      p->value[i] = orig - h;
      {
        Graph g;
        down = g.value(build(g)).item();
      }
      p->value[i] = orig;
      const double numeric = (up - down) / (2.0 * h);
      const double analytic = p->grad[i];
      diff2 += (analytic - numeric) * (analytic - numeric);
      a2 += analytic * analytic;
      n2 += numeric * numeric;
    }
  }
  const double denom = std::max({std::sqrt(a2), std::sqrt(n2), 1e-12});
  return std::sqrt(diff2) / denom;
}

/// Random anchor terms over `n_targets` target rows for `n_queries` queries:
/// anchor = query row index, `negs` marginal negatives, `close_extra` extra
/// close entries.
inline std::vector<AnchorTerm> random_terms(std::size_t n_queries, std::size_t n_targets, std::size_t negs,
                                            std::size_t close_extra, Rng& rng, bool close_inside_denominator = false) {
  std::vector<AnchorTerm> terms;
  for (std::size_t q = 0; q < n_queries; ++q) {
    AnchorTerm t{q, {q}, {q}};
    for (std::size_t k = 0; k < close_extra; ++k) {
      std::size_t j = uniform_index(rng, n_targets - 1);
      if (j >= q) ++j;
      t.numerator.push_back(j);
    }
    for (std::size_t k = 0; k < negs; ++k) {
      std::size_t j = uniform_index(rng, n_targets - 1);
      if (j >= q) ++j;
      t.denominator.push_back(j);
    }
    if (close_inside_denominator)
      t.denominator.insert(t.denominator.end(), t.numerator.begin() + 1, t.numerator.end());
    terms.push_back(std::move(t));
  }
  return terms;
}

struct GradientCase {
  std::string objective;
  std::function<double(Rng&)> run;  // returns the relative error of one instance
};

inline std::vector<GradientCase> gradient_cases() {
  constexpr std::size_t B = 3, N = 8, D = 4;
  constexpr double omega = 0.5;
  auto qt_case = [](std::function<Var(Graph&, Witness&, Var, Var, const std::vector<AnchorTerm>&)> loss_fn,
                    std::size_t close_extra, bool close_in_den) {
    return [=](Rng& rng) {
      Parameter q("q", random_normal(B, D, rng));
      Parameter t("t", random_normal(N, D, rng));
      const auto terms = random_terms(B, N, 4, close_extra, rng, close_in_den);
      Witness w = Witness::scaled_dot(omega);
      return gradient_relative_error({&q, &t}, [&](Graph& g) {
        Var qv = g.l2_normalize_rows(g.parameter(q));
        Var tv = g.l2_normalize_rows(g.parameter(t));
        return loss_fn(g, w, qv, tv, terms);
      });
    };
  };
  const auto nce = [](Graph& g, Witness& w, Var q, Var t, const std::vector<AnchorTerm>& terms) {
    return contrastive_loss(g, w, q, t, terms);
  };
  std::vector<GradientCase> cases;
  cases.push_back({"ir-nce", qt_case(nce, 0, false)});
  cases.push_back({"t-disc", qt_case(nce, 2, false)});
  cases.push_back({"la-nce", qt_case(nce, 2, true)});
  cases.push_back({"ir-softmax", qt_case(
                                     [](Graph& g, Witness& w, Var q, Var t, const std::vector<AnchorTerm>& terms) {
                                       return legacy::ir_softmax_loss(g, w, q, t, terms, kImageNetKappa);
                                     },
                                     0, false)});
  cases.push_back({"la-original", qt_case(
                                      [](Graph& g, Witness& w, Var q, Var t, const std::vector<AnchorTerm>& terms) {
                                        return legacy::la_original_loss(g, w, q, t, terms, kImageNetKappa);
                                      },
                                      2, true)});
  cases.push_back({"cmc", [](Rng& rng) {
                     Parameter qa("qa", random_normal(B, D, rng)), qb("qb", random_normal(B, D, rng));
                     Parameter ba("ba", random_normal(N, D, rng)), bb("bb", random_normal(N, D, rng));
                     const auto terms = random_terms(B, N, 4, 0, rng);
                     Witness w = Witness::scaled_dot(omega);
                     return gradient_relative_error({&qa, &qb, &ba, &bb}, [&](Graph& g) {
                       Var a = g.l2_normalize_rows(g.parameter(qa));
                       Var b = g.l2_normalize_rows(g.parameter(qb));
                       Var ma = g.l2_normalize_rows(g.parameter(ba));
                       Var mb = g.l2_normalize_rows(g.parameter(bb));
                       return g.add(contrastive_loss(g, w, a, mb, terms), contrastive_loss(g, w, b, ma, terms));
                     });
                   }});
  cases.push_back({"simclr", [](Rng& rng) {
                     Parameter v1("v1", random_normal(B + 2, D, rng)), v2("v2", random_normal(B + 2, D, rng));
                     std::vector<AnchorTerm> terms;
                     for (std::size_t b = 0; b < B + 2; ++b) {
                       AnchorTerm t{b, {b}, {b}};
                       for (std::size_t j = 0; j < B + 2; ++j)
                         if (j != b) t.denominator.push_back(j);
                       terms.push_back(std::move(t));
                     }
                     Witness w = Witness::scaled_dot(omega);
                     return gradient_relative_error({&v1, &v2}, [&](Graph& g) {
                       return contrastive_loss(g, w, g.l2_normalize_rows(g.parameter(v1)),
                                               g.l2_normalize_rows(g.parameter(v2)), terms);
                     });
                   }});
  auto encoder_case = [](WitnessKind kind) {
    return [kind](Rng& rng) {
      Mlp enc = Mlp::make(2, 6, D, 3, true, rng);
      Witness w = Witness::make(kind, D, omega, rng, 1, 5);
      if (kind == WitnessKind::Bilinear) {
        // Move off the identity so the bilinear gradient is generic.
        for (double& v : w.parameters()[0]->value.storage()) v += 0.3 * uniform_real(rng, -1.0, 1.0);
      }
      const Tensor xq = random_normal(B, 2, rng);
      Parameter t("t", random_normal(N, D, rng));
      const auto terms = random_terms(B, N, 4, 0, rng);
      std::vector<Parameter*> params = enc.parameters();
      params.push_back(&t);
      for (Parameter* p : w.parameters()) params.push_back(p);
      return gradient_relative_error(params, [&](Graph& g) {
        return contrastive_loss(g, w, enc.forward(g, g.constant(xq)), g.parameter(t), terms);
      });
    };
  };
  cases.push_back({"encoder+bilinear", encoder_case(WitnessKind::Bilinear)});
  cases.push_back({"encoder+concat-mlp", encoder_case(WitnessKind::ConcatMlp)});
  return cases;
}

/// Every objective's analytic gradient vs central differences.
inline std::vector<CheckResult> check_gradients(std::uint64_t seed, std::size_t instances = 20, double tol = 1e-4) {
  std::vector<CheckResult> out;
  for (const GradientCase& gc : gradient_cases()) {
    Rng rng(derive_seed(seed, std::hash<std::string>{}(gc.objective)));
    CheckResult r{"gradient " + gc.objective, true, 0.0, tol, instances, ""};
    for (std::size_t i = 0; i < instances; ++i) r.worst = std::max(r.worst, gc.run(rng));
    r.passed = r.worst <= tol;
    out.push_back(std::move(r));
  }
  return out;
}

// ---------------------------------------------------------------------------
// exact equivalences

inline CheckResult check_analytic_mi() {
  const double v = analytic_gaussian_mi(GaussianPairFamily{});
  CheckResult r{"analytic gaussian MI = 0.02041", false, std::abs(v - 0.02041), 1e-5, 1, ""};
  r.passed = r.worst <= r.tolerance;
  r.detail = "value " + std::to_string(v);
  return r;
}

/// Random bank with unit rows plus an anchor view near the anchor's row.
struct SmallWorld {
  MemoryBank bank;
  std::size_t anchor = 0;
  std::vector<double> view;
  std::vector<std::size_t> clusters;
};

inline SmallWorld make_world(Rng& rng, std::size_t n = 60, std::size_t d = 4, std::size_t k_clusters = 5) {
  SmallWorld w{MemoryBank(random_unit_rows(n, d, rng), 0.5), uniform_index(rng, n), {}, {}};
  w.view = random_unit(d, rng);
  for (std::size_t j = 0; j < d; ++j) w.view[j] = 0.7 * w.view[j] + w.bank.row(w.anchor)[j];
  const double norm = std::sqrt(dot(w.view, w.view));
  for (double& v : w.view) v /= norm;
  w.clusters = kmeans(w.bank.entries(), k_clusters, 1, rng).assignment;
  return w;
}

inline std::vector<CheckResult> check_equivalences(std::uint64_t seed, std::size_t instances = 50, double tol = 1e-10) {
  const double omega = 0.07;
  Rng rng(derive_seed(seed, 11));
  CheckResult ir{"IR-nce == t-disc(marginal, none)", true, 0.0, tol, instances, ""};
  CheckResult la0{"LA with close set {anchor} == BALL", true, 0.0, tol, instances, ""};
  CheckResult la{"la-nce estimate == -la-original loss + log|B| - log|C|", true, 0.0, tol, instances, ""};
  CheckResult simclr{"SimCLR == alpha=0 bank variant", true, 0.0, tol, instances, ""};
  CheckResult pool{"ball(100%) pool == marginal pool", true, 0.0, 0.0, instances, ""};
  for (std::size_t it = 0; it < instances; ++it) {
    SmallWorld w = make_world(rng);
    const std::size_t neg_count = 15;
    {
      // Shared randomness: both paths draw from copies of one generator.
      Rng r1 = rng, r2 = rng;
      const NegativeSpec marginal{};
      const auto negs = sample_negatives(marginal, w.bank, w.view, w.anchor, neg_count, r1);
      const double a = loss_ir_nce(w.view, w.bank, w.anchor, negs, omega);
      ObjectiveSpec spec;
      spec.family = ObjectiveFamily::IrNce;
      const ObjectiveSpec td = spec.as_t_disc();
      const auto negs2 = sample_negatives(td.negatives, w.bank, w.view, w.anchor, neg_count, r2);
      const auto close = sample_close_neighbors(td.neighbors, w.bank, w.view, w.anchor, 3, r2);
      const double b = loss_t_disc(w.view, w.bank, w.anchor, negs2, close, omega);
      ir.worst = std::max(ir.worst, std::abs(a - b));
      rng = r1;
    }
    NegativeSpec ball = NegativeSpec::ball(30.0);
    const auto negs = sample_negatives(ball, w.bank, w.view, w.anchor, neg_count, rng);
    std::vector<std::size_t> background{w.anchor};
    background.insert(background.end(), negs.begin(), negs.end());
    {
      const std::vector<std::size_t> only_anchor{w.anchor};
      const double a = legacy::loss_la_original(w.view, w.bank, w.anchor, background, only_anchor, kImageNetKappa, omega);
      const double b = loss_t_disc(w.view, w.bank, w.anchor, negs, {}, omega);
      la0.worst = std::max(la0.worst, std::abs(a - b));
    }
    {
      const NeighborSpec kn = NeighborSpec::k_neigh(5);
      const auto close = sample_close_neighbors(kn, w.bank, w.view, w.anchor, 3, rng, w.clusters);
      // B must contain C for the original formulation.
      std::vector<std::size_t> b_set = background;
      b_set.insert(b_set.end(), close.begin() + 1, close.end());
      const std::vector<std::size_t> b_negs(b_set.begin() + 1, b_set.end());
      const double loss_nce = loss_la_nce(w.view, w.bank, w.anchor, b_negs, close, omega);
      const double loss_orig = legacy::loss_la_original(w.view, w.bank, w.anchor, b_set, close, kImageNetKappa, omega);
      const double est = la_nce_estimate(loss_nce, b_set.size(), close.size());
      const double from_orig = -loss_orig + std::log(static_cast<double>(b_set.size())) -
                               std::log(static_cast<double>(close.size()));
      la.worst = std::max({la.worst, std::abs(est - from_orig), std::abs(loss_nce - loss_orig)});
    }
    {
      const std::size_t kb = 6;
      const Tensor first = random_unit_rows(kb, 4, rng);
      const Tensor second = random_unit_rows(kb, 4, rng);
      const std::size_t a = uniform_index(rng, kb);
      const double s = loss_simclr(first, second, a, omega);
      MemoryBank bank0(kb, 4, 0.0);
      for (std::size_t i = 0; i < kb; ++i) bank0.update(i, second.row_span(i));
      std::vector<std::size_t> others;
      for (std::size_t j = 0; j < kb; ++j)
        if (j != a) others.push_back(j);
      const double b = loss_ir_nce(first.row_span(a), bank0, a, others, omega);
      simclr.worst = std::max(simclr.worst, std::abs(s - b));
    }
    {
      const auto ranking = rank_by_similarity(w.bank, w.view);
      auto p1 = negative_pool(NegativeSpec::ball(100.0), ranking, w.anchor);
      auto p2 = negative_pool(NegativeSpec{}, ranking, w.anchor);
      std::sort(p1.begin(), p1.end());
      std::sort(p2.begin(), p2.end());
      Rng r1 = rng, r2 = rng;
      const auto d1 = sample_negatives(NegativeSpec::ball(100.0), w.bank, w.view, w.anchor, 20, r1);
      const auto d2 = sample_negatives(NegativeSpec{}, w.bank, w.view, w.anchor, 20, r2);
      if (p1 != p2 || d1 != d2) pool.worst = 1.0;
      rng = r1;
    }
  }
  std::vector<CheckResult> out{ir, la0, la, simclr, pool};
  for (CheckResult& r : out) r.passed = r.worst <= r.tolerance;
  return out;
}

// ---------------------------------------------------------------------------
// inequalities

/// Restriction raises the partition: for T a proper top set of f values on a discrete
/// 8-point distribution, E_P[e^f] < E_{Q_T}[e^f]. All thresholds enumerated.
inline CheckResult check_restricted_partition(std::uint64_t seed, std::size_t instances = 100) {
  Rng rng(derive_seed(seed, 21));
  CheckResult r{"E_P[e^f] < E_Q_T[e^f] (8-point enumeration)", true, -INFINITY, 0.0, 0, ""};
  for (std::size_t it = 0; it < instances; ++it) {
    std::vector<double> p(8), f(8);
    double total = 0.0;
    for (double& v : p) total += (v = uniform_real(rng, 0.05, 1.0));
    for (double& v : p) v /= total;
    for (double& v : f) v = uniform_real(rng, -3.0, 3.0);
    std::vector<double> sorted = f;
    std::sort(sorted.begin(), sorted.end());
    // T = {f >= t} for every t that leaves a proper, non-empty subset.
    for (std::size_t k = 1; k < sorted.size(); ++k) {
      const double t = sorted[k];
      const RestrictedPartition rp = restricted_partition(p, f, [t](double v) { return v >= t; });
      r.worst = std::max(r.worst, rp.mean_under_p - rp.mean_under_q);  // must stay < 0
      ++r.instances;
    }
  }
  r.passed = r.worst < 0.0;
  return r;
}

inline std::vector<CheckResult> check_inequalities(std::uint64_t seed, std::size_t instances = 100) {
  const double omega = 0.2;
  Rng rng(derive_seed(seed, 22));
  CheckResult close_bound{"anchor-only objective >= close-set objective - log|C| (anchor maximal in C)", true, -INFINITY, 0.0, instances, ""};
  CheckResult jensen{"la-nce loss <= neighbors-outside-log loss", true, -INFINITY, 0.0, instances, ""};
  CheckResult bound{"InfoNCE estimate <= log K", true, -INFINITY, 0.0, instances, ""};
  for (std::size_t it = 0; it < instances; ++it) {
    SmallWorld w = make_world(rng);
    const NegativeSpec ball = NegativeSpec::ball(40.0);
    const auto negs = sample_negatives(ball, w.bank, w.view, w.anchor, 12, rng);
    std::vector<std::size_t> background{w.anchor};
    background.insert(background.end(), negs.begin(), negs.end());
    // Close set: anchor plus bank rows scoring no higher than the anchor.
    const double fa = dot(w.view, w.bank.row(w.anchor));
    std::vector<std::size_t> close{w.anchor};
    for (std::size_t j = 0; j < w.bank.size() && close.size() < 5; ++j)
      if (j != w.anchor && dot(w.view, w.bank.row(j)) <= fa) close.push_back(j);
    const double obj_la0 = -loss_t_disc(w.view, w.bank, w.anchor, negs, {}, omega);
    const double obj_la = -loss_t_disc(w.view, w.bank, w.anchor, negs, close, omega);
    close_bound.worst = std::max(close_bound.worst, (obj_la - std::log(static_cast<double>(close.size()))) - obj_la0);

    const double l_nce = loss_la_nce(w.view, w.bank, w.anchor, negs, close, omega);
    const double l_ext = loss_view_set_extended(w.view, w.bank, background, close, omega);
    jensen.worst = std::max(jensen.worst, l_nce - l_ext);

    const std::size_t k = 2 + uniform_index(rng, 30);
    std::vector<double> scores(k);
    for (double& s : scores) s = uniform_real(rng, -20.0, 20.0);
    if (it % 4 == 0) {  // positive far above the negatives: the bound is nearly tight
      scores[0] = 50.0;
    }
    bound.worst = std::max(bound.worst, estimate_infonce(scores) - std::log(static_cast<double>(k)));
  }
  std::vector<CheckResult> out{close_bound, jensen, bound, check_restricted_partition(seed, instances)};
  for (std::size_t i = 0; i < 3; ++i) out[i].passed = out[i].worst <= 1e-12;
  return out;
}

// ---------------------------------------------------------------------------
// permutation invariance, stability, bank recurrence

inline CheckResult check_permutation(std::uint64_t seed, std::size_t trials = 20, double tol = 1e-12) {
  Rng rng(derive_seed(seed, 31));
  CheckResult r{"full-denominator IR total invariant under relabeling", true, 0.0, tol, trials, ""};
  for (std::size_t t = 0; t < trials; ++t) {
    const std::size_t n = 12 + uniform_index(rng, 12);
    const Tensor emb = random_unit_rows(n, 4, rng);
    const Tensor bank = random_unit_rows(n, 4, rng);
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    const PermutationCheck pc = check_permutation_invariance(emb, bank, 0.5, perm);
    r.worst = std::max(r.worst, std::abs(pc.loss_before - pc.loss_after));
  }
  r.passed = r.worst <= tol;
  return r;
}

inline std::vector<CheckResult> check_stability(std::uint64_t seed, std::size_t instances = 100, double tol = 1e-9) {
  Rng rng(derive_seed(seed, 41));
  CheckResult overflow{"witness >= 700: ir-softmax non-finite, ir-nce finite", true, 0.0, 0.0, instances, ""};
  CheckResult offset{"finite ir-softmax - ir-nce == log kappa - log K", true, 0.0, tol, instances, ""};
  for (std::size_t it = 0; it < instances; ++it) {
    const std::size_t k = 2 + uniform_index(rng, 64);
    std::vector<double> big(k), small(k);
    for (double& v : big) v = uniform_real(rng, 700.0, 800.0);
    for (double& v : small) v = uniform_real(rng, -5.0, 5.0);
    const double soft = legacy::ir_softmax_from_scores(big, kImageNetKappa);
    const double nce = ir_nce_from_scores(big);
    // Graph forms: scores enter as 1-d targets against a unit query under a dot witness.
    bool graph_raised = false;
    double graph_nce = std::nan("");
    {
      AnchorTerm term{0, {0}, {}};
      for (std::size_t j = 0; j < k; ++j) term.denominator.push_back(j);
      Witness w = Witness::dot();
      try {
        Graph g;
        legacy::ir_softmax_loss(g, w, g.constant(Tensor::scalar(1.0)), g.constant(Tensor::column(big)), {term},
                                kImageNetKappa);
      } catch (const NonFiniteError&) {
        graph_raised = true;
      }
      Graph g;
      graph_nce = g.value(contrastive_loss(g, w, g.constant(Tensor::scalar(1.0)), g.constant(Tensor::column(big)), {term}))
                      .item();
    }
    if (!std::isfinite(graph_nce) || std::abs(graph_nce - nce) > 1e-9) overflow.worst = 1.0;
    if (std::isfinite(soft) || !std::isfinite(nce) || !graph_raised) overflow.worst = 1.0;
    const double soft_small = legacy::ir_softmax_from_scores(small, kImageNetKappa);
    const double nce_small = ir_nce_from_scores(small);
    const double expect = std::log(kImageNetKappa) - std::log(static_cast<double>(k));
    offset.worst = std::max(offset.worst, std::abs((soft_small - nce_small) - expect));
  }
  overflow.passed = overflow.worst == 0.0;
  offset.passed = offset.worst <= tol;
  return {overflow, offset};
}

/// M after m updates from zero equals (1 - alpha) sum_j alpha^(m - j) g_j.
inline CheckResult check_bank_recurrence(std::uint64_t seed, std::size_t trials = 50, double tol = 1e-12) {
  Rng rng(derive_seed(seed, 51));
  CheckResult r{"memory-bank recurrence closed form", true, 0.0, tol, trials, ""};
  for (std::size_t t = 0; t < trials; ++t) {
    const double alpha = uniform_real(rng, 0.0, 0.99);
    const std::size_t m = 1 + uniform_index(rng, 30);
    MemoryBank bank(3, 4, alpha);
    const Tensor g = random_normal(m, 4, rng);
    for (std::size_t j = 0; j < m; ++j) bank.update(1, g.row_span(j));
    for (std::size_t d = 0; d < 4; ++d) {
      double expect = 0.0;
      for (std::size_t j = 0; j < m; ++j) expect += (1.0 - alpha) * std::pow(alpha, static_cast<double>(m - 1 - j)) * g.at(j, d);
      r.worst = std::max(r.worst, std::abs(bank.row(1)[d] - expect));
    }
  }
  r.passed = r.worst <= tol;
  return r;
}

/// The fast suite behind `cmi check`.
inline std::vector<CheckResult> run_fast_checks(std::uint64_t seed = 0) {
  std::vector<CheckResult> out{check_analytic_mi()};
  for (auto& r : check_equivalences(seed)) out.push_back(std::move(r));
  for (auto& r : check_inequalities(seed)) out.push_back(std::move(r));
  out.push_back(check_permutation(seed));
  for (auto& r : check_gradients(seed)) out.push_back(std::move(r));
  for (auto& r : check_stability(seed)) out.push_back(std::move(r));
  out.push_back(check_bank_recurrence(seed));
  return out;
}

}  // namespace cmi::checks
