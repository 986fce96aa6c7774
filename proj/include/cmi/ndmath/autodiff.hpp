#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "cmi/errors.hpp"
#include "cmi/ndmath/tensor.hpp"

namespace cmi {

/// A trainable leaf: value plus an accumulated gradient of the same shape.
struct Parameter {
  std::string name;
  Tensor value;
  Tensor grad;

  Parameter() = default;
  Parameter(std::string n, Tensor v) : name(std::move(n)), value(std::move(v)), grad(value.shape()) {}

  void zero_grad() {
    if (!grad.same_shape(value)) grad = Tensor(value.shape());
    grad.fill(0.0);
  }
};

class Graph;

/// Handle to a node inside one Graph.
struct Var {
  std::size_t id = static_cast<std::size_t>(-1);
  std::uint64_t graph_tag = 0;
  bool valid() const { return graph_tag != 0; }
};

/// One segment of a flattened score vector, e.g. the denominator set of one anchor.
using Segment = std::vector<std::size_t>;

/// Tape for reverse-mode differentiation over rank-2 tensors.
///
/// Every op computes its value eagerly and appends a node; nodes are therefore
/// in topological order by construction and backward walks them in reverse.
/// A graph is single-use: backward may run once.
class Graph {
 public:
  Graph() : tag_(next_tag()) {}
  Graph(const Graph&) = delete;
  Graph& operator=(const Graph&) = delete;
  Graph(Graph&&) = default;
  Graph& operator=(Graph&&) = default;

  std::size_t node_count() const { return nodes_.size(); }

  const Tensor& value(Var v) const { return node(v).value; }

  /// Gradient of the last backward's loss with respect to `v`.
  const Tensor& grad(Var v) const {
    if (!backward_done_) throw StateError("Graph::grad: backward has not run");
    return node(v).grad;
  }

  Var constant(Tensor t) { return push(std::move(t), "constant", {}, nullptr); }

  Var parameter(Parameter& p) {
    Var v = push(p.value, "parameter", {}, nullptr);
    nodes_[v.id].param = &p;
    return v;
  }

  Var matmul(Var a, Var b) {
    const Tensor& A = value(a);
    const Tensor& B = value(b);
    Tensor out = cmi::matmul(A, B);
    return push(std::move(out), "matmul", {a, b}, [a, b](Graph& g, [[maybe_unused]] const Tensor& y, const Tensor& go) {
      const Tensor& A = g.value(a);
      const Tensor& B = g.value(b);
      const std::size_t n = A.rows(), k = A.cols(), m = B.cols();
      if (!g.is_constant(a)) {
        // dA = dY B^T
        Tensor& ga = g.node(a).grad;
        for (std::size_t i = 0; i < n; ++i) {
          const double* gorow = &go[i * m];
          for (std::size_t p = 0; p < k; ++p) {
            const double* brow = &B[p * m];
            double s = 0.0;
            for (std::size_t j = 0; j < m; ++j) s += gorow[j] * brow[j];
            ga[i * k + p] += s;
          }
        }
      }
      if (!g.is_constant(b)) {
        // dB = A^T dY
        Tensor& gb = g.node(b).grad;
        for (std::size_t i = 0; i < n; ++i) {
          const double* gorow = &go[i * m];
          for (std::size_t p = 0; p < k; ++p) {
            const double av = A[i * k + p];
            if (av == 0.0) continue;
            double* gbrow = &gb[p * m];
            for (std::size_t j = 0; j < m; ++j) gbrow[j] += av * gorow[j];
          }
        }
      }
    });
  }

  /// Adds a 1 x m bias row to every row of an n x m matrix.
  Var add_bias(Var a, Var bias) {
    const Tensor& A = value(a);
    const Tensor& b = value(bias);
    if (b.rows() != 1 || b.cols() != A.cols()) {
      throw std::domain_error("add_bias: bias " + b.shape_string() + " vs input " + A.shape_string());
    }
    Tensor out = A;
    const std::size_t m = A.cols();
    for (std::size_t i = 0; i < A.rows(); ++i)
      for (std::size_t j = 0; j < m; ++j) out[i * m + j] += b[j];
    return push(std::move(out), "add_bias", {a, bias}, [a, bias](Graph& g, [[maybe_unused]] const Tensor& y, const Tensor& go) {
      Tensor& ga = g.node(a).grad;
      Tensor& gb = g.node(bias).grad;
      const std::size_t m = gb.cols();
      for (std::size_t i = 0; i < go.size(); ++i) {
        ga[i] += go[i];
        gb[i % m] += go[i];
      }
    });
  }

  Var add(Var a, Var b) { return elementwise2(a, b, 1.0, "add"); }
  Var sub(Var a, Var b) { return elementwise2(a, b, -1.0, "sub"); }

  Var scale(Var a, double s) {
    Tensor out = value(a);
    for (double& v : out.storage()) v *= s;
    return push(std::move(out), "scale", {a}, [a, s](Graph& g, [[maybe_unused]] const Tensor& y, const Tensor& go) {
      Tensor& ga = g.node(a).grad;
      for (std::size_t i = 0; i < go.size(); ++i) ga[i] += s * go[i];
    });
  }

  Var add_scalar(Var a, double s) {
    Tensor out = value(a);
    for (double& v : out.storage()) v += s;
    return push(std::move(out), "add_scalar", {a}, [a](Graph& g, [[maybe_unused]] const Tensor& y, const Tensor& go) {
      Tensor& ga = g.node(a).grad;
      for (std::size_t i = 0; i < go.size(); ++i) ga[i] += go[i];
    });
  }

  Var relu(Var a) {
    Tensor out = value(a);
    for (double& v : out.storage()) v = v > 0.0 ? v : 0.0;
    return push(std::move(out), "relu", {a}, [a](Graph& g, [[maybe_unused]] const Tensor& y, const Tensor& go) {
      const Tensor& A = g.value(a);
      Tensor& ga = g.node(a).grad;
      for (std::size_t i = 0; i < go.size(); ++i)
        if (A[i] > 0.0) ga[i] += go[i];
    });
  }

  Var exp(Var a) {
    Tensor out = value(a);
    for (double& v : out.storage()) v = std::exp(v);
    return push(std::move(out), "exp", {a}, [a](Graph& g, [[maybe_unused]] const Tensor& y, const Tensor& go) {
      Tensor& ga = g.node(a).grad;
      for (std::size_t i = 0; i < go.size(); ++i) ga[i] += go[i] * y[i];
    });
  }

  Var log(Var a) {
    Tensor out = value(a);
    for (double& v : out.storage()) v = std::log(v);
    return push(std::move(out), "log", {a}, [a](Graph& g, [[maybe_unused]] const Tensor& y, const Tensor& go) {
      const Tensor& A = g.value(a);
      Tensor& ga = g.node(a).grad;
      for (std::size_t i = 0; i < go.size(); ++i) ga[i] += go[i] / A[i];
    });
  }

  /// Projects each row onto the unit sphere.
  Var l2_normalize_rows(Var a) {
    const Tensor& A = value(a);
    const std::size_t n = A.rows(), d = A.cols();
    Tensor out = A;
    std::vector<double> norms(n);
    for (std::size_t i = 0; i < n; ++i) {
      double s = 0.0;
      for (std::size_t j = 0; j < d; ++j) s += A[i * d + j] * A[i * d + j];
      const double r = std::sqrt(s);
      if (!(r > 0.0)) throw NonFiniteError("l2_normalize_rows: zero-norm row " + std::to_string(i));
      norms[i] = r;
      for (std::size_t j = 0; j < d; ++j) out[i * d + j] /= r;
    }
    return push(std::move(out), "l2_normalize_rows", {a},
                [a, norms = std::move(norms)](Graph& g, [[maybe_unused]] const Tensor& y, const Tensor& go) {
                  Tensor& ga = g.node(a).grad;
                  const std::size_t d = y.cols();
                  for (std::size_t i = 0; i < y.rows(); ++i) {
                    double yg = 0.0;
                    for (std::size_t j = 0; j < d; ++j) yg += y[i * d + j] * go[i * d + j];
                    for (std::size_t j = 0; j < d; ++j)
                      ga[i * d + j] += (go[i * d + j] - y[i * d + j] * yg) / norms[i];
                  }
                });
  }

  Var gather_rows(Var a, std::vector<std::size_t> idx) {
    const Tensor& A = value(a);
    const std::size_t d = A.cols();
    Tensor out = Tensor::zeros(idx.size(), d);
    for (std::size_t r = 0; r < idx.size(); ++r) {
      if (idx[r] >= A.rows()) throw std::out_of_range("gather_rows: row index out of range");
      std::copy_n(A.data().data() + idx[r] * d, d, out.data().data() + r * d);
    }
    return push(std::move(out), "gather_rows", {a}, [a, idx = std::move(idx)](Graph& g, [[maybe_unused]] const Tensor& y, const Tensor& go) {
      Tensor& ga = g.node(a).grad;
      const std::size_t d = ga.cols();
      for (std::size_t r = 0; r < idx.size(); ++r)
        for (std::size_t j = 0; j < d; ++j) ga[idx[r] * d + j] += go[r * d + j];
    });
  }

  Var concat_cols(Var a, Var b) {
    const Tensor& A = value(a);
    const Tensor& B = value(b);
    if (A.rows() != B.rows()) throw std::domain_error("concat_cols: row count mismatch");
    const std::size_t n = A.rows(), da = A.cols(), db = B.cols();
    Tensor out = Tensor::zeros(n, da + db);
    for (std::size_t i = 0; i < n; ++i) {
      std::copy_n(A.data().data() + i * da, da, out.data().data() + i * (da + db));
      std::copy_n(B.data().data() + i * db, db, out.data().data() + i * (da + db) + da);
    }
    return push(std::move(out), "concat_cols", {a, b}, [a, b](Graph& g, [[maybe_unused]] const Tensor& y, const Tensor& go) {
      Tensor& ga = g.node(a).grad;
      Tensor& gb = g.node(b).grad;
      const std::size_t da = ga.cols(), db = gb.cols();
      for (std::size_t i = 0; i < ga.rows(); ++i) {
        for (std::size_t j = 0; j < da; ++j) ga[i * da + j] += go[i * (da + db) + j];
        for (std::size_t j = 0; j < db; ++j) gb[i * db + j] += go[i * (da + db) + da + j];
      }
    });
  }

  /// Scores for explicit (row of a, row of b) pairs: out[p] = a[ia[p]] . b[ib[p]].
  Var pair_dot(Var a, Var b, std::vector<std::size_t> ia, std::vector<std::size_t> ib) {
    const Tensor& A = value(a);
    const Tensor& B = value(b);
    if (A.cols() != B.cols()) throw std::domain_error("pair_dot: embedding dimension mismatch");
    if (ia.size() != ib.size()) throw std::domain_error("pair_dot: pair list length mismatch");
    Tensor out = Tensor::zeros(ia.size(), 1);
    for (std::size_t p = 0; p < ia.size(); ++p) {
      if (ia[p] >= A.rows() || ib[p] >= B.rows()) throw std::out_of_range("pair_dot: row index out of range");
      out[p] = dot(A.row_span(ia[p]), B.row_span(ib[p]));
    }
    return push(std::move(out), "pair_dot", {a, b},
                [a, b, ia = std::move(ia), ib = std::move(ib)](Graph& g, [[maybe_unused]] const Tensor& y, const Tensor& go) {
                  const Tensor& A = g.value(a);
                  const Tensor& B = g.value(b);
                  Tensor& ga = g.node(a).grad;
                  Tensor& gb = g.node(b).grad;
                  const std::size_t d = A.cols();
                  const bool a_const = g.is_constant(a);
                  const bool b_const = g.is_constant(b);
                  for (std::size_t p = 0; p < ia.size(); ++p) {
                    const double s = go[p];
                    if (s == 0.0) continue;
                    const std::size_t ra = ia[p] * d, rb = ib[p] * d;
                    if (!a_const)
                      for (std::size_t j = 0; j < d; ++j) ga[ra + j] += s * B[rb + j];
                    if (!b_const)
                      for (std::size_t j = 0; j < d; ++j) gb[rb + j] += s * A[ra + j];
                  }
                });
  }

  /// logsumexp over each segment of a column vector; output is S x 1.
  Var segment_logsumexp(Var v, std::vector<Segment> segments) {
    const Tensor& V = value(v);
    Tensor out = Tensor::zeros(segments.size(), 1);
    for (std::size_t s = 0; s < segments.size(); ++s) {
      if (segments[s].empty()) throw std::domain_error("segment_logsumexp: empty segment");
      double m = V[segments[s][0]];
      for (std::size_t i : segments[s]) m = std::max(m, V[i]);
      double acc = 0.0;
      for (std::size_t i : segments[s]) acc += std::exp(V[i] - m);
      out[s] = m + std::log(acc);
    }
    return push(std::move(out), "segment_logsumexp", {v},
                [v, segments = std::move(segments)](Graph& g, [[maybe_unused]] const Tensor& y, const Tensor& go) {
                  const Tensor& V = g.value(v);
                  Tensor& gv = g.node(v).grad;
                  for (std::size_t s = 0; s < segments.size(); ++s)
                    for (std::size_t i : segments[s]) gv[i] += go[s] * std::exp(V[i] - y[s]);
                });
  }

  /// Plain sum over each segment; output is S x 1.
  Var segment_sum(Var v, std::vector<Segment> segments) {
    const Tensor& V = value(v);
    Tensor out = Tensor::zeros(segments.size(), 1);
    for (std::size_t s = 0; s < segments.size(); ++s)
      for (std::size_t i : segments[s]) out[s] += V[i];
    return push(std::move(out), "segment_sum", {v}, [v, segments = std::move(segments)](Graph& g, [[maybe_unused]] const Tensor& y, const Tensor& go) {
      Tensor& gv = g.node(v).grad;
      for (std::size_t s = 0; s < segments.size(); ++s)
        for (std::size_t i : segments[s]) gv[i] += go[s];
    });
  }

  Var sum(Var a) {
    double s = 0.0;
    for (double v : value(a).data()) s += v;
    return push(Tensor::scalar(s), "sum", {a}, [a](Graph& g, [[maybe_unused]] const Tensor& y, const Tensor& go) {
      Tensor& ga = g.node(a).grad;
      for (double& v : ga.storage()) v += go[0];
    });
  }

  Var mean(Var a) {
    const double n = static_cast<double>(value(a).size());
    return scale(sum(a), 1.0 / n);
  }

  /// Reverse sweep from a scalar node. Accumulates into every parameter's grad.
  void backward(Var loss, double output_grad = 1.0) {
    if (!loss.valid() || nodes_.empty()) throw StateError("Graph::backward: nothing has been recorded");
    if (loss.graph_tag != tag_) throw StateError("Graph::backward: variable belongs to another graph");
    if (backward_done_) throw StateError("Graph::backward: already called on this graph");
    if (value(loss).size() != 1) throw std::domain_error("Graph::backward: loss must be a scalar");
    for (Node& n : nodes_) n.grad = Tensor(n.value.shape());
    nodes_[loss.id].grad[0] = output_grad;
    for (std::size_t k = loss.id + 1; k-- > 0;) {
      Node& n = nodes_[k];
      if (n.backward && !n.is_constant) n.backward(*this, n.value, n.grad);
      if (n.param != nullptr) {
        Tensor& pg = n.param->grad;
        if (!pg.same_shape(n.value)) pg = Tensor(n.value.shape());
        for (std::size_t i = 0; i < pg.size(); ++i) pg[i] += n.grad[i];
      }
    }
    backward_done_ = true;
  }

 private:
  struct Node {
    Tensor value;
    Tensor grad;
    std::function<void(Graph&, const Tensor&, const Tensor&)> backward;
    Parameter* param = nullptr;
    bool is_constant = false;
    const char* op = "";
  };

  static std::uint64_t next_tag() {
    static std::uint64_t counter = 0;
    return ++counter;
  }

  Node& node(Var v) {
    check(v);
    return nodes_[v.id];
  }
  const Node& node(Var v) const {
    check(v);
    return nodes_[v.id];
  }
  void check(Var v) const {
    if (v.graph_tag != tag_ || v.id >= nodes_.size()) throw StateError("Graph: variable does not belong to this graph");
  }
  bool is_constant(Var v) const { return nodes_[v.id].is_constant; }

  Var elementwise2(Var a, Var b, double sign, const char* op) {
    const Tensor& A = value(a);
    const Tensor& B = value(b);
    if (!A.same_shape(B)) throw std::domain_error(std::string(op) + ": shape mismatch " + A.shape_string() + " vs " + B.shape_string());
    Tensor out = A;
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += sign * B[i];
    return push(std::move(out), op, {a, b}, [a, b, sign](Graph& g, [[maybe_unused]] const Tensor& y, const Tensor& go) {
      Tensor& ga = g.node(a).grad;
      Tensor& gb = g.node(b).grad;
      for (std::size_t i = 0; i < go.size(); ++i) {
        ga[i] += go[i];
        gb[i] += sign * go[i];
      }
    });
  }

  Var push(Tensor value, const char* op, std::initializer_list<Var> inputs,
           std::function<void(Graph&, const Tensor&, const Tensor&)> backward) {
    if (backward_done_) throw StateError(std::string("Graph: cannot record '") + op + "' after backward");
    for (Var in : inputs) check(in);
    value.require_finite(op);
    Node n;
    n.value = std::move(value);
    n.backward = std::move(backward);
    n.op = op;
    // A node is constant when it has no inputs and is not a parameter; such
    // nodes never need gradients, which lets pair_dot skip the bank side.
    bool all_const = true;
    for (Var in : inputs) all_const = all_const && nodes_[in.id].is_constant;
    n.is_constant = (inputs.size() == 0 && std::string_view(op) == "constant") || (inputs.size() > 0 && all_const);
    nodes_.push_back(std::move(n));
    return Var{nodes_.size() - 1, tag_};
  }

  std::vector<Node> nodes_;
  std::uint64_t tag_;
  bool backward_done_ = false;
};

}  // namespace cmi
