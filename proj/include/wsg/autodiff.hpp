#pragma once

#include <algorithm>
#include <cassert>
#include <cmath>
#include <cstdint>
#include <deque>
#include <functional>
#include <memory>
#include <string>
#include <utility>
#include <vector>

namespace wsg::ad {

// Dense row-major matrix of doubles. Everything in the network is small
// enough that plain loops beat the overhead of a linear algebra library.
struct Mat {
  int rows = 0, cols = 0;
  std::vector<double> a;

  Mat() = default;
  Mat(int r, int c) : rows(r), cols(c), a(size_t(r) * size_t(c), 0.0) {}

  static Mat full(int r, int c, double v) {
    Mat m(r, c);
    std::fill(m.a.begin(), m.a.end(), v);
    return m;
  }
  static Mat row(std::vector<double> v) {
    Mat m;
    m.rows = 1;
    m.cols = int(v.size());
    m.a = std::move(v);
    return m;
  }

  double& at(int r, int c) { return a[size_t(r) * cols + c]; }
  double at(int r, int c) const { return a[size_t(r) * cols + c]; }
  size_t size() const { return a.size(); }
  bool same_shape(const Mat& o) const { return rows == o.rows && cols == o.cols; }
};

// Learnable tensor with gradient accumulator and SGD momentum buffer.
struct Parameter {
  std::string name;
  Mat value;
  Mat grad;
  Mat velocity;

  Parameter(std::string n, int rows, int cols)
      : name(std::move(n)), value(rows, cols), grad(rows, cols), velocity(rows, cols) {}
};

// Owns all parameters of a model in creation order. Creation order is
// part of the determinism contract: initialization draws from one rng
// stream, and checkpoints serialize in this order.
class ParameterStore {
 public:
  Parameter& add(const std::string& name, int rows, int cols) {
    items_.push_back(std::make_unique<Parameter>(name, rows, cols));
    return *items_.back();
  }
  Parameter* find(const std::string& name) {
    for (auto& p : items_)
      if (p->name == name) return p.get();
    return nullptr;
  }
  const std::vector<std::unique_ptr<Parameter>>& items() const { return items_; }
  std::vector<std::unique_ptr<Parameter>>& items() { return items_; }

  void zero_grads() {
    for (auto& p : items_) std::fill(p->grad.a.begin(), p->grad.a.end(), 0.0);
  }
  size_t scalar_count() const {
    size_t n = 0;
    for (auto& p : items_) n += p->value.size();
    return n;
  }

 private:
  std::vector<std::unique_ptr<Parameter>> items_;
};

using NodeId = int32_t;

// Reverse-mode tape. A graph is built per forward pass (define-by-run)
// and discarded afterwards; backward walks the tape in reverse creation
// order, which is a valid topological order by construction.
class Graph {
 public:
  NodeId constant(Mat m) { return push(std::move(m), false); }
  NodeId scalar(double v) { return constant(Mat::full(1, 1, v)); }

  // Leaf bound to a Parameter; cached so that repeated lookups of the
  // same parameter inside one graph share a node.
  NodeId param(Parameter& p) {
    for (auto& [ptr, id] : param_cache_)
      if (ptr == &p) return id;
    NodeId id = push(p.value, true);
    nodes_[id].bound_param = &p;
    param_cache_.emplace_back(&p, id);
    return id;
  }

  // References stay valid for the graph's lifetime even as more nodes
  // are appended (the tape is a deque).
  const Mat& value(NodeId id) const { return nodes_[id].val; }
  const Mat& grad(NodeId id) const { return nodes_[id].grad; }
  size_t node_count() const { return nodes_.size(); }

  // ---- shape ops ----

  NodeId reshape(NodeId x, int rows, int cols) {
    const Mat& xv = val(x);
    assert(size_t(rows) * size_t(cols) == xv.size());
    Mat out = xv;
    out.rows = rows;
    out.cols = cols;
    NodeId id = push(std::move(out), needs(x));
    if (needs(x)) set_back(id, [this, id, x] {
      const Mat& g = nodes_[id].grad;
      Mat& gx = grad_buf(x);
      for (size_t i = 0; i < g.size(); ++i) gx.a[i] += g.a[i];
    });
    return id;
  }

  NodeId transpose(NodeId x) {
    const Mat& xv = val(x);
    Mat out(xv.cols, xv.rows);
    for (int r = 0; r < xv.rows; ++r)
      for (int c = 0; c < xv.cols; ++c) out.at(c, r) = xv.at(r, c);
    NodeId id = push(std::move(out), needs(x));
    if (needs(x)) set_back(id, [this, id, x] {
      const Mat& g = nodes_[id].grad;
      Mat& gx = grad_buf(x);
      for (int r = 0; r < g.rows; ++r)
        for (int c = 0; c < g.cols; ++c) gx.at(c, r) += g.at(r, c);
    });
    return id;
  }

  NodeId concat_cols(const std::vector<NodeId>& xs) {
    assert(!xs.empty());
    int rows = val(xs[0]).rows, cols = 0;
    bool ng = false;
    for (NodeId x : xs) {
      assert(val(x).rows == rows);
      cols += val(x).cols;
      ng = ng || needs(x);
    }
    Mat out(rows, cols);
    int off = 0;
    for (NodeId x : xs) {
      const Mat& m = val(x);
      for (int r = 0; r < rows; ++r)
        for (int c = 0; c < m.cols; ++c) out.at(r, off + c) = m.at(r, c);
      off += m.cols;
    }
    NodeId id = push(std::move(out), ng);
    if (ng) {
      std::vector<NodeId> inputs = xs;
      set_back(id, [this, id, inputs] {
        const Mat& g = nodes_[id].grad;
        int off2 = 0;
        for (NodeId x : inputs) {
          const Mat& m = val(x);
          if (needs(x)) {
            Mat& gx = grad_buf(x);
            for (int r = 0; r < g.rows; ++r)
              for (int c = 0; c < m.cols; ++c) gx.at(r, c) += g.at(r, off2 + c);
          }
          off2 += m.cols;
        }
      });
    }
    return id;
  }

  NodeId concat_rows(const std::vector<NodeId>& xs) {
    assert(!xs.empty());
    int cols = val(xs[0]).cols, rows = 0;
    bool ng = false;
    for (NodeId x : xs) {
      assert(val(x).cols == cols);
      rows += val(x).rows;
      ng = ng || needs(x);
    }
    Mat out(rows, cols);
    int off = 0;
    for (NodeId x : xs) {
      const Mat& m = val(x);
      for (int r = 0; r < m.rows; ++r)
        for (int c = 0; c < cols; ++c) out.at(off + r, c) = m.at(r, c);
      off += m.rows;
    }
    NodeId id = push(std::move(out), ng);
    if (ng) {
      std::vector<NodeId> inputs = xs;
      set_back(id, [this, id, inputs] {
        const Mat& g = nodes_[id].grad;
        int off2 = 0;
        for (NodeId x : inputs) {
          const Mat& m = val(x);
          if (needs(x)) {
            Mat& gx = grad_buf(x);
            for (int r = 0; r < m.rows; ++r)
              for (int c = 0; c < g.cols; ++c) gx.at(r, c) += g.at(off2 + r, c);
          }
          off2 += m.rows;
        }
      });
    }
    return id;
  }

  // Row gather; an index may repeat (gradient accumulates).
  NodeId gather_rows(NodeId x, std::vector<int> idx) {
    const Mat& xv = val(x);
    Mat out(int(idx.size()), xv.cols);
    for (size_t r = 0; r < idx.size(); ++r)
      for (int c = 0; c < xv.cols; ++c) out.at(int(r), c) = xv.at(idx[r], c);
    NodeId id = push(std::move(out), needs(x));
    if (needs(x)) set_back(id, [this, id, x, idx = std::move(idx)] {
      const Mat& g = nodes_[id].grad;
      Mat& gx = grad_buf(x);
      for (size_t r = 0; r < idx.size(); ++r)
        for (int c = 0; c < g.cols; ++c) gx.at(idx[r], c) += g.at(int(r), c);
    });
    return id;
  }

  // Arbitrary element gather reshaped to (out_rows, out_cols).
  NodeId gather_elems(NodeId x, std::vector<std::pair<int, int>> rc, int out_rows, int out_cols) {
    assert(rc.size() == size_t(out_rows) * size_t(out_cols));
    const Mat& xv = val(x);
    Mat out(out_rows, out_cols);
    for (size_t i = 0; i < rc.size(); ++i) out.a[i] = xv.at(rc[i].first, rc[i].second);
    NodeId id = push(std::move(out), needs(x));
    if (needs(x)) set_back(id, [this, id, x, rc = std::move(rc)] {
      const Mat& g = nodes_[id].grad;
      Mat& gx = grad_buf(x);
      for (size_t i = 0; i < rc.size(); ++i) gx.at(rc[i].first, rc[i].second) += g.a[i];
    });
    return id;
  }

  // ---- arithmetic ----

  NodeId add(NodeId a, NodeId b) { return binary(a, b, 1.0, 1.0); }
  NodeId sub(NodeId a, NodeId b) { return binary(a, b, 1.0, -1.0); }

  NodeId mul(NodeId a, NodeId b) {  // elementwise
    const Mat& av = val(a);
    const Mat& bv = val(b);
    assert(av.same_shape(bv));
    Mat out(av.rows, av.cols);
    for (size_t i = 0; i < out.size(); ++i) out.a[i] = av.a[i] * bv.a[i];
    bool ng = needs(a) || needs(b);
    NodeId id = push(std::move(out), ng);
    if (ng) set_back(id, [this, id, a, b] {
      const Mat& g = nodes_[id].grad;
      if (needs(a)) {
        Mat& ga = grad_buf(a);
        const Mat& bv2 = val(b);
        for (size_t i = 0; i < g.size(); ++i) ga.a[i] += g.a[i] * bv2.a[i];
      }
      if (needs(b)) {
        Mat& gb = grad_buf(b);
        const Mat& av2 = val(a);
        for (size_t i = 0; i < g.size(); ++i) gb.a[i] += g.a[i] * av2.a[i];
      }
    });
    return id;
  }

  NodeId matmul(NodeId a, NodeId b) {
    const Mat& av = val(a);
    const Mat& bv = val(b);
    assert(av.cols == bv.rows);
    Mat out(av.rows, bv.cols);
    for (int r = 0; r < av.rows; ++r)
      for (int k = 0; k < av.cols; ++k) {
        double arv = av.at(r, k);
        if (arv == 0.0) continue;
        for (int c = 0; c < bv.cols; ++c) out.at(r, c) += arv * bv.at(k, c);
      }
    bool ng = needs(a) || needs(b);
    NodeId id = push(std::move(out), ng);
    if (ng) set_back(id, [this, id, a, b] {
      const Mat& g = nodes_[id].grad;
      const Mat& av2 = val(a);
      const Mat& bv2 = val(b);
      if (needs(a)) {  // dA = G * B^T
        Mat& ga = grad_buf(a);
        for (int r = 0; r < g.rows; ++r)
          for (int k = 0; k < bv2.rows; ++k) {
            double s = 0.0;
            for (int c = 0; c < g.cols; ++c) s += g.at(r, c) * bv2.at(k, c);
            ga.at(r, k) += s;
          }
      }
      if (needs(b)) {  // dB = A^T * G
        Mat& gb = grad_buf(b);
        for (int k = 0; k < av2.cols; ++k)
          for (int r = 0; r < av2.rows; ++r) {
            double arv = av2.at(r, k);
            if (arv == 0.0) continue;
            for (int c = 0; c < g.cols; ++c) gb.at(k, c) += arv * g.at(r, c);
          }
      }
    });
    return id;
  }

  // x + v with v a 1xC row broadcast over the rows of x.
  NodeId add_rowvec(NodeId x, NodeId v) {
    const Mat& xv = val(x);
    const Mat& vv = val(v);
    assert(vv.rows == 1 && vv.cols == xv.cols);
    Mat out(xv.rows, xv.cols);
    for (int r = 0; r < xv.rows; ++r)
      for (int c = 0; c < xv.cols; ++c) out.at(r, c) = xv.at(r, c) + vv.at(0, c);
    bool ng = needs(x) || needs(v);
    NodeId id = push(std::move(out), ng);
    if (ng) set_back(id, [this, id, x, v] {
      const Mat& g = nodes_[id].grad;
      if (needs(x)) {
        Mat& gx = grad_buf(x);
        for (size_t i = 0; i < g.size(); ++i) gx.a[i] += g.a[i];
      }
      if (needs(v)) {
        Mat& gv = grad_buf(v);
        for (int r = 0; r < g.rows; ++r)
          for (int c = 0; c < g.cols; ++c) gv.at(0, c) += g.at(r, c);
      }
    });
    return id;
  }

  // k*x + c elementwise with literal coefficients.
  NodeId affine(NodeId x, double k, double c) {
    const Mat& xv = val(x);
    Mat out(xv.rows, xv.cols);
    for (size_t i = 0; i < out.size(); ++i) out.a[i] = k * xv.a[i] + c;
    NodeId id = push(std::move(out), needs(x));
    if (needs(x)) set_back(id, [this, id, x, k] {
      const Mat& g = nodes_[id].grad;
      Mat& gx = grad_buf(x);
      for (size_t i = 0; i < g.size(); ++i) gx.a[i] += k * g.a[i];
    });
    return id;
  }

  NodeId sigmoid(NodeId x) {
    const Mat& xv = val(x);
    Mat out(xv.rows, xv.cols);
    for (size_t i = 0; i < out.size(); ++i) {
      double v = xv.a[i];
      out.a[i] = v >= 0.0 ? 1.0 / (1.0 + std::exp(-v)) : std::exp(v) / (1.0 + std::exp(v));
    }
    NodeId id = push(std::move(out), needs(x));
    if (needs(x)) set_back(id, [this, id, x] {
      const Mat& g = nodes_[id].grad;
      const Mat& y = nodes_[id].val;
      Mat& gx = grad_buf(x);
      for (size_t i = 0; i < g.size(); ++i) gx.a[i] += g.a[i] * y.a[i] * (1.0 - y.a[i]);
    });
    return id;
  }

  NodeId tanh_(NodeId x) {
    const Mat& xv = val(x);
    Mat out(xv.rows, xv.cols);
    for (size_t i = 0; i < out.size(); ++i) out.a[i] = std::tanh(xv.a[i]);
    NodeId id = push(std::move(out), needs(x));
    if (needs(x)) set_back(id, [this, id, x] {
      const Mat& g = nodes_[id].grad;
      const Mat& y = nodes_[id].val;
      Mat& gx = grad_buf(x);
      for (size_t i = 0; i < g.size(); ++i) gx.a[i] += g.a[i] * (1.0 - y.a[i] * y.a[i]);
    });
    return id;
  }

  NodeId softmax_rows(NodeId x) {
    const Mat& xv = val(x);
    Mat out(xv.rows, xv.cols);
    for (int r = 0; r < xv.rows; ++r) {
      double mx = xv.at(r, 0);
      for (int c = 1; c < xv.cols; ++c) mx = std::max(mx, xv.at(r, c));
      double z = 0.0;
      for (int c = 0; c < xv.cols; ++c) z += std::exp(xv.at(r, c) - mx);
      for (int c = 0; c < xv.cols; ++c) out.at(r, c) = std::exp(xv.at(r, c) - mx) / z;
    }
    NodeId id = push(std::move(out), needs(x));
    if (needs(x)) set_back(id, [this, id, x] {
      const Mat& g = nodes_[id].grad;
      const Mat& y = nodes_[id].val;
      Mat& gx = grad_buf(x);
      for (int r = 0; r < g.rows; ++r) {
        double dot = 0.0;
        for (int c = 0; c < g.cols; ++c) dot += g.at(r, c) * y.at(r, c);
        for (int c = 0; c < g.cols; ++c) gx.at(r, c) += y.at(r, c) * (g.at(r, c) - dot);
      }
    });
    return id;
  }

  NodeId log_softmax_rows(NodeId x) {
    const Mat& xv = val(x);
    Mat out(xv.rows, xv.cols);
    for (int r = 0; r < xv.rows; ++r) {
      double mx = xv.at(r, 0);
      for (int c = 1; c < xv.cols; ++c) mx = std::max(mx, xv.at(r, c));
      double z = 0.0;
      for (int c = 0; c < xv.cols; ++c) z += std::exp(xv.at(r, c) - mx);
      double lse = mx + std::log(z);
      for (int c = 0; c < xv.cols; ++c) out.at(r, c) = xv.at(r, c) - lse;
    }
    NodeId id = push(std::move(out), needs(x));
    if (needs(x)) set_back(id, [this, id, x] {
      const Mat& g = nodes_[id].grad;
      const Mat& y = nodes_[id].val;  // log probs
      Mat& gx = grad_buf(x);
      for (int r = 0; r < g.rows; ++r) {
        double gsum = 0.0;
        for (int c = 0; c < g.cols; ++c) gsum += g.at(r, c);
        for (int c = 0; c < g.cols; ++c) gx.at(r, c) += g.at(r, c) - std::exp(y.at(r, c)) * gsum;
      }
    });
    return id;
  }

  // Row-wise x / max(||x||, derived from eps). eps keeps the zero vector
  // finite; see the cosine users for why that matters at init.
  NodeId l2_normalize_rows(NodeId x, double eps = 1e-12) {
    const Mat& xv = val(x);
    Mat out(xv.rows, xv.cols);
    std::vector<double> inv_norms(xv.rows);
    for (int r = 0; r < xv.rows; ++r) {
      double s = eps;
      for (int c = 0; c < xv.cols; ++c) s += xv.at(r, c) * xv.at(r, c);
      double n = std::sqrt(s);
      inv_norms[r] = 1.0 / n;
      for (int c = 0; c < xv.cols; ++c) out.at(r, c) = xv.at(r, c) * inv_norms[r];
    }
    NodeId id = push(std::move(out), needs(x));
    if (needs(x)) set_back(id, [this, id, x, inv_norms = std::move(inv_norms)] {
      const Mat& g = nodes_[id].grad;
      const Mat& y = nodes_[id].val;
      Mat& gx = grad_buf(x);
      for (int r = 0; r < g.rows; ++r) {
        double dot = 0.0;
        for (int c = 0; c < g.cols; ++c) dot += g.at(r, c) * y.at(r, c);
        for (int c = 0; c < g.cols; ++c)
          gx.at(r, c) += inv_norms[r] * (g.at(r, c) - y.at(r, c) * dot);
      }
    });
    return id;
  }

  NodeId sum_all(NodeId x) { return reduce(x, 1.0); }
  NodeId mean_all(NodeId x) { return reduce(x, 1.0 / double(val(x).size())); }

  // 1xC row holding the column means.
  NodeId mean_rows(NodeId x) {
    const Mat& xv = val(x);
    double inv = 1.0 / double(xv.rows);
    Mat out(1, xv.cols);
    for (int r = 0; r < xv.rows; ++r)
      for (int c = 0; c < xv.cols; ++c) out.at(0, c) += xv.at(r, c) * inv;
    NodeId id = push(std::move(out), needs(x));
    if (needs(x)) set_back(id, [this, id, x, inv] {
      const Mat& g = nodes_[id].grad;
      Mat& gx = grad_buf(x);
      for (int r = 0; r < gx.rows; ++r)
        for (int c = 0; c < gx.cols; ++c) gx.at(r, c) += g.at(0, c) * inv;
    });
    return id;
  }

  // Masked mean smooth-L1 between pred and a constant target. mask is
  // 0/1 per element; the value is the mean over mask-selected elements
  // (0 when the mask is empty). Transition point 1: quadratic inside,
  // |x| - 0.5 outside. The target is a plain Mat on purpose - no
  // gradient can flow into it.
  NodeId smooth_l1(NodeId pred, const Mat& target, const Mat& mask) {
    const Mat& pv = val(pred);
    assert(pv.same_shape(target) && pv.same_shape(mask));
    double count = 0.0;
    for (size_t i = 0; i < mask.size(); ++i) count += mask.a[i];
    double inv = count > 0.0 ? 1.0 / count : 0.0;
    double total = 0.0;
    for (size_t i = 0; i < pv.size(); ++i) {
      if (mask.a[i] == 0.0) continue;
      double r = pv.a[i] - target.a[i];
      total += std::abs(r) < 1.0 ? 0.5 * r * r : std::abs(r) - 0.5;
    }
    Mat out = Mat::full(1, 1, total * inv);
    NodeId id = push(std::move(out), needs(pred));
    if (needs(pred)) set_back(id, [this, id, pred, target, mask, inv] {
      double g = nodes_[id].grad.a[0];
      const Mat& pv2 = val(pred);
      Mat& gp = grad_buf(pred);
      for (size_t i = 0; i < pv2.size(); ++i) {
        if (mask.a[i] == 0.0) continue;
        double r = pv2.a[i] - target.a[i];
        double d = std::abs(r) < 1.0 ? r : (r > 0.0 ? 1.0 : -1.0);
        gp.a[i] += g * inv * d;
      }
    });
    return id;
  }

  // Mean over rows of -x[row][pick[row]]; with x = log_softmax this is
  // the sequence/classification negative log likelihood.
  NodeId pick_negmean(NodeId x, const std::vector<int>& picks) {
    const Mat& xv = val(x);
    assert(int(picks.size()) == xv.rows);
    double inv = 1.0 / double(xv.rows);
    double total = 0.0;
    for (int r = 0; r < xv.rows; ++r) total -= xv.at(r, picks[r]);
    NodeId id = push(Mat::full(1, 1, total * inv), needs(x));
    if (needs(x)) set_back(id, [this, id, x, picks, inv] {
      double g = nodes_[id].grad.a[0];
      Mat& gx = grad_buf(x);
      for (int r = 0; r < gx.rows; ++r) gx.at(r, picks[r]) -= g * inv;
    });
    return id;
  }

  // Elementwise max(0, x). Subgradient 0 at the kink.
  NodeId relu(NodeId x) {
    const Mat& xv = val(x);
    Mat out(xv.rows, xv.cols);
    for (size_t i = 0; i < out.size(); ++i) out.a[i] = xv.a[i] > 0.0 ? xv.a[i] : 0.0;
    NodeId id = push(std::move(out), needs(x));
    if (needs(x)) set_back(id, [this, id, x] {
      const Mat& g = nodes_[id].grad;
      const Mat& xv2 = val(x);
      Mat& gx = grad_buf(x);
      for (size_t i = 0; i < g.size(); ++i)
        if (xv2.a[i] > 0.0) gx.a[i] += g.a[i];
    });
    return id;
  }

  // ---- backward ----

  // Seeds d(root)/d(root) = 1 and walks the tape backwards. Gradients
  // of parameter leaves are accumulated into their Parameter::grad, so
  // zero_grads() must be called between optimizer steps.
  void backward(NodeId root) {
    assert(val(root).rows == 1 && val(root).cols == 1);
    grad_buf(root).a[0] = 1.0;
    for (NodeId id = root; id >= 0; --id) {
      Node& n = nodes_[id];
      if (!n.has_grad) continue;
      if (n.back) n.back();
      if (n.bound_param) {
        Mat& pg = n.bound_param->grad;
        for (size_t i = 0; i < pg.size(); ++i) pg.a[i] += n.grad.a[i];
      }
    }
  }

 private:
  struct Node {
    Mat val;
    Mat grad;                 // allocated lazily on first accumulation
    bool needs_grad = false;
    bool has_grad = false;
    Parameter* bound_param = nullptr;
    std::function<void()> back;
  };

  const Mat& val(NodeId id) const { return nodes_[id].val; }
  bool needs(NodeId id) const { return nodes_[id].needs_grad; }

  Mat& grad_buf(NodeId id) {
    Node& n = nodes_[id];
    if (!n.has_grad) {
      n.grad = Mat(n.val.rows, n.val.cols);
      n.has_grad = true;
    }
    return n.grad;
  }

  NodeId push(Mat val, bool needs_grad) {
    Node n;
    n.val = std::move(val);
    n.needs_grad = needs_grad;
    nodes_.push_back(std::move(n));
    return NodeId(nodes_.size() - 1);
  }

  void set_back(NodeId id, std::function<void()> f) { nodes_[id].back = std::move(f); }

  NodeId binary(NodeId a, NodeId b, double ka, double kb) {
    const Mat& av = val(a);
    const Mat& bv = val(b);
    assert(av.same_shape(bv));
    Mat out(av.rows, av.cols);
    for (size_t i = 0; i < out.size(); ++i) out.a[i] = ka * av.a[i] + kb * bv.a[i];
    bool ng = needs(a) || needs(b);
    NodeId id = push(std::move(out), ng);
    if (ng) set_back(id, [this, id, a, b, ka, kb] {
      const Mat& g = nodes_[id].grad;
      if (needs(a)) {
        Mat& ga = grad_buf(a);
        for (size_t i = 0; i < g.size(); ++i) ga.a[i] += ka * g.a[i];
      }
      if (needs(b)) {
        Mat& gb = grad_buf(b);
        for (size_t i = 0; i < g.size(); ++i) gb.a[i] += kb * g.a[i];
      }
    });
    return id;
  }

  NodeId reduce(NodeId x, double scale) {
    const Mat& xv = val(x);
    double s = 0.0;
    for (size_t i = 0; i < xv.size(); ++i) s += xv.a[i];
    NodeId id = push(Mat::full(1, 1, s * scale), needs(x));
    if (needs(x)) set_back(id, [this, id, x, scale] {
      double g = nodes_[id].grad.a[0] * scale;
      Mat& gx = grad_buf(x);
      for (size_t i = 0; i < gx.size(); ++i) gx.a[i] += g;
    });
    return id;
  }

  // Deque, not vector: appending must never move existing nodes, so
  // that Mat references handed out by value() stay valid while the
  // caller keeps building the graph.
  std::deque<Node> nodes_;
  std::vector<std::pair<Parameter*, NodeId>> param_cache_;
};

}  // namespace wsg::ad
