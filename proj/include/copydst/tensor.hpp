#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <memory>
#include <sstream>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include "copydst/errors.hpp"

// Minimal reverse-mode autodiff over dense double tensors. Graphs are
// recorded define-by-run: every op allocates a node holding the result,
// its parents and a local backward rule. backward() walks the recorded
// graph once in reverse topological order. Leaf gradients accumulate
// across calls until zero_grad(); non-leaf gradients are per-pass scratch.
namespace copydst::ad {

using Shape = std::vector<std::size_t>;

inline std::size_t shape_size(const Shape& s) {
    std::size_t n = 1;
    for (std::size_t d : s) n *= d;
    return n;
}

inline std::string shape_str(const Shape& s) {
    std::ostringstream os;
    os << "[";
    for (std::size_t i = 0; i < s.size(); ++i) os << (i ? "x" : "") << s[i];
    os << "]";
    return os.str();
}

struct Node {
    Shape shape;
    std::vector<double> values;
    bool requires_grad = false;
    std::vector<double> grad;  // allocated lazily by backward()
    std::vector<std::shared_ptr<Node>> parents;
    std::function<void(Node&)> backprop;  // empty for leaves

    bool is_leaf() const { return !backprop; }
    void ensure_grad() {
        if (grad.size() != values.size()) grad.assign(values.size(), 0.0);
    }
};

// Gradient recording can be disabled (eval mode); ops then produce plain
// constants with no parent links.
inline bool& grad_recording() {
    thread_local bool enabled = true;
    return enabled;
}

struct NoGradGuard {
    bool prev;
    NoGradGuard() : prev(grad_recording()) { grad_recording() = false; }
    ~NoGradGuard() { grad_recording() = prev; }
    NoGradGuard(const NoGradGuard&) = delete;
    NoGradGuard& operator=(const NoGradGuard&) = delete;
};

// Value-semantics handle to a graph node.
class Tensor {
  public:
    Tensor() = default;
    explicit Tensor(std::shared_ptr<Node> n) : node_(std::move(n)) {}

    static Tensor constant(Shape shape, std::vector<double> values) {
        check_sized(shape, values.size());
        auto n = std::make_shared<Node>();
        n->shape = std::move(shape);
        n->values = std::move(values);
        return Tensor(n);
    }

    static Tensor scalar(double v) { return constant({1}, {v}); }

    static Tensor zeros(Shape shape) {
        std::size_t n = shape_size(shape);
        return constant(std::move(shape), std::vector<double>(n, 0.0));
    }

    // Trainable leaf.
    static Tensor param(Shape shape, std::vector<double> values) {
        Tensor t = constant(std::move(shape), std::move(values));
        t.node_->requires_grad = true;
        return t;
    }

    bool defined() const { return node_ != nullptr; }
    const Shape& shape() const { return node_->shape; }
    std::size_t size() const { return node_->values.size(); }
    const std::vector<double>& values() const { return node_->values; }
    // Mutable access for optimizer updates; only meaningful on leaves.
    std::vector<double>& values_mut() { return node_->values; }
    bool requires_grad() const { return node_->requires_grad; }
    bool has_grad() const { return node_->grad.size() == node_->values.size(); }
    const std::vector<double>& grad() const { return node_->grad; }
    void zero_grad() { node_->grad.assign(node_->values.size(), 0.0); }

    double item() const {
        if (size() != 1)
            throw ContractError("item(): tensor has " + std::to_string(size()) + " elements");
        return node_->values[0];
    }

    std::shared_ptr<Node> node() const { return node_; }

  private:
    static void check_sized(const Shape& shape, std::size_t n) {
        if (shape.empty() || shape_size(shape) != n || shape_size(shape) == 0)
            throw DimensionError("tensor shape " + shape_str(shape) + " does not hold " +
                                 std::to_string(n) + " values");
        for (std::size_t d : shape)
            if (d == 0) throw DimensionError("tensor shape " + shape_str(shape) + " has a zero dim");
    }

    std::shared_ptr<Node> node_;
};

namespace detail {

inline Tensor make_op(Shape shape, std::vector<double> values,
                      std::vector<Tensor> inputs, std::function<void(Node&)> backprop) {
    auto n = std::make_shared<Node>();
    n->shape = std::move(shape);
    n->values = std::move(values);
    if (grad_recording()) {
        bool needs = false;
        for (const auto& t : inputs) needs = needs || t.requires_grad();
        if (needs) {
            n->requires_grad = true;
            n->parents.reserve(inputs.size());
            for (const auto& t : inputs) n->parents.push_back(t.node());
            n->backprop = std::move(backprop);
        }
    }
    return Tensor(n);
}

inline double stable_sigmoid(double x) {
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    double e = std::exp(x);
    return e / (1.0 + e);
}

inline double softplus(double x) {
    return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x)));
}

}  // namespace detail

// ---- matmul ---------------------------------------------------------------
// [m x k] * [k x n] -> [m x n]; rhs may be a rank-1 [k], giving [m].
inline Tensor matmul(const Tensor& a, const Tensor& b) {
    if (a.shape().size() != 2)
        throw DimensionError("matmul: lhs must be rank-2, got " + shape_str(a.shape()));
    const std::size_t m = a.shape()[0], k = a.shape()[1];
    const bool vec = b.shape().size() == 1;
    if (!vec && b.shape().size() != 2)
        throw DimensionError("matmul: rhs must be rank-1 or rank-2, got " + shape_str(b.shape()));
    const std::size_t k2 = b.shape()[0];
    const std::size_t n = vec ? 1 : b.shape()[1];
    if (k != k2)
        throw DimensionError("matmul: inner dims disagree, " + shape_str(a.shape()) + " vs " +
                             shape_str(b.shape()));

    std::vector<double> out(m * n, 0.0);
    const auto& av = a.values();
    const auto& bv = b.values();
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            double acc = 0.0;
            for (std::size_t p = 0; p < k; ++p) acc += av[i * k + p] * bv[p * n + j];
            out[i * n + j] = acc;
        }

    Shape oshape = vec ? Shape{m} : Shape{m, n};
    return detail::make_op(std::move(oshape), std::move(out), {a, b}, [m, k, n](Node& self) {
        Node& A = *self.parents[0];
        Node& B = *self.parents[1];
        const auto& g = self.grad;
        if (A.requires_grad) {
            A.ensure_grad();
            for (std::size_t i = 0; i < m; ++i)
                for (std::size_t p = 0; p < k; ++p) {
                    double acc = 0.0;
                    for (std::size_t j = 0; j < n; ++j) acc += g[i * n + j] * B.values[p * n + j];
                    A.grad[i * k + p] += acc;
                }
        }
        if (B.requires_grad) {
            B.ensure_grad();
            for (std::size_t p = 0; p < k; ++p)
                for (std::size_t j = 0; j < n; ++j) {
                    double acc = 0.0;
                    for (std::size_t i = 0; i < m; ++i) acc += A.values[i * k + p] * g[i * n + j];
                    B.grad[p * n + j] += acc;
                }
        }
    });
}

// ---- elementwise add / mul (equal shapes or scalar-vs-tensor) -------------
namespace detail {

enum class Broadcast { None, LhsScalar, RhsScalar };

inline Broadcast broadcast_kind(const Tensor& a, const Tensor& b, const char* op) {
    if (a.shape() == b.shape()) return Broadcast::None;
    if (a.size() == 1) return Broadcast::LhsScalar;
    if (b.size() == 1) return Broadcast::RhsScalar;
    throw DimensionError(std::string(op) + ": shapes not broadcastable, " + shape_str(a.shape()) +
                         " vs " + shape_str(b.shape()));
}

}  // namespace detail

inline Tensor add(const Tensor& a, const Tensor& b) {
    auto bc = detail::broadcast_kind(a, b, "add");
    const auto& av = a.values();
    const auto& bv = b.values();
    std::size_t n = std::max(av.size(), bv.size());
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i)
        out[i] = (bc == detail::Broadcast::LhsScalar ? av[0] : av[i]) +
                 (bc == detail::Broadcast::RhsScalar ? bv[0] : bv[i]);
    Shape oshape = av.size() >= bv.size() ? a.shape() : b.shape();
    return detail::make_op(std::move(oshape), std::move(out), {a, b}, [bc, n](Node& self) {
        Node& A = *self.parents[0];
        Node& B = *self.parents[1];
        if (A.requires_grad) {
            A.ensure_grad();
            if (bc == detail::Broadcast::LhsScalar)
                for (std::size_t i = 0; i < n; ++i) A.grad[0] += self.grad[i];
            else
                for (std::size_t i = 0; i < n; ++i) A.grad[i] += self.grad[i];
        }
        if (B.requires_grad) {
            B.ensure_grad();
            if (bc == detail::Broadcast::RhsScalar)
                for (std::size_t i = 0; i < n; ++i) B.grad[0] += self.grad[i];
            else
                for (std::size_t i = 0; i < n; ++i) B.grad[i] += self.grad[i];
        }
    });
}

inline Tensor mul(const Tensor& a, const Tensor& b) {
    auto bc = detail::broadcast_kind(a, b, "mul");
    const auto& av = a.values();
    const auto& bv = b.values();
    std::size_t n = std::max(av.size(), bv.size());
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i)
        out[i] = (bc == detail::Broadcast::LhsScalar ? av[0] : av[i]) *
                 (bc == detail::Broadcast::RhsScalar ? bv[0] : bv[i]);
    Shape oshape = av.size() >= bv.size() ? a.shape() : b.shape();
    return detail::make_op(std::move(oshape), std::move(out), {a, b}, [bc, n](Node& self) {
        Node& A = *self.parents[0];
        Node& B = *self.parents[1];
        auto aval = [&](std::size_t i) {
            return bc == detail::Broadcast::LhsScalar ? A.values[0] : A.values[i];
        };
        auto bval = [&](std::size_t i) {
            return bc == detail::Broadcast::RhsScalar ? B.values[0] : B.values[i];
        };
        if (A.requires_grad) {
            A.ensure_grad();
            if (bc == detail::Broadcast::LhsScalar)
                for (std::size_t i = 0; i < n; ++i) A.grad[0] += self.grad[i] * bval(i);
            else
                for (std::size_t i = 0; i < n; ++i) A.grad[i] += self.grad[i] * bval(i);
        }
        if (B.requires_grad) {
            B.ensure_grad();
            if (bc == detail::Broadcast::RhsScalar)
                for (std::size_t i = 0; i < n; ++i) B.grad[0] += self.grad[i] * aval(i);
            else
                for (std::size_t i = 0; i < n; ++i) B.grad[i] += self.grad[i] * aval(i);
        }
    });
}

inline Tensor operator+(const Tensor& a, const Tensor& b) { return add(a, b); }
inline Tensor operator*(const Tensor& a, const Tensor& b) { return mul(a, b); }

inline Tensor tanh(const Tensor& x) {
    std::vector<double> out(x.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::tanh(x.values()[i]);
    return detail::make_op(x.shape(), std::move(out), {x}, [](Node& self) {
        Node& X = *self.parents[0];
        X.ensure_grad();
        for (std::size_t i = 0; i < self.values.size(); ++i) {
            double t = self.values[i];
            X.grad[i] += self.grad[i] * (1.0 - t * t);
        }
    });
}

inline Tensor sigmoid(const Tensor& x) {
    std::vector<double> out(x.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = detail::stable_sigmoid(x.values()[i]);
    return detail::make_op(x.shape(), std::move(out), {x}, [](Node& self) {
        Node& X = *self.parents[0];
        X.ensure_grad();
        for (std::size_t i = 0; i < self.values.size(); ++i) {
            double s = self.values[i];
            X.grad[i] += self.grad[i] * s * (1.0 - s);
        }
    });
}

// ---- softmax (rank-1, max-subtracted) --------------------------------------
inline Tensor softmax(const Tensor& x) {
    if (x.shape().size() != 1 || x.size() == 0)
        throw DimensionError("softmax: expected nonempty vector, got " + shape_str(x.shape()));
    const auto& v = x.values();
    double mx = *std::max_element(v.begin(), v.end());
    std::vector<double> out(v.size());
    double z = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) {
        out[i] = std::exp(v[i] - mx);
        z += out[i];
    }
    for (auto& e : out) e /= z;
    return detail::make_op(x.shape(), std::move(out), {x}, [](Node& self) {
        Node& X = *self.parents[0];
        X.ensure_grad();
        double dot = 0.0;
        for (std::size_t i = 0; i < self.values.size(); ++i) dot += self.grad[i] * self.values[i];
        for (std::size_t i = 0; i < self.values.size(); ++i)
            X.grad[i] += self.values[i] * (self.grad[i] - dot);
    });
}

// ---- concat along an axis ---------------------------------------------------
inline Tensor concat(const std::vector<Tensor>& parts, std::size_t axis) {
    if (parts.empty()) throw DimensionError("concat: no inputs");
    const Shape& s0 = parts[0].shape();
    if (axis >= s0.size())
        throw DimensionError("concat: axis " + std::to_string(axis) + " out of range for " +
                             shape_str(s0));
    std::size_t axis_total = 0;
    for (const auto& t : parts) {
        const Shape& s = t.shape();
        if (s.size() != s0.size())
            throw DimensionError("concat: rank mismatch, " + shape_str(s0) + " vs " + shape_str(s));
        for (std::size_t d = 0; d < s.size(); ++d)
            if (d != axis && s[d] != s0[d])
                throw DimensionError("concat: shapes differ off-axis, " + shape_str(s0) + " vs " +
                                     shape_str(s));
        axis_total += s[axis];
    }
    Shape oshape = s0;
    oshape[axis] = axis_total;
    std::size_t outer = 1, inner = 1;
    for (std::size_t d = 0; d < axis; ++d) outer *= s0[d];
    for (std::size_t d = axis + 1; d < s0.size(); ++d) inner *= s0[d];

    std::vector<double> out(shape_size(oshape));
    std::size_t row = axis_total * inner;
    std::size_t off = 0;
    std::vector<std::size_t> lens;
    lens.reserve(parts.size());
    for (const auto& t : parts) {
        std::size_t len = t.shape()[axis] * inner;
        lens.push_back(len);
        for (std::size_t o = 0; o < outer; ++o)
            std::copy_n(t.values().begin() + o * len, len, out.begin() + o * row + off);
        off += len;
    }
    return detail::make_op(std::move(oshape), std::move(out), parts,
                           [outer, row, lens](Node& self) {
                               std::size_t off = 0;
                               for (std::size_t p = 0; p < self.parents.size(); ++p) {
                                   Node& P = *self.parents[p];
                                   if (P.requires_grad) {
                                       P.ensure_grad();
                                       for (std::size_t o = 0; o < outer; ++o)
                                           for (std::size_t i = 0; i < lens[p]; ++i)
                                               P.grad[o * lens[p] + i] +=
                                                   self.grad[o * row + off + i];
                                   }
                                   off += lens[p];
                               }
                           });
}

// ---- shape & indexing helpers ----------------------------------------------
inline Tensor reshape(const Tensor& x, Shape shape) {
    if (shape_size(shape) != x.size())
        throw DimensionError("reshape: " + shape_str(x.shape()) + " -> " + shape_str(shape) +
                             " changes element count");
    return detail::make_op(std::move(shape), x.values(), {x}, [](Node& self) {
        Node& X = *self.parents[0];
        X.ensure_grad();
        for (std::size_t i = 0; i < self.grad.size(); ++i) X.grad[i] += self.grad[i];
    });
}

// Contiguous range [offset, offset+len) of a vector.
inline Tensor slice(const Tensor& x, std::size_t offset, std::size_t len) {
    if (x.shape().size() != 1)
        throw DimensionError("slice: expected vector, got " + shape_str(x.shape()));
    if (len == 0 || offset + len > x.size())
        throw DimensionError("slice: range [" + std::to_string(offset) + ", " +
                             std::to_string(offset + len) + ") exceeds " + shape_str(x.shape()));
    std::vector<double> out(x.values().begin() + offset, x.values().begin() + offset + len);
    return detail::make_op({len}, std::move(out), {x}, [offset, len](Node& self) {
        Node& X = *self.parents[0];
        X.ensure_grad();
        for (std::size_t i = 0; i < len; ++i) X.grad[offset + i] += self.grad[i];
    });
}

inline Tensor gather(const Tensor& x, std::vector<std::size_t> idx) {
    if (x.shape().size() != 1)
        throw DimensionError("gather: expected vector, got " + shape_str(x.shape()));
    if (idx.empty()) throw DimensionError("gather: empty index list");
    std::vector<double> out(idx.size());
    for (std::size_t i = 0; i < idx.size(); ++i) {
        if (idx[i] >= x.size())
            throw DimensionError("gather: index " + std::to_string(idx[i]) + " out of " +
                                 shape_str(x.shape()));
        out[i] = x.values()[idx[i]];
    }
    return detail::make_op({idx.size()}, std::move(out), {x}, [idx](Node& self) {
        Node& X = *self.parents[0];
        X.ensure_grad();
        for (std::size_t i = 0; i < idx.size(); ++i) X.grad[idx[i]] += self.grad[i];
    });
}

inline Tensor sum(const Tensor& x) {
    double acc = 0.0;
    for (double v : x.values()) acc += v;
    return detail::make_op({1}, {acc}, {x}, [](Node& self) {
        Node& X = *self.parents[0];
        X.ensure_grad();
        for (std::size_t i = 0; i < X.grad.size(); ++i) X.grad[i] += self.grad[0];
    });
}

// Mean binary cross-entropy against {0,1} targets, computed from logits so
// saturated probabilities cannot produce log(0).
inline Tensor bce_with_logits(const Tensor& logits, const std::vector<double>& targets) {
    if (logits.shape().size() != 1)
        throw DimensionError("bce_with_logits: expected vector logits, got " +
                             shape_str(logits.shape()));
    if (targets.size() != logits.size())
        throw DimensionError("bce_with_logits: " + std::to_string(targets.size()) +
                             " targets for " + shape_str(logits.shape()) + " logits");
    const auto& z = logits.values();
    double acc = 0.0;
    for (std::size_t i = 0; i < z.size(); ++i)
        acc += detail::softplus(z[i]) - targets[i] * z[i];
    acc /= static_cast<double>(z.size());
    return detail::make_op({1}, {acc}, {logits}, [targets](Node& self) {
        Node& Z = *self.parents[0];
        Z.ensure_grad();
        double k = static_cast<double>(targets.size());
        for (std::size_t i = 0; i < targets.size(); ++i)
            Z.grad[i] += self.grad[0] * (detail::stable_sigmoid(Z.values[i]) - targets[i]) / k;
    });
}

// ---- backward ---------------------------------------------------------------
inline void backward(const Tensor& loss) {
    if (loss.size() != 1)
        throw ContractError("backward: loss must be scalar, got shape " + shape_str(loss.shape()));
    if (!loss.requires_grad()) return;  // nothing reachable needs gradients

    // Reverse topological order by iterative post-order DFS.
    std::vector<Node*> topo;
    std::unordered_set<Node*> done;
    std::vector<std::pair<Node*, std::size_t>> stack;
    stack.emplace_back(loss.node().get(), 0);
    while (!stack.empty()) {
        auto& [n, next] = stack.back();
        if (done.count(n)) {
            stack.pop_back();
            continue;
        }
        bool descended = false;
        while (next < n->parents.size()) {
            Node* p = n->parents[next++].get();
            if (p->requires_grad && !done.count(p)) {
                stack.emplace_back(p, 0);
                descended = true;
                break;
            }
        }
        if (!descended && next >= n->parents.size()) {
            done.insert(n);
            topo.push_back(n);
            stack.pop_back();
        }
    }

    // Non-leaf gradients are scratch for this pass; leaf gradients persist
    // and accumulate across passes.
    for (Node* n : topo) {
        if (n->is_leaf())
            n->ensure_grad();
        else
            n->grad.assign(n->values.size(), 0.0);
    }
    loss.node()->grad[0] += 1.0;

    for (auto it = topo.rbegin(); it != topo.rend(); ++it)
        if (!(*it)->is_leaf()) (*it)->backprop(**it);
}

}  // namespace copydst::ad
