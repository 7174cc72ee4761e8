#pragma once

#include <cmath>
#include <functional>
#include <utility>
#include <vector>

#include "platonic/tensor.hpp"

namespace platonic {

namespace detail {

// Sum `g` down to `target` shape, undoing right-aligned broadcasting.
inline Tensor reduce_to_shape(Tensor g, const Shape& target) {
    while (g.rank() > target.size()) g = sum_axis(g, 0);
    for (std::size_t ax = 0; ax < target.size(); ++ax)
        if (g.shape[ax] != target[ax]) {
            if (target[ax] != 1)
                throw DimensionError("reduce_to_shape: incompatible grad shape");
            g = sum_axis(g, ax, /*keepdim=*/true);
        }
    return g;
}

}  // namespace detail

/// Reverse-mode tape. Single-owner; records primitive ops in execution order
/// and replays them backward in reverse (topological) order.
class Tape {
  public:
    using Handle = int;

    Handle constant(Tensor t) { return push(std::move(t), false, {}, nullptr); }

    Handle param(Tensor t) { return push(std::move(t), true, {}, nullptr); }

    const Tensor& value(Handle h) const { return nodes_[check(h)].value; }

    const Tensor& grad(Handle h) const { return nodes_[check(h)].grad; }

    bool needs_grad(Handle h) const { return nodes_[check(h)].needs_grad; }

    std::size_t size() const { return nodes_.size(); }

    Handle add(Handle a, Handle b) {
        Tensor v = platonic::add(value(a), value(b));
        return push(std::move(v), needs_grad(a) || needs_grad(b), {a, b}, [a, b](Tape& t, const Node& n) {
            t.accumulate(a, detail::reduce_to_shape(n.grad, t.value(a).shape));
            t.accumulate(b, detail::reduce_to_shape(n.grad, t.value(b).shape));
        });
    }

    Handle sub(Handle a, Handle b) {
        Tensor v = platonic::sub(value(a), value(b));
        return push(std::move(v), needs_grad(a) || needs_grad(b), {a, b}, [a, b](Tape& t, const Node& n) {
            t.accumulate(a, detail::reduce_to_shape(n.grad, t.value(a).shape));
            t.accumulate(b, detail::reduce_to_shape(platonic::scale(n.grad, -1.0), t.value(b).shape));
        });
    }

    Handle mul(Handle a, Handle b) {
        Tensor v = platonic::mul(value(a), value(b));
        return push(std::move(v), needs_grad(a) || needs_grad(b), {a, b}, [a, b](Tape& t, const Node& n) {
            if (t.needs_grad(a))
                t.accumulate(a, detail::reduce_to_shape(platonic::mul(n.grad, t.value(b)),
                                                        t.value(a).shape));
            if (t.needs_grad(b))
                t.accumulate(b, detail::reduce_to_shape(platonic::mul(n.grad, t.value(a)),
                                                        t.value(b).shape));
        });
    }

    Handle scale(Handle a, double s) {
        return push(platonic::scale(value(a), s), needs_grad(a), {a}, [a, s](Tape& t, const Node& n) {
            t.accumulate(a, platonic::scale(n.grad, s));
        });
    }

    Handle matmul(Handle a, Handle b) {
        Tensor v = platonic::matmul(value(a), value(b));
        return push(std::move(v), needs_grad(a) || needs_grad(b), {a, b}, [a, b](Tape& t, const Node& n) {
            const Tensor& A = t.value(a);
            const Tensor& B = t.value(b);
            if (t.needs_grad(a)) {
                Tensor dA = platonic::matmul(n.grad, transpose_last2(B));
                t.accumulate(a, detail::reduce_to_shape(std::move(dA), A.shape));
            }
            if (t.needs_grad(b)) {
                Tensor dB = platonic::matmul(transpose_last2(A), n.grad);
                t.accumulate(b, detail::reduce_to_shape(std::move(dB), B.shape));
            }
        });
    }

    Handle softmax_lastaxis(Handle a) {
        Tensor v = platonic::softmax_lastaxis(value(a));
        return push(std::move(v), needs_grad(a), {a}, [a](Tape& t, const Node& n) {
            // dX = Y * (dY - sum(dY * Y)) along the last axis.
            const Tensor& y = n.value;
            std::size_t cols = y.shape.back();
            std::size_t rows = y.numel() / cols;
            Tensor dx(y.shape);
            for (std::size_t r = 0; r < rows; ++r) {
                const double* yr = y.data.data() + r * cols;
                const double* gr = n.grad.data.data() + r * cols;
                double dot = 0.0;
                for (std::size_t j = 0; j < cols; ++j) dot += yr[j] * gr[j];
                double* dr = dx.data.data() + r * cols;
                for (std::size_t j = 0; j < cols; ++j) dr[j] = yr[j] * (gr[j] - dot);
            }
            t.accumulate(a, std::move(dx));
        });
    }

    Handle gelu(Handle a) {
        Tensor v = platonic::map(value(a), gelu_scalar, "gelu");
        return push(std::move(v), needs_grad(a), {a}, [a](Tape& t, const Node& n) {
            const Tensor& x = t.value(a);
            Tensor dx(x.shape);
            for (std::size_t i = 0; i < x.numel(); ++i)
                dx.data[i] = n.grad.data[i] * gelu_grad_scalar(x.data[i]);
            t.accumulate(a, std::move(dx));
        });
    }

    Handle sin(Handle a) {
        Tensor v = platonic::map(value(a), [](double x) { return std::sin(x); }, "sin");
        return push(std::move(v), needs_grad(a), {a}, [a](Tape& t, const Node& n) {
            const Tensor& x = t.value(a);
            Tensor dx(x.shape);
            for (std::size_t i = 0; i < x.numel(); ++i)
                dx.data[i] = n.grad.data[i] * std::cos(x.data[i]);
            t.accumulate(a, std::move(dx));
        });
    }

    Handle cos(Handle a) {
        Tensor v = platonic::map(value(a), [](double x) { return std::cos(x); }, "cos");
        return push(std::move(v), needs_grad(a), {a}, [a](Tape& t, const Node& n) {
            const Tensor& x = t.value(a);
            Tensor dx(x.shape);
            for (std::size_t i = 0; i < x.numel(); ++i)
                dx.data[i] = -n.grad.data[i] * std::sin(x.data[i]);
            t.accumulate(a, std::move(dx));
        });
    }

    Handle rsqrt(Handle a) {
        Tensor v = platonic::map(value(a), [](double x) { return 1.0 / std::sqrt(x); }, "rsqrt");
        return push(std::move(v), needs_grad(a), {a}, [a](Tape& t, const Node& n) {
            const Tensor& x = t.value(a);
            Tensor dx(x.shape);
            for (std::size_t i = 0; i < x.numel(); ++i)
                dx.data[i] = n.grad.data[i] * -0.5 / (x.data[i] * std::sqrt(x.data[i]));
            t.accumulate(a, std::move(dx));
        });
    }

    Handle sum_all(Handle a) {
        Tensor v = Tensor::scalar(platonic::sum_all(value(a)));
        return push(std::move(v), needs_grad(a), {a}, [a](Tape& t, const Node& n) {
            t.accumulate(a, Tensor::full(t.value(a).shape, n.grad.data[0]));
        });
    }

    Handle sum_axis(Handle a, std::size_t axis, bool keepdim = false) {
        Tensor v = platonic::sum_axis(value(a), axis, keepdim);
        return push(std::move(v), needs_grad(a), {a}, [a, axis](Tape& t, const Node& n) {
            const Shape& xs = t.value(a).shape;
            std::size_t outer = 1, inner = 1, len = xs[axis];
            for (std::size_t i = 0; i < axis; ++i) outer *= xs[i];
            for (std::size_t i = axis + 1; i < xs.size(); ++i) inner *= xs[i];
            Tensor dx(xs);
            for (std::size_t o = 0; o < outer; ++o)
                for (std::size_t k = 0; k < len; ++k)
                    for (std::size_t in = 0; in < inner; ++in)
                        dx.data[(o * len + k) * inner + in] = n.grad.data[o * inner + in];
            t.accumulate(a, std::move(dx));
        });
    }

    Handle reshape(Handle a, Shape s) {
        Tensor v = platonic::reshape(value(a), s);
        return push(std::move(v), needs_grad(a), {a}, [a](Tape& t, const Node& n) {
            t.accumulate(a, platonic::reshape(n.grad, t.value(a).shape));
        });
    }

    Handle permute(Handle a, std::vector<std::size_t> axes) {
        Tensor v = platonic::permute(value(a), axes);
        return push(std::move(v), needs_grad(a), {a}, [a, axes](Tape& t, const Node& n) {
            std::vector<std::size_t> inv(axes.size());
            for (std::size_t i = 0; i < axes.size(); ++i) inv[axes[i]] = i;
            t.accumulate(a, platonic::permute(n.grad, inv));
        });
    }

    Handle gather(Handle a, std::size_t axis, std::vector<std::size_t> indices) {
        Tensor v = platonic::gather(value(a), axis, indices);
        return push(std::move(v), needs_grad(a), {a},
                    [a, axis, indices](Tape& t, const Node& n) {
                        // scatter-add
                        const Shape& xs = t.value(a).shape;
                        Tensor dx(xs);
                        std::size_t outer = 1, inner = 1;
                        for (std::size_t i = 0; i < axis; ++i) outer *= xs[i];
                        for (std::size_t i = axis + 1; i < xs.size(); ++i) inner *= xs[i];
                        for (std::size_t o = 0; o < outer; ++o)
                            for (std::size_t j = 0; j < indices.size(); ++j) {
                                const double* src = n.grad.data.data() + (o * indices.size() + j) * inner;
                                double* dst = dx.data.data() + (o * xs[axis] + indices[j]) * inner;
                                for (std::size_t in = 0; in < inner; ++in) dst[in] += src[in];
                            }
                        t.accumulate(a, std::move(dx));
                    });
    }

    /// Populate gradients of everything reachable from a scalar loss.
    void backward(Handle loss) {
        Node& ln = nodes_[check(loss)];
        if (ln.value.numel() != 1) throw ContractError("backward: loss must be scalar");
        for (Node& n : nodes_) n.grad = Tensor();
        ln.grad = Tensor::full(ln.value.shape, 1.0);
        for (std::size_t i = nodes_.size(); i-- > 0;) {
            Node& n = nodes_[i];
            if (!n.needs_grad || !n.back || n.grad.numel() == 0) continue;
            n.back(*this, n);
        }
    }

  private:
    struct Node {
        Tensor value;
        Tensor grad;
        bool needs_grad = false;
        std::vector<Handle> parents;
        std::function<void(Tape&, const Node&)> back;
    };

    static Tensor transpose_last2(const Tensor& t) {
        std::vector<std::size_t> axes(t.rank());
        for (std::size_t i = 0; i < axes.size(); ++i) axes[i] = i;
        std::swap(axes[axes.size() - 1], axes[axes.size() - 2]);
        return platonic::permute(t, axes);
    }

    Handle push(Tensor v, bool needs, std::vector<Handle> parents,
                std::function<void(Tape&, const Node&)> back) {
        Node n;
        n.value = std::move(v);
        n.needs_grad = needs;
        n.parents = std::move(parents);
        n.back = std::move(back);
        nodes_.push_back(std::move(n));
        return static_cast<Handle>(nodes_.size() - 1);
    }

    void accumulate(Handle h, Tensor g) {
        Node& n = nodes_[check(h)];
        if (!n.needs_grad) return;
        if (!n.value.same_shape(g))
            throw DimensionError("gradient shape " + shape_str(g.shape) +
                                 " does not match value shape " + shape_str(n.value.shape));
        if (n.grad.numel() == 0)
            n.grad = std::move(g);
        else
            for (std::size_t i = 0; i < g.numel(); ++i) n.grad.data[i] += g.data[i];
    }

    Handle check(Handle h) const {
        if (h < 0 || static_cast<std::size_t>(h) >= nodes_.size())
            throw IndexError("invalid tape handle");
        return h;
    }

    std::vector<Node> nodes_;
};

}  // namespace platonic
