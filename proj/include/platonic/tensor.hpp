#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "platonic/errors.hpp"

namespace platonic {

using Shape = std::vector<std::size_t>;

inline std::size_t shape_numel(const Shape& s) {
    std::size_t n = 1;
    for (std::size_t d : s) n *= d;
    return n;
}

inline std::string shape_str(const Shape& s) {
    std::ostringstream os;
    os << "(";
    for (std::size_t i = 0; i < s.size(); ++i) os << (i ? "," : "") << s[i];
    os << ")";
    return os.str();
}

/// Dense row-major fp64 tensor. The single value carrier for the whole engine.
struct Tensor {
    Shape shape;
    std::vector<double> data;

    Tensor() = default;
    explicit Tensor(Shape s) : shape(std::move(s)), data(shape_numel(shape), 0.0) {}
    Tensor(Shape s, std::vector<double> d) : shape(std::move(s)), data(std::move(d)) {
        if (data.size() != shape_numel(shape))
            throw DimensionError("data length " + std::to_string(data.size()) +
                                 " does not match shape " + shape_str(shape));
    }

    std::size_t numel() const { return data.size(); }
    std::size_t rank() const { return shape.size(); }

    double& operator[](std::size_t i) { return data[i]; }
    double operator[](std::size_t i) const { return data[i]; }

    bool same_shape(const Tensor& o) const { return shape == o.shape; }

    static Tensor zeros(Shape s) { return Tensor(std::move(s)); }

    static Tensor full(Shape s, double v) {
        Tensor t(std::move(s));
        std::fill(t.data.begin(), t.data.end(), v);
        return t;
    }

    static Tensor scalar(double v) { return Tensor({}, {v}); }

    static Tensor randn(Shape s, std::mt19937_64& rng, double stddev = 1.0) {
        Tensor t(std::move(s));
        std::normal_distribution<double> dist(0.0, stddev);
        for (double& x : t.data) x = dist(rng);
        return t;
    }

    static Tensor uniform(Shape s, std::mt19937_64& rng, double lo = -1.0, double hi = 1.0) {
        Tensor t(std::move(s));
        std::uniform_real_distribution<double> dist(lo, hi);
        for (double& x : t.data) x = dist(rng);
        return t;
    }
};

inline void check_finite(const Tensor& t, const char* op) {
    for (double x : t.data)
        if (!std::isfinite(x)) throw NumericError(std::string(op) + " produced a non-finite value");
}

namespace detail {

// Right-aligned numpy-style broadcast of two shapes.
inline Shape broadcast_shape(const Shape& a, const Shape& b, const char* op) {
    Shape out(std::max(a.size(), b.size()));
    for (std::size_t i = 0; i < out.size(); ++i) {
        std::size_t da = i < out.size() - a.size() ? 1 : a[i - (out.size() - a.size())];
        std::size_t db = i < out.size() - b.size() ? 1 : b[i - (out.size() - b.size())];
        if (da != db && da != 1 && db != 1)
            throw DimensionError(std::string(op) + ": shapes " + shape_str(a) + " and " +
                                 shape_str(b) + " are not broadcast-compatible");
        out[i] = std::max(da, db);
    }
    return out;
}

inline std::vector<std::size_t> row_major_strides(const Shape& s) {
    std::vector<std::size_t> st(s.size());
    std::size_t acc = 1;
    for (std::size_t i = s.size(); i-- > 0;) {
        st[i] = acc;
        acc *= s[i];
    }
    return st;
}

// Strides of `s` viewed as shape `out` (0 where broadcast).
inline std::vector<std::size_t> broadcast_strides(const Shape& s, const Shape& out) {
    auto st = row_major_strides(s);
    std::vector<std::size_t> r(out.size(), 0);
    std::size_t off = out.size() - s.size();
    for (std::size_t i = 0; i < s.size(); ++i) r[off + i] = s[i] == 1 ? 0 : st[i];
    return r;
}

template <class F>
Tensor binary_broadcast(const Tensor& a, const Tensor& b, const char* op, F f) {
    Shape os = broadcast_shape(a.shape, b.shape, op);
    Tensor out(os);
    auto sa = broadcast_strides(a.shape, os);
    auto sb = broadcast_strides(b.shape, os);
    std::vector<std::size_t> idx(os.size(), 0);
    std::size_t n = out.numel();
    std::size_t ia = 0, ib = 0;
    for (std::size_t lin = 0; lin < n; ++lin) {
        out.data[lin] = f(a.data[ia], b.data[ib]);
        for (std::size_t ax = os.size(); ax-- > 0;) {
            ++idx[ax];
            ia += sa[ax];
            ib += sb[ax];
            if (idx[ax] < os[ax]) break;
            idx[ax] = 0;
            ia -= sa[ax] * os[ax];
            ib -= sb[ax] * os[ax];
        }
    }
    return out;
}

}  // namespace detail

inline Tensor add(const Tensor& a, const Tensor& b) {
    Tensor t = detail::binary_broadcast(a, b, "add", [](double x, double y) { return x + y; });
    check_finite(t, "add");
    return t;
}

inline Tensor sub(const Tensor& a, const Tensor& b) {
    Tensor t = detail::binary_broadcast(a, b, "sub", [](double x, double y) { return x - y; });
    check_finite(t, "sub");
    return t;
}

inline Tensor mul(const Tensor& a, const Tensor& b) {
    Tensor t = detail::binary_broadcast(a, b, "mul", [](double x, double y) { return x * y; });
    check_finite(t, "mul");
    return t;
}

inline Tensor scale(const Tensor& a, double s) {
    Tensor t = a;
    for (double& x : t.data) x *= s;
    check_finite(t, "scale");
    return t;
}

/// Batched matrix product on the trailing two axes; leading axes broadcast.
inline Tensor matmul(const Tensor& a, const Tensor& b) {
    if (a.rank() < 2 || b.rank() < 2)
        throw DimensionError("matmul: operands must have rank >= 2, got " + shape_str(a.shape) +
                             " and " + shape_str(b.shape));
    std::size_t m = a.shape[a.rank() - 2], ka = a.shape[a.rank() - 1];
    std::size_t kb = b.shape[b.rank() - 2], n = b.shape[b.rank() - 1];
    if (ka != kb)
        throw DimensionError("matmul: inner dimensions disagree, " + shape_str(a.shape) + " vs " +
                             shape_str(b.shape));
    Shape la(a.shape.begin(), a.shape.end() - 2), lb(b.shape.begin(), b.shape.end() - 2);
    Shape lo = detail::broadcast_shape(la, lb, "matmul");
    Shape os = lo;
    os.push_back(m);
    os.push_back(n);
    Tensor out(os);
    std::size_t batches = shape_numel(lo);
    auto sa = detail::broadcast_strides(la, lo);
    auto sb = detail::broadcast_strides(lb, lo);
    std::size_t amat = m * ka, bmat = kb * n, omat = m * n;
    std::vector<std::size_t> idx(lo.size(), 0);
    std::size_t ia = 0, ib = 0;
    for (std::size_t bidx = 0; bidx < batches; ++bidx) {
        const double* A = a.data.data() + ia * amat;
        const double* B = b.data.data() + ib * bmat;
        double* O = out.data.data() + bidx * omat;
        for (std::size_t i = 0; i < m; ++i)
            for (std::size_t k = 0; k < ka; ++k) {
                double av = A[i * ka + k];
                if (av == 0.0) continue;
                const double* Br = B + k * n;
                double* Or = O + i * n;
                for (std::size_t j = 0; j < n; ++j) Or[j] += av * Br[j];
            }
        for (std::size_t ax = lo.size(); ax-- > 0;) {
            ++idx[ax];
            ia += sa[ax];
            ib += sb[ax];
            if (idx[ax] < lo[ax]) break;
            idx[ax] = 0;
            ia -= sa[ax] * lo[ax];
            ib -= sb[ax] * lo[ax];
        }
    }
    check_finite(out, "matmul");
    return out;
}

/// Max-subtracted exponentials normalized along the last axis.
inline Tensor softmax_lastaxis(const Tensor& x) {
    if (x.rank() == 0 || x.shape.back() == 0)
        throw DimensionError("softmax_lastaxis: empty last axis in shape " + shape_str(x.shape));
    std::size_t n = x.shape.back();
    std::size_t rows = x.numel() / n;
    Tensor out(x.shape);
    for (std::size_t r = 0; r < rows; ++r) {
        const double* in = x.data.data() + r * n;
        double* o = out.data.data() + r * n;
        double mx = *std::max_element(in, in + n);
        double sum = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            o[j] = std::exp(in[j] - mx);
            sum += o[j];
        }
        for (std::size_t j = 0; j < n; ++j) o[j] /= sum;
    }
    check_finite(out, "softmax_lastaxis");
    return out;
}

inline Tensor reshape(const Tensor& a, Shape s) {
    if (shape_numel(s) != a.numel())
        throw DimensionError("reshape: cannot view " + shape_str(a.shape) + " as " + shape_str(s));
    Tensor t = a;
    t.shape = std::move(s);
    return t;
}

/// Axis permutation: out axis i is input axis axes[i].
inline Tensor permute(const Tensor& a, const std::vector<std::size_t>& axes) {
    if (axes.size() != a.rank()) throw DimensionError("permute: axes list length mismatch");
    Shape os(a.rank());
    for (std::size_t i = 0; i < axes.size(); ++i) {
        if (axes[i] >= a.rank()) throw IndexError("permute: axis out of range");
        os[i] = a.shape[axes[i]];
    }
    Tensor out(os);
    auto in_st = detail::row_major_strides(a.shape);
    std::vector<std::size_t> st(a.rank());
    for (std::size_t i = 0; i < axes.size(); ++i) st[i] = in_st[axes[i]];
    std::vector<std::size_t> idx(a.rank(), 0);
    std::size_t src = 0;
    for (std::size_t lin = 0; lin < out.numel(); ++lin) {
        out.data[lin] = a.data[src];
        for (std::size_t ax = os.size(); ax-- > 0;) {
            ++idx[ax];
            src += st[ax];
            if (idx[ax] < os[ax]) break;
            idx[ax] = 0;
            src -= st[ax] * os[ax];
        }
    }
    return out;
}

/// Index-gather along one axis; the permutation primitive behind group actions.
inline Tensor gather(const Tensor& a, std::size_t axis, const std::vector<std::size_t>& indices) {
    if (axis >= a.rank()) throw IndexError("gather: axis out of range");
    for (std::size_t i : indices)
        if (i >= a.shape[axis]) throw IndexError("gather: index " + std::to_string(i) +
                                                 " out of range for axis length " +
                                                 std::to_string(a.shape[axis]));
    Shape os = a.shape;
    os[axis] = indices.size();
    Tensor out(os);
    std::size_t outer = 1, inner = 1;
    for (std::size_t i = 0; i < axis; ++i) outer *= a.shape[i];
    for (std::size_t i = axis + 1; i < a.rank(); ++i) inner *= a.shape[i];
    for (std::size_t o = 0; o < outer; ++o)
        for (std::size_t j = 0; j < indices.size(); ++j)
            std::copy_n(a.data.data() + (o * a.shape[axis] + indices[j]) * inner, inner,
                        out.data.data() + (o * indices.size() + j) * inner);
    return out;
}

inline Tensor sum_axis(const Tensor& a, std::size_t axis, bool keepdim = false) {
    if (axis >= a.rank()) throw IndexError("sum_axis: axis out of range");
    Shape os = a.shape;
    if (keepdim)
        os[axis] = 1;
    else
        os.erase(os.begin() + static_cast<std::ptrdiff_t>(axis));
    std::size_t outer = 1, inner = 1, len = a.shape[axis];
    for (std::size_t i = 0; i < axis; ++i) outer *= a.shape[i];
    for (std::size_t i = axis + 1; i < a.rank(); ++i) inner *= a.shape[i];
    Tensor out(os);
    for (std::size_t o = 0; o < outer; ++o)
        for (std::size_t k = 0; k < len; ++k)
            for (std::size_t in = 0; in < inner; ++in)
                out.data[o * inner + in] += a.data[(o * len + k) * inner + in];
    check_finite(out, "sum_axis");
    return out;
}

inline double sum_all(const Tensor& a) {
    double s = std::accumulate(a.data.begin(), a.data.end(), 0.0);
    if (!std::isfinite(s)) throw NumericError("sum_all produced a non-finite value");
    return s;
}

// Exact Gaussian-CDF GELU.
inline double gelu_scalar(double x) { return 0.5 * x * (1.0 + std::erf(x / std::sqrt(2.0))); }

inline double gelu_grad_scalar(double x) {
    double phi = std::exp(-0.5 * x * x) / std::sqrt(2.0 * M_PI);
    return 0.5 * (1.0 + std::erf(x / std::sqrt(2.0))) + x * phi;
}

template <class F>
Tensor map(const Tensor& a, F f, const char* op = "map") {
    Tensor t = a;
    for (double& x : t.data) x = f(x);
    check_finite(t, op);
    return t;
}

inline double max_abs_diff(const Tensor& a, const Tensor& b) {
    if (!a.same_shape(b))
        throw DimensionError("max_abs_diff: shapes " + shape_str(a.shape) + " vs " +
                             shape_str(b.shape));
    double m = 0.0;
    for (std::size_t i = 0; i < a.numel(); ++i) m = std::max(m, std::abs(a.data[i] - b.data[i]));
    return m;
}

inline double max_abs(const Tensor& a) {
    double m = 0.0;
    for (double x : a.data) m = std::max(m, std::abs(x));
    return m;
}

}  // namespace platonic
