#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include "platonic/group.hpp"
#include "platonic/tensor.hpp"

namespace platonic {

/// The base frequency set: d/2 n-dimensional frequency vectors per head.
struct FrequencySet {
    int dim = 0;       // spatial dimension n
    int head_dim = 0;  // d (even)
    int heads = 1;     // H
    bool learned = false;
    Tensor freqs;  // (H, d/2, n)

    std::size_t blocks() const { return static_cast<std::size_t>(head_dim / 2); }
};

/// Draw frequencies i.i.d. Gaussian(0, sigma^2); deterministic per (seed, shape).
inline FrequencySet make_frequencies(int dim, int head_dim, int heads, double sigma,
                                     std::uint64_t seed) {
    if (head_dim <= 0 || head_dim % 2 != 0)
        throw ContractError("make_frequencies: head dimension must be even and positive, got " +
                            std::to_string(head_dim));
    if (sigma <= 0.0) throw ContractError("make_frequencies: sigma must be positive");
    FrequencySet fs;
    fs.dim = dim;
    fs.head_dim = head_dim;
    fs.heads = heads;
    std::mt19937_64 rng(seed);
    fs.freqs = Tensor::randn({static_cast<std::size_t>(heads),
                              static_cast<std::size_t>(head_dim / 2),
                              static_cast<std::size_t>(dim)},
                             rng, sigma);
    return fs;
}

namespace detail {

inline double freq_dot(const FrequencySet& fs, int head, std::size_t block, const double* p) {
    const double* w =
        fs.freqs.data.data() + (static_cast<std::size_t>(head) * fs.blocks() + block) * fs.dim;
    double t = 0.0;
    for (int a = 0; a < fs.dim; ++a) t += w[a] * p[a];
    return t;
}

}  // namespace detail

/// Block-diagonal RoPE rotation: pair (x_{2k-1}, x_{2k}) rotated by omega_k^T p.
/// Never materializes the d x d matrix.
inline Tensor apply_rope(const FrequencySet& fs, const Tensor& p, const Tensor& x, int head = 0) {
    if (p.rank() != 1 || p.shape[0] != static_cast<std::size_t>(fs.dim))
        throw DimensionError("apply_rope: position length does not match dimension " +
                             std::to_string(fs.dim));
    if (x.rank() != 1 || x.shape[0] != static_cast<std::size_t>(fs.head_dim))
        throw DimensionError("apply_rope: feature length " +
                             (x.rank() == 1 ? std::to_string(x.shape[0]) : std::string("?")) +
                             " does not match head dimension " + std::to_string(fs.head_dim));
    Tensor out(x.shape);
    for (std::size_t k = 0; k < fs.blocks(); ++k) {
        double theta = detail::freq_dot(fs, head, k, p.data.data());
        double c = std::cos(theta), s = std::sin(theta);
        double x0 = x.data[2 * k], x1 = x.data[2 * k + 1];
        out.data[2 * k] = c * x0 - s * x1;
        out.data[2 * k + 1] = s * x0 + c * x1;
    }
    return out;
}

/// RoPE attention score q^T rho_Omega(p_j - p_i) k.
inline double rope_score(const Tensor& q, const Tensor& k, const Tensor& p_i, const Tensor& p_j,
                         const FrequencySet& fs, int head = 0) {
    Tensor dp = sub(p_j, p_i);
    Tensor rk = apply_rope(fs, dp, k, head);
    double s = 0.0;
    for (std::size_t m = 0; m < q.numel(); ++m) s += q.data[m] * rk.data[m];
    return s;
}

/// Replace every omega_k by element[i] * omega_k (frequency steering).
inline FrequencySet steer_frequencies(const FrequencySet& fs, const FiniteGroup& g, int i) {
    if (fs.dim != g.dim)
        throw DimensionError("steer_frequencies: frequency dimension " + std::to_string(fs.dim) +
                             " does not match group dimension " + std::to_string(g.dim));
    if (i < 0 || static_cast<std::size_t>(i) >= g.order())
        throw IndexError("steer_frequencies: element index out of range");
    FrequencySet out = fs;
    const Tensor& R = g.elements[i];
    std::size_t vecs = fs.freqs.numel() / fs.dim;
    for (std::size_t v = 0; v < vecs; ++v) {
        const double* w = fs.freqs.data.data() + v * fs.dim;
        double* o = out.freqs.data.data() + v * fs.dim;
        for (int r = 0; r < fs.dim; ++r) {
            o[r] = 0.0;
            for (int c = 0; c < fs.dim; ++c) o[r] += R.data[r * fs.dim + c] * w[c];
        }
    }
    return out;
}

}  // namespace platonic
