#pragma once

#include <cmath>
#include <limits>
#include <vector>

#include "platonic/equilinear.hpp"
#include "platonic/group.hpp"
#include "platonic/rope.hpp"
#include "platonic/tensor.hpp"

namespace platonic {

enum class InteractionMode { softmax_attention, linear_convolution };
enum class ScoreMode { equivariant, invariant };
enum class KeyMode { learned, constant_ones };

struct AttentionConfig {
    int heads = 1;     // H per frame; effective parallel heads = |G| * H
    int head_dim = 2;  // d, even
    InteractionMode mode = InteractionMode::softmax_attention;
    ScoreMode score = ScoreMode::equivariant;
    KeyMode key_mode = KeyMode::constant_ones;
    std::size_t max_softmax_n = 16384;  // memory guard for the quadratic path
};

namespace detail {

inline void check_qkv(const Tensor& q, const Tensor& k, const Tensor& v, const Tensor& positions,
                      const FiniteGroup& g, const FrequencySet& fs, const AttentionConfig& cfg) {
    std::size_t G = g.order();
    auto want = [&](const Tensor& t, const char* name) {
        if (t.rank() != 4 || t.shape[1] != G)
            throw ContractError(std::string(name) + " must have shape (N, |G|, H, d)");
        if (t.shape[2] != static_cast<std::size_t>(cfg.heads))
            throw ContractError(std::string(name) + " head count mismatch");
    };
    want(q, "q");
    want(k, "k");
    want(v, "v");
    if (q.shape[3] != static_cast<std::size_t>(cfg.head_dim) || !k.same_shape(q))
        throw ContractError("q/k must have head dimension d = " + std::to_string(cfg.head_dim));
    if (cfg.head_dim % 2 != 0) throw ContractError("head dimension must be even");
    if (v.shape[0] != q.shape[0]) throw ContractError("q/v point count mismatch");
    if (positions.rank() != 2 || positions.shape[0] != q.shape[0] ||
        positions.shape[1] != static_cast<std::size_t>(g.dim))
        throw DimensionError("positions must have shape (N, n)");
    if (fs.dim != g.dim || fs.heads != cfg.heads || fs.head_dim != cfg.head_dim)
        throw ContractError("frequency set does not match attention configuration");
}

// Projected positions p(R) = R^{-1} p for every frame; shape (|G|, N, n).
inline Tensor project_positions(const FiniteGroup& g, const Tensor& positions) {
    std::size_t G = g.order(), N = positions.shape[0];
    std::size_t n = static_cast<std::size_t>(g.dim);
    Tensor out({G, N, n});
    for (std::size_t R = 0; R < G; ++R) {
        const Tensor& inv = g.elements[static_cast<std::size_t>(g.inverse[R])];
        for (std::size_t i = 0; i < N; ++i)
            for (std::size_t a = 0; a < n; ++a) {
                double acc = 0.0;
                for (std::size_t b = 0; b < n; ++b)
                    acc += inv.data[a * n + b] * positions.data[i * n + b];
                out.data[(R * N + i) * n + a] = acc;
            }
    }
    opcount::count(static_cast<long long>(G) * N * n * n);
    return out;
}

// RoPE-rotate every row of a (N, d) lane given per-row positions (N, n).
inline void rotate_lane(const FrequencySet& fs, int head, const double* pos, std::size_t N,
                        const double* in, double* out, std::size_t n) {
    std::size_t d = static_cast<std::size_t>(fs.head_dim);
    std::size_t blocks = fs.blocks();
    for (std::size_t i = 0; i < N; ++i) {
        const double* p = pos + i * n;
        const double* x = in + i * d;
        double* o = out + i * d;
        for (std::size_t kblk = 0; kblk < blocks; ++kblk) {
            double theta = freq_dot(fs, head, kblk, p);
            double c = std::cos(theta), s = std::sin(theta);
            o[2 * kblk] = c * x[2 * kblk] - s * x[2 * kblk + 1];
            o[2 * kblk + 1] = s * x[2 * kblk] + c * x[2 * kblk + 1];
        }
    }
    opcount::count(static_cast<long long>(N) * blocks * (n + 4));
}

// rho(theta) * 1 rows for the constant-key path.
inline void ones_key_lane(const FrequencySet& fs, int head, const double* pos, std::size_t N,
                          double* out, std::size_t n) {
    std::size_t blocks = fs.blocks();
    std::size_t d = static_cast<std::size_t>(fs.head_dim);
    for (std::size_t i = 0; i < N; ++i) {
        const double* p = pos + i * n;
        double* o = out + i * d;
        for (std::size_t kblk = 0; kblk < blocks; ++kblk) {
            double theta = freq_dot(fs, head, kblk, p);
            double c = std::cos(theta), s = std::sin(theta);
            o[2 * kblk] = c - s;
            o[2 * kblk + 1] = s + c;
        }
    }
    opcount::count(static_cast<long long>(N) * blocks * n);
}

}  // namespace detail

/// Per-frame softmax attention: for frame R and head h,
/// s_ij(R,h) = q_i(R,h)^T rho_{Omega_h}(R^{-1}(p_j - p_i)) k_j(R,h) / sqrt(d),
/// softmax over j, weighted sum of v_j(R,h). The (|G|, H) pair is treated as
/// one merged set of attention heads; scores stream row-by-row per lane.
inline Tensor equivariant_attention(const Tensor& q, const Tensor& k, const Tensor& v,
                                    const Tensor& positions, const FiniteGroup& g,
                                    const FrequencySet& fs, const AttentionConfig& cfg) {
    if (cfg.mode != InteractionMode::softmax_attention || cfg.score != ScoreMode::equivariant)
        throw ContractError("equivariant_attention: config mode/score mismatch");
    detail::check_qkv(q, k, v, positions, g, fs, cfg);
    std::size_t N = q.shape[0], G = g.order(), H = q.shape[2];
    std::size_t d = q.shape[3], dv = v.shape[3];
    std::size_t n = static_cast<std::size_t>(g.dim);
    if (N > cfg.max_softmax_n)
        throw ResourceError("softmax attention memory guard: N = " + std::to_string(N) +
                            " exceeds " + std::to_string(cfg.max_softmax_n));
    Tensor pp = detail::project_positions(g, positions);
    double inv_sqrt_d = 1.0 / std::sqrt(static_cast<double>(d));
    Tensor out({N, G, H, dv});
    std::vector<double> qlane(N * d), klane(N * d), qrot(N * d), krot(N * d), srow(N);
    for (std::size_t R = 0; R < G; ++R) {
        const double* pos = pp.data.data() + R * N * n;
        for (std::size_t h = 0; h < H; ++h) {
            for (std::size_t i = 0; i < N; ++i)
                for (std::size_t m = 0; m < d; ++m) {
                    qlane[i * d + m] = q.data[((i * G + R) * H + h) * d + m];
                    klane[i * d + m] = k.data[((i * G + R) * H + h) * d + m];
                }
            detail::rotate_lane(fs, static_cast<int>(h), pos, N, qlane.data(), qrot.data(), n);
            detail::rotate_lane(fs, static_cast<int>(h), pos, N, klane.data(), krot.data(), n);
            for (std::size_t i = 0; i < N; ++i) {
                const double* qi = qrot.data() + i * d;
                double mx = -std::numeric_limits<double>::infinity();
                for (std::size_t j = 0; j < N; ++j) {
                    double s = 0.0;
                    const double* kj = krot.data() + j * d;
                    for (std::size_t m = 0; m < d; ++m) s += qi[m] * kj[m];
                    srow[j] = s * inv_sqrt_d;
                    mx = std::max(mx, srow[j]);
                }
                double z = 0.0;
                for (std::size_t j = 0; j < N; ++j) {
                    srow[j] = std::exp(srow[j] - mx);
                    z += srow[j];
                }
                double* o = out.data.data() + ((i * G + R) * H + h) * dv;
                for (std::size_t j = 0; j < N; ++j) {
                    double w = srow[j] / z;
                    const double* vj = v.data.data() + ((j * G + R) * H + h) * dv;
                    for (std::size_t m = 0; m < dv; ++m) o[m] += w * vj[m];
                }
            }
            opcount::count(static_cast<long long>(N) * N * (d + 1 + 1 + dv));
        }
    }
    check_finite(out, "equivariant_attention");
    return out;
}

/// Invariant-score attention: raw scores pooled over the group axis
/// before the softmax; one attention pattern per head, applied to the
/// frame-wise values.
inline Tensor invariant_attention(const Tensor& q, const Tensor& k, const Tensor& v,
                                  const Tensor& positions, const FiniteGroup& g,
                                  const FrequencySet& fs, const AttentionConfig& cfg) {
    if (cfg.mode != InteractionMode::softmax_attention || cfg.score != ScoreMode::invariant)
        throw ContractError("invariant_attention: config mode/score mismatch");
    detail::check_qkv(q, k, v, positions, g, fs, cfg);
    std::size_t N = q.shape[0], G = g.order(), H = q.shape[2];
    std::size_t d = q.shape[3], dv = v.shape[3];
    std::size_t n = static_cast<std::size_t>(g.dim);
    if (N > cfg.max_softmax_n)
        throw ResourceError("softmax attention memory guard: N = " + std::to_string(N) +
                            " exceeds " + std::to_string(cfg.max_softmax_n));
    Tensor pp = detail::project_positions(g, positions);
    double inv_sqrt_d = 1.0 / std::sqrt(static_cast<double>(d));
    // Rotated q/k for all lanes up front: (G, H, N, d).
    std::vector<double> qrot(G * H * N * d), krot(G * H * N * d), lane(N * d);
    for (std::size_t R = 0; R < G; ++R)
        for (std::size_t h = 0; h < H; ++h) {
            const double* pos = pp.data.data() + R * N * n;
            for (std::size_t i = 0; i < N; ++i)
                for (std::size_t m = 0; m < d; ++m)
                    lane[i * d + m] = q.data[((i * G + R) * H + h) * d + m];
            detail::rotate_lane(fs, static_cast<int>(h), pos, N, lane.data(),
                                qrot.data() + (R * H + h) * N * d, n);
            for (std::size_t i = 0; i < N; ++i)
                for (std::size_t m = 0; m < d; ++m)
                    lane[i * d + m] = k.data[((i * G + R) * H + h) * d + m];
            detail::rotate_lane(fs, static_cast<int>(h), pos, N, lane.data(),
                                krot.data() + (R * H + h) * N * d, n);
        }
    Tensor out({N, G, H, dv});
    std::vector<double> srow(N);
    for (std::size_t h = 0; h < H; ++h) {
        for (std::size_t i = 0; i < N; ++i) {
            std::fill(srow.begin(), srow.end(), 0.0);
            for (std::size_t R = 0; R < G; ++R) {
                const double* qi = qrot.data() + ((R * H + h) * N + i) * d;
                const double* kl = krot.data() + (R * H + h) * N * d;
                for (std::size_t j = 0; j < N; ++j) {
                    double s = 0.0;
                    for (std::size_t m = 0; m < d; ++m) s += qi[m] * kl[j * d + m];
                    srow[j] += s * inv_sqrt_d;
                }
            }
            double mx = *std::max_element(srow.begin(), srow.end());
            double z = 0.0;
            for (std::size_t j = 0; j < N; ++j) {
                srow[j] = std::exp(srow[j] - mx);
                z += srow[j];
            }
            for (std::size_t R = 0; R < G; ++R) {
                double* o = out.data.data() + ((i * G + R) * H + h) * dv;
                for (std::size_t j = 0; j < N; ++j) {
                    double w = srow[j] / z;
                    const double* vj = v.data.data() + ((j * G + R) * H + h) * dv;
                    for (std::size_t m = 0; m < dv; ++m) o[m] += w * vj[m];
                }
            }
        }
        opcount::count(static_cast<long long>(G) * N * N * (d + 1 + dv + 1));
    }
    check_finite(out, "invariant_attention");
    return out;
}

/// The dynamic kernel phi_q(dp) = sum_k [a_k cos(w_k.dp) + b_k sin(w_k.dp)]
/// with a_k = q_{2k-1} + q_{2k}, b_k = q_{2k} - q_{2k-1}.
inline double dynamic_kernel_eval(const Tensor& q, const Tensor& dp, const FrequencySet& fs,
                                  int head = 0) {
    if (q.rank() != 1 || q.shape[0] != static_cast<std::size_t>(fs.head_dim))
        throw DimensionError("dynamic_kernel_eval: query length does not match head dimension");
    if (dp.rank() != 1 || dp.shape[0] != static_cast<std::size_t>(fs.dim))
        throw DimensionError("dynamic_kernel_eval: displacement length mismatch");
    double phi = 0.0;
    for (std::size_t kblk = 0; kblk < fs.blocks(); ++kblk) {
        double theta = detail::freq_dot(fs, head, kblk, dp.data.data());
        double a = q.data[2 * kblk] + q.data[2 * kblk + 1];
        double b = q.data[2 * kblk + 1] - q.data[2 * kblk];
        phi += a * std::cos(theta) + b * std::sin(theta);
    }
    return phi;
}

/// Linear-time dynamic group convolution: per frame R and head h,
/// y_i(R,h) = sum_j phi_{q_i(R,h)}(R^{-1}(p_j - p_i)) v_j(R,h), computed by the
/// associativity reordering Y = Q'((K')^T V); no N x N object is materialized.
/// k is only read when cfg.key_mode == learned.
inline Tensor linear_dynamic_conv(const Tensor& q, const Tensor& k, const Tensor& v,
                                  const Tensor& positions, const FiniteGroup& g,
                                  const FrequencySet& fs, const AttentionConfig& cfg) {
    if (cfg.mode != InteractionMode::linear_convolution)
        throw ContractError("linear_dynamic_conv: config mode mismatch");
    detail::check_qkv(q, k, v, positions, g, fs, cfg);
    std::size_t N = q.shape[0], G = g.order(), H = q.shape[2];
    std::size_t d = q.shape[3], dv = v.shape[3];
    std::size_t n = static_cast<std::size_t>(g.dim);
    Tensor pp = detail::project_positions(g, positions);
    Tensor out({N, G, H, dv});
    std::vector<double> lane(N * d), krot(N * d), qrot(N * d), acc(d * dv);
    for (std::size_t R = 0; R < G; ++R) {
        const double* pos = pp.data.data() + R * N * n;
        for (std::size_t h = 0; h < H; ++h) {
            if (cfg.key_mode == KeyMode::constant_ones) {
                detail::ones_key_lane(fs, static_cast<int>(h), pos, N, krot.data(), n);
            } else {
                for (std::size_t j = 0; j < N; ++j)
                    for (std::size_t m = 0; m < d; ++m)
                        lane[j * d + m] = k.data[((j * G + R) * H + h) * d + m];
                detail::rotate_lane(fs, static_cast<int>(h), pos, N, lane.data(), krot.data(), n);
            }
            // (K')^T V accumulator, private per evaluation.
            std::fill(acc.begin(), acc.end(), 0.0);
            for (std::size_t j = 0; j < N; ++j) {
                const double* kj = krot.data() + j * d;
                const double* vj = v.data.data() + ((j * G + R) * H + h) * dv;
                for (std::size_t m = 0; m < d; ++m)
                    for (std::size_t c = 0; c < dv; ++c) acc[m * dv + c] += kj[m] * vj[c];
            }
            for (std::size_t i = 0; i < N; ++i)
                for (std::size_t m = 0; m < d; ++m)
                    lane[i * d + m] = q.data[((i * G + R) * H + h) * d + m];
            detail::rotate_lane(fs, static_cast<int>(h), pos, N, lane.data(), qrot.data(), n);
            for (std::size_t i = 0; i < N; ++i) {
                const double* qi = qrot.data() + i * d;
                double* o = out.data.data() + ((i * G + R) * H + h) * dv;
                for (std::size_t c = 0; c < dv; ++c) {
                    double s = 0.0;
                    for (std::size_t m = 0; m < d; ++m) s += qi[m] * acc[m * dv + c];
                    o[c] = s;
                }
            }
            opcount::count(2 * static_cast<long long>(N) * d * dv);
        }
    }
    check_finite(out, "linear_dynamic_conv");
    return out;
}

}  // namespace platonic
