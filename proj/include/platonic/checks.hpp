#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "platonic/attention.hpp"
#include "platonic/equilinear.hpp"
#include "platonic/fourier.hpp"
#include "platonic/group.hpp"
#include "platonic/model.hpp"
#include "platonic/report.hpp"
#include "platonic/rope.hpp"

namespace platonic {

struct CheckConfig {
    std::vector<std::string> groups = {"trivial3", "flip3", "tetrahedron",
                                       "octahedron", "C4", "D4"};
    std::uint64_t seed = 0;
    std::optional<double> tolerance;  // overrides every floating-point tolerance
    bool inject_fault = false;        // negative control: corrupt one Cayley entry
    int rope_instances = 100;
    int translations = 100;

    double tol(double default_tol) const { return tolerance.value_or(default_tol); }
};

namespace detail {

// Exact polynomial-degree tests on instrumented counts, in integer arithmetic.
inline bool exact_affine_counts(const std::vector<long long>& xs,
                                const std::vector<long long>& ys) {
    for (std::size_t i = 2; i < xs.size(); ++i) {
        __int128 lhs = static_cast<__int128>(ys[i] - ys[0]) * (xs[1] - xs[0]);
        __int128 rhs = static_cast<__int128>(ys[1] - ys[0]) * (xs[i] - xs[0]);
        if (lhs != rhs) return false;
    }
    return true;
}

inline bool exact_quadratic_counts(const std::vector<long long>& xs,
                                   const std::vector<long long>& ys) {
    auto D = [&](std::size_t i) {
        return static_cast<__int128>(ys[i] - ys[0]) * (xs[1] - xs[0]) -
               static_cast<__int128>(ys[1] - ys[0]) * (xs[i] - xs[0]);
    };
    for (std::size_t i = 3; i < xs.size(); ++i) {
        __int128 lhs = D(i) * ((xs[2] - xs[0]) * (xs[2] - xs[1]));
        __int128 rhs = D(2) * ((xs[i] - xs[0]) * (xs[i] - xs[1]));
        if (lhs != rhs) return false;
    }
    return true;
}

inline double rel_diff(const Tensor& got, const Tensor& want) {
    return max_abs_diff(got, want) / std::max(1.0, max_abs(want));
}

}  // namespace detail

/// Brute-force O(N^2) dynamic convolution, the oracle for the factorized path.
inline Tensor naive_dynamic_conv(const Tensor& q, const Tensor& k, const Tensor& v,
                                 const Tensor& positions, const FiniteGroup& g,
                                 const FrequencySet& fs, const AttentionConfig& cfg) {
    std::size_t N = q.shape[0], G = g.order(), H = q.shape[2];
    std::size_t d = q.shape[3], dv = v.shape[3];
    std::size_t n = static_cast<std::size_t>(g.dim);
    Tensor out({N, G, H, dv});
    for (std::size_t R = 0; R < G; ++R) {
        const Tensor& inv = g.elements[static_cast<std::size_t>(g.inverse[R])];
        for (std::size_t h = 0; h < H; ++h)
            for (std::size_t i = 0; i < N; ++i) {
                Tensor qi({d});
                for (std::size_t m = 0; m < d; ++m)
                    qi.data[m] = q.data[((i * G + R) * H + h) * d + m];
                double* o = out.data.data() + ((i * G + R) * H + h) * dv;
                for (std::size_t j = 0; j < N; ++j) {
                    Tensor dp({n});
                    for (std::size_t a = 0; a < n; ++a)
                        for (std::size_t b = 0; b < n; ++b)
                            dp.data[a] += inv.data[a * n + b] *
                                          (positions.data[j * n + b] - positions.data[i * n + b]);
                    double w;
                    if (cfg.key_mode == KeyMode::constant_ones) {
                        w = dynamic_kernel_eval(qi, dp, fs, static_cast<int>(h));
                    } else {
                        Tensor kj({d});
                        for (std::size_t m = 0; m < d; ++m)
                            kj.data[m] = k.data[((j * G + R) * H + h) * d + m];
                        Tensor zi({n}), zj = dp;
                        w = rope_score(qi, kj, zi, zj, fs, static_cast<int>(h));
                    }
                    const double* vj = v.data.data() + ((j * G + R) * H + h) * dv;
                    for (std::size_t m = 0; m < dv; ++m) o[m] += w * vj[m];
                }
            }
    }
    return out;
}

namespace suites {

inline void group_algebra(Report& report, const CheckConfig& cfg) {
    static const std::map<std::string, std::size_t> expected_orders = {
        {"trivial2", 1}, {"trivial3", 1}, {"flip2", 2},       {"flip3", 2},
        {"signflips3", 8}, {"C4", 4},     {"C6", 6},          {"D4", 8},
        {"D6", 12},      {"tetrahedron", 12}, {"octahedron", 24}, {"icosahedron", 60}};
    for (const std::string& name : cfg.groups) {
        run_check(report, "group_algebra/" + name, 0.0, [&]() {
            FiniteGroup g = build_group(name);
            validate_group(g);
            auto it = expected_orders.find(name);
            if (it != expected_orders.end() && g.order() != it->second)
                throw ConstructionError(name + ": order " + std::to_string(g.order()) +
                                        " != expected " + std::to_string(it->second));
            return 0.0;
        });
    }
}

inline void rope_laws(Report& report, const CheckConfig& cfg) {
    for (const std::string& name : cfg.groups) {
        run_check(report, "rope_laws/" + name, cfg.tol(1e-12), [&]() {
            FiniteGroup g = build_group(name);
            std::mt19937_64 rng(cfg.seed + 17);
            FrequencySet fs = make_frequencies(g.dim, 8, 1, 1.0, cfg.seed + 23);
            std::size_t n = static_cast<std::size_t>(g.dim);
            double worst = 0.0;
            for (std::size_t e = 0; e < g.order(); ++e)
                for (int inst = 0; inst < cfg.rope_instances; ++inst) {
                    Tensor p1 = Tensor::uniform({n}, rng), p2 = Tensor::uniform({n}, rng);
                    Tensor t = Tensor::uniform({n}, rng, -2.0, 2.0);
                    Tensor x = Tensor::uniform({8}, rng), q = Tensor::uniform({8}, rng);
                    Tensor k = Tensor::uniform({8}, rng);
                    // homomorphism
                    Tensor lhs = apply_rope(fs, add(p1, p2), x);
                    Tensor rhs = apply_rope(fs, p1, apply_rope(fs, p2, x));
                    worst = std::max(worst, max_abs_diff(lhs, rhs));
                    // orthogonality: rho(-p) rho(p) = I and norm preservation
                    Tensor back = apply_rope(fs, scale(p1, -1.0), apply_rope(fs, p1, x));
                    worst = std::max(worst, max_abs_diff(back, x));
                    double nx = 0.0, nr = 0.0;
                    Tensor rx = apply_rope(fs, p1, x);
                    for (std::size_t m = 0; m < 8; ++m) {
                        nx += x.data[m] * x.data[m];
                        nr += rx.data[m] * rx.data[m];
                    }
                    worst = std::max(worst, std::abs(nx - nr));
                    // translation invariance of scores
                    double s0 = rope_score(q, k, p1, p2, fs);
                    double s1 = rope_score(q, k, add(p1, t), add(p2, t), fs);
                    worst = std::max(worst, std::abs(s0 - s1));
                    // frequency steering vs frame projection
                    FrequencySet steered = steer_frequencies(fs, g, static_cast<int>(e));
                    Tensor pi = apply_inverse_element(g, static_cast<int>(e), p1);
                    Tensor pj = apply_inverse_element(g, static_cast<int>(e), p2);
                    double sp = rope_score(q, k, pi, pj, fs);
                    double ss = rope_score(q, k, p1, p2, steered);
                    worst = std::max(worst, std::abs(sp - ss));
                }
            return worst;
        });
    }
}

inline void group_conv(Report& report, const CheckConfig& cfg) {
    for (const std::string& name : cfg.groups) {
        run_check(report, "group_conv/" + name, cfg.tol(1e-12), [&]() {
            FiniteGroup g = build_group(name);
            std::mt19937_64 rng(cfg.seed + 31);
            std::size_t G = g.order(), co = 3, ci = 5, N = 4;
            GroupKernel k = make_group_kernel(g, co, ci, rng);
            if (k.parameter_count() != G * co * ci)
                throw ContractError("group kernel parameter count mismatch");
            Tensor f = Tensor::uniform({N, G, ci}, rng);
            Tensor via_conv = group_conv_apply(k, f);
            Tensor expanded = expand_structured(k);
            Tensor via_dense = reshape(
                matmul(reshape(f, {N, G * ci}), permute(expanded, {1, 0})), {N, G, co});
            return max_abs_diff(via_conv, via_dense);
        });
        run_check(report, "group_conv_equivariance/" + name, cfg.tol(1e-10), [&]() {
            FiniteGroup g = build_group(name);
            std::mt19937_64 rng(cfg.seed + 37);
            GroupKernel k = make_group_kernel(g, 3, 5, rng, /*with_bias=*/true);
            for (double& b : k.bias->data) b = std::uniform_real_distribution<>(-1, 1)(rng);
            Tensor f = Tensor::uniform({4, g.order(), 5}, rng);
            Tensor base = group_conv_apply(k, f);
            double worst = 0.0;
            for (std::size_t e = 0; e < g.order(); ++e) {
                Tensor lhs = group_conv_apply(k, act_on_group_axis(g, static_cast<int>(e), f));
                Tensor rhs = act_on_group_axis(g, static_cast<int>(e), base);
                worst = std::max(worst, max_abs_diff(lhs, rhs));
            }
            return worst;
        });
    }
}

inline void fourier(Report& report, const CheckConfig& cfg) {
    run_check(report, "fourier/block_dims", 0.0, [&]() {
        // 1 + 2 + 3x3 = 12 columns by construction; the basis builder verifies
        // the conjugated blocks, so reaching here means the decomposition holds.
        FiniteGroup g = build_group("tetrahedron");
        TetraFourierBasis basis = build_tetra_fourier_basis(g);
        std::size_t dims = 1 + 2 + 9;
        if (dims != basis.q_basis.shape[0] || basis.q_basis.shape[0] != 12)
            throw StructureError("irrep dimensions do not sum to the group order");
        return 0.0;
    });
    run_check(report, "fourier/spatial_agreement", cfg.tol(1e-10), [&]() {
        FiniteGroup g = build_group("tetrahedron");
        TetraFourierBasis basis = build_tetra_fourier_basis(g);
        std::mt19937_64 rng(cfg.seed + 41);
        GroupKernel k = make_group_kernel(g, 6, 8, rng, /*with_bias=*/true);
        for (double& b : k.bias->data) b = std::uniform_real_distribution<>(-1, 1)(rng);
        FourierKernel fk = kernel_to_fourier(k, basis);
        Tensor f = Tensor::uniform({5, 12, 8}, rng);
        return max_abs_diff(group_conv_apply(k, f), fourier_conv_apply(fk, basis, f));
    });
    run_check(report, "fourier/kernel_round_trip", cfg.tol(1e-10), [&]() {
        FiniteGroup g = build_group("tetrahedron");
        TetraFourierBasis basis = build_tetra_fourier_basis(g);
        std::mt19937_64 rng(cfg.seed + 43);
        GroupKernel k = make_group_kernel(g, 4, 7, rng);
        GroupKernel back = fourier_to_kernel(kernel_to_fourier(k, basis), basis);
        return max_abs_diff(k.w, back.w);
    });
    run_check(report, "fourier/parameter_identity", 0.0, [&]() {
        FiniteGroup g = build_group("tetrahedron");
        TetraFourierBasis basis = build_tetra_fourier_basis(g);
        std::mt19937_64 rng(cfg.seed + 47);
        GroupKernel k = make_group_kernel(g, 6, 9, rng);
        FourierKernel fk = kernel_to_fourier(k, basis);
        return fk.parameter_count() == 12 * 6 * 9 ? 0.0 : 1.0;
    });
    run_check(report, "fourier/multiply_ratio", 0.0, [&]() {
        FiniteGroup g = build_group("tetrahedron");
        TetraFourierBasis basis = build_tetra_fourier_basis(g);
        std::mt19937_64 rng(cfg.seed + 53);
        double worst = 0.0;
        for (std::size_t c : {8ul, 12ul, 16ul}) {
            GroupKernel k = make_group_kernel(g, c, c, rng);
            FourierKernel fk = kernel_to_fourier(k, basis);
            Tensor f = Tensor::uniform({3, 12, c}, rng);
            opcount::reset();
            group_conv_apply(k, f);
            long long spatial = opcount::multiplies;
            opcount::reset();
            fourier_conv_apply(fk, basis, f);
            long long block = opcount::multiplies;
            if (spatial != 4 * block) worst = 1.0;
        }
        return worst;
    });
}

inline void dynamic_kernel(Report& report, const CheckConfig& cfg) {
    run_check(report, "dynamic_kernel/matrix_form", cfg.tol(1e-12), [&]() {
        std::mt19937_64 rng(cfg.seed + 59);
        FrequencySet fs = make_frequencies(3, 8, 1, 1.0, cfg.seed + 61);
        double worst = 0.0;
        for (int inst = 0; inst < 200; ++inst) {
            Tensor q = Tensor::uniform({8}, rng), dp = Tensor::uniform({3}, rng, -2.0, 2.0);
            Tensor ones = Tensor::full({8}, 1.0);
            Tensor rot = apply_rope(fs, dp, ones);
            double matrix_form = 0.0;
            for (std::size_t m = 0; m < 8; ++m) matrix_form += q.data[m] * rot.data[m];
            worst = std::max(worst, std::abs(dynamic_kernel_eval(q, dp, fs) - matrix_form));
        }
        // hand case: d = 2, q = (1, 0), dp = 0 -> phi = 1; q = 0 -> phi = 0
        FrequencySet fs2 = make_frequencies(3, 2, 1, 1.0, cfg.seed + 67);
        Tensor q2({2});
        q2.data[0] = 1.0;
        worst = std::max(worst, std::abs(dynamic_kernel_eval(q2, Tensor({3}), fs2) - 1.0));
        worst = std::max(
            worst, std::abs(dynamic_kernel_eval(Tensor({2}), Tensor::uniform({3}, rng), fs2)));
        return worst;
    });
    for (const std::string name : {"trivial3", "flip3", "tetrahedron", "octahedron"}) {
        run_check(report, "dynamic_conv_naive/" + std::string(name), cfg.tol(1e-10), [&]() {
            FiniteGroup g = build_group(name);
            std::mt19937_64 rng(cfg.seed + 71);
            AttentionConfig acfg;
            acfg.heads = 2;
            acfg.head_dim = 4;
            acfg.mode = InteractionMode::linear_convolution;
            FrequencySet fs = make_frequencies(g.dim, 4, 2, 1.0, cfg.seed + 73);
            double worst = 0.0;
            for (std::size_t N : {1ul, 2ul, 8ul, 64ul}) {
                Tensor q = Tensor::uniform({N, g.order(), 2, 4}, rng);
                Tensor k = Tensor::uniform({N, g.order(), 2, 4}, rng);
                Tensor v = Tensor::uniform({N, g.order(), 2, 4}, rng);
                Tensor pos = Tensor::uniform({N, static_cast<std::size_t>(g.dim)}, rng);
                for (KeyMode km : {KeyMode::constant_ones, KeyMode::learned}) {
                    acfg.key_mode = km;
                    Tensor fast = linear_dynamic_conv(q, k, v, pos, g, fs, acfg);
                    Tensor slow = naive_dynamic_conv(q, k, v, pos, g, fs, acfg);
                    worst = std::max(worst, max_abs_diff(fast, slow));
                }
            }
            return worst;
        });
    }
    run_check(report, "dynamic_conv/multiply_count_affine", 0.0, [&]() {
        FiniteGroup g = build_group("tetrahedron");
        std::mt19937_64 rng(cfg.seed + 79);
        AttentionConfig acfg;
        acfg.heads = 1;
        acfg.head_dim = 4;
        acfg.mode = InteractionMode::linear_convolution;
        FrequencySet fs = make_frequencies(3, 4, 1, 1.0, cfg.seed + 83);
        std::vector<long long> xs, ys, ys2;
        for (std::size_t N : {5ul, 11ul, 24ul, 64ul, 97ul}) {
            Tensor q = Tensor::uniform({N, g.order(), 1, 4}, rng);
            Tensor v = Tensor::uniform({N, g.order(), 1, 4}, rng);
            Tensor pos = Tensor::uniform({N, 3}, rng);
            opcount::reset();
            linear_dynamic_conv(q, q, v, pos, g, fs, acfg);
            xs.push_back(static_cast<long long>(N));
            ys.push_back(opcount::multiplies);
            acfg.mode = InteractionMode::softmax_attention;
            acfg.score = ScoreMode::equivariant;
            opcount::reset();
            equivariant_attention(q, q, v, pos, g, fs, acfg);
            ys2.push_back(opcount::multiplies);
            acfg.mode = InteractionMode::linear_convolution;
        }
        bool linear_ok = detail::exact_affine_counts(xs, ys);
        bool quad_ok = detail::exact_quadratic_counts(xs, ys2) &&
                       !detail::exact_affine_counts(xs, ys2);
        return linear_ok && quad_ok ? 0.0 : 1.0;
    });
}

inline void attention_props(Report& report, const CheckConfig& cfg) {
    run_check(report, "attention/softmax_rows_normalized", cfg.tol(1e-12), [&]() {
        // all-ones values expose the row sums of the attention weights
        FiniteGroup g = build_group("tetrahedron");
        std::mt19937_64 rng(cfg.seed + 89);
        AttentionConfig acfg;
        acfg.heads = 2;
        acfg.head_dim = 4;
        FrequencySet fs = make_frequencies(3, 4, 2, 1.0, cfg.seed + 97);
        std::size_t N = 7;
        Tensor q = Tensor::uniform({N, g.order(), 2, 4}, rng);
        Tensor k = Tensor::uniform({N, g.order(), 2, 4}, rng);
        Tensor v = Tensor::full({N, g.order(), 2, 4}, 1.0);
        Tensor pos = Tensor::uniform({N, 3}, rng);
        Tensor out = equivariant_attention(q, k, v, pos, g, fs, acfg);
        return max_abs_diff(out, v);
    });
    run_check(report, "attention/single_key_identity", cfg.tol(1e-12), [&]() {
        FiniteGroup g = build_group("trivial3");
        std::mt19937_64 rng(cfg.seed + 101);
        AttentionConfig acfg;
        acfg.heads = 1;
        acfg.head_dim = 4;
        FrequencySet fs = make_frequencies(3, 4, 1, 1.0, cfg.seed + 103);
        Tensor q = Tensor::uniform({1, 1, 1, 4}, rng), k = Tensor::uniform({1, 1, 1, 4}, rng);
        Tensor v = Tensor::uniform({1, 1, 1, 4}, rng), pos = Tensor::uniform({1, 3}, rng);
        return max_abs_diff(equivariant_attention(q, k, v, pos, g, fs, acfg), v);
    });
    run_check(report, "attention/trivial_group_inv_equals_equi", cfg.tol(1e-12), [&]() {
        FiniteGroup g = build_group("trivial3");
        std::mt19937_64 rng(cfg.seed + 107);
        AttentionConfig acfg;
        acfg.heads = 2;
        acfg.head_dim = 4;
        FrequencySet fs = make_frequencies(3, 4, 2, 1.0, cfg.seed + 109);
        std::size_t N = 9;
        Tensor q = Tensor::uniform({N, 1, 2, 4}, rng), k = Tensor::uniform({N, 1, 2, 4}, rng);
        Tensor v = Tensor::uniform({N, 1, 2, 4}, rng), pos = Tensor::uniform({N, 3}, rng);
        Tensor a = equivariant_attention(q, k, v, pos, g, fs, acfg);
        acfg.score = ScoreMode::invariant;
        Tensor b = invariant_attention(q, k, v, pos, g, fs, acfg);
        return max_abs_diff(a, b);
    });
    run_check(report, "attention/invariant_weights_frame_agnostic", cfg.tol(1e-12), [&]() {
        // frame-constant values must produce frame-constant outputs
        FiniteGroup g = build_group("tetrahedron");
        std::mt19937_64 rng(cfg.seed + 113);
        AttentionConfig acfg;
        acfg.heads = 1;
        acfg.head_dim = 4;
        acfg.score = ScoreMode::invariant;
        FrequencySet fs = make_frequencies(3, 4, 1, 1.0, cfg.seed + 127);
        std::size_t N = 6, G = g.order();
        Tensor q = Tensor::uniform({N, G, 1, 4}, rng), k = Tensor::uniform({N, G, 1, 4}, rng);
        Tensor pos = Tensor::uniform({N, 3}, rng);
        Tensor v({N, G, 1, 4});
        std::mt19937_64 rng2(cfg.seed + 131);
        for (std::size_t i = 0; i < N; ++i) {
            Tensor row = Tensor::uniform({4}, rng2);
            for (std::size_t R = 0; R < G; ++R)
                for (std::size_t m = 0; m < 4; ++m) v.data[((i * G + R) * 1) * 4 + m] = row.data[m];
        }
        Tensor out = invariant_attention(q, k, v, pos, g, fs, acfg);
        double worst = 0.0;
        for (std::size_t i = 0; i < N; ++i)
            for (std::size_t R = 1; R < G; ++R)
                for (std::size_t m = 0; m < 4; ++m)
                    worst = std::max(worst, std::abs(out.data[(i * G + R) * 4 + m] -
                                                     out.data[(i * G) * 4 + m]));
        return worst;
    });
    for (const char* which : {"equivariant", "invariant", "linear"}) {
        run_check(report, std::string("attention/equivariance_") + which, cfg.tol(1e-10), [&]() {
            FiniteGroup g = build_group("tetrahedron");
            std::mt19937_64 rng(cfg.seed + 137);
            AttentionConfig acfg;
            acfg.heads = 2;
            acfg.head_dim = 4;
            std::string w = which;
            if (w == "invariant") acfg.score = ScoreMode::invariant;
            if (w == "linear") acfg.mode = InteractionMode::linear_convolution;
            FrequencySet fs = make_frequencies(3, 4, 2, 1.0, cfg.seed + 139);
            std::size_t N = 6, G = g.order(), n = 3;
            Tensor q = Tensor::uniform({N, G, 2, 4}, rng), k = Tensor::uniform({N, G, 2, 4}, rng);
            Tensor v = Tensor::uniform({N, G, 2, 4}, rng), pos = Tensor::uniform({N, n}, rng);
            auto apply = [&](const Tensor& qq, const Tensor& kk, const Tensor& vv,
                             const Tensor& pp) {
                if (w == "equivariant") return equivariant_attention(qq, kk, vv, pp, g, fs, acfg);
                if (w == "invariant") return invariant_attention(qq, kk, vv, pp, g, fs, acfg);
                return linear_dynamic_conv(qq, kk, vv, pp, g, fs, acfg);
            };
            Tensor base = apply(q, k, v, pos);
            double worst = 0.0;
            Tensor tvec = Tensor::uniform({n}, rng, -3.0, 3.0);
            Tensor tpos = pos;
            for (std::size_t i = 0; i < N; ++i)
                for (std::size_t a = 0; a < n; ++a) tpos.data[i * n + a] += tvec.data[a];
            worst = std::max(worst, max_abs_diff(apply(q, k, v, tpos), base));
            for (std::size_t e = 0; e < G; ++e) {
                Tensor rpos({N, n});
                const Tensor& R = g.elements[e];
                for (std::size_t i = 0; i < N; ++i)
                    for (std::size_t a = 0; a < n; ++a)
                        for (std::size_t b = 0; b < n; ++b)
                            rpos.data[i * n + a] += R.data[a * n + b] * pos.data[i * n + b];
                Tensor lhs = apply(act_on_group_axis(g, static_cast<int>(e), q),
                                   act_on_group_axis(g, static_cast<int>(e), k),
                                   act_on_group_axis(g, static_cast<int>(e), v), rpos);
                Tensor rhs = act_on_group_axis(g, static_cast<int>(e), base);
                worst = std::max(worst, max_abs_diff(lhs, rhs));
            }
            return worst;
        });
    }
}

inline void model_props(Report& report, const CheckConfig& cfg) {
    run_check(report, "model/graph_invariance", cfg.tol(1e-9), [&]() {
        ModelConfig mc;
        mc.seed = cfg.seed;
        Model m(mc);
        std::mt19937_64 rng(cfg.seed + 149);
        PointCloud pc;
        pc.positions = Tensor::uniform({8, 3}, rng);
        pc.scalars = Tensor::uniform({8, 1}, rng);
        Tensor base = m.predict(pc);
        double worst = 0.0;
        for (std::size_t e = 0; e < m.group().order(); ++e)
            worst = std::max(worst,
                             detail::rel_diff(m.predict(rotate_cloud(m.group(), static_cast<int>(e), pc)), base));
        for (int t = 0; t < cfg.translations; ++t)
            worst = std::max(worst, detail::rel_diff(
                m.predict(translate_cloud(pc, Tensor::uniform({3}, rng, -5.0, 5.0))), base));
        return worst;
    });
    run_check(report, "model/node_vector_rotation", cfg.tol(1e-9), [&]() {
        ModelConfig mc;
        mc.seed = cfg.seed + 1;
        mc.readout = ReadoutMode::node_scalar_vector;
        mc.vector_in = 1;
        mc.vector_out = 1;
        Model m(mc);
        std::mt19937_64 rng(cfg.seed + 151);
        PointCloud pc;
        pc.positions = Tensor::uniform({6, 3}, rng);
        pc.scalars = Tensor::uniform({6, 1}, rng);
        pc.vectors = Tensor::uniform({6, 1, 3}, rng);
        auto [s0, v0] = m.predict_nodes(pc);
        double worst = 0.0;
        const FiniteGroup& g = m.group();
        for (std::size_t e = 0; e < g.order(); ++e) {
            auto [s1, v1] = m.predict_nodes(rotate_cloud(g, static_cast<int>(e), pc));
            worst = std::max(worst, detail::rel_diff(s1, s0));
            Tensor want(v0.shape);
            for (std::size_t p = 0; p < 6; ++p)
                for (int a = 0; a < 3; ++a)
                    for (int b = 0; b < 3; ++b)
                        want.data[p * 3 + a] +=
                            g.elements[e].data[a * 3 + b] * v0.data[p * 3 + b];
            worst = std::max(worst, detail::rel_diff(v1, want));
        }
        return worst;
    });
    run_check(report, "model/permutation_equivariance", cfg.tol(1e-12), [&]() {
        ModelConfig mc;
        mc.seed = cfg.seed + 2;
        mc.readout = ReadoutMode::node_scalar_vector;
        Model m(mc);
        std::mt19937_64 rng(cfg.seed + 157);
        std::size_t N = 7;
        PointCloud pc;
        pc.positions = Tensor::uniform({N, 3}, rng);
        pc.scalars = Tensor::uniform({N, 1}, rng);
        std::vector<std::size_t> perm(N);
        for (std::size_t i = 0; i < N; ++i) perm[i] = (i + 3) % N;
        PointCloud ppc;
        ppc.positions = gather(pc.positions, 0, perm);
        ppc.scalars = gather(pc.scalars, 0, perm);
        auto [s0, v0] = m.predict_nodes(pc);
        auto [s1, v1] = m.predict_nodes(ppc);
        return max_abs_diff(s1, gather(s0, 0, perm));
    });
    run_check(report, "model/gradient_check", cfg.tol(1e-4), [&]() {
        ModelConfig mc;
        mc.seed = cfg.seed + 3;
        mc.channels = 4;
        mc.heads = 2;
        Model m(mc);
        std::mt19937_64 rng(cfg.seed + 163);
        PointCloud pc;
        pc.positions = Tensor::uniform({3, 3}, rng);
        pc.scalars = Tensor::uniform({3, 1}, rng);
        auto loss_of = [&]() {
            auto r = m.forward(pc);
            Tape::Handle l = r.tape->sum_all(r.tape->mul(r.output, r.output));
            double val = r.tape->value(l).data[0];
            return std::tuple(std::move(r), l, val);
        };
        auto [r, l, f0] = loss_of();
        r.tape->backward(l);
        double h = 1e-5, worst = 0.0;
        for (const std::string& name : m.parameter_names()) {
            Tensor& p = m.parameter(name);
            const Tensor& grad = r.tape->grad(r.param_handles.at(name));
            for (std::size_t probe = 0; probe < std::min<std::size_t>(p.numel(), 2); ++probe) {
                std::size_t j = (probe * 7919 + 1) % p.numel();
                double orig = p.data[j];
                p.data[j] = orig + h;
                double fp = std::get<2>(loss_of());
                p.data[j] = orig - h;
                double fm = std::get<2>(loss_of());
                p.data[j] = orig;
                double fd = (fp - fm) / (2.0 * h);
                double an = grad.numel() ? grad.data[j] : 0.0;
                worst = std::max(worst,
                                 std::abs(fd - an) / std::max({1.0, std::abs(fd), std::abs(an)}));
            }
        }
        return worst;
    });
}

inline void negative_controls(Report& report, const CheckConfig& cfg) {
    if (!cfg.inject_fault) return;
    run_check(report, "negative_control/cayley_fault_detected", 0.0, [&]() {
        FiniteGroup g = build_group("flip3");
        g.cayley[1][1] = 1;  // deliberately break the Latin square
        try {
            validate_group(g);
        } catch (const ConstructionError&) {
            return 0.0;  // fault detected, control passes
        }
        return 1.0;
    });
}

}  // namespace suites

inline Report run_all_checks(const CheckConfig& cfg) {
    Report report;
    suites::group_algebra(report, cfg);
    suites::rope_laws(report, cfg);
    suites::group_conv(report, cfg);
    suites::fourier(report, cfg);
    suites::dynamic_kernel(report, cfg);
    suites::attention_props(report, cfg);
    suites::model_props(report, cfg);
    suites::negative_controls(report, cfg);
    return report;
}

}  // namespace platonic
