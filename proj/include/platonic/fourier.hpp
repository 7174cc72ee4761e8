#pragma once

#include <array>
#include <optional>

#include "platonic/equilinear.hpp"
#include "platonic/group.hpp"
#include "platonic/tensor.hpp"

namespace platonic {

/// Orthogonal change of basis diagonalizing the tetrahedral regular
/// representation into its irrep blocks: rho1 (dim 1), rho2 (dim 2, complex
/// type), and three copies of rho3 (dim 3).
struct TetraFourierBasis {
    const FiniteGroup* group = nullptr;
    Tensor q_basis;                    // (12, 12), columns ordered [rho1 | rho2 | rho3 x3]
    std::vector<int> rho2_angle_sign;  // per element: 0, +1 (chosen 2pi/3 class), or -1
    int plus_class_representative = -1;

    // Block layout along the Fourier axis.
    static constexpr std::size_t kRho1Offset = 0;
    static constexpr std::size_t kRho2Offset = 1;
    static constexpr std::size_t kRho3Offset = 3;
};

namespace detail {

// Regular representation permutation matrix of element i:
// (P_i f)_j = f_{cayley[inverse[i], j]}.
inline Tensor regular_rep_matrix(const FiniteGroup& g, int i) {
    std::size_t n = g.order();
    Tensor P({n, n});
    for (std::size_t j = 0; j < n; ++j)
        P.data[j * n + static_cast<std::size_t>(g.cayley[g.inverse[i]][j])] = 1.0;
    return P;
}

inline int element_order(const FiniteGroup& g, int i) {
    int acc = i, ord = 1;
    while (acc != 0) {
        acc = g.cayley[acc][i];
        ++ord;
    }
    return ord;
}

inline std::vector<int> conjugacy_class(const FiniteGroup& g, int a) {
    std::vector<bool> in(g.order(), false);
    for (std::size_t h = 0; h < g.order(); ++h)
        in[static_cast<std::size_t>(g.cayley[g.cayley[h][a]][g.inverse[h]])] = true;
    std::vector<int> cls;
    for (std::size_t i = 0; i < g.order(); ++i)
        if (in[i]) cls.push_back(static_cast<int>(i));
    return cls;
}

}  // namespace detail

/// Build the tetrahedral Fourier basis by isotypic projection. One of the two
/// 2pi/3 conjugacy classes is assigned the +2pi/3 value of rho2; we pick the
/// class containing the lowest-index order-3 element.
inline TetraFourierBasis build_tetra_fourier_basis(const FiniteGroup& g) {
    if (g.name != "tetrahedron" || g.order() != 12)
        throw ContractError("build_tetra_fourier_basis: requires the tetrahedral group, got " +
                            g.name);
    const std::size_t n = 12;
    TetraFourierBasis basis;
    basis.group = &g;

    std::vector<Tensor> P(n);
    for (std::size_t i = 0; i < n; ++i) P[i] = detail::regular_rep_matrix(g, static_cast<int>(i));

    // Split the 2pi/3 rotations into the two mutually inverse classes.
    basis.rho2_angle_sign.assign(n, 0);
    int first_order3 = -1;
    for (std::size_t i = 0; i < n; ++i)
        if (detail::element_order(g, static_cast<int>(i)) == 3) {
            first_order3 = static_cast<int>(i);
            break;
        }
    basis.plus_class_representative = first_order3;
    for (int e : detail::conjugacy_class(g, first_order3)) basis.rho2_angle_sign[e] = +1;
    for (std::size_t i = 0; i < n; ++i)
        if (detail::element_order(g, static_cast<int>(i)) == 3 && basis.rho2_angle_sign[i] == 0)
            basis.rho2_angle_sign[i] = -1;

    Tensor Q({n, n});
    auto set_col = [&](std::size_t col, const Tensor& v) {
        for (std::size_t r = 0; r < n; ++r) Q.data[r * n + col] = v.data[r];
    };

    // rho1: the normalized all-ones vector.
    set_col(0, Tensor::full({n}, 1.0 / std::sqrt(static_cast<double>(n))));

    // rho2: isotypic projector (1/|G|) sum_g chi2(g) P_g with
    // chi2 = 2 cos(theta_g); theta in {0, +-2pi/3}.
    {
        Tensor E2({n, n});
        for (std::size_t i = 0; i < n; ++i) {
            double chi = basis.rho2_angle_sign[i] == 0 ? 2.0 : -1.0;
            for (std::size_t m = 0; m < n * n; ++m) E2.data[m] += chi / n * P[i].data[m];
        }
        // Pick the strongest column of the rank-2 projector as u1.
        std::size_t best = 0;
        double best_norm = -1.0;
        for (std::size_t c = 0; c < n; ++c) {
            double s = 0.0;
            for (std::size_t r = 0; r < n; ++r) s += E2.data[r * n + c] * E2.data[r * n + c];
            if (s > best_norm) {
                best_norm = s;
                best = c;
            }
        }
        Tensor u1({n});
        for (std::size_t r = 0; r < n; ++r) u1.data[r] = E2.data[r * n + best];
        u1 = scale(u1, 1.0 / std::sqrt(best_norm));
        // Orient u2 so the chosen class acts as rotation by +2pi/3.
        Tensor gu = matmul(P[first_order3], reshape(u1, {n, 1}));
        double c = std::cos(2.0 * M_PI / 3.0), s = std::sin(2.0 * M_PI / 3.0);
        Tensor u2({n});
        for (std::size_t r = 0; r < n; ++r) u2.data[r] = (gu.data[r] - c * u1.data[r]) / s;
        set_col(1, u1);
        set_col(2, u2);
    }

    // rho3: matrix-unit operators e_{k0} = (3/|G|) sum_g rho3(g)_{k0} P_g, with
    // rho3(g) = the element matrix itself. Copies come from an orthonormal
    // basis of range(e_{00}).
    {
        std::array<Tensor, 3> ek0;
        for (int k = 0; k < 3; ++k) {
            ek0[k] = Tensor({n, n});
            for (std::size_t i = 0; i < n; ++i) {
                double coef = 3.0 / n * g.elements[i].data[k * 3 + 0];
                if (coef == 0.0) continue;
                for (std::size_t m = 0; m < n * n; ++m) ek0[k].data[m] += coef * P[i].data[m];
            }
        }
        // Gram-Schmidt over the columns of e_{00} to get the 3 multiplicity vectors.
        std::vector<Tensor> vs;
        for (std::size_t c = 0; c < n && vs.size() < 3; ++c) {
            Tensor v({n});
            for (std::size_t r = 0; r < n; ++r) v.data[r] = ek0[0].data[r * n + c];
            for (const Tensor& u : vs) {
                double dot = 0.0;
                for (std::size_t r = 0; r < n; ++r) dot += u.data[r] * v.data[r];
                for (std::size_t r = 0; r < n; ++r) v.data[r] -= dot * u.data[r];
            }
            double nv = 0.0;
            for (std::size_t r = 0; r < n; ++r) nv += v.data[r] * v.data[r];
            if (nv < 1e-8) continue;
            vs.push_back(scale(v, 1.0 / std::sqrt(nv)));
        }
        if (vs.size() != 3)
            throw ConstructionError("tetra Fourier basis: rho3 multiplicity space is not 3-dim");
        for (std::size_t m = 0; m < 3; ++m)
            for (int k = 0; k < 3; ++k) {
                Tensor w = reshape(matmul(ek0[k], reshape(vs[m], {n, 1})), {n});
                set_col(3 + 3 * m + k, w);
            }
    }

    basis.q_basis = Q;

    // Validate: Q orthogonal, and every conjugated element is block-diagonal
    // with blocks exactly [1, rho2(g), R_g, R_g, R_g].
    Tensor qtq = matmul(permute(Q, {1, 0}), Q);
    if (max_abs_diff(qtq, detail::identity(static_cast<int>(n))) > 1e-10)
        throw ConstructionError("tetra Fourier basis: Q is not orthogonal");
    for (std::size_t i = 0; i < n; ++i) {
        Tensor B = matmul(permute(Q, {1, 0}), matmul(P[i], Q));
        Tensor expect({n, n});
        expect.data[0] = 1.0;
        double theta = basis.rho2_angle_sign[i] * 2.0 * M_PI / 3.0;
        expect.data[1 * n + 1] = std::cos(theta);
        expect.data[1 * n + 2] = -std::sin(theta);
        expect.data[2 * n + 1] = std::sin(theta);
        expect.data[2 * n + 2] = std::cos(theta);
        for (std::size_t m = 0; m < 3; ++m)
            for (int r = 0; r < 3; ++r)
                for (int c = 0; c < 3; ++c)
                    expect.data[(3 + 3 * m + r) * n + (3 + 3 * m + c)] =
                        g.elements[i].data[r * 3 + c];
        if (max_abs_diff(B, expect) > 1e-9)
            throw ConstructionError("tetra Fourier basis: block-diagonalization residual too large");
    }
    return basis;
}

/// The four-block Fourier-domain form of a tetrahedral group-convolution
/// kernel: a merged rho1/rho2 sector plus one 3C' x 3C matrix shared by the
/// three rho3 lanes. Free parameters: 12 C' C, matching GroupKernel.
struct FourierKernel {
    std::size_t c_out = 0, c_in = 0;
    Tensor w1;   // (C', C)  rho1 sector
    Tensor w21;  // (C', C)  rho2 commutant, a*I part
    Tensor w22;  // (C', C)  rho2 commutant, b*J part
    Tensor w3;   // (3C', 3C) rho3 multiplicity mixing, indexed (copy, channel)
    std::optional<Tensor> bias;  // (C'), frame-constant, applied in the spatial domain

    std::size_t parameter_count() const {
        return w1.numel() + w21.numel() + w22.numel() + w3.numel() + (bias ? bias->numel() : 0);
    }
};

namespace detail {

// T_hat = (Q (x) I)^T T (Q (x) I) for a (12 c_out) x (12 c_in) block matrix.
inline Tensor conjugate_by_basis(const Tensor& T, const Tensor& Q, std::size_t c_out,
                                 std::size_t c_in, bool forward) {
    const std::size_t n = 12;
    Tensor out({n * c_out, n * c_in});
    // out[(q',a),(q,b)] = sum_{r',r} Q[r',q'] T[(r',a),(r,b)] Q[r,q]   (forward)
    // inverse direction swaps the roles of rows/cols of Q.
    Tensor tmp({n * c_out, n * c_in});
    for (std::size_t qp = 0; qp < n; ++qp)
        for (std::size_t rp = 0; rp < n; ++rp) {
            double qv = forward ? Q.data[rp * n + qp] : Q.data[qp * n + rp];
            if (qv == 0.0) continue;
            for (std::size_t a = 0; a < c_out; ++a) {
                const double* src = T.data.data() + (rp * c_out + a) * n * c_in;
                double* dst = tmp.data.data() + (qp * c_out + a) * n * c_in;
                for (std::size_t m = 0; m < n * c_in; ++m) dst[m] += qv * src[m];
            }
        }
    for (std::size_t q = 0; q < n; ++q)
        for (std::size_t r = 0; r < n; ++r) {
            double qv = forward ? Q.data[r * n + q] : Q.data[q * n + r];
            if (qv == 0.0) continue;
            for (std::size_t row = 0; row < n * c_out; ++row) {
                const double* src = tmp.data.data() + row * n * c_in + r * c_in;
                double* dst = out.data.data() + row * n * c_in + q * c_in;
                for (std::size_t b = 0; b < c_in; ++b) dst[b] += qv * src[b];
            }
        }
    return out;
}

}  // namespace detail

/// Convert a tetrahedral GroupKernel to its Fourier block form. Throws
/// StructureError if the conjugated matrix is not block-diagonal with the
/// rho2 commutant constraint (i.e. the input was not equivariant).
inline FourierKernel kernel_to_fourier(const GroupKernel& k, const TetraFourierBasis& basis,
                                       double tol = 1e-10) {
    const std::size_t n = 12, co = k.out_channels(), ci = k.in_channels();
    if (k.group != basis.group && !(k.group && basis.group && k.group->name == "tetrahedron"))
        throw ContractError("kernel_to_fourier: kernel group does not match basis group");
    Tensor T = expand_structured(k);
    Tensor Th = detail::conjugate_by_basis(T, basis.q_basis, co, ci, /*forward=*/true);
    auto blk = [&](std::size_t qr, std::size_t qc) {
        Tensor b({co, ci});
        for (std::size_t a = 0; a < co; ++a)
            for (std::size_t c = 0; c < ci; ++c)
                b.data[a * ci + c] = Th.data[(qr * co + a) * n * ci + qc * ci + c];
        return b;
    };
    FourierKernel fk;
    fk.c_out = co;
    fk.c_in = ci;
    fk.bias = k.bias;
    fk.w1 = blk(0, 0);
    Tensor b11 = blk(1, 1), b12 = blk(1, 2), b21 = blk(2, 1), b22 = blk(2, 2);
    fk.w21 = scale(add(b11, b22), 0.5);
    fk.w22 = scale(sub(b21, b12), 0.5);
    double resid = std::max(max_abs(sub(b11, b22)), max_abs(add(b12, b21)));
    fk.w3 = Tensor({3 * co, 3 * ci});
    for (std::size_t mp = 0; mp < 3; ++mp)
        for (std::size_t m = 0; m < 3; ++m) {
            Tensor avg({co, ci});
            for (std::size_t kk = 0; kk < 3; ++kk)
                avg = add(avg, blk(3 + 3 * mp + kk, 3 + 3 * m + kk));
            avg = scale(avg, 1.0 / 3.0);
            for (std::size_t kk = 0; kk < 3; ++kk)
                resid = std::max(resid, max_abs(sub(blk(3 + 3 * mp + kk, 3 + 3 * m + kk), avg)));
            for (std::size_t a = 0; a < co; ++a)
                for (std::size_t c = 0; c < ci; ++c)
                    fk.w3.data[(mp * co + a) * 3 * ci + m * ci + c] = avg.data[a * ci + c];
        }
    // Off-isotypic and cross-rho3-row blocks must vanish.
    for (std::size_t qr = 0; qr < n; ++qr)
        for (std::size_t qc = 0; qc < n; ++qc) {
            bool on_block = (qr == 0 && qc == 0) || (qr >= 1 && qr <= 2 && qc >= 1 && qc <= 2) ||
                            (qr >= 3 && qc >= 3 && (qr - 3) % 3 == (qc - 3) % 3);
            if (!on_block) resid = std::max(resid, max_abs(blk(qr, qc)));
        }
    if (resid > tol)
        throw StructureError("kernel_to_fourier: commutant constraint violated, residual " +
                             std::to_string(resid));
    return fk;
}

/// Inverse conversion: rebuild the spatial GroupKernel from the Fourier blocks.
inline GroupKernel fourier_to_kernel(const FourierKernel& fk, const TetraFourierBasis& basis) {
    const std::size_t n = 12, co = fk.c_out, ci = fk.c_in;
    Tensor Th({n * co, n * ci});
    auto put = [&](std::size_t qr, std::size_t qc, const Tensor& b, double sign = 1.0) {
        for (std::size_t a = 0; a < co; ++a)
            for (std::size_t c = 0; c < ci; ++c)
                Th.data[(qr * co + a) * n * ci + qc * ci + c] = sign * b.data[a * ci + c];
    };
    put(0, 0, fk.w1);
    put(1, 1, fk.w21);
    put(2, 2, fk.w21);
    put(1, 2, fk.w22, -1.0);
    put(2, 1, fk.w22);
    for (std::size_t mp = 0; mp < 3; ++mp)
        for (std::size_t m = 0; m < 3; ++m)
            for (std::size_t kk = 0; kk < 3; ++kk)
                for (std::size_t a = 0; a < co; ++a)
                    for (std::size_t c = 0; c < ci; ++c)
                        Th.data[((3 + 3 * mp + kk) * co + a) * n * ci + (3 + 3 * m + kk) * ci + c] =
                            fk.w3.data[(mp * co + a) * 3 * ci + m * ci + c];
    Tensor T = detail::conjugate_by_basis(Th, basis.q_basis, co, ci, /*forward=*/false);
    GroupKernel k;
    k.group = basis.group;
    k.bias = fk.bias;
    k.w = Tensor({n, co, ci});
    // Block row R = identity: T[0, R~] = W(cayley[inverse[0], R~]) = W(R~).
    for (std::size_t Rt = 0; Rt < n; ++Rt)
        for (std::size_t a = 0; a < co; ++a)
            for (std::size_t c = 0; c < ci; ++c)
                k.w.data[(Rt * co + a) * ci + c] = T.data[a * n * ci + Rt * ci + c];
    return k;
}

/// Apply the kernel in the Fourier basis: transform, 4-block batched product,
/// transform back. Only the block products hit the multiply counter
/// (4 * (3C')*(3C) per point vs |G|^2 C' C spatially).
inline Tensor fourier_conv_apply(const FourierKernel& fk, const TetraFourierBasis& basis,
                                 const Tensor& f) {
    const std::size_t n = 12, co = fk.c_out, ci = fk.c_in;
    if (f.rank() != 3 || f.shape[1] != n)
        throw ContractError("fourier_conv_apply: feature map is not over the tetrahedral group");
    if (f.shape[2] != ci) throw ContractError("fourier_conv_apply: channel mismatch");
    std::size_t N = f.shape[0];
    const Tensor& Q = basis.q_basis;
    Tensor out({N, n, co});
    // Merged rho1/rho2 block, materialized dense so the batched product is
    // genuinely four (3C') x (3C) matrix multiplications:
    // [[W1,0,0],[0,W21,-W22],[0,W22,W21]]
    Tensor merged({3 * co, 3 * ci});
    for (std::size_t a = 0; a < co; ++a)
        for (std::size_t c = 0; c < ci; ++c) {
            merged.data[a * 3 * ci + c] = fk.w1.data[a * ci + c];
            merged.data[(co + a) * 3 * ci + ci + c] = fk.w21.data[a * ci + c];
            merged.data[(co + a) * 3 * ci + 2 * ci + c] = -fk.w22.data[a * ci + c];
            merged.data[(2 * co + a) * 3 * ci + ci + c] = fk.w22.data[a * ci + c];
            merged.data[(2 * co + a) * 3 * ci + 2 * ci + c] = fk.w21.data[a * ci + c];
        }
    std::vector<double> fh(n * ci), oh(n * co), x(3 * ci), y(3 * co);
    for (std::size_t i = 0; i < N; ++i) {
        const double* fi = f.data.data() + i * n * ci;
        // to Fourier: fh[q,c] = sum_r Q[r,q] f[r,c]
        std::fill(fh.begin(), fh.end(), 0.0);
        for (std::size_t r = 0; r < n; ++r)
            for (std::size_t q = 0; q < n; ++q) {
                double qv = Q.data[r * n + q];
                if (qv == 0.0) continue;
                for (std::size_t c = 0; c < ci; ++c) fh[q * ci + c] += qv * fi[r * ci + c];
            }
        std::fill(oh.begin(), oh.end(), 0.0);
        for (std::size_t c = 0; c < 3 * ci; ++c) x[c] = fh[c];
        for (std::size_t a = 0; a < 3 * co; ++a) {
            double acc = 0.0;
            for (std::size_t b = 0; b < 3 * ci; ++b) acc += merged.data[a * 3 * ci + b] * x[b];
            oh[a] = acc;
        }
        // three rho3 lanes share W3 over the (copy, channel) multiplicity axis
        for (std::size_t kk = 0; kk < 3; ++kk) {
            for (std::size_t m = 0; m < 3; ++m)
                for (std::size_t c = 0; c < ci; ++c) x[m * ci + c] = fh[(3 + 3 * m + kk) * ci + c];
            for (std::size_t a = 0; a < 3 * co; ++a) {
                double acc = 0.0;
                for (std::size_t b = 0; b < 3 * ci; ++b) acc += fk.w3.data[a * 3 * ci + b] * x[b];
                y[a] = acc;
            }
            for (std::size_t m = 0; m < 3; ++m)
                for (std::size_t a = 0; a < co; ++a) oh[(3 + 3 * m + kk) * co + a] = y[m * co + a];
        }
        // back to spatial: out[r,a] = sum_q Q[r,q] oh[q,a]
        double* oi = out.data.data() + i * n * co;
        for (std::size_t r = 0; r < n; ++r)
            for (std::size_t q = 0; q < n; ++q) {
                double qv = Q.data[r * n + q];
                if (qv == 0.0) continue;
                for (std::size_t a = 0; a < co; ++a) oi[r * co + a] += qv * oh[q * co + a];
            }
        if (fk.bias)
            for (std::size_t r = 0; r < n; ++r)
                for (std::size_t a = 0; a < co; ++a) oi[r * co + a] += fk.bias->data[a];
    }
    // batched 4x(3C' x 3C) products only, matching the FLOP-model comparison
    opcount::count(static_cast<long long>(N) * 4 * (3 * co) * (3 * ci));
    check_finite(out, "fourier_conv_apply");
    return out;
}

}  // namespace platonic
