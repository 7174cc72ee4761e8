#pragma once

#include <optional>
#include <random>

#include "platonic/group.hpp"
#include "platonic/tensor.hpp"

namespace platonic {

namespace opcount {
// Instrumented multiply counter, used by the benchmark and cost-model checks.
inline thread_local long long multiplies = 0;
inline void reset() { multiplies = 0; }
inline void count(long long n) { multiplies += n; }
}  // namespace opcount

/// Learnable group-convolution kernel W_group: G -> C' x C, plus an optional
/// bias applied identically at every frame.
struct GroupKernel {
    const FiniteGroup* group = nullptr;
    Tensor w;                     // (|G|, C', C)
    std::optional<Tensor> bias;   // (C')

    std::size_t out_channels() const { return w.shape[1]; }
    std::size_t in_channels() const { return w.shape[2]; }

    std::size_t parameter_count() const {
        return w.numel() + (bias ? bias->numel() : 0);
    }
};

/// Fan-in-scaled Gaussian init: stddev (|G| * C)^(-1/2) so the expanded
/// structured matrix matches standard scaling.
inline GroupKernel make_group_kernel(const FiniteGroup& g, std::size_t c_out, std::size_t c_in,
                                     std::mt19937_64& rng, bool with_bias = false) {
    GroupKernel k;
    k.group = &g;
    double stddev = 1.0 / std::sqrt(static_cast<double>(g.order() * c_in));
    k.w = Tensor::randn({g.order(), c_out, c_in}, rng, stddev);
    if (with_bias) k.bias = Tensor::zeros({c_out});
    return k;
}

/// Group convolution: (Phi f)(R) = sum_{R~} W(R^{-1} R~) f(R~), computed
/// by gathering kernel slices via the Cayley table. f has shape (N, |G|, C).
inline Tensor group_conv_apply(const GroupKernel& k, const Tensor& f) {
    const FiniteGroup& g = *k.group;
    std::size_t G = g.order(), co = k.out_channels(), ci = k.in_channels();
    if (f.rank() != 3 || f.shape[1] != G)
        throw ContractError("group_conv_apply: feature map group axis does not match kernel group " +
                            g.name);
    if (f.shape[2] != ci)
        throw ContractError("group_conv_apply: feature channels " + std::to_string(f.shape[2]) +
                            " != kernel input channels " + std::to_string(ci));
    std::size_t N = f.shape[0];
    Tensor out({N, G, co});
    for (std::size_t R = 0; R < G; ++R)
        for (std::size_t Rt = 0; Rt < G; ++Rt) {
            const double* W = k.w.data.data() +
                              static_cast<std::size_t>(g.cayley[g.inverse[R]][Rt]) * co * ci;
            for (std::size_t i = 0; i < N; ++i) {
                const double* fin = f.data.data() + (i * G + Rt) * ci;
                double* o = out.data.data() + (i * G + R) * co;
                for (std::size_t a = 0; a < co; ++a) {
                    double acc = 0.0;
                    for (std::size_t b = 0; b < ci; ++b) acc += W[a * ci + b] * fin[b];
                    o[a] += acc;
                }
            }
        }
    opcount::count(static_cast<long long>(N) * G * G * co * ci);
    if (k.bias)
        for (std::size_t i = 0; i < N; ++i)
            for (std::size_t R = 0; R < G; ++R)
                for (std::size_t a = 0; a < co; ++a)
                    out.data[(i * G + R) * co + a] += k.bias->data[a];
    check_finite(out, "group_conv_apply");
    return out;
}

/// Expand the kernel into the equivalent dense (|G| C') x (|G| C) structured
/// matrix with block (R, R~) = W(cayley[inverse[R], R~]).
inline Tensor expand_structured(const GroupKernel& k) {
    const FiniteGroup& g = *k.group;
    std::size_t G = g.order(), co = k.out_channels(), ci = k.in_channels();
    Tensor m({G * co, G * ci});
    for (std::size_t R = 0; R < G; ++R)
        for (std::size_t Rt = 0; Rt < G; ++Rt) {
            const double* W = k.w.data.data() +
                              static_cast<std::size_t>(g.cayley[g.inverse[R]][Rt]) * co * ci;
            for (std::size_t a = 0; a < co; ++a)
                for (std::size_t b = 0; b < ci; ++b)
                    m.data[(R * co + a) * G * ci + Rt * ci + b] = W[a * ci + b];
        }
    return m;
}

}  // namespace platonic
