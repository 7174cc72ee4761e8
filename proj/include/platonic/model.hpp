#pragma once

#include <map>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "platonic/attention.hpp"
#include "platonic/equilinear.hpp"
#include "platonic/group.hpp"
#include "platonic/rope.hpp"
#include "platonic/tape.hpp"
#include "platonic/tensor.hpp"

namespace platonic {

/// Raw model input: positions plus scalar and vector channels.
struct PointCloud {
    Tensor positions;  // (N, n)
    Tensor scalars;    // (N, S)
    Tensor vectors;    // (N, V, n); V may be 0

    std::size_t size() const { return positions.shape[0]; }
};

/// Global roto-reflection of a cloud by group element i.
inline PointCloud rotate_cloud(const FiniteGroup& g, int i, const PointCloud& pc) {
    PointCloud out = pc;
    std::size_t n = static_cast<std::size_t>(g.dim);
    const Tensor& R = g.elements[i];
    for (std::size_t p = 0; p < pc.size(); ++p)
        for (std::size_t a = 0; a < n; ++a) {
            double acc = 0.0;
            for (std::size_t b = 0; b < n; ++b)
                acc += R.data[a * n + b] * pc.positions.data[p * n + b];
            out.positions.data[p * n + a] = acc;
        }
    if (pc.vectors.numel() > 0) {
        std::size_t V = pc.vectors.shape[1];
        for (std::size_t p = 0; p < pc.size(); ++p)
            for (std::size_t v = 0; v < V; ++v)
                for (std::size_t a = 0; a < n; ++a) {
                    double acc = 0.0;
                    for (std::size_t b = 0; b < n; ++b)
                        acc += R.data[a * n + b] * pc.vectors.data[(p * V + v) * n + b];
                    out.vectors.data[(p * V + v) * n + a] = acc;
                }
    }
    return out;
}

inline PointCloud translate_cloud(const PointCloud& pc, const Tensor& t) {
    PointCloud out = pc;
    std::size_t n = pc.positions.shape[1];
    for (std::size_t p = 0; p < pc.size(); ++p)
        for (std::size_t a = 0; a < n; ++a) out.positions.data[p * n + a] += t.data[a];
    return out;
}

/// Lift a point cloud onto the group: scalars copied to every frame, vectors
/// expressed in each frame as R~^{-1} v. Positions are optionally lifted as an
/// extra vector channel; otherwise they enter only through RoPE.
inline Tensor lift(const PointCloud& pc, const FiniteGroup& g, bool lift_positions = false) {
    if (pc.positions.shape[1] != static_cast<std::size_t>(g.dim))
        throw ContractError("lift: cloud dimension does not match group dimension");
    std::size_t N = pc.size(), G = g.order(), n = static_cast<std::size_t>(g.dim);
    std::size_t S = pc.scalars.numel() ? pc.scalars.shape[1] : 0;
    std::size_t V = pc.vectors.numel() ? pc.vectors.shape[1] : 0;
    std::size_t Veff = V + (lift_positions ? 1 : 0);
    Tensor out({N, G, S + Veff * n});
    for (std::size_t i = 0; i < N; ++i)
        for (std::size_t R = 0; R < G; ++R) {
            double* o = out.data.data() + (i * G + R) * (S + Veff * n);
            for (std::size_t s = 0; s < S; ++s) o[s] = pc.scalars.data[i * S + s];
            const Tensor& inv = g.elements[static_cast<std::size_t>(g.inverse[R])];
            for (std::size_t v = 0; v < Veff; ++v) {
                const double* src = v < V ? pc.vectors.data.data() + (i * V + v) * n
                                          : pc.positions.data.data() + i * n;
                for (std::size_t a = 0; a < n; ++a) {
                    double acc = 0.0;
                    for (std::size_t b = 0; b < n; ++b) acc += inv.data[a * n + b] * src[b];
                    o[S + v * n + a] = acc;
                }
            }
        }
    return out;
}

/// Equivariant APE: random-Fourier features of the frame-projected positions,
/// [cos(w_m^T R^{-1} p), sin(w_m^T R^{-1} p)] with w_m ~ N(0, sigma^2).
/// Deliberately breaks translation invariance.
inline Tensor ape(const Tensor& positions, const FiniteGroup& g, double sigma, int num_freqs,
                  std::uint64_t seed) {
    if (sigma <= 0.0) throw ContractError("ape: sigma must be positive");
    std::size_t N = positions.shape[0], G = g.order(), n = static_cast<std::size_t>(g.dim);
    std::size_t M = static_cast<std::size_t>(num_freqs);
    std::mt19937_64 rng(seed);
    Tensor w = Tensor::randn({M, n}, rng, sigma);
    Tensor out({N, G, 2 * M});
    for (std::size_t i = 0; i < N; ++i)
        for (std::size_t R = 0; R < G; ++R) {
            const Tensor& inv = g.elements[static_cast<std::size_t>(g.inverse[R])];
            double pr[3] = {0, 0, 0};
            for (std::size_t a = 0; a < n; ++a)
                for (std::size_t b = 0; b < n; ++b)
                    pr[a] += inv.data[a * n + b] * positions.data[i * n + b];
            double* o = out.data.data() + (i * G + R) * 2 * M;
            for (std::size_t m = 0; m < M; ++m) {
                double theta = 0.0;
                for (std::size_t a = 0; a < n; ++a) theta += w.data[m * n + a] * pr[a];
                o[2 * m] = std::cos(theta);
                o[2 * m + 1] = std::sin(theta);
            }
        }
    return out;
}

enum class NormPlacement { pre, post };
enum class ReadoutMode { graph_invariant, node_scalar_vector };
enum class Pooling { mean, sum };

struct ModelConfig {
    std::string group = "tetrahedron";
    int layers = 2;
    int channels = 8;  // C per frame; total width is |G| * C
    int heads = 2;     // H per frame
    double ffn_factor = 4.0;
    InteractionMode mode = InteractionMode::softmax_attention;
    ScoreMode score = ScoreMode::equivariant;
    KeyMode key_mode = KeyMode::learned;
    double rope_sigma = 1.0;  // freq_sigma and rope_sigma are the same knob
    std::optional<double> ape_sigma;
    int ape_freqs = 4;  // number of APE frequency vectors (2x channels)
    bool learned_freqs = false;
    NormPlacement norm_placement = NormPlacement::pre;
    double dropout = 0.0;
    double drop_path = 0.0;
    ReadoutMode readout = ReadoutMode::graph_invariant;
    Pooling pooling = Pooling::mean;
    bool lift_positions = false;
    int scalar_in = 1;
    int vector_in = 0;
    int scalar_out = 1;
    int vector_out = 0;
    std::size_t max_softmax_n = 16384;
    std::uint64_t seed = 0;

    int head_dim() const { return channels / heads; }
};

namespace tapeops {

/// Group convolution on the tape: gather kernel slices via the Cayley table
/// into the expanded structured matrix, then one matmul.
inline Tape::Handle group_conv(Tape& t, const FiniteGroup& g, Tape::Handle w,
                               std::optional<Tape::Handle> bias, Tape::Handle f) {
    std::size_t G = g.order();
    const Shape& ws = t.value(w).shape;  // (G, co, ci)
    std::size_t co = ws[1], ci = ws[2];
    const Shape& fshape = t.value(f).shape;  // (N, G, ci)
    std::size_t N = fshape[0];
    std::vector<std::size_t> idx(G * G);
    for (std::size_t R = 0; R < G; ++R)
        for (std::size_t Rt = 0; Rt < G; ++Rt)
            idx[R * G + Rt] = static_cast<std::size_t>(g.cayley[g.inverse[R]][Rt]);
    Tape::Handle gathered = t.gather(w, 0, idx);                   // (G*G, co, ci)
    Tape::Handle blocks = t.reshape(gathered, {G, G, co, ci});     // (R, R~, co, ci)
    Tape::Handle perm = t.permute(blocks, {0, 2, 1, 3});           // (R, co, R~, ci)
    Tape::Handle expand = t.reshape(perm, {G * co, G * ci});
    Tape::Handle f_flat = t.reshape(f, {N, G * ci});
    Tape::Handle out = t.matmul(f_flat, t.permute(expand, {1, 0}));  // (N, G*co)
    out = t.reshape(out, {N, G, co});
    if (bias) out = t.add(out, *bias);
    return out;
}

/// Channel-axis layer norm per (node, frame); gain/bias shared across frames.
inline Tape::Handle layernorm(Tape& t, Tape::Handle x, Tape::Handle gain, Tape::Handle bias,
                              double eps = 1e-8) {
    const Shape& s = t.value(x).shape;  // (N, G, C)
    double invC = 1.0 / static_cast<double>(s[2]);
    Tape::Handle mu = t.scale(t.sum_axis(x, 2, /*keepdim=*/true), invC);
    Tape::Handle centered = t.sub(x, mu);
    Tape::Handle var = t.scale(t.sum_axis(t.mul(centered, centered), 2, true), invC);
    Tape::Handle inv = t.rsqrt(t.add(var, t.constant(Tensor::full({1}, eps))));
    return t.add(t.mul(t.mul(centered, inv), gain), bias);
}

/// RoPE rotation of (N, G, H, d) features given cos/sin tensors expanded to d.
inline Tape::Handle rope_rotate(Tape& t, Tape::Handle x, Tape::Handle cosE, Tape::Handle sinE,
                                std::size_t d) {
    std::vector<std::size_t> swap(d);
    Tensor sgn({d});
    for (std::size_t b = 0; b < d / 2; ++b) {
        swap[2 * b] = 2 * b + 1;
        swap[2 * b + 1] = 2 * b;
        sgn.data[2 * b] = -1.0;
        sgn.data[2 * b + 1] = 1.0;
    }
    Tape::Handle swapped = t.gather(x, 3, swap);
    Tape::Handle term2 = t.mul(t.mul(swapped, sinE), t.constant(std::move(sgn)));
    return t.add(t.mul(x, cosE), term2);
}

}  // namespace tapeops

/// The assembled equivariant transformer: lifting, optional APE, L equivariant
/// blocks (attention or linear convolution + FFN), and invariant/equivariant
/// readouts. Every linear map is a GroupKernel over the same group, so the
/// model is equivariant by construction.
class Model {
  public:
    explicit Model(ModelConfig cfg) : cfg_(std::move(cfg)), group_(build_group(cfg_.group)) {
        if (cfg_.channels % cfg_.heads != 0)
            throw ContractError("channels must be divisible by heads");
        if (cfg_.head_dim() % 2 != 0)
            throw ContractError("head dimension channels/heads must be even");
        init_parameters();
    }

    const ModelConfig& config() const { return cfg_; }
    const FiniteGroup& group() const { return group_; }

    std::size_t input_channels() const {
        std::size_t n = static_cast<std::size_t>(group_.dim);
        std::size_t veff = static_cast<std::size_t>(cfg_.vector_in) + (cfg_.lift_positions ? 1 : 0);
        std::size_t c = static_cast<std::size_t>(cfg_.scalar_in) + veff * n;
        if (cfg_.ape_sigma) c += 2 * static_cast<std::size_t>(cfg_.ape_freqs);
        return c;
    }

    std::vector<std::string> parameter_names() const {
        std::vector<std::string> names;
        names.reserve(params_.size());
        for (const auto& kv : order_) names.push_back(kv);
        return names;
    }

    Tensor& parameter(const std::string& name) { return params_.at(name); }
    const Tensor& parameter(const std::string& name) const { return params_.at(name); }

    std::size_t count_parameters() const {
        std::size_t total = 0;
        for (const auto& [name, t] : params_) total += t.numel();
        return total;
    }

    /// Parameters of the hidden q/k/v/out and FFN GroupKernels only — the
    /// linear-layer-dominated share used for the fixed-total-width comparison.
    std::size_t hidden_linear_parameter_count() const {
        std::size_t total = 0;
        for (const auto& [name, t] : params_)
            if (name.find(".w") != std::string::npos && name.rfind("layer", 0) == 0)
                total += t.numel();
        return total;
    }

    struct ForwardResult {
        std::unique_ptr<Tape> tape;
        Tape::Handle output = -1;        // graph: (S_out); node mode: scalars (N, S_out)
        Tape::Handle node_vectors = -1;  // node mode: (N, V_out, n)
        std::map<std::string, Tape::Handle> param_handles;
    };

    ForwardResult forward(const PointCloud& pc, std::mt19937_64* dropout_rng = nullptr) const {
        if (pc.positions.shape[1] != static_cast<std::size_t>(group_.dim))
            throw ContractError("cloud dimension does not match model group dimension");
        std::size_t S = pc.scalars.numel() ? pc.scalars.shape[1] : 0;
        std::size_t V = pc.vectors.numel() ? pc.vectors.shape[1] : 0;
        if (S != static_cast<std::size_t>(cfg_.scalar_in) ||
            V != static_cast<std::size_t>(cfg_.vector_in))
            throw ContractError("cloud channel counts do not match model config");

        ForwardResult res;
        res.tape = std::make_unique<Tape>();
        Tape& t = *res.tape;
        for (const std::string& name : order_)
            res.param_handles[name] = t.param(params_.at(name));
        auto P = [&](const std::string& name) { return res.param_handles.at(name); };

        std::size_t N = pc.size(), G = group_.order();
        std::size_t n = static_cast<std::size_t>(group_.dim);
        std::size_t H = static_cast<std::size_t>(cfg_.heads);
        std::size_t dh = static_cast<std::size_t>(cfg_.head_dim());

        // Lift + optional APE (inputs only; enters the tape as a constant).
        Tensor lifted = lift(pc, group_, cfg_.lift_positions);
        if (cfg_.ape_sigma) {
            Tensor a = ape(pc.positions, group_, *cfg_.ape_sigma, cfg_.ape_freqs,
                           cfg_.seed ^ 0x9e3779b97f4a7c15ULL);
            Tensor joined({N, G, lifted.shape[2] + a.shape[2]});
            for (std::size_t i = 0; i < N * G; ++i) {
                std::copy_n(lifted.data.data() + i * lifted.shape[2], lifted.shape[2],
                            joined.data.data() + i * joined.shape[2]);
                std::copy_n(a.data.data() + i * a.shape[2], a.shape[2],
                            joined.data.data() + i * joined.shape[2] + lifted.shape[2]);
            }
            lifted = std::move(joined);
        }
        Tape::Handle f = t.constant(std::move(lifted));
        f = tapeops::group_conv(t, group_, P("lift.w"), P("lift.b"), f);

        // Frame-projected positions, shared by every layer: (G, N, n).
        Tensor pp = attention_positions(pc.positions);
        Tape::Handle pp_h = t.constant(pp);

        for (int l = 0; l < cfg_.layers; ++l) {
            std::string pre = "layer" + std::to_string(l) + ".";
            Tape::Handle resid = f;
            Tape::Handle x = f;
            if (cfg_.norm_placement == NormPlacement::pre)
                x = tapeops::layernorm(t, x, P(pre + "norm1.g"), P(pre + "norm1.b"));
            Tape::Handle y = interaction(t, res, pre, x, pp_h, N, G, H, dh, dropout_rng);
            y = tapeops::group_conv(t, group_, P(pre + "out.w"), P(pre + "out.b"), y);
            y = drop_path(t, y, dropout_rng);
            f = t.add(resid, y);
            if (cfg_.norm_placement == NormPlacement::post)
                f = tapeops::layernorm(t, f, P(pre + "norm1.g"), P(pre + "norm1.b"));

            resid = f;
            x = f;
            if (cfg_.norm_placement == NormPlacement::pre)
                x = tapeops::layernorm(t, x, P(pre + "norm2.g"), P(pre + "norm2.b"));
            Tape::Handle hdn = tapeops::group_conv(t, group_, P(pre + "ffn1.w"), P(pre + "ffn1.b"), x);
            hdn = t.gelu(hdn);
            hdn = dropout(t, hdn, dropout_rng);
            hdn = tapeops::group_conv(t, group_, P(pre + "ffn2.w"), P(pre + "ffn2.b"), hdn);
            hdn = drop_path(t, hdn, dropout_rng);
            f = t.add(resid, hdn);
            if (cfg_.norm_placement == NormPlacement::post)
                f = tapeops::layernorm(t, f, P(pre + "norm2.g"), P(pre + "norm2.b"));
        }
        if (cfg_.norm_placement == NormPlacement::pre)
            f = tapeops::layernorm(t, f, P("final_norm.g"), P("final_norm.b"));

        // Readout heads.
        Tape::Handle sc = tapeops::group_conv(t, group_, P("head_scalar.w"), P("head_scalar.b"), f);
        if (cfg_.readout == ReadoutMode::graph_invariant) {
            Tape::Handle pooled = t.sum_axis(t.sum_axis(sc, 1), 0);  // (S_out)
            if (cfg_.pooling == Pooling::mean)
                pooled = t.scale(pooled, 1.0 / static_cast<double>(N * G));
            res.output = pooled;
        } else {
            Tape::Handle node_sc = t.scale(t.sum_axis(sc, 1), 1.0 / static_cast<double>(G));
            res.output = node_sc;  // (N, S_out)
            std::size_t v_out = static_cast<std::size_t>(cfg_.vector_out);
            if (v_out > 0) {
                Tape::Handle vc =
                    tapeops::group_conv(t, group_, P("head_vector.w"), std::nullopt, f);
                vc = t.reshape(vc, {N, G, v_out, n});
                vc = t.permute(vc, {1, 0, 2, 3});          // (G, N, V, n)
                vc = t.reshape(vc, {G, N * v_out, n});
                // un-projection: frame-average of R * u(R); right-multiply by R^T
                Tensor rt({G, n, n});
                for (std::size_t R = 0; R < G; ++R)
                    for (std::size_t a = 0; a < n; ++a)
                        for (std::size_t b = 0; b < n; ++b)
                            rt.data[(R * n + a) * n + b] =
                                group_.elements[R].data[b * n + a];
                vc = t.matmul(vc, t.constant(std::move(rt)));  // (G, N*V, n)
                vc = t.reshape(vc, {G, N, v_out, n});
                vc = t.scale(t.sum_axis(vc, 0), 1.0 / static_cast<double>(G));
                res.node_vectors = vc;  // (N, V, n)
            }
        }
        return res;
    }

    /// Forward pass returning the graph/node scalar output values only.
    Tensor predict(const PointCloud& pc) const {
        ForwardResult r = forward(pc);
        return r.tape->value(r.output);
    }

    std::pair<Tensor, Tensor> predict_nodes(const PointCloud& pc) const {
        ForwardResult r = forward(pc);
        Tensor vec = r.node_vectors >= 0 ? r.tape->value(r.node_vectors) : Tensor();
        return {r.tape->value(r.output), vec};
    }

  private:
    Tape::Handle interaction(Tape& t, ForwardResult& res, const std::string& pre, Tape::Handle x,
                             Tape::Handle pp_h, std::size_t N, std::size_t G, std::size_t H,
                             std::size_t dh, std::mt19937_64* dropout_rng) const {
        auto P = [&](const std::string& name) { return res.param_handles.at(name); };
        std::size_t C = H * dh;
        std::size_t n = static_cast<std::size_t>(group_.dim);
        auto heads4 = [&](Tape::Handle h) { return t.reshape(h, {N, G, H, dh}); };
        Tape::Handle q =
            heads4(tapeops::group_conv(t, group_, P(pre + "q.w"), P(pre + "q.b"), x));
        Tape::Handle v =
            heads4(tapeops::group_conv(t, group_, P(pre + "v.w"), P(pre + "v.b"), x));

        // theta(i, R, h, block) = omega_{h,block} . (R^{-1} p_i)
        Tape::Handle omega;
        if (cfg_.learned_freqs) {
            omega = P(pre + "freqs");
        } else {
            omega = t.constant(fixed_freqs_.at(pre).freqs);
        }
        Tape::Handle om = t.reshape(omega, {H * (dh / 2), n});
        Tape::Handle theta = t.matmul(pp_h, t.permute(om, {1, 0}));  // (G, N, H*dh/2)
        theta = t.reshape(theta, {G, N, H, dh / 2});
        theta = t.permute(theta, {1, 0, 2, 3});  // (N, G, H, dh/2)
        std::vector<std::size_t> rep(dh);
        for (std::size_t m = 0; m < dh; ++m) rep[m] = m / 2;
        Tape::Handle cosE = t.gather(t.cos(theta), 3, rep);
        Tape::Handle sinE = t.gather(t.sin(theta), 3, rep);

        Tape::Handle qr = tapeops::rope_rotate(t, q, cosE, sinE, dh);
        Tape::Handle qp = t.permute(qr, {1, 2, 0, 3});  // (G, H, N, dh)
        Tape::Handle vp = t.permute(v, {1, 2, 0, 3});

        Tape::Handle out;  // (G, H, N, dh)
        if (cfg_.mode == InteractionMode::softmax_attention) {
            if (N > cfg_.max_softmax_n)
                throw ResourceError("softmax attention memory guard: N exceeds limit");
            Tape::Handle k =
                heads4(tapeops::group_conv(t, group_, P(pre + "k.w"), P(pre + "k.b"), x));
            Tape::Handle kr = tapeops::rope_rotate(t, k, cosE, sinE, dh);
            Tape::Handle kp = t.permute(kr, {1, 2, 3, 0});  // (G, H, dh, N)
            Tape::Handle s = t.scale(t.matmul(qp, kp), 1.0 / std::sqrt(static_cast<double>(dh)));
            Tape::Handle attn;
            if (cfg_.score == ScoreMode::invariant) {
                attn = t.softmax_lastaxis(t.sum_axis(s, 0));  // (H, N, N), frame-agnostic
            } else {
                attn = t.softmax_lastaxis(s);  // (G, H, N, N)
            }
            attn = dropout(t, attn, dropout_rng);
            out = t.matmul(attn, vp);
        } else {
            // linear dynamic convolution; Y = Q'((K')^T V)
            Tape::Handle kr;
            if (cfg_.key_mode == KeyMode::constant_ones) {
                Tensor sgn({dh});
                for (std::size_t b = 0; b < dh / 2; ++b) {
                    sgn.data[2 * b] = -1.0;
                    sgn.data[2 * b + 1] = 1.0;
                }
                kr = t.add(cosE, t.mul(sinE, t.constant(std::move(sgn))));
            } else {
                Tape::Handle k =
                    heads4(tapeops::group_conv(t, group_, P(pre + "k.w"), P(pre + "k.b"), x));
                kr = tapeops::rope_rotate(t, k, cosE, sinE, dh);
            }
            Tape::Handle kt = t.permute(kr, {1, 2, 3, 0});       // (G, H, dh, N)
            Tape::Handle acc = t.matmul(kt, vp);                 // (G, H, dh, dh)
            out = t.matmul(qp, acc);                             // (G, H, N, dh)
        }
        out = t.permute(out, {2, 0, 1, 3});  // (N, G, H, dh)
        return t.reshape(out, {N, G, C});
    }

    Tape::Handle dropout(Tape& t, Tape::Handle x, std::mt19937_64* rng) const {
        if (cfg_.dropout <= 0.0 || rng == nullptr) return x;
        // frame-synchronized mask: drawn once, broadcast across the group axis
        const Shape& s = t.value(x).shape;
        Shape ms = s;
        if (ms.size() >= 3) ms[ms.size() == 4 ? 0 : 1] = 1;
        Tensor mask(ms);
        std::bernoulli_distribution keep(1.0 - cfg_.dropout);
        for (double& m : mask.data) m = keep(*rng) ? 1.0 / (1.0 - cfg_.dropout) : 0.0;
        return t.mul(x, t.constant(std::move(mask)));
    }

    Tape::Handle drop_path(Tape& t, Tape::Handle x, std::mt19937_64* rng) const {
        if (cfg_.drop_path <= 0.0 || rng == nullptr) return x;
        std::bernoulli_distribution keep(1.0 - cfg_.drop_path);
        double m = keep(*rng) ? 1.0 / (1.0 - cfg_.drop_path) : 0.0;
        return t.scale(x, m);
    }

    Tensor attention_positions(const Tensor& positions) const {
        return attention_position_projection(group_, positions);
    }

  public:
    static Tensor attention_position_projection(const FiniteGroup& g, const Tensor& positions) {
        std::size_t N = positions.shape[0], G = g.order(), n = static_cast<std::size_t>(g.dim);
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
        return out;
    }

  private:
    void init_parameters() {
        std::mt19937_64 rng(cfg_.seed);
        std::size_t G = group_.order();
        std::size_t C = static_cast<std::size_t>(cfg_.channels);
        std::size_t H = static_cast<std::size_t>(cfg_.heads);
        std::size_t dh = static_cast<std::size_t>(cfg_.head_dim());
        std::size_t n = static_cast<std::size_t>(group_.dim);
        std::size_t F = static_cast<std::size_t>(cfg_.ffn_factor * cfg_.channels);
        auto kernel = [&](const std::string& name, std::size_t co, std::size_t ci, bool bias) {
            double stddev = 1.0 / std::sqrt(static_cast<double>(G * ci));
            add_param(name + ".w", Tensor::randn({G, co, ci}, rng, stddev));
            if (bias) add_param(name + ".b", Tensor::zeros({co}));
        };
        kernel("lift", C, input_channels(), true);
        for (int l = 0; l < cfg_.layers; ++l) {
            std::string pre = "layer" + std::to_string(l) + ".";
            kernel(pre + "q", C, C, true);
            kernel(pre + "k", C, C, true);
            kernel(pre + "v", C, C, true);
            kernel(pre + "out", C, C, true);
            kernel(pre + "ffn1", F, C, true);
            kernel(pre + "ffn2", C, F, true);
            add_param(pre + "norm1.g", Tensor::full({C}, 1.0));
            add_param(pre + "norm1.b", Tensor::zeros({C}));
            add_param(pre + "norm2.g", Tensor::full({C}, 1.0));
            add_param(pre + "norm2.b", Tensor::zeros({C}));
            FrequencySet fs = make_frequencies(group_.dim, static_cast<int>(dh),
                                               static_cast<int>(H), cfg_.rope_sigma,
                                               cfg_.seed + 1000 + static_cast<std::uint64_t>(l));
            fs.learned = cfg_.learned_freqs;
            fixed_freqs_[pre] = fs;
            if (cfg_.learned_freqs) add_param(pre + "freqs", fs.freqs);
        }
        if (cfg_.norm_placement == NormPlacement::pre) {
            add_param("final_norm.g", Tensor::full({C}, 1.0));
            add_param("final_norm.b", Tensor::zeros({C}));
        }
        kernel("head_scalar", static_cast<std::size_t>(cfg_.scalar_out), C, true);
        if (cfg_.readout == ReadoutMode::node_scalar_vector && cfg_.vector_out > 0)
            kernel("head_vector", static_cast<std::size_t>(cfg_.vector_out) * n, C, false);
    }

    void add_param(const std::string& name, Tensor t) {
        params_[name] = std::move(t);
        order_.push_back(name);
    }

    ModelConfig cfg_;
    FiniteGroup group_;
    std::map<std::string, Tensor> params_;
    std::vector<std::string> order_;
    std::map<std::string, FrequencySet> fixed_freqs_;

  public:
    // Mutable access used by the optimizer and checkpoint loader.
    std::map<std::string, Tensor>& parameters() { return params_; }
    const std::map<std::string, Tensor>& parameters() const { return params_; }
    void set_parameter(const std::string& name, Tensor t) {
        Tensor& dst = params_.at(name);
        if (!dst.same_shape(t))
            throw ContractError("checkpoint parameter " + name + " has shape " +
                                shape_str(t.shape) + ", expected " + shape_str(dst.shape));
        dst = std::move(t);
        if (!cfg_.learned_freqs) return;
        // keep the fixed-frequency mirror coherent when freqs are learned
        for (auto& [pre, fs] : fixed_freqs_)
            if (pre + "freqs" == name) fs.freqs = params_.at(name);
    }
};

}  // namespace platonic
