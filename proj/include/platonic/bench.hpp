#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include "platonic/attention.hpp"
#include "platonic/checks.hpp"
#include "platonic/group.hpp"
#include "platonic/rope.hpp"

namespace platonic {

struct BenchConfig {
    std::string mode = "both";  // softmax_attention | linear_convolution | both
    std::string group = "trivial3";
    std::vector<std::size_t> ns = {512, 1024, 2048, 4096, 8192};
    std::uint64_t seed = 0;
    int heads = 1;
    int head_dim = 4;
    std::size_t max_softmax_n = 16384;
    int warmups = 2;
    int reps = 5;
};

struct BenchRow {
    std::string mode;
    std::string group;
    std::size_t n = 0;
    double median_seconds = 0.0;
    long long multiplies = 0;
    bool skipped = false;
};

struct BenchSlopes {
    std::string mode;
    double wallclock_slope = 0.0;  // log-log fit over the upper half of the N range
    int multiply_degree = 0;       // exact polynomial degree of the count law, 0 if no fit
};

namespace detail {

// Least-squares slope of log(y) against log(x).
inline double loglog_slope(const std::vector<double>& xs, const std::vector<double>& ys) {
    std::size_t m = xs.size();
    if (m < 2) return 0.0;
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < m; ++i) {
        double lx = std::log(xs[i]), ly = std::log(ys[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    return (m * sxy - sx * sy) / (m * sxx - sx * sx);
}

inline int exact_count_degree(const std::vector<long long>& xs, const std::vector<long long>& ys) {
    if (xs.size() < 3) return 0;
    bool constant = std::all_of(ys.begin(), ys.end(), [&](long long y) { return y == ys[0]; });
    if (constant) return 0;
    if (exact_affine_counts(xs, ys)) return 1;
    if (xs.size() >= 4 && exact_quadratic_counts(xs, ys)) return 2;
    return -1;  // no exact low-degree law
}

}  // namespace detail

/// Time one interaction mode across the N sweep. Timed regions are
/// single-threaded; medians over `reps` runs after `warmups` discarded runs.
inline std::vector<BenchRow> run_bench_mode(const std::string& mode, const BenchConfig& bc) {
    FiniteGroup g = build_group(bc.group);
    AttentionConfig acfg;
    acfg.heads = bc.heads;
    acfg.head_dim = bc.head_dim;
    acfg.max_softmax_n = bc.max_softmax_n;
    acfg.mode = mode == "linear_convolution" ? InteractionMode::linear_convolution
                                             : InteractionMode::softmax_attention;
    FrequencySet fs = make_frequencies(g.dim, bc.head_dim, bc.heads, 1.0, bc.seed + 5);
    std::mt19937_64 rng(bc.seed);
    std::vector<BenchRow> rows;
    for (std::size_t N : bc.ns) {
        BenchRow row;
        row.mode = mode;
        row.group = bc.group;
        row.n = N;
        if (acfg.mode == InteractionMode::softmax_attention && N > bc.max_softmax_n) {
            row.skipped = true;
            rows.push_back(row);
            continue;
        }
        std::size_t G = g.order(), H = static_cast<std::size_t>(bc.heads);
        std::size_t d = static_cast<std::size_t>(bc.head_dim);
        Tensor q = Tensor::uniform({N, G, H, d}, rng);
        Tensor k = Tensor::uniform({N, G, H, d}, rng);
        Tensor v = Tensor::uniform({N, G, H, d}, rng);
        Tensor pos = Tensor::uniform({N, static_cast<std::size_t>(g.dim)}, rng);
        auto once = [&]() {
            if (acfg.mode == InteractionMode::linear_convolution)
                linear_dynamic_conv(q, k, v, pos, g, fs, acfg);
            else
                equivariant_attention(q, k, v, pos, g, fs, acfg);
        };
        for (int w = 0; w < bc.warmups; ++w) once();
        std::vector<double> times;
        for (int r = 0; r < bc.reps; ++r) {
            opcount::reset();
            auto t0 = std::chrono::steady_clock::now();
            once();
            times.push_back(
                std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
            row.multiplies = opcount::multiplies;
        }
        std::sort(times.begin(), times.end());
        row.median_seconds = times[times.size() / 2];
        rows.push_back(row);
    }
    return rows;
}

inline BenchSlopes fit_slopes(const std::string& mode, const std::vector<BenchRow>& rows) {
    BenchSlopes s;
    s.mode = mode;
    std::vector<double> xs, ys;
    std::vector<long long> ni, ci;
    for (const BenchRow& r : rows) {
        if (r.mode != mode || r.skipped) continue;
        xs.push_back(static_cast<double>(r.n));
        ys.push_back(r.median_seconds);
        ni.push_back(static_cast<long long>(r.n));
        ci.push_back(r.multiplies);
    }
    // wall-clock slope over the upper half of the sweep only
    std::size_t half = xs.size() / 2;
    s.wallclock_slope = detail::loglog_slope(
        std::vector<double>(xs.begin() + half, xs.end()),
        std::vector<double>(ys.begin() + half, ys.end()));
    s.multiply_degree = detail::exact_count_degree(ni, ci);
    return s;
}

inline std::vector<BenchRow> run_bench(const BenchConfig& bc) {
    std::vector<BenchRow> rows;
    std::vector<std::string> modes;
    if (bc.mode == "both") {
        modes = {"softmax_attention", "linear_convolution"};
    } else if (bc.mode == "softmax_attention" || bc.mode == "linear_convolution") {
        modes = {bc.mode};
    } else {
        throw UsageError("unknown bench mode '" + bc.mode +
                         "' (expected softmax_attention, linear_convolution, or both)");
    }
    for (const std::string& m : modes) {
        std::vector<BenchRow> r = run_bench_mode(m, bc);
        rows.insert(rows.end(), r.begin(), r.end());
    }
    return rows;
}

inline std::string format_g17(double x) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

/// Fixed column order; floats at 17 significant digits for round-trip fidelity.
inline void write_bench_csv(const std::string& path, const std::vector<BenchRow>& rows,
                            const std::vector<BenchSlopes>& slopes) {
    std::ofstream out(path);
    if (!out) throw ResourceError("cannot open bench output file " + path);
    out << "mode,group,N,median_seconds,multiplies,status,wallclock_slope,multiply_degree\n";
    auto slope_of = [&](const std::string& mode) -> const BenchSlopes* {
        for (const BenchSlopes& s : slopes)
            if (s.mode == mode) return &s;
        return nullptr;
    };
    for (const BenchRow& r : rows) {
        const BenchSlopes* s = slope_of(r.mode);
        out << r.mode << "," << r.group << "," << r.n << ","
            << (r.skipped ? "" : format_g17(r.median_seconds)) << ","
            << (r.skipped ? "" : std::to_string(r.multiplies)) << ","
            << (r.skipped ? "skipped" : "ok") << ","
            << (s ? format_g17(s->wallclock_slope) : std::string()) << ","
            << (s ? std::to_string(s->multiply_degree) : std::string()) << "\n";
    }
}

}  // namespace platonic
