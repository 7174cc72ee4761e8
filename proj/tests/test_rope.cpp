#include <doctest.h>

#include <cmath>
#include <random>

#include "platonic/rope.hpp"

using namespace platonic;

TEST_CASE("apply_rope matches the explicit 2x2 block rotation") {
    FrequencySet fs = make_frequencies(3, 4, 1, 1.0, 101);
    std::mt19937_64 rng(37);
    Tensor p = Tensor::uniform({3}, rng), x = Tensor::uniform({4}, rng);
    Tensor y = apply_rope(fs, p, x);
    for (std::size_t k = 0; k < 2; ++k) {
        double theta = 0.0;
        for (int a = 0; a < 3; ++a) theta += fs.freqs.data[k * 3 + a] * p.data[a];
        double c = std::cos(theta), s = std::sin(theta);
        CHECK(y.data[2 * k] == doctest::Approx(c * x.data[2 * k] - s * x.data[2 * k + 1]));
        CHECK(y.data[2 * k + 1] == doctest::Approx(s * x.data[2 * k] + c * x.data[2 * k + 1]));
    }
}

TEST_CASE("rope is a homomorphism, orthogonal, and score-translation-invariant") {
    FrequencySet fs = make_frequencies(3, 8, 1, 1.3, 202);
    std::mt19937_64 rng(41);
    for (int inst = 0; inst < 50; ++inst) {
        Tensor p1 = Tensor::uniform({3}, rng), p2 = Tensor::uniform({3}, rng);
        Tensor x = Tensor::uniform({8}, rng);
        CHECK(max_abs_diff(apply_rope(fs, add(p1, p2), x),
                           apply_rope(fs, p1, apply_rope(fs, p2, x))) < 1e-13);
        CHECK(max_abs_diff(apply_rope(fs, scale(p1, -1.0), apply_rope(fs, p1, x)), x) < 1e-13);
        Tensor q = Tensor::uniform({8}, rng), k = Tensor::uniform({8}, rng);
        Tensor t = Tensor::uniform({3}, rng, -4.0, 4.0);
        CHECK(rope_score(q, k, p1, p2, fs) ==
              doctest::Approx(rope_score(q, k, add(p1, t), add(p2, t), fs)).epsilon(1e-12));
    }
}

TEST_CASE("frequency steering equals frame projection of positions") {
    std::mt19937_64 rng(43);
    for (const char* name : {"C4", "tetrahedron"}) {
        FiniteGroup g = build_group(name);
        FrequencySet fs = make_frequencies(g.dim, 6, 1, 1.0, 303);
        std::size_t n = static_cast<std::size_t>(g.dim);
        for (std::size_t e = 0; e < g.order(); ++e)
            for (int inst = 0; inst < 10; ++inst) {
                Tensor q = Tensor::uniform({6}, rng), k = Tensor::uniform({6}, rng);
                Tensor pi = Tensor::uniform({n}, rng), pj = Tensor::uniform({n}, rng);
                double via_proj = rope_score(q, k, apply_inverse_element(g, static_cast<int>(e), pi),
                                             apply_inverse_element(g, static_cast<int>(e), pj), fs);
                double via_steer =
                    rope_score(q, k, pi, pj, steer_frequencies(fs, g, static_cast<int>(e)));
                CHECK(via_proj == doctest::Approx(via_steer).epsilon(1e-12));
            }
    }
}

TEST_CASE("multi-head frequency sets keep heads independent") {
    FrequencySet fs = make_frequencies(2, 4, 3, 1.0, 404);
    CHECK(fs.freqs.shape == Shape{3, 2, 2});
    std::mt19937_64 rng(47);
    Tensor p = Tensor::uniform({2}, rng), x = Tensor::uniform({4}, rng);
    // heads disagree because their frequencies are independent draws
    Tensor y0 = apply_rope(fs, p, x, 0), y2 = apply_rope(fs, p, x, 2);
    CHECK(max_abs_diff(y0, y2) > 1e-6);
}

TEST_CASE("construction and argument errors") {
    CHECK_THROWS_AS(make_frequencies(3, 5, 1, 1.0, 0), ContractError);
    CHECK_THROWS_AS(make_frequencies(3, 0, 1, 1.0, 0), ContractError);
    CHECK_THROWS_AS(make_frequencies(3, 4, 1, 0.0, 0), ContractError);
    FrequencySet fs = make_frequencies(3, 4, 1, 1.0, 1);
    std::mt19937_64 rng(53);
    CHECK_THROWS_AS(apply_rope(fs, Tensor::uniform({2}, rng), Tensor::uniform({4}, rng)),
                    DimensionError);
    CHECK_THROWS_AS(apply_rope(fs, Tensor::uniform({3}, rng), Tensor::uniform({6}, rng)),
                    DimensionError);
    FiniteGroup g2 = build_group("C4");
    CHECK_THROWS_AS(steer_frequencies(fs, g2, 0), DimensionError);
    FiniteGroup g3 = build_group("trivial3");
    CHECK_THROWS_AS(steer_frequencies(fs, g3, 5), IndexError);
}
