#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <random>

#include <json.hpp>

#include "platonic/checkpoint.hpp"
#include "platonic/model.hpp"
#include "vanilla_reference.hpp"

using namespace platonic;

namespace {

PointCloud random_cloud(std::size_t n_points, int dim, std::uint64_t seed, int vectors = 0) {
    std::mt19937_64 rng(seed);
    PointCloud pc;
    pc.positions = Tensor::uniform({n_points, static_cast<std::size_t>(dim)}, rng);
    pc.scalars = Tensor::uniform({n_points, 1}, rng);
    if (vectors > 0)
        pc.vectors = Tensor::uniform({n_points, static_cast<std::size_t>(vectors),
                                      static_cast<std::size_t>(dim)}, rng);
    return pc;
}

}  // namespace

TEST_CASE("lift copies scalars and frame-projects vectors") {
    FiniteGroup g = build_group("tetrahedron");
    PointCloud pc = random_cloud(4, 3, 131, /*vectors=*/1);
    Tensor lifted = lift(pc, g);
    CHECK(lifted.shape == Shape{4, 12, 1 + 3});
    std::size_t width = 4;
    for (std::size_t i = 0; i < 4; ++i)
        for (std::size_t R = 0; R < 12; ++R) {
            const double* row = lifted.data.data() + (i * 12 + R) * width;
            CHECK(row[0] == pc.scalars.data[i]);
            Tensor v({3}, {pc.vectors.data[i * 3], pc.vectors.data[i * 3 + 1],
                           pc.vectors.data[i * 3 + 2]});
            Tensor want = apply_inverse_element(g, static_cast<int>(R), v);
            for (std::size_t a = 0; a < 3; ++a)
                CHECK(row[1 + a] == doctest::Approx(want.data[a]).epsilon(1e-14));
        }
    // optional positional channel appends R^{-1} p
    Tensor with_pos = lift(pc, g, /*lift_positions=*/true);
    CHECK(with_pos.shape == Shape{4, 12, 1 + 6});
}

TEST_CASE("ape features are bounded, deterministic, and centered at the origin") {
    FiniteGroup g = build_group("C4");
    std::mt19937_64 rng(137);
    Tensor pos = Tensor::uniform({5, 2}, rng);
    Tensor a = ape(pos, g, 1.0, 3, 42);
    Tensor b = ape(pos, g, 1.0, 3, 42);
    CHECK(max_abs_diff(a, b) == 0.0);
    CHECK(a.shape == Shape{5, 4, 6});
    CHECK(max_abs(a) <= 1.0 + 1e-15);
    Tensor zero = ape(Tensor({1, 2}), g, 1.0, 3, 42);
    for (std::size_t R = 0; R < 4; ++R)
        for (std::size_t m = 0; m < 3; ++m) {
            CHECK(zero.data[R * 6 + 2 * m] == 1.0);      // cos 0
            CHECK(zero.data[R * 6 + 2 * m + 1] == 0.0);  // sin 0
        }
    CHECK_THROWS_AS(ape(pos, g, 0.0, 3, 42), ContractError);
}

TEST_CASE("trivial-group model with zero frequencies equals a vanilla Transformer") {
    ModelConfig mc;
    mc.group = "trivial3";
    mc.layers = 2;
    mc.channels = 8;
    mc.heads = 2;
    mc.learned_freqs = true;  // so the frequencies are settable parameters
    mc.seed = 7;
    Model m(mc);
    for (int l = 0; l < mc.layers; ++l)
        m.set_parameter("layer" + std::to_string(l) + ".freqs",
                        Tensor::zeros(m.parameter("layer" + std::to_string(l) + ".freqs").shape));
    for (std::uint64_t s : {139ull, 141ull}) {
        PointCloud pc = random_cloud(6, 3, s);
        double got = m.predict(pc).data[0];
        double want = vanilla::predict(m, pc);
        CHECK(std::abs(got - want) < 1e-10);
    }
}

TEST_CASE("graph readout is invariant; node vectors rotate") {
    ModelConfig mc;
    mc.seed = 11;
    Model m(mc);
    PointCloud pc = random_cloud(7, 3, 149);
    Tensor base = m.predict(pc);
    const FiniteGroup& g = m.group();
    std::mt19937_64 rng(151);
    for (std::size_t e = 0; e < g.order(); ++e) {
        Tensor rot = m.predict(rotate_cloud(g, static_cast<int>(e), pc));
        CHECK(max_abs_diff(rot, base) / std::max(1.0, max_abs(base)) < 1e-9);
    }
    for (int t = 0; t < 10; ++t) {
        Tensor tr = m.predict(translate_cloud(pc, Tensor::uniform({3}, rng, -5.0, 5.0)));
        CHECK(max_abs_diff(tr, base) / std::max(1.0, max_abs(base)) < 1e-9);
    }
}

TEST_CASE("ape deliberately breaks translation invariance end to end") {
    ModelConfig mc;
    mc.seed = 13;
    mc.ape_sigma = 1.0;
    Model m(mc);
    PointCloud pc = random_cloud(5, 3, 157);
    Tensor base = m.predict(pc);
    Tensor shifted = m.predict(translate_cloud(pc, Tensor::full({3}, 1.5)));
    CHECK(max_abs_diff(shifted, base) > 1e-6);
    // rotation invariance survives because the APE is frame-projected
    Tensor rot = m.predict(rotate_cloud(m.group(), 5, pc));
    CHECK(max_abs_diff(rot, base) / std::max(1.0, max_abs(base)) < 1e-9);
}

TEST_CASE("all four interaction variants stay invariant") {
    PointCloud pc = random_cloud(5, 3, 163);
    for (InteractionMode mode :
         {InteractionMode::softmax_attention, InteractionMode::linear_convolution})
        for (ScoreMode score : {ScoreMode::equivariant, ScoreMode::invariant}) {
            ModelConfig mc;
            mc.seed = 17;
            mc.mode = mode;
            mc.score = score;
            Model m(mc);
            Tensor base = m.predict(pc);
            for (std::size_t e = 0; e < m.group().order(); ++e) {
                Tensor rot = m.predict(rotate_cloud(m.group(), static_cast<int>(e), pc));
                CHECK(max_abs_diff(rot, base) / std::max(1.0, max_abs(base)) < 1e-9);
            }
        }
}

TEST_CASE("parameter bookkeeping: counts scale as expected") {
    ModelConfig mc;
    mc.group = "trivial2";
    mc.channels = 32;
    mc.heads = 2;
    Model trivial(mc);
    ModelConfig mc4 = mc;
    mc4.group = "C4";
    mc4.channels = 8;  // same total width |G| * C = 32
    Model c4(mc4);
    CHECK(trivial.hidden_linear_parameter_count() == 4 * c4.hidden_linear_parameter_count());

    ModelConfig big = mc4;
    big.channels = 16;
    CHECK(Model(big).hidden_linear_parameter_count() == 4 * c4.hidden_linear_parameter_count());

    CHECK(trivial.count_parameters() > trivial.hidden_linear_parameter_count());
    ModelConfig bad;
    bad.channels = 7;
    bad.heads = 2;
    CHECK_THROWS_AS([&]() { Model rejected(bad); }(), ContractError);
}

TEST_CASE("checkpoint round trip preserves predictions exactly") {
    ModelConfig mc;
    mc.seed = 19;
    mc.mode = InteractionMode::linear_convolution;
    mc.key_mode = KeyMode::constant_ones;
    mc.learned_freqs = true;
    Model m(mc);
    PointCloud pc = random_cloud(5, 3, 167);
    std::string path = "roundtrip_checkpoint.json";
    save_checkpoint(m, path);
    Model back = load_checkpoint(path);
    CHECK(back.config().group == mc.group);
    CHECK(max_abs_diff(back.predict(pc), m.predict(pc)) == 0.0);

    // malformed checkpoints are rejected with a clear error
    nlohmann::json j;
    {
        std::ifstream in(path);
        in >> j;
    }
    nlohmann::json wrong_shape = j;
    wrong_shape["parameters"]["lift.w"]["shape"] = {1, 1, 1};
    wrong_shape["parameters"]["lift.w"]["data"] = {0.0};
    {
        std::ofstream out(path);
        out << wrong_shape.dump();
    }
    CHECK_THROWS_AS(load_checkpoint(path), ContractError);
    nlohmann::json wrong_version = j;
    wrong_version["version"] = 999;
    {
        std::ofstream out(path);
        out << wrong_version.dump();
    }
    CHECK_THROWS(load_checkpoint(path));
    std::remove(path.c_str());
    CHECK_THROWS_AS(load_checkpoint("no_such_checkpoint.json"), ResourceError);
}

TEST_CASE("enum round trips and rejection of unknown names") {
    CHECK(parse_interaction_mode(to_string(InteractionMode::linear_convolution)) ==
          InteractionMode::linear_convolution);
    CHECK(parse_score_mode(to_string(ScoreMode::invariant)) == ScoreMode::invariant);
    CHECK(parse_key_mode(to_string(KeyMode::constant_ones)) == KeyMode::constant_ones);
    CHECK(parse_norm_placement(to_string(NormPlacement::post)) == NormPlacement::post);
    CHECK(parse_pooling(to_string(Pooling::sum)) == Pooling::sum);
    CHECK_THROWS_AS(parse_interaction_mode("fft_attention"), UsageError);
    CHECK_THROWS_AS(parse_pooling("max"), UsageError);
}

TEST_CASE("input validation at the model boundary") {
    ModelConfig mc;
    Model m(mc);
    PointCloud pc = random_cloud(4, 2, 173);  // wrong spatial dimension
    CHECK_THROWS_AS(m.predict(pc), ContractError);
    PointCloud pc2 = random_cloud(4, 3, 179, /*vectors=*/1);  // unexpected vectors
    CHECK_THROWS_AS(m.predict(pc2), ContractError);
}
