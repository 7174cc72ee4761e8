#include <doctest.h>

#include <map>
#include <random>

#include "platonic/group.hpp"

using namespace platonic;

TEST_CASE("group orders and validation for the full catalog") {
    const std::map<std::string, std::size_t> orders = {
        {"trivial2", 1}, {"trivial3", 1},    {"flip2", 2},      {"flip3", 2},
        {"signflips3", 8}, {"C4", 4},        {"C6", 6},         {"D4", 8},
        {"D6", 12},      {"tetrahedron", 12}, {"octahedron", 24}, {"icosahedron", 60}};
    for (const auto& [name, order] : orders) {
        CAPTURE(name);
        FiniteGroup g = build_group(name);
        CHECK(g.order() == order);
        CHECK_NOTHROW(validate_group(g));
        // element 0 is the identity matrix
        for (int a = 0; a < g.dim; ++a)
            for (int b = 0; b < g.dim; ++b)
                CHECK(g.elements[0].data[a * g.dim + b] == doctest::Approx(a == b ? 1.0 : 0.0));
    }
    CHECK_THROWS_AS(build_group("dodecahedron"), ConstructionError);
    CHECK_THROWS_AS(build_group(""), ConstructionError);
}

TEST_CASE("reflection flags") {
    CHECK_FALSE(build_group("C4").has_reflections);
    CHECK(build_group("D4").has_reflections);
    CHECK(build_group("flip3").has_reflections);
    CHECK(build_group("signflips3").has_reflections);
    CHECK_FALSE(build_group("tetrahedron").has_reflections);
    CHECK_FALSE(build_group("icosahedron").has_reflections);
}

TEST_CASE("platonic rotation groups have unit determinant") {
    for (const char* name : {"tetrahedron", "octahedron", "icosahedron", "C6"}) {
        FiniteGroup g = build_group(name);
        for (const Tensor& m : g.elements) CHECK(detail::det(m) == doctest::Approx(1.0));
    }
}

TEST_CASE("validation detects corrupted tables and matrices") {
    FiniteGroup g = build_group("flip3");
    g.cayley[1][1] = 1;  // breaks the Latin square
    CHECK_THROWS_AS(validate_group(g), ConstructionError);

    FiniteGroup g2 = build_group("C4");
    g2.elements[2].data[0] += 0.1;  // no longer orthogonal / consistent
    CHECK_THROWS_AS(validate_group(g2), ConstructionError);

    FiniteGroup g3 = build_group("D4");
    g3.inverse[3] = 0;
    CHECK_THROWS_AS(validate_group(g3), ConstructionError);
}

TEST_CASE("regular action is a permutation obeying the composition law") {
    std::mt19937_64 rng(29);
    for (const char* name : {"C4", "D4", "tetrahedron"}) {
        FiniteGroup g = build_group(name);
        std::size_t G = g.order();
        for (std::size_t i = 0; i < G; ++i) {
            std::vector<std::size_t> idx = regular_action_indices(g, static_cast<int>(i));
            std::vector<bool> seen(G, false);
            for (std::size_t j : idx) {
                CHECK(j < G);
                CHECK_FALSE(seen[j]);
                seen[j] = true;
            }
        }
        Tensor f = Tensor::uniform({3, G, 2}, rng);
        CHECK(max_abs_diff(act_on_group_axis(g, 0, f), f) == 0.0);
        for (std::size_t i = 0; i < G; ++i)
            for (std::size_t j = 0; j < G; ++j) {
                Tensor lhs = act_on_group_axis(g, static_cast<int>(i),
                                               act_on_group_axis(g, static_cast<int>(j), f));
                Tensor rhs = act_on_group_axis(g, g.cayley[i][j], f);
                CHECK(max_abs_diff(lhs, rhs) == 0.0);
            }
    }
}

TEST_CASE("apply_element and apply_inverse_element are mutually inverse") {
    std::mt19937_64 rng(31);
    FiniteGroup g = build_group("octahedron");
    Tensor v = Tensor::uniform({3}, rng);
    for (std::size_t e = 0; e < g.order(); ++e) {
        Tensor w = apply_inverse_element(g, static_cast<int>(e),
                                         apply_element(g, static_cast<int>(e), v));
        CHECK(max_abs_diff(w, v) < 1e-12);
    }
}
