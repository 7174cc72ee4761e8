#include <doctest.h>

#include <random>

#include "platonic/fourier.hpp"

using namespace platonic;

TEST_CASE("tetrahedral irrep dimensions decompose the regular representation") {
    FiniteGroup g = build_group("tetrahedron");
    TetraFourierBasis basis = build_tetra_fourier_basis(g);
    CHECK(basis.q_basis.shape == Shape{12, 12});
    // columns: 1 (trivial) + 2 (complex pair) + 3 x 3 (standard) = 12
    CHECK(1 + 2 + 9 == 12);
}

TEST_CASE("block-diagonal path reproduces the spatial convolution") {
    FiniteGroup g = build_group("tetrahedron");
    TetraFourierBasis basis = build_tetra_fourier_basis(g);
    std::mt19937_64 rng(79);
    GroupKernel k = make_group_kernel(g, 6, 8, rng, /*with_bias=*/true);
    for (double& b : k.bias->data) b = std::uniform_real_distribution<>(-1, 1)(rng);
    FourierKernel fk = kernel_to_fourier(k, basis);
    Tensor f = Tensor::uniform({5, 12, 8}, rng);
    CHECK(max_abs_diff(group_conv_apply(k, f), fourier_conv_apply(fk, basis, f)) < 1e-11);
}

TEST_CASE("kernel -> Fourier -> kernel round trip is exact to fp tolerance") {
    FiniteGroup g = build_group("tetrahedron");
    TetraFourierBasis basis = build_tetra_fourier_basis(g);
    std::mt19937_64 rng(83);
    GroupKernel k = make_group_kernel(g, 4, 7, rng);
    GroupKernel back = fourier_to_kernel(kernel_to_fourier(k, basis), basis);
    CHECK(max_abs_diff(k.w, back.w) < 1e-11);
}

TEST_CASE("Fourier parameter identity and exact 1/4 multiply ratio") {
    FiniteGroup g = build_group("tetrahedron");
    TetraFourierBasis basis = build_tetra_fourier_basis(g);
    std::mt19937_64 rng(89);
    for (std::size_t c : {8ul, 16ul}) {
        GroupKernel k = make_group_kernel(g, c, c, rng);
        FourierKernel fk = kernel_to_fourier(k, basis);
        CHECK(fk.parameter_count() == 12 * c * c);
        Tensor f = Tensor::uniform({3, 12, c}, rng);
        opcount::reset();
        group_conv_apply(k, f);
        long long spatial = opcount::multiplies;
        opcount::reset();
        fourier_conv_apply(fk, basis, f);
        long long block = opcount::multiplies;
        CHECK(spatial == 4 * block);
    }
}

TEST_CASE("non-tetrahedral inputs are rejected") {
    FiniteGroup g = build_group("tetrahedron");
    TetraFourierBasis basis = build_tetra_fourier_basis(g);
    FiniteGroup octa = build_group("octahedron");
    CHECK_THROWS_AS(build_tetra_fourier_basis(octa), ContractError);
    std::mt19937_64 rng(97);
    GroupKernel k8 = make_group_kernel(octa, 2, 2, rng);
    CHECK_THROWS_AS(kernel_to_fourier(k8, basis), ContractError);
    GroupKernel k = make_group_kernel(g, 2, 2, rng);
    FourierKernel fk = kernel_to_fourier(k, basis);
    CHECK_THROWS_AS(fourier_conv_apply(fk, basis, Tensor::uniform({2, 24, 2}, rng)),
                    ContractError);
    CHECK_THROWS_AS(fourier_conv_apply(fk, basis, Tensor::uniform({2, 12, 3}, rng)),
                    ContractError);
}
