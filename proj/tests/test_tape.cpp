#include <doctest.h>

#include <cmath>
#include <functional>
#include <random>

#include "platonic/tape.hpp"

using namespace platonic;

namespace {

// Finite-difference check of d(scalar graph)/d(inputs) for every input entry.
// `build` must record the full graph on the given tape from the given
// parameter handles and return the scalar loss handle.
void fd_check(std::vector<Tensor> inputs,
              const std::function<Tape::Handle(Tape&, const std::vector<Tape::Handle>&)>& build,
              double tol = 1e-7, double h = 1e-5) {
    auto eval = [&](std::vector<Tensor>* grads) {
        Tape t;
        std::vector<Tape::Handle> hs;
        for (const Tensor& in : inputs) hs.push_back(t.param(in));
        Tape::Handle loss = build(t, hs);
        double val = t.value(loss).data[0];
        if (grads) {
            t.backward(loss);
            grads->clear();
            for (Tape::Handle ph : hs) grads->push_back(t.grad(ph));
        }
        return val;
    };
    std::vector<Tensor> grads;
    eval(&grads);
    for (std::size_t p = 0; p < inputs.size(); ++p)
        for (std::size_t j = 0; j < inputs[p].numel(); ++j) {
            double orig = inputs[p].data[j];
            inputs[p].data[j] = orig + h;
            double fp = eval(nullptr);
            inputs[p].data[j] = orig - h;
            double fm = eval(nullptr);
            inputs[p].data[j] = orig;
            double fd = (fp - fm) / (2 * h);
            double an = grads[p].numel() ? grads[p].data[j] : 0.0;
            double denom = std::max({1.0, std::abs(fd), std::abs(an)});
            CHECK(std::abs(fd - an) / denom < tol);
        }
}

}  // namespace

TEST_CASE("gradients of arithmetic primitives match finite differences") {
    std::mt19937_64 rng(11);
    Tensor a = Tensor::uniform({2, 3}, rng), b = Tensor::uniform({3}, rng);
    // mixed broadcast graph so every backward path is exercised
    fd_check({a, b}, [](Tape& t, const std::vector<Tape::Handle>& h) {
        Tape::Handle s = t.add(h[0], h[1]);
        Tape::Handle d = t.sub(s, t.scale(h[0], 0.5));
        Tape::Handle m = t.mul(d, h[1]);
        return t.sum_all(t.mul(m, m));
    });
}

TEST_CASE("matmul gradients, including broadcast batching") {
    std::mt19937_64 rng(13);
    Tensor a = Tensor::uniform({2, 3, 4}, rng), b = Tensor::uniform({4, 2}, rng);
    fd_check({a, b}, [](Tape& t, const std::vector<Tape::Handle>& h) {
        Tape::Handle y = t.matmul(h[0], h[1]);
        return t.sum_all(t.mul(y, y));
    });
}

TEST_CASE("softmax gradient matches finite differences") {
    std::mt19937_64 rng(17);
    Tensor x = Tensor::uniform({3, 5}, rng, -2.0, 2.0);
    Tensor w = Tensor::uniform({3, 5}, rng);
    fd_check({x, w}, [](Tape& t, const std::vector<Tape::Handle>& h) {
        return t.sum_all(t.mul(t.softmax_lastaxis(h[0]), h[1]));
    });
}

TEST_CASE("elementwise nonlinearity gradients") {
    std::mt19937_64 rng(19);
    Tensor x = Tensor::uniform({7}, rng, -2.0, 2.0);
    fd_check({x}, [](Tape& t, const std::vector<Tape::Handle>& h) {
        Tape::Handle y = t.add(t.gelu(h[0]), t.mul(t.sin(h[0]), t.cos(h[0])));
        return t.sum_all(t.mul(y, y));
    });
    Tensor pos = Tensor::uniform({5}, rng, 0.5, 3.0);
    fd_check({pos}, [](Tape& t, const std::vector<Tape::Handle>& h) {
        return t.sum_all(t.rsqrt(h[0]));
    });
}

TEST_CASE("shape-moving primitives route gradients correctly") {
    std::mt19937_64 rng(23);
    Tensor x = Tensor::uniform({2, 3, 2}, rng);
    Tensor w = Tensor::uniform({3, 4}, rng);
    fd_check({x, w}, [](Tape& t, const std::vector<Tape::Handle>& h) {
        Tape::Handle y = t.permute(h[0], {1, 0, 2});     // (3, 2, 2)
        y = t.reshape(y, {3, 4});
        y = t.mul(y, h[1]);
        y = t.sum_axis(y, 1);
        // repeated gather indices exercise the scatter-add backward
        y = t.gather(y, 0, {0, 2, 2, 1});
        return t.sum_all(t.mul(y, y));
    });
}

TEST_CASE("gradient accumulates across reuse of one node") {
    Tape t;
    Tape::Handle x = t.param(Tensor({2}, {3.0, 4.0}));
    Tape::Handle loss = t.sum_all(t.add(x, x));
    t.backward(loss);
    CHECK(t.grad(x).data == std::vector<double>{2.0, 2.0});
}

TEST_CASE("constants receive no gradient and empty grads mean zero") {
    Tape t;
    Tape::Handle c = t.constant(Tensor({2}, {1.0, 2.0}));
    Tape::Handle p = t.param(Tensor({2}, {5.0, 6.0}));
    Tape::Handle dead = t.param(Tensor({1}, {9.0}));  // not part of the graph
    Tape::Handle loss = t.sum_all(t.mul(c, p));
    t.backward(loss);
    CHECK(t.grad(c).numel() == 0);
    CHECK(t.grad(dead).numel() == 0);
    CHECK(t.grad(p).data == std::vector<double>{1.0, 2.0});
}

TEST_CASE("backward demands a scalar loss") {
    Tape t;
    Tape::Handle x = t.param(Tensor({3}, {1, 2, 3}));
    CHECK_THROWS_AS(t.backward(x), ContractError);
    CHECK_THROWS_AS(t.value(42), IndexError);
}
