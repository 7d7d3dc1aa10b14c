// Loss values against hand-computed cases and Adam against an independent
// scalar reimplementation.

#include <cmath>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "moocxfer/adam.hpp"
#include "moocxfer/losses.hpp"
#include "moocxfer/rng.hpp"

using namespace moocxfer;
using namespace moocxfer::nn;

TEST_CASE("bce at p=0.5 is ln 2") {
    Tensor p({3}, {0.5, 0.5, 0.5});
    CHECK(bce_loss(p, {0, 1, 1}).value == doctest::Approx(std::log(2.0)).epsilon(1e-9));
}

TEST_CASE("bce at exact predictions is tiny after clamping") {
    Tensor p({4}, {0.0, 1.0, 1.0, 0.0});
    CHECK(bce_loss(p, {0, 1, 1, 0}).value <= 1e-6);
}

TEST_CASE("zero-weight samples are ignored") {
    Tensor p({2}, {0.3, 0.9});
    const std::vector<double> w = {2.0, 0.0};
    const double la = -std::log(1.0 - 0.3);  // label 0 on p=0.3
    CHECK(bce_loss(p, {0, 0}, &w).value == doctest::Approx(la).epsilon(1e-12));
}

TEST_CASE("bce rejects length mismatch") {
    Tensor p({2}, {0.5, 0.5});
    CHECK_THROWS(bce_loss(p, {1}));
}

TEST_CASE("mse basics") {
    Tensor a({2, 2}, {1.0, 1.0, 1.0, 1.0});
    Tensor b({2, 2}, {0.0, 0.0, 0.0, 0.0});
    CHECK(mse_loss(a, a).value == doctest::Approx(0.0));
    CHECK(mse_loss(b, a).value == doctest::Approx(1.0));
    Tensor c({3}, {0, 0, 0});
    CHECK_THROWS(mse_loss(a, c));
}

namespace {

// Independent scalar Adam, written directly from the update equations.
struct ScalarAdam {
    double m = 0, v = 0;
    int t = 0;
    double lr, b1, b2, eps;
    ScalarAdam(double lr_, double b1_, double b2_, double eps_)
        : lr(lr_), b1(b1_), b2(b2_), eps(eps_) {}
    double update(double theta, double g) {
        ++t;
        m = b1 * m + (1 - b1) * g;
        v = b2 * v + (1 - b2) * g * g;
        const double mh = m / (1 - std::pow(b1, t));
        const double vh = v / (1 - std::pow(b2, t));
        return theta - lr * mh / (std::sqrt(vh) + eps);
    }
};

}  // namespace

TEST_CASE("zero gradient leaves parameters unchanged") {
    AdamState st = AdamState::create(3, 0.01);
    std::vector<double> params = {1.0, -2.0, 0.5};
    const std::vector<double> before = params;
    adam_step(st, params, {0.0, 0.0, 0.0});
    for (std::size_t i = 0; i < 3; ++i) CHECK(params[i] == before[i]);
    CHECK(st.step == 1);
}

TEST_CASE("first step moves by about -lr * sign(gradient)") {
    AdamState st = AdamState::create(2, 0.001);
    std::vector<double> params = {0.0, 0.0};
    adam_step(st, params, {3.7, -0.02});
    CHECK(params[0] == doctest::Approx(-0.001).epsilon(1e-4));
    CHECK(params[1] == doctest::Approx(0.001).epsilon(1e-4));
}

TEST_CASE("ten steps match the scalar oracle to 1e-12") {
    AdamState st = AdamState::create(2, 0.003);
    std::vector<double> params = {0.4, -1.1};
    ScalarAdam oracle0(0.003, st.beta1, st.beta2, st.epsilon);
    ScalarAdam oracle1(0.003, st.beta1, st.beta2, st.epsilon);
    double t0 = 0.4, t1 = -1.1;

    Rng rng(17);
    for (int step = 0; step < 10; ++step) {
        const double g0 = uniform(rng, -1.0, 1.0);
        const double g1 = uniform(rng, -1.0, 1.0);
        adam_step(st, params, {g0, g1});
        t0 = oracle0.update(t0, g0);
        t1 = oracle1.update(t1, g1);
        CHECK(params[0] == doctest::Approx(t0).epsilon(1e-12));
        CHECK(params[1] == doctest::Approx(t1).epsilon(1e-12));
    }
}

TEST_CASE("non-finite gradients are rejected with a diagnostic") {
    AdamState st = AdamState::create(2);
    std::vector<double> params = {0.0, 0.0};
    CHECK_THROWS_AS(adam_step(st, params, {1.0, std::nan("")}), std::invalid_argument);
}
