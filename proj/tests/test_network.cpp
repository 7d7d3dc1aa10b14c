// Construction, forward semantics, determinism, and the named architectures.

#include <stdexcept>

#include "doctest.h"
#include "moocxfer/network.hpp"
#include "moocxfer/presets.hpp"
#include "moocxfer/rng.hpp"

using namespace moocxfer;
using namespace moocxfer::nn;

TEST_CASE("dense(1)+sigmoid on 4-dim input has 5 parameters") {
    Network net = Network::build({LayerSpec::dense(1), LayerSpec::sigmoid()}, {4}, 1);
    CHECK(net.param_count() == 5);
}

TEST_CASE("same seed gives bit-identical parameters") {
    const auto specs = lstm_predictor_specs(5, 13);
    Network a = Network::build(specs, {5, 13}, 77);
    Network b = Network::build(specs, {5, 13}, 77);
    REQUIRE(a.param_count() == b.param_count());
    for (std::size_t i = 0; i < a.param_count(); ++i) CHECK(a.params()[i] == b.params()[i]);

    Network c = Network::build(specs, {5, 13}, 78);
    bool any_diff = false;
    for (std::size_t i = 0; i < a.param_count(); ++i)
        if (a.params()[i] != c.params()[i]) any_diff = true;
    CHECK(any_diff);
}

TEST_CASE("shape mismatch reports the offending layer index") {
    // Dense after Conv1D leaves rank 2, so a Reshape to a wrong size must name
    // its position in the chain.
    try {
        Network::build({LayerSpec::conv1d(4, 1), LayerSpec::reshape({99})}, {3, 5}, 1);
        FAIL("expected configuration error");
    } catch (const std::invalid_argument& e) {
        CHECK(std::string(e.what()).find("layer 1") != std::string::npos);
    }
}

TEST_CASE("conv1d with identity kernel-1 weights passes input through") {
    Network net = Network::build({LayerSpec::conv1d(3, 1)}, {4, 3}, 5);
    // W[oc][ic] identity, bias zero
    std::fill(net.params().begin(), net.params().end(), 0.0);
    for (int i = 0; i < 3; ++i) net.params()[i * 3 + i] = 1.0;
    Rng rng(3);
    Tensor input({2, 4, 3});
    for (double& v : input.values) v = uniform(rng, -2.0, 2.0);
    Tensor out = net.forward(input);
    for (std::size_t i = 0; i < input.size(); ++i)
        CHECK(out[i] == doctest::Approx(input[i]).epsilon(1e-12));
}

TEST_CASE("dense with zero parameters followed by sigmoid outputs 0.5") {
    Network net = Network::build({LayerSpec::dense(2), LayerSpec::sigmoid()}, {3}, 8);
    std::fill(net.params().begin(), net.params().end(), 0.0);
    Tensor input({1, 3}, {0.4, -1.0, 2.0});
    Tensor out = net.forward(input);
    for (double v : out.values) CHECK(v == doctest::Approx(0.5));
}

TEST_CASE("lstm with zero parameters outputs zero") {
    Network net = Network::build({LayerSpec::lstm(4)}, {3, 2}, 8);
    std::fill(net.params().begin(), net.params().end(), 0.0);
    Tensor input({1, 3, 2}, {1.0, -1.0, 0.5, 2.0, -0.5, 0.25});
    Tensor out = net.forward(input);
    for (double v : out.values) CHECK(v == doctest::Approx(0.0));
}

TEST_CASE("forward is pure: repeated calls are bit-identical") {
    Network net = Network::build(lstm_predictor_specs(4, 6), {4, 6}, 11);
    Rng rng(12);
    Tensor input({3, 4, 6});
    for (double& v : input.values) v = uniform(rng, 0.0, 1.0);
    Tensor a = net.forward(input);
    Tensor b = net.forward(input);
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i] == b[i]);
}

TEST_CASE("forward output is finite on finite input") {
    const auto specs = lstm_ae_specs(5, 13).full();
    Network net = Network::build(specs, {5, 13}, 3);
    Rng rng(4);
    Tensor input({4, 5, 13});
    for (double& v : input.values) v = uniform(rng, 0.0, 1.0);
    CHECK(net.forward(input).all_finite());
}

TEST_CASE("non-finite input is rejected") {
    Network net = Network::build({LayerSpec::dense(1)}, {2}, 1);
    Tensor input({1, 2}, {1.0, std::numeric_limits<double>::quiet_NaN()});
    CHECK_THROWS_AS(net.forward(input), std::invalid_argument);
}

TEST_CASE("backward without forward is a state error") {
    Network net = Network::build({LayerSpec::dense(1)}, {2}, 1);
    Tensor grad({1, 1}, {1.0});
    CHECK_THROWS_AS(net.backward(grad), std::logic_error);
}

TEST_CASE("bilstm output at time t reacts to future inputs") {
    Network net = Network::build({LayerSpec::bilstm(3)}, {5, 2}, 21);
    Rng rng(22);
    Tensor input({1, 5, 2});
    for (double& v : input.values) v = uniform(rng, -1.0, 1.0);
    Tensor base = net.forward(input);

    Tensor poked = input;
    poked.values[4 * 2 + 1] += 0.5;  // t = 4, last week
    Tensor out = net.forward(poked);
    // output at t = 0 must change through the reverse direction
    bool changed = false;
    for (std::size_t j = 0; j < 6; ++j)
        if (out.values[j] != base.values[j]) changed = true;
    CHECK(changed);
}

TEST_CASE("autoencoder preset for 13 event types reproduces the published chain") {
    const AutoencoderSpecs specs = lstm_ae_specs(9, 13);
    const std::vector<LayerSpec> chain = specs.full();
    REQUIRE(chain.size() == 11);
    CHECK(chain[0].kind == LayerKind::Conv1D);
    CHECK(chain[0].units == 12);
    CHECK(chain[1].kind == LayerKind::LeakyReLU);
    CHECK(chain[1].alpha == doctest::Approx(0.2));
    CHECK(chain[2].kind == LayerKind::BiLstm);
    CHECK(chain[2].units == 8);
    CHECK(chain[4].kind == LayerKind::Conv1D);
    CHECK(chain[4].units == 8);
    CHECK(chain[5].kind == LayerKind::Flatten);
    CHECK(chain[6].kind == LayerKind::Reshape);
    CHECK(chain[7].kind == LayerKind::BiLstm);
    CHECK(chain[7].units == 6);
    CHECK(chain[9].kind == LayerKind::Conv1D);
    CHECK(chain[9].units == 13);
    CHECK(chain[10].kind == LayerKind::Sigmoid);

    // the full chain type-checks end to end and preserves the input shape
    Network net = Network::build(chain, {9, 13}, 2);
    CHECK(net.output_shape() == Shape{9, 13});

    // encoder bottleneck: 8 per time unit
    Network enc = Network::build(specs.encoder, {9, 13}, 2);
    CHECK(enc.output_shape() == Shape{72});
}
