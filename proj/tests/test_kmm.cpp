// Kernel mean matching against a long-run reference solver on small
// instances, the identical-sample case, and the two-cluster sanity check.

#include <cmath>
#include <numeric>

#include "doctest.h"
#include "moocxfer/kmm.hpp"
#include "moocxfer/rng.hpp"

using namespace moocxfer;
using namespace moocxfer::transfer;

namespace {

Tensor gaussian_sample(std::size_t n, std::size_t d, double mean, double sd, std::uint64_t seed) {
    Rng rng(seed);
    Tensor t({n, d});
    for (double& v : t.values) v = normal(rng, mean, sd);
    return t;
}

// Independent reference: plain projected gradient with a tiny fixed step run
// for many iterations, with its own projection code.
std::vector<double> reference_kmm(const Tensor& source, const Tensor& target, double sigma,
                                  double bound, double mean_tol) {
    const std::size_t ns = source.dim(0), nt = target.dim(0), d = source.dim(1);
    auto kernel = [&](const double* a, const double* b) {
        double s = 0.0;
        for (std::size_t j = 0; j < d; ++j) s += (a[j] - b[j]) * (a[j] - b[j]);
        return std::exp(-s / (2.0 * sigma * sigma));
    };
    std::vector<double> kss(ns * ns), kappa(ns, 0.0);
    for (std::size_t i = 0; i < ns; ++i)
        for (std::size_t j = 0; j < ns; ++j)
            kss[i * ns + j] =
                kernel(source.values.data() + i * d, source.values.data() + j * d);
    for (std::size_t i = 0; i < ns; ++i)
        for (std::size_t j = 0; j < nt; ++j)
            kappa[i] += kernel(source.values.data() + i * d, target.values.data() + j * d);

    std::vector<double> w(ns, 1.0);
    const double dns = static_cast<double>(ns), dnt = static_cast<double>(nt);
    const double step = 0.05 * dns;  // small relative to the 2/ns^2 curvature scale
    for (int iter = 0; iter < 200000; ++iter) {
        std::vector<double> g(ns, 0.0);
        for (std::size_t i = 0; i < ns; ++i)
            for (std::size_t j = 0; j < ns; ++j) g[j] += w[i] * kss[i * ns + j];
        for (std::size_t j = 0; j < ns; ++j)
            g[j] = 2.0 * g[j] / (dns * dns) - 2.0 * kappa[j] / (dns * dnt);
        for (std::size_t j = 0; j < ns; ++j) w[j] -= step * g[j];
        // projection: clip then recenter the mean into the band, repeatedly
        for (int round = 0; round < 32; ++round) {
            for (double& v : w) v = std::min(bound, std::max(0.0, v));
            double mean = std::accumulate(w.begin(), w.end(), 0.0) / dns;
            if (std::abs(mean - 1.0) <= mean_tol) break;
            const double target_mean = mean > 1.0 + mean_tol ? 1.0 + mean_tol : 1.0 - mean_tol;
            for (double& v : w) v += target_mean - mean;
        }
    }
    return w;
}

}  // namespace

TEST_CASE("identical samples give unit weights") {
    const Tensor x = gaussian_sample(30, 4, 0.0, 1.0, 5);
    KmmConfig cfg;
    const InstanceWeights w = kmm_weights(x, x, cfg);
    for (double v : w.weights) {
        CHECK(v >= 0.99);
        CHECK(v <= 1.01);
    }
}

TEST_CASE("weights honor the bound and the mean band") {
    const Tensor s = gaussian_sample(40, 3, 0.0, 1.0, 7);
    const Tensor t = gaussian_sample(25, 3, 1.5, 0.7, 8);
    KmmConfig cfg;
    cfg.bound = 3.0;
    const InstanceWeights w = kmm_weights(s, t, cfg);
    double mean = 0.0;
    for (double v : w.weights) {
        CHECK(v >= 0.0);
        CHECK(v <= 3.0);
        mean += v;
    }
    mean /= static_cast<double>(w.weights.size());
    CHECK(std::abs(mean - 1.0) <= cfg.mean_tolerance + 1e-12);
}

TEST_CASE("objective matches a long-run reference solve on small instances") {
    for (std::uint64_t seed = 0; seed < 3; ++seed) {
        const std::size_t ns = 12 + 2 * seed, nt = 9 + seed;
        const Tensor s = gaussian_sample(ns, 2, 0.0, 1.0, 100 + seed);
        const Tensor t = gaussian_sample(nt, 2, 0.8, 0.9, 200 + seed);

        KmmConfig cfg;
        cfg.max_iters = 2000;
        const InstanceWeights w = kmm_weights(s, t, cfg);
        const auto ref = reference_kmm(s, t, w.sigma, cfg.bound, cfg.mean_tolerance);
        const double ref_obj = kmm_objective(s, t, w.sigma, ref);
        CHECK(w.objective <= ref_obj + 1e-3);
        CHECK(std::abs(w.objective - ref_obj) <= 1e-3);
    }
}

TEST_CASE("target cluster membership drives the weights") {
    // source has two well-separated clusters; target sits on the first
    Rng rng(33);
    const std::size_t per = 20, d = 2;
    Tensor s({2 * per, d});
    for (std::size_t i = 0; i < per; ++i) {
        s.values[i * d] = normal(rng, 0.0, 0.3);
        s.values[i * d + 1] = normal(rng, 0.0, 0.3);
        s.values[(per + i) * d] = normal(rng, 6.0, 0.3);
        s.values[(per + i) * d + 1] = normal(rng, 6.0, 0.3);
    }
    const Tensor t = gaussian_sample(30, d, 0.0, 0.3, 34);

    const InstanceWeights w = kmm_weights(s, t, KmmConfig{});
    double near = 0.0, far = 0.0;
    for (std::size_t i = 0; i < per; ++i) {
        near += w.weights[i];
        far += w.weights[per + i];
    }
    CHECK(near / static_cast<double>(per) > 3.0 * (far / static_cast<double>(per) + 1e-9));
}

TEST_CASE("empty samples are rejected") {
    const Tensor ok = gaussian_sample(5, 2, 0.0, 1.0, 40);
    const Tensor empty({0, 2});
    CHECK_THROWS(kmm_weights(empty, ok, KmmConfig{}));
    CHECK_THROWS(kmm_weights(ok, empty, KmmConfig{}));
}
