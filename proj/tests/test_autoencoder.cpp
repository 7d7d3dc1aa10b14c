// Autoencoder training sanity, embedding layout, T-PCA alignment, and the
// linear autoencoder against the exact PCA solution.

#include <cmath>
#include <stdexcept>

#include "doctest.h"
#include "moocxfer/autoencoder.hpp"
#include "moocxfer/rng.hpp"
#include "moocxfer/tpca.hpp"

using namespace moocxfer;
using namespace moocxfer::repr;

namespace {

// Low-rank sequence data in [0,1]: a latent level per student drives all
// channels with per-channel gains plus noise.
Tensor latent_sequences(std::size_t n, std::size_t weeks, std::size_t types, std::uint64_t seed,
                        double noise = 0.05) {
    Rng rng(seed);
    Tensor x({n, weeks, types});
    std::vector<double> gain(types);
    for (double& g : gain) g = uniform(rng, 0.3, 1.0);
    for (std::size_t i = 0; i < n; ++i) {
        const double level = uniform(rng, 0.2, 1.0);
        for (std::size_t w = 0; w < weeks; ++w) {
            const double decay = 1.0 - 0.08 * static_cast<double>(w);
            for (std::size_t e = 0; e < types; ++e) {
                double v = level * decay * gain[e] + normal(rng, 0.0, noise);
                x.values[(i * weeks + w) * types + e] = std::clamp(v, 0.0, 1.0);
            }
        }
    }
    return x;
}

}  // namespace

TEST_CASE("autoencoder training reduces the reconstruction loss") {
    const Tensor x = latent_sequences(160, 4, 6, 11);
    TrainConfig cfg;
    cfg.epochs = 30;
    cfg.seed = 5;
    AutoencoderModel model = train_autoencoder(x, cfg);
    REQUIRE(model.loss_trace.size() == 30);
    CHECK(model.loss_trace.back() < model.loss_trace.front());
}

TEST_CASE("fixed seed reproduces the loss trace exactly") {
    const Tensor x = latent_sequences(80, 3, 5, 13);
    TrainConfig cfg;
    cfg.epochs = 8;
    cfg.seed = 21;
    AutoencoderModel a = train_autoencoder(x, cfg);
    AutoencoderModel b = train_autoencoder(x, cfg);
    REQUIRE(a.loss_trace.size() == b.loss_trace.size());
    for (std::size_t i = 0; i < a.loss_trace.size(); ++i)
        CHECK(a.loss_trace[i] == b.loss_trace[i]);
}

TEST_CASE("small input dimension reconstructs to high precision") {
    // 4 input channels against an 8-per-unit bottleneck: capacity to spare.
    const Tensor x = latent_sequences(160, 3, 4, 17, 0.0);
    TrainConfig cfg;
    cfg.epochs = 200;
    cfg.batch_size = 16;
    cfg.seed = 3;
    AutoencoderModel model = train_autoencoder(x, cfg);
    CHECK(model.loss_trace.back() < 1e-3);
}

TEST_CASE("encode keeps the per-unit layout and handles empty input") {
    const Tensor x = latent_sequences(50, 4, 6, 19);
    TrainConfig cfg;
    cfg.epochs = 3;
    AutoencoderModel model = train_autoencoder(x, cfg);

    EmbeddingSet emb = encode(model, x);
    CHECK(emb.values.shape == Shape{50, 4, 8});
    CHECK(emb.flat().shape == Shape{50, 32});

    EmbeddingSet again = encode(model, x);
    for (std::size_t i = 0; i < emb.values.size(); ++i)
        CHECK(emb.values[i] == again.values[i]);

    const Tensor empty({0, 4, 6});
    CHECK(encode(model, empty).size() == 0);
}

TEST_CASE("balanced union oversamples the smaller cohort to parity") {
    const Tensor a = latent_sequences(40, 3, 4, 23);
    const Tensor b = latent_sequences(100, 3, 4, 29);
    const Tensor u = balanced_union(a, b, 7);
    CHECK(u.batch() == 200);
    // every second sample comes from the oversampled side; spot-check that
    // rows of `a` appear more than once
    CHECK(u.sample_shape() == a.sample_shape());
}

TEST_CASE("nn-pca recovers the pca subspace and reconstruction quality") {
    Rng rng(31);
    // well-conditioned 3-dim data: two dominant directions over an isotropic
    // noise floor that keeps the optimal reconstruction error non-trivial
    const std::size_t n = 300;
    Tensor x({n, 1, 3});
    for (std::size_t i = 0; i < n; ++i) {
        const double a = normal(rng, 0.0, 1.0);
        const double b = normal(rng, 0.0, 0.5);
        x.values[i * 3 + 0] = 0.5 + 0.3 * a + normal(rng, 0.0, 0.02);
        x.values[i * 3 + 1] = 0.5 + 0.25 * b + normal(rng, 0.0, 0.02);
        x.values[i * 3 + 2] = 0.5 + 0.2 * a - 0.2 * b + normal(rng, 0.0, 0.02);
    }
    TrainConfig cfg;
    cfg.epochs = 8000;
    cfg.batch_size = 1024;  // full batch: no sampling noise near the optimum
    cfg.learning_rate = 0.003;
    cfg.seed = 9;
    NnPcaModel lin = fit_nn_pca(x, 2, cfg);

    // exact PCA on the same rows
    std::vector<std::vector<double>> rows(n, std::vector<double>(3));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < 3; ++j) rows[i][j] = x.values[i * 3 + j];
    PcaModel exact = fit_pca(rows, 2);

    // Principal angles between rowspace(projection) and the PCA subspace.
    // An orthonormal rowspace basis comes from the eigenvectors of P^T P
    // (stable even when the two encoder rows are nearly collinear).
    auto rowspace_basis = [](const linalg::Matrix& m) {
        const linalg::Matrix gram = linalg::matmul(linalg::transpose(m), m);
        const auto eig = linalg::symmetric_eigen(gram);
        linalg::Matrix basis;
        for (std::size_t r = 0; r < m.size(); ++r) basis.push_back(eig.vectors[r]);
        return basis;
    };
    const linalg::Matrix q1 = rowspace_basis(lin.projection);
    const linalg::Matrix q2 = rowspace_basis(exact.components);
    // gram[i][j] = <q1_i, q2_j>; cos^2 of the principal angles are the
    // eigenvalues of gram * gram^T
    linalg::Matrix gram(2, std::vector<double>(2, 0.0));
    for (std::size_t i = 0; i < 2; ++i)
        for (std::size_t j = 0; j < 2; ++j)
            for (std::size_t k = 0; k < 3; ++k) gram[i][j] += q1[i][k] * q2[j][k];
    const linalg::Matrix gg = linalg::matmul(gram, linalg::transpose(gram));
    const auto eig = linalg::symmetric_eigen(gg);
    for (double lambda : eig.values) {
        const double angle = std::acos(std::sqrt(std::clamp(lambda, 0.0, 1.0))) * 180.0 / 3.14159265358979;
        CHECK(angle < 5.0);
    }

    // reconstruction within 5% of PCA's optimum
    auto reconstruction_mse = [&rows](const PcaModel& m) {
        const auto proj = pca_transform(m, rows);
        double total = 0.0;
        for (std::size_t i = 0; i < rows.size(); ++i)
            for (std::size_t j = 0; j < 3; ++j) {
                double rec = m.mean[j];
                for (std::size_t c = 0; c < m.n_components(); ++c)
                    rec += proj[i][c] * m.components[c][j];
                total += (rec - rows[i][j]) * (rec - rows[i][j]);
            }
        return total / static_cast<double>(rows.size() * 3);
    };
    CHECK(lin.model.loss_trace.back() <= reconstruction_mse(exact) * 1.05 + 1e-9);
}

TEST_CASE("full-rank linear autoencoder reconstructs almost exactly") {
    const Tensor x = latent_sequences(150, 1, 3, 37, 0.1);
    TrainConfig cfg;
    cfg.epochs = 8000;
    cfg.batch_size = 1024;
    cfg.learning_rate = 0.003;
    cfg.seed = 2;
    NnPcaModel lin = fit_nn_pca(x, 3, cfg);
    CHECK(lin.model.loss_trace.back() < 1e-6);
}

TEST_CASE("tpca on identical embeddings returns identical transforms") {
    Rng rng(41);
    EmbeddingSet emb;
    emb.units = 3;
    emb.dims_per_unit = 8;
    emb.values = Tensor({20, 3, 8});
    for (double& v : emb.values.values) v = uniform(rng, -1.0, 1.0);

    TpcaResult res = fit_tpca_and_align(emb, emb, 6);
    CHECK(res.source.values.shape == Shape{20, 3, 6});
    for (std::size_t i = 0; i < res.source.values.size(); ++i)
        CHECK(res.source.values[i] == doctest::Approx(res.target.values[i]).epsilon(1e-12));
}

TEST_CASE("tpca keeps target variance and annihilates source-only directions") {
    Rng rng(43);
    const std::size_t dims = 8;
    // target varies only in the first 6 coordinates
    EmbeddingSet target;
    target.units = 2;
    target.dims_per_unit = dims;
    target.values = Tensor({200, 2, dims});
    for (std::size_t r = 0; r < 400; ++r)
        for (std::size_t j = 0; j < 6; ++j)
            target.values.values[r * dims + j] = normal(rng, 0.0, 1.0 + 0.1 * static_cast<double>(j));

    // source varies in the last two (target-dead) coordinates too
    EmbeddingSet source = target;
    for (std::size_t r = 0; r < 400; ++r) {
        source.values.values[r * dims + 6] = normal(rng, 0.0, 2.0);
        source.values.values[r * dims + 7] = normal(rng, 0.0, 2.0);
    }

    TpcaResult res = fit_tpca_and_align(target, source, 6);

    // >= 95% of target variance kept
    double kept = 0.0;
    for (double v : res.model.per_unit.explained_variance) kept += v;
    const auto rows = target.rows_per_unit();
    const auto cov = linalg::covariance(rows);
    double total = 0.0;
    for (std::size_t j = 0; j < dims; ++j) total += cov[j][j];
    CHECK(kept / total >= 0.95);

    // directions 6 and 7 have no image: transformed source variance equals
    // the target-subspace part only. Reconstruct and check the dead dims.
    for (std::size_t c = 0; c < 6; ++c) {
        CHECK(std::abs(res.model.per_unit.components[c][6]) < 0.05);
        CHECK(std::abs(res.model.per_unit.components[c][7]) < 0.05);
    }
}

TEST_CASE("tpca dimension and rank preconditions") {
    Rng rng(47);
    EmbeddingSet emb;
    emb.units = 2;
    emb.dims_per_unit = 8;
    emb.values = Tensor({30, 2, 8});
    for (double& v : emb.values.values) v = uniform(rng, -1.0, 1.0);
    CHECK_THROWS(fit_tpca_and_align(emb, emb, 8));   // not below bottleneck
    CHECK_THROWS(fit_tpca_and_align(emb, emb, 9));

    // rank-deficient target: all rows in a 3-dim subspace
    EmbeddingSet flat = emb;
    for (std::size_t r = 0; r < 60; ++r)
        for (std::size_t j = 3; j < 8; ++j) flat.values.values[r * 8 + j] = 0.0;
    try {
        fit_tpca_and_align(flat, emb, 6);
        FAIL("expected rank error");
    } catch (const std::invalid_argument& e) {
        CHECK(std::string(e.what()).find("rank 3") != std::string::npos);
    }
}
