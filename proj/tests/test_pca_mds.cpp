// PCA against a brute-force test-side eigensolver, and classical MDS against
// planted configurations.

#include <cmath>

#include "doctest.h"
#include "moocxfer/mds.hpp"
#include "moocxfer/pca.hpp"
#include "moocxfer/rng.hpp"

using namespace moocxfer;
using namespace moocxfer::repr;
using linalg::Matrix;

namespace {

// Test-side oracle: classical Jacobi that always zeroes the largest
// off-diagonal element, applying explicit rotation matrices. Deliberately
// written independently of the library's cyclic solver.
struct OracleEigen {
    std::vector<double> values;
    Matrix vectors;  // column c of `vectors` is the c-th eigenvector
};

OracleEigen oracle_symmetric_eigen(Matrix a) {
    const std::size_t n = a.size();
    Matrix v(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i) v[i][i] = 1.0;

    for (int iter = 0; iter < 20000; ++iter) {
        std::size_t p = 0, q = 1;
        double biggest = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j)
                if (std::abs(a[i][j]) > biggest) {
                    biggest = std::abs(a[i][j]);
                    p = i;
                    q = j;
                }
        if (biggest < 1e-15) break;

        const double theta = 0.5 * std::atan2(2.0 * a[p][q], a[q][q] - a[p][p]);
        const double c = std::cos(theta), s = std::sin(theta);
        Matrix g(n, std::vector<double>(n, 0.0));
        for (std::size_t i = 0; i < n; ++i) g[i][i] = 1.0;
        g[p][p] = c;
        g[q][q] = c;
        g[p][q] = s;
        g[q][p] = -s;
        a = linalg::matmul(linalg::matmul(linalg::transpose(g), a), g);
        v = linalg::matmul(v, g);
    }

    OracleEigen out;
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&a](std::size_t x, std::size_t y) { return a[x][x] > a[y][y]; });
    out.vectors.assign(n, std::vector<double>(n));
    for (std::size_t r = 0; r < n; ++r) {
        out.values.push_back(a[order[r]][order[r]]);
        for (std::size_t i = 0; i < n; ++i) out.vectors[i][r] = v[i][order[r]];
    }
    return out;
}

Matrix random_matrix(std::size_t n, std::size_t d, Rng& rng) {
    Matrix m(n, std::vector<double>(d));
    for (auto& row : m)
        for (double& x : row) x = uniform(rng, -1.0, 1.0);
    return m;
}

double reconstruction_mse(const PcaModel& model, const Matrix& data) {
    const auto proj = pca_transform(model, data);
    double total = 0.0;
    for (std::size_t i = 0; i < data.size(); ++i) {
        for (std::size_t j = 0; j < data[i].size(); ++j) {
            double rec = model.mean[j];
            for (std::size_t c = 0; c < model.n_components(); ++c)
                rec += proj[i][c] * model.components[c][j];
            const double diff = rec - data[i][j];
            total += diff * diff;
        }
    }
    return total / static_cast<double>(data.size() * data[0].size());
}

}  // namespace

TEST_CASE("points on a line yield a single dominant component along the line") {
    Rng rng(3);
    Matrix data;
    const double dir[2] = {3.0 / 5.0, 4.0 / 5.0};
    for (int i = 0; i < 50; ++i) {
        const double t = uniform(rng, -2.0, 2.0);
        data.push_back({t * dir[0], t * dir[1]});
    }
    PcaModel model = fit_pca(data, 2);
    CHECK(std::abs(model.components[0][0]) == doctest::Approx(dir[0]).epsilon(1e-9));
    CHECK(std::abs(model.components[0][1]) == doctest::Approx(dir[1]).epsilon(1e-9));
    const double ratio = model.explained_variance[0] /
                         (model.explained_variance[0] + model.explained_variance[1]);
    CHECK(ratio == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("isotropic gaussian gives near-equal eigenvalues") {
    Rng rng(7);
    Matrix data;
    for (int i = 0; i < 10000; ++i)
        data.push_back({normal(rng), normal(rng), normal(rng)});
    PcaModel model = fit_pca(data, 3);
    CHECK(model.explained_variance[0] / model.explained_variance[2] < 1.05);
}

TEST_CASE("pca matches the brute-force eigendecomposition oracle on 20 random 50x13 matrices") {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        Rng rng(1000 + seed);
        Matrix data = random_matrix(50, 13, rng);
        PcaModel model = fit_pca(data, 13);

        // oracle covariance by direct loops
        const std::size_t n = data.size(), d = 13;
        std::vector<double> mean(d, 0.0);
        for (const auto& row : data)
            for (std::size_t j = 0; j < d; ++j) mean[j] += row[j] / static_cast<double>(n);
        Matrix cov(d, std::vector<double>(d, 0.0));
        for (const auto& row : data)
            for (std::size_t i = 0; i < d; ++i)
                for (std::size_t j = 0; j < d; ++j)
                    cov[i][j] += (row[i] - mean[i]) * (row[j] - mean[j]) /
                                 static_cast<double>(n - 1);
        const OracleEigen oracle = oracle_symmetric_eigen(cov);

        for (std::size_t c = 0; c < d; ++c) {
            CHECK(model.explained_variance[c] ==
                  doctest::Approx(oracle.values[c]).epsilon(1e-8));
            double plus = 0.0, minus = 0.0;
            for (std::size_t j = 0; j < d; ++j) {
                plus = std::max(plus, std::abs(model.components[c][j] - oracle.vectors[j][c]));
                minus = std::max(minus, std::abs(model.components[c][j] + oracle.vectors[j][c]));
            }
            CHECK(std::min(plus, minus) < 1e-8);
        }
    }
}

TEST_CASE("transforming the mean gives zero; identity components center the data") {
    Rng rng(21);
    Matrix data = random_matrix(30, 4, rng);
    PcaModel model = fit_pca(data, 4);
    auto projected = pca_transform(model, {model.mean});
    for (double v : projected[0]) CHECK(v == doctest::Approx(0.0).epsilon(1e-12));

    PcaModel ident = model;
    ident.components = linalg::identity(4);
    auto centered = pca_transform(ident, data);
    for (std::size_t i = 0; i < data.size(); ++i)
        for (std::size_t j = 0; j < 4; ++j)
            CHECK(centered[i][j] == doctest::Approx(data[i][j] - model.mean[j]).epsilon(1e-12));
}

TEST_CASE("full-rank projection preserves pairwise distances") {
    Rng rng(22);
    Matrix data = random_matrix(20, 5, rng);
    PcaModel model = fit_pca(data, 5);
    auto proj = pca_transform(model, data);
    for (std::size_t i = 0; i < data.size(); ++i) {
        for (std::size_t j = i + 1; j < data.size(); ++j) {
            double orig = 0.0, trans = 0.0;
            for (std::size_t k = 0; k < 5; ++k) {
                orig += (data[i][k] - data[j][k]) * (data[i][k] - data[j][k]);
                trans += (proj[i][k] - proj[j][k]) * (proj[i][k] - proj[j][k]);
            }
            CHECK(std::sqrt(trans) == doctest::Approx(std::sqrt(orig)).epsilon(1e-9));
        }
    }
}

TEST_CASE("reconstruction error is non-increasing in the component count") {
    Rng rng(23);
    Matrix data = random_matrix(40, 6, rng);
    double prev = 1e100;
    for (std::size_t k = 1; k <= 6; ++k) {
        const double err = reconstruction_mse(fit_pca(data, k), data);
        CHECK(err <= prev + 1e-12);
        prev = err;
    }
    CHECK(prev < 1e-18);  // full rank reconstructs exactly
}

TEST_CASE("pca rejects too many components") {
    Rng rng(24);
    Matrix data = random_matrix(10, 3, rng);
    CHECK_THROWS(fit_pca(data, 4));
    CHECK_THROWS(fit_pca({{1.0, 2.0}}, 1));
}

TEST_CASE("pca model json round-trip") {
    Rng rng(25);
    Matrix data = random_matrix(12, 3, rng);
    PcaModel model = fit_pca(data, 2);
    const std::string path = "/tmp/pca_model.json";
    model.save_json(path);
    PcaModel loaded = PcaModel::load_json(path);
    CHECK(loaded.mean == model.mean);
    CHECK(loaded.components == model.components);
    CHECK(loaded.explained_variance == model.explained_variance);
}

TEST_CASE("mds maps the zero matrix to the origin") {
    Matrix d(4, std::vector<double>(4, 0.0));
    const Matrix coords = eval::mds_embed(d, 2);
    for (const auto& row : coords)
        for (double v : row) CHECK(v == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("mds recovers an equilateral triangle") {
    Matrix d = {{0, 1, 1}, {1, 0, 1}, {1, 1, 0}};
    const Matrix coords = eval::mds_embed(d, 2);
    for (std::size_t i = 0; i < 3; ++i) {
        for (std::size_t j = i + 1; j < 3; ++j) {
            const double dx = coords[i][0] - coords[j][0];
            const double dy = coords[i][1] - coords[j][1];
            CHECK(std::sqrt(dx * dx + dy * dy) == doctest::Approx(1.0).epsilon(1e-8));
        }
    }
}

TEST_CASE("mds reproduces planted 2d configurations with tiny stress") {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        Rng rng(40 + seed);
        const std::size_t m = 8;
        Matrix points(m, std::vector<double>(2));
        for (auto& p : points) {
            p[0] = uniform(rng, -3.0, 3.0);
            p[1] = uniform(rng, -3.0, 3.0);
        }
        Matrix d(m, std::vector<double>(m, 0.0));
        for (std::size_t i = 0; i < m; ++i)
            for (std::size_t j = 0; j < m; ++j)
                d[i][j] = std::hypot(points[i][0] - points[j][0], points[i][1] - points[j][1]);

        const Matrix coords = eval::mds_embed(d, 2);
        double stress = 0.0;
        for (std::size_t i = 0; i < m; ++i)
            for (std::size_t j = 0; j < m; ++j) {
                const double rec =
                    std::hypot(coords[i][0] - coords[j][0], coords[i][1] - coords[j][1]);
                stress += (rec - d[i][j]) * (rec - d[i][j]);
            }
        CHECK(stress < 1e-6);
    }
}

TEST_CASE("mds rejects malformed inputs") {
    CHECK_THROWS(eval::mds_embed({{0, 1}, {2, 0}}, 2));           // asymmetric
    CHECK_THROWS(eval::mds_embed({{1, 0}, {0, 0}}, 2));           // nonzero diagonal
    CHECK_THROWS(eval::mds_embed({{0, -1}, {-1, 0}}, 2));         // negative
}
