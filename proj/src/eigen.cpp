#include "moocxfer/eigen.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace moocxfer::linalg {

Matrix identity(std::size_t n) {
    Matrix m(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i) m[i][i] = 1.0;
    return m;
}

Matrix matmul(const Matrix& a, const Matrix& b) {
    const std::size_t n = a.size(), k = b.size(), m = b.empty() ? 0 : b[0].size();
    Matrix c(n, std::vector<double>(m, 0.0));
    for (std::size_t i = 0; i < n; ++i) {
        if (a[i].size() != k) throw std::invalid_argument("matmul: ragged or mismatched rows");
        for (std::size_t p = 0; p < k; ++p) {
            const double av = a[i][p];
            if (av == 0.0) continue;
            for (std::size_t j = 0; j < m; ++j) c[i][j] += av * b[p][j];
        }
    }
    return c;
}

Matrix transpose(const Matrix& a) {
    const std::size_t n = a.size(), m = a.empty() ? 0 : a[0].size();
    Matrix t(m, std::vector<double>(n));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < m; ++j) t[j][i] = a[i][j];
    return t;
}

EigenDecomposition symmetric_eigen(const Matrix& m, double tol, int max_sweeps) {
    const std::size_t n = m.size();
    for (const auto& row : m)
        if (row.size() != n) throw std::invalid_argument("symmetric_eigen: matrix not square");
    double scale = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            if (std::abs(m[i][j] - m[j][i]) > 1e-9 * std::max(1.0, std::abs(m[i][j])))
                throw std::invalid_argument("symmetric_eigen: matrix not symmetric");
        }
        for (std::size_t j = 0; j < n; ++j) scale = std::max(scale, std::abs(m[i][j]));
    }
    if (scale == 0.0) scale = 1.0;

    Matrix a = m;
    Matrix v = identity(n);

    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        double off = 0.0;
        for (std::size_t p = 0; p < n; ++p)
            for (std::size_t q = p + 1; q < n; ++q) off += a[p][q] * a[p][q];
        if (std::sqrt(off) <= tol * scale * static_cast<double>(n)) break;

        for (std::size_t p = 0; p < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                if (std::abs(a[p][q]) <= tol * scale * 1e-2) continue;
                const double tau = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                const double t = (tau >= 0.0 ? 1.0 : -1.0) /
                                 (std::abs(tau) + std::sqrt(1.0 + tau * tau));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = t * c;
                for (std::size_t i = 0; i < n; ++i) {
                    const double aip = a[i][p], aiq = a[i][q];
                    a[i][p] = c * aip - s * aiq;
                    a[i][q] = s * aip + c * aiq;
                }
                for (std::size_t i = 0; i < n; ++i) {
                    const double api = a[p][i], aqi = a[q][i];
                    a[p][i] = c * api - s * aqi;
                    a[q][i] = s * api + c * aqi;
                }
                for (std::size_t i = 0; i < n; ++i) {
                    const double vip = v[i][p], viq = v[i][q];
                    v[i][p] = c * vip - s * viq;
                    v[i][q] = s * vip + c * viq;
                }
            }
        }
    }

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&a](std::size_t x, std::size_t y) { return a[x][x] > a[y][y]; });

    EigenDecomposition out;
    out.values.reserve(n);
    out.vectors.assign(n, std::vector<double>(n));
    for (std::size_t r = 0; r < n; ++r) {
        out.values.push_back(a[order[r]][order[r]]);
        for (std::size_t i = 0; i < n; ++i) out.vectors[r][i] = v[i][order[r]];
    }
    return out;
}

Matrix covariance(const std::vector<std::vector<double>>& data) {
    const std::size_t n = data.size();
    if (n < 2) throw std::invalid_argument("covariance: need at least 2 rows");
    const std::size_t d = data[0].size();
    std::vector<double> mean(d, 0.0);
    for (const auto& row : data) {
        if (row.size() != d) throw std::invalid_argument("covariance: ragged rows");
        for (std::size_t j = 0; j < d; ++j) mean[j] += row[j];
    }
    for (double& v : mean) v /= static_cast<double>(n);

    Matrix c(d, std::vector<double>(d, 0.0));
    for (const auto& row : data) {
        for (std::size_t i = 0; i < d; ++i) {
            const double di = row[i] - mean[i];
            if (di == 0.0) continue;
            for (std::size_t j = i; j < d; ++j) c[i][j] += di * (row[j] - mean[j]);
        }
    }
    const double inv = 1.0 / static_cast<double>(n - 1);
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = i; j < d; ++j) {
            c[i][j] *= inv;
            c[j][i] = c[i][j];
        }
    return c;
}

}  // namespace moocxfer::linalg
