#include "moocxfer/mds.hpp"

#include <cmath>
#include <stdexcept>

namespace moocxfer::eval {

linalg::Matrix mds_embed(const linalg::Matrix& distance_matrix, std::size_t dims) {
    const std::size_t m = distance_matrix.size();
    if (m == 0) throw std::invalid_argument("mds_embed: empty matrix");
    if (dims < 1) throw std::invalid_argument("mds_embed: dims must be >= 1");
    for (std::size_t i = 0; i < m; ++i) {
        if (distance_matrix[i].size() != m)
            throw std::invalid_argument("mds_embed: matrix not square");
        if (std::abs(distance_matrix[i][i]) > 1e-12)
            throw std::invalid_argument("mds_embed: nonzero diagonal");
        for (std::size_t j = 0; j < m; ++j) {
            if (distance_matrix[i][j] < 0.0)
                throw std::invalid_argument("mds_embed: negative distance");
            if (std::abs(distance_matrix[i][j] - distance_matrix[j][i]) > 1e-9)
                throw std::invalid_argument("mds_embed: asymmetric input");
        }
    }

    // B = -1/2 J D^2 J with J = I - 11^T/m
    linalg::Matrix sq(m, std::vector<double>(m));
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < m; ++j)
            sq[i][j] = distance_matrix[i][j] * distance_matrix[i][j];

    std::vector<double> row_mean(m, 0.0), col_mean(m, 0.0);
    double grand = 0.0;
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < m; ++j) {
            row_mean[i] += sq[i][j];
            col_mean[j] += sq[i][j];
            grand += sq[i][j];
        }
    for (double& v : row_mean) v /= static_cast<double>(m);
    for (double& v : col_mean) v /= static_cast<double>(m);
    grand /= static_cast<double>(m * m);

    linalg::Matrix b(m, std::vector<double>(m));
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < m; ++j)
            b[i][j] = -0.5 * (sq[i][j] - row_mean[i] - col_mean[j] + grand);

    const auto eig = linalg::symmetric_eigen(b);
    linalg::Matrix coords(m, std::vector<double>(dims, 0.0));
    for (std::size_t c = 0; c < dims && c < m; ++c) {
        const double lambda = std::max(0.0, eig.values[c]);
        const double s = std::sqrt(lambda);
        for (std::size_t i = 0; i < m; ++i) coords[i][c] = s * eig.vectors[c][i];
    }
    return coords;
}

}  // namespace moocxfer::eval
