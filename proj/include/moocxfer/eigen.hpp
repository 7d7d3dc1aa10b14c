#pragma once

// Symmetric eigendecomposition by cyclic Jacobi rotations, plus the few dense
// matrix helpers the statistics code needs. Dimensions here stay small
// (tens), so the O(n^3)-per-sweep cost is irrelevant.

#include <vector>

namespace moocxfer::linalg {

using Matrix = std::vector<std::vector<double>>;

Matrix identity(std::size_t n);
Matrix matmul(const Matrix& a, const Matrix& b);
Matrix transpose(const Matrix& a);

struct EigenDecomposition {
    std::vector<double> values;  // descending
    Matrix vectors;              // vectors[i] is the eigenvector for values[i]
};

// Throws std::invalid_argument on a non-square or asymmetric input.
EigenDecomposition symmetric_eigen(const Matrix& m, double tol = 1e-14, int max_sweeps = 64);

// Sample covariance (divisor n-1) of rows; data[i] is one observation.
Matrix covariance(const std::vector<std::vector<double>>& data);

}  // namespace moocxfer::linalg
