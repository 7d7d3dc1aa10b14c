#pragma once

// Classical multidimensional scaling: double-center -1/2 D^2, take the top
// eigenpairs, scale eigenvectors by sqrt(eigenvalue). Negative eigenvalues
// are truncated at zero.

#include <vector>

#include "moocxfer/eigen.hpp"

namespace moocxfer::eval {

// distance_matrix must be symmetric with a zero diagonal and nonnegative
// entries; returns m x dims coordinates.
linalg::Matrix mds_embed(const linalg::Matrix& distance_matrix, std::size_t dims = 2);

}  // namespace moocxfer::eval
