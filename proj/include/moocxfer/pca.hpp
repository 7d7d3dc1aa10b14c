#pragma once

// PCA via covariance eigendecomposition (Jacobi). Component rows are
// orthonormal, variances descending; the largest-magnitude coordinate of each
// component is made positive so fits are reproducible.

#include <string>
#include <vector>

#include "moocxfer/eigen.hpp"

namespace moocxfer::repr {

struct PcaModel {
    std::vector<double> mean;
    linalg::Matrix components;              // n_components x dim, orthonormal rows
    std::vector<double> explained_variance;  // descending

    std::size_t n_components() const { return components.size(); }
    std::size_t dim() const { return mean.size(); }

    void save_json(const std::string& path) const;
    static PcaModel load_json(const std::string& path);
};

PcaModel fit_pca(const std::vector<std::vector<double>>& data, std::size_t n_components);

// (data - mean) * components^T
std::vector<std::vector<double>> pca_transform(const PcaModel& model,
                                               const std::vector<std::vector<double>>& data);

}  // namespace moocxfer::repr
