#pragma once

// Kernel mean matching: nonnegative source-instance weights that move the
// weighted source mean onto the target mean in Gaussian-kernel feature space,
// solved by projected gradient descent on the quadratic objective under a box
// bound and a mean-one band.

#include <cstdint>
#include <vector>

#include "moocxfer/tensor.hpp"

namespace moocxfer::transfer {

struct KmmConfig {
    double sigma = 0.0;          // 0 = median pairwise distance of the pooled sample
    double bound = 10.0;         // B, per-weight cap
    double mean_tolerance = 0.05;  // |mean(w) - 1| band
    int max_iters = 600;
    double tolerance = 1e-9;     // on the projected-gradient residual
};

struct InstanceWeights {
    std::vector<double> weights;
    double bound = 10.0;
    double sigma = 0.0;
    double objective = 0.0;
    double residual = 0.0;  // final projected-gradient norm
    bool converged = false;
};

// Rows of both tensors are flattened per-student feature vectors [n, d].
InstanceWeights kmm_weights(const Tensor& source, const Tensor& target, const KmmConfig& config);

// Exposed for reuse by the oracle-facing objective checks: the KMM objective
// value for given weights.
double kmm_objective(const Tensor& source, const Tensor& target, double sigma,
                     const std::vector<double>& weights);

double median_pairwise_distance(const Tensor& pooled);

}  // namespace moocxfer::transfer
