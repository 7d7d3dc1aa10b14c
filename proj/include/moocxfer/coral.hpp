#pragma once

// Correlation-alignment loss between two embedding sets:
//   L = ||C_S - C_T||_F^2 / (4 d^2)
// with sample covariances (divisor n-1) and analytic gradients through them.

#include "moocxfer/tensor.hpp"

namespace moocxfer::transfer {

using moocxfer::Tensor;

struct CoralResult {
    double value = 0.0;
    Tensor grad_source;  // dL/dE_S, [n_S, d]
    Tensor grad_target;  // dL/dE_T, [n_T, d]
};

// Both sets must be [n, d] with n >= 2 on each side.
CoralResult coral_loss(const Tensor& source_embedding, const Tensor& target_embedding);

// ||C_S - C_T||_F, for diagnostics and alignment measurements.
double covariance_gap(const Tensor& source_embedding, const Tensor& target_embedding);

}  // namespace moocxfer::transfer
