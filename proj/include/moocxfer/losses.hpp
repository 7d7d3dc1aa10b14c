#pragma once

// Training losses. Each returns the scalar loss together with its gradient at
// the network output, ready to feed into backward().

#include <vector>

#include "moocxfer/tensor.hpp"

namespace moocxfer::nn {

struct LossValue {
    double value = 0.0;
    Tensor grad;  // dLoss/doutput, same shape as the predictions/output
};

// Mean binary cross-entropy. Predictions are clamped to [1e-7, 1 - 1e-7]
// before the log. With sample weights the mean is weight-normalized; zero
// weights drop samples entirely. Throws on length mismatch.
LossValue bce_loss(const Tensor& predictions, const std::vector<int>& labels,
                   const std::vector<double>* sample_weights = nullptr);

// Mean of squared element differences; gradient 2*(output-target)/N.
// Throws on shape mismatch.
LossValue mse_loss(const Tensor& output, const Tensor& target);

}  // namespace moocxfer::nn
