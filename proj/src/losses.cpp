#include "moocxfer/losses.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace moocxfer::nn {

namespace {
constexpr double kProbClamp = 1e-7;
}

LossValue bce_loss(const Tensor& predictions, const std::vector<int>& labels,
                   const std::vector<double>* sample_weights) {
    const std::size_t n = predictions.size();
    if (n != labels.size())
        throw std::invalid_argument("bce_loss: " + std::to_string(n) + " predictions vs " +
                                    std::to_string(labels.size()) + " labels");
    if (sample_weights && sample_weights->size() != n)
        throw std::invalid_argument("bce_loss: weight count mismatch");
    if (n == 0) throw std::invalid_argument("bce_loss: empty input");

    double weight_sum = 0.0;
    if (sample_weights) {
        for (double w : *sample_weights) {
            if (w < 0.0) throw std::invalid_argument("bce_loss: negative sample weight");
            weight_sum += w;
        }
        if (weight_sum <= 0.0) throw std::invalid_argument("bce_loss: all weights zero");
    } else {
        weight_sum = static_cast<double>(n);
    }

    LossValue out;
    out.grad = Tensor(predictions.shape);
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double w = sample_weights ? (*sample_weights)[i] : 1.0;
        if (w == 0.0) continue;
        const double p = std::clamp(predictions[i], kProbClamp, 1.0 - kProbClamp);
        const double y = labels[i] ? 1.0 : 0.0;
        total += w * (-(y * std::log(p) + (1.0 - y) * std::log(1.0 - p)));
        out.grad[i] = w * (p - y) / (p * (1.0 - p)) / weight_sum;
    }
    out.value = total / weight_sum;
    return out;
}

LossValue mse_loss(const Tensor& output, const Tensor& target) {
    if (!same_shape(output, target))
        throw std::invalid_argument("mse_loss: shape mismatch " + shape_to_string(output.shape) +
                                    " vs " + shape_to_string(target.shape));
    const std::size_t n = output.size();
    if (n == 0) throw std::invalid_argument("mse_loss: empty input");

    LossValue out;
    out.grad = Tensor(output.shape);
    double total = 0.0;
    const double inv = 1.0 / static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double d = output[i] - target[i];
        total += d * d;
        out.grad[i] = 2.0 * d * inv;
    }
    out.value = total * inv;
    return out;
}

}  // namespace moocxfer::nn
