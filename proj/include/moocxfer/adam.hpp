#pragma once

// Adam optimizer state over a flat parameter vector.

#include <cstdint>
#include <vector>

namespace moocxfer::nn {

struct AdamState {
    std::vector<double> first_moment;
    std::vector<double> second_moment;
    std::int64_t step = 0;
    double learning_rate = 0.001;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;

    static AdamState create(std::size_t param_count, double learning_rate = 0.001);
};

// One bias-corrected Adam update, in place. Rejects non-finite gradient
// entries with a diagnostic naming the first offending index.
void adam_step(AdamState& state, std::vector<double>& params, const std::vector<double>& gradient);

}  // namespace moocxfer::nn
