#pragma once

// Proxy A-distance: train a domain classifier to tell source rows from
// target rows; pad = 2(1 - 2 eps) clipped into [0, 2], with eps the held-out
// balanced error. `pooled` treats whole flattened feature vectors as one
// sample each; `per_slice` averages 1-D distances over (event type, week)
// marginals.

#include <cstdint>

#include "moocxfer/dataset.hpp"
#include "moocxfer/tensor.hpp"

namespace moocxfer::eval {

struct PadConfig {
    int epochs = 100;
    double learning_rate = 0.01;
    int batch_size = 128;
    double train_fraction = 0.8;
    std::uint64_t seed = 1;
};

struct PadResult {
    double pad = 0.0;               // in [0, 2]
    double classifier_error = 0.5;  // balanced held-out error
    std::size_t n_source = 0;
    std::size_t n_target = 0;
};

// Rows are flattened per-student features [n, d]; both sides nonempty with a
// viable 80/20 split.
PadResult proxy_a_distance(const Tensor& source, const Tensor& target,
                           const PadConfig& config = {});

// Average over per-(type, week) 1-D feature distributions of two cohorts.
PadResult proxy_a_distance_per_slice(const data::Cohort& a, const data::Cohort& b,
                                     const PadConfig& config = {});

}  // namespace moocxfer::eval
