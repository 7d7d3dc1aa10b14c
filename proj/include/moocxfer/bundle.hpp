#pragma once

// Versioned JSON bundles for trained weekly predictors: layer specs, flat
// parameters, and the representation pipeline, enough to reload and predict
// in a later process.

#include <string>

#include "moocxfer/methods.hpp"

namespace moocxfer::transfer {

inline constexpr int kBundleVersion = 1;

void save_predictor(const WeeklyPredictor& predictor, const std::string& path);
WeeklyPredictor load_predictor(const std::string& path);

}  // namespace moocxfer::transfer
