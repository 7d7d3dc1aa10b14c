#pragma once

// Raw-feature weights inside a linear embedding: the Euclidean norm of each
// projection-matrix column, normalized to sum 1, with a descending ranking.

#include <vector>

#include "moocxfer/dataset.hpp"
#include "moocxfer/eigen.hpp"

namespace moocxfer::eval {

struct FeatureWeightReport {
    std::vector<double> weights;        // per event type, sums to 1
    std::vector<std::size_t> ranking;   // type indices, heaviest first
};

FeatureWeightReport embedding_feature_weights(const linalg::Matrix& projection,
                                              const data::EventVocabulary& vocabulary);

}  // namespace moocxfer::eval
