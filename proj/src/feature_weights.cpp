#include "moocxfer/feature_weights.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace moocxfer::eval {

FeatureWeightReport embedding_feature_weights(const linalg::Matrix& projection,
                                              const data::EventVocabulary& vocabulary) {
    const std::size_t types = vocabulary.size();
    if (projection.empty() || projection[0].size() != types)
        throw std::invalid_argument("embedding_feature_weights: projection must be [k x " +
                                    std::to_string(types) + "]");

    FeatureWeightReport report;
    report.weights.assign(types, 0.0);
    for (std::size_t e = 0; e < types; ++e) {
        double sq = 0.0;
        for (const auto& row : projection) sq += row[e] * row[e];
        report.weights[e] = std::sqrt(sq);
    }
    const double sum = std::accumulate(report.weights.begin(), report.weights.end(), 0.0);
    if (sum > 0.0)
        for (double& w : report.weights) w /= sum;

    report.ranking.resize(types);
    std::iota(report.ranking.begin(), report.ranking.end(), 0);
    std::stable_sort(report.ranking.begin(), report.ranking.end(),
                     [&report](std::size_t a, std::size_t b) {
                         return report.weights[a] > report.weights[b];
                     });
    return report;
}

}  // namespace moocxfer::eval
