#pragma once

// Rank-based AUC and the per-cell result record shared by the evaluation and
// reporting code.

#include <cstdint>
#include <string>
#include <vector>

namespace moocxfer::eval {

// Probability that a random positive outscores a random negative; tied scores
// count half. Throws std::invalid_argument when only one class is present.
double auc(const std::vector<double>& scores, const std::vector<int>& labels);

struct TransferResult {
    std::string source;
    std::string target;
    int week = 0;
    std::string method;
    std::uint64_t seed = 0;
    double auc = 0.0;
    double pad = 0.0;         // proxy A-distance between the cell's features
    double size_ratio = 0.0;  // n_target / n_source for the cell
};

}  // namespace moocxfer::eval
