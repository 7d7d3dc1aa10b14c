#include "moocxfer/metrics.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace moocxfer::eval {

double auc(const std::vector<double>& scores, const std::vector<int>& labels) {
    if (scores.size() != labels.size())
        throw std::invalid_argument("auc: " + std::to_string(scores.size()) + " scores vs " +
                                    std::to_string(labels.size()) + " labels");
    const std::size_t n = scores.size();
    std::size_t positives = 0;
    for (int y : labels) positives += y ? 1 : 0;
    const std::size_t negatives = n - positives;
    if (positives == 0 || negatives == 0)
        throw std::invalid_argument("auc: needs both classes, got " + std::to_string(positives) +
                                    " positives out of " + std::to_string(n));

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&scores](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

    // average ranks across tied score groups
    double positive_rank_sum = 0.0;
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && scores[order[j + 1]] == scores[order[i]]) ++j;
        const double avg_rank = 0.5 * static_cast<double>(i + j) + 1.0;  // 1-based
        for (std::size_t k = i; k <= j; ++k)
            if (labels[order[k]]) positive_rank_sum += avg_rank;
        i = j + 1;
    }
    const double np = static_cast<double>(positives), nn = static_cast<double>(negatives);
    return (positive_rank_sum - np * (np + 1.0) / 2.0) / (np * nn);
}

}  // namespace moocxfer::eval
