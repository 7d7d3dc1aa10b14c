#include "moocxfer/adam.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace moocxfer::nn {

AdamState AdamState::create(std::size_t param_count, double learning_rate) {
    AdamState s;
    s.first_moment.assign(param_count, 0.0);
    s.second_moment.assign(param_count, 0.0);
    s.learning_rate = learning_rate;
    return s;
}

void adam_step(AdamState& state, std::vector<double>& params,
               const std::vector<double>& gradient) {
    const std::size_t n = params.size();
    if (gradient.size() != n || state.first_moment.size() != n ||
        state.second_moment.size() != n) {
        throw std::invalid_argument("adam_step: size mismatch (params " + std::to_string(n) +
                                    ", gradient " + std::to_string(gradient.size()) + ")");
    }
    for (std::size_t i = 0; i < n; ++i) {
        if (!std::isfinite(gradient[i]))
            throw std::invalid_argument("adam_step: non-finite gradient at index " +
                                        std::to_string(i));
    }

    state.step += 1;
    const double b1 = state.beta1, b2 = state.beta2;
    const double bc1 = 1.0 - std::pow(b1, static_cast<double>(state.step));
    const double bc2 = 1.0 - std::pow(b2, static_cast<double>(state.step));
    for (std::size_t i = 0; i < n; ++i) {
        const double g = gradient[i];
        state.first_moment[i] = b1 * state.first_moment[i] + (1.0 - b1) * g;
        state.second_moment[i] = b2 * state.second_moment[i] + (1.0 - b2) * g * g;
        const double m_hat = state.first_moment[i] / bc1;
        const double v_hat = state.second_moment[i] / bc2;
        params[i] -= state.learning_rate * m_hat / (std::sqrt(v_hat) + state.epsilon);
    }
}

}  // namespace moocxfer::nn
