#include "moocxfer/coral.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

namespace moocxfer::transfer {

namespace {

struct Centered {
    std::vector<double> values;  // [n, d], mean-free
    std::vector<double> cov;     // [d, d], divisor n-1
    std::size_t n = 0, d = 0;
};

Centered center_and_covariance(const Tensor& x, const char* side) {
    if (x.rank() != 2) throw std::invalid_argument(std::string("coral_loss: ") + side +
                                                   " embedding must be [n, d]");
    Centered c;
    c.n = x.dim(0);
    c.d = x.dim(1);
    if (c.n < 2)
        throw std::invalid_argument(std::string("coral_loss: ") + side +
                                    " needs at least 2 rows");
    std::vector<double> mean(c.d, 0.0);
    for (std::size_t i = 0; i < c.n; ++i)
        for (std::size_t j = 0; j < c.d; ++j) mean[j] += x.values[i * c.d + j];
    for (double& v : mean) v /= static_cast<double>(c.n);

    c.values.resize(c.n * c.d);
    for (std::size_t i = 0; i < c.n; ++i)
        for (std::size_t j = 0; j < c.d; ++j)
            c.values[i * c.d + j] = x.values[i * c.d + j] - mean[j];

    c.cov.assign(c.d * c.d, 0.0);
    const double inv = 1.0 / static_cast<double>(c.n - 1);
    for (std::size_t i = 0; i < c.n; ++i) {
        const double* row = c.values.data() + i * c.d;
        for (std::size_t a = 0; a < c.d; ++a) {
            const double va = row[a];
            if (va == 0.0) continue;
            double* cov_row = c.cov.data() + a * c.d;
            for (std::size_t b = 0; b < c.d; ++b) cov_row[b] += va * row[b];
        }
    }
    for (double& v : c.cov) v *= inv;
    return c;
}

}  // namespace

CoralResult coral_loss(const Tensor& source_embedding, const Tensor& target_embedding) {
    const Centered s = center_and_covariance(source_embedding, "source");
    const Centered t = center_and_covariance(target_embedding, "target");
    if (s.d != t.d)
        throw std::invalid_argument("coral_loss: embedding dimensions differ: " +
                                    std::to_string(s.d) + " vs " + std::to_string(t.d));
    const std::size_t d = s.d;
    const double inv4d2 = 1.0 / (4.0 * static_cast<double>(d) * static_cast<double>(d));

    // G = dL/dC_S = (C_S - C_T) / (2 d^2), symmetric
    std::vector<double> gap(d * d);
    double sq = 0.0;
    for (std::size_t i = 0; i < d * d; ++i) {
        gap[i] = s.cov[i] - t.cov[i];
        sq += gap[i] * gap[i];
    }
    CoralResult out;
    out.value = sq * inv4d2;

    const double gscale = 2.0 * inv4d2;  // 1 / (2 d^2)
    // dL/dX = +/- (2/(n-1)) Xc G; centering needs no extra term because G is
    // applied to mean-free rows and sums of Xc rows vanish
    auto accumulate = [&gap, d, gscale](const Centered& c, double sign, Tensor& grad) {
        grad = Tensor({c.n, d});
        const double coef = sign * 2.0 * gscale / static_cast<double>(c.n - 1);
        for (std::size_t i = 0; i < c.n; ++i) {
            const double* row = c.values.data() + i * d;
            double* g = grad.values.data() + i * d;
            for (std::size_t a = 0; a < d; ++a) {
                const double va = row[a];
                if (va == 0.0) continue;
                const double* gap_row = gap.data() + a * d;
                for (std::size_t b = 0; b < d; ++b) g[b] += coef * va * gap_row[b];
            }
        }
    };
    accumulate(s, +1.0, out.grad_source);
    accumulate(t, -1.0, out.grad_target);
    return out;
}

double covariance_gap(const Tensor& source_embedding, const Tensor& target_embedding) {
    const Centered s = center_and_covariance(source_embedding, "source");
    const Centered t = center_and_covariance(target_embedding, "target");
    if (s.d != t.d) throw std::invalid_argument("covariance_gap: dimensions differ");
    double sq = 0.0;
    for (std::size_t i = 0; i < s.d * s.d; ++i) {
        const double g = s.cov[i] - t.cov[i];
        sq += g * g;
    }
    return std::sqrt(sq);
}

}  // namespace moocxfer::transfer
