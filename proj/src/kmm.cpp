#include "moocxfer/kmm.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace moocxfer::transfer {

namespace {

double sq_distance(const double* a, const double* b, std::size_t d) {
    double s = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
        const double diff = a[j] - b[j];
        s += diff * diff;
    }
    return s;
}

std::vector<double> kernel_matrix(const Tensor& a, const Tensor& b, double sigma) {
    const std::size_t n = a.dim(0), m = b.dim(0), d = a.dim(1);
    const double inv = 1.0 / (2.0 * sigma * sigma);
    std::vector<double> k(n * m);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < m; ++j)
            k[i * m + j] = std::exp(-sq_distance(a.values.data() + i * d,
                                                 b.values.data() + j * d, d) *
                                    inv);
    return k;
}

// Feasible-set projection: box [0, B] intersected with the mean band. A few
// clip-and-shift rounds land inside both.
void project(std::vector<double>& w, double bound, double mean_tol) {
    const double n = static_cast<double>(w.size());
    for (int round = 0; round < 64; ++round) {
        for (double& v : w) v = std::clamp(v, 0.0, bound);
        double mean = 0.0;
        for (double v : w) mean += v;
        mean /= n;
        if (std::abs(mean - 1.0) <= mean_tol) return;
        const double shift = std::clamp(mean, 1.0 - mean_tol, 1.0 + mean_tol) - mean;
        for (double& v : w) v += shift;
    }
    for (double& v : w) v = std::clamp(v, 0.0, bound);
}

}  // namespace

double median_pairwise_distance(const Tensor& pooled) {
    const std::size_t n = pooled.dim(0), d = pooled.dim(1);
    if (n < 2) return 1.0;
    // cap the quadratic median scan on large samples; strided picks keep it
    // deterministic
    const std::size_t cap = 1024;
    std::vector<std::size_t> idx;
    if (n <= cap) {
        for (std::size_t i = 0; i < n; ++i) idx.push_back(i);
    } else {
        const double stride = static_cast<double>(n) / static_cast<double>(cap);
        for (std::size_t i = 0; i < cap; ++i)
            idx.push_back(static_cast<std::size_t>(static_cast<double>(i) * stride));
    }
    std::vector<double> dists;
    dists.reserve(idx.size() * (idx.size() - 1) / 2);
    for (std::size_t i = 0; i < idx.size(); ++i)
        for (std::size_t j = i + 1; j < idx.size(); ++j)
            dists.push_back(std::sqrt(sq_distance(pooled.values.data() + idx[i] * d,
                                                  pooled.values.data() + idx[j] * d, d)));
    std::nth_element(dists.begin(), dists.begin() + static_cast<std::ptrdiff_t>(dists.size() / 2),
                     dists.end());
    const double med = dists[dists.size() / 2];
    return med > 0.0 ? med : 1.0;
}

double kmm_objective(const Tensor& source, const Tensor& target, double sigma,
                     const std::vector<double>& weights) {
    const std::size_t ns = source.dim(0), nt = target.dim(0);
    const auto kss = kernel_matrix(source, source, sigma);
    const auto kst = kernel_matrix(source, target, sigma);
    const auto ktt = kernel_matrix(target, target, sigma);

    double wkw = 0.0, wk = 0.0, tt = 0.0;
    for (std::size_t i = 0; i < ns; ++i)
        for (std::size_t j = 0; j < ns; ++j) wkw += weights[i] * kss[i * ns + j] * weights[j];
    for (std::size_t i = 0; i < ns; ++i)
        for (std::size_t j = 0; j < nt; ++j) wk += weights[i] * kst[i * nt + j];
    for (std::size_t i = 0; i < nt * nt; ++i) tt += ktt[i];

    const double dns = static_cast<double>(ns), dnt = static_cast<double>(nt);
    return wkw / (dns * dns) - 2.0 * wk / (dns * dnt) + tt / (dnt * dnt);
}

InstanceWeights kmm_weights(const Tensor& source, const Tensor& target,
                            const KmmConfig& config) {
    if (source.rank() != 2 || target.rank() != 2)
        throw std::invalid_argument("kmm_weights: inputs must be flattened [n, d]");
    const std::size_t ns = source.dim(0), nt = target.dim(0), d = source.dim(1);
    if (ns == 0 || nt == 0) throw std::invalid_argument("kmm_weights: empty sample");
    if (target.dim(1) != d)
        throw std::invalid_argument("kmm_weights: feature dimensions differ");

    double sigma = config.sigma;
    if (sigma <= 0.0) {
        Tensor pooled({ns + nt, d});
        std::copy(source.values.begin(), source.values.end(), pooled.values.begin());
        std::copy(target.values.begin(), target.values.end(),
                  pooled.values.begin() + static_cast<std::ptrdiff_t>(ns * d));
        sigma = median_pairwise_distance(pooled);
    }

    const auto kss = kernel_matrix(source, source, sigma);
    const auto kst = kernel_matrix(source, target, sigma);
    const double dns = static_cast<double>(ns), dnt = static_cast<double>(nt);

    // kappa_i = sum_j k(x_i, y_j)
    std::vector<double> kappa(ns, 0.0);
    for (std::size_t i = 0; i < ns; ++i)
        for (std::size_t j = 0; j < nt; ++j) kappa[i] += kst[i * nt + j];

    // Lipschitz constant of the gradient: 2 lambda_max(K) / ns^2, bounded by
    // power iteration
    std::vector<double> v(ns, 1.0 / std::sqrt(dns)), kv(ns);
    double lambda = 1.0;
    for (int it = 0; it < 30; ++it) {
        std::fill(kv.begin(), kv.end(), 0.0);
        for (std::size_t i = 0; i < ns; ++i) {
            const double vi = v[i];
            if (vi == 0.0) continue;
            const double* row = kss.data() + i * ns;
            for (std::size_t j = 0; j < ns; ++j) kv[j] += vi * row[j];
        }
        double norm = 0.0;
        for (double x : kv) norm += x * x;
        norm = std::sqrt(norm);
        if (norm == 0.0) break;
        lambda = norm;
        for (std::size_t j = 0; j < ns; ++j) v[j] = kv[j] / norm;
    }
    const double step = (dns * dns) / (2.0 * lambda * 1.05);

    InstanceWeights out;
    out.bound = config.bound;
    out.sigma = sigma;
    out.weights.assign(ns, 1.0);
    project(out.weights, config.bound, config.mean_tolerance);

    std::vector<double> grad(ns), next(ns);
    for (int iter = 0; iter < config.max_iters; ++iter) {
        // grad = 2 K w / ns^2 - 2 kappa / (ns nt)
        std::fill(grad.begin(), grad.end(), 0.0);
        for (std::size_t i = 0; i < ns; ++i) {
            const double wi = out.weights[i];
            if (wi == 0.0) continue;
            const double* row = kss.data() + i * ns;
            for (std::size_t j = 0; j < ns; ++j) grad[j] += wi * row[j];
        }
        for (std::size_t j = 0; j < ns; ++j)
            grad[j] = 2.0 * grad[j] / (dns * dns) - 2.0 * kappa[j] / (dns * dnt);

        for (std::size_t j = 0; j < ns; ++j) next[j] = out.weights[j] - step * grad[j];
        project(next, config.bound, config.mean_tolerance);

        double residual = 0.0;
        for (std::size_t j = 0; j < ns; ++j) {
            const double diff = next[j] - out.weights[j];
            residual += diff * diff;
        }
        out.residual = std::sqrt(residual) / step;
        out.weights.swap(next);
        if (out.residual < config.tolerance) {
            out.converged = true;
            break;
        }
    }
    out.objective = kmm_objective(source, target, sigma, out.weights);
    return out;
}

}  // namespace moocxfer::transfer
