#include "moocxfer/pad.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

#include "moocxfer/adam.hpp"
#include "moocxfer/losses.hpp"
#include "moocxfer/network.hpp"
#include "moocxfer/presets.hpp"
#include "moocxfer/rng.hpp"

namespace moocxfer::eval {

namespace {

struct Split {
    Tensor x_train, x_test;
    std::vector<int> y_train, y_test;
    std::vector<double> w_train;  // class-balancing weights
};

// Stratified by domain so both classes appear on both sides of the split.
Split make_split(const Tensor& source, const Tensor& target, double train_fraction, Rng& rng) {
    const std::size_t ns = source.dim(0), nt = target.dim(0), d = source.dim(1);
    const std::size_t ns_train = static_cast<std::size_t>(static_cast<double>(ns) * train_fraction);
    const std::size_t nt_train = static_cast<std::size_t>(static_cast<double>(nt) * train_fraction);
    if (ns_train == 0 || nt_train == 0 || ns_train == ns || nt_train == nt)
        throw std::invalid_argument("proxy_a_distance: degenerate train/test split");

    std::vector<std::size_t> si(ns), ti(nt);
    std::iota(si.begin(), si.end(), 0);
    std::iota(ti.begin(), ti.end(), 0);
    shuffle_indices(si, rng);
    shuffle_indices(ti, rng);

    Split sp;
    const std::size_t n_train = ns_train + nt_train;
    const std::size_t n_test = (ns - ns_train) + (nt - nt_train);
    sp.x_train = Tensor({n_train, d});
    sp.x_test = Tensor({n_test, d});
    std::size_t r = 0, e = 0;
    auto put = [&](const Tensor& src, std::size_t row, bool train, int label, double weight) {
        Tensor& dst = train ? sp.x_train : sp.x_test;
        const std::size_t out_row = train ? r++ : e++;
        std::copy_n(src.values.data() + row * d, d, dst.values.data() + out_row * d);
        if (train) {
            sp.y_train.push_back(label);
            sp.w_train.push_back(weight);
        } else {
            sp.y_test.push_back(label);
        }
    };
    const double ws = 0.5 / static_cast<double>(ns_train);
    const double wt = 0.5 / static_cast<double>(nt_train);
    for (std::size_t i = 0; i < ns; ++i) put(source, si[i], i < ns_train, 0, ws);
    for (std::size_t i = 0; i < nt; ++i) put(target, ti[i], i < nt_train, 1, wt);
    return sp;
}

}  // namespace

PadResult proxy_a_distance(const Tensor& source, const Tensor& target, const PadConfig& config) {
    if (source.rank() != 2 || target.rank() != 2)
        throw std::invalid_argument("proxy_a_distance: inputs must be flattened [n, d]");
    if (source.dim(1) != target.dim(1))
        throw std::invalid_argument("proxy_a_distance: feature dimensions differ");
    if (source.dim(0) < 5 || target.dim(0) < 5)
        throw std::invalid_argument("proxy_a_distance: need at least 5 rows per side");

    Rng rng(mix_seed(config.seed, 0xbad));
    const Split sp = make_split(source, target, config.train_fraction, rng);

    nn::Network clf =
        nn::Network::build(nn::domain_classifier_specs(), {source.dim(1)}, mix_seed(config.seed, 1));
    nn::AdamState opt = nn::AdamState::create(clf.param_count(), config.learning_rate);

    const std::size_t n = sp.x_train.dim(0);
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        shuffle_indices(order, rng);
        for (std::size_t start = 0; start < n;
             start += static_cast<std::size_t>(config.batch_size)) {
            const std::size_t end =
                std::min(n, start + static_cast<std::size_t>(config.batch_size));
            std::vector<std::size_t> rows(order.begin() + static_cast<std::ptrdiff_t>(start),
                                          order.begin() + static_cast<std::ptrdiff_t>(end));
            const Tensor batch = sp.x_train.gather_rows(rows);
            std::vector<int> labels(rows.size());
            std::vector<double> weights(rows.size());
            for (std::size_t i = 0; i < rows.size(); ++i) {
                labels[i] = sp.y_train[rows[i]];
                weights[i] = sp.w_train[rows[i]];
            }
            const nn::Tape tape = nn::run_forward(clf, batch);
            const nn::LossValue loss = nn::bce_loss(tape.output(), labels, &weights);
            const nn::BackwardResult back = nn::run_backward(clf, tape, loss.grad);
            nn::adam_step(opt, clf.params(), back.param_grads);
        }
    }

    // balanced error at threshold 0.5 on the held-out rows
    const nn::Tape tape = nn::run_forward(clf, sp.x_test);
    double err0 = 0.0, err1 = 0.0, n0 = 0.0, n1 = 0.0;
    for (std::size_t i = 0; i < sp.y_test.size(); ++i) {
        const int pred = tape.output()[i] >= 0.5 ? 1 : 0;
        if (sp.y_test[i] == 0) {
            n0 += 1.0;
            if (pred != 0) err0 += 1.0;
        } else {
            n1 += 1.0;
            if (pred != 1) err1 += 1.0;
        }
    }
    PadResult result;
    result.classifier_error = 0.5 * (err0 / n0 + err1 / n1);
    result.pad = std::clamp(2.0 * (1.0 - 2.0 * result.classifier_error), 0.0, 2.0);
    result.n_source = source.dim(0);
    result.n_target = target.dim(0);
    return result;
}

PadResult proxy_a_distance_per_slice(const data::Cohort& a, const data::Cohort& b,
                                     const PadConfig& config) {
    if (a.vocabulary.names != b.vocabulary.names)
        throw std::invalid_argument("proxy_a_distance_per_slice: vocabularies differ");
    if (a.weeks != b.weeks)
        throw std::invalid_argument("proxy_a_distance_per_slice: week counts differ");
    const std::size_t types = a.vocabulary.size();

    auto slice_column = [types](const data::Cohort& c, int week, std::size_t type) {
        Tensor t({c.size(), 1});
        for (std::size_t i = 0; i < c.size(); ++i)
            t.values[i] = c.series[i].at(week, type);
        return t;
    };

    PadResult avg;
    avg.n_source = a.size();
    avg.n_target = b.size();
    double total_pad = 0.0, total_err = 0.0;
    std::size_t slices = 0;
    for (int week = 1; week <= a.weeks; ++week) {
        for (std::size_t e = 0; e < types; ++e) {
            PadConfig slice_cfg = config;
            slice_cfg.seed = mix_seed(config.seed, static_cast<std::uint64_t>(week) * 131 + e);
            const PadResult r =
                proxy_a_distance(slice_column(a, week, e), slice_column(b, week, e), slice_cfg);
            total_pad += r.pad;
            total_err += r.classifier_error;
            ++slices;
        }
    }
    avg.pad = total_pad / static_cast<double>(slices);
    avg.classifier_error = total_err / static_cast<double>(slices);
    return avg;
}

}  // namespace moocxfer::eval
