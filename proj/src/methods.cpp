#include "moocxfer/methods.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "moocxfer/adam.hpp"
#include "moocxfer/coral.hpp"
#include "moocxfer/losses.hpp"
#include "moocxfer/presets.hpp"
#include "moocxfer/rng.hpp"

namespace moocxfer::transfer {

std::string method_name(Method m) {
    switch (m) {
        case Method::Passive: return "passive";
        case Method::Active: return "active";
        case Method::Naive: return "naive";
        case Method::InSitu: return "in-situ";
        case Method::Instance: return "instance";
        case Method::NoTransfer: return "no-transfer";
        case Method::NoTransferAe: return "no-transfer-ae";
    }
    return "?";
}

Method method_from_name(const std::string& name) {
    for (Method m : all_methods())
        if (method_name(m) == name) return m;
    throw std::invalid_argument("unknown method '" + name + "'");
}

const std::vector<Method>& all_methods() {
    static const std::vector<Method> methods = {
        Method::Passive, Method::Active,     Method::Naive,        Method::InSitu,
        Method::Instance, Method::NoTransfer, Method::NoTransferAe,
    };
    return methods;
}

namespace {

Tensor window_suffix(const Tensor& features, std::size_t window) {
    const std::size_t n = features.dim(0), weeks = features.dim(1), types = features.dim(2);
    if (window == 0 || window == weeks) return features;
    if (window > weeks)
        throw std::invalid_argument("predict: window longer than the available history");
    Tensor out({n, window, types});
    const std::size_t skip = weeks - window;
    for (std::size_t i = 0; i < n; ++i)
        std::copy_n(features.values.data() + (i * weeks + skip) * types, window * types,
                    out.values.data() + i * window * types);
    return out;
}

std::vector<double> head_scores(const nn::Network& head, const Tensor& input) {
    const nn::Tape tape = nn::run_forward(head, input);
    const Tensor& out = tape.output();
    std::vector<double> scores(out.values.begin(), out.values.end());
    return scores;
}

}  // namespace

std::vector<double> WeeklyPredictor::predict(const Tensor& features) const {
    if (features.rank() != 3)
        throw std::invalid_argument("predict: features must be [n, weeks, types]");
    if (features.dim(1) != input_weeks || features.dim(2) != event_types)
        throw std::invalid_argument("predict: features " + shape_to_string(features.shape) +
                                    " do not match [n, " + std::to_string(input_weeks) + ", " +
                                    std::to_string(event_types) + "]");
    const std::size_t n = features.dim(0);
    if (constant_fallback) return std::vector<double>(n, constant_value);
    if (n == 0) return {};

    const Tensor input = window_suffix(features, window);
    if (!autoencoder) return head_scores(head, input);

    repr::EmbeddingSet emb = repr::encode(*autoencoder, input);
    if (tpca) emb = repr::tpca_apply(*tpca, emb);
    return head_scores(head, emb.values);
}

std::vector<double> predict(const WeeklyPredictor& predictor, const Tensor& features) {
    return predictor.predict(features);
}

std::vector<double> train_classifier(nn::Network& net, const Tensor& features,
                                     const std::vector<int>& labels,
                                     const repr::TrainConfig& config,
                                     const std::vector<double>* sample_weights) {
    const std::size_t n = features.batch();
    if (n == 0) throw std::invalid_argument("train_classifier: no samples");
    if (labels.size() != n) throw std::invalid_argument("train_classifier: label count mismatch");
    if (sample_weights && sample_weights->size() != n)
        throw std::invalid_argument("train_classifier: weight count mismatch");

    nn::AdamState opt = nn::AdamState::create(net.param_count(), config.learning_rate);
    Rng rng(mix_seed(config.seed, 0xc1a55));
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);

    std::vector<double> trace;
    trace.reserve(static_cast<std::size_t>(config.epochs));
    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        shuffle_indices(order, rng);
        double epoch_loss = 0.0;
        std::size_t batches = 0;
        for (std::size_t start = 0; start < n;
             start += static_cast<std::size_t>(config.batch_size)) {
            const std::size_t end =
                std::min(n, start + static_cast<std::size_t>(config.batch_size));
            std::vector<std::size_t> rows(order.begin() + static_cast<std::ptrdiff_t>(start),
                                          order.begin() + static_cast<std::ptrdiff_t>(end));
            const Tensor batch = features.gather_rows(rows);
            std::vector<int> y(rows.size());
            std::vector<double> w;
            for (std::size_t i = 0; i < rows.size(); ++i) y[i] = labels[rows[i]];
            if (sample_weights) {
                w.resize(rows.size());
                for (std::size_t i = 0; i < rows.size(); ++i) w[i] = (*sample_weights)[rows[i]];
                // a batch of only zero-weight samples cannot learn anything
                if (std::accumulate(w.begin(), w.end(), 0.0) <= 0.0) continue;
            }
            const nn::Tape tape = nn::run_forward(net, batch);
            const nn::LossValue loss =
                nn::bce_loss(tape.output(), y, sample_weights ? &w : nullptr);
            epoch_loss += loss.value;
            ++batches;
            const nn::BackwardResult back = nn::run_backward(net, tape, loss.grad);
            nn::adam_step(opt, net.params(), back.param_grads);
        }
        epoch_loss /= static_cast<double>(std::max<std::size_t>(1, batches));
        if (!std::isfinite(epoch_loss))
            throw std::runtime_error("classifier training diverged at epoch " +
                                     std::to_string(epoch));
        trace.push_back(epoch_loss);
    }
    return trace;
}

namespace {

void check_slice(const data::WeekSlice& slice, const char* what) {
    if (slice.features.batch() == 0)
        throw std::invalid_argument(std::string(what) + ": empty slice");
    if (slice.features.batch() != slice.labels.size())
        throw std::invalid_argument(std::string(what) + ": label count mismatch");
}

WeeklyPredictor raw_lstm_predictor(Method method, const data::WeekSlice& source,
                                   const MethodConfig& config,
                                   const std::vector<double>* weights) {
    check_slice(source, "train");
    const std::size_t weeks = source.features.dim(1);
    const std::size_t types = source.features.dim(2);

    WeeklyPredictor p;
    p.method = method;
    p.week = source.week;
    p.input_weeks = weeks;
    p.event_types = types;
    p.head = nn::Network::build(nn::lstm_predictor_specs(weeks, types), {weeks, types},
                                mix_seed(config.seed, 0x11ead));
    repr::TrainConfig cfg = config.predictor;
    cfg.seed = mix_seed(config.seed, 0x7ea1);
    train_classifier(p.head, source.features, source.labels, cfg, weights);
    return p;
}

}  // namespace

WeeklyPredictor train_naive(const data::WeekSlice& source, const MethodConfig& config) {
    return raw_lstm_predictor(Method::Naive, source, config, nullptr);
}

WeeklyPredictor train_instance(const data::WeekSlice& source, const data::FeatureSlice& target,
                               const MethodConfig& config) {
    check_slice(source, "train_instance");
    const std::size_t ns = source.features.dim(0);
    const Tensor source_flat =
        source.features.reshaped({ns, source.features.sample_size()});
    const Tensor target_flat =
        target.features.reshaped({target.features.dim(0), target.features.sample_size()});
    const InstanceWeights weights = kmm_weights(source_flat, target_flat, config.kmm);
    WeeklyPredictor p =
        raw_lstm_predictor(Method::Instance, source, config, &weights.weights);
    return p;
}

WeeklyPredictor train_passive(const data::WeekSlice& source, const data::FeatureSlice& target,
                              const MethodConfig& config) {
    check_slice(source, "train_passive");
    if (target.features.batch() == 0) throw std::invalid_argument("train_passive: empty target");
    if (source.features.sample_shape() != target.features.sample_shape())
        throw std::invalid_argument("train_passive: feature layouts differ");

    const std::size_t weeks = source.features.dim(1);
    const std::size_t types = source.features.dim(2);

    // 1. autoencoder on the union of both feature sets, smaller side oversampled
    const Tensor unioned =
        balanced_union(source.features, target.features, mix_seed(config.seed, 0xab));
    repr::TrainConfig ae_cfg = config.autoencoder;
    ae_cfg.seed = mix_seed(config.seed, 0xae0);
    repr::AutoencoderModel ae = repr::train_autoencoder(
        unioned, ae_cfg, config.bottleneck_per_unit, config.decoder_cells);

    // 2. transform fit on the target embedding only
    const repr::EmbeddingSet target_emb = repr::encode(ae, target.features);
    const repr::EmbeddingSet source_emb = repr::encode(ae, source.features);
    repr::TpcaResult tpca =
        repr::fit_tpca_and_align(target_emb, source_emb, config.tpca_out_per_unit);

    // 3. convolutional head trained on the aligned source embedding
    WeeklyPredictor p;
    p.method = Method::Passive;
    p.week = source.week;
    p.input_weeks = weeks;
    p.event_types = types;
    p.autoencoder = std::move(ae);
    p.tpca = std::move(tpca.model);
    p.head = nn::Network::build(
        nn::cnn_embedding_predictor_specs(weeks, config.tpca_out_per_unit),
        {weeks, config.tpca_out_per_unit}, mix_seed(config.seed, 0xc33));
    repr::TrainConfig cfg = config.predictor;
    cfg.seed = mix_seed(config.seed, 0x9a55);
    train_classifier(p.head, tpca.source.values, source.labels, cfg);
    return p;
}

WeeklyPredictor train_active(const data::WeekSlice& source, const data::FeatureSlice& target,
                             const MethodConfig& config) {
    check_slice(source, "train_active");
    if (target.features.batch() == 0) throw std::invalid_argument("train_active: empty target");
    if (source.features.sample_shape() != target.features.sample_shape())
        throw std::invalid_argument("train_active: feature layouts differ");

    const std::size_t weeks = source.features.dim(1);
    const std::size_t types = source.features.dim(2);
    const std::size_t ns = source.features.dim(0);
    const std::size_t nt = target.features.dim(0);
    if (ns < 2 || nt < 2)
        throw std::invalid_argument("train_active: need at least 2 students per side");

    nn::BuiltAutoencoder ae;
    if (config.linear_autoencoder) {
        const nn::AutoencoderSpecs specs =
            nn::linear_ae_specs(weeks, types, config.bottleneck_per_unit);
        ae.encoder = nn::Network::build(specs.encoder, {weeks, types},
                                        mix_seed(config.seed, 0xacae));
        ae.decoder = nn::Network::build(specs.decoder, {weeks * config.bottleneck_per_unit},
                                        mix_seed(config.seed, 0xacab));
    } else {
        ae = nn::build_lstm_ae(weeks, types, config.bottleneck_per_unit, config.decoder_cells,
                               mix_seed(config.seed, 0xacae));
    }
    nn::Network head = nn::Network::build(
        nn::cnn_embedding_predictor_specs(weeks, config.bottleneck_per_unit),
        {weeks, config.bottleneck_per_unit}, mix_seed(config.seed, 0xac4d));

    nn::AdamState opt_enc = nn::AdamState::create(ae.encoder.param_count(),
                                                  config.autoencoder.learning_rate);
    nn::AdamState opt_dec = nn::AdamState::create(ae.decoder.param_count(),
                                                  config.autoencoder.learning_rate);
    nn::AdamState opt_head =
        nn::AdamState::create(head.param_count(), config.autoencoder.learning_rate);

    Rng rng(mix_seed(config.seed, 0xac7));
    const std::size_t half =
        std::max<std::size_t>(2, static_cast<std::size_t>(config.autoencoder.batch_size) / 2);
    const std::size_t steps_per_epoch =
        (std::max(ns, nt) + half - 1) / half;

    // cyclic shuffled queues per domain
    std::vector<std::size_t> qs(ns), qt(nt);
    std::iota(qs.begin(), qs.end(), 0);
    std::iota(qt.begin(), qt.end(), 0);
    shuffle_indices(qs, rng);
    shuffle_indices(qt, rng);
    std::size_t ps = 0, pt = 0;
    auto next_rows = [&rng](std::vector<std::size_t>& queue, std::size_t& pos,
                            std::size_t count) {
        std::vector<std::size_t> rows;
        rows.reserve(count);
        for (std::size_t i = 0; i < count; ++i) {
            if (pos == queue.size()) {
                shuffle_indices(queue, rng);
                pos = 0;
            }
            rows.push_back(queue[pos++]);
        }
        return rows;
    };

    const Shape emb_shape = {weeks, config.bottleneck_per_unit};
    for (int epoch = 0; epoch < config.autoencoder.epochs; ++epoch) {
        double sum_pred = 0.0, sum_recon = 0.0, sum_coral = 0.0;
        for (std::size_t step = 0; step < steps_per_epoch; ++step) {
            const auto rows_s = next_rows(qs, ps, std::min(half, ns));
            const auto rows_t = next_rows(qt, pt, std::min(half, nt));
            const Tensor xs = source.features.gather_rows(rows_s);
            const Tensor xt = target.features.gather_rows(rows_t);
            std::vector<int> ys(rows_s.size());
            for (std::size_t i = 0; i < rows_s.size(); ++i) ys[i] = source.labels[rows_s[i]];

            const nn::Tape enc_s = nn::run_forward(ae.encoder, xs);
            const nn::Tape enc_t = nn::run_forward(ae.encoder, xt);
            const Tensor& emb_s = enc_s.output();  // [b, weeks*bottleneck]
            const Tensor& emb_t = enc_t.output();

            // source prediction through the head
            Shape batched_emb = emb_shape;
            batched_emb.insert(batched_emb.begin(), emb_s.dim(0));
            const nn::Tape head_tape = nn::run_forward(head, emb_s.reshaped(batched_emb));
            const nn::LossValue pred_loss = nn::bce_loss(head_tape.output(), ys);

            // target reconstruction through the decoder
            const nn::Tape dec_tape = nn::run_forward(ae.decoder, emb_t);
            const nn::LossValue recon_loss = nn::mse_loss(dec_tape.output(), xt);

            // covariance alignment between the half-batch embeddings
            const CoralResult coral = coral_loss(emb_s, emb_t);

            sum_pred += config.lambda_pred * pred_loss.value;
            sum_recon += config.lambda_recon * recon_loss.value;
            sum_coral += config.lambda_coral * coral.value;

            const double total = config.lambda_pred * pred_loss.value +
                                 config.lambda_recon * recon_loss.value +
                                 config.lambda_coral * coral.value;
            if (!std::isfinite(total))
                throw std::runtime_error(
                    "active training diverged at epoch " + std::to_string(epoch) +
                    " (prediction " + std::to_string(pred_loss.value) + ", reconstruction " +
                    std::to_string(recon_loss.value) + ", coral " + std::to_string(coral.value) +
                    ")");

            // backprop: head and decoder first, then both paths into the encoder
            Tensor pred_grad = pred_loss.grad;
            for (double& g : pred_grad.values) g *= config.lambda_pred;
            const nn::BackwardResult head_back = nn::run_backward(head, head_tape, pred_grad);

            Tensor recon_grad = recon_loss.grad;
            for (double& g : recon_grad.values) g *= config.lambda_recon;
            const nn::BackwardResult dec_back = nn::run_backward(ae.decoder, dec_tape, recon_grad);

            Tensor demb_s = head_back.input_grad.reshaped(emb_s.shape);
            for (std::size_t i = 0; i < demb_s.size(); ++i)
                demb_s.values[i] += config.lambda_coral * coral.grad_source[i];
            Tensor demb_t = dec_back.input_grad;
            for (std::size_t i = 0; i < demb_t.size(); ++i)
                demb_t.values[i] += config.lambda_coral * coral.grad_target[i];

            const nn::BackwardResult enc_back_s = nn::run_backward(ae.encoder, enc_s, demb_s);
            const nn::BackwardResult enc_back_t = nn::run_backward(ae.encoder, enc_t, demb_t);
            std::vector<double> enc_grads = enc_back_s.param_grads;
            for (std::size_t i = 0; i < enc_grads.size(); ++i)
                enc_grads[i] += enc_back_t.param_grads[i];

            nn::adam_step(opt_head, head.params(), head_back.param_grads);
            nn::adam_step(opt_dec, ae.decoder.params(), dec_back.param_grads);
            nn::adam_step(opt_enc, ae.encoder.params(), enc_grads);
        }
        (void)sum_pred;
        (void)sum_recon;
        (void)sum_coral;
    }

    WeeklyPredictor p;
    p.method = Method::Active;
    p.week = source.week;
    p.input_weeks = weeks;
    p.event_types = types;
    repr::AutoencoderModel model;
    model.encoder = std::move(ae.encoder);
    model.decoder = std::move(ae.decoder);
    model.units = weeks;
    model.bottleneck_per_unit = config.bottleneck_per_unit;
    p.autoencoder = std::move(model);
    p.head = std::move(head);
    return p;
}

WeeklyPredictor train_in_situ(const data::Cohort& target, int week, const MethodConfig& config) {
    if (week < 2 || week > target.weeks)
        throw std::invalid_argument("train_in_situ: week outside [2, T]");

    if (week == 2) {
        // w = k-2 = 0: no window to train on; flagged constant fallback
        WeeklyPredictor p;
        p.method = Method::InSitu;
        p.week = week;
        p.input_weeks = 1;
        p.event_types = target.vocabulary.size();
        p.constant_fallback = true;
        p.constant_value = 0.0;  // majority rate: week-1 dropout cannot occur
        return p;
    }

    const int max_window = week - 2;
    const std::size_t window = config.insitu_window <= 0
                                   ? static_cast<std::size_t>(max_window)
                                   : std::min<std::size_t>(
                                         static_cast<std::size_t>(config.insitu_window),
                                         static_cast<std::size_t>(max_window));

    // proxy task: windows [k-1-w, k-2] against the observed labels y_{k-1}
    const data::WeekSlice history = data::slice_for_week(target, week - 1);
    const std::size_t types = target.vocabulary.size();
    data::WeekSlice windowed;
    windowed.week = week;
    windowed.labels = history.labels;
    windowed.student_ids = history.student_ids;
    Tensor feats({history.features.dim(0), window, types});
    const std::size_t hist_weeks = history.features.dim(1);
    const std::size_t skip = hist_weeks - window;
    for (std::size_t i = 0; i < history.features.dim(0); ++i)
        std::copy_n(history.features.values.data() + (i * hist_weeks + skip) * types,
                    window * types, feats.values.data() + i * window * types);
    windowed.features = std::move(feats);

    WeeklyPredictor p = raw_lstm_predictor(Method::InSitu, windowed, config, nullptr);
    p.week = week;
    p.input_weeks = static_cast<std::size_t>(week - 1);
    p.window = window;
    return p;
}

NoTransferOutcome train_no_transfer(const data::WeekSlice& target, bool use_autoencoder,
                                    const MethodConfig& config) {
    check_slice(target, "train_no_transfer");
    const std::size_t n = target.features.dim(0);
    const std::size_t n_train =
        static_cast<std::size_t>(std::lround(static_cast<double>(n) * config.train_fraction));
    if (n_train < 2 || n_train >= n)
        throw std::invalid_argument("train_no_transfer: slice too small for a 4:1 split");

    Rng rng(mix_seed(config.seed, 0x5117));
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    shuffle_indices(order, rng);
    const std::vector<std::size_t> train_rows(order.begin(),
                                              order.begin() + static_cast<std::ptrdiff_t>(n_train));
    NoTransferOutcome outcome;
    outcome.holdout_rows.assign(order.begin() + static_cast<std::ptrdiff_t>(n_train), order.end());
    std::sort(outcome.holdout_rows.begin(), outcome.holdout_rows.end());

    data::WeekSlice train;
    train.week = target.week;
    train.features = target.features.gather_rows(train_rows);
    for (std::size_t r : train_rows) {
        train.labels.push_back(target.labels[r]);
        train.student_ids.push_back(target.student_ids[r]);
    }

    if (!use_autoencoder) {
        outcome.predictor = raw_lstm_predictor(Method::NoTransfer, train, config, nullptr);
        return outcome;
    }

    const std::size_t weeks = train.features.dim(1);
    const std::size_t types = train.features.dim(2);
    repr::TrainConfig ae_cfg = config.autoencoder;
    ae_cfg.seed = mix_seed(config.seed, 0xae1);
    repr::AutoencoderModel ae = repr::train_autoencoder(
        train.features, ae_cfg, config.bottleneck_per_unit, config.decoder_cells);
    const repr::EmbeddingSet emb = repr::encode(ae, train.features);

    WeeklyPredictor p;
    p.method = Method::NoTransferAe;
    p.week = target.week;
    p.input_weeks = weeks;
    p.event_types = types;
    p.autoencoder = std::move(ae);
    p.head = nn::Network::build(
        nn::cnn_embedding_predictor_specs(weeks, config.bottleneck_per_unit),
        {weeks, config.bottleneck_per_unit}, mix_seed(config.seed, 0xc34));
    repr::TrainConfig cfg = config.predictor;
    cfg.seed = mix_seed(config.seed, 0x9a56);
    train_classifier(p.head, emb.values, train.labels, cfg);
    outcome.predictor = std::move(p);
    return outcome;
}

}  // namespace moocxfer::transfer
