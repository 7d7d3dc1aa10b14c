#include "moocxfer/autoencoder.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

#include "moocxfer/adam.hpp"
#include "moocxfer/losses.hpp"
#include "moocxfer/presets.hpp"
#include "moocxfer/rng.hpp"

namespace moocxfer::repr {

std::vector<std::vector<double>> EmbeddingSet::rows_flat() const {
    std::vector<std::vector<double>> rows(size());
    const std::size_t d = dim();
    for (std::size_t i = 0; i < size(); ++i) {
        rows[i].assign(values.values.begin() + static_cast<std::ptrdiff_t>(i * d),
                       values.values.begin() + static_cast<std::ptrdiff_t>((i + 1) * d));
    }
    return rows;
}

std::vector<std::vector<double>> EmbeddingSet::rows_per_unit() const {
    std::vector<std::vector<double>> rows;
    rows.reserve(size() * units);
    for (std::size_t i = 0; i < size(); ++i) {
        for (std::size_t u = 0; u < units; ++u) {
            const double* src = values.values.data() + (i * units + u) * dims_per_unit;
            rows.emplace_back(src, src + dims_per_unit);
        }
    }
    return rows;
}

Tensor balanced_union(const Tensor& a, const Tensor& b, std::uint64_t seed) {
    if (a.sample_shape() != b.sample_shape())
        throw std::invalid_argument("balanced_union: sample shapes differ: " +
                                    shape_to_string(a.shape) + " vs " + shape_to_string(b.shape));
    if (a.batch() == 0 || b.batch() == 0)
        throw std::invalid_argument("balanced_union: empty side");

    const std::size_t target = std::max(a.batch(), b.batch());
    Rng rng(mix_seed(seed, 0x5eed));
    auto oversample = [&rng, target](const Tensor& t) {
        std::vector<std::size_t> order(t.batch());
        std::iota(order.begin(), order.end(), 0);
        shuffle_indices(order, rng);
        std::vector<std::size_t> rows;
        rows.reserve(target);
        for (std::size_t i = 0; i < target; ++i) rows.push_back(order[i % order.size()]);
        return t.gather_rows(rows);
    };
    const Tensor ua = oversample(a);
    const Tensor ub = oversample(b);

    Shape shape = a.shape;
    shape[0] = 2 * target;
    Tensor out(std::move(shape));
    const std::size_t stride = a.sample_size();
    for (std::size_t i = 0; i < target; ++i) {
        std::copy_n(ua.values.data() + i * stride, stride,
                    out.values.data() + (2 * i) * stride);
        std::copy_n(ub.values.data() + i * stride, stride,
                    out.values.data() + (2 * i + 1) * stride);
    }
    return out;
}

std::vector<double> train_reconstruction(nn::Network& encoder, nn::Network& decoder,
                                         const Tensor& features, const TrainConfig& config) {
    if (features.batch() == 0) throw std::invalid_argument("train_reconstruction: no samples");
    if (config.epochs < 1 || config.batch_size < 1)
        throw std::invalid_argument("train_reconstruction: bad config");

    nn::AdamState opt_enc = nn::AdamState::create(encoder.param_count(), config.learning_rate);
    nn::AdamState opt_dec = nn::AdamState::create(decoder.param_count(), config.learning_rate);
    Rng rng(mix_seed(config.seed, 0xae));

    const std::size_t n = features.batch();
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
            const std::vector<std::size_t> rows(order.begin() + static_cast<std::ptrdiff_t>(start),
                                                order.begin() + static_cast<std::ptrdiff_t>(end));
            const Tensor batch = features.gather_rows(rows);

            const nn::Tape enc_tape = nn::run_forward(encoder, batch);
            const nn::Tape dec_tape = nn::run_forward(decoder, enc_tape.output());
            const nn::LossValue loss = nn::mse_loss(dec_tape.output(), batch);
            epoch_loss += loss.value;
            ++batches;

            const nn::BackwardResult dec_back = nn::run_backward(decoder, dec_tape, loss.grad);
            const nn::BackwardResult enc_back =
                nn::run_backward(encoder, enc_tape, dec_back.input_grad);
            nn::adam_step(opt_dec, decoder.params(), dec_back.param_grads);
            nn::adam_step(opt_enc, encoder.params(), enc_back.param_grads);
        }
        epoch_loss /= static_cast<double>(batches);
        if (!std::isfinite(epoch_loss))
            throw std::runtime_error("autoencoder training diverged at epoch " +
                                     std::to_string(epoch));
        trace.push_back(epoch_loss);
    }
    return trace;
}

AutoencoderModel train_autoencoder(const Tensor& features, const TrainConfig& config,
                                   std::size_t bottleneck_per_unit, std::size_t decoder_cells) {
    if (features.rank() != 3)
        throw std::invalid_argument("train_autoencoder: features must be [n, weeks, types]");
    const std::size_t units = features.dim(1);
    const std::size_t types = features.dim(2);

    AutoencoderModel model;
    model.units = units;
    model.bottleneck_per_unit = bottleneck_per_unit;
    const nn::AutoencoderSpecs specs =
        nn::lstm_ae_specs(units, types, bottleneck_per_unit, decoder_cells);
    model.encoder = nn::Network::build(specs.encoder, {units, types}, config.seed);
    model.decoder = nn::Network::build(specs.decoder, {units * bottleneck_per_unit},
                                       mix_seed(config.seed, 1));
    model.loss_trace = train_reconstruction(model.encoder, model.decoder, features, config);
    return model;
}

EmbeddingSet encode(const AutoencoderModel& model, const Tensor& features) {
    EmbeddingSet set;
    set.units = model.units;
    set.dims_per_unit = model.bottleneck_per_unit;
    if (features.batch() == 0) {
        set.values = Tensor({0, set.units, set.dims_per_unit});
        return set;
    }
    const nn::Tape tape = nn::run_forward(model.encoder, features);
    set.values = tape.output().reshaped({features.batch(), set.units, set.dims_per_unit});
    return set;
}

linalg::Matrix linear_encoder_projection(const AutoencoderModel& model) {
    const auto& layers = model.encoder.layers();
    if (layers.empty() || layers[0].spec.kind != nn::LayerKind::Conv1D ||
        layers[0].spec.kernel != 1)
        throw std::invalid_argument(
            "linear_encoder_projection: encoder is not a per-unit linear map");
    const std::size_t out = layers[0].out_shape[1];
    const std::size_t in = layers[0].in_shape[1];
    linalg::Matrix proj(out, std::vector<double>(in));
    const std::vector<double>& p = model.encoder.params();
    for (std::size_t c = 0; c < out; ++c)
        for (std::size_t e = 0; e < in; ++e) proj[c][e] = p[c * in + e];
    return proj;
}

NnPcaModel fit_nn_pca(const Tensor& features, std::size_t n_components,
                      const TrainConfig& config) {
    if (features.rank() != 3)
        throw std::invalid_argument("fit_nn_pca: features must be [n, weeks, types]");
    const std::size_t units = features.dim(1);
    const std::size_t types = features.dim(2);
    if (n_components < 1 || n_components > types)
        throw std::invalid_argument("fit_nn_pca: n_components outside [1, types]");

    NnPcaModel out;
    out.model.units = units;
    out.model.bottleneck_per_unit = n_components;
    const nn::AutoencoderSpecs specs = nn::linear_ae_specs(units, types, n_components);
    out.model.encoder = nn::Network::build(specs.encoder, {units, types}, config.seed);
    out.model.decoder =
        nn::Network::build(specs.decoder, {units * n_components}, mix_seed(config.seed, 1));
    out.model.loss_trace =
        train_reconstruction(out.model.encoder, out.model.decoder, features, config);

    // kernel-1 convolution weights are exactly the per-unit linear map
    out.projection.assign(n_components, std::vector<double>(types));
    const std::vector<double>& p = out.model.encoder.params();
    for (std::size_t c = 0; c < n_components; ++c)
        for (std::size_t e = 0; e < types; ++e) out.projection[c][e] = p[c * types + e];
    return out;
}

}  // namespace moocxfer::repr
