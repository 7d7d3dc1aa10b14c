#include "moocxfer/presets.hpp"

#include "moocxfer/rng.hpp"

namespace moocxfer::nn {

std::vector<LayerSpec> lstm_predictor_specs(std::size_t weeks, std::size_t event_types) {
    (void)weeks;
    (void)event_types;
    return {
        LayerSpec::conv1d(16, 1), LayerSpec::relu(),
        LayerSpec::conv1d(8, 1),  LayerSpec::relu(),
        LayerSpec::lstm(8),       LayerSpec::relu(),
        LayerSpec::flatten(),     LayerSpec::dense(1),
        LayerSpec::sigmoid(),
    };
}

std::vector<LayerSpec> AutoencoderSpecs::full() const {
    std::vector<LayerSpec> all = encoder;
    all.insert(all.end(), decoder.begin(), decoder.end());
    return all;
}

AutoencoderSpecs lstm_ae_specs(std::size_t weeks, std::size_t event_types,
                               std::size_t bottleneck_per_unit, std::size_t decoder_cells) {
    AutoencoderSpecs specs;
    specs.encoder = {
        LayerSpec::conv1d(12, 1),
        LayerSpec::leaky_relu(0.2),
        LayerSpec::bilstm(8),
        LayerSpec::leaky_relu(0.2),
        LayerSpec::conv1d(static_cast<int>(bottleneck_per_unit), 1),
        LayerSpec::flatten(),
    };
    specs.decoder = {
        LayerSpec::reshape({weeks, bottleneck_per_unit}),
        LayerSpec::bilstm(static_cast<int>(decoder_cells)),
        LayerSpec::leaky_relu(0.2),
        LayerSpec::conv1d(static_cast<int>(event_types), 1),
        LayerSpec::sigmoid(),
    };
    return specs;
}

std::vector<LayerSpec> cnn_embedding_predictor_specs(std::size_t units,
                                                     std::size_t dims_per_unit) {
    (void)units;
    (void)dims_per_unit;
    return {
        LayerSpec::conv1d(8, 3), LayerSpec::relu(),
        LayerSpec::conv1d(8, 3), LayerSpec::relu(),
        LayerSpec::flatten(),    LayerSpec::dense(1),
        LayerSpec::sigmoid(),
    };
}

AutoencoderSpecs linear_ae_specs(std::size_t weeks, std::size_t event_types,
                                 std::size_t n_components) {
    AutoencoderSpecs specs;
    specs.encoder = {
        LayerSpec::conv1d(static_cast<int>(n_components), 1),
        LayerSpec::flatten(),
    };
    specs.decoder = {
        LayerSpec::reshape({weeks, n_components}),
        LayerSpec::conv1d(static_cast<int>(event_types), 1),
    };
    return specs;
}

std::vector<LayerSpec> domain_classifier_specs() {
    return {LayerSpec::dense(1), LayerSpec::sigmoid()};
}

BuiltAutoencoder build_lstm_ae(std::size_t weeks, std::size_t event_types,
                               std::size_t bottleneck_per_unit, std::size_t decoder_cells,
                               std::uint64_t seed) {
    const AutoencoderSpecs specs =
        lstm_ae_specs(weeks, event_types, bottleneck_per_unit, decoder_cells);
    BuiltAutoencoder ae;
    ae.encoder = Network::build(specs.encoder, {weeks, event_types}, seed);
    ae.decoder =
        Network::build(specs.decoder, {weeks * bottleneck_per_unit}, mix_seed(seed, 1));
    return ae;
}

}  // namespace moocxfer::nn
