#pragma once

// The fixed architectures used throughout: a recurrent predictor on raw
// weekly features, a recurrent sequence autoencoder with a per-time-unit
// bottleneck, a small convolutional predictor on embeddings, a per-unit
// linear autoencoder, and a linear domain classifier.

#include <cstdint>
#include <vector>

#include "moocxfer/network.hpp"

namespace moocxfer::nn {

// Input--Conv1D(16,1)--ReLU--Conv1D(8,1)--ReLU--LSTM(8)--ReLU--Flatten--
// FC(1)--Sigmoid--Output, on [weeks, event_types] input.
std::vector<LayerSpec> lstm_predictor_specs(std::size_t weeks, std::size_t event_types);

// Sequence autoencoder. Encoder: Conv1D(12,1)--LeakyReLU(0.2)--BiLSTM(8)--
// LeakyReLU(0.2)--Conv1D(bottleneck,1)--Flatten; the flattened output is the
// embedding. Decoder: Reshape--BiLSTM(6)--LeakyReLU(0.2)--Conv1D(E,1)--Sigmoid.
struct AutoencoderSpecs {
    std::vector<LayerSpec> encoder;
    std::vector<LayerSpec> decoder;
    // Full chain (encoder followed by decoder), for single-network use.
    std::vector<LayerSpec> full() const;
};
AutoencoderSpecs lstm_ae_specs(std::size_t weeks, std::size_t event_types,
                               std::size_t bottleneck_per_unit = 8,
                               std::size_t decoder_cells = 6);

// Input--Conv1D(8,3)--ReLU--Conv1D(8,3)--ReLU--Flatten--FC(1)--Sigmoid,
// on [units, dims_per_unit] embeddings.
std::vector<LayerSpec> cnn_embedding_predictor_specs(std::size_t units, std::size_t dims_per_unit);

// Linear per-time-unit autoencoder (Conv1D kernel 1, no activations); the
// encoder weight matrix is a [n_components x E] linear map of the raw features.
AutoencoderSpecs linear_ae_specs(std::size_t weeks, std::size_t event_types,
                                 std::size_t n_components);

// Dense(1)--Sigmoid over a flat feature vector.
std::vector<LayerSpec> domain_classifier_specs();

struct BuiltAutoencoder {
    Network encoder;
    Network decoder;
};
BuiltAutoencoder build_lstm_ae(std::size_t weeks, std::size_t event_types,
                               std::size_t bottleneck_per_unit, std::size_t decoder_cells,
                               std::uint64_t seed);

}  // namespace moocxfer::nn
