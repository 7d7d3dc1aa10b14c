#pragma once

// Sequence autoencoders over weekly feature tensors and the embeddings they
// produce. Embeddings keep their per-time-unit layout (units x dims) so the
// convolutional predictor can slide over time.

#include <cstdint>
#include <vector>

#include "moocxfer/eigen.hpp"
#include "moocxfer/network.hpp"
#include "moocxfer/tensor.hpp"

namespace moocxfer::repr {

struct TrainConfig {
    double learning_rate = 0.001;
    int batch_size = 128;
    int epochs = 100;
    std::uint64_t seed = 1;
};

struct EmbeddingSet {
    std::size_t units = 0;
    std::size_t dims_per_unit = 0;
    Tensor values;  // [n, units, dims_per_unit]

    std::size_t size() const { return values.batch(); }
    std::size_t dim() const { return units * dims_per_unit; }
    Tensor flat() const { return values.reshaped({values.batch(), dim()}); }
    std::vector<std::vector<double>> rows_flat() const;
    // rows pooled across time units: one row of length dims_per_unit per
    // (student, unit) pair
    std::vector<std::vector<double>> rows_per_unit() const;
};

struct AutoencoderModel {
    nn::Network encoder;
    nn::Network decoder;
    std::size_t units = 0;
    std::size_t bottleneck_per_unit = 8;
    std::vector<double> loss_trace;  // mean reconstruction loss per epoch
};

// Oversamples the smaller tensor (cycling through a shuffled order) so both
// sides contribute equally, then interleaves deterministically.
Tensor balanced_union(const Tensor& a, const Tensor& b, std::uint64_t seed);

// Trains the recurrent autoencoder on [n, weeks, types] features with
// minibatch Adam on the reconstruction error. Throws std::runtime_error
// carrying the epoch index if the loss turns non-finite.
AutoencoderModel train_autoencoder(const Tensor& features, const TrainConfig& config,
                                   std::size_t bottleneck_per_unit = 8,
                                   std::size_t decoder_cells = 6);

EmbeddingSet encode(const AutoencoderModel& model, const Tensor& features);

// Per-unit linear autoencoder. The projection is the encoder weight matrix,
// an n_components x types linear map of the raw features.
struct NnPcaModel {
    AutoencoderModel model;
    linalg::Matrix projection;
};
NnPcaModel fit_nn_pca(const Tensor& features, std::size_t n_components,
                      const TrainConfig& config);

// The per-unit linear map of an encoder whose first layer is a kernel-1
// convolution (the linear autoencoder); throws otherwise.
linalg::Matrix linear_encoder_projection(const AutoencoderModel& model);

// Shared minibatch reconstruction loop; returns the per-epoch loss trace.
std::vector<double> train_reconstruction(nn::Network& encoder, nn::Network& decoder,
                                         const Tensor& features, const TrainConfig& config);

}  // namespace moocxfer::repr
