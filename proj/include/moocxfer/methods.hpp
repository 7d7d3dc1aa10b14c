#pragma once

// The transfer methods and baselines. Transfer trainers receive the target
// course only through FeatureSlice, which carries no labels; the label-truth
// baseline and the in-situ proxy labeling are the deliberate exceptions.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "moocxfer/autoencoder.hpp"
#include "moocxfer/dataset.hpp"
#include "moocxfer/kmm.hpp"
#include "moocxfer/network.hpp"
#include "moocxfer/tpca.hpp"

namespace moocxfer::transfer {

enum class Method {
    Passive,
    Active,
    Naive,
    InSitu,
    Instance,
    NoTransfer,
    NoTransferAe,
};

std::string method_name(Method m);
Method method_from_name(const std::string& name);
const std::vector<Method>& all_methods();

struct MethodConfig {
    repr::TrainConfig autoencoder;  // lr 0.001, batch 128, epochs 100
    repr::TrainConfig predictor;    // lr 0.001, batch 128, epochs 100
    std::size_t bottleneck_per_unit = 8;
    std::size_t decoder_cells = 6;
    std::size_t tpca_out_per_unit = 6;
    double lambda_pred = 0.008;
    double lambda_recon = 1.0;
    double lambda_coral = 1000.0;
    KmmConfig kmm;
    double train_fraction = 0.8;  // the 4:1 split of the label-truth baseline
    int insitu_window = 0;        // 0 = maximal window k-2
    bool linear_autoencoder = false;  // swap the recurrent encoder for the
                                      // per-unit linear map (embedding analysis)
    std::uint64_t seed = 1;
};

struct WeeklyPredictor {
    Method method = Method::Naive;
    int week = 0;
    std::size_t input_weeks = 0;  // history length of the week slice (k-1)
    std::size_t event_types = 0;
    std::size_t window = 0;  // in-situ: use only the last `window` weeks

    std::optional<repr::AutoencoderModel> autoencoder;
    std::optional<repr::TpcaModel> tpca;
    nn::Network head;  // outputs one probability per student

    bool constant_fallback = false;  // week-2 in-situ has nothing to train on
    double constant_value = 0.0;

    std::vector<double> predict(const Tensor& features) const;
};

// probabilities in [0,1], one per row of [n, k-1, types]
std::vector<double> predict(const WeeklyPredictor& predictor, const Tensor& features);

// Source-only recurrent predictor applied unchanged to the target.
WeeklyPredictor train_naive(const data::WeekSlice& source, const MethodConfig& config);

// KMM-weighted source training against the unlabeled target features.
WeeklyPredictor train_instance(const data::WeekSlice& source, const data::FeatureSlice& target,
                               const MethodConfig& config);

// Autoencoder on the balanced union, PCA fit on the target embedding applied
// to the source embedding, convolutional head trained on the aligned source.
WeeklyPredictor train_passive(const data::WeekSlice& source, const data::FeatureSlice& target,
                              const MethodConfig& config);

// Joint optimization: weighted source prediction loss through the encoder +
// head, target reconstruction loss through the decoder, and the correlation
// alignment loss between the half-batch embeddings.
WeeklyPredictor train_active(const data::WeekSlice& source, const data::FeatureSlice& target,
                             const MethodConfig& config);

// Sliding-window self-transfer inside the target course using the previous
// week's observed dropout as proxy label. Week 2 has no trainable window and
// falls back to a flagged constant predictor.
WeeklyPredictor train_in_situ(const data::Cohort& target, int week, const MethodConfig& config);

struct NoTransferOutcome {
    WeeklyPredictor predictor;
    std::vector<std::size_t> holdout_rows;  // indices into the slice
};

// Label-truth baseline: 4:1 train/test split on the target slice; reported
// numbers come from the held-out fifth.
NoTransferOutcome train_no_transfer(const data::WeekSlice& target, bool use_autoencoder,
                                    const MethodConfig& config);

// Per-epoch weighted BCE trace for a probability-output classifier.
std::vector<double> train_classifier(nn::Network& net, const Tensor& features,
                                     const std::vector<int>& labels,
                                     const repr::TrainConfig& config,
                                     const std::vector<double>* sample_weights = nullptr);

}  // namespace moocxfer::transfer
