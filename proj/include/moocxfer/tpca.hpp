#pragma once

// Transductive PCA: fit a PCA on the target embedding only (pooled across
// time units), then apply the same per-unit transform to the source
// embedding. Directions that carry no target variance disappear from both.

#include "moocxfer/autoencoder.hpp"
#include "moocxfer/pca.hpp"

namespace moocxfer::repr {

struct TpcaModel {
    PcaModel per_unit;  // fit on target per-unit vectors
    std::size_t n_out_per_unit = 6;
};

struct TpcaResult {
    TpcaModel model;
    EmbeddingSet source;
    EmbeddingSet target;
};

// Throws when n_out_per_unit >= bottleneck dims, when the total output count
// would not exceed the single predicted label, or when the target embedding's
// rank is below n_out_per_unit (the message carries the measured rank).
TpcaResult fit_tpca_and_align(const EmbeddingSet& target, const EmbeddingSet& source,
                              std::size_t n_out_per_unit = 6);

EmbeddingSet tpca_apply(const TpcaModel& model, const EmbeddingSet& embedding);

}  // namespace moocxfer::repr
