#include "moocxfer/tpca.hpp"

#include <stdexcept>

namespace moocxfer::repr {

EmbeddingSet tpca_apply(const TpcaModel& model, const EmbeddingSet& embedding) {
    if (embedding.dims_per_unit != model.per_unit.dim())
        throw std::invalid_argument("tpca_apply: embedding dims do not match the fitted model");
    EmbeddingSet out;
    out.units = embedding.units;
    out.dims_per_unit = model.n_out_per_unit;
    out.values = Tensor({embedding.size(), out.units, out.dims_per_unit});

    const auto rows = embedding.rows_per_unit();
    const auto projected = pca_transform(model.per_unit, rows);
    for (std::size_t r = 0; r < projected.size(); ++r)
        for (std::size_t c = 0; c < out.dims_per_unit; ++c)
            out.values.values[r * out.dims_per_unit + c] = projected[r][c];
    return out;
}

TpcaResult fit_tpca_and_align(const EmbeddingSet& target, const EmbeddingSet& source,
                              std::size_t n_out_per_unit) {
    if (target.dims_per_unit != source.dims_per_unit || target.units != source.units)
        throw std::invalid_argument("fit_tpca_and_align: embeddings do not share a layout");
    if (n_out_per_unit >= target.dims_per_unit)
        throw std::invalid_argument(
            "fit_tpca_and_align: output dims must be below the bottleneck size");
    if (n_out_per_unit * target.units < 2)
        throw std::invalid_argument(
            "fit_tpca_and_align: total output count must exceed the predicted label count");
    if (target.size() < 2)
        throw std::invalid_argument("fit_tpca_and_align: need at least 2 target rows");

    const auto target_rows = target.rows_per_unit();
    const linalg::Matrix cov = linalg::covariance(target_rows);
    const auto eig = linalg::symmetric_eigen(cov);
    const double scale = std::max(1.0, eig.values.empty() ? 0.0 : eig.values.front());
    std::size_t rank = 0;
    for (double v : eig.values)
        if (v > 1e-10 * scale) ++rank;
    if (rank < n_out_per_unit)
        throw std::invalid_argument("fit_tpca_and_align: target embedding rank " +
                                    std::to_string(rank) + " is below the requested " +
                                    std::to_string(n_out_per_unit) + " output dims");

    TpcaResult result;
    result.model.n_out_per_unit = n_out_per_unit;
    result.model.per_unit = fit_pca(target_rows, n_out_per_unit);
    result.target = tpca_apply(result.model, target);
    result.source = tpca_apply(result.model, source);
    return result;
}

}  // namespace moocxfer::repr
