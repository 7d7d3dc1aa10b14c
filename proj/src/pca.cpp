#include "moocxfer/pca.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>

#include "json.hpp"

namespace moocxfer::repr {

PcaModel fit_pca(const std::vector<std::vector<double>>& data, std::size_t n_components) {
    const std::size_t n = data.size();
    if (n < 2) throw std::invalid_argument("fit_pca: need at least 2 rows");
    const std::size_t d = data[0].size();
    if (n_components < 1 || n_components > std::min(n, d))
        throw std::invalid_argument("fit_pca: n_components " + std::to_string(n_components) +
                                    " outside [1, min(n, dim)] = [1, " +
                                    std::to_string(std::min(n, d)) + "]");

    const linalg::Matrix cov = linalg::covariance(data);
    const auto eig = linalg::symmetric_eigen(cov);

    PcaModel model;
    model.mean.assign(d, 0.0);
    for (const auto& row : data)
        for (std::size_t j = 0; j < d; ++j) model.mean[j] += row[j];
    for (double& v : model.mean) v /= static_cast<double>(n);

    model.components.reserve(n_components);
    for (std::size_t c = 0; c < n_components; ++c) {
        std::vector<double> comp = eig.vectors[c];
        // sign convention: largest-magnitude coordinate positive
        std::size_t arg = 0;
        for (std::size_t j = 1; j < d; ++j)
            if (std::abs(comp[j]) > std::abs(comp[arg])) arg = j;
        if (comp[arg] < 0.0)
            for (double& v : comp) v = -v;
        model.components.push_back(std::move(comp));
        model.explained_variance.push_back(std::max(0.0, eig.values[c]));
    }
    return model;
}

std::vector<std::vector<double>> pca_transform(const PcaModel& model,
                                               const std::vector<std::vector<double>>& data) {
    const std::size_t d = model.dim();
    std::vector<std::vector<double>> out;
    out.reserve(data.size());
    for (const auto& row : data) {
        if (row.size() != d)
            throw std::invalid_argument("pca_transform: row dimension " +
                                        std::to_string(row.size()) + " does not match model " +
                                        std::to_string(d));
        std::vector<double> proj(model.n_components(), 0.0);
        for (std::size_t c = 0; c < model.n_components(); ++c) {
            double acc = 0.0;
            for (std::size_t j = 0; j < d; ++j)
                acc += (row[j] - model.mean[j]) * model.components[c][j];
            proj[c] = acc;
        }
        out.push_back(std::move(proj));
    }
    return out;
}

void PcaModel::save_json(const std::string& path) const {
    nlohmann::json j;
    j["mean"] = mean;
    j["components"] = components;
    j["explained_variance"] = explained_variance;
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path);
    out << j.dump(2) << "\n";
}

PcaModel PcaModel::load_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    nlohmann::json j;
    in >> j;
    PcaModel m;
    m.mean = j.at("mean").get<std::vector<double>>();
    m.components = j.at("components").get<linalg::Matrix>();
    m.explained_variance = j.at("explained_variance").get<std::vector<double>>();
    return m;
}

}  // namespace moocxfer::repr
