#include "moocxfer/bundle.hpp"

#include <fstream>
#include <stdexcept>

#include "json.hpp"

namespace moocxfer::transfer {

namespace {

using nlohmann::json;

json layer_to_json(const nn::LayerSpec& spec) {
    json j;
    j["kind"] = nn::layer_kind_name(spec.kind);
    switch (spec.kind) {
        case nn::LayerKind::Dense: j["units"] = spec.units; break;
        case nn::LayerKind::Conv1D:
            j["units"] = spec.units;
            j["kernel"] = spec.kernel;
            break;
        case nn::LayerKind::Lstm:
        case nn::LayerKind::BiLstm: j["units"] = spec.units; break;
        case nn::LayerKind::LeakyReLU: j["alpha"] = spec.alpha; break;
        case nn::LayerKind::Reshape: j["shape"] = spec.target_shape; break;
        default: break;
    }
    return j;
}

nn::LayerSpec layer_from_json(const json& j) {
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "dense") return nn::LayerSpec::dense(j.at("units").get<int>());
    if (kind == "conv1d")
        return nn::LayerSpec::conv1d(j.at("units").get<int>(), j.at("kernel").get<int>());
    if (kind == "lstm") return nn::LayerSpec::lstm(j.at("units").get<int>());
    if (kind == "bilstm") return nn::LayerSpec::bilstm(j.at("units").get<int>());
    if (kind == "sigmoid") return nn::LayerSpec::sigmoid();
    if (kind == "relu") return nn::LayerSpec::relu();
    if (kind == "leaky_relu") return nn::LayerSpec::leaky_relu(j.at("alpha").get<double>());
    if (kind == "flatten") return nn::LayerSpec::flatten();
    if (kind == "reshape") return nn::LayerSpec::reshape(j.at("shape").get<Shape>());
    throw std::runtime_error("bundle: unknown layer kind '" + kind + "'");
}

json network_to_json(const nn::Network& net) {
    json j;
    j["input_shape"] = net.input_shape();
    json layers = json::array();
    for (const auto& lay : net.layers()) layers.push_back(layer_to_json(lay.spec));
    j["layers"] = layers;
    j["params"] = net.params();
    return j;
}

nn::Network network_from_json(const json& j) {
    std::vector<nn::LayerSpec> specs;
    for (const auto& lj : j.at("layers")) specs.push_back(layer_from_json(lj));
    nn::Network net = nn::Network::build(specs, j.at("input_shape").get<Shape>(), 0);
    const auto params = j.at("params").get<std::vector<double>>();
    if (params.size() != net.param_count())
        throw std::runtime_error("bundle: parameter count mismatch");
    net.params() = params;
    return net;
}

}  // namespace

void save_predictor(const WeeklyPredictor& predictor, const std::string& path) {
    json j;
    j["version"] = kBundleVersion;
    j["method"] = method_name(predictor.method);
    j["week"] = predictor.week;
    j["input_weeks"] = predictor.input_weeks;
    j["event_types"] = predictor.event_types;
    j["window"] = predictor.window;
    j["constant_fallback"] = predictor.constant_fallback;
    j["constant_value"] = predictor.constant_value;
    if (!predictor.constant_fallback) j["head"] = network_to_json(predictor.head);
    if (predictor.autoencoder) {
        json ae;
        ae["encoder"] = network_to_json(predictor.autoencoder->encoder);
        ae["decoder"] = network_to_json(predictor.autoencoder->decoder);
        ae["units"] = predictor.autoencoder->units;
        ae["bottleneck_per_unit"] = predictor.autoencoder->bottleneck_per_unit;
        j["autoencoder"] = ae;
    }
    if (predictor.tpca) {
        json t;
        t["n_out_per_unit"] = predictor.tpca->n_out_per_unit;
        t["mean"] = predictor.tpca->per_unit.mean;
        t["components"] = predictor.tpca->per_unit.components;
        t["explained_variance"] = predictor.tpca->per_unit.explained_variance;
        j["tpca"] = t;
    }
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path);
    out << j.dump(2) << "\n";
}

WeeklyPredictor load_predictor(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    json j;
    in >> j;
    if (j.at("version").get<int>() != kBundleVersion)
        throw std::runtime_error("bundle: unsupported version " +
                                 std::to_string(j.at("version").get<int>()));

    WeeklyPredictor p;
    p.method = method_from_name(j.at("method").get<std::string>());
    p.week = j.at("week").get<int>();
    p.input_weeks = j.at("input_weeks").get<std::size_t>();
    p.event_types = j.at("event_types").get<std::size_t>();
    p.window = j.at("window").get<std::size_t>();
    p.constant_fallback = j.at("constant_fallback").get<bool>();
    p.constant_value = j.at("constant_value").get<double>();
    if (!p.constant_fallback) p.head = network_from_json(j.at("head"));
    if (j.contains("autoencoder")) {
        repr::AutoencoderModel ae;
        ae.encoder = network_from_json(j.at("autoencoder").at("encoder"));
        ae.decoder = network_from_json(j.at("autoencoder").at("decoder"));
        ae.units = j.at("autoencoder").at("units").get<std::size_t>();
        ae.bottleneck_per_unit = j.at("autoencoder").at("bottleneck_per_unit").get<std::size_t>();
        p.autoencoder = std::move(ae);
    }
    if (j.contains("tpca")) {
        repr::TpcaModel t;
        t.n_out_per_unit = j.at("tpca").at("n_out_per_unit").get<std::size_t>();
        t.per_unit.mean = j.at("tpca").at("mean").get<std::vector<double>>();
        t.per_unit.components = j.at("tpca").at("components").get<linalg::Matrix>();
        t.per_unit.explained_variance =
            j.at("tpca").at("explained_variance").get<std::vector<double>>();
        p.tpca = std::move(t);
    }
    return p;
}

}  // namespace moocxfer::transfer
