#include "moocxfer/experiment.hpp"

#include <atomic>
#include <filesystem>
#include <fstream>
#include <set>
#include <stdexcept>
#include <thread>

#include "moocxfer/bundle.hpp"
#include "moocxfer/csv.hpp"
#include "moocxfer/pad.hpp"
#include "moocxfer/report.hpp"
#include "moocxfer/rng.hpp"

namespace moocxfer::experiment {

namespace {

using nlohmann::json;

void reject_unknown_keys(const json& j, const std::set<std::string>& known,
                         const std::string& where) {
    for (const auto& [key, value] : j.items()) {
        if (!known.count(key))
            throw std::invalid_argument("config: unknown key '" + key + "' in " + where);
    }
}

std::vector<transfer::Method> parse_methods(const json& j) {
    std::vector<transfer::Method> methods;
    for (const auto& m : j) methods.push_back(transfer::method_from_name(m.get<std::string>()));
    if (methods.empty()) throw std::invalid_argument("config: empty method list");
    return methods;
}

data::EventVocabulary vocabulary_from_json(const json& j) {
    data::EventVocabulary v;
    for (const auto& entry : j) {
        std::string name = entry.get<std::string>();
        const bool video = !name.empty() && name[0] == '*';
        v.names.push_back(video ? name.substr(1) : name);
        v.video_event_flags.push_back(video);
    }
    v.validate();
    return v;
}

json vocabulary_to_json(const data::EventVocabulary& v) {
    json out = json::array();
    for (std::size_t i = 0; i < v.names.size(); ++i)
        out.push_back((v.video_event_flags[i] ? "*" : "") + v.names[i]);
    return out;
}

}  // namespace

synth::GeneratorConfig generator_from_json(const json& j) {
    reject_unknown_keys(
        j,
        {"n_students", "weeks", "seed", "course_id", "offering_id", "vocabulary", "event_mean",
         "event_decay", "correlation", "dropout_hazard", "engagement_sigma", "week_noise_sigma",
         "hazard_coupling", "post_dropout_activity", "frequency_scale",
         "correlation_perturbation", "mixture"},
        "synth generator");
    const int n = j.value("n_students", 100);
    const std::uint64_t seed = j.value("seed", 1ULL);
    synth::GeneratorConfig g = synth::GeneratorConfig::defaults(n, seed);
    if (j.contains("weeks")) {
        g.weeks = j.at("weeks").get<int>();
        // re-derive the default hazards for the new horizon
        synth::GeneratorConfig base = synth::GeneratorConfig::defaults(n, seed);
        g.dropout_hazard.assign(static_cast<std::size_t>(g.weeks) + 1, 0.0);
        for (int k = 2; k <= g.weeks; ++k)
            g.dropout_hazard[static_cast<std::size_t>(k)] =
                base.dropout_hazard[std::min<std::size_t>(static_cast<std::size_t>(k),
                                                          base.dropout_hazard.size() - 1)];
    }
    if (j.contains("course_id")) g.course_id = j.at("course_id").get<std::string>();
    if (j.contains("offering_id")) g.offering_id = j.at("offering_id").get<std::string>();
    if (j.contains("vocabulary")) {
        g.vocabulary = vocabulary_from_json(j.at("vocabulary"));
        const std::size_t types = g.vocabulary.size();
        // per-type defaults must be resized alongside a custom vocabulary
        if (!j.contains("event_mean")) g.event_mean.assign(types, 5.0);
        if (!j.contains("event_decay")) g.event_decay.assign(types, 0.94);
        if (!j.contains("correlation")) {
            g.correlation.assign(types, std::vector<double>(types, 0.2));
            for (std::size_t i = 0; i < types; ++i) g.correlation[i][i] = 1.0;
        }
    }
    if (j.contains("event_mean")) g.event_mean = j.at("event_mean").get<std::vector<double>>();
    if (j.contains("event_decay")) g.event_decay = j.at("event_decay").get<std::vector<double>>();
    if (j.contains("correlation")) g.correlation = j.at("correlation").get<linalg::Matrix>();
    if (j.contains("dropout_hazard"))
        g.dropout_hazard = j.at("dropout_hazard").get<std::vector<double>>();
    g.engagement_sigma = j.value("engagement_sigma", g.engagement_sigma);
    g.week_noise_sigma = j.value("week_noise_sigma", g.week_noise_sigma);
    g.hazard_coupling = j.value("hazard_coupling", g.hazard_coupling);
    g.post_dropout_activity = j.value("post_dropout_activity", g.post_dropout_activity);
    if (j.contains("frequency_scale"))
        g.shift.frequency_scale = j.at("frequency_scale").get<std::vector<double>>();
    g.shift.correlation_perturbation =
        j.value("correlation_perturbation", g.shift.correlation_perturbation);
    if (j.contains("mixture")) {
        for (const auto& mj : j.at("mixture")) {
            reject_unknown_keys(mj, {"weight", "engagement_scale", "hazard_scale", "label"},
                                "mixture component");
            synth::MixtureComponent mc;
            mc.weight = mj.value("weight", 1.0);
            mc.engagement_scale = mj.value("engagement_scale", 1.0);
            mc.hazard_scale = mj.value("hazard_scale", 1.0);
            mc.label = mj.value("label", std::string{});
            g.mixture.push_back(std::move(mc));
        }
    }
    g.validate();
    return g;
}

json generator_to_json(const synth::GeneratorConfig& g) {
    json j;
    j["n_students"] = g.n_students;
    j["weeks"] = g.weeks;
    j["seed"] = g.seed;
    j["course_id"] = g.course_id;
    j["offering_id"] = g.offering_id;
    j["vocabulary"] = vocabulary_to_json(g.vocabulary);
    j["event_mean"] = g.event_mean;
    j["event_decay"] = g.event_decay;
    j["correlation"] = g.correlation;
    j["dropout_hazard"] = g.dropout_hazard;
    j["engagement_sigma"] = g.engagement_sigma;
    j["week_noise_sigma"] = g.week_noise_sigma;
    j["hazard_coupling"] = g.hazard_coupling;
    j["post_dropout_activity"] = g.post_dropout_activity;
    if (!g.shift.frequency_scale.empty()) j["frequency_scale"] = g.shift.frequency_scale;
    j["correlation_perturbation"] = g.shift.correlation_perturbation;
    if (!g.mixture.empty()) {
        json mixture = json::array();
        for (const auto& mc : g.mixture)
            mixture.push_back({{"weight", mc.weight},
                               {"engagement_scale", mc.engagement_scale},
                               {"hazard_scale", mc.hazard_scale},
                               {"label", mc.label}});
        j["mixture"] = mixture;
    }
    return j;
}

ExperimentConfig ExperimentConfig::from_json(const json& j) {
    reject_unknown_keys(j,
                        {"seed", "seeds", "weeks", "methods", "datasets", "pairs",
                         "hyperparameters", "pad_mode", "group_attribute", "at_risk_filter",
                         "save_predictors"},
                        "experiment");
    ExperimentConfig c;
    c.seed = j.value("seed", 1ULL);
    if (j.contains("seeds")) c.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
    if (c.seeds.empty()) c.seeds = {c.seed};
    if (j.contains("weeks")) {
        const json& w = j.at("weeks");
        c.weeks.clear();
        if (w.is_object()) {
            reject_unknown_keys(w, {"from", "to"}, "weeks");
            for (int k = w.at("from").get<int>(); k <= w.at("to").get<int>(); ++k)
                c.weeks.push_back(k);
        } else {
            c.weeks = w.get<std::vector<int>>();
        }
    }
    if (c.weeks.empty()) throw std::invalid_argument("config: empty week list");
    if (j.contains("methods")) c.methods = parse_methods(j.at("methods"));

    if (!j.contains("datasets") || j.at("datasets").empty())
        throw std::invalid_argument("config: at least one dataset is required");
    for (const auto& dj : j.at("datasets")) {
        reject_unknown_keys(dj,
                            {"name", "synth", "weekly_counts", "vocabulary", "demographics",
                             "course_id", "offering_id", "weeks"},
                            "dataset");
        DatasetSpec spec;
        spec.name = dj.at("name").get<std::string>();
        if (dj.contains("synth")) {
            spec.is_synth = true;
            spec.generator = generator_from_json(dj.at("synth"));
            spec.generator.course_id = dj.value("course_id", spec.generator.course_id);
            spec.generator.offering_id = dj.value("offering_id", spec.name);
            spec.weeks = spec.generator.weeks;
        } else {
            if (!dj.contains("weekly_counts"))
                throw std::invalid_argument("config: dataset '" + spec.name +
                                            "' needs synth or weekly_counts");
            spec.weekly_counts_path = dj.at("weekly_counts").get<std::string>();
            spec.vocabulary_path = dj.value("vocabulary", std::string{});
            spec.demographics_path = dj.value("demographics", std::string{});
            spec.course_id = dj.value("course_id", std::string("course"));
            spec.offering_id = dj.value("offering_id", spec.name);
            spec.weeks = dj.value("weeks", 9);
        }
        c.datasets.push_back(std::move(spec));
    }
    std::set<std::string> names;
    for (const auto& d : c.datasets)
        if (!names.insert(d.name).second)
            throw std::invalid_argument("config: duplicate dataset name '" + d.name + "'");

    if (j.contains("pairs")) {
        for (const auto& pj : j.at("pairs")) {
            if (!pj.is_array() || pj.size() != 2)
                throw std::invalid_argument("config: each pair must be [source, target]");
            c.pairs.emplace_back(pj[0].get<std::string>(), pj[1].get<std::string>());
        }
    }
    if (c.pairs.empty()) {
        for (const auto& a : c.datasets)
            for (const auto& b : c.datasets)
                if (a.name != b.name) c.pairs.emplace_back(a.name, b.name);
    }
    for (const auto& [src, tgt] : c.pairs) {
        if (!names.count(src) || !names.count(tgt))
            throw std::invalid_argument("config: pair references unknown dataset '" +
                                        (names.count(src) ? tgt : src) + "'");
        if (src == tgt)
            throw std::invalid_argument("config: pair source equals target '" + src + "'");
    }

    if (j.contains("hyperparameters")) {
        const json& h = j.at("hyperparameters");
        reject_unknown_keys(h,
                            {"learning_rate", "batch_size", "epochs", "ae_epochs",
                             "ae_learning_rate", "ae_batch_size", "bottleneck", "tpca_out",
                             "decoder_cells", "lambda_pred", "lambda_recon", "lambda_coral",
                             "kmm_bound", "kmm_mean_tolerance", "kmm_sigma", "kmm_max_iters",
                             "train_fraction", "insitu_window", "linear_autoencoder"},
                            "hyperparameters");
        auto& hp = c.hyper;
        hp.predictor.learning_rate = h.value("learning_rate", hp.predictor.learning_rate);
        hp.predictor.batch_size = h.value("batch_size", hp.predictor.batch_size);
        hp.predictor.epochs = h.value("epochs", hp.predictor.epochs);
        hp.autoencoder.learning_rate =
            h.value("ae_learning_rate", h.value("learning_rate", hp.autoencoder.learning_rate));
        hp.autoencoder.batch_size =
            h.value("ae_batch_size", h.value("batch_size", hp.autoencoder.batch_size));
        hp.autoencoder.epochs = h.value("ae_epochs", h.value("epochs", hp.autoencoder.epochs));
        hp.bottleneck_per_unit = h.value("bottleneck", hp.bottleneck_per_unit);
        hp.tpca_out_per_unit = h.value("tpca_out", hp.tpca_out_per_unit);
        hp.decoder_cells = h.value("decoder_cells", hp.decoder_cells);
        hp.lambda_pred = h.value("lambda_pred", hp.lambda_pred);
        hp.lambda_recon = h.value("lambda_recon", hp.lambda_recon);
        hp.lambda_coral = h.value("lambda_coral", hp.lambda_coral);
        hp.kmm.bound = h.value("kmm_bound", hp.kmm.bound);
        hp.kmm.mean_tolerance = h.value("kmm_mean_tolerance", hp.kmm.mean_tolerance);
        hp.kmm.sigma = h.value("kmm_sigma", hp.kmm.sigma);
        hp.kmm.max_iters = h.value("kmm_max_iters", hp.kmm.max_iters);
        hp.train_fraction = h.value("train_fraction", hp.train_fraction);
        hp.insitu_window = h.value("insitu_window", hp.insitu_window);
        hp.linear_autoencoder = h.value("linear_autoencoder", hp.linear_autoencoder);
    }
    c.pad_mode = j.value("pad_mode", c.pad_mode);
    if (c.pad_mode != "pooled" && c.pad_mode != "per-slice")
        throw std::invalid_argument("config: pad_mode must be 'pooled' or 'per-slice'");
    c.group_attribute = j.value("group_attribute", c.group_attribute);
    c.at_risk_filter = j.value("at_risk_filter", c.at_risk_filter);
    c.save_predictors = j.value("save_predictors", c.save_predictors);
    return c;
}

ExperimentConfig ExperimentConfig::from_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    json j;
    try {
        in >> j;
    } catch (const json::parse_error& e) {
        throw std::runtime_error(path + ": " + e.what());
    }
    return from_json(j);
}

json ExperimentConfig::to_json() const {
    json j;
    j["seed"] = seed;
    j["seeds"] = seeds;
    j["weeks"] = weeks;
    json methods_json = json::array();
    for (transfer::Method m : methods) methods_json.push_back(transfer::method_name(m));
    j["methods"] = methods_json;
    json datasets_json = json::array();
    for (const auto& d : datasets) {
        json dj;
        dj["name"] = d.name;
        if (d.is_synth) {
            dj["synth"] = generator_to_json(d.generator);
        } else {
            dj["weekly_counts"] = d.weekly_counts_path;
            if (!d.vocabulary_path.empty()) dj["vocabulary"] = d.vocabulary_path;
            if (!d.demographics_path.empty()) dj["demographics"] = d.demographics_path;
            dj["course_id"] = d.course_id;
            dj["offering_id"] = d.offering_id;
            dj["weeks"] = d.weeks;
        }
        datasets_json.push_back(std::move(dj));
    }
    j["datasets"] = datasets_json;
    json pairs_json = json::array();
    for (const auto& [s, t] : pairs) pairs_json.push_back(json::array({s, t}));
    j["pairs"] = pairs_json;
    j["hyperparameters"] = {
        {"learning_rate", hyper.predictor.learning_rate},
        {"batch_size", hyper.predictor.batch_size},
        {"epochs", hyper.predictor.epochs},
        {"ae_learning_rate", hyper.autoencoder.learning_rate},
        {"ae_batch_size", hyper.autoencoder.batch_size},
        {"ae_epochs", hyper.autoencoder.epochs},
        {"bottleneck", hyper.bottleneck_per_unit},
        {"tpca_out", hyper.tpca_out_per_unit},
        {"decoder_cells", hyper.decoder_cells},
        {"lambda_pred", hyper.lambda_pred},
        {"lambda_recon", hyper.lambda_recon},
        {"lambda_coral", hyper.lambda_coral},
        {"kmm_bound", hyper.kmm.bound},
        {"kmm_mean_tolerance", hyper.kmm.mean_tolerance},
        {"kmm_sigma", hyper.kmm.sigma},
        {"kmm_max_iters", hyper.kmm.max_iters},
        {"train_fraction", hyper.train_fraction},
        {"insitu_window", hyper.insitu_window},
        {"linear_autoencoder", hyper.linear_autoencoder},
    };
    j["pad_mode"] = pad_mode;
    if (!group_attribute.empty()) j["group_attribute"] = group_attribute;
    j["at_risk_filter"] = at_risk_filter;
    j["save_predictors"] = save_predictors;
    return j;
}

data::Cohort materialize(const DatasetSpec& spec, std::uint64_t rep_seed) {
    if (spec.is_synth) {
        synth::GeneratorConfig g = spec.generator;
        g.seed = mix_seed(g.seed, rep_seed);
        return synth::generate_cohort(g).cohort;
    }
    data::EventVocabulary vocab = spec.vocabulary_path.empty()
                                      ? data::EventVocabulary::defaults()
                                      : data::EventVocabulary::load(spec.vocabulary_path);
    const auto events = data::ingest_events(spec.weekly_counts_path,
                                            data::IngestFormat::WeeklyCounts, vocab, "",
                                            spec.weeks);
    data::Cohort cohort =
        data::build_cohort(spec.course_id, spec.offering_id, vocab, spec.weeks,
                           data::aggregate_weekly(events, vocab, spec.weeks));
    if (!spec.demographics_path.empty()) {
        std::string attribute;
        const auto demo = data::load_demographics_csv(spec.demographics_path, &attribute);
        data::attach_demographics(cohort, attribute, demo);
    }
    return cohort;
}

namespace {

bool is_target_only(transfer::Method m) {
    return m == transfer::Method::InSitu || m == transfer::Method::NoTransfer ||
           m == transfer::Method::NoTransferAe;
}

std::uint64_t cell_seed(std::uint64_t rep_seed, const std::string& source,
                        const std::string& target, int week, transfer::Method method) {
    const std::string key = (is_target_only(method) ? "" : source + "|") + target + "|" +
                            std::to_string(week) + "|" + transfer::method_name(method);
    return mix_seed(rep_seed, hash_string(key));
}

struct EvaluatedCell {
    double auc = 0.0;
    transfer::WeeklyPredictor predictor;
};

EvaluatedCell evaluate_cell(const data::Cohort& source, const data::Cohort& target, int week,
                            transfer::Method method, std::uint64_t rep_seed,
                            const ExperimentConfig& config) {
    transfer::MethodConfig hyper = config.hyper;
    hyper.seed = cell_seed(rep_seed, source.name(), target.name(), week, method);
    hyper.predictor.seed = mix_seed(hyper.seed, 1);
    hyper.autoencoder.seed = mix_seed(hyper.seed, 2);

    const data::WeekSlice target_slice = data::slice_for_week(target, week, config.at_risk_filter);

    EvaluatedCell cell;
    switch (method) {
        case transfer::Method::NoTransfer:
        case transfer::Method::NoTransferAe: {
            const bool use_ae = method == transfer::Method::NoTransferAe;
            transfer::NoTransferOutcome outcome =
                transfer::train_no_transfer(target_slice, use_ae, hyper);
            const Tensor holdout = target_slice.features.gather_rows(outcome.holdout_rows);
            std::vector<int> labels;
            for (std::size_t r : outcome.holdout_rows) labels.push_back(target_slice.labels[r]);
            cell.auc = eval::auc(outcome.predictor.predict(holdout), labels);
            cell.predictor = std::move(outcome.predictor);
            return cell;
        }
        case transfer::Method::InSitu: {
            cell.predictor = transfer::train_in_situ(target, week, hyper);
            break;
        }
        default: {
            const data::WeekSlice source_slice =
                data::slice_for_week(source, week, config.at_risk_filter);
            const data::FeatureSlice target_features = data::strip_labels(target_slice);
            switch (method) {
                case transfer::Method::Naive:
                    cell.predictor = transfer::train_naive(source_slice, hyper);
                    break;
                case transfer::Method::Instance:
                    cell.predictor = transfer::train_instance(source_slice, target_features, hyper);
                    break;
                case transfer::Method::Passive:
                    cell.predictor = transfer::train_passive(source_slice, target_features, hyper);
                    break;
                case transfer::Method::Active:
                    cell.predictor = transfer::train_active(source_slice, target_features, hyper);
                    break;
                default: throw std::logic_error("unhandled method");
            }
            break;
        }
    }
    cell.auc = eval::auc(cell.predictor.predict(target_slice.features), target_slice.labels);
    return cell;
}

struct PadCell {
    double pad = 0.0;
    double size_ratio = 0.0;
};

PadCell compute_pad(const data::Cohort& source, const data::Cohort& target, int week,
                    std::uint64_t rep_seed, const ExperimentConfig& config) {
    PadCell out;
    const data::WeekSlice s = data::slice_for_week(source, week, config.at_risk_filter);
    const data::WeekSlice t = data::slice_for_week(target, week, config.at_risk_filter);
    out.size_ratio = static_cast<double>(t.features.dim(0)) /
                     static_cast<double>(std::max<std::size_t>(1, s.features.dim(0)));
    eval::PadConfig pad_cfg;
    pad_cfg.seed = mix_seed(rep_seed, hash_string(source.name() + "|" + target.name() + "|" +
                                                  std::to_string(week) + "|pad"));
    if (config.pad_mode == "per-slice") {
        out.pad = eval::proxy_a_distance_per_slice(source, target, pad_cfg).pad;
    } else {
        const Tensor sf = s.features.reshaped({s.features.dim(0), s.features.sample_size()});
        const Tensor tf = t.features.reshaped({t.features.dim(0), t.features.sample_size()});
        out.pad = eval::proxy_a_distance(sf, tf, pad_cfg).pad;
    }
    return out;
}

void evaluate_groups(const data::Cohort& source, const data::Cohort& target, int week,
                     transfer::Method method, std::uint64_t rep_seed,
                     const ExperimentConfig& config, const transfer::WeeklyPredictor& whole,
                     std::vector<GroupResult>& out) {
    std::set<std::string> groups;
    for (const auto& v : target.demographic_values)
        if (!v.empty()) groups.insert(v);

    for (const std::string& group : groups) {
        const data::Cohort members = data::filter_group(target, group);
        const data::WeekSlice slice = data::slice_for_week(members, week, config.at_risk_filter);
        bool has_both = false;
        {
            bool pos = false, neg = false;
            for (int y : slice.labels) (y ? pos : neg) = true;
            has_both = pos && neg;
        }
        if (!has_both || slice.features.dim(0) < 10) continue;

        GroupResult whole_row{source.name(), target.name(), group, week,
                              transfer::method_name(method), "whole", rep_seed, 0.0};
        whole_row.auc = eval::auc(whole.predict(slice.features), slice.labels);
        out.push_back(std::move(whole_row));

        if (method == transfer::Method::Passive || method == transfer::Method::Active) {
            transfer::MethodConfig hyper = config.hyper;
            hyper.seed = mix_seed(cell_seed(rep_seed, source.name(), target.name(), week, method),
                                  hash_string(group));
            hyper.predictor.seed = mix_seed(hyper.seed, 1);
            hyper.autoencoder.seed = mix_seed(hyper.seed, 2);
            const data::WeekSlice source_slice =
                data::slice_for_week(source, week, config.at_risk_filter);
            const data::FeatureSlice group_features = data::strip_labels(slice);
            transfer::WeeklyPredictor targeted =
                method == transfer::Method::Passive
                    ? transfer::train_passive(source_slice, group_features, hyper)
                    : transfer::train_active(source_slice, group_features, hyper);
            GroupResult group_row{source.name(), target.name(), group, week,
                                  transfer::method_name(method), "group", rep_seed, 0.0};
            group_row.auc = eval::auc(targeted.predict(slice.features), slice.labels);
            out.push_back(std::move(group_row));
        }
    }
}

std::string sanitize(std::string s) {
    for (char& c : s)
        if (c == '/' || c == ' ') c = '-';
    return s;
}

}  // namespace

eval::TransferResult run_cell(const data::Cohort& source, const data::Cohort& target, int week,
                              transfer::Method method, std::uint64_t rep_seed,
                              const ExperimentConfig& config,
                              transfer::WeeklyPredictor* predictor_out) {
    EvaluatedCell cell = evaluate_cell(source, target, week, method, rep_seed, config);
    const PadCell pad = compute_pad(source, target, week, rep_seed, config);
    eval::TransferResult r;
    r.source = source.name();
    r.target = target.name();
    r.week = week;
    r.method = transfer::method_name(method);
    r.seed = rep_seed;
    r.auc = cell.auc;
    r.pad = pad.pad;
    r.size_ratio = pad.size_ratio;
    if (predictor_out) *predictor_out = std::move(cell.predictor);
    return r;
}

RunOutcome run(const ExperimentConfig& config, const std::string& out_dir, int parallel) {
    namespace fs = std::filesystem;
    fs::create_directories(out_dir);

    // validate weeks against every dataset up front; a config error must
    // abort before any training starts
    for (const auto& d : config.datasets) {
        for (int w : config.weeks) {
            if (w < 2 || w > d.weeks)
                throw std::invalid_argument("config: week " + std::to_string(w) +
                                            " outside [2, " + std::to_string(d.weeks) +
                                            "] for dataset '" + d.name + "'");
        }
    }

    struct Task {
        std::uint64_t rep_seed = 0;
        std::size_t pair_index = 0;     // index into config.pairs (pair tasks)
        std::string source, target;     // resolved names
        int week = 0;
        transfer::Method method = transfer::Method::Naive;
        bool is_pad_task = false;
        bool is_target_task = false;    // target-only method, deduplicated
    };

    // materialize cohorts per (dataset, rep)
    std::map<std::pair<std::string, std::uint64_t>, data::Cohort> cohorts;
    for (std::uint64_t rep : config.seeds)
        for (const auto& d : config.datasets) cohorts.emplace(std::make_pair(d.name, rep),
                                                              materialize(d, rep));
    auto cohort_of = [&cohorts](const std::string& name, std::uint64_t rep) -> const data::Cohort& {
        return cohorts.at({name, rep});
    };

    std::vector<Task> tasks;
    std::set<std::tuple<std::uint64_t, std::string, int, transfer::Method>> seen_target_tasks;
    for (std::uint64_t rep : config.seeds) {
        for (std::size_t pi = 0; pi < config.pairs.size(); ++pi) {
            const auto& [src, tgt] = config.pairs[pi];
            for (int week : config.weeks) {
                Task pad_task;
                pad_task.rep_seed = rep;
                pad_task.pair_index = pi;
                pad_task.source = src;
                pad_task.target = tgt;
                pad_task.week = week;
                pad_task.is_pad_task = true;
                tasks.push_back(pad_task);
                for (transfer::Method m : config.methods) {
                    Task t;
                    t.rep_seed = rep;
                    t.pair_index = pi;
                    t.source = src;
                    t.target = tgt;
                    t.week = week;
                    t.method = m;
                    if (is_target_only(m)) {
                        if (!seen_target_tasks.insert({rep, tgt, week, m}).second) continue;
                        t.is_target_task = true;
                    }
                    tasks.push_back(t);
                }
            }
        }
    }

    struct TaskResult {
        bool ok = false;
        double auc = 0.0;
        PadCell pad;
        std::vector<GroupResult> groups;
        std::string error;
        std::string bundle_path;
    };
    std::vector<TaskResult> results(tasks.size());

    const bool group_mode = !config.group_attribute.empty();
    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
        while (true) {
            const std::size_t i = next.fetch_add(1);
            if (i >= tasks.size()) return;
            const Task& t = tasks[i];
            TaskResult& out = results[i];
            try {
                const data::Cohort& source = cohort_of(t.source, t.rep_seed);
                const data::Cohort& target = cohort_of(t.target, t.rep_seed);
                if (t.is_pad_task) {
                    out.pad = compute_pad(source, target, t.week, t.rep_seed, config);
                } else {
                    EvaluatedCell cell =
                        evaluate_cell(source, target, t.week, t.method, t.rep_seed, config);
                    out.auc = cell.auc;
                    if (group_mode && target.has_demographics() &&
                        !is_target_only(t.method))
                        evaluate_groups(source, target, t.week, t.method, t.rep_seed, config,
                                        cell.predictor, out.groups);
                    if (config.save_predictors) {
                        const std::string name = sanitize(t.source) + "__" + sanitize(t.target) +
                                                 "__w" + std::to_string(t.week) + "__" +
                                                 transfer::method_name(t.method) + "__s" +
                                                 std::to_string(t.rep_seed) + ".json";
                        const fs::path dir = fs::path(out_dir) / "predictors";
                        fs::create_directories(dir);
                        out.bundle_path = (dir / name).string();
                        transfer::save_predictor(cell.predictor, out.bundle_path);
                    }
                }
                out.ok = true;
            } catch (const std::exception& e) {
                out.error = e.what();
            }
        }
    };
    const int n_workers = std::max(1, parallel);
    std::vector<std::thread> pool;
    for (int i = 1; i < n_workers; ++i) pool.emplace_back(worker);
    worker();
    for (auto& th : pool) th.join();

    // join: pad cells per (rep, pair, week); target-only rows copied to every
    // pair that shares the target
    std::map<std::tuple<std::uint64_t, std::size_t, int>, PadCell> pads;
    std::map<std::tuple<std::uint64_t, std::string, int, transfer::Method>, const TaskResult*>
        target_rows;
    std::map<std::tuple<std::uint64_t, std::size_t, int, transfer::Method>, const TaskResult*>
        pair_rows;
    RunOutcome outcome;
    for (std::size_t i = 0; i < tasks.size(); ++i) {
        const Task& t = tasks[i];
        const TaskResult& r = results[i];
        if (!r.ok) {
            outcome.failures.push_back(t.source + "->" + t.target + " week " +
                                       std::to_string(t.week) + " " +
                                       (t.is_pad_task ? "pad" : transfer::method_name(t.method)) +
                                       " seed " + std::to_string(t.rep_seed) + ": " + r.error);
            continue;
        }
        if (t.is_pad_task)
            pads[{t.rep_seed, t.pair_index, t.week}] = r.pad;
        else if (t.is_target_task)
            target_rows[{t.rep_seed, t.target, t.week, t.method}] = &r;
        else
            pair_rows[{t.rep_seed, t.pair_index, t.week, t.method}] = &r;
    }

    for (std::uint64_t rep : config.seeds) {
        for (std::size_t pi = 0; pi < config.pairs.size(); ++pi) {
            const auto& [src, tgt] = config.pairs[pi];
            for (int week : config.weeks) {
                const auto pad_it = pads.find({rep, pi, week});
                if (pad_it == pads.end()) continue;  // pad failure recorded already
                for (transfer::Method m : config.methods) {
                    const TaskResult* cell = nullptr;
                    if (is_target_only(m)) {
                        const auto it = target_rows.find({rep, tgt, week, m});
                        if (it != target_rows.end()) cell = it->second;
                    } else {
                        const auto it = pair_rows.find({rep, pi, week, m});
                        if (it != pair_rows.end()) cell = it->second;
                    }
                    if (!cell) continue;
                    eval::TransferResult row;
                    row.source = cohort_of(src, rep).name();
                    row.target = cohort_of(tgt, rep).name();
                    row.week = week;
                    row.method = transfer::method_name(m);
                    row.seed = rep;
                    row.auc = cell->auc;
                    row.pad = pad_it->second.pad;
                    row.size_ratio = pad_it->second.size_ratio;
                    outcome.results.push_back(std::move(row));
                    for (const auto& g : cell->groups) outcome.group_results.push_back(g);
                }
            }
        }
    }

    std::sort(outcome.results.begin(), outcome.results.end(),
              [](const eval::TransferResult& a, const eval::TransferResult& b) {
                  return std::tie(a.source, a.target, a.week, a.method, a.seed) <
                         std::tie(b.source, b.target, b.week, b.method, b.seed);
              });
    std::sort(outcome.group_results.begin(), outcome.group_results.end(),
              [](const GroupResult& a, const GroupResult& b) {
                  return std::tie(a.source, a.target, a.group, a.week, a.method, a.scope,
                                  a.seed) < std::tie(b.source, b.target, b.group, b.week,
                                                     b.method, b.scope, b.seed);
              });
    std::sort(outcome.failures.begin(), outcome.failures.end());

    // persist
    const std::string provenance = "config " + config.to_json().dump();
    {
        std::ofstream cfg(fs::path(out_dir) / "config_resolved.json");
        cfg << config.to_json().dump(2) << "\n";
    }
    eval::write_results_csv(outcome.results, (fs::path(out_dir) / "results.csv").string(),
                            provenance);
    if (!outcome.results.empty()) {
        const eval::Summary summary = eval::summarize(outcome.results);
        eval::write_summary_json(summary, (fs::path(out_dir) / "summary.json").string(),
                                 provenance);
        eval::write_method_week_csv(
            summary, (fs::path(out_dir) / "method_week_auc.csv").string(), provenance);
        eval::write_scatter_csv(summary, (fs::path(out_dir) / "pad_size_scatter.csv").string(),
                                provenance);
    }
    {
        std::vector<const data::Cohort*> firsts;
        for (const auto& d : config.datasets)
            firsts.push_back(&cohort_of(d.name, config.seeds.front()));
        eval::write_dropout_rates_csv(firsts, (fs::path(out_dir) / "dropout_rates.csv").string(),
                                      provenance);
        eval::write_event_frequency_csv(
            firsts, (fs::path(out_dir) / "event_frequencies.csv").string(), provenance);
    }
    if (group_mode) {
        std::ofstream gout(fs::path(out_dir) / "group_auc.csv");
        gout << "# " << provenance << "\n";
        gout << "source,target,group,week,method,scope,seed,auc\n";
        for (const auto& g : outcome.group_results)
            gout << g.source << "," << g.target << "," << g.group << "," << g.week << ","
                 << g.method << "," << g.scope << "," << g.seed << "," << format_double(g.auc)
                 << "\n";
    }
    if (!outcome.failures.empty()) {
        std::ofstream fail(fs::path(out_dir) / "failures.txt");
        for (const auto& f : outcome.failures) fail << f << "\n";
    }
    return outcome;
}

}  // namespace moocxfer::experiment
