#pragma once

// Experiment orchestration: a strict JSON configuration (unknown keys are
// errors), dataset materialization, the (source, target, week, method, seed)
// grid with a worker pool, and persistence of results and summaries.

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "json.hpp"
#include "moocxfer/dataset.hpp"
#include "moocxfer/methods.hpp"
#include "moocxfer/metrics.hpp"
#include "moocxfer/synth.hpp"

namespace moocxfer::experiment {

struct DatasetSpec {
    std::string name;
    bool is_synth = false;
    synth::GeneratorConfig generator;  // when is_synth
    std::string weekly_counts_path;    // when file-backed
    std::string vocabulary_path;       // empty = built-in defaults
    std::string demographics_path;     // optional
    std::string course_id = "course";
    std::string offering_id = "run";
    int weeks = 9;
};

struct ExperimentConfig {
    std::uint64_t seed = 1;
    std::vector<std::uint64_t> seeds = {1};  // repetition seeds
    std::vector<int> weeks = {2, 3, 4, 5, 6, 7, 8, 9};
    std::vector<transfer::Method> methods = transfer::all_methods();
    std::vector<DatasetSpec> datasets;
    std::vector<std::pair<std::string, std::string>> pairs;  // empty = all ordered pairs
    transfer::MethodConfig hyper;
    std::string pad_mode = "pooled";  // or "per-slice"
    std::string group_attribute;      // enables group-targeted transfer rows
    bool at_risk_filter = true;
    bool save_predictors = false;

    static ExperimentConfig from_json(const nlohmann::json& j);
    static ExperimentConfig from_json_file(const std::string& path);
    nlohmann::json to_json() const;  // fully resolved, for provenance
};

synth::GeneratorConfig generator_from_json(const nlohmann::json& j);
nlohmann::json generator_to_json(const synth::GeneratorConfig& g);

struct GroupResult {
    std::string source, target, group;
    int week = 0;
    std::string method;
    std::string scope;  // "whole" or "group"
    std::uint64_t seed = 0;
    double auc = 0.0;
};

struct RunOutcome {
    std::vector<eval::TransferResult> results;
    std::vector<GroupResult> group_results;
    std::vector<std::string> failures;  // one line per failed cell
};

// Trains and evaluates every grid cell, then writes results.csv,
// summary.json, and the plot-data CSVs into out_dir. Deterministic for a
// fixed config regardless of the worker count.
RunOutcome run(const ExperimentConfig& config, const std::string& out_dir, int parallel = 1);

// Single-cell helpers shared by the CLI subcommands.
data::Cohort materialize(const DatasetSpec& spec, std::uint64_t rep_seed);
eval::TransferResult run_cell(const data::Cohort& source, const data::Cohort& target, int week,
                              transfer::Method method, std::uint64_t rep_seed,
                              const ExperimentConfig& config,
                              transfer::WeeklyPredictor* predictor_out = nullptr);

}  // namespace moocxfer::experiment
