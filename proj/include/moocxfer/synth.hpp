#pragma once

// Synthetic cohort generator. Students carry a latent engagement level that
// decays weekly with noise; weekly event counts are Poisson with rates
// proportional to engagement and the per-type mean, coupled across types by a
// Gaussian copula; dropout is sampled from per-week hazards scaled by
// exp(-coupling * engagement). Shift knobs (per-type frequency scaling,
// correlation perturbation, mixture weights) move a generated course away
// from another one in a controlled way.

#include <cstdint>
#include <string>
#include <vector>

#include "moocxfer/dataset.hpp"
#include "moocxfer/eigen.hpp"

namespace moocxfer::synth {

using moocxfer::data::Cohort;
using moocxfer::data::EventVocabulary;

struct MixtureComponent {
    double weight = 1.0;
    double engagement_scale = 1.0;  // multiplies the latent engagement
    double hazard_scale = 1.0;      // multiplies the weekly hazards
    std::string label;              // demographic value when mixtures are used
};

struct ShiftConfig {
    std::vector<double> frequency_scale;   // per type; empty = all 1.0
    double correlation_perturbation = 0.0; // in [0,1], blends a permuted structure
};

struct GeneratorConfig {
    std::string course_id = "synth";
    std::string offering_id = "a";
    int n_students = 100;
    int weeks = 9;
    EventVocabulary vocabulary;
    std::vector<double> event_mean;    // expected weekly count per type at unit engagement
    std::vector<double> event_decay;   // per-type weekly decay factor in (0,1]
    linalg::Matrix correlation;        // E x E positive semidefinite
    std::vector<double> dropout_hazard;  // length weeks+1, index k = base hazard of week k
    double engagement_sigma = 0.5;    // lognormal sigma of the per-student level
    double week_noise_sigma = 0.25;   // lognormal sigma of the weekly wobble
    double hazard_coupling = 2.0;     // hazard multiplier exp(-coupling * engagement)
    double post_dropout_activity = 0.02;  // non-video rate factor after dropout
    ShiftConfig shift;
    std::vector<MixtureComponent> mixture;  // empty = single default component
    std::uint64_t seed = 1;

    void validate() const;

    // A 13-type course with correlated video/problem blocks and hazards
    // tuned so roughly half the students survive to the final weeks.
    static GeneratorConfig defaults(int n_students, std::uint64_t seed);
};

struct GeneratedCohort {
    Cohort cohort;
    std::vector<int> true_dropout_week;  // aligned with cohort.student_ids
};

GeneratedCohort generate_cohort(const GeneratorConfig& config);

// Ground-truth export: header "student_id,dropout_week".
void write_ground_truth_csv(const GeneratedCohort& gen, const std::string& path);
std::vector<std::pair<std::string, int>> load_ground_truth_csv(const std::string& path);

}  // namespace moocxfer::synth
