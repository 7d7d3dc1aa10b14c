#pragma once

// The built-in shift benchmark: two "similar" cohort pairs (same generator,
// different populations) and two "dissimilar" pairs (frequency scaling,
// perturbed correlation structure, and a changed population mixture between
// source and target), sized for the qualitative method-ordering checks.

#include "moocxfer/experiment.hpp"

namespace moocxfer::experiment {

synth::GeneratorConfig benchmark_base_generator(int n_students, std::uint64_t seed);
synth::GeneratorConfig benchmark_shifted_generator(int n_students, std::uint64_t seed);

ExperimentConfig benchmark_config(int n_students = 2000, int n_seeds = 5, int week_from = 2,
                                  int week_to = 6);

}  // namespace moocxfer::experiment
