// Generator determinism, label consistency with the ground truth, correlation
// coupling, and mixture bookkeeping.

#include <cmath>
#include <filesystem>
#include <map>

#include "doctest.h"
#include "moocxfer/dataset.hpp"
#include "moocxfer/synth.hpp"

using namespace moocxfer;
using namespace moocxfer::synth;

namespace {
std::string temp_path(const std::string& name) {
    return (std::filesystem::temp_directory_path() / name).string();
}
}  // namespace

TEST_CASE("zero hazards produce no dropouts") {
    GeneratorConfig cfg = GeneratorConfig::defaults(50, 3);
    std::fill(cfg.dropout_hazard.begin(), cfg.dropout_hazard.end(), 0.0);
    GeneratedCohort gen = generate_cohort(cfg);
    for (const auto& l : gen.cohort.labels) {
        CHECK(l.dropout_week == cfg.weeks + 1);
        for (bool b : l.y) CHECK_FALSE(b);
    }
}

TEST_CASE("same seed means identical cohorts, different seeds differ") {
    const GeneratorConfig cfg = GeneratorConfig::defaults(80, 9);
    GeneratedCohort a = generate_cohort(cfg);
    GeneratedCohort b = generate_cohort(cfg);
    REQUIRE(a.cohort.size() == b.cohort.size());
    for (std::size_t i = 0; i < a.cohort.size(); ++i) {
        CHECK(a.cohort.raw_counts[i] == b.cohort.raw_counts[i]);
        CHECK(a.true_dropout_week[i] == b.true_dropout_week[i]);
    }

    GeneratorConfig other = cfg;
    other.seed = 10;
    GeneratedCohort c = generate_cohort(other);
    bool any_diff = false;
    for (std::size_t i = 0; i < a.cohort.size() && !any_diff; ++i)
        any_diff = a.cohort.raw_counts[i] != c.cohort.raw_counts[i];
    CHECK(any_diff);
}

TEST_CASE("derived labels agree with the generator's intent for every student") {
    for (std::uint64_t seed : {1ULL, 2ULL, 3ULL}) {
        GeneratedCohort gen = generate_cohort(GeneratorConfig::defaults(300, seed));
        for (std::size_t i = 0; i < gen.cohort.size(); ++i)
            CHECK(gen.cohort.labels[i].dropout_week == gen.true_dropout_week[i]);
    }
}

TEST_CASE("ground truth csv round-trips") {
    GeneratedCohort gen = generate_cohort(GeneratorConfig::defaults(40, 5));
    const std::string path = temp_path("ground_truth.csv");
    write_ground_truth_csv(gen, path);
    auto loaded = load_ground_truth_csv(path);
    REQUIRE(loaded.size() == gen.cohort.size());
    for (std::size_t i = 0; i < loaded.size(); ++i) {
        CHECK(loaded[i].first == gen.cohort.student_ids[i]);
        CHECK(loaded[i].second == gen.true_dropout_week[i]);
    }
}

TEST_CASE("strongly coupled event types show correlated counts") {
    GeneratedCohort gen = generate_cohort(GeneratorConfig::defaults(2000, 17));
    // play_video (0) and pause_video (1) share correlation 0.9; restrict to
    // week 1 so dropout zeroing cannot dilute the signal
    const std::size_t types = gen.cohort.vocabulary.size();
    std::vector<double> a, b;
    for (const auto& counts : gen.cohort.raw_counts) {
        a.push_back(static_cast<double>(counts[0 * types + 0]));
        b.push_back(static_cast<double>(counts[0 * types + 1]));
    }
    double ma = 0, mb = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        ma += a[i];
        mb += b[i];
    }
    ma /= static_cast<double>(a.size());
    mb /= static_cast<double>(b.size());
    double sab = 0, saa = 0, sbb = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        sab += (a[i] - ma) * (b[i] - mb);
        saa += (a[i] - ma) * (a[i] - ma);
        sbb += (b[i] - mb) * (b[i] - mb);
    }
    const double corr = sab / std::sqrt(saa * sbb);
    CHECK(corr >= 0.6);
}

TEST_CASE("mixture proportions match the configured weights within 2%") {
    GeneratorConfig cfg = GeneratorConfig::defaults(5000, 23);
    cfg.mixture = {
        {0.5, 1.0, 1.0, "bachelor"},
        {0.3, 1.3, 0.8, "postgraduate"},
        {0.2, 0.7, 1.3, "high_school"},
    };
    GeneratedCohort gen = generate_cohort(cfg);
    REQUIRE(gen.cohort.has_demographics());

    std::map<std::string, double> freq;
    for (const auto& v : gen.cohort.demographic_values) freq[v] += 1.0;
    for (auto& [k, v] : freq) v /= static_cast<double>(gen.cohort.size());
    CHECK(std::abs(freq["bachelor"] - 0.5) <= 0.02);
    CHECK(std::abs(freq["postgraduate"] - 0.3) <= 0.02);
    CHECK(std::abs(freq["high_school"] - 0.2) <= 0.02);

    // group filters partition the cohort
    std::size_t total = 0;
    for (const auto& [k, v] : freq) total += data::filter_group(gen.cohort, k).size();
    CHECK(total == gen.cohort.size());
}

TEST_CASE("an invalid correlation matrix is rejected") {
    GeneratorConfig cfg = GeneratorConfig::defaults(10, 1);
    // pairwise +0.9/+0.9/-0.9 in a 3-cycle is indefinite
    cfg.correlation[0][1] = cfg.correlation[1][0] = 0.9;
    cfg.correlation[0][2] = cfg.correlation[2][0] = 0.9;
    cfg.correlation[1][2] = cfg.correlation[2][1] = -0.9;
    CHECK_THROWS_AS(generate_cohort(cfg), std::invalid_argument);
}

TEST_CASE("generated values form a valid cohort") {
    GeneratedCohort gen = generate_cohort(GeneratorConfig::defaults(200, 31));
    CHECK(gen.cohort.size() == 200);
    for (const auto& s : gen.cohort.series)
        for (double v : s.values) {
            CHECK(v >= 0.0);
            CHECK(v <= 1.0);
        }
    for (int d : gen.true_dropout_week) {
        CHECK(d >= 2);
        CHECK(d <= gen.cohort.weeks + 1);
    }
}
