#include "moocxfer/synth.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include "moocxfer/csv.hpp"
#include "moocxfer/rng.hpp"

namespace moocxfer::synth {

namespace {

double normal_cdf(double z) { return 0.5 * std::erfc(-z / 1.4142135623730951); }

// Smallest m with P(Poisson(lambda) <= m) >= u.
long poisson_quantile(double lambda, double u) {
    if (lambda <= 0.0) return 0;
    double p = std::exp(-lambda);
    double cum = p;
    long m = 0;
    const long cap = static_cast<long>(lambda + 12.0 * std::sqrt(lambda) + 60.0);
    while (cum < u && m < cap) {
        ++m;
        p *= lambda / static_cast<double>(m);
        cum += p;
    }
    return m;
}

// PSD factor L with L * L^T = C, from the eigendecomposition.
linalg::Matrix psd_factor(const linalg::Matrix& c) {
    const auto eig = linalg::symmetric_eigen(c);
    const std::size_t n = c.size();
    for (double v : eig.values) {
        if (v < -1e-8 * std::max(1.0, std::abs(eig.values.front())))
            throw std::invalid_argument("correlation matrix is not positive semidefinite");
    }
    linalg::Matrix l(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i) {
        const double s = std::sqrt(std::max(0.0, eig.values[i]));
        for (std::size_t e = 0; e < n; ++e) l[e][i] = s * eig.vectors[i][e];
    }
    return l;
}

linalg::Matrix perturb_correlation(const linalg::Matrix& c, double rho) {
    if (rho <= 0.0) return c;
    // blend with a permutation-similar matrix; the convex combination of PSD
    // matrices stays PSD
    const std::size_t n = c.size();
    const std::size_t shift = n / 2;
    linalg::Matrix out(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            const std::size_t pi = (i + shift) % n, pj = (j + shift) % n;
            out[i][j] = (1.0 - rho) * c[i][j] + rho * c[pi][pj];
        }
    return out;
}

}  // namespace

void GeneratorConfig::validate() const {
    vocabulary.validate();
    const std::size_t types = vocabulary.size();
    if (n_students < 1) throw std::invalid_argument("generator: n_students must be >= 1");
    if (weeks < 2) throw std::invalid_argument("generator: weeks must be >= 2");
    if (event_mean.size() != types || event_decay.size() != types)
        throw std::invalid_argument("generator: per-type parameter count mismatch");
    for (double m : event_mean)
        if (m < 0.0) throw std::invalid_argument("generator: negative event mean");
    for (double d : event_decay)
        if (d <= 0.0 || d > 1.0) throw std::invalid_argument("generator: decay outside (0,1]");
    if (correlation.size() != types)
        throw std::invalid_argument("generator: correlation matrix size mismatch");
    if (dropout_hazard.size() != static_cast<std::size_t>(weeks) + 1)
        throw std::invalid_argument("generator: need weeks+1 hazard entries");
    for (double h : dropout_hazard)
        if (h < 0.0 || h > 1.0) throw std::invalid_argument("generator: hazard outside [0,1]");
    if (!shift.frequency_scale.empty() && shift.frequency_scale.size() != types)
        throw std::invalid_argument("generator: frequency_scale size mismatch");
    if (shift.correlation_perturbation < 0.0 || shift.correlation_perturbation > 1.0)
        throw std::invalid_argument("generator: correlation_perturbation outside [0,1]");
    double wsum = 0.0;
    for (const auto& m : mixture) {
        if (m.weight < 0.0) throw std::invalid_argument("generator: negative mixture weight");
        wsum += m.weight;
    }
    if (!mixture.empty() && wsum <= 0.0)
        throw std::invalid_argument("generator: mixture weights sum to zero");
}

GeneratorConfig GeneratorConfig::defaults(int n_students, std::uint64_t seed) {
    GeneratorConfig cfg;
    cfg.n_students = n_students;
    cfg.seed = seed;
    cfg.vocabulary = EventVocabulary::defaults();
    const std::size_t types = cfg.vocabulary.size();

    // expected weekly counts at unit engagement, video block first
    cfg.event_mean = {12.0, 8.0, 2.0, 4.0, 1.0, 6.0,   // video events
                      6.0, 5.0, 2.0, 2.0, 10.0, 1.5, 3.0};
    cfg.event_decay = {0.94, 0.94, 0.95, 0.93, 0.95, 0.94,
                       0.92, 0.92, 0.93, 0.95, 0.96, 0.97, 0.95};

    // strong coupling inside the video block and inside the problem block
    cfg.correlation.assign(types, std::vector<double>(types, 0.15));
    auto block = [&cfg](std::size_t lo, std::size_t hi, double r) {
        for (std::size_t i = lo; i < hi; ++i)
            for (std::size_t j = lo; j < hi; ++j) cfg.correlation[i][j] = i == j ? 1.0 : r;
    };
    block(0, 6, 0.9);    // video events move together
    block(6, 9, 0.9);    // problem_check / problem_graded / problem_save
    for (std::size_t i = 0; i < types; ++i) cfg.correlation[i][i] = 1.0;

    cfg.dropout_hazard.assign(static_cast<std::size_t>(cfg.weeks) + 1, 0.0);
    const double base[] = {0.0, 0.0, 0.55, 0.42, 0.34, 0.30, 0.26, 0.24, 0.22, 0.20};
    for (int k = 2; k <= cfg.weeks; ++k) cfg.dropout_hazard[static_cast<std::size_t>(k)] = base[k];
    return cfg;
}

GeneratedCohort generate_cohort(const GeneratorConfig& config) {
    config.validate();
    const std::size_t types = config.vocabulary.size();
    const int T = config.weeks;

    linalg::Matrix corr =
        perturb_correlation(config.correlation, config.shift.correlation_perturbation);
    const linalg::Matrix copula = psd_factor(corr);

    std::vector<MixtureComponent> mixture = config.mixture;
    if (mixture.empty()) mixture.push_back(MixtureComponent{});
    double weight_sum = 0.0;
    for (const auto& m : mixture) weight_sum += m.weight;

    std::vector<double> scale(types, 1.0);
    if (!config.shift.frequency_scale.empty()) scale = config.shift.frequency_scale;

    std::size_t first_video = 0;
    while (!config.vocabulary.video_event_flags[first_video]) ++first_video;

    std::vector<data::StudentCounts> all_counts(static_cast<std::size_t>(config.n_students));
    std::vector<int> dropout_weeks(static_cast<std::size_t>(config.n_students));
    std::vector<std::string> component_labels(static_cast<std::size_t>(config.n_students));

    // digits fixed so lexicographic id order equals generation order
    int id_digits = 1;
    for (int v = config.n_students; v >= 10; v /= 10) ++id_digits;

    for (int si = 0; si < config.n_students; ++si) {
        Rng rng(mix_seed(config.seed, static_cast<std::uint64_t>(si)));

        // mixture component
        double pick = uniform01(rng) * weight_sum;
        std::size_t comp = 0;
        for (; comp + 1 < mixture.size(); ++comp) {
            if (pick < mixture[comp].weight) break;
            pick -= mixture[comp].weight;
        }
        const MixtureComponent& mc = mixture[comp];

        const double g = std::exp(normal(rng, 0.0, config.engagement_sigma)) * mc.engagement_scale;
        std::vector<double> engagement(static_cast<std::size_t>(T) + 1, 0.0);
        for (int k = 1; k <= T; ++k)
            engagement[static_cast<std::size_t>(k)] =
                g * std::exp(normal(rng, 0.0, config.week_noise_sigma));

        // dropout week from hazards driven by the previous week's engagement
        int dropout = T + 1;
        for (int k = 2; k <= T; ++k) {
            const double h = config.dropout_hazard[static_cast<std::size_t>(k)] * mc.hazard_scale *
                             std::exp(-config.hazard_coupling *
                                      engagement[static_cast<std::size_t>(k - 1)]);
            if (uniform01(rng) < std::clamp(h, 0.0, 1.0)) {
                dropout = k;
                break;
            }
        }

        data::StudentCounts sc;
        sc.student_id = [&] {
            std::string id = std::to_string(si);
            return "s" + std::string(static_cast<std::size_t>(id_digits) - id.size(), '0') + id;
        }();
        sc.counts.assign(static_cast<std::size_t>(T) * types, 0);

        std::vector<double> z(types);
        for (int k = 1; k <= T; ++k) {
            // correlated uniforms via the Gaussian copula
            std::vector<double> eps(types);
            for (std::size_t e = 0; e < types; ++e) eps[e] = normal(rng);
            for (std::size_t e = 0; e < types; ++e) {
                double acc = 0.0;
                for (std::size_t j = 0; j < types; ++j) acc += copula[e][j] * eps[j];
                z[e] = acc;
            }
            const bool dropped = k >= dropout;
            for (std::size_t e = 0; e < types; ++e) {
                const bool video = config.vocabulary.video_event_flags[e];
                if (dropped && video) continue;  // defines the dropout week exactly
                double rate = config.event_mean[e] * scale[e] *
                              std::pow(config.event_decay[e], k - 1) *
                              engagement[static_cast<std::size_t>(k)];
                if (dropped) rate *= config.post_dropout_activity;
                sc.counts[static_cast<std::size_t>(k - 1) * types + e] =
                    poisson_quantile(rate, normal_cdf(z[e]));
            }
        }
        // the week before dropout must show video activity, and survivors
        // must reach the final week, or the labels would disagree
        const int anchor_week = std::min(dropout - 1, T);
        auto& anchor = sc.counts[static_cast<std::size_t>(anchor_week - 1) * types + first_video];
        anchor = std::max(anchor, 1L);

        all_counts[static_cast<std::size_t>(si)] = std::move(sc);
        dropout_weeks[static_cast<std::size_t>(si)] = dropout;
        component_labels[static_cast<std::size_t>(si)] = mc.label;
    }

    GeneratedCohort out;
    // ids are zero-padded, so build_cohort's sort preserves generation order
    out.cohort = data::build_cohort(config.course_id, config.offering_id, config.vocabulary, T,
                                    std::move(all_counts));
    out.true_dropout_week = std::move(dropout_weeks);

    const bool labelled_mixture =
        std::any_of(mixture.begin(), mixture.end(),
                    [](const MixtureComponent& m) { return !m.label.empty(); });
    if (labelled_mixture) {
        std::vector<std::pair<std::string, std::string>> demo;
        for (std::size_t i = 0; i < out.cohort.size(); ++i)
            demo.emplace_back(out.cohort.student_ids[i], component_labels[i]);
        data::attach_demographics(out.cohort, "background", demo);
    }
    return out;
}

void write_ground_truth_csv(const GeneratedCohort& gen, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path);
    out << "student_id,dropout_week\n";
    for (std::size_t i = 0; i < gen.cohort.size(); ++i)
        out << gen.cohort.student_ids[i] << "," << gen.true_dropout_week[i] << "\n";
}

std::vector<std::pair<std::string, int>> load_ground_truth_csv(const std::string& path) {
    const auto rows = read_csv(path, "student_id,dropout_week");
    std::vector<std::pair<std::string, int>> out;
    for (const auto& row : rows)
        out.emplace_back(row[0], static_cast<int>(parse_long(row[1], path)));
    return out;
}

}  // namespace moocxfer::synth
