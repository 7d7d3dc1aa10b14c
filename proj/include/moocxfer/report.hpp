#pragma once

// Aggregation of per-cell results into the standard tables and plot data:
// per-week method means, per-pair averages, the distance/size-ratio scatter
// with the winner tie rule, and the cohort-level dropout and event-frequency
// tables.

#include <map>
#include <string>
#include <vector>

#include "moocxfer/dataset.hpp"
#include "moocxfer/metrics.hpp"

namespace moocxfer::eval {

struct MethodWeekStat {
    std::string method;
    int week = 0;
    double mean = 0.0;
    double stddev = 0.0;
    std::size_t count = 0;
};

struct PairStat {
    std::string source, target, method;
    double mean = 0.0;
    std::size_t count = 0;
};

struct ScatterRow {
    std::string source, target;
    int week = 0;
    std::uint64_t seed = 0;
    double pad = 0.0;
    double size_ratio = 0.0;
    double passive_auc = 0.0;
    double active_auc = 0.0;
    double no_transfer_auc = 0.0;  // 0 when absent
    std::string winner;            // "passive", "active", or "tie"
    double winner_ratio = 0.0;     // winner AUC / no-transfer AUC
};

struct Summary {
    std::vector<MethodWeekStat> per_week;
    std::vector<PairStat> per_pair;
    std::vector<ScatterRow> scatter;
    std::map<std::string, double> method_means;
};

// Winners within 1% of their average AUC count as a tie.
Summary summarize(const std::vector<TransferResult>& results);

// results CSV: source,target,week,method,seed,auc,pad,size_ratio. Every
// writer embeds the resolved configuration as a leading '#' comment line so
// a file is enough to rerun its cells; readers skip comment lines.
void write_results_csv(const std::vector<TransferResult>& results, const std::string& path,
                       const std::string& provenance);
std::vector<TransferResult> load_results_csv(const std::string& path);

void write_summary_json(const Summary& summary, const std::string& path,
                        const std::string& provenance);
void write_method_week_csv(const Summary& summary, const std::string& path,
                           const std::string& provenance);
void write_scatter_csv(const Summary& summary, const std::string& path,
                       const std::string& provenance);

// Per-course weekly dropout percentages (students whose dropout week is k).
void write_dropout_rates_csv(const std::vector<const data::Cohort*>& cohorts,
                             const std::string& path, const std::string& provenance);
// Per-course total event counts per week and type.
void write_event_frequency_csv(const std::vector<const data::Cohort*>& cohorts,
                               const std::string& path, const std::string& provenance);

}  // namespace moocxfer::eval
