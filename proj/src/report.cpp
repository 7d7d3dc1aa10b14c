#include "moocxfer/report.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <stdexcept>

#include "json.hpp"
#include "moocxfer/csv.hpp"

namespace moocxfer::eval {

namespace {

std::ofstream open_out(const std::string& path, const std::string& provenance) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path);
    if (!provenance.empty()) out << "# " << provenance << "\n";
    return out;
}

}  // namespace

Summary summarize(const std::vector<TransferResult>& results) {
    if (results.empty()) throw std::invalid_argument("summarize: no results");

    Summary s;
    // per (method, week)
    std::map<std::pair<std::string, int>, std::vector<double>> by_method_week;
    std::map<std::string, std::vector<double>> by_method;
    std::map<std::tuple<std::string, std::string, std::string>, std::vector<double>> by_pair;
    for (const auto& r : results) {
        by_method_week[{r.method, r.week}].push_back(r.auc);
        by_method[r.method].push_back(r.auc);
        by_pair[{r.source, r.target, r.method}].push_back(r.auc);
    }
    for (const auto& [key, values] : by_method_week) {
        MethodWeekStat stat;
        stat.method = key.first;
        stat.week = key.second;
        stat.count = values.size();
        double sum = 0.0;
        for (double v : values) sum += v;
        stat.mean = sum / static_cast<double>(values.size());
        double sq = 0.0;
        for (double v : values) sq += (v - stat.mean) * (v - stat.mean);
        stat.stddev = values.size() > 1
                          ? std::sqrt(sq / static_cast<double>(values.size() - 1))
                          : 0.0;
        s.per_week.push_back(std::move(stat));
    }
    for (const auto& [method, values] : by_method) {
        double sum = 0.0;
        for (double v : values) sum += v;
        s.method_means[method] = sum / static_cast<double>(values.size());
    }
    for (const auto& [key, values] : by_pair) {
        PairStat stat;
        stat.source = std::get<0>(key);
        stat.target = std::get<1>(key);
        stat.method = std::get<2>(key);
        stat.count = values.size();
        double sum = 0.0;
        for (double v : values) sum += v;
        stat.mean = sum / static_cast<double>(values.size());
        s.per_pair.push_back(std::move(stat));
    }

    // scatter: one row per cell that ran both the passive and active methods
    std::map<std::tuple<std::string, std::string, int, std::uint64_t>,
             std::map<std::string, const TransferResult*>>
        cells;
    for (const auto& r : results) cells[{r.source, r.target, r.week, r.seed}][r.method] = &r;
    for (const auto& [key, methods] : cells) {
        const auto pit = methods.find("passive");
        const auto ait = methods.find("active");
        if (pit == methods.end() || ait == methods.end()) continue;
        ScatterRow row;
        row.source = std::get<0>(key);
        row.target = std::get<1>(key);
        row.week = std::get<2>(key);
        row.seed = std::get<3>(key);
        row.pad = pit->second->pad;
        row.size_ratio = pit->second->size_ratio;
        row.passive_auc = pit->second->auc;
        row.active_auc = ait->second->auc;
        const double avg = 0.5 * (row.passive_auc + row.active_auc);
        if (std::abs(row.passive_auc - row.active_auc) < 0.01 * avg)
            row.winner = "tie";
        else
            row.winner = row.passive_auc > row.active_auc ? "passive" : "active";
        const auto nit = methods.find("no-transfer");
        if (nit != methods.end()) {
            row.no_transfer_auc = nit->second->auc;
            const double best = std::max(row.passive_auc, row.active_auc);
            row.winner_ratio = row.no_transfer_auc > 0.0 ? best / row.no_transfer_auc : 0.0;
        }
        s.scatter.push_back(std::move(row));
    }
    return s;
}

void write_results_csv(const std::vector<TransferResult>& results, const std::string& path,
                       const std::string& provenance) {
    std::ofstream out = open_out(path, provenance);
    out << "source,target,week,method,seed,auc,pad,size_ratio\n";
    for (const auto& r : results) {
        out << r.source << "," << r.target << "," << r.week << "," << r.method << "," << r.seed
            << "," << format_double(r.auc) << "," << format_double(r.pad) << ","
            << format_double(r.size_ratio) << "\n";
    }
}

std::vector<TransferResult> load_results_csv(const std::string& path) {
    const auto rows = read_csv(path, "source,target,week,method,seed,auc,pad,size_ratio");
    std::vector<TransferResult> out;
    for (const auto& row : rows) {
        TransferResult r;
        r.source = row[0];
        r.target = row[1];
        r.week = static_cast<int>(parse_long(row[2], path));
        r.method = row[3];
        r.seed = static_cast<std::uint64_t>(parse_long(row[4], path));
        r.auc = parse_double(row[5], path);
        r.pad = parse_double(row[6], path);
        r.size_ratio = parse_double(row[7], path);
        out.push_back(std::move(r));
    }
    return out;
}

void write_summary_json(const Summary& summary, const std::string& path,
                        const std::string& provenance) {
    nlohmann::json j;
    j["provenance"] = provenance;
    nlohmann::json per_week = nlohmann::json::array();
    for (const auto& s : summary.per_week) {
        per_week.push_back({{"method", s.method},
                            {"week", s.week},
                            {"mean_auc", s.mean},
                            {"stddev", s.stddev},
                            {"count", s.count}});
    }
    j["per_week"] = per_week;
    nlohmann::json per_pair = nlohmann::json::array();
    for (const auto& s : summary.per_pair) {
        per_pair.push_back({{"source", s.source},
                            {"target", s.target},
                            {"method", s.method},
                            {"mean_auc", s.mean},
                            {"count", s.count}});
    }
    j["per_pair"] = per_pair;
    j["method_means"] = summary.method_means;
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path);
    out << j.dump(2) << "\n";
}

void write_method_week_csv(const Summary& summary, const std::string& path,
                           const std::string& provenance) {
    std::ofstream out = open_out(path, provenance);
    out << "method,week,mean_auc,stddev,count\n";
    for (const auto& s : summary.per_week)
        out << s.method << "," << s.week << "," << format_double(s.mean) << ","
            << format_double(s.stddev) << "," << s.count << "\n";
}

void write_scatter_csv(const Summary& summary, const std::string& path,
                       const std::string& provenance) {
    std::ofstream out = open_out(path, provenance);
    out << "source,target,week,seed,pad,size_ratio,passive_auc,active_auc,no_transfer_auc,"
           "winner,winner_ratio\n";
    for (const auto& r : summary.scatter)
        out << r.source << "," << r.target << "," << r.week << "," << r.seed << ","
            << format_double(r.pad) << "," << format_double(r.size_ratio) << ","
            << format_double(r.passive_auc) << "," << format_double(r.active_auc) << ","
            << format_double(r.no_transfer_auc) << "," << r.winner << ","
            << format_double(r.winner_ratio) << "\n";
}

void write_dropout_rates_csv(const std::vector<const data::Cohort*>& cohorts,
                             const std::string& path, const std::string& provenance) {
    std::ofstream out = open_out(path, provenance);
    out << "course,week,dropout_fraction\n";
    for (const data::Cohort* c : cohorts) {
        for (int k = 2; k <= c->weeks + 1; ++k) {
            std::size_t dropped = 0;
            for (const auto& l : c->labels)
                if (l.dropout_week == k) ++dropped;
            out << c->name() << "," << k << ","
                << format_double(static_cast<double>(dropped) /
                                 static_cast<double>(c->size()))
                << "\n";
        }
    }
}

void write_event_frequency_csv(const std::vector<const data::Cohort*>& cohorts,
                               const std::string& path, const std::string& provenance) {
    std::ofstream out = open_out(path, provenance);
    out << "course,week,event_type,total_count\n";
    for (const data::Cohort* c : cohorts) {
        const std::size_t types = c->vocabulary.size();
        for (int w = 1; w <= c->weeks; ++w) {
            for (std::size_t e = 0; e < types; ++e) {
                long total = 0;
                for (const auto& counts : c->raw_counts)
                    total += counts[static_cast<std::size_t>(w - 1) * types + e];
                out << c->name() << "," << w << "," << c->vocabulary.names[e] << "," << total
                    << "\n";
            }
        }
    }
}

}  // namespace moocxfer::eval
