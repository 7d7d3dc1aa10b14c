#include "moocxfer/dataset.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <set>
#include <stdexcept>

#include "moocxfer/csv.hpp"

namespace moocxfer::data {

std::optional<std::size_t> EventVocabulary::index_of(const std::string& name) const {
    for (std::size_t i = 0; i < names.size(); ++i)
        if (names[i] == name) return i;
    return std::nullopt;
}

std::size_t EventVocabulary::video_count() const {
    std::size_t n = 0;
    for (bool f : video_event_flags) n += f ? 1 : 0;
    return n;
}

void EventVocabulary::validate() const {
    if (names.empty()) throw std::invalid_argument("vocabulary: no event types");
    if (names.size() != video_event_flags.size())
        throw std::invalid_argument("vocabulary: flag count mismatch");
    std::set<std::string> seen;
    for (const auto& n : names) {
        if (n.empty()) throw std::invalid_argument("vocabulary: empty event type name");
        if (!seen.insert(n).second)
            throw std::invalid_argument("vocabulary: duplicate event type '" + n + "'");
    }
    if (video_count() == 0)
        throw std::invalid_argument("vocabulary: at least one video event type required");
}

EventVocabulary EventVocabulary::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    EventVocabulary vocab;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const bool video = line[0] == '*';
        vocab.names.push_back(video ? line.substr(1) : line);
        vocab.video_event_flags.push_back(video);
    }
    vocab.validate();
    return vocab;
}

void EventVocabulary::save(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path);
    for (std::size_t i = 0; i < names.size(); ++i)
        out << (video_event_flags[i] ? "*" : "") << names[i] << "\n";
}

EventVocabulary EventVocabulary::defaults() {
    EventVocabulary v;
    const std::vector<std::pair<std::string, bool>> types = {
        {"play_video", true},     {"pause_video", true},    {"stop_video", true},
        {"seek_video", true},     {"speed_change_video", true}, {"load_video", true},
        {"problem_check", false}, {"problem_graded", false},    {"problem_save", false},
        {"show_answer", false},   {"page_view", false},         {"forum_view", false},
        {"textbook_view", false},
    };
    for (const auto& [name, video] : types) {
        v.names.push_back(name);
        v.video_event_flags.push_back(video);
    }
    return v;
}

std::vector<CountedEvent> ingest_events(const std::string& path, IngestFormat format,
                                        const EventVocabulary& vocabulary,
                                        const std::string& course_start_iso, int weeks,
                                        int week_length_days, IngestStats* stats) {
    vocabulary.validate();
    if (weeks < 2) throw std::invalid_argument("ingest_events: need at least 2 weeks");
    if (week_length_days < 1) throw std::invalid_argument("ingest_events: bad week length");

    IngestStats local;
    std::vector<CountedEvent> out;

    if (format == IngestFormat::RawTimestamped) {
        const std::int64_t start = parse_iso8601(course_start_iso);
        const std::int64_t week_len = static_cast<std::int64_t>(week_length_days) * 86400;
        const auto rows = read_csv(path, "student_id,timestamp,event_type");
        std::size_t line_no = 1;
        for (const auto& row : rows) {
            ++line_no;
            ++local.rows;
            std::int64_t t;
            try {
                t = parse_iso8601(row[1]);
            } catch (const std::exception& e) {
                throw std::runtime_error(path + ":" + std::to_string(line_no) + ": " + e.what());
            }
            if (t < start)
                throw std::runtime_error(path + ":" + std::to_string(line_no) +
                                         ": timestamp before course start");
            if (row[2].empty())
                throw std::runtime_error(path + ":" + std::to_string(line_no) +
                                         ": empty event type");
            if (!vocabulary.index_of(row[2])) {
                ++local.unknown_event_type;
                continue;
            }
            const int week = static_cast<int>((t - start) / week_len) + 1;
            if (week > weeks) {
                ++local.dropped_after_course;
                continue;
            }
            out.push_back({{row[0], week, row[2]}, 1});
        }
    } else {
        const auto rows = read_csv(path, "student_id,week,event_type,count");
        std::size_t line_no = 1;
        for (const auto& row : rows) {
            ++line_no;
            ++local.rows;
            const std::string where = path + ":" + std::to_string(line_no);
            const long week = parse_long(row[1], where);
            const long count = parse_long(row[3], where);
            if (week < 1) throw std::runtime_error(where + ": week must be >= 1");
            if (count < 0) throw std::runtime_error(where + ": negative count");
            if (row[2].empty()) throw std::runtime_error(where + ": empty event type");
            if (!vocabulary.index_of(row[2])) {
                ++local.unknown_event_type;
                continue;
            }
            if (week > weeks) {
                ++local.dropped_after_course;
                continue;
            }
            if (count == 0) continue;
            out.push_back({{row[0], static_cast<int>(week), row[2]}, count});
        }
    }
    if (stats) *stats = local;
    return out;
}

std::vector<StudentCounts> aggregate_weekly(const std::vector<CountedEvent>& events,
                                            const EventVocabulary& vocabulary, int weeks) {
    const std::size_t types = vocabulary.size();
    std::map<std::string, std::vector<long>> by_student;
    for (const auto& ev : events) {
        if (ev.record.week < 1 || ev.record.week > weeks)
            throw std::invalid_argument("aggregate_weekly: week " +
                                        std::to_string(ev.record.week) + " outside [1, " +
                                        std::to_string(weeks) + "]");
        const auto type = vocabulary.index_of(ev.record.event_type);
        if (!type)
            throw std::invalid_argument("aggregate_weekly: unknown event type '" +
                                        ev.record.event_type + "'");
        auto& counts = by_student[ev.record.student_id];
        if (counts.empty()) counts.assign(static_cast<std::size_t>(weeks) * types, 0);
        counts[static_cast<std::size_t>(ev.record.week - 1) * types + *type] += ev.count;
    }
    std::vector<StudentCounts> out;
    out.reserve(by_student.size());
    for (auto& [id, counts] : by_student) out.push_back({id, std::move(counts)});
    return out;  // std::map iteration is already sorted by id
}

std::vector<StudentSeries> normalize(const std::vector<StudentCounts>& counts,
                                     const EventVocabulary& vocabulary, int weeks) {
    const std::size_t types = vocabulary.size();
    std::vector<long> max_per_type(types, 0);
    for (const auto& sc : counts)
        for (int w = 0; w < weeks; ++w)
            for (std::size_t e = 0; e < types; ++e)
                max_per_type[e] =
                    std::max(max_per_type[e], sc.counts[static_cast<std::size_t>(w) * types + e]);

    std::vector<StudentSeries> out;
    out.reserve(counts.size());
    for (const auto& sc : counts) {
        StudentSeries s;
        s.student_id = sc.student_id;
        s.weeks = weeks;
        s.types = static_cast<int>(types);
        s.values.resize(sc.counts.size());
        for (int w = 0; w < weeks; ++w) {
            for (std::size_t e = 0; e < types; ++e) {
                const std::size_t i = static_cast<std::size_t>(w) * types + e;
                s.values[i] = max_per_type[e] == 0
                                  ? 0.0
                                  : static_cast<double>(sc.counts[i]) /
                                        static_cast<double>(max_per_type[e]);
            }
        }
        out.push_back(std::move(s));
    }
    return out;
}

DropoutLabels DropoutLabels::from_dropout_week(int dropout_week, int weeks) {
    if (dropout_week < 2 || dropout_week > weeks + 1)
        throw std::invalid_argument("dropout week " + std::to_string(dropout_week) +
                                    " outside [2, " + std::to_string(weeks + 1) + "]");
    DropoutLabels l;
    l.dropout_week = dropout_week;
    l.y.resize(static_cast<std::size_t>(weeks));
    for (int k = 1; k <= weeks; ++k) l.y[static_cast<std::size_t>(k - 1)] = k >= dropout_week;
    return l;
}

std::vector<DropoutLabels> label_dropout(const std::vector<StudentCounts>& counts,
                                         const EventVocabulary& vocabulary, int weeks) {
    vocabulary.validate();
    const std::size_t types = vocabulary.size();
    std::vector<DropoutLabels> out;
    out.reserve(counts.size());
    for (const auto& sc : counts) {
        int last_video_week = 0;
        for (int w = weeks; w >= 1 && last_video_week == 0; --w) {
            for (std::size_t e = 0; e < types; ++e) {
                if (!vocabulary.video_event_flags[e]) continue;
                if (sc.counts[static_cast<std::size_t>(w - 1) * types + e] > 0) {
                    last_video_week = w;
                    break;
                }
            }
        }
        const int dropout_week = std::max(2, last_video_week + 1);
        out.push_back(DropoutLabels::from_dropout_week(dropout_week, weeks));
    }
    return out;
}

Cohort build_cohort(std::string course_id, std::string offering_id, EventVocabulary vocabulary,
                    int weeks, std::vector<StudentCounts> counts) {
    vocabulary.validate();
    if (weeks < 2) throw std::invalid_argument("build_cohort: need at least 2 weeks");
    if (counts.empty()) throw std::invalid_argument("build_cohort: empty cohort");
    std::sort(counts.begin(), counts.end(),
              [](const StudentCounts& a, const StudentCounts& b) {
                  return a.student_id < b.student_id;
              });

    Cohort c;
    c.course_id = std::move(course_id);
    c.offering_id = std::move(offering_id);
    c.vocabulary = std::move(vocabulary);
    c.weeks = weeks;
    c.series = normalize(counts, c.vocabulary, weeks);
    c.labels = label_dropout(counts, c.vocabulary, weeks);
    for (auto& sc : counts) {
        c.student_ids.push_back(sc.student_id);
        c.raw_counts.push_back(std::move(sc.counts));
    }
    return c;
}

WeekSlice slice_for_week(const Cohort& cohort, int week, bool at_risk_only) {
    if (week < 2 || week > cohort.weeks)
        throw std::invalid_argument("slice_for_week: week " + std::to_string(week) +
                                    " outside [2, " + std::to_string(cohort.weeks) + "]");
    const std::size_t types = cohort.vocabulary.size();
    const int history = week - 1;

    std::vector<std::size_t> keep;
    for (std::size_t i = 0; i < cohort.size(); ++i) {
        if (at_risk_only && cohort.labels[i].y[static_cast<std::size_t>(week - 2)]) continue;
        keep.push_back(i);
    }

    WeekSlice slice;
    slice.week = week;
    slice.features = Tensor({keep.size(), static_cast<std::size_t>(history), types});
    for (std::size_t r = 0; r < keep.size(); ++r) {
        const StudentSeries& s = cohort.series[keep[r]];
        double* dst = slice.features.values.data() + r * history * types;
        for (std::size_t i = 0; i < static_cast<std::size_t>(history) * types; ++i)
            dst[i] = s.values[i];
        slice.labels.push_back(cohort.labels[keep[r]].y[static_cast<std::size_t>(week - 1)] ? 1
                                                                                            : 0);
        slice.student_ids.push_back(cohort.student_ids[keep[r]]);
    }
    return slice;
}

FeatureSlice strip_labels(const WeekSlice& slice) {
    return {slice.week, slice.features, slice.student_ids};
}

Cohort filter_group(const Cohort& cohort, const std::string& attribute_value) {
    if (!cohort.has_demographics())
        throw std::invalid_argument("filter_group: cohort has no demographics");
    Cohort out;
    out.course_id = cohort.course_id;
    out.offering_id = cohort.offering_id + "[" + cohort.demographic_attribute + "=" +
                      attribute_value + "]";
    out.vocabulary = cohort.vocabulary;
    out.weeks = cohort.weeks;
    out.demographic_attribute = cohort.demographic_attribute;
    for (std::size_t i = 0; i < cohort.size(); ++i) {
        if (cohort.demographic_values[i] != attribute_value) continue;
        out.student_ids.push_back(cohort.student_ids[i]);
        out.raw_counts.push_back(cohort.raw_counts[i]);
        out.series.push_back(cohort.series[i]);
        out.labels.push_back(cohort.labels[i]);
        out.demographic_values.push_back(cohort.demographic_values[i]);
    }
    if (out.student_ids.empty())
        throw std::invalid_argument("filter_group: no students with " +
                                    cohort.demographic_attribute + " = '" + attribute_value +
                                    "'");
    return out;
}

void attach_demographics(Cohort& cohort, const std::string& attribute,
                         const std::vector<std::pair<std::string, std::string>>& values) {
    if (attribute.empty()) throw std::invalid_argument("attach_demographics: empty attribute");
    std::map<std::string, std::string> by_id(values.begin(), values.end());
    cohort.demographic_attribute = attribute;
    cohort.demographic_values.assign(cohort.size(), "");
    for (std::size_t i = 0; i < cohort.size(); ++i) {
        const auto it = by_id.find(cohort.student_ids[i]);
        if (it != by_id.end()) cohort.demographic_values[i] = it->second;
    }
}

void write_weekly_counts_csv(const Cohort& cohort, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path);
    out << "student_id,week,event_type,count\n";
    const std::size_t types = cohort.vocabulary.size();
    for (std::size_t i = 0; i < cohort.size(); ++i) {
        for (int w = 1; w <= cohort.weeks; ++w) {
            for (std::size_t e = 0; e < types; ++e) {
                const long c = cohort.raw_counts[i][static_cast<std::size_t>(w - 1) * types + e];
                if (c == 0) continue;
                out << cohort.student_ids[i] << "," << w << "," << cohort.vocabulary.names[e]
                    << "," << c << "\n";
            }
        }
    }
}

std::vector<std::pair<std::string, std::string>> load_demographics_csv(const std::string& path,
                                                                       std::string* attribute) {
    const auto rows = read_csv(path, "student_id,attribute,value");
    std::vector<std::pair<std::string, std::string>> out;
    std::string attr;
    for (const auto& row : rows) {
        if (attr.empty()) attr = row[1];
        else if (attr != row[1])
            throw std::runtime_error(path + ": mixed attributes '" + attr + "' and '" + row[1] +
                                     "'");
        out.emplace_back(row[0], row[2]);
    }
    if (attribute) *attribute = attr;
    return out;
}

void write_demographics_csv(const Cohort& cohort, const std::string& path) {
    if (!cohort.has_demographics())
        throw std::invalid_argument("write_demographics_csv: cohort has no demographics");
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path);
    out << "student_id,attribute,value\n";
    for (std::size_t i = 0; i < cohort.size(); ++i) {
        if (cohort.demographic_values[i].empty()) continue;
        out << cohort.student_ids[i] << "," << cohort.demographic_attribute << ","
            << cohort.demographic_values[i] << "\n";
    }
}

}  // namespace moocxfer::data
