#pragma once

// Clickstream ingestion and cohort construction: weekly aggregation of typed
// events per student, per-course max normalization into [0,1] series, dropout
// labels derived from video activity, and per-week training slices.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "moocxfer/tensor.hpp"

namespace moocxfer::data {

using moocxfer::Tensor;

struct EventVocabulary {
    std::vector<std::string> names;
    std::vector<bool> video_event_flags;

    std::size_t size() const { return names.size(); }
    std::optional<std::size_t> index_of(const std::string& name) const;
    std::size_t video_count() const;
    void validate() const;  // unique names, at least one video type

    // One event type per line; a '*' prefix marks video events.
    static EventVocabulary load(const std::string& path);
    void save(const std::string& path) const;

    // The thirteen default event types (six of them video events).
    static EventVocabulary defaults();
};

struct EventRecord {
    std::string student_id;
    int week = 0;  // 1-based
    std::string event_type;
};

// Pre-aggregated rows carry a multiplicity; raw rows have count 1.
struct CountedEvent {
    EventRecord record;
    long count = 1;
};

enum class IngestFormat { RawTimestamped, WeeklyCounts };

struct IngestStats {
    std::size_t rows = 0;
    std::size_t dropped_after_course = 0;  // events beyond week T
    std::size_t unknown_event_type = 0;
};

// Raw log CSV: header "student_id,timestamp,event_type", ISO-8601 timestamps.
// Weekly counts CSV: header "student_id,week,event_type,count".
// Raw timestamps are mapped onto half-open weeks: week k covers
// [course_start + (k-1)*week_length, course_start + k*week_length).
std::vector<CountedEvent> ingest_events(const std::string& path, IngestFormat format,
                                        const EventVocabulary& vocabulary,
                                        const std::string& course_start_iso, int weeks,
                                        int week_length_days = 7, IngestStats* stats = nullptr);

// Raw weekly count matrices per student, weeks x event types, row-major.
struct StudentCounts {
    std::string student_id;
    std::vector<long> counts;  // [weeks * types]
};

// Students are returned sorted by id; students with zero events are excluded.
std::vector<StudentCounts> aggregate_weekly(const std::vector<CountedEvent>& events,
                                            const EventVocabulary& vocabulary, int weeks);

struct StudentSeries {
    std::string student_id;
    int weeks = 0;
    int types = 0;
    std::vector<double> values;  // [weeks * types], all in [0,1]

    double at(int week, std::size_t type) const {  // week is 1-based
        return values[static_cast<std::size_t>(week - 1) * types + type];
    }
};

// Divides every count by the per-event-type maximum over all students and
// weeks of the cohort; all-zero event types stay zero.
std::vector<StudentSeries> normalize(const std::vector<StudentCounts>& counts,
                                     const EventVocabulary& vocabulary, int weeks);

struct DropoutLabels {
    std::vector<bool> y;      // length T, y[0] always false, monotone
    int dropout_week = 0;     // in [2, T+1]; T+1 = never dropped out

    static DropoutLabels from_dropout_week(int dropout_week, int weeks);
};

// dropout week = (last week with any video-flagged event) + 1, at least 2;
// students without video events get week 2.
std::vector<DropoutLabels> label_dropout(const std::vector<StudentCounts>& counts,
                                         const EventVocabulary& vocabulary, int weeks);

struct Cohort {
    std::string course_id;
    std::string offering_id;
    EventVocabulary vocabulary;
    int weeks = 0;
    std::vector<std::string> student_ids;       // sorted, defines row order
    std::vector<std::vector<long>> raw_counts;  // aligned, [weeks * types]
    std::vector<StudentSeries> series;          // aligned
    std::vector<DropoutLabels> labels;          // aligned
    std::string demographic_attribute;          // empty when absent
    std::vector<std::string> demographic_values;  // aligned; empty when absent

    std::size_t size() const { return student_ids.size(); }
    bool has_demographics() const { return !demographic_attribute.empty(); }
    std::string name() const { return course_id + "/" + offering_id; }
};

Cohort build_cohort(std::string course_id, std::string offering_id, EventVocabulary vocabulary,
                    int weeks, std::vector<StudentCounts> counts);

// Labeled per-week training view: features are the weeks before `week`,
// labels are the dropout flags of `week` itself.
struct WeekSlice {
    int week = 0;
    Tensor features;  // [n, week-1, types]
    std::vector<int> labels;
    std::vector<std::string> student_ids;
};

// The same view with the labels withheld; what transfer methods may see of a
// target course.
struct FeatureSlice {
    int week = 0;
    Tensor features;
    std::vector<std::string> student_ids;
};

// at_risk_only keeps students still active at week-1 (label false there).
WeekSlice slice_for_week(const Cohort& cohort, int week, bool at_risk_only = true);
FeatureSlice strip_labels(const WeekSlice& slice);

// Sub-cohort of students whose demographic value matches; throws on an empty
// result or when demographics are absent.
Cohort filter_group(const Cohort& cohort, const std::string& attribute_value);

void attach_demographics(Cohort& cohort, const std::string& attribute,
                         const std::vector<std::pair<std::string, std::string>>& values);

// CSV round-trips. Weekly counts header: student_id,week,event_type,count.
// Demographics header: student_id,attribute,value.
void write_weekly_counts_csv(const Cohort& cohort, const std::string& path);
std::vector<std::pair<std::string, std::string>> load_demographics_csv(const std::string& path,
                                                                       std::string* attribute);
void write_demographics_csv(const Cohort& cohort, const std::string& path);

}  // namespace moocxfer::data
