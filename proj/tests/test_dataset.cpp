// Ingestion, aggregation, normalization, dropout labeling, weekly slices.
// Oracles: a naive per-(student,week,type) recount and a linear scan of the
// event log for dropout weeks.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>

#include "doctest.h"
#include "moocxfer/dataset.hpp"
#include "moocxfer/rng.hpp"

using namespace moocxfer;
using namespace moocxfer::data;

namespace {

std::string temp_path(const std::string& name) {
    return (std::filesystem::temp_directory_path() / name).string();
}

EventVocabulary small_vocab() {
    EventVocabulary v;
    v.names = {"play_video", "problem_check", "page_view"};
    v.video_event_flags = {true, false, false};
    return v;
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path);
    out << content;
}

}  // namespace

TEST_CASE("raw timestamps map onto half-open weeks") {
    const std::string path = temp_path("raw_events.csv");
    write_file(path,
               "student_id,timestamp,event_type\n"
               "s1,2024-01-04T10:00:00,play_video\n"   // day 3 -> week 1
               "s1,2024-01-08T00:00:00,play_video\n"   // exactly day 7 -> week 2
               "s2,2024-01-01T00:00:00,problem_check\n");
    IngestStats stats;
    auto events = ingest_events(path, IngestFormat::RawTimestamped, small_vocab(), "2024-01-01",
                                9, 7, &stats);
    REQUIRE(events.size() == 3);
    CHECK(events[0].record.week == 1);
    CHECK(events[1].record.week == 2);
    CHECK(events[2].record.week == 1);
    CHECK(stats.rows == 3);
}

TEST_CASE("unknown types are counted and skipped; late events dropped") {
    const std::string path = temp_path("raw_events2.csv");
    write_file(path,
               "student_id,timestamp,event_type\n"
               "s1,2024-01-02,mystery_event\n"
               "s1,2024-03-30,play_video\n"  // beyond week 9
               "s1,2024-01-02,play_video\n");
    IngestStats stats;
    auto events = ingest_events(path, IngestFormat::RawTimestamped, small_vocab(), "2024-01-01",
                                9, 7, &stats);
    CHECK(events.size() == 1);
    CHECK(stats.unknown_event_type == 1);
    CHECK(stats.dropped_after_course == 1);
}

TEST_CASE("malformed rows report the line number") {
    const std::string path = temp_path("raw_events3.csv");
    write_file(path,
               "student_id,timestamp,event_type\n"
               "s1,2024-01-02,play_video\n"
               "s1,not-a-date,play_video\n");
    try {
        ingest_events(path, IngestFormat::RawTimestamped, small_vocab(), "2024-01-01", 9);
        FAIL("expected parse error");
    } catch (const std::runtime_error& e) {
        CHECK(std::string(e.what()).find(":3") != std::string::npos);
    }
}

TEST_CASE("weekly counts round-trip through export and import") {
    // 1000 random events -> cohort -> CSV -> cohort, bitwise equal counts.
    Rng rng(404);
    const EventVocabulary vocab = small_vocab();
    std::vector<CountedEvent> events;
    for (int i = 0; i < 1000; ++i) {
        EventRecord r;
        r.student_id = "s" + std::to_string(rng() % 37);
        r.week = static_cast<int>(rng() % 9) + 1;
        r.event_type = vocab.names[rng() % vocab.size()];
        events.push_back({r, 1});
    }
    Cohort original =
        build_cohort("c", "o", vocab, 9, aggregate_weekly(events, vocab, 9));
    const std::string path = temp_path("weekly_roundtrip.csv");
    write_weekly_counts_csv(original, path);

    auto reread = ingest_events(path, IngestFormat::WeeklyCounts, vocab, "", 9);
    Cohort rebuilt = build_cohort("c", "o", vocab, 9, aggregate_weekly(reread, vocab, 9));
    REQUIRE(rebuilt.size() == original.size());
    for (std::size_t i = 0; i < original.size(); ++i) {
        CHECK(rebuilt.student_ids[i] == original.student_ids[i]);
        CHECK(rebuilt.raw_counts[i] == original.raw_counts[i]);
    }
}

TEST_CASE("single event lands in the right cell; empty stream gives empty cohort") {
    const EventVocabulary vocab = small_vocab();
    std::vector<CountedEvent> events = {{{"s1", 2, "play_video"}, 1}};
    auto counts = aggregate_weekly(events, vocab, 9);
    REQUIRE(counts.size() == 1);
    for (int w = 1; w <= 9; ++w)
        for (std::size_t e = 0; e < 3; ++e)
            CHECK(counts[0].counts[(w - 1) * 3 + e] == ((w == 2 && e == 0) ? 1 : 0));

    CHECK(aggregate_weekly({}, vocab, 9).empty());
}

TEST_CASE("random event stream matches a brute-force recount") {
    Rng rng(777);
    const EventVocabulary vocab = small_vocab();
    std::vector<CountedEvent> events;
    std::map<std::string, std::map<std::pair<int, std::string>, long>> oracle;
    for (int i = 0; i < 500; ++i) {
        const std::string id = "s" + std::to_string(rng() % 20);
        const int week = static_cast<int>(rng() % 6) + 1;
        const std::string type = vocab.names[rng() % 3];
        events.push_back({{id, week, type}, 1});
        oracle[id][{week, type}] += 1;
    }
    auto counts = aggregate_weekly(events, vocab, 6);
    REQUIRE(counts.size() == oracle.size());
    for (const auto& sc : counts) {
        for (int w = 1; w <= 6; ++w) {
            for (std::size_t e = 0; e < 3; ++e) {
                const auto it = oracle[sc.student_id].find({w, vocab.names[e]});
                const long expect = it == oracle[sc.student_id].end() ? 0 : it->second;
                CHECK(sc.counts[(w - 1) * 3 + e] == expect);
            }
        }
    }
}

TEST_CASE("normalization: constant positive counts become 1.0, zero column stays zero") {
    const EventVocabulary vocab = small_vocab();
    std::vector<StudentCounts> counts;
    for (int i = 0; i < 4; ++i) {
        StudentCounts sc;
        sc.student_id = "s" + std::to_string(i);
        sc.counts.assign(2 * 3, 0);
        for (int w = 0; w < 2; ++w) sc.counts[w * 3 + 0] = 5;  // constant type 0
        sc.counts[0 * 3 + 1] = i;                               // varying type 1
        // type 2 all zero
        counts.push_back(sc);
    }
    auto series = normalize(counts, vocab, 2);
    double max1 = 0;
    for (const auto& s : series) {
        for (int w = 1; w <= 2; ++w) {
            CHECK(s.at(w, 0) == doctest::Approx(1.0));
            CHECK(s.at(w, 2) == 0.0);
            max1 = std::max(max1, s.at(w, 1));
        }
    }
    CHECK(max1 == doctest::Approx(1.0));  // the type-1 maximum hits exactly 1
}

TEST_CASE("normalize is idempotent: series maxima are already 1, renormalizing is identity") {
    Rng rng(11);
    const EventVocabulary vocab = small_vocab();
    std::vector<StudentCounts> counts;
    for (int i = 0; i < 10; ++i) {
        StudentCounts sc;
        sc.student_id = "s" + std::to_string(i);
        for (int j = 0; j < 6; ++j) sc.counts.push_back(static_cast<long>(rng() % 10));
        counts.push_back(sc);
    }
    auto series = normalize(counts, vocab, 2);
    // per-type maxima of the normalized values are exactly 1 where the type
    // occurs, so dividing by them changes nothing
    std::vector<double> maxima(3, 0.0);
    for (const auto& s : series)
        for (int j = 0; j < 6; ++j) maxima[j % 3] = std::max(maxima[j % 3], s.values[j]);
    for (double m : maxima)
        if (m > 0.0) CHECK(m == doctest::Approx(1.0).epsilon(1e-15));
    for (const auto& s : series)
        for (int j = 0; j < 6; ++j)
            if (maxima[j % 3] > 0.0)
                CHECK(s.values[j] / maxima[j % 3] == doctest::Approx(s.values[j]).epsilon(1e-15));

    // integer scale invariance: tripling every count leaves the series unchanged
    std::vector<StudentCounts> scaled = counts;
    for (auto& sc : scaled)
        for (long& c : sc.counts) c *= 3;
    auto series_scaled = normalize(scaled, vocab, 2);
    for (std::size_t i = 0; i < series.size(); ++i)
        for (int j = 0; j < 6; ++j) CHECK(series[i].values[j] == series_scaled[i].values[j]);
}

TEST_CASE("dropout labeling basics") {
    const EventVocabulary vocab = small_vocab();

    StudentCounts left;  // last video event in week 3
    left.student_id = "left";
    left.counts.assign(9 * 3, 0);
    left.counts[(1 - 1) * 3 + 0] = 2;
    left.counts[(3 - 1) * 3 + 0] = 1;
    left.counts[(8 - 1) * 3 + 1] = 4;  // later non-video activity does not matter

    StudentCounts stayed;  // video in the final week
    stayed.student_id = "stayed";
    stayed.counts.assign(9 * 3, 0);
    stayed.counts[(9 - 1) * 3 + 0] = 1;

    StudentCounts never;  // no video events at all
    never.student_id = "never";
    never.counts.assign(9 * 3, 0);
    never.counts[(5 - 1) * 3 + 2] = 7;

    auto labels = label_dropout({left, stayed, never}, vocab, 9);
    CHECK(labels[0].dropout_week == 4);
    const std::vector<bool> expect = {false, false, false, true, true, true, true, true, true};
    CHECK(labels[0].y == expect);
    CHECK(labels[1].dropout_week == 10);
    for (bool b : labels[1].y) CHECK_FALSE(b);
    CHECK(labels[2].dropout_week == 2);

    for (const auto& l : labels) {
        CHECK_FALSE(l.y[0]);  // no dropout in week 1
        for (std::size_t k = 1; k < l.y.size(); ++k) CHECK(l.y[k] >= l.y[k - 1]);  // monotone
    }
}

TEST_CASE("200 random students match a linear event-log scan") {
    Rng rng(2024);
    const EventVocabulary vocab = small_vocab();
    const int weeks = 7;
    std::vector<CountedEvent> events;
    std::map<std::string, int> oracle_last_video;
    for (int s = 0; s < 200; ++s) {
        const std::string id = "stu" + std::to_string(s);
        oracle_last_video[id] = 0;
        const int n_events = 1 + static_cast<int>(rng() % 12);
        for (int i = 0; i < n_events; ++i) {
            const int week = 1 + static_cast<int>(rng() % weeks);
            const std::string type = vocab.names[rng() % 3];
            events.push_back({{id, week, type}, 1});
            if (type == "play_video")
                oracle_last_video[id] = std::max(oracle_last_video[id], week);
        }
    }
    auto counts = aggregate_weekly(events, vocab, weeks);
    auto labels = label_dropout(counts, vocab, weeks);
    REQUIRE(counts.size() == labels.size());
    for (std::size_t i = 0; i < counts.size(); ++i) {
        const int expect = std::max(2, oracle_last_video[counts[i].student_id] + 1);
        CHECK(labels[i].dropout_week == expect);
    }
}

namespace {

Cohort demo_cohort() {
    Rng rng(31);
    const EventVocabulary vocab = small_vocab();
    std::vector<CountedEvent> events;
    for (int s = 0; s < 40; ++s) {
        const std::string id = (s < 10 ? "s0" : "s") + std::to_string(s);
        const int active_until = 1 + static_cast<int>(rng() % 6);
        for (int w = 1; w <= active_until; ++w) {
            events.push_back({{id, w, "play_video"}, 1 + static_cast<long>(rng() % 3)});
            if (rng() % 2) events.push_back({{id, w, "problem_check"}, 1});
        }
    }
    return build_cohort("course", "run", vocab, 6, aggregate_weekly(events, vocab, 6));
}

}  // namespace

TEST_CASE("weekly slices expose the right history and filter") {
    Cohort cohort = demo_cohort();

    WeekSlice w2 = slice_for_week(cohort, 2);
    CHECK(w2.features.shape == Shape{w2.student_ids.size(), 1, 3});

    WeekSlice w6 = slice_for_week(cohort, 6);
    CHECK(w6.features.dim(1) == 5);

    // with the at-risk filter every student is active at week-1
    for (std::size_t i = 0; i < w6.student_ids.size(); ++i) {
        const auto row = std::find(cohort.student_ids.begin(), cohort.student_ids.end(),
                                   w6.student_ids[i]) -
                         cohort.student_ids.begin();
        CHECK_FALSE(cohort.labels[row].y[4]);
    }

    // consecutive slices agree on their shared history prefix
    WeekSlice w5 = slice_for_week(cohort, 5);
    for (std::size_t i = 0; i < w6.student_ids.size(); ++i) {
        const auto it = std::find(w5.student_ids.begin(), w5.student_ids.end(), w6.student_ids[i]);
        if (it == w5.student_ids.end()) continue;
        const std::size_t j = static_cast<std::size_t>(it - w5.student_ids.begin());
        for (std::size_t t = 0; t < 4 * 3; ++t)
            CHECK(w6.features.values[i * 5 * 3 + t] == w5.features.values[j * 4 * 3 + t]);
    }

    CHECK_THROWS(slice_for_week(cohort, 1));
    CHECK_THROWS(slice_for_week(cohort, 7));

    // without the filter, all students appear
    CHECK(slice_for_week(cohort, 6, false).student_ids.size() == cohort.size());
}

TEST_CASE("group filtering partitions the demographic students") {
    Cohort cohort = demo_cohort();
    std::vector<std::pair<std::string, std::string>> demo;
    for (std::size_t i = 0; i < cohort.size(); ++i)
        demo.emplace_back(cohort.student_ids[i], i % 3 == 0 ? "a" : (i % 3 == 1 ? "b" : "c"));
    attach_demographics(cohort, "background", demo);

    std::size_t total = 0;
    for (const std::string& v : {"a", "b", "c"}) total += filter_group(cohort, v).size();
    CHECK(total == cohort.size());

    CHECK_THROWS(filter_group(cohort, "zzz"));
}

TEST_CASE("weekly dropout percentages from labels equal a direct log recount") {
    Cohort cohort = demo_cohort();
    // direct recount: a student drops in week k iff their last video week is k-1
    std::vector<int> direct(static_cast<std::size_t>(cohort.weeks) + 2, 0);
    for (std::size_t i = 0; i < cohort.size(); ++i) {
        int last_video = 0;
        for (int w = 1; w <= cohort.weeks; ++w)
            if (cohort.raw_counts[i][(w - 1) * 3 + 0] > 0) last_video = w;
        direct[static_cast<std::size_t>(std::max(2, last_video + 1))]++;
    }
    for (int k = 2; k <= cohort.weeks; ++k) {
        int from_labels = 0;
        for (const auto& l : cohort.labels)
            if (l.dropout_week == k) from_labels++;
        CHECK(from_labels == direct[static_cast<std::size_t>(k)]);
    }
}

TEST_CASE("vocabulary files round-trip and flag video events") {
    const std::string path = temp_path("vocab.txt");
    EventVocabulary v = EventVocabulary::defaults();
    v.save(path);
    EventVocabulary loaded = EventVocabulary::load(path);
    CHECK(loaded.names == v.names);
    CHECK(loaded.video_event_flags == v.video_event_flags);
    CHECK(loaded.video_count() == 6);
    CHECK(loaded.size() == 13);
}
