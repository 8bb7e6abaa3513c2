#pragma once

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace tdost {

/// Naive local date-time as written in CASAS logs: `YYYY-MM-DD HH:MM:SS[.f...]`.
/// The number of fractional digits is kept so a record prints back exactly.
struct Timestamp {
    std::chrono::sys_days date{};
    std::chrono::nanoseconds time_of_day{0};
    int fraction_digits = 0;

    int hour() const;
    int minute() const;
    int second() const;

    /// Seconds since the civil epoch, including the sub-second part.
    double epoch_seconds() const;

    std::string to_string() const;

    // Ordering ignores fraction_digits: "12:00:00" and "12:00:00.000" are the same instant.
    friend bool operator==(const Timestamp& a, const Timestamp& b) {
        return a.date == b.date && a.time_of_day == b.time_of_day;
    }
    friend bool operator<(const Timestamp& a, const Timestamp& b) {
        return a.date != b.date ? a.date < b.date : a.time_of_day < b.time_of_day;
    }
};

/// Whole seconds between two instants, floored. Negative when `later` precedes `earlier`.
std::int64_t floor_seconds_between(const Timestamp& earlier, const Timestamp& later);

/// Throws ParseError(line_no) on malformed input.
Timestamp parse_timestamp(std::string_view date, std::string_view time, std::size_t line_no = 0);

enum class ValueKind { Binary, Numeric, Other };

struct SensorValue {
    ValueKind kind = ValueKind::Other;
    std::string token;       // verbatim source token
    std::string normalized;  // upper-cased for Binary, canonical decimal for Numeric, verbatim otherwise
    double number = 0.0;     // meaningful only for Numeric

    static SensorValue classify(std::string_view token);

    friend bool operator==(const SensorValue&, const SensorValue&) = default;
};

enum class Marker { Begin, End };

struct Annotation {
    std::string activity;
    Marker marker = Marker::Begin;

    friend bool operator==(const Annotation&, const Annotation&) = default;
};

struct SensorEvent {
    Timestamp timestamp;
    std::string sensor_id;
    SensorValue value;
    std::optional<Annotation> annotation;

    friend bool operator==(const SensorEvent& a, const SensorEvent& b) {
        return a.timestamp == b.timestamp && a.timestamp.fraction_digits == b.timestamp.fraction_digits &&
               a.sensor_id == b.sensor_id && a.value == b.value && a.annotation == b.annotation;
    }
};

struct EventLog {
    std::string home_id;
    std::vector<SensorEvent> events;
};

struct ParseOptions {
    bool lenient = false;
};

struct ParseSummary {
    std::size_t lines = 0;
    std::size_t events = 0;
    std::size_t blank = 0;
    std::size_t skipped = 0;       // malformed lines dropped in lenient mode
    std::size_t non_monotone = 0;  // events whose timestamp precedes their predecessor

    std::string to_json() const;
};

struct ParsedLog {
    EventLog log;
    ParseSummary summary;
    std::vector<std::string> skipped_reasons;
};

/// One whitespace-delimited record: DATE TIME SENSOR VALUE [ACTIVITY... begin|end].
/// Multi-word activity names are accepted; the last field must then be the marker.
SensorEvent parse_line(std::string_view line, std::size_t line_no);

ParsedLog parse_log(std::istream& in, std::string home_id, ParseOptions options = {});
ParsedLog parse_log_file(const std::string& path, std::string home_id, ParseOptions options = {});

std::string format_event(const SensorEvent& event);
void write_log(std::ostream& out, const EventLog& log);

}  // namespace tdost
