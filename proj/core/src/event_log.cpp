#include "tdost/event_log.hpp"

#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>

#include "tdost/error.hpp"

namespace tdost {

namespace {

using namespace std::chrono;

std::vector<std::string_view> split_ws(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
        const std::size_t start = i;
        while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i]))) ++i;
        if (i > start) out.push_back(line.substr(start, i - start));
    }
    return out;
}

bool all_digits(std::string_view s) {
    if (s.empty()) return false;
    for (char c : s)
        if (c < '0' || c > '9') return false;
    return true;
}

int to_int(std::string_view s) {
    int v = 0;
    std::from_chars(s.data(), s.data() + s.size(), v);
    return v;
}

std::string upper(std::string_view s) {
    std::string out(s);
    for (auto& c : out) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    return out;
}

// Canonical decimal text: no sign for zero, no redundant zeros. Empty result means "not a decimal".
std::string canonical_decimal(std::string_view tok) {
    std::string_view s = tok;
    bool negative = false;
    if (!s.empty() && (s.front() == '+' || s.front() == '-')) {
        negative = s.front() == '-';
        s.remove_prefix(1);
    }
    const auto dot = s.find('.');
    std::string_view int_part = s.substr(0, dot);
    std::string_view frac_part = dot == std::string_view::npos ? std::string_view{} : s.substr(dot + 1);
    if (!all_digits(int_part)) return {};
    if (dot != std::string_view::npos && !all_digits(frac_part)) return {};

    while (int_part.size() > 1 && int_part.front() == '0') int_part.remove_prefix(1);
    while (!frac_part.empty() && frac_part.back() == '0') frac_part.remove_suffix(1);

    std::string out;
    if (negative && !(int_part == "0" && frac_part.empty())) out += '-';
    out += int_part;
    if (!frac_part.empty()) {
        out += '.';
        out += frac_part;
    }
    return out;
}

}  // namespace

int Timestamp::hour() const { return static_cast<int>(duration_cast<hours>(time_of_day).count()); }
int Timestamp::minute() const { return static_cast<int>(duration_cast<minutes>(time_of_day).count() % 60); }
int Timestamp::second() const { return static_cast<int>(duration_cast<seconds>(time_of_day).count() % 60); }

double Timestamp::epoch_seconds() const {
    return static_cast<double>(date.time_since_epoch().count()) * 86400.0 +
           static_cast<double>(time_of_day.count()) * 1e-9;
}

std::string Timestamp::to_string() const {
    const year_month_day ymd{date};
    std::ostringstream os;
    os << std::setfill('0') << std::setw(4) << static_cast<int>(ymd.year()) << '-' << std::setw(2)
       << static_cast<unsigned>(ymd.month()) << '-' << std::setw(2) << static_cast<unsigned>(ymd.day()) << ' '
       << std::setw(2) << hour() << ':' << std::setw(2) << minute() << ':' << std::setw(2) << second();
    if (fraction_digits > 0) {
        auto frac = (time_of_day % seconds{1}).count();  // nanoseconds
        for (int i = fraction_digits; i < 9; ++i) frac /= 10;
        os << '.' << std::setw(fraction_digits) << frac;
    }
    return os.str();
}

std::int64_t floor_seconds_between(const Timestamp& earlier, const Timestamp& later) {
    const auto day_ns = duration_cast<nanoseconds>(later.date - earlier.date);
    const auto diff = day_ns + (later.time_of_day - earlier.time_of_day);
    return floor<seconds>(diff).count();
}

Timestamp parse_timestamp(std::string_view date, std::string_view time, std::size_t line_no) {
    // YYYY-MM-DD
    if (date.size() != 10 || date[4] != '-' || date[7] != '-' || !all_digits(date.substr(0, 4)) ||
        !all_digits(date.substr(5, 2)) || !all_digits(date.substr(8, 2)))
        throw ParseError(line_no, "malformed date '" + std::string(date) + "'");
    const year_month_day ymd{year{to_int(date.substr(0, 4))}, month{static_cast<unsigned>(to_int(date.substr(5, 2)))},
                             day{static_cast<unsigned>(to_int(date.substr(8, 2)))}};
    if (!ymd.ok()) throw ParseError(line_no, "invalid calendar date '" + std::string(date) + "'");

    // HH:MM:SS[.f{1,9}]
    if (time.size() < 8 || time[2] != ':' || time[5] != ':' || !all_digits(time.substr(0, 2)) ||
        !all_digits(time.substr(3, 2)) || !all_digits(time.substr(6, 2)))
        throw ParseError(line_no, "malformed time '" + std::string(time) + "'");
    const int h = to_int(time.substr(0, 2));
    const int m = to_int(time.substr(3, 2));
    const int s = to_int(time.substr(6, 2));
    if (h > 23 || m > 59 || s > 59) throw ParseError(line_no, "time out of range '" + std::string(time) + "'");

    Timestamp ts;
    ts.date = sys_days{ymd};
    ts.time_of_day = hours{h} + minutes{m} + seconds{s};
    if (time.size() > 8) {
        const auto frac = time.substr(9);
        if (time[8] != '.' || !all_digits(frac) || frac.size() > 9)
            throw ParseError(line_no, "malformed fractional seconds '" + std::string(time) + "'");
        std::int64_t ns = 0;
        std::from_chars(frac.data(), frac.data() + frac.size(), ns);
        for (std::size_t i = frac.size(); i < 9; ++i) ns *= 10;
        ts.time_of_day += nanoseconds{ns};
        ts.fraction_digits = static_cast<int>(frac.size());
    }
    return ts;
}

SensorValue SensorValue::classify(std::string_view token) {
    static constexpr std::array<std::string_view, 4> kBinary{"ON", "OFF", "OPEN", "CLOSE"};
    SensorValue v;
    v.token = std::string(token);
    const std::string up = upper(token);
    for (auto b : kBinary) {
        if (up == b) {
            v.kind = ValueKind::Binary;
            v.normalized = up;
            return v;
        }
    }
    if (auto canon = canonical_decimal(token); !canon.empty()) {
        v.kind = ValueKind::Numeric;
        v.normalized = canon;
        std::from_chars(canon.data(), canon.data() + canon.size(), v.number);
        return v;
    }
    v.kind = ValueKind::Other;
    v.normalized = v.token;
    return v;
}

SensorEvent parse_line(std::string_view line, std::size_t line_no) {
    const auto fields = split_ws(line);
    if (fields.size() < 4)
        throw ParseError(line_no, "expected at least 4 fields (date time sensor value), got " +
                                      std::to_string(fields.size()));
    if (fields.size() == 5)
        throw ParseError(line_no, "activity annotation '" + std::string(fields[4]) + "' lacks a begin/end marker");

    SensorEvent ev;
    ev.timestamp = parse_timestamp(fields[0], fields[1], line_no);
    ev.sensor_id = std::string(fields[2]);
    ev.value = SensorValue::classify(fields[3]);

    if (fields.size() > 5) {
        const auto marker = fields.back();
        Annotation ann;
        if (marker == "begin")
            ann.marker = Marker::Begin;
        else if (marker == "end")
            ann.marker = Marker::End;
        else
            throw ParseError(line_no, "annotation marker '" + std::string(marker) + "' is not begin/end");
        for (std::size_t i = 4; i + 1 < fields.size(); ++i) {
            if (!ann.activity.empty()) ann.activity += ' ';
            ann.activity += fields[i];
        }
        ev.annotation = std::move(ann);
    }
    return ev;
}

ParsedLog parse_log(std::istream& in, std::string home_id, ParseOptions options) {
    ParsedLog out;
    out.log.home_id = std::move(home_id);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line_no == 1 && line.rfind("\xEF\xBB\xBF", 0) == 0) line.erase(0, 3);
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.find_first_not_of(" \t\v\f") == std::string::npos) {
            ++out.summary.blank;
            continue;
        }
        try {
            auto ev = parse_line(line, line_no);
            if (!out.log.events.empty() && ev.timestamp < out.log.events.back().timestamp)
                ++out.summary.non_monotone;
            out.log.events.push_back(std::move(ev));
        } catch (const ParseError& e) {
            if (!options.lenient) throw;
            ++out.summary.skipped;
            out.skipped_reasons.emplace_back(e.what());
        }
    }
    out.summary.lines = line_no;
    out.summary.events = out.log.events.size();
    return out;
}

ParsedLog parse_log_file(const std::string& path, std::string home_id, ParseOptions options) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open log file '" + path + "'");
    return parse_log(in, std::move(home_id), options);
}

std::string ParseSummary::to_json() const {
    std::ostringstream os;
    os << "{\"lines\": " << lines << ", \"events\": " << events << ", \"blank\": " << blank
       << ", \"skipped\": " << skipped << ", \"non_monotone\": " << non_monotone << "}";
    return os.str();
}

std::string format_event(const SensorEvent& event) {
    std::string out = event.timestamp.to_string();
    out += ' ';
    out += event.sensor_id;
    out += ' ';
    out += event.value.token;
    if (event.annotation) {
        out += ' ';
        out += event.annotation->activity;
        out += event.annotation->marker == Marker::Begin ? " begin" : " end";
    }
    return out;
}

void write_log(std::ostream& out, const EventLog& log) {
    for (const auto& ev : log.events) out << format_event(ev) << '\n';
}

}  // namespace tdost
