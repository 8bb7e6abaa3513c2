#include "tdost/verbalizer.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <stdexcept>

namespace tdost::verbalizer {

namespace {

constexpr std::array<std::string_view, 20> kUnits{
    "zero",    "one",     "two",       "three",    "four",     "five",    "six",
    "seven",   "eight",   "nine",      "ten",      "eleven",   "twelve",  "thirteen",
    "fourteen", "fifteen", "sixteen",  "seventeen", "eighteen", "nineteen"};

constexpr std::array<std::string_view, 10> kTens{"",      "",      "twenty",  "thirty", "forty",
                                                 "fifty", "sixty", "seventy", "eighty", "ninety"};

constexpr std::array<std::string_view, 4> kScales{"", "thousand", "million", "billion"};

// 1..99
std::string below_hundred(unsigned n) {
    if (n < 20) return std::string(kUnits[n]);
    std::string out(kTens[n / 10]);
    if (n % 10 != 0) {
        out += '-';
        out += kUnits[n % 10];
    }
    return out;
}

std::string plural(std::int64_t n, std::string_view unit) {
    std::string out = number_to_words(static_cast<std::uint64_t>(n));
    out += ' ';
    out += unit;
    if (n != 1) out += 's';
    return out;
}

}  // namespace

PeriodOfDay period_of_day(int hour) {
    if (hour < 0 || hour > 23) throw std::out_of_range("hour outside [0, 24)");
    if (hour < 5) return PeriodOfDay::Night;
    if (hour < 8) return PeriodOfDay::EarlyMorning;
    if (hour < 12) return PeriodOfDay::Morning;
    if (hour < 17) return PeriodOfDay::Afternoon;
    if (hour < 21) return PeriodOfDay::Evening;
    return PeriodOfDay::LateNight;
}

std::string_view period_name(PeriodOfDay p) {
    switch (p) {
        case PeriodOfDay::Night: return "Night";
        case PeriodOfDay::EarlyMorning: return "Early Morning";
        case PeriodOfDay::Morning: return "Morning";
        case PeriodOfDay::Afternoon: return "Afternoon";
        case PeriodOfDay::Evening: return "Evening";
        case PeriodOfDay::LateNight: return "Late Night";
    }
    return "";
}

std::string number_to_words(std::uint64_t n) {
    if (n == 0) return "zero";
    if (n >= 1'000'000'000'000ULL) throw std::out_of_range("number_to_words: value too large");

    // Split into base-1000 groups, most significant first.
    std::array<unsigned, 4> groups{};
    for (std::size_t g = 0; g < groups.size(); ++g) {
        groups[g] = static_cast<unsigned>(n % 1000);
        n /= 1000;
    }

    std::string out;
    auto append = [&out](std::string_view word) {
        if (!out.empty()) out += ' ';
        out += word;
    };
    for (std::size_t g = groups.size(); g-- > 0;) {
        const unsigned v = groups[g];
        if (v == 0) continue;
        const unsigned hundreds = v / 100;
        const unsigned rest = v % 100;
        if (hundreds) {
            append(kUnits[hundreds]);
            append("hundred");
        }
        if (rest) {
            // British usage: "and" before the last two digits of a group that has hundreds,
            // or of the final group when larger groups precede it.
            if (hundreds || (g == 0 && !out.empty())) append("and");
            append(below_hundred(rest));
        }
        if (g > 0) append(kScales[g]);
    }
    return out;
}

std::string decimal_to_words(std::string_view decimal) {
    if (!decimal.empty() && decimal.front() == '+') decimal.remove_prefix(1);
    if (decimal.empty() || decimal.front() == '-')
        throw std::invalid_argument("decimal_to_words: expected a non-negative decimal");
    const auto dot = decimal.find('.');
    const auto int_part = decimal.substr(0, dot);
    auto frac = dot == std::string_view::npos ? std::string_view{} : decimal.substr(dot + 1);
    auto digits_only = [](std::string_view s) {
        for (char c : s)
            if (c < '0' || c > '9') return false;
        return true;
    };
    if (int_part.empty() || !digits_only(int_part) || !digits_only(frac))
        throw std::invalid_argument("decimal_to_words: not a decimal: " + std::string(decimal));

    std::uint64_t whole = 0;
    auto stripped = int_part;
    while (stripped.size() > 1 && stripped.front() == '0') stripped.remove_prefix(1);
    const auto [ptr, ec] = std::from_chars(stripped.data(), stripped.data() + stripped.size(), whole);
    if (ec != std::errc{}) throw std::out_of_range("decimal_to_words: value too large");

    std::string out = number_to_words(whole);
    while (!frac.empty() && frac.back() == '0') frac.remove_suffix(1);
    if (!frac.empty()) {
        out += " point";
        for (char c : frac) {
            out += ' ';
            out += kUnits[static_cast<std::size_t>(c - '0')];
        }
    }
    return out;
}

std::string real_to_words(double value) {
    if (!std::isfinite(value) || value < 0.0)
        throw std::invalid_argument("real_to_words: expected a non-negative finite value");
    std::array<char, 64> buf{};
    const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), value, std::chars_format::fixed);
    return decimal_to_words(std::string_view(buf.data(), static_cast<std::size_t>(res.ptr - buf.data())));
}

std::string clock_to_words(int hour, int minute) {
    if (hour < 0 || hour > 23 || minute < 0 || minute > 59) throw std::out_of_range("clock_to_words: bad time");
    int h12 = hour % 12;
    if (h12 == 0) h12 = 12;
    std::string out = "at " + plural(h12, "hour");
    if (minute != 0) out += ' ' + plural(minute, "minute");
    if (hour == 12 && minute == 0) return out;
    out += hour < 12 ? " AM" : " PM";
    return out;
}

std::string lag_phrase(std::int64_t seconds, LagStyle style) {
    if (seconds < 0) throw std::invalid_argument("lag_phrase: negative lag");
    if (style == LagStyle::Prefix) return "After " + plural(seconds, "second") + ", ";
    return " " + plural(seconds, "second") + " later";
}

std::string_view weekday_name(std::chrono::sys_days day) {
    static constexpr std::array<std::string_view, 7> kNames{"Sunday",   "Monday", "Tuesday", "Wednesday",
                                                            "Thursday", "Friday", "Saturday"};
    return kNames[std::chrono::weekday{day}.c_encoding()];
}

}  // namespace tdost::verbalizer
