#pragma once

#include <chrono>
#include <cstdint>
#include <string>
#include <string_view>

// English rendering of the numbers, clock times, lags and calendar bins that appear in
// sensor-trigger sentences. Hours are always spelled out; plurals follow one rule
// ("one second", "two seconds").

namespace tdost::verbalizer {

enum class PeriodOfDay { Night, EarlyMorning, Morning, Afternoon, Evening, LateNight };

/// Half-open hour bins: [0,5) [5,8) [8,12) [12,17) [17,21) [21,24).
PeriodOfDay period_of_day(int hour);
std::string_view period_name(PeriodOfDay p);

/// "twenty-two", "one hundred and twenty", "one million". Throws std::out_of_range above 10^12 - 1.
std::string number_to_words(std::uint64_t n);

/// Decimal text ("22.5", "007", "24.0") to words: integer part as above, fraction digit by digit
/// after "point", trailing fractional zeros dropped. Throws std::invalid_argument on negatives or
/// non-decimal text.
std::string decimal_to_words(std::string_view decimal);

/// Non-negative finite doubles, via their shortest round-trip decimal form.
std::string real_to_words(double value);

/// "at seven hours thirty minutes AM"; noon exactly renders "at twelve hours".
std::string clock_to_words(int hour, int minute);

enum class LagStyle { Prefix, Suffix };

/// Prefix: "After seven seconds, ". Suffix: " seven seconds later".
std::string lag_phrase(std::int64_t seconds, LagStyle style);

std::string_view weekday_name(std::chrono::sys_days day);

}  // namespace tdost::verbalizer
