#pragma once

#include <chrono>
#include <string>
#include <string_view>

namespace canopy {

using Instant = std::chrono::sys_seconds;
using Seconds = std::chrono::seconds;

// Parses "YYYY-MM-DDTHH:MM[:SS][Z|+HH:MM|-HH:MM]" into a UTC instant.
// A bare timestamp without a zone designator is taken as UTC.
Instant parse_instant(std::string_view text);

// "YYYY-MM-DDTHH:MM:SSZ"
std::string format_instant(Instant t);

// Parses "YYYY-MM-DD".
std::chrono::sys_days parse_date(std::string_view text);
std::string format_date(std::chrono::sys_days d);

// Calendar day containing `t` once shifted by `utc_offset_hours`.
std::chrono::sys_days local_day(Instant t, double utc_offset_hours);

// First instant of a local calendar day, expressed in UTC.
Instant local_day_start(std::chrono::sys_days day, double utc_offset_hours);

// Day of year, 1 on January 1st.
int day_of_year(std::chrono::sys_days day);

// Hours since 00:00 UTC of the UTC day containing `t`.
double utc_hours(Instant t);

}  // namespace canopy
