#ifndef WIGNER_TIMEPOINT_HPP
#define WIGNER_TIMEPOINT_HPP

#include <stdexcept>
#include <string>
#include <string_view>

namespace wigner::experiment {

/// Coarse protocol clock: t0 init, t1 closes with the first friend's
/// measurement, t2 with the second's, t3 opens with the outside announcement
/// and closes with the final measurement. Strictly ordered t0 < t1 < t2 < t3.
enum class TimePoint : int { t0 = 0, t1 = 1, t2 = 2, t3 = 3 };

inline std::string to_string(TimePoint t) {
    switch (t) {
    case TimePoint::t0: return "t0";
    case TimePoint::t1: return "t1";
    case TimePoint::t2: return "t2";
    case TimePoint::t3: return "t3";
    }
    return "?";
}

inline TimePoint timepoint_from_string(std::string_view s) {
    if (s == "t0") return TimePoint::t0;
    if (s == "t1") return TimePoint::t1;
    if (s == "t2") return TimePoint::t2;
    if (s == "t3") return TimePoint::t3;
    throw std::invalid_argument("unknown time point '" + std::string(s) + "'");
}

/// Round-clock annotation attached to each interval (n:00 .. n:31 style).
inline std::string clock_alias(TimePoint t) {
    switch (t) {
    case TimePoint::t0: return "n:00";
    case TimePoint::t1: return "n:01-n:10";
    case TimePoint::t2: return "n:11-n:20";
    case TimePoint::t3: return "n:21-n:31";
    }
    return "?";
}

} // namespace wigner::experiment

#endif // WIGNER_TIMEPOINT_HPP
