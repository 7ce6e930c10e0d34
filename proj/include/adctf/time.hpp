#pragma once

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <cstdio>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>

namespace adctf {

// All instants are milliseconds since the Unix epoch, UTC.
using millis = std::int64_t;

constexpr millis second_ms = 1000;
constexpr millis minute_ms = 60 * second_ms;

class Clock {
public:
    virtual ~Clock() = default;
    virtual millis now_ms() const = 0;
};

class SystemClock final : public Clock {
public:
    millis now_ms() const override {
        using namespace std::chrono;
        return duration_cast<milliseconds>(system_clock::now().time_since_epoch()).count();
    }
};

// Deterministic clock for simulated matches: time moves only when advanced.
class VirtualClock final : public Clock {
public:
    // 2025-01-01T00:00:00Z
    static constexpr millis default_epoch_ms = 1735689600LL * 1000;

    explicit VirtualClock(millis start = default_epoch_ms) : now_(start) {}

    millis now_ms() const override { return now_; }

    void advance_to(millis t) {
        if (t < now_) throw std::logic_error("virtual clock cannot move backwards");
        now_ = t;
    }
    void advance_by(millis d) { advance_to(now_ + d); }

private:
    millis now_;
};

namespace detail {

// Civil-calendar conversions (proleptic Gregorian), valid far beyond any match horizon.
inline std::int64_t days_from_civil(int y, unsigned m, unsigned d) {
    y -= m <= 2;
    const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

inline void civil_from_days(std::int64_t z, int& y, unsigned& m, unsigned& d) {
    z += 719468;
    const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
    const unsigned doe = static_cast<unsigned>(z - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    y = static_cast<int>(yoe) + static_cast<int>(era) * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    d = doy - (153 * mp + 2) / 5 + 1;
    m = mp + (mp < 10 ? 3 : -9);
    y += m <= 2;
}

} // namespace detail

// "2025-01-01T00:05:00.000Z"; fixed width so log lines sort lexicographically.
inline std::string rfc3339_utc(millis t) {
    std::int64_t secs = t / 1000;
    int ms = static_cast<int>(t % 1000);
    if (ms < 0) {
        ms += 1000;
        secs -= 1;
    }
    std::int64_t days = secs / 86400;
    int sod = static_cast<int>(secs % 86400);
    if (sod < 0) {
        sod += 86400;
        days -= 1;
    }
    int y;
    unsigned mo, d;
    detail::civil_from_days(days, y, mo, d);
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%04d-%02u-%02uT%02d:%02d:%02d.%03dZ", y, mo, d,
                  sod / 3600, (sod / 60) % 60, sod % 60, ms);
    return buf;
}

// Accepts the exact output of rfc3339_utc plus the no-fraction variant.
inline std::optional<millis> parse_rfc3339_utc(const std::string& s) {
    int y, mo, d, h, mi, se, ms = 0;
    char tail[8] = {0};
    int n = std::sscanf(s.c_str(), "%d-%d-%dT%d:%d:%d.%3d%1s", &y, &mo, &d, &h, &mi, &se, &ms, tail);
    if (n == 8) {
        if (tail[0] != 'Z') return std::nullopt;
    } else {
        ms = 0;
        n = std::sscanf(s.c_str(), "%d-%d-%dT%d:%d:%d%1s", &y, &mo, &d, &h, &mi, &se, tail);
        if (n != 7 || tail[0] != 'Z') return std::nullopt;
    }
    if (mo < 1 || mo > 12 || d < 1 || d > 31 || h > 23 || mi > 59 || se > 60) return std::nullopt;
    std::int64_t days = detail::days_from_civil(y, static_cast<unsigned>(mo), static_cast<unsigned>(d));
    return (days * 86400 + h * 3600 + mi * 60 + se) * 1000 + ms;
}

} // namespace adctf
