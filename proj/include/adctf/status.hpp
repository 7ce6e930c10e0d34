#pragma once

#include <array>
#include <optional>
#include <stdexcept>
#include <string>

namespace adctf {

// Five-state checker verdict. Wire codes follow the common A&D checker
// convention and are the only representable codes.
enum class Verdict { Ok, Corrupt, Mumble, Down, Error };

constexpr std::array<Verdict, 5> all_verdicts = {Verdict::Ok, Verdict::Corrupt, Verdict::Mumble,
                                                 Verdict::Down, Verdict::Error};

constexpr int wire_code(Verdict v) {
    switch (v) {
    case Verdict::Ok: return 101;
    case Verdict::Corrupt: return 102;
    case Verdict::Mumble: return 103;
    case Verdict::Down: return 104;
    case Verdict::Error: return 110;
    }
    return 110;
}

constexpr std::optional<Verdict> verdict_from_wire(int code) {
    switch (code) {
    case 101: return Verdict::Ok;
    case 102: return Verdict::Corrupt;
    case 103: return Verdict::Mumble;
    case 104: return Verdict::Down;
    case 110: return Verdict::Error;
    default: return std::nullopt;
    }
}

constexpr const char* to_string(Verdict v) {
    switch (v) {
    case Verdict::Ok: return "OK";
    case Verdict::Corrupt: return "CORRUPT";
    case Verdict::Mumble: return "MUMBLE";
    case Verdict::Down: return "DOWN";
    case Verdict::Error: return "ERROR";
    }
    return "ERROR";
}

inline std::optional<Verdict> verdict_from_string(const std::string& s) {
    for (Verdict v : all_verdicts)
        if (s == to_string(v)) return v;
    return std::nullopt;
}

} // namespace adctf
