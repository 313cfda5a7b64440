#pragma once

#include <string_view>

#include "errors.hpp"

namespace meda {

enum class Domain { source, target };

enum class Scenario { us, sup, ss };

constexpr const char* to_string(Scenario s) {
    switch (s) {
        case Scenario::us:  return "us";
        case Scenario::sup: return "sup";
        case Scenario::ss:  return "ss";
    }
    return "?";
}

inline Scenario scenario_from_string(std::string_view s) {
    if (s == "us") return Scenario::us;
    if (s == "sup") return Scenario::sup;
    if (s == "ss") return Scenario::ss;
    raise(errc::invalid_argument, "unknown scenario '" + std::string(s) + "' (expected us|sup|ss)");
}

} // namespace meda
