#pragma once

#include <optional>
#include <string>
#include <string_view>

namespace ras {

// Fixed six-decimal rendering used for every real number this toolkit emits,
// so reports and service responses are byte-stable and directly comparable.
std::string fixed6(double v);

std::string json_escape(std::string_view s);

inline std::string json_str(std::string_view s) { return "\"" + json_escape(s) + "\""; }

inline std::string json_opt6(const std::optional<double>& v) {
  return v.has_value() ? fixed6(*v) : std::string("null");
}

}  // namespace ras
