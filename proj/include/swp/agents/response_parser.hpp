#pragma once

#include <charconv>
#include <cmath>
#include <string>
#include <string_view>
#include <variant>

#include "swp/agents/prompt.hpp"
#include "swp/core/error.hpp"
#include "swp/core/text.hpp"
#include "swp/core/types.hpp"

namespace swp::agents {

// adjective -> Tone, sentence -> raw text, integer_1_to_5 -> int,
// number_0_to_1 -> double.
using ParsedResponse = std::variant<Tone, std::string, int, double>;

// Characters removed from both ends of a single-token answer. Hyphens and
// letters are never stripped.
inline constexpr std::string_view kStripSet = ".,;:!?\"'`()[]{}*_<>";

inline std::string_view strip_edges(std::string_view s) {
  s = text::trim(s);
  while (!s.empty() && (kStripSet.find(s.front()) != std::string_view::npos || text::is_space(s.front())))
    s.remove_prefix(1);
  while (!s.empty() && (kStripSet.find(s.back()) != std::string_view::npos || text::is_space(s.back())))
    s.remove_suffix(1);
  return s;
}

inline Tone parse_adjective(std::string_view raw) {
  const auto s = strip_edges(raw);
  if (s.empty()) throw Error(Errc::parse_error, "empty adjective response");
  if (text::split_whitespace(s).size() != 1)
    throw Error(Errc::parse_error, "expected a single adjective, got '" + std::string(raw) + "'");
  const auto folded = text::lower(s);
  if (!Tone::is_canonical(folded))
    throw Error(Errc::parse_error, "adjective has characters outside [a-z-]: '" + std::string(raw) + "'");
  return Tone::make(folded);
}

inline int parse_likert(std::string_view raw) {
  auto s = strip_edges(raw);
  int value = 0;
  const auto* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, value);
  if (s.empty() || ec != std::errc{} || ptr != end)
    throw Error(Errc::parse_error, "not an integer: '" + std::string(raw) + "'");
  if (value < 1 || value > 5) throw Error(Errc::parse_error, "rating out of [1,5]: " + std::to_string(value));
  return value;
}

inline double parse_unit_number(std::string_view raw) {
  auto s = strip_edges(raw);
  if (s.empty()) throw Error(Errc::parse_error, "empty numeric response");
  std::size_t used = 0;
  double value = 0.0;
  try {
    value = std::stod(std::string(s), &used);
  } catch (const std::exception&) {
    throw Error(Errc::parse_error, "not a number: '" + std::string(raw) + "'");
  }
  if (used != s.size() || !std::isfinite(value))
    throw Error(Errc::parse_error, "not a number: '" + std::string(raw) + "'");
  if (value < 0.0 || value > 1.0) throw Error(Errc::parse_error, "value out of [0,1]: '" + std::string(raw) + "'");
  return value;
}

inline ParsedResponse parse_response(ResponseFormat format, std::string_view raw) {
  switch (format) {
    case ResponseFormat::adjective: return parse_adjective(raw);
    case ResponseFormat::sentence: return std::string(raw);
    case ResponseFormat::integer_1_to_5: return parse_likert(raw);
    case ResponseFormat::number_0_to_1: return parse_unit_number(raw);
  }
  throw Error(Errc::parse_error, "unknown format");
}

}  // namespace swp::agents
