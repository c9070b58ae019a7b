#pragma once

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "swp/core/error.hpp"

namespace swp::agents {

enum class ResponseFormat { adjective, sentence, integer_1_to_5, number_0_to_1 };

constexpr std::string_view to_string(ResponseFormat f) {
  switch (f) {
    case ResponseFormat::adjective: return "adjective";
    case ResponseFormat::sentence: return "sentence";
    case ResponseFormat::integer_1_to_5: return "integer_1_to_5";
    case ResponseFormat::number_0_to_1: return "number_0_to_1";
  }
  return "?";
}

inline ResponseFormat response_format_from_string(std::string_view s) {
  if (s == "adjective") return ResponseFormat::adjective;
  if (s == "sentence") return ResponseFormat::sentence;
  if (s == "integer_1_to_5") return ResponseFormat::integer_1_to_5;
  if (s == "number_0_to_1") return ResponseFormat::number_0_to_1;
  throw Error(Errc::invalid_config, "unknown response format '" + std::string(s) + "'");
}

using SlotMap = std::map<std::string, std::string, std::less<>>;

// Names of `{slot}` placeholders in order of first appearance. A slot name is
// [a-z_]+; other brace uses are literal text.
inline std::vector<std::string> referenced_slots(std::string_view text) {
  std::vector<std::string> out;
  std::set<std::string, std::less<>> seen;
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (text[i] != '{') continue;
    std::size_t j = i + 1;
    while (j < text.size() && ((text[j] >= 'a' && text[j] <= 'z') || text[j] == '_')) ++j;
    if (j < text.size() && text[j] == '}' && j > i + 1) {
      auto name = std::string(text.substr(i + 1, j - i - 1));
      if (seen.insert(name).second) out.push_back(std::move(name));
      i = j;
    }
  }
  return out;
}

class PromptTemplate {
 public:
  PromptTemplate(std::string id, std::string text, std::vector<std::string> declared_slots, ResponseFormat format)
      : id_(std::move(id)), text_(std::move(text)), slots_(std::move(declared_slots)), format_(format) {
    for (const auto& s : referenced_slots(text_))
      if (std::find(slots_.begin(), slots_.end(), s) == slots_.end())
        throw Error(Errc::invalid_config, "template '" + id_ + "' references undeclared slot {" + s + "}");
  }

  const std::string& id() const noexcept { return id_; }
  const std::string& text() const noexcept { return text_; }
  const std::vector<std::string>& slots() const noexcept { return slots_; }
  ResponseFormat format() const noexcept { return format_; }

 private:
  std::string id_;
  std::string text_;
  std::vector<std::string> slots_;
  ResponseFormat format_;
};

// Single-pass substitution: bound values are never re-scanned, so values
// containing braces come through verbatim.
inline std::string render_prompt(const PromptTemplate& tpl, const SlotMap& slots) {
  const std::string_view text = tpl.text();
  std::string out;
  out.reserve(text.size() + 64);
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (text[i] == '{') {
      std::size_t j = i + 1;
      while (j < text.size() && ((text[j] >= 'a' && text[j] <= 'z') || text[j] == '_')) ++j;
      if (j < text.size() && text[j] == '}' && j > i + 1) {
        const auto name = text.substr(i + 1, j - i - 1);
        auto it = slots.find(name);
        if (it == slots.end())
          throw Error(Errc::missing_slot, "template '" + tpl.id() + "' needs {" + std::string(name) + "}");
        out += it->second;
        i = j;
        continue;
      }
    }
    out.push_back(text[i]);
  }
  return out;
}

// Template set loaded from a directory holding `templates.json` (id -> file,
// slots, format) and the plain-text template files it names.
class PromptLibrary {
 public:
  static PromptLibrary load(const std::filesystem::path& dir) {
    std::ifstream manifest(dir / "templates.json");
    if (!manifest) throw Error(Errc::io_error, "cannot open " + (dir / "templates.json").string());
    nlohmann::json j;
    try {
      manifest >> j;
    } catch (const nlohmann::json::exception& e) {
      throw Error(Errc::invalid_config, std::string("templates.json: ") + e.what());
    }
    PromptLibrary lib;
    for (const auto& [id, entry] : j.items()) {
      std::ifstream f(dir / entry.at("file").get<std::string>());
      if (!f) throw Error(Errc::io_error, "cannot open template file for '" + id + "'");
      std::stringstream ss;
      ss << f.rdbuf();
      std::string text = ss.str();
      while (!text.empty() && (text.back() == '\n' || text.back() == '\r')) text.pop_back();
      lib.templates_.emplace(id, PromptTemplate(id, std::move(text), entry.at("slots").get<std::vector<std::string>>(),
                                                response_format_from_string(entry.at("format").get<std::string>())));
    }
    return lib;
  }

  const PromptTemplate& get(std::string_view id) const {
    auto it = templates_.find(id);
    if (it == templates_.end()) throw Error(Errc::invalid_config, "no prompt template '" + std::string(id) + "'");
    return it->second;
  }

  bool contains(std::string_view id) const { return templates_.find(id) != templates_.end(); }
  const std::map<std::string, PromptTemplate, std::less<>>& all() const noexcept { return templates_; }

 private:
  std::map<std::string, PromptTemplate, std::less<>> templates_;
};

}  // namespace swp::agents
