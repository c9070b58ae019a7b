#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>

#include <json.hpp>

#include "swp/core/error.hpp"
#include "swp/core/text.hpp"

namespace swp {

using json = nlohmann::json;

// A conversational tone: a single lowercase adjective, `[a-z][a-z-]*`.
class Tone {
 public:
  // Trims and lowercases `raw`; throws Errc::invalid_item if the result is
  // not a well-formed tone.
  static Tone make(std::string_view raw) {
    std::string t = text::lower(text::trim(raw));
    if (!is_canonical(t)) throw Error(Errc::invalid_item, "not a tone: '" + std::string(raw) + "'");
    return Tone(std::move(t));
  }

  static bool is_canonical(std::string_view t) {
    if (t.empty() || t.front() < 'a' || t.front() > 'z') return false;
    for (char c : t)
      if (!((c >= 'a' && c <= 'z') || c == '-')) return false;
    return true;
  }

  const std::string& text() const noexcept { return text_; }

  friend bool operator==(const Tone&, const Tone&) = default;
  friend auto operator<=>(const Tone&, const Tone&) = default;

 private:
  explicit Tone(std::string t) : text_(std::move(t)) {}
  std::string text_;
};

// A generated sentence; more than five whitespace-delimited words.
class Sentence {
 public:
  static constexpr std::size_t kMinWordsExclusive = 5;

  static Sentence make(std::string_view raw) {
    std::string t(text::trim(raw));
    const std::size_t n = text::word_count(t);
    if (n <= kMinWordsExclusive)
      throw Error(Errc::invalid_item, "sentence needs more than 5 words: '" + t + "'");
    return Sentence(std::move(t), n);
  }

  const std::string& text() const noexcept { return text_; }
  std::size_t word_count() const noexcept { return word_count_; }

  friend bool operator==(const Sentence& a, const Sentence& b) { return a.text_ == b.text_; }
  friend auto operator<=>(const Sentence& a, const Sentence& b) { return a.text_ <=> b.text_; }

 private:
  Sentence(std::string t, std::size_t n) : text_(std::move(t)), word_count_(n) {}
  std::string text_;
  std::size_t word_count_;
};

using ChainItem = std::variant<Tone, Sentence>;

inline bool is_tone(const ChainItem& item) { return std::holds_alternative<Tone>(item); }
inline bool is_sentence(const ChainItem& item) { return std::holds_alternative<Sentence>(item); }

inline const std::string& item_text(const ChainItem& item) {
  return std::visit([](const auto& v) -> const std::string& { return v.text(); }, item);
}

enum class Domain { human, llm, synthetic };
enum class TrialKind { S, T };
enum class TrialStatus { open, accepted, rejected, expired };

constexpr std::string_view to_string(Domain d) {
  switch (d) {
    case Domain::human: return "human";
    case Domain::llm: return "llm";
    case Domain::synthetic: return "synthetic";
  }
  return "?";
}
constexpr std::string_view to_string(TrialKind k) { return k == TrialKind::S ? "S" : "T"; }
constexpr std::string_view to_string(TrialStatus s) {
  switch (s) {
    case TrialStatus::open: return "open";
    case TrialStatus::accepted: return "accepted";
    case TrialStatus::rejected: return "rejected";
    case TrialStatus::expired: return "expired";
  }
  return "?";
}

inline Domain domain_from_string(std::string_view s) {
  if (s == "human") return Domain::human;
  if (s == "llm") return Domain::llm;
  if (s == "synthetic") return Domain::synthetic;
  throw Error(Errc::invalid_config, "unknown domain '" + std::string(s) + "'");
}
inline TrialKind trial_kind_from_string(std::string_view s) {
  if (s == "S") return TrialKind::S;
  if (s == "T") return TrialKind::T;
  throw Error(Errc::corrupt_state, "unknown trial kind '" + std::string(s) + "'");
}
inline TrialStatus trial_status_from_string(std::string_view s) {
  if (s == "open") return TrialStatus::open;
  if (s == "accepted") return TrialStatus::accepted;
  if (s == "rejected") return TrialStatus::rejected;
  if (s == "expired") return TrialStatus::expired;
  throw Error(Errc::corrupt_state, "unknown trial status '" + std::string(s) + "'");
}

// {"tone": "..."} or {"sentence": "..."}
inline json to_json(const ChainItem& item) {
  if (const auto* t = std::get_if<Tone>(&item)) return json{{"tone", t->text()}};
  return json{{"sentence", std::get<Sentence>(item).text()}};
}

inline ChainItem chain_item_from_json(const json& j) {
  if (j.contains("tone")) return Tone::make(j.at("tone").get<std::string>());
  if (j.contains("sentence")) return Sentence::make(j.at("sentence").get<std::string>());
  throw Error(Errc::corrupt_state, "chain item needs 'tone' or 'sentence': " + j.dump());
}

}  // namespace swp
