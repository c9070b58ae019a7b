#pragma once

#include <functional>
#include <optional>
#include <set>
#include <string>
#include <string_view>

#include <json.hpp>

#include "swp/core/text.hpp"
#include "swp/core/types.hpp"
#include "swp/validation/lexicons.hpp"
#include "swp/validation/porter_stemmer.hpp"

namespace swp::validation {

// One kind per row of the response-filter table.
enum class FilterKind {
  too_short,
  not_grammatical,
  bad_charset,
  not_adjective,
  misspelled,
  stem_overlap,
  profanity,
};

constexpr std::string_view to_string(FilterKind k) {
  switch (k) {
    case FilterKind::too_short: return "too-short";
    case FilterKind::not_grammatical: return "not-grammatical";
    case FilterKind::bad_charset: return "bad-charset";
    case FilterKind::not_adjective: return "not-adjective";
    case FilterKind::misspelled: return "misspelled";
    case FilterKind::stem_overlap: return "stem-overlap";
    case FilterKind::profanity: return "profanity";
  }
  return "?";
}

inline std::optional<FilterKind> filter_kind_from_string(std::string_view s) {
  for (auto k : {FilterKind::too_short, FilterKind::not_grammatical, FilterKind::bad_charset,
                 FilterKind::not_adjective, FilterKind::misspelled, FilterKind::stem_overlap,
                 FilterKind::profanity})
    if (to_string(k) == s) return k;
  return std::nullopt;
}

struct ValidationError {
  FilterKind kind;
  std::string detail;  // offending token(s)

  friend bool operator==(const ValidationError&, const ValidationError&) = default;
};

// Enables/disables individual filter rows. Grammar is off by default: the
// checker slot is empty unless a caller plugs one in. The sentence length and
// tone charset rows are always on because they are the Sentence and Tone
// invariants.
struct FilterConfig {
  bool grammar = false;
  bool spelling = true;
  bool adjective = true;
  bool stem_overlap = true;
  bool profanity = true;

  friend bool operator==(const FilterConfig&, const FilterConfig&) = default;
};

inline nlohmann::json to_json(const FilterConfig& c) {
  return {{"grammar", c.grammar},          {"spelling", c.spelling},   {"adjective", c.adjective},
          {"stem_overlap", c.stem_overlap}, {"profanity", c.profanity}};
}

inline FilterConfig filter_config_from_json(const nlohmann::json& j) {
  FilterConfig c;
  c.grammar = j.value("grammar", c.grammar);
  c.spelling = j.value("spelling", c.spelling);
  c.adjective = j.value("adjective", c.adjective);
  c.stem_overlap = j.value("stem_overlap", c.stem_overlap);
  c.profanity = j.value("profanity", c.profanity);
  return c;
}

// Returns true when the sentence is grammatical.
using GrammarChecker = std::function<bool(std::string_view)>;

// Stems a word may be reached from. Adverbs in "-ly" also contribute the
// stem of their base ("excitedly" -> stem("excited")), which plain Porter
// does not conflate.
inline std::set<std::string> stem_variants(std::string_view word) {
  std::set<std::string> out{stem(word)};
  if (word.size() > 4 && text::ends_with(word, "ly")) out.insert(stem(word.substr(0, word.size() - 2)));
  return out;
}

inline std::set<std::string> stem_set(std::string_view text_in) {
  std::set<std::string> out;
  for (const auto& tok : text::letter_tokens(text_in)) out.merge(stem_variants(tok));
  return out;
}

// First token of `response` whose stems intersect the stems of `prompt`.
// Symmetric in the sense that the intersection is computed over stem sets.
inline std::optional<std::string> stem_overlap(std::string_view response, std::string_view prompt) {
  const auto prompt_stems = stem_set(prompt);
  for (const auto& tok : text::letter_tokens(response))
    for (const auto& s : stem_variants(tok))
      if (prompt_stems.count(s)) return tok;
  return std::nullopt;
}

// Token-level match only: a listed word embedded in a longer word does not
// count.
inline std::optional<std::string> find_profanity(std::string_view text_in, const WordList& profanity) {
  for (const auto& raw : text::split_whitespace(text_in)) {
    const auto tok = text::strip_punct_fold(raw);
    if (!tok.empty() && profanity.contains(tok)) return tok;
    // hyphenated or slashed compounds are also checked part by part
    for (const auto& part : text::letter_tokens(raw))
      if (part != tok && profanity.contains(part)) return part;
  }
  return std::nullopt;
}

inline bool contains_profanity(std::string_view text_in, const WordList& profanity) {
  return find_profanity(text_in, profanity).has_value();
}

// Sentence filters in order: length, grammar, stem overlap with the prompt
// tone, profanity. Returns the first failure.
inline std::optional<ValidationError> validate_sentence(std::string_view sentence, std::string_view prompt_tone,
                                                        const Lexicons& lex, const FilterConfig& cfg = {},
                                                        const GrammarChecker& grammar = {}) {
  const auto s = text::trim(sentence);
  if (const auto n = text::word_count(s); n <= Sentence::kMinWordsExclusive)
    return ValidationError{FilterKind::too_short, std::to_string(n) + " words"};
  if (cfg.grammar && grammar && !grammar(s)) return ValidationError{FilterKind::not_grammatical, std::string(s)};
  if (cfg.stem_overlap)
    if (auto tok = stem_overlap(s, prompt_tone)) return ValidationError{FilterKind::stem_overlap, *tok};
  if (cfg.profanity)
    if (auto tok = find_profanity(s, lex.profanity)) return ValidationError{FilterKind::profanity, *tok};
  return std::nullopt;
}

inline bool tone_charset_ok(std::string_view t) {
  if (t.empty() || !text::is_alpha(t.front())) return false;
  for (char c : t)
    if (!(text::is_alpha(c) || c == '-')) return false;
  return true;
}

// Tone filters in order: charset, spelling, adjective, stem overlap with the
// prompt sentence, profanity.
inline std::optional<ValidationError> validate_tone(std::string_view tone, std::string_view prompt_sentence,
                                                    const Lexicons& lex, const FilterConfig& cfg = {}) {
  const auto raw = text::trim(tone);
  // The charset row cannot be disabled: it is the Tone invariant itself.
  if (!tone_charset_ok(raw)) return ValidationError{FilterKind::bad_charset, std::string(raw)};
  const auto t = text::lower(raw);
  if (cfg.spelling && !lex.spelling.contains(t)) return ValidationError{FilterKind::misspelled, t};
  if (cfg.adjective && !lex.adjectives.contains(t)) return ValidationError{FilterKind::not_adjective, t};
  if (cfg.stem_overlap)
    if (auto tok = stem_overlap(t, prompt_sentence)) return ValidationError{FilterKind::stem_overlap, *tok};
  if (cfg.profanity && lex.profanity.contains(t)) return ValidationError{FilterKind::profanity, t};
  return std::nullopt;
}

}  // namespace swp::validation
