#pragma once

#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "swp/core/error.hpp"
#include "swp/core/text.hpp"

namespace swp::validation {

// A case-folded word list. Lexicon files hold one word per line; lines
// starting with '#' are comments and are kept as provenance.
class WordList {
 public:
  WordList() = default;
  WordList(std::initializer_list<std::string_view> words) {
    for (auto w : words) insert(w);
  }

  static WordList from_stream(std::istream& in, std::string source = {}) {
    WordList list;
    list.source_ = std::move(source);
    std::string line;
    while (std::getline(in, line)) {
      const auto t = text::trim(line);
      if (t.empty()) continue;
      if (t.front() == '#') {
        list.provenance_.emplace_back(text::trim(t.substr(1)));
        continue;
      }
      list.insert(t);
    }
    return list;
  }

  static WordList load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(Errc::io_error, "cannot open lexicon " + path.string());
    auto list = from_stream(in, path.string());
    if (list.empty()) throw Error(Errc::invalid_config, "lexicon is empty: " + path.string());
    return list;
  }

  void insert(std::string_view word) { words_.insert(text::lower(text::trim(word))); }
  bool contains(std::string_view word) const { return words_.count(text::lower(word)) > 0; }
  bool empty() const noexcept { return words_.empty(); }
  std::size_t size() const noexcept { return words_.size(); }

  const std::string& source() const noexcept { return source_; }
  const std::vector<std::string>& provenance() const noexcept { return provenance_; }
  const std::unordered_set<std::string>& words() const noexcept { return words_; }

 private:
  std::unordered_set<std::string> words_;
  std::string source_;
  std::vector<std::string> provenance_;
};

struct Lexicons {
  WordList adjectives;
  WordList spelling;
  WordList profanity;

  // Loads adjectives.txt, spelling.txt and profanity.txt from `dir`.
  static Lexicons load(const std::filesystem::path& dir) {
    Lexicons lx{WordList::load(dir / "adjectives.txt"), WordList::load(dir / "spelling.txt"),
                WordList::load(dir / "profanity.txt")};
    return lx;
  }

  // Throws Errc::invalid_config if any list is empty or a seed tone is
  // itself listed as profanity.
  void check(const std::vector<std::string>& seed_tones = {}) const {
    if (adjectives.empty() || spelling.empty() || profanity.empty())
      throw Error(Errc::invalid_config, "lexicons must be non-empty");
    for (const auto& t : seed_tones)
      if (profanity.contains(t))
        throw Error(Errc::invalid_config, "seed tone '" + t + "' is in the profanity list");
  }
};

}  // namespace swp::validation
