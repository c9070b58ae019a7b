#pragma once

#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "swp/core/text.hpp"

namespace swp::analysis {

using TermScores = std::map<std::string, double>;

// Tokens are whitespace-separated words with surrounding punctuation removed
// and case folded.
inline std::vector<std::string> tfidf_tokens(std::string_view sentence) {
  std::vector<std::string> out;
  for (const auto& w : text::split_whitespace(sentence))
    if (auto t = text::strip_punct_fold(w); !t.empty()) out.push_back(std::move(t));
  return out;
}

// Each domain's sentences form one document. tf is the term's share of the
// document's tokens; idf = ln((1 + N) / (1 + df)) + 1 with N the number of
// documents.
inline std::map<std::string, TermScores> tfidf(const std::map<std::string, std::vector<std::string>>& by_domain) {
  std::map<std::string, std::map<std::string, std::size_t>> counts;
  std::map<std::string, std::size_t> totals, df;
  for (const auto& [dom, sentences] : by_domain) {
    auto& c = counts[dom];
    for (const auto& s : sentences)
      for (auto& t : tfidf_tokens(s)) {
        ++c[t];
        ++totals[dom];
      }
    for (const auto& [t, n] : c) ++df[t];
  }
  const double n_docs = static_cast<double>(by_domain.size());
  std::map<std::string, TermScores> out;
  for (const auto& [dom, c] : counts) {
    auto& scores = out[dom];
    for (const auto& [t, n] : c) {
      const double tf = static_cast<double>(n) / static_cast<double>(totals[dom]);
      const double idf = std::log((1.0 + n_docs) / (1.0 + static_cast<double>(df[t]))) + 1.0;
      scores[t] = tf * idf;
    }
  }
  return out;
}

}  // namespace swp::analysis
