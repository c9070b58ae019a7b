#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "swp/core/error.hpp"
#include "swp/core/types.hpp"

namespace swp::analysis {

struct ToneHistogram {
  std::map<std::string, std::size_t> counts;
  std::size_t total = 0;

  void add(const std::string& tone, std::size_t n = 1) {
    counts[tone] += n;
    total += n;
  }

  std::size_t count(const std::string& tone) const {
    auto it = counts.find(tone);
    return it == counts.end() ? 0 : it->second;
  }

  // Tones by descending count, ties lexicographic.
  std::vector<std::pair<std::string, std::size_t>> ranked() const {
    std::vector<std::pair<std::string, std::size_t>> out(counts.begin(), counts.end());
    std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
    return out;
  }

  nlohmann::json to_json() const {
    nlohmann::json j = nlohmann::json::array();
    for (const auto& [t, c] : ranked()) j.push_back({{"tone", t}, {"count", c}});
    return j;
  }
};

inline ToneHistogram tone_histogram(const std::vector<Tone>& tones) {
  ToneHistogram h;
  for (const auto& t : tones) h.add(t.text());
  return h;
}

// Shannon entropy in bits; 0 log 0 = 0.
inline double entropy_bits(const ToneHistogram& h) {
  if (h.total == 0) throw Error(Errc::empty_histogram, "entropy of an empty histogram");
  double e = 0.0;
  const double n = static_cast<double>(h.total);
  for (const auto& [t, c] : h.counts)
    if (c > 0) {
      const double p = static_cast<double>(c) / n;
      e -= p * std::log2(p);
    }
  return e;
}

// Union of the top-k tones of each histogram, ordered by combined count
// (descending) with lexicographic ties. Within a histogram, the k-th place
// tie is broken lexicographically too.
inline std::vector<std::string> select_taxonomy(const ToneHistogram& a, const ToneHistogram& b, std::size_t k) {
  if (k < 1) throw Error(Errc::invalid_parameter, "k must be >= 1");
  std::map<std::string, std::size_t> combined;
  for (const auto* h : {&a, &b}) {
    const auto r = h->ranked();
    for (std::size_t i = 0; i < std::min(k, r.size()); ++i) combined[r[i].first] = 0;
  }
  for (auto& [t, c] : combined) c = a.count(t) + b.count(t);
  std::vector<std::pair<std::string, std::size_t>> order(combined.begin(), combined.end());
  std::stable_sort(order.begin(), order.end(), [](const auto& x, const auto& y) { return x.second > y.second; });
  std::vector<std::string> out;
  for (const auto& [t, c] : order) out.push_back(t);
  return out;
}

}  // namespace swp::analysis
