#pragma once

#include <functional>
#include <string>
#include <vector>

#include "swp/agents/agent.hpp"
#include "swp/ratings/records.hpp"
#include "swp/ratings/schedule.hpp"

namespace swp::ratings {

struct CollectOptions {
  std::size_t repeats = 5;
  std::size_t session_size = 12;
  std::uint64_t seed = 0;
  std::string rater_prefix = "rater-";
};

inline std::string rater_id(const CollectOptions& opt, std::size_t session) {
  return opt.rater_prefix + std::to_string(session);
}

// Runs a quality-of-fit plan through `rater`; one rater id per session.
inline std::vector<RatingRecord> collect_fit_ratings(agents::Rater& rater, const std::vector<Tone>& tones,
                                                     const std::vector<Sentence>& sentences,
                                                     const CollectOptions& opt = {},
                                                     const std::function<void(const RatingRecord&)>& sink = {}) {
  std::vector<RatingRecord> out;
  for (const auto& s : schedule_rating_plan(tones.size(), sentences.size(), opt.repeats, opt.session_size,
                                            std::nullopt, opt.seed)) {
    const auto id = rater_id(opt, s.session);
    RatingRecord r{tones[s.tone], sentences[s.sentence], id, rater.rate_fit(tones[s.tone], sentences[s.sentence], id)};
    if (sink) sink(r);
    out.push_back(std::move(r));
  }
  return out;
}

inline std::vector<SimilarityRecord> collect_similarities(agents::Rater& rater, const std::vector<Tone>& tones,
                                                          const CollectOptions& opt = {},
                                                          const std::function<void(const SimilarityRecord&)>& sink = {}) {
  const auto pairs = similarity_pairs(tones.size());
  std::vector<SimilarityRecord> out;
  if (pairs.empty()) return out;
  const auto plan = schedule_plan(pairs.size(), opt.repeats, opt.session_size, std::nullopt, opt.seed);
  for (const auto& slot : plan.slots) {
    const auto [i, j] = pairs[slot.item];
    const auto id = rater_id(opt, slot.session);
    SimilarityRecord r{tones[i], tones[j], id, rater.rate_similarity(tones[i], tones[j], id)};
    if (sink) sink(r);
    out.push_back(std::move(r));
  }
  return out;
}

inline std::vector<FeatureRecord> collect_features(agents::Rater& rater, const std::vector<Tone>& tones,
                                                   const CollectOptions& opt = {},
                                                   const std::function<void(const FeatureRecord&)>& sink = {}) {
  const std::size_t k = kFeatures.size();
  const auto plan = schedule_plan(tones.size() * k, opt.repeats, opt.session_size, std::nullopt, opt.seed);
  std::vector<FeatureRecord> out;
  for (const auto& slot : plan.slots) {
    const auto& tone = tones[slot.item / k];
    const auto f = kFeatures[slot.item % k];
    const auto id = rater_id(opt, slot.session);
    FeatureRecord r{tone, f, id, rater.rate_feature(tone, f, id)};
    if (sink) sink(r);
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace swp::ratings
