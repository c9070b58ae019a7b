#pragma once

#include <cmath>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "swp/core/error.hpp"
#include "swp/core/features.hpp"
#include "swp/core/jsonl.hpp"
#include "swp/core/types.hpp"

namespace swp::ratings {

// Quality-of-fit rating of one (tone, sentence) pair.
struct RatingRecord {
  Tone tone;
  Sentence sentence;
  std::string rater_id;
  int value;  // Likert 1..5
  std::string experiment = "quality_of_fit";
};

// Similarity judgment of an unordered tone pair. Human answers are integer
// Likert values; LLM answers on [0,1] arrive already mapped to 1 + 4v.
struct SimilarityRecord {
  Tone a;
  Tone b;
  std::string rater_id;
  double value;  // 1..5
};

struct FeatureRecord {
  Tone tone;
  Feature feature;
  std::string rater_id;
  int value;  // Likert 1..5
};

inline int checked_likert(const nlohmann::json& v) {
  if (!v.is_number_integer()) throw Error(Errc::invalid_item, "rating value must be an integer");
  const int x = v.get<int>();
  if (x < 1 || x > 5) throw Error(Errc::invalid_item, "rating value out of [1,5]: " + std::to_string(x));
  return x;
}

inline nlohmann::json to_json(const RatingRecord& r) {
  return {{"tone", r.tone.text()},
          {"sentence", r.sentence.text()},
          {"rater_id", r.rater_id},
          {"value", r.value},
          {"experiment", r.experiment}};
}

inline RatingRecord rating_from_json(const nlohmann::json& j) {
  try {
    return {Tone::make(j.at("tone").get<std::string>()), Sentence::make(j.at("sentence").get<std::string>()),
            j.at("rater_id").get<std::string>(), checked_likert(j.at("value")),
            j.value("experiment", std::string("quality_of_fit"))};
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::invalid_item, std::string("rating record: ") + e.what());
  }
}

inline nlohmann::json to_json(const SimilarityRecord& r) {
  return {{"tone_a", r.a.text()}, {"tone_b", r.b.text()}, {"rater_id", r.rater_id}, {"value", r.value}};
}

inline SimilarityRecord similarity_from_json(const nlohmann::json& j) {
  try {
    const double v = j.at("value").get<double>();
    if (!(v >= 1.0 && v <= 5.0)) throw Error(Errc::invalid_item, "similarity value out of [1,5]");
    return {Tone::make(j.at("tone_a").get<std::string>()), Tone::make(j.at("tone_b").get<std::string>()),
            j.at("rater_id").get<std::string>(), v};
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::invalid_item, std::string("similarity record: ") + e.what());
  }
}

inline nlohmann::json to_json(const FeatureRecord& r) {
  return {{"tone", r.tone.text()},
          {"feature", std::string(feature_id(r.feature))},
          {"rater_id", r.rater_id},
          {"value", r.value}};
}

inline FeatureRecord feature_from_json(const nlohmann::json& j) {
  try {
    return {Tone::make(j.at("tone").get<std::string>()), feature_from_id(j.at("feature").get<std::string>()),
            j.at("rater_id").get<std::string>(), checked_likert(j.at("value"))};
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::invalid_item, std::string("feature record: ") + e.what());
  }
}

template <typename Record, typename Parse>
std::vector<Record> load_records(const std::filesystem::path& path, Parse parse) {
  std::vector<Record> out;
  for_each_jsonl(path, [&](const nlohmann::json& j, std::size_t line) {
    try {
      out.push_back(parse(j));
    } catch (const Error& e) {
      throw Error(Errc::corrupt_state, path.string() + " line " + std::to_string(line) + ": " + e.what());
    }
  });
  return out;
}

inline std::vector<RatingRecord> load_ratings(const std::filesystem::path& p) {
  return load_records<RatingRecord>(p, rating_from_json);
}
inline std::vector<SimilarityRecord> load_similarities(const std::filesystem::path& p) {
  return load_records<SimilarityRecord>(p, similarity_from_json);
}
inline std::vector<FeatureRecord> load_features(const std::filesystem::path& p) {
  return load_records<FeatureRecord>(p, feature_from_json);
}

}  // namespace swp::ratings
