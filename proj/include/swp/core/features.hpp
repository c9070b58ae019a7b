#pragma once

#include <array>
#include <string>
#include <string_view>

#include "swp/core/error.hpp"

namespace swp {

// The four theoretical tone dimensions rated in the feature experiment.
enum class Feature { valence_positive, aroused, informational, relational };

inline constexpr std::array<Feature, 4> kFeatures = {Feature::valence_positive, Feature::aroused,
                                                     Feature::informational, Feature::relational};

constexpr std::string_view feature_id(Feature f) {
  switch (f) {
    case Feature::valence_positive: return "valence-positive";
    case Feature::aroused: return "aroused";
    case Feature::informational: return "informational";
    case Feature::relational: return "relational";
  }
  return "?";
}

// Wording used inside prompts ("how {feature} is the conversational tone").
constexpr std::string_view feature_phrase(Feature f) {
  switch (f) {
    case Feature::valence_positive: return "positive in valence";
    case Feature::aroused: return "aroused";
    case Feature::informational: return "informational";
    case Feature::relational: return "relational";
  }
  return "?";
}

constexpr std::string_view feature_definition(Feature f) {
  switch (f) {
    case Feature::valence_positive:
      return "Positiveness in valence means the positiveness of emotional valence.";
    case Feature::aroused:
      return "Aroused means the amount of emotional arousal observed.";
    case Feature::informational:
      return "Informational means the extent to which a speaker's motive focuses on giving and/or receiving "
             "accurate information.";
    case Feature::relational:
      return "Relational means the extent to which a speaker's motive focuses on building the relationship.";
  }
  return "?";
}

inline Feature feature_from_id(std::string_view s) {
  for (auto f : kFeatures)
    if (feature_id(f) == s) return f;
  throw Error(Errc::unknown_item, "unknown feature '" + std::string(s) + "'");
}

}  // namespace swp
