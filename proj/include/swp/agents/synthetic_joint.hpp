#pragma once

#include <cmath>
#include <string>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>

#include "swp/core/error.hpp"
#include "swp/core/rng.hpp"
#include "swp/core/types.hpp"

namespace swp::agents {

// A finite joint distribution p(T, S) over tones (rows) and sentences
// (columns). Sampling from its conditionals is the synthetic oracle agent.
class SyntheticJoint {
 public:
  static constexpr double kSumTolerance = 1e-12;

  SyntheticJoint(std::vector<Tone> tones, std::vector<Sentence> sentences, Eigen::MatrixXd probs)
      : tones_(std::move(tones)), sentences_(std::move(sentences)), probs_(std::move(probs)) {
    if (probs_.rows() != static_cast<Eigen::Index>(tones_.size()) ||
        probs_.cols() != static_cast<Eigen::Index>(sentences_.size()) || tones_.empty() || sentences_.empty())
      throw Error(Errc::invalid_config, "joint shape does not match tone/sentence lists");
    if ((probs_.array() < 0.0).any() || !probs_.allFinite())
      throw Error(Errc::invalid_config, "joint has negative or non-finite entries");
    if (std::abs(probs_.sum() - 1.0) > kSumTolerance)
      throw Error(Errc::invalid_config, "joint entries must sum to 1");
    for (Eigen::Index i = 0; i < probs_.rows(); ++i)
      if (!(probs_.row(i).sum() > 0.0))
        throw Error(Errc::non_ergodic_joint, "tone '" + tones_[i].text() + "' has zero mass");
    for (Eigen::Index j = 0; j < probs_.cols(); ++j)
      if (!(probs_.col(j).sum() > 0.0))
        throw Error(Errc::non_ergodic_joint, "sentence " + std::to_string(j) + " has zero mass");
    for (std::size_t i = 0; i < tones_.size(); ++i)
      if (!tone_index_.emplace(tones_[i].text(), i).second)
        throw Error(Errc::invalid_config, "duplicate tone '" + tones_[i].text() + "'");
    for (std::size_t j = 0; j < sentences_.size(); ++j)
      if (!sentence_index_.emplace(sentences_[j].text(), j).second)
        throw Error(Errc::invalid_config, "duplicate sentence '" + sentences_[j].text() + "'");
  }

  // Entries drawn uniformly from [floor, 1) and normalized; floor > 0 keeps
  // every cell positive so the induced Gibbs chain is ergodic.
  static SyntheticJoint random(std::vector<Tone> tones, std::vector<Sentence> sentences, Rng& rng,
                               double floor = 0.05) {
    Eigen::MatrixXd p(tones.size(), sentences.size());
    for (Eigen::Index i = 0; i < p.rows(); ++i)
      for (Eigen::Index j = 0; j < p.cols(); ++j) p(i, j) = floor + (1.0 - floor) * rng.uniform();
    p /= p.sum();
    return SyntheticJoint(std::move(tones), std::move(sentences), std::move(p));
  }

  const std::vector<Tone>& tones() const noexcept { return tones_; }
  const std::vector<Sentence>& sentences() const noexcept { return sentences_; }
  const Eigen::MatrixXd& probs() const noexcept { return probs_; }

  std::size_t tone_index(const Tone& t) const {
    auto it = tone_index_.find(t.text());
    if (it == tone_index_.end()) throw Error(Errc::unknown_tone, "tone '" + t.text() + "' not in joint");
    return it->second;
  }

  std::size_t sentence_index(const Sentence& s) const {
    auto it = sentence_index_.find(s.text());
    if (it == sentence_index_.end())
      throw Error(Errc::unknown_sentence, "sentence '" + s.text() + "' not in joint");
    return it->second;
  }

  // p(T | S = sentence j)
  Eigen::VectorXd tone_given_sentence(std::size_t j) const {
    return probs_.col(static_cast<Eigen::Index>(j)) / probs_.col(static_cast<Eigen::Index>(j)).sum();
  }

  // p(S | T = tone i)
  Eigen::VectorXd sentence_given_tone(std::size_t i) const {
    Eigen::VectorXd row = probs_.row(static_cast<Eigen::Index>(i)).transpose();
    return row / row.sum();
  }

  Eigen::VectorXd tone_marginal() const { return probs_.rowwise().sum(); }
  Eigen::VectorXd sentence_marginal() const { return probs_.colwise().sum().transpose(); }

  json to_json() const {
    json j;
    for (const auto& t : tones_) j["tones"].push_back(t.text());
    for (const auto& s : sentences_) j["sentences"].push_back(s.text());
    for (Eigen::Index i = 0; i < probs_.rows(); ++i) {
      json row = json::array();
      for (Eigen::Index c = 0; c < probs_.cols(); ++c) row.push_back(probs_(i, c));
      j["probs"].push_back(row);
    }
    return j;
  }

  static SyntheticJoint from_json(const json& j) {
    std::vector<Tone> tones;
    std::vector<Sentence> sentences;
    for (const auto& t : j.at("tones")) tones.push_back(Tone::make(t.get<std::string>()));
    for (const auto& s : j.at("sentences")) sentences.push_back(Sentence::make(s.get<std::string>()));
    Eigen::MatrixXd p(tones.size(), sentences.size());
    const auto& rows = j.at("probs");
    if (rows.size() != tones.size()) throw Error(Errc::invalid_config, "probs row count mismatch");
    for (std::size_t i = 0; i < tones.size(); ++i) {
      if (rows[i].size() != sentences.size()) throw Error(Errc::invalid_config, "probs column count mismatch");
      for (std::size_t c = 0; c < sentences.size(); ++c) p(i, c) = rows[i][c].get<double>();
    }
    return SyntheticJoint(std::move(tones), std::move(sentences), std::move(p));
  }

 private:
  std::vector<Tone> tones_;
  std::vector<Sentence> sentences_;
  Eigen::MatrixXd probs_;
  std::unordered_map<std::string, std::size_t> tone_index_;
  std::unordered_map<std::string, std::size_t> sentence_index_;
};

// Draws a tone from p(T | S = sentence).
inline Tone synthetic_answer_T(const SyntheticJoint& joint, const Sentence& sentence, Rng& rng) {
  const auto j = joint.sentence_index(sentence);
  const Eigen::VectorXd w = joint.probs().col(static_cast<Eigen::Index>(j));
  return joint.tones()[rng.categorical(std::span<const double>(w.data(), static_cast<std::size_t>(w.size())))];
}

// Draws a sentence from p(S | T = tone).
inline Sentence synthetic_answer_S(const SyntheticJoint& joint, const Tone& tone, Rng& rng) {
  const auto i = joint.tone_index(tone);
  const Eigen::VectorXd w = joint.probs().row(static_cast<Eigen::Index>(i)).transpose();
  return joint.sentences()[rng.categorical(std::span<const double>(w.data(), static_cast<std::size_t>(w.size())))];
}

// Tones and sentences that pass every response filter against each other;
// used for the synthetic backend when no joint file is configured.
inline std::vector<Tone> default_synthetic_tones() {
  std::vector<Tone> out;
  for (const char* t : {"polite", "grateful", "excited", "anxious", "angry", "sad", "curious", "sarcastic"})
    out.push_back(Tone::make(t));
  return out;
}

inline std::vector<Sentence> default_synthetic_sentences() {
  std::vector<Sentence> out;
  for (const char* s : {
           "Thank you so much for helping me today",
           "I cannot believe we finally won the game",
           "Could you please pass me the salt over there",
           "Why does nobody ever listen to what I say",
           "I really miss the way things used to be",
           "What time does the train leave this evening",
           "Oh great, another meeting that could have been an email",
           "I hope the test results come back soon",
           "We are going to the beach this weekend",
           "You left the door open again last night",
           "That was the best dinner I have had in years",
           "Nobody told me the store would close early today",
       })
    out.push_back(Sentence::make(s));
  return out;
}

}  // namespace swp::agents
