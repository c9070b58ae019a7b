#pragma once

#include <algorithm>
#include <cmath>
#include <memory>
#include <string>

#include "swp/agents/llm_client.hpp"
#include "swp/agents/prompt.hpp"
#include "swp/agents/response_parser.hpp"
#include "swp/agents/synthetic_joint.hpp"
#include "swp/core/features.hpp"
#include "swp/core/rng.hpp"
#include "swp/core/types.hpp"

namespace swp::agents {

// Everything an agent sees when answering one trial. The prompt is the chain
// tip and nothing else.
struct TrialRequest {
  std::string trial_id;
  std::string chain_id;
  TrialKind kind;
  ChainItem prompt;
  std::size_t iteration;  // chain iteration of the prompt
  std::string agent_id;
  int attempt;  // 0 for the first answer on this trial
};

// Synchronous answerer of S and T trials. Returns raw response text; the
// chain engine validates it.
class TrialAgent {
 public:
  virtual ~TrialAgent() = default;
  virtual Domain domain() const = 0;
  virtual std::string respond(const TrialRequest& request) = 0;
};

// Answers the three judgment experiments. Values are on the Likert 1-5
// scale; similarity may be fractional (LLM answers on [0,1] are mapped to
// 1 + 4v).
class Rater {
 public:
  virtual ~Rater() = default;
  virtual int rate_fit(const Tone& tone, const Sentence& sentence, const std::string& rater_id) = 0;
  virtual double rate_similarity(const Tone& a, const Tone& b, const std::string& rater_id) = 0;
  virtual int rate_feature(const Tone& tone, Feature feature, const std::string& rater_id) = 0;
};

// Samples answers from the conditionals of a SyntheticJoint. Each call uses
// its own RNG stream derived from (seed, chain, iteration, attempt), so the
// answers do not depend on call order or thread interleaving.
class SyntheticAgent final : public TrialAgent {
 public:
  SyntheticAgent(std::shared_ptr<const SyntheticJoint> joint, std::uint64_t seed)
      : joint_(std::move(joint)), seed_(seed) {}

  Domain domain() const override { return Domain::synthetic; }

  std::string respond(const TrialRequest& req) override {
    Rng rng(derive_seed(seed_, hash_string(req.chain_id), req.iteration, static_cast<std::uint64_t>(req.attempt)));
    if (req.kind == TrialKind::S) return synthetic_answer_S(*joint_, std::get<Tone>(req.prompt), rng).text();
    return synthetic_answer_T(*joint_, std::get<Sentence>(req.prompt), rng).text();
  }

  const SyntheticJoint& joint() const noexcept { return *joint_; }

 private:
  std::shared_ptr<const SyntheticJoint> joint_;
  std::uint64_t seed_;
};

// Rater driven by a SyntheticJoint: quality of fit tracks p(T|S), tone
// similarity tracks the correlation of p(S|T) profiles, and feature scores
// are fixed per (tone, feature) latent values. Gaussian noise with
// `noise_sd` is added per (item, rater) before rounding to the Likert scale.
class SyntheticRater final : public Rater {
 public:
  SyntheticRater(std::shared_ptr<const SyntheticJoint> joint, std::uint64_t seed, double noise_sd = 0.5)
      : joint_(std::move(joint)), seed_(seed), noise_sd_(noise_sd) {}

  int rate_fit(const Tone& tone, const Sentence& sentence, const std::string& rater_id) override {
    const auto i = joint_->tone_index(tone);
    const auto j = joint_->sentence_index(sentence);
    const Eigen::VectorXd cond = joint_->tone_given_sentence(j);
    const double latent = 1.0 + 4.0 * cond(static_cast<Eigen::Index>(i)) / cond.maxCoeff();
    return likert(latent + noise(1, hash_string(tone.text()), hash_string(sentence.text()), rater_id));
  }

  double rate_similarity(const Tone& a, const Tone& b, const std::string& rater_id) override {
    const Eigen::VectorXd pa = joint_->sentence_given_tone(joint_->tone_index(a));
    const Eigen::VectorXd pb = joint_->sentence_given_tone(joint_->tone_index(b));
    const Eigen::VectorXd ca = pa.array() - pa.mean();
    const Eigen::VectorXd cb = pb.array() - pb.mean();
    const double denom = ca.norm() * cb.norm();
    const double r = denom > 0.0 ? ca.dot(cb) / denom : 1.0;
    const std::uint64_t ha = hash_string(a.text()), hb = hash_string(b.text());
    const std::uint64_t lo = std::min(ha, hb), hi = std::max(ha, hb);
    return likert(1.0 + 2.0 * (r + 1.0) + noise(2, lo, hi, rater_id));
  }

  int rate_feature(const Tone& tone, Feature feature, const std::string& rater_id) override {
    joint_->tone_index(tone);
    Rng latent_rng(derive_seed(seed_, 3, hash_string(tone.text()), static_cast<std::uint64_t>(feature)));
    const double latent = 1.0 + 4.0 * latent_rng.uniform();
    return likert(latent + noise(4, hash_string(tone.text()), static_cast<std::uint64_t>(feature), rater_id));
  }

 private:
  static int likert(double x) { return static_cast<int>(std::clamp(std::lround(x), 1L, 5L)); }

  double noise(std::uint64_t experiment, std::uint64_t a, std::uint64_t b, const std::string& rater_id) const {
    Rng rng(derive_seed(seed_, experiment, a, b, hash_string(rater_id)));
    return noise_sd_ * rng.normal();
  }

  std::shared_ptr<const SyntheticJoint> joint_;
  std::uint64_t seed_;
  double noise_sd_;
};

// Chat-completion backed trial agent using the shipped prompt templates.
// Unparseable adjectives are passed through trimmed so that the chain
// engine's filters reject them and charge the retry budget.
class LlmAgent final : public TrialAgent {
 public:
  LlmAgent(std::shared_ptr<LlmClient> client, const PromptLibrary& prompts)
      : client_(std::move(client)),
        tone_tpl_(prompts.get("tone_from_sentence")),
        sentence_tpl_(prompts.get("sentence_from_tone")) {}

  Domain domain() const override { return Domain::llm; }

  std::string respond(const TrialRequest& req) override {
    if (req.kind == TrialKind::S) {
      const auto prompt = render_prompt(sentence_tpl_, {{"tone", item_text(req.prompt)}});
      return std::string(text::trim(client_->complete(prompt)));
    }
    const auto prompt = render_prompt(tone_tpl_, {{"sentence", item_text(req.prompt)}});
    const auto raw = client_->complete(prompt);
    try {
      return parse_adjective(raw).text();
    } catch (const Error&) {
      return std::string(text::trim(raw));
    }
  }

 private:
  std::shared_ptr<LlmClient> client_;
  PromptTemplate tone_tpl_;
  PromptTemplate sentence_tpl_;
};

class LlmRater final : public Rater {
 public:
  LlmRater(std::shared_ptr<LlmClient> client, const PromptLibrary& prompts, int parse_retries = 3)
      : client_(std::move(client)),
        fit_tpl_(prompts.get("quality_of_fit")),
        sim_tpl_(prompts.get("tone_similarity")),
        feature_tpl_(prompts.get("tone_feature")),
        parse_retries_(parse_retries) {}

  int rate_fit(const Tone& tone, const Sentence& sentence, const std::string&) override {
    const auto prompt = render_prompt(fit_tpl_, {{"tone", tone.text()}, {"sentence", sentence.text()}});
    return ask<int>(prompt, ResponseFormat::integer_1_to_5);
  }

  double rate_similarity(const Tone& a, const Tone& b, const std::string&) override {
    const auto prompt = render_prompt(sim_tpl_, {{"tone_a", a.text()}, {"tone_b", b.text()}});
    return 1.0 + 4.0 * ask<double>(prompt, ResponseFormat::number_0_to_1);
  }

  int rate_feature(const Tone& tone, Feature feature, const std::string&) override {
    const auto prompt = render_prompt(feature_tpl_, {{"feature_definition", std::string(feature_definition(feature))},
                                                     {"feature", std::string(feature_phrase(feature))},
                                                     {"tone", tone.text()}});
    return ask<int>(prompt, ResponseFormat::integer_1_to_5);
  }

 private:
  template <typename T>
  T ask(const std::string& prompt, ResponseFormat format) {
    std::string last;
    for (int attempt = 0; attempt < parse_retries_; ++attempt) {
      last = client_->complete(prompt);
      try {
        return std::get<T>(parse_response(format, last));
      } catch (const Error&) {
      }
    }
    throw Error(Errc::agent_failure, "unparseable rating after retries: '" + last + "'");
  }

  std::shared_ptr<LlmClient> client_;
  PromptTemplate fit_tpl_;
  PromptTemplate sim_tpl_;
  PromptTemplate feature_tpl_;
  int parse_retries_;
};

}  // namespace swp::agents
