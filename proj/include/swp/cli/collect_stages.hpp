#pragma once

#include <algorithm>
#include <filesystem>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "swp/agents/agent.hpp"
#include "swp/chain/autonomous.hpp"
#include "swp/chain/experiment.hpp"
#include "swp/cli/context.hpp"
#include "swp/core/jsonl.hpp"
#include "swp/ratings/aggregate.hpp"
#include "swp/ratings/collect.hpp"
#include "swp/ratings/export.hpp"
#include "swp/validation/lexicons.hpp"

namespace swp::cli {

inline constexpr const char* kTrialsFile = "trials.jsonl";
inline constexpr const char* kRatingsFile = "ratings.jsonl";
inline constexpr const char* kSimilarityFile = "similarity.jsonl";
inline constexpr const char* kFeaturesFile = "features.jsonl";
inline constexpr const char* kItemsFile = "items.json";

enum class Backend { synthetic, llm, human };

inline Backend backend_from_string(std::string_view s) {
  if (s == "synthetic") return Backend::synthetic;
  if (s == "llm") return Backend::llm;
  if (s == "human") return Backend::human;
  throw Error(Errc::invalid_config, "backend must be synthetic|llm|human, got '" + std::string(s) + "'");
}

inline Domain domain_of(Backend b) {
  switch (b) {
    case Backend::synthetic: return Domain::synthetic;
    case Backend::llm: return Domain::llm;
    case Backend::human: return Domain::human;
  }
  return Domain::synthetic;
}

inline Backend configured_backend(const RunContext& ctx) {
  return backend_from_string(ctx.config.value("backend", std::string("synthetic")));
}

inline std::shared_ptr<const validation::Lexicons> load_lexicons(const RunContext& ctx) {
  const auto dir = ctx.config.contains("lexicons_dir") ? std::filesystem::path(ctx.config["lexicons_dir"].get<std::string>())
                                                       : ctx.data_dir / "lexicons";
  return std::make_shared<const validation::Lexicons>(validation::Lexicons::load(dir));
}

// The synthetic ground-truth joint. It depends on the configuration only,
// never on --seed, so runs with different seeds sample the same world.
inline std::shared_ptr<const agents::SyntheticJoint> synthetic_joint(const RunContext& ctx) {
  const auto s = ctx.section("synthetic");
  if (s.contains("joint_file"))
    return std::make_shared<const agents::SyntheticJoint>(agents::SyntheticJoint::from_json(
        read_json_file(s["joint_file"].get<std::string>(), Errc::invalid_config)));
  Rng rng(s.value("joint_seed", std::uint64_t{5}));
  return std::make_shared<const agents::SyntheticJoint>(agents::SyntheticJoint::random(
      agents::default_synthetic_tones(), agents::default_synthetic_sentences(), rng));
}

inline std::shared_ptr<agents::LlmClient> llm_client(const RunContext& ctx) {
  auto params = agents::LlmParams::from_json(ctx.section("llm"));
  std::filesystem::create_directories(ctx.out);
  return std::make_shared<agents::LlmClient>(params, std::make_shared<agents::HttplibTransport>(params.timeout),
                                             std::make_shared<JsonlWriter>(ctx.out / "llm_audit.jsonl"));
}

inline agents::PromptLibrary load_prompts(const RunContext& ctx) {
  const auto dir = ctx.config.contains("prompts_dir") ? std::filesystem::path(ctx.config["prompts_dir"].get<std::string>())
                                                      : ctx.data_dir / "prompts";
  return agents::PromptLibrary::load(dir);
}

struct ElicitOverrides {
  std::optional<Backend> backend;
  std::optional<std::size_t> chains;
  std::optional<std::size_t> iterations;
};

inline chain::ExperimentConfig experiment_config(const RunContext& ctx, Backend backend, const ElicitOverrides& o = {}) {
  auto cfg = chain::ExperimentConfig::from_json(ctx.section("experiment"));
  if (o.chains) cfg.n_chains = *o.chains;
  if (o.iterations) cfg.n_iterations = *o.iterations;
  cfg.rng_seed = ctx.seed;
  cfg.domain = domain_of(backend);
  if (cfg.seed_items.empty())
    for (const auto& t : agents::default_synthetic_tones()) cfg.seed_items.emplace_back(t);
  cfg.validate();
  return cfg;
}

// Runs every chain to completion with a synchronous agent and writes the
// trial log. Human elicitation goes through `serve` instead.
inline nlohmann::json cmd_elicit(const RunContext& ctx, const ElicitOverrides& o = {}) {
  const Backend backend = o.backend.value_or(configured_backend(ctx));
  if (backend == Backend::human)
    throw Error(Errc::invalid_config, "human elicitation runs through the trial service: use `serve`");
  const auto cfg = experiment_config(ctx, backend, o);
  std::unique_ptr<agents::TrialAgent> agent;
  if (backend == Backend::synthetic) {
    agent = std::make_unique<agents::SyntheticAgent>(synthetic_joint(ctx), ctx.seed);
  } else {
    agent = std::make_unique<agents::LlmAgent>(llm_client(ctx), load_prompts(ctx));
  }
  std::filesystem::create_directories(ctx.out);
  chain::Experiment exp(cfg, load_lexicons(ctx), chain::logical_clock());
  auto log = std::make_shared<JsonlWriter>(ctx.out / kTrialsFile, false);
  exp.set_log_sink([log](const nlohmann::json& j) { log->write(j); });
  chain::AutonomousOptions opt;
  const auto a = ctx.section("autonomous");
  opt.attempts_per_agent = a.value("attempts_per_agent", opt.attempts_per_agent);
  opt.max_reassignments = a.value("max_reassignments", opt.max_reassignments);
  const auto rep = chain::run_autonomous(exp, *agent, opt);

  auto m = make_manifest(ctx, Stage::elicit);
  m.outputs = {kTrialsFile};
  m.extra = {{"domain", std::string(to_string(cfg.domain))},
             {"backend", to_string(cfg.domain)},
             {"chains", cfg.n_chains},
             {"iterations", cfg.n_iterations},
             {"accepted_trials", exp.accepted_trials()},
             {"agents", rep.agents_used},
             {"responses", rep.responses},
             {"rejections", rep.rejections}};
  write_manifest(ctx.out, m);
  return m.extra;
}

// Accepted responses read back from a trial log.
struct ElicitData {
  Domain domain = Domain::synthetic;
  std::vector<Tone> tones;           // T-trial answers, log order
  std::vector<Sentence> sentences;   // S-trial answers, log order
};

inline ElicitData load_elicit(const std::filesystem::path& dir) {
  ElicitData d;
  const auto m = read_manifest(dir, Stage::elicit);
  d.domain = domain_from_string(m.at("extra").value("domain", std::string("synthetic")));
  for_each_jsonl(dir / kTrialsFile, [&](const nlohmann::json& j, std::size_t line) {
    chain::Trial t;
    try {
      t = chain::trial_from_json(j);
    } catch (const std::exception& e) {
      throw Error(Errc::corrupt_state, (dir / kTrialsFile).string() + " line " + std::to_string(line) + ": " + e.what());
    }
    if (t.status != TrialStatus::accepted || !t.response) return;
    if (auto* tone = std::get_if<Tone>(&*t.response)) d.tones.push_back(*tone);
    else d.sentences.push_back(std::get<Sentence>(*t.response));
  });
  return d;
}

// Tones and sentences shared by the three judgment experiments.
struct ItemSet {
  Domain domain = Domain::synthetic;
  std::vector<Tone> tones;
  std::vector<Sentence> sentences;

  nlohmann::json to_json() const {
    nlohmann::json t = nlohmann::json::array(), s = nlohmann::json::array();
    for (const auto& x : tones) t.push_back(x.text());
    for (const auto& x : sentences) s.push_back(x.text());
    return {{"domain", std::string(swp::to_string(domain))}, {"tones", t}, {"sentences", s}};
  }

  static ItemSet from_json(const nlohmann::json& j, Errc on_error) {
    ItemSet it;
    try {
      it.domain = domain_from_string(j.value("domain", std::string("synthetic")));
      for (const auto& t : j.at("tones")) it.tones.push_back(Tone::make(t.get<std::string>()));
      for (const auto& s : j.at("sentences")) it.sentences.push_back(Sentence::make(s.get<std::string>()));
    } catch (const std::exception& e) {
      throw Error(on_error, std::string("item set: ") + e.what());
    }
    return it;
  }
};

inline ItemSet load_items(const std::filesystem::path& dir) {
  return ItemSet::from_json(read_json_file(dir / kItemsFile, Errc::corrupt_state), Errc::corrupt_state);
}

// Item selection: explicit lists, another run's items.json, or the most
// frequent elicited tones plus a seeded sample of elicited sentences.
inline ItemSet choose_items(const RunContext& ctx, const ElicitData& data,
                            const std::optional<std::filesystem::path>& items_file) {
  const auto r = ctx.section("ratings");
  ItemSet it;
  it.domain = data.domain;
  if (items_file) {
    auto other = ItemSet::from_json(read_json_file(*items_file, Errc::invalid_config), Errc::invalid_config);
    other.domain = data.domain;
    return other;
  }
  if (r.contains("tones") && r.contains("sentences")) {
    auto j = r;
    j["domain"] = std::string(to_string(data.domain));
    return ItemSet::from_json(j, Errc::invalid_config);
  }
  const auto n_tones = r.value("n_tones", std::size_t{40});
  const auto n_sentences = r.value("n_sentences", std::size_t{80});
  std::map<std::string, std::size_t> freq;
  for (const auto& t : data.tones) ++freq[t.text()];
  std::vector<std::pair<std::string, std::size_t>> ranked(freq.begin(), freq.end());
  std::stable_sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
  for (std::size_t i = 0; i < ranked.size() && i < n_tones; ++i) it.tones.push_back(Tone::make(ranked[i].first));
  std::vector<Sentence> distinct;
  std::set<std::string> seen;
  for (const auto& s : data.sentences)
    if (seen.insert(s.text()).second) distinct.push_back(s);
  Rng rng(derive_seed(ctx.seed, hash_string("rating-sentences")));
  rng.shuffle(distinct);
  if (distinct.size() > n_sentences) distinct.erase(distinct.begin() + static_cast<std::ptrdiff_t>(n_sentences), distinct.end());
  std::sort(distinct.begin(), distinct.end(), [](const Sentence& a, const Sentence& b) { return a.text() < b.text(); });
  it.sentences = std::move(distinct);
  if (it.tones.size() < 2) throw Error(Errc::insufficient_units, "fewer than 2 elicited tones to rate");
  if (it.sentences.empty()) throw Error(Errc::insufficient_units, "no elicited sentences to rate");
  return it;
}

inline ratings::CollectOptions collect_options(const RunContext& ctx, const char* experiment) {
  const auto r = ctx.section("ratings");
  ratings::CollectOptions o;
  o.repeats = r.value("repeats", o.repeats);
  o.session_size = r.value("session_size", o.session_size);
  o.seed = derive_seed(ctx.seed, hash_string(experiment));
  return o;
}

inline std::unique_ptr<agents::Rater> make_rater(const RunContext& ctx, Domain domain) {
  switch (domain) {
    case Domain::synthetic:
      return std::make_unique<agents::SyntheticRater>(synthetic_joint(ctx), ctx.seed,
                                                      ctx.section("synthetic").value("noise_sd", 0.5));
    case Domain::llm:
      return std::make_unique<agents::LlmRater>(llm_client(ctx), load_prompts(ctx));
    case Domain::human:
      break;
  }
  throw Error(Errc::invalid_config, "human judgments are collected through the trial service: use `serve`");
}

inline ratings::MissingPolicy missing_policy(const RunContext& ctx) {
  return ratings::missing_policy_from_string(ctx.section("ratings").value("missing_policy", std::string("error")));
}

// Quality-of-fit ratings of the chosen tones x sentences.
inline nlohmann::json cmd_rate(const RunContext& ctx, const std::filesystem::path& input,
                               const std::optional<std::filesystem::path>& items_file = std::nullopt) {
  require_stages(input, Stage::rate);
  const auto data = load_elicit(input);
  const auto items = choose_items(ctx, data, items_file);
  auto rater = make_rater(ctx, data.domain);
  std::filesystem::create_directories(ctx.out);
  JsonlWriter log(ctx.out / kRatingsFile, false);
  const auto recs = ratings::collect_fit_ratings(*rater, items.tones, items.sentences, collect_options(ctx, "fit"),
                                                 [&](const ratings::RatingRecord& r) { log.write(ratings::to_json(r)); });
  const auto rm = ratings::aggregate_matrix(recs, items.tones, items.sentences, missing_policy(ctx), data.domain);
  ratings::write_rating_matrix(ctx.out, "rating_matrix", rm);
  write_json_file(ctx.out / kItemsFile, items.to_json());
  auto m = make_manifest(ctx, Stage::rate);
  m.inputs = {(input / kTrialsFile).string()};
  m.outputs = {kRatingsFile, "rating_matrix.csv", "rating_matrix_sentences.csv", kItemsFile};
  m.extra = {{"domain", std::string(to_string(data.domain))},
             {"tones", items.tones.size()},
             {"sentences", items.sentences.size()},
             {"records", recs.size()}};
  write_manifest(ctx.out, m);
  return m.extra;
}

inline nlohmann::json cmd_similarity(const RunContext& ctx, const std::filesystem::path& input) {
  require_stages(input, Stage::similarity);
  const auto items = load_items(input);
  auto rater = make_rater(ctx, items.domain);
  std::filesystem::create_directories(ctx.out);
  JsonlWriter log(ctx.out / kSimilarityFile, false);
  const auto recs = ratings::collect_similarities(*rater, items.tones, collect_options(ctx, "similarity"),
                                                  [&](const ratings::SimilarityRecord& r) { log.write(ratings::to_json(r)); });
  const auto sm = ratings::aggregate_similarity(recs, items.tones);
  ratings::write_similarity_matrix(ctx.out / "similarity_matrix.csv", sm);
  auto m = make_manifest(ctx, Stage::similarity);
  m.inputs = {(input / kItemsFile).string()};
  m.outputs = {kSimilarityFile, "similarity_matrix.csv"};
  m.extra = {{"domain", std::string(to_string(items.domain))}, {"records", recs.size()}};
  write_manifest(ctx.out, m);
  return m.extra;
}

inline nlohmann::json cmd_features(const RunContext& ctx, const std::filesystem::path& input) {
  require_stages(input, Stage::features);
  const auto items = load_items(input);
  auto rater = make_rater(ctx, items.domain);
  std::filesystem::create_directories(ctx.out);
  JsonlWriter log(ctx.out / kFeaturesFile, false);
  const auto recs = ratings::collect_features(*rater, items.tones, collect_options(ctx, "features"),
                                              [&](const ratings::FeatureRecord& r) { log.write(ratings::to_json(r)); });
  const auto fm = ratings::aggregate_features(recs, items.tones);
  ratings::write_feature_matrix(ctx.out / "feature_matrix.csv", fm);
  auto m = make_manifest(ctx, Stage::features);
  m.inputs = {(input / kItemsFile).string()};
  m.outputs = {kFeaturesFile, "feature_matrix.csv"};
  m.extra = {{"domain", std::string(to_string(items.domain))}, {"records", recs.size()}};
  write_manifest(ctx.out, m);
  return m.extra;
}

}  // namespace swp::cli
