#pragma once

#include <chrono>
#include <cstdint>
#include <functional>
#include <istream>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "swp/core/error.hpp"
#include "swp/core/jsonl.hpp"
#include "swp/core/rng.hpp"
#include "swp/core/types.hpp"
#include "swp/validation/filters.hpp"
#include "swp/validation/lexicons.hpp"

namespace swp::chain {

using Millis = std::int64_t;
using Clock = std::function<Millis()>;

// Monotone counter starting at 0; keeps logs byte-identical across runs.
inline Clock logical_clock(Millis start = 0) {
  auto t = std::make_shared<Millis>(start);
  return [t] { return (*t)++; };
}

inline Clock system_clock_ms() {
  return [] {
    return std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::system_clock::now().time_since_epoch())
        .count();
  };
}

enum class SeedPolicy { uniform, cycle };
enum class AssignmentPolicy { least_progress, random };

struct ExperimentConfig {
  std::string experiment_id = "sp";
  Domain domain = Domain::synthetic;
  std::size_t n_chains = 90;
  std::size_t n_iterations = 100;
  std::size_t min_trials_per_agent = 10;
  std::size_t max_trials_per_agent = 12;
  std::vector<ChainItem> seed_items;
  SeedPolicy seed_policy = SeedPolicy::uniform;
  AssignmentPolicy assignment = AssignmentPolicy::least_progress;
  nlohmann::json agent_backend = nlohmann::json::object();
  std::uint64_t rng_seed = 0;
  Millis lock_timeout_ms = 10 * 60 * 1000;
  validation::FilterConfig filters;

  void validate() const {
    if (n_chains < 1) throw Error(Errc::invalid_config, "n_chains must be >= 1");
    if (n_iterations < 1) throw Error(Errc::invalid_config, "n_iterations must be >= 1");
    if (min_trials_per_agent < 1 || min_trials_per_agent > max_trials_per_agent)
      throw Error(Errc::invalid_config, "trials_per_agent needs 1 <= min <= max");
    if (seed_items.empty()) throw Error(Errc::invalid_config, "seed_items must be non-empty");
    if (lock_timeout_ms <= 0) throw Error(Errc::invalid_config, "lock_timeout_ms must be positive");
  }

  nlohmann::json to_json() const {
    nlohmann::json seeds = nlohmann::json::array();
    for (const auto& s : seed_items) seeds.push_back(swp::to_json(s));
    return {
        {"experiment_id", experiment_id},
        {"domain", to_string(domain)},
        {"n_chains", n_chains},
        {"n_iterations", n_iterations},
        {"trials_per_agent", {min_trials_per_agent, max_trials_per_agent}},
        {"seed_items", seeds},
        {"seed_policy", seed_policy == SeedPolicy::uniform ? "uniform" : "cycle"},
        {"assignment", assignment == AssignmentPolicy::least_progress ? "least_progress" : "random"},
        {"agent_backend", agent_backend},
        {"rng_seed", rng_seed},
        {"lock_timeout_ms", lock_timeout_ms},
        {"filters", validation::to_json(filters)},
    };
  }

  static ExperimentConfig from_json(const nlohmann::json& j) {
    ExperimentConfig c;
    try {
      c.experiment_id = j.value("experiment_id", c.experiment_id);
      c.domain = domain_from_string(j.value("domain", std::string(to_string(c.domain))));
      c.n_chains = j.value("n_chains", c.n_chains);
      c.n_iterations = j.value("n_iterations", c.n_iterations);
      if (j.contains("trials_per_agent")) {
        const auto& r = j.at("trials_per_agent");
        c.min_trials_per_agent = r.at(0).get<std::size_t>();
        c.max_trials_per_agent = r.at(1).get<std::size_t>();
      }
      if (j.contains("seed_items"))
        for (const auto& s : j.at("seed_items")) {
          if (s.is_string()) c.seed_items.emplace_back(Tone::make(s.get<std::string>()));
          else c.seed_items.push_back(chain_item_from_json(s));
        }
      const auto sp = j.value("seed_policy", std::string("uniform"));
      if (sp != "uniform" && sp != "cycle") throw Error(Errc::invalid_config, "seed_policy must be uniform|cycle");
      c.seed_policy = sp == "uniform" ? SeedPolicy::uniform : SeedPolicy::cycle;
      const auto ap = j.value("assignment", std::string("least_progress"));
      if (ap != "least_progress" && ap != "random")
        throw Error(Errc::invalid_config, "assignment must be least_progress|random");
      c.assignment = ap == "random" ? AssignmentPolicy::random : AssignmentPolicy::least_progress;
      c.agent_backend = j.value("agent_backend", nlohmann::json::object());
      c.rng_seed = j.value("rng_seed", c.rng_seed);
      c.lock_timeout_ms = j.value("lock_timeout_ms", c.lock_timeout_ms);
      if (j.contains("filters")) c.filters = validation::filter_config_from_json(j.at("filters"));
    } catch (const nlohmann::json::exception& e) {
      throw Error(Errc::invalid_config, e.what());
    } catch (const Error& e) {
      if (e.code() == Errc::invalid_config) throw;
      throw Error(Errc::invalid_config, e.what());
    }
    return c;
  }
};

struct HistoryEntry {
  std::size_t iteration;
  ChainItem item;
  std::string agent_id;  // empty for the seed
};

struct ChainState {
  std::string chain_id;
  Domain domain;
  std::vector<HistoryEntry> history;
  std::optional<std::size_t> open_trial;  // index into the trial table

  std::size_t iteration() const noexcept { return history.size() - 1; }
  const ChainItem& tip() const noexcept { return history.back().item; }
};

struct Trial {
  std::string trial_id;
  std::string chain_id;
  std::size_t iteration = 0;  // chain iteration of the prompt
  TrialKind kind = TrialKind::S;
  ChainItem prompt = Tone::make("neutral");
  std::optional<ChainItem> response;
  std::optional<std::string> raw_response;  // last submitted text
  std::string agent_id;
  TrialStatus status = TrialStatus::open;
  std::optional<validation::ValidationError> rejection_reason;
  int attempts = 0;
  Millis created_at = 0;
  std::optional<Millis> resolved_at;
};

inline nlohmann::json to_json(const Trial& t, std::optional<TrialStatus> status_override = std::nullopt) {
  nlohmann::json j = {
      {"trial_id", t.trial_id},
      {"chain_id", t.chain_id},
      {"iteration", t.iteration},
      {"kind", to_string(t.kind)},
      {"prompt", swp::to_json(t.prompt)},
      {"response", t.response ? swp::to_json(*t.response) : nlohmann::json(nullptr)},
      {"raw_response", t.raw_response ? nlohmann::json(*t.raw_response) : nlohmann::json(nullptr)},
      {"agent_id", t.agent_id},
      {"status", to_string(status_override.value_or(t.status))},
      {"reason", t.rejection_reason ? nlohmann::json{{"kind", validation::to_string(t.rejection_reason->kind)},
                                                     {"detail", t.rejection_reason->detail}}
                                    : nlohmann::json(nullptr)},
      {"attempts", t.attempts},
      {"created_at", t.created_at},
      {"resolved_at", t.resolved_at ? nlohmann::json(*t.resolved_at) : nlohmann::json(nullptr)},
  };
  return j;
}

inline Trial trial_from_json(const nlohmann::json& j) {
  Trial t;
  t.trial_id = j.at("trial_id").get<std::string>();
  t.chain_id = j.at("chain_id").get<std::string>();
  t.iteration = j.at("iteration").get<std::size_t>();
  t.kind = trial_kind_from_string(j.at("kind").get<std::string>());
  t.prompt = chain_item_from_json(j.at("prompt"));
  if (!j.at("response").is_null()) t.response = chain_item_from_json(j.at("response"));
  if (j.contains("raw_response") && !j.at("raw_response").is_null())
    t.raw_response = j.at("raw_response").get<std::string>();
  t.agent_id = j.at("agent_id").get<std::string>();
  t.status = trial_status_from_string(j.at("status").get<std::string>());
  if (!j.at("reason").is_null()) {
    const auto kind = validation::filter_kind_from_string(j.at("reason").at("kind").get<std::string>());
    if (!kind) throw Error(Errc::corrupt_state, "unknown rejection kind");
    t.rejection_reason = validation::ValidationError{*kind, j.at("reason").value("detail", std::string{})};
  }
  t.attempts = j.value("attempts", 0);
  t.created_at = j.at("created_at").get<Millis>();
  if (!j.at("resolved_at").is_null()) t.resolved_at = j.at("resolved_at").get<Millis>();
  return t;
}

struct AgentRecord {
  std::set<std::size_t> visited;  // chain indices
  std::size_t accepted = 0;
  std::size_t quota = 0;
  std::optional<std::size_t> open_trial;
};

struct SubmitOutcome {
  bool accepted = false;
  std::optional<validation::ValidationError> rejection;
};

// One accepted T-trial response.
struct ToneAnnotation {
  std::string chain_id;
  std::size_t iteration;
  Tone tone;
  Sentence sentence;  // the prompt the tone was given for
  std::string agent_id;
};

// State of one SP experiment: parallel chains, the trial table and the
// assignment ledger. Not thread-safe; see Coordinator for the locked
// wrapper used by concurrent callers.
class Experiment {
 public:
  using LogSink = std::function<void(const nlohmann::json&)>;

  Experiment(ExperimentConfig config, std::shared_ptr<const validation::Lexicons> lexicons,
             Clock clock = logical_clock())
      : config_(std::move(config)), lexicons_(std::move(lexicons)), clock_(std::move(clock)) {
    config_.validate();
    if (!lexicons_) throw Error(Errc::invalid_config, "lexicons required");
    std::vector<std::string> seed_tones;
    for (const auto& s : config_.seed_items)
      if (is_tone(s)) seed_tones.push_back(std::get<Tone>(s).text());
    lexicons_->check(seed_tones);

    const std::size_t width = std::max<std::size_t>(3, std::to_string(config_.n_chains - 1).size());
    Rng seed_rng(derive_seed(config_.rng_seed, hash_string("chain-seeds")));
    chains_.reserve(config_.n_chains);
    for (std::size_t c = 0; c < config_.n_chains; ++c) {
      std::string num = std::to_string(c);
      num.insert(0, width - num.size(), '0');
      const std::size_t pick = config_.seed_policy == SeedPolicy::uniform ? seed_rng.index(config_.seed_items.size())
                                                                          : c % config_.seed_items.size();
      ChainState chain{"chain-" + num, config_.domain, {{0, config_.seed_items[pick], ""}}, std::nullopt};
      chain_index_.emplace(chain.chain_id, c);
      chains_.push_back(std::move(chain));
    }
  }

  const ExperimentConfig& config() const noexcept { return config_; }
  const std::vector<ChainState>& chains() const noexcept { return chains_; }
  const std::vector<Trial>& trials() const noexcept { return trials_; }
  const std::map<std::string, AgentRecord>& ledger() const noexcept { return ledger_; }
  const validation::Lexicons& lexicons() const noexcept { return *lexicons_; }

  void set_log_sink(LogSink sink) { sink_ = std::move(sink); }
  void set_grammar_checker(validation::GrammarChecker checker) { grammar_ = std::move(checker); }

  Millis now() const { return clock_(); }

  const Trial& trial(const std::string& trial_id) const { return trials_.at(find_trial(trial_id)); }

  const ChainState& chain(const std::string& chain_id) const {
    auto it = chain_index_.find(chain_id);
    if (it == chain_index_.end()) throw Error(Errc::unknown_item, "unknown chain '" + chain_id + "'");
    return chains_[it->second];
  }

  // Deterministic per (rng_seed, agent_id), uniform over the configured range.
  std::size_t agent_quota(const std::string& agent_id) const {
    const auto span = config_.max_trials_per_agent - config_.min_trials_per_agent + 1;
    return config_.min_trials_per_agent +
           static_cast<std::size_t>(derive_seed(config_.rng_seed, hash_string("quota"), hash_string(agent_id)) % span);
  }

  bool chain_complete(const ChainState& c) const { return c.iteration() >= config_.n_iterations; }

  bool complete() const {
    for (const auto& c : chains_)
      if (!chain_complete(c)) return false;
    return true;
  }

  std::size_t accepted_trials() const {
    std::size_t n = 0;
    for (const auto& c : chains_) n += c.iteration();
    return n;
  }

  // Assigns the agent an open trial on a chain it has not visited, prompting
  // with exactly the chain tip. An agent that already holds an open trial
  // gets that same trial back. Returns nullopt when no chain is eligible;
  // throws Errc::quota_exhausted when the agent has used its quota.
  std::optional<Trial> next_trial(const std::string& agent_id) {
    if (agent_id.empty()) throw Error(Errc::invalid_item, "agent id must be non-empty");
    expire_stale();
    auto it = ledger_.find(agent_id);
    if (it != ledger_.end()) {
      if (it->second.open_trial) return trials_[*it->second.open_trial];
      if (it->second.accepted >= it->second.quota)
        throw Error(Errc::quota_exhausted, "agent '" + agent_id + "' has used its quota");
    }
    std::vector<std::size_t> eligible;
    for (std::size_t c = 0; c < chains_.size(); ++c) {
      const auto& ch = chains_[c];
      if (chain_complete(ch) || ch.open_trial) continue;
      if (it != ledger_.end() && it->second.visited.count(c)) continue;
      eligible.push_back(c);
    }
    if (eligible.empty()) return std::nullopt;

    std::size_t pick = eligible.front();
    if (config_.assignment == AssignmentPolicy::least_progress) {
      for (auto c : eligible)
        if (chains_[c].iteration() < chains_[pick].iteration()) pick = c;
    } else {
      Rng rng(derive_seed(config_.rng_seed, hash_string("assign"), assignments_));
      pick = eligible[rng.index(eligible.size())];
    }
    const auto idx = open_trial(pick, agent_id, next_trial_id(), clock_());
    emit(trials_[idx], TrialStatus::open);
    return trials_[idx];
  }

  // Validates `raw_text` against the trial's prompt. Accepted responses
  // advance the chain; rejected ones leave the trial open with the reason.
  SubmitOutcome submit_response(const std::string& trial_id, std::string_view raw_text) {
    const auto idx = find_trial(trial_id);
    Trial& t = trials_[idx];
    if (t.status != TrialStatus::open)
      throw Error(Errc::trial_not_open, "trial " + trial_id + " is " + std::string(to_string(t.status)));
    ChainState& ch = chains_[chain_index_.at(t.chain_id)];
    if (chain_complete(ch)) throw Error(Errc::chain_complete, "chain " + ch.chain_id + " is complete");

    t.attempts += 1;
    t.raw_response = std::string(raw_text);
    std::optional<validation::ValidationError> err;
    if (t.kind == TrialKind::S) {
      err = validation::validate_sentence(raw_text, std::get<Tone>(t.prompt).text(), *lexicons_, config_.filters,
                                          grammar_);
    } else {
      err = validation::validate_tone(raw_text, std::get<Sentence>(t.prompt).text(), *lexicons_, config_.filters);
    }
    if (err) {
      t.rejection_reason = err;
      emit(t, TrialStatus::rejected);
      return {false, err};
    }
    ChainItem item = t.kind == TrialKind::S ? ChainItem(Sentence::make(raw_text)) : ChainItem(Tone::make(raw_text));
    accept(idx, std::move(item), clock_());
    emit(trials_[idx], TrialStatus::accepted);
    return {true, std::nullopt};
  }

  // Releases the chain so the trial can be reissued to another agent.
  void expire_trial(const std::string& trial_id) {
    const auto idx = find_trial(trial_id);
    if (trials_[idx].status != TrialStatus::open)
      throw Error(Errc::trial_not_open, "trial " + trial_id + " is not open");
    expire(idx, clock_());
    emit(trials_[idx], TrialStatus::expired);
  }

  // Expires every open trial older than the lock timeout.
  std::size_t expire_stale() {
    if (open_count_ == 0) return 0;
    const Millis now = clock_();
    std::size_t n = 0;
    for (auto& ch : chains_) {
      if (!ch.open_trial) continue;
      const auto idx = *ch.open_trial;
      if (now - trials_[idx].created_at >= config_.lock_timeout_ms) {
        expire(idx, now);
        emit(trials_[idx], TrialStatus::expired);
        ++n;
      }
    }
    return n;
  }

  // Accepted T-trial responses ordered by (chain_id, iteration).
  std::vector<ToneAnnotation> tone_trials() const {
    std::vector<ToneAnnotation> out;
    for (const auto& ch : chains_)
      for (std::size_t k = 1; k < ch.history.size(); ++k)
        if (const auto* tone = std::get_if<Tone>(&ch.history[k].item))
          out.push_back({ch.chain_id, k, *tone, std::get<Sentence>(ch.history[k - 1].item), ch.history[k].agent_id});
    return out;
  }

  // Full state as one JSON document.
  nlohmann::json snapshot() const {
    nlohmann::json chains = nlohmann::json::array();
    for (const auto& ch : chains_) {
      nlohmann::json hist = nlohmann::json::array();
      for (const auto& h : ch.history)
        hist.push_back({{"iteration", h.iteration}, {"item", swp::to_json(h.item)}, {"agent_id", h.agent_id}});
      chains.push_back({{"chain_id", ch.chain_id},
                        {"domain", to_string(ch.domain)},
                        {"iteration", ch.iteration()},
                        {"history", hist},
                        {"open_trial", ch.open_trial ? nlohmann::json(trials_[*ch.open_trial].trial_id)
                                                     : nlohmann::json(nullptr)}});
    }
    nlohmann::json trials = nlohmann::json::array();
    for (const auto& t : trials_) trials.push_back(to_json(t));
    nlohmann::json ledger = nlohmann::json::object();
    for (const auto& [agent, rec] : ledger_) {
      nlohmann::json visited = nlohmann::json::array();
      for (auto c : rec.visited) visited.push_back(chains_[c].chain_id);
      ledger[agent] = {{"visited", visited}, {"accepted", rec.accepted}, {"quota", rec.quota}};
    }
    return {{"format", "swp-experiment-snapshot"},
            {"version", 1},
            {"config", config_.to_json()},
            {"next_trial_seq", next_seq_},
            {"assignments", assignments_},
            {"chains", chains},
            {"trials", trials},
            {"ledger", ledger}};
  }

  // Applies one trial-log record. Used by replay; every record must be a
  // legal transition from the current state or Errc::corrupt_state is thrown.
  void apply_log_record(const nlohmann::json& j, std::size_t line = 0) {
    const auto where = [&] { return "trial log line " + std::to_string(line) + ": "; };
    Trial rec;
    try {
      rec = trial_from_json(j);
    } catch (const nlohmann::json::exception& e) {
      throw Error(Errc::corrupt_state, where() + e.what());
    } catch (const Error& e) {
      throw Error(Errc::corrupt_state, where() + e.what());
    }
    auto cit = chain_index_.find(rec.chain_id);
    if (cit == chain_index_.end()) throw Error(Errc::corrupt_state, where() + "unknown chain " + rec.chain_id);
    ChainState& ch = chains_[cit->second];

    if (rec.status == TrialStatus::open) {
      if (trial_index_.count(rec.trial_id)) throw Error(Errc::corrupt_state, where() + "duplicate trial id");
      if (ch.open_trial || chain_complete(ch)) throw Error(Errc::corrupt_state, where() + "chain not assignable");
      if (ch.tip() != rec.prompt || rec.iteration != ch.iteration() || rec.kind != kind_for(ch.tip()))
        throw Error(Errc::corrupt_state, where() + "prompt is not the chain tip");
      auto lit = ledger_.find(rec.agent_id);
      if (lit != ledger_.end() &&
          (lit->second.open_trial || lit->second.visited.count(cit->second) || lit->second.accepted >= lit->second.quota))
        throw Error(Errc::corrupt_state, where() + "assignment violates the ledger");
      open_trial(cit->second, rec.agent_id, rec.trial_id, rec.created_at);
      bump_seq(rec.trial_id);
      return;
    }
    auto tit = trial_index_.find(rec.trial_id);
    if (tit == trial_index_.end()) throw Error(Errc::corrupt_state, where() + "unknown trial " + rec.trial_id);
    Trial& t = trials_[tit->second];
    if (t.status != TrialStatus::open) throw Error(Errc::corrupt_state, where() + "trial is not open");
    switch (rec.status) {
      case TrialStatus::rejected:
        t.attempts = rec.attempts;
        t.raw_response = rec.raw_response;
        t.rejection_reason = rec.rejection_reason;
        break;
      case TrialStatus::accepted:
        if (!rec.response || kind_for(*rec.response) == rec.kind || rec.kind != t.kind)
          throw Error(Errc::corrupt_state, where() + "accepted record has no valid response");
        t.attempts = rec.attempts;
        t.raw_response = rec.raw_response;
        accept(tit->second, *rec.response, rec.resolved_at.value_or(rec.created_at));
        break;
      case TrialStatus::expired:
        expire(tit->second, rec.resolved_at.value_or(rec.created_at));
        break;
      case TrialStatus::open:
        break;
    }
  }

  // Rebuilds state from the configuration and a trial log.
  static Experiment replay(ExperimentConfig config, std::shared_ptr<const validation::Lexicons> lexicons,
                           std::istream& log, Clock clock = logical_clock()) {
    Experiment e(std::move(config), std::move(lexicons), std::move(clock));
    for_each_jsonl(log, [&](const nlohmann::json& j, std::size_t line) { e.apply_log_record(j, line); });
    return e;
  }

 private:
  static TrialKind kind_for(const ChainItem& tip) { return is_tone(tip) ? TrialKind::S : TrialKind::T; }

  std::size_t find_trial(const std::string& trial_id) const {
    auto it = trial_index_.find(trial_id);
    if (it == trial_index_.end()) throw Error(Errc::unknown_trial, "unknown trial '" + trial_id + "'");
    return it->second;
  }

  std::string next_trial_id() {
    std::string num = std::to_string(next_seq_++);
    if (num.size() < 6) num.insert(0, 6 - num.size(), '0');
    return "t" + num;
  }

  void bump_seq(const std::string& trial_id) {
    if (trial_id.size() > 1 && trial_id[0] == 't') {
      try {
        next_seq_ = std::max<std::uint64_t>(next_seq_, std::stoull(trial_id.substr(1)) + 1);
      } catch (const std::exception&) {
      }
    }
  }

  std::size_t open_trial(std::size_t chain_idx, const std::string& agent_id, std::string trial_id, Millis at) {
    ChainState& ch = chains_[chain_idx];
    Trial t;
    t.trial_id = std::move(trial_id);
    t.chain_id = ch.chain_id;
    t.iteration = ch.iteration();
    t.kind = kind_for(ch.tip());
    t.prompt = ch.tip();
    t.agent_id = agent_id;
    t.created_at = at;
    const auto idx = trials_.size();
    trial_index_.emplace(t.trial_id, idx);
    trials_.push_back(std::move(t));
    ch.open_trial = idx;
    auto [it, fresh] = ledger_.try_emplace(agent_id);
    if (fresh) it->second.quota = agent_quota(agent_id);
    it->second.visited.insert(chain_idx);
    it->second.open_trial = idx;
    ++assignments_;
    ++open_count_;
    return idx;
  }

  void accept(std::size_t idx, ChainItem item, Millis at) {
    Trial& t = trials_[idx];
    ChainState& ch = chains_[chain_index_.at(t.chain_id)];
    if (kind_for(item) == kind_for(ch.tip()))
      throw Error(Errc::corrupt_state, "alternation violated on " + ch.chain_id);
    ch.history.push_back({ch.iteration() + 1, item, t.agent_id});
    ch.open_trial.reset();
    t.response = std::move(item);
    t.status = TrialStatus::accepted;
    t.resolved_at = at;
    auto& rec = ledger_.at(t.agent_id);
    rec.accepted += 1;
    rec.open_trial.reset();
    --open_count_;
  }

  void expire(std::size_t idx, Millis at) {
    Trial& t = trials_[idx];
    chains_[chain_index_.at(t.chain_id)].open_trial.reset();
    t.status = TrialStatus::expired;
    t.resolved_at = at;
    ledger_.at(t.agent_id).open_trial.reset();
    --open_count_;
  }

  void emit(const Trial& t, TrialStatus status) {
    if (sink_) sink_(to_json(t, status));
  }

  ExperimentConfig config_;
  std::shared_ptr<const validation::Lexicons> lexicons_;
  Clock clock_;
  LogSink sink_;
  validation::GrammarChecker grammar_;

  std::vector<ChainState> chains_;
  std::unordered_map<std::string, std::size_t> chain_index_;
  std::vector<Trial> trials_;
  std::unordered_map<std::string, std::size_t> trial_index_;
  std::map<std::string, AgentRecord> ledger_;
  std::uint64_t next_seq_ = 1;
  std::uint64_t assignments_ = 0;
  std::size_t open_count_ = 0;
};

inline Experiment create_experiment(ExperimentConfig config, std::shared_ptr<const validation::Lexicons> lexicons,
                                    Clock clock = logical_clock()) {
  return Experiment(std::move(config), std::move(lexicons), std::move(clock));
}

}  // namespace swp::chain
