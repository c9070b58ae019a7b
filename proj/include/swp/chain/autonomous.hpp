#pragma once

#include <string>

#include "swp/agents/agent.hpp"
#include "swp/chain/experiment.hpp"

namespace swp::chain {

struct AutonomousOptions {
  int attempts_per_agent = 3;  // responses per agent id before the trial is expired
  // Consecutive failed agent ids (all attempts rejected) allowed on one chain
  // before the run is declared stalled.
  std::size_t max_reassignments = 10;
  std::string agent_prefix = "agent-";
};

struct AutonomousReport {
  std::size_t agents_used = 0;
  std::size_t responses = 0;
  std::size_t rejections = 0;
  std::size_t expiries = 0;
};

// Drives every chain to n_iterations with a synchronous agent. Each agent id
// answers until its quota is used or no unvisited chain is free; a trial
// whose responses are all rejected is expired and reissued to a fresh id.
inline AutonomousReport run_autonomous(Experiment& exp, agents::TrialAgent& agent, const AutonomousOptions& opt = {}) {
  if (opt.attempts_per_agent < 1) throw Error(Errc::invalid_config, "attempts_per_agent must be >= 1");
  AutonomousReport rep;
  std::size_t serial = exp.ledger().size();
  auto fresh_id = [&] {
    std::string id;
    do id = opt.agent_prefix + std::to_string(serial++);
    while (exp.ledger().count(id));
    ++rep.agents_used;
    return id;
  };

  std::string agent_id = fresh_id();
  std::map<std::string, std::size_t> failures;  // chain_id -> consecutive failed agent ids
  while (!exp.complete()) {
    std::optional<Trial> trial;
    try {
      trial = exp.next_trial(agent_id);
    } catch (const Error& e) {
      if (e.code() != Errc::quota_exhausted) throw;
    }
    if (!trial) {
      const bool fresh = exp.ledger().count(agent_id) == 0;
      if (fresh) throw Error(Errc::stalled, "no chain is assignable to a fresh agent");
      agent_id = fresh_id();
      continue;
    }

    bool accepted = false;
    for (int attempt = 0; attempt < opt.attempts_per_agent && !accepted; ++attempt) {
      agents::TrialRequest req{trial->trial_id, trial->chain_id, trial->kind, trial->prompt,
                               trial->iteration, agent_id, attempt};
      std::string raw;
      try {
        raw = agent.respond(req);
      } catch (const Error& e) {
        throw Error(Errc::agent_failure, std::string("agent failed on ") + trial->trial_id + ": " + e.what());
      }
      ++rep.responses;
      accepted = exp.submit_response(trial->trial_id, raw).accepted;
      if (!accepted) ++rep.rejections;
    }
    if (accepted) {
      failures.erase(trial->chain_id);
      continue;
    }
    exp.expire_trial(trial->trial_id);
    ++rep.expiries;
    if (++failures[trial->chain_id] > opt.max_reassignments)
      throw Error(Errc::stalled, trial->chain_id + " made no progress after " +
                                     std::to_string(opt.max_reassignments + 1) + " agents");
    agent_id = fresh_id();
  }
  return rep;
}

}  // namespace swp::chain
