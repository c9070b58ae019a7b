#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>

#include "swp/chain/coordinator.hpp"

namespace swp::agents {

// Connects remote participants to the chain engine. Each participant has at
// most one pending trial; it stays pending across repeated fetches (so a page
// reload shows the same trial) until it is accepted or expires. Expired
// trials free their chain for the next participant.
class HumanBridge {
 public:
  explicit HumanBridge(std::shared_ptr<chain::Coordinator> coord) : coord_(std::move(coord)) {}

  // The participant's pending trial, or a newly assigned one. nullopt when no
  // chain is currently eligible. Throws quota_exhausted when done.
  std::optional<chain::Trial> next_trial(const std::string& participant) {
    return coord_->next_trial(participant);
  }

  chain::SubmitOutcome submit(const std::string& trial_id, std::string_view text) {
    return coord_->submit_response(trial_id, text);
  }

  std::optional<chain::Trial> pending(const std::string& participant) const {
    return coord_->inspect([&](const chain::Experiment& e) -> std::optional<chain::Trial> {
      auto it = e.ledger().find(participant);
      if (it == e.ledger().end() || !it->second.open_trial) return std::nullopt;
      return e.trials()[*it->second.open_trial];
    });
  }

  // Expires trials past the lock timeout; returns how many.
  std::size_t sweep() { return coord_->expire_stale(); }

  chain::Coordinator& coordinator() noexcept { return *coord_; }

 private:
  std::shared_ptr<chain::Coordinator> coord_;
};

}  // namespace swp::agents
