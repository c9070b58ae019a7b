#pragma once

#include <filesystem>
#include <fstream>
#include <memory>
#include <mutex>

#include "swp/chain/experiment.hpp"
#include "swp/core/jsonl.hpp"

namespace swp::chain {

// Linearizes every operation on an Experiment behind one mutex and, when a
// log path is given, appends each trial transition to it before returning.
class Coordinator {
 public:
  explicit Coordinator(Experiment exp) : exp_(std::move(exp)) {}

  // Replays `log_path` if it exists, then keeps appending to it.
  static std::unique_ptr<Coordinator> open(ExperimentConfig config,
                                           std::shared_ptr<const validation::Lexicons> lexicons,
                                           const std::filesystem::path& log_path, Clock clock = system_clock_ms()) {
    std::unique_ptr<Coordinator> c;
    if (std::filesystem::exists(log_path)) {
      std::ifstream in(log_path);
      if (!in) throw Error(Errc::io_error, "cannot read " + log_path.string());
      c = std::make_unique<Coordinator>(Experiment::replay(std::move(config), std::move(lexicons), in, clock));
    } else {
      c = std::make_unique<Coordinator>(Experiment(std::move(config), std::move(lexicons), clock));
    }
    c->attach_log(std::make_shared<JsonlWriter>(log_path));
    return c;
  }

  void attach_log(std::shared_ptr<JsonlWriter> log) {
    std::lock_guard lock(mu_);
    log_ = std::move(log);
    exp_.set_log_sink([w = log_](const nlohmann::json& j) { w->write(j); });
  }

  std::optional<Trial> next_trial(const std::string& agent_id) {
    std::lock_guard lock(mu_);
    return exp_.next_trial(agent_id);
  }

  SubmitOutcome submit_response(const std::string& trial_id, std::string_view raw) {
    std::lock_guard lock(mu_);
    return exp_.submit_response(trial_id, raw);
  }

  void expire_trial(const std::string& trial_id) {
    std::lock_guard lock(mu_);
    exp_.expire_trial(trial_id);
  }

  std::size_t expire_stale() {
    std::lock_guard lock(mu_);
    return exp_.expire_stale();
  }

  Trial trial(const std::string& trial_id) const {
    std::lock_guard lock(mu_);
    return exp_.trial(trial_id);
  }

  nlohmann::json snapshot() const {
    std::lock_guard lock(mu_);
    return exp_.snapshot();
  }

  bool complete() const {
    std::lock_guard lock(mu_);
    return exp_.complete();
  }

  // Runs `fn(const Experiment&)` under the lock.
  template <typename Fn>
  auto inspect(Fn&& fn) const {
    std::lock_guard lock(mu_);
    return fn(static_cast<const Experiment&>(exp_));
  }

  template <typename Fn>
  auto mutate(Fn&& fn) {
    std::lock_guard lock(mu_);
    return fn(exp_);
  }

 private:
  mutable std::mutex mu_;
  Experiment exp_;
  std::shared_ptr<JsonlWriter> log_;
};

}  // namespace swp::chain
