#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace swp {

// Error codes shared by every module. The string form is what appears in
// logs, HTTP bodies and CLI diagnostics.
enum class Errc {
  invalid_config,
  invalid_item,
  quota_exhausted,
  unknown_trial,
  trial_not_open,
  chain_complete,
  agent_failure,
  stalled,
  unknown_sentence,
  unknown_tone,
  missing_slot,
  transport_error,
  auth_error,
  malformed_response,
  parse_error,
  infeasible_plan,
  unknown_item,
  empty_cell,
  missing_pair,
  missing_cell,
  empty_histogram,
  degenerate_variance,
  degenerate_row,
  sentence_set_mismatch,
  insufficient_units,
  non_symmetric_input,
  negative_dissimilarity,
  out_of_range,
  rank_deficient,
  zero_vector,
  missing_counterpart,
  non_ergodic_joint,
  no_convergence,
  shape_mismatch,
  svd_failure,
  invalid_parameter,
  method_mismatch,
  corrupt_state,
  port_in_use,
  io_error,
  schema_error,
};

constexpr std::string_view to_string(Errc code) noexcept {
  switch (code) {
    case Errc::invalid_config: return "invalid-config";
    case Errc::invalid_item: return "invalid-item";
    case Errc::quota_exhausted: return "quota-exhausted";
    case Errc::unknown_trial: return "unknown-trial";
    case Errc::trial_not_open: return "trial-not-open";
    case Errc::chain_complete: return "chain-complete";
    case Errc::agent_failure: return "agent-failure";
    case Errc::stalled: return "stalled";
    case Errc::unknown_sentence: return "unknown-sentence";
    case Errc::unknown_tone: return "unknown-tone";
    case Errc::missing_slot: return "missing-slot";
    case Errc::transport_error: return "transport-error";
    case Errc::auth_error: return "auth-error";
    case Errc::malformed_response: return "malformed-response";
    case Errc::parse_error: return "parse-error";
    case Errc::infeasible_plan: return "infeasible-plan";
    case Errc::unknown_item: return "unknown-item";
    case Errc::empty_cell: return "empty-cell";
    case Errc::missing_pair: return "missing-pair";
    case Errc::missing_cell: return "missing-cell";
    case Errc::empty_histogram: return "empty-histogram";
    case Errc::degenerate_variance: return "degenerate-variance";
    case Errc::degenerate_row: return "degenerate-row";
    case Errc::sentence_set_mismatch: return "sentence-set-mismatch";
    case Errc::insufficient_units: return "insufficient-units";
    case Errc::non_symmetric_input: return "non-symmetric-input";
    case Errc::negative_dissimilarity: return "negative-dissimilarity";
    case Errc::out_of_range: return "out-of-range";
    case Errc::rank_deficient: return "rank-deficient";
    case Errc::zero_vector: return "zero-vector";
    case Errc::missing_counterpart: return "missing-counterpart";
    case Errc::non_ergodic_joint: return "non-ergodic-joint";
    case Errc::no_convergence: return "no-convergence";
    case Errc::shape_mismatch: return "shape-mismatch";
    case Errc::svd_failure: return "svd-failure";
    case Errc::invalid_parameter: return "invalid-parameter";
    case Errc::method_mismatch: return "method-mismatch";
    case Errc::corrupt_state: return "corrupt-state";
    case Errc::port_in_use: return "port-in-use";
    case Errc::io_error: return "io-error";
    case Errc::schema_error: return "schema-error";
  }
  return "unknown";
}

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what),
        code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace swp
