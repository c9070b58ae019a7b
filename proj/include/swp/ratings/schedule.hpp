#pragma once

#include <numeric>
#include <optional>
#include <vector>

#include "swp/core/error.hpp"
#include "swp/core/rng.hpp"

namespace swp::ratings {

struct PlanSlot {
  std::size_t item;     // index into the item list being rated
  std::size_t session;  // rater slot
};

struct Plan {
  std::vector<PlanSlot> slots;
  std::size_t n_sessions = 0;
  std::size_t session_size = 0;  // effective size; the last session may be shorter
};

// Lays out `n_items * repeats` slots as `repeats` rounds over one fixed item
// order and cuts the sequence into sessions of `session_size` consecutive
// slots. Any window of at most n_items consecutive slots holds distinct
// items, so capping the session size at n_items guarantees that no session
// sees an item twice. `max_raters`, when given, bounds the session count.
inline Plan schedule_plan(std::size_t n_items, std::size_t repeats, std::size_t session_size = 12,
                          std::optional<std::size_t> max_raters = std::nullopt,
                          std::optional<std::uint64_t> shuffle_seed = std::nullopt) {
  if (n_items == 0) throw Error(Errc::invalid_parameter, "nothing to schedule");
  if (repeats < 1) throw Error(Errc::invalid_parameter, "repeats must be >= 1");
  if (session_size < 1) throw Error(Errc::invalid_parameter, "session size must be >= 1");
  const std::size_t total = n_items * repeats;
  if (max_raters && session_size * *max_raters < total)
    throw Error(Errc::infeasible_plan, std::to_string(*max_raters) + " raters x " + std::to_string(session_size) +
                                           " trials cannot cover " + std::to_string(total) + " slots");
  std::vector<std::size_t> order(n_items);
  std::iota(order.begin(), order.end(), 0);
  if (shuffle_seed) {
    Rng rng(derive_seed(*shuffle_seed, hash_string("rating-plan")));
    rng.shuffle(order);
  }
  Plan plan;
  plan.session_size = std::min(session_size, n_items);
  if (max_raters && plan.session_size * *max_raters < total)
    throw Error(Errc::infeasible_plan, "sessions must be capped at " + std::to_string(plan.session_size) +
                                           " distinct items; " + std::to_string(*max_raters) +
                                           " raters are not enough");
  plan.slots.reserve(total);
  for (std::size_t k = 0; k < total; ++k) plan.slots.push_back({order[k % n_items], k / plan.session_size});
  plan.n_sessions = (total + plan.session_size - 1) / plan.session_size;
  return plan;
}

struct RatingSlot {
  std::size_t tone;
  std::size_t sentence;
  std::size_t session;
};

// Quality-of-fit plan: every (tone, sentence) pair exactly `repeats` times.
inline std::vector<RatingSlot> schedule_rating_plan(std::size_t n_tones, std::size_t n_sentences, std::size_t repeats,
                                                    std::size_t session_size = 12,
                                                    std::optional<std::size_t> max_raters = std::nullopt,
                                                    std::optional<std::uint64_t> shuffle_seed = std::nullopt) {
  const auto plan = schedule_plan(n_tones * n_sentences, repeats, session_size, max_raters, shuffle_seed);
  std::vector<RatingSlot> out;
  out.reserve(plan.slots.size());
  for (const auto& s : plan.slots) out.push_back({s.item / n_sentences, s.item % n_sentences, s.session});
  return out;
}

// Unordered pairs (i <= j) in lexicographic index order: n(n+1)/2 pairs,
// self pairs included (820 for 40 tones).
inline std::vector<std::pair<std::size_t, std::size_t>> similarity_pairs(std::size_t n) {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i; j < n; ++j) out.emplace_back(i, j);
  return out;
}

}  // namespace swp::ratings
