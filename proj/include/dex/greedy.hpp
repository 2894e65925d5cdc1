#pragma once

#include <algorithm>
#include <cstddef>
#include <span>
#include <vector>

#include "dex/instance.hpp"

namespace dex {

/// Position of every terminal in the tie-break order. Listed terminals come
/// first in the given order, the rest follow by ascending index. Throws
/// std::invalid_argument on duplicates or out-of-range entries.
std::vector<std::size_t> tie_ranks(std::size_t terminal_count, std::span<const std::size_t> tie_break);

/// Candidates sorted by ascending weight, equal weights by tie rank.
template <typename Weight>
std::vector<std::size_t> greedy_order(TerminalSet candidates, std::span<const Weight> weights,
                                      std::span<const std::size_t> ranks) {
  std::vector<std::size_t> order = members(candidates);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (weights[a] < weights[b]) return true;
    if (weights[b] < weights[a]) return false;
    return ranks[a] < ranks[b];
  });
  return order;
}

/// Optimal vertex of the single-user region for `target`: the transmitters
/// other than the target, in ascending weight order, each get their
/// conditional entropy given the target and all earlier terminals. Entries
/// for the target and non-transmitters are zero.
RateVector edmonds_allocate(const Instance& instance, std::size_t target, std::span<const Rational> weights,
                            std::span<const std::size_t> tie_break = {});

/// f(S) = H(X_S | X_{(T \ S) u {t}}) for S within the transmitters T minus
/// the target t.
Rational region_bound(const Instance& instance, std::size_t target, TerminalSet subset);

/// Exhaustive check of R(S) >= f(S) over every S within T \ {t}. Throws
/// GuardExceeded above 20 terminals.
bool feasible_in_region(std::span<const Rational> rates, const Instance& instance, std::size_t target);

}  // namespace dex
