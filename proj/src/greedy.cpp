#include "dex/greedy.hpp"

#include <stdexcept>
#include <string>

#include "dex/error.hpp"

namespace dex {

std::vector<std::size_t> tie_ranks(std::size_t terminal_count, std::span<const std::size_t> tie_break) {
  std::vector<std::size_t> ranks(terminal_count, terminal_count);
  std::size_t next = 0;
  for (auto t : tie_break) {
    if (t >= terminal_count) throw std::invalid_argument("tie-break entry " + std::to_string(t) + " out of range");
    if (ranks[t] != terminal_count) throw std::invalid_argument("tie-break entry " + std::to_string(t) + " repeated");
    ranks[t] = next++;
  }
  for (std::size_t i = 0; i < terminal_count; ++i) {
    if (ranks[i] == terminal_count) ranks[i] = next++;
  }
  return ranks;
}

RateVector edmonds_allocate(const Instance& instance, std::size_t target, std::span<const Rational> weights,
                            std::span<const std::size_t> tie_break) {
  const std::size_t m = instance.terminal_count();
  if (target >= m) throw std::invalid_argument("target terminal out of range");
  if (weights.size() != m) throw std::invalid_argument("weight vector length mismatch");
  for (const auto& w : weights) {
    if (w < 0) throw std::invalid_argument("greedy weights must be nonnegative");
  }
  const auto ranks = tie_ranks(m, tie_break);
  const TerminalSet candidates = instance.transmitters() & ~singleton(target);
  const auto order = greedy_order(candidates, weights, ranks);

  const SourceModel& model = instance.model();
  RateVector rates(m, Rational(0));
  TerminalSet known = singleton(target);
  Rational known_entropy = model.joint_entropy(known);
  for (auto j : order) {
    known |= singleton(j);
    Rational next = model.joint_entropy(known);
    rates[j] = next - known_entropy;
    known_entropy = std::move(next);
  }
  return rates;
}

Rational region_bound(const Instance& instance, std::size_t target, TerminalSet subset) {
  const TerminalSet pool = instance.transmitters() & ~singleton(target);
  const TerminalSet rest = (pool & ~subset) | singleton(target);
  return instance.model().cond_entropy(subset, rest);
}

bool feasible_in_region(std::span<const Rational> rates, const Instance& instance, std::size_t target) {
  const std::size_t m = instance.terminal_count();
  if (m > 20) throw GuardExceeded("exhaustive region check limited to 20 terminals");
  if (rates.size() != m) throw std::invalid_argument("rate vector length mismatch");
  if (target >= m) throw std::invalid_argument("target terminal out of range");
  const TerminalSet pool = instance.transmitters() & ~singleton(target);
  // Enumerate nonempty subsets of the pool.
  for (TerminalSet s = pool; s != 0; s = (s - 1) & pool) {
    Rational sum = 0;
    for (auto i : members(s)) sum += rates[i];
    if (sum < region_bound(instance, target, s)) return false;
  }
  return true;
}

}  // namespace dex
