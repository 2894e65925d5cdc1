#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "dex/rational.hpp"
#include "dex/source_model.hpp"

namespace dex {

/// Per-terminal rates in field symbols.
using RateVector = std::vector<Rational>;
/// One row per user (ascending terminal index), one column per terminal.
using RateMatrix = std::vector<RateVector>;

/// A data exchange problem: who observes what, who must decode, what each
/// transmitted symbol costs, and who may transmit.
class Instance {
 public:
  /// Throws std::invalid_argument for structural problems (empty or
  /// out-of-range user set, wrong weight count, negative weights) and
  /// InfeasibleInstance when some user cannot decode the whole source from
  /// its own observation plus the allowed transmitters.
  Instance(SourceModel model, TerminalSet users, std::vector<Rational> weights,
           std::optional<TerminalSet> transmitters = std::nullopt);

  const SourceModel& model() const noexcept { return model_; }
  std::size_t terminal_count() const noexcept { return model_.terminal_count(); }
  TerminalSet users() const noexcept { return users_; }
  std::vector<std::size_t> user_list() const { return members(users_); }
  std::size_t user_count() const noexcept { return cardinality(users_); }
  const std::vector<Rational>& weights() const noexcept { return weights_; }
  TerminalSet transmitters() const noexcept { return transmitters_; }
  bool restricted() const noexcept { return transmitters_ != all_terminals(terminal_count()); }

  Rational objective(std::span<const Rational> rates) const;

 private:
  SourceModel model_;
  TerminalSet users_;
  std::vector<Rational> weights_;
  TerminalSet transmitters_;
};

}  // namespace dex
