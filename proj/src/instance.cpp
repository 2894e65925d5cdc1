#include "dex/instance.hpp"

#include <stdexcept>
#include <string>

#include "dex/error.hpp"

namespace dex {

Instance::Instance(SourceModel model, TerminalSet users, std::vector<Rational> weights,
                   std::optional<TerminalSet> transmitters)
    : model_(std::move(model)), users_(users), weights_(std::move(weights)) {
  const std::size_t m = model_.terminal_count();
  const TerminalSet everyone = all_terminals(m);
  if (m < 1) throw std::invalid_argument("instance needs at least one terminal");
  if (users_ == 0) throw std::invalid_argument("user set must be nonempty");
  if ((users_ & ~everyone) != 0) throw std::invalid_argument("user index out of range");
  if (weights_.size() != m) {
    throw std::invalid_argument("expected " + std::to_string(m) + " weights, got " + std::to_string(weights_.size()));
  }
  for (std::size_t i = 0; i < m; ++i) {
    if (weights_[i] < 0) throw std::invalid_argument("weight of terminal " + std::to_string(i) + " is negative");
  }
  transmitters_ = transmitters.value_or(everyone);
  if ((transmitters_ & ~everyone) != 0) throw std::invalid_argument("transmitter index out of range");

  const Rational total = model_.joint_entropy(everyone);
  for (auto l : members(users_)) {
    if (model_.joint_entropy(transmitters_ | singleton(l)) != total) {
      throw InfeasibleInstance("user " + std::to_string(l) +
                               " cannot recover the source from its observation and the allowed transmitters");
    }
  }
}

Rational Instance::objective(std::span<const Rational> rates) const {
  if (rates.size() != weights_.size()) throw std::invalid_argument("rate vector length mismatch");
  Rational total = 0;
  for (std::size_t i = 0; i < rates.size(); ++i) total += weights_[i] * rates[i];
  return total;
}

}  // namespace dex
