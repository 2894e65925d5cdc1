#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "dex/instance.hpp"

namespace dex {

/// All nonempty proper subsets S of the m terminals that miss at least one
/// user, in increasing mask order. Throws GuardExceeded above 12 terminals.
std::vector<TerminalSet> enumerate_cutsets(std::size_t terminal_count, TerminalSet users);

struct CutConstraint {
  TerminalSet subset = 0;
  Rational rhs;           // H(X_S | X_{S^c})
  std::size_t owner = 0;  // lowest-index user outside S
};

/// min sum alpha_i R_i  s.t.  R(S n T) >= rhs(S) for every cut, R >= 0,
/// R_i = 0 outside the transmitter set T.
struct CutSetLP {
  std::size_t terminal_count = 0;
  TerminalSet users = 0;
  TerminalSet transmitters = 0;
  std::vector<Rational> objective;
  std::vector<CutConstraint> constraints;
};

CutSetLP build_lp(const Instance& instance);

struct LpSolution {
  RateVector rates;
  Rational value;
  std::size_t pivots = 0;
};

/// Exact optimum by rational simplex with Bland's rule. Throws
/// GuardExceeded above 10 terminals and InfeasibleInstance when no rate
/// vector satisfies the cuts.
LpSolution solve_exact(const CutSetLP& lp);

struct CutViolation {
  TerminalSet subset = 0;
  Rational required;
  Rational provided;
};

/// Every cut whose rate sum (over transmitters in S) falls below
/// H(X_S | X_{S^c}). Throws GuardExceeded above 20 terminals.
std::vector<CutViolation> violated_cuts(const Instance& instance, std::span<const Rational> rates);

/// "{0,2}" style rendering of a terminal set.
std::string format_set(TerminalSet set);

}  // namespace dex
