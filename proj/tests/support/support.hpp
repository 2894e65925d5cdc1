#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "dex/instance.hpp"

namespace dex::testing {

std::filesystem::path fixture(const std::string& name);

/// Terminal rows {110,101,011,100,010,001} over GF(p).
LinearSource six_terminal_source(std::uint32_t characteristic);
Instance six_terminal_instance(std::uint32_t characteristic, TerminalSet users);

/// Ownership {1,2}, {0,1,3}, {0,2} of four packets; terminals 0 and 1 are users.
Instance two_users_one_helper();

struct RandomSpec {
  std::size_t min_terminals = 3;
  std::size_t max_terminals = 6;
  std::size_t max_packets = 6;
  std::size_t min_users = 1;
  std::size_t max_users = 1;  // clamped to m
  bool helpers_only = false;  // transmitters = a random subset of helpers that keeps users decodable
  int max_weight = 10;
};

/// Random linear source over GF(2), GF(3) or GF(5) whose joint rank is N.
/// Weights are random rationals in [0, max_weight] with denominators <= 4.
/// Returns nullopt when the helpers-only draw has no decodable helper set.
std::optional<Instance> random_instance(std::mt19937_64& rng, const RandomSpec& spec);

/// Optimum of min alpha.R over the cut-set polytope (plus R >= 0 and the
/// non-transmitter fixings) by enumerating vertices: every choice of m
/// linearly independent tight constraints, solved with rational elimination.
/// Independent of the simplex oracle; exponential, m <= 5 only.
Rational vertex_enumeration_optimum(const Instance& instance);

/// Rank over a prime field from the size of the row span (enumerates p^rows
/// combinations).
std::size_t span_rank(const FieldMatrix& m);

}  // namespace dex::testing
