#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "dex/field.hpp"
#include "dex/instance.hpp"

namespace dex {

/// Integer chunk-rates r_i = L * R_i for a chunk factor L.
struct ChunkAllocation {
  std::uint64_t chunk_factor = 1;
  std::vector<std::uint64_t> chunk_rates;

  Rational total_rate() const;  // sum r_i / L
};

/// L = lcm of the reduced denominators. Throws std::invalid_argument for
/// negative rates and std::domain_error when L > max_denominator.
ChunkAllocation rationalize(std::span<const Rational> rates, std::uint64_t max_denominator);

/// Moves approximate rates (e.g. solver output) onto the grid 1/L for the
/// smallest L <= max_denominator whose nearest grid points all lie within
/// 1/(2 max_denominator) of the input; without such an L every rate is
/// rounded up on the 1/max_denominator grid. Any cut the snap breaks is then
/// repaired by raising the cheapest transmitter in it by the deficit.
RateVector snap_rates(const Instance& instance, std::span<const Rational> rates, std::uint64_t max_denominator);

/// Linear transmissions F_i = V_i A'_i W' over an extension of the source
/// field, where A'_i = diag(A_i, ..., A_i) is the L-chunk extended
/// observation of terminal i.
struct TransmissionScheme {
  LinearSource source;
  TerminalSet users = 0;
  Field coding_field;
  unsigned extension_degree = 1;
  std::uint64_t chunk_factor = 1;
  std::vector<std::uint64_t> chunk_rates;
  std::vector<FieldMatrix> coding_matrices;  // V_i: r_i x (l_i L)

  FieldMatrix extended_observation(std::size_t terminal) const;
  FieldMatrix transmission_matrix(std::size_t terminal) const;  // V_i A'_i
};

struct UserDecodability {
  std::size_t user = 0;
  std::size_t rank = 0;
  std::size_t required = 0;  // N L
  std::size_t deficit() const { return required - rank; }
  bool decodable() const { return rank == required; }
};

struct DecodabilityReport {
  std::vector<UserDecodability> users;
  bool all_decodable() const;
};

/// For each user l, the rank of A'_l stacked with V_i A'_i for all i != l.
DecodabilityReport verify_decodability(const TransmissionScheme& scheme);

struct DesignOptions {
  unsigned extension_degree = 0;  // 0: smallest t with |F|^t > 2 |A| N L
  std::uint64_t seed = 1;
  std::size_t max_attempts = 64;
};

unsigned default_extension_degree(const Field& source_field, std::size_t users, std::size_t packets,
                                  std::uint64_t chunk_factor);

/// Random coding matrices, retried until every user decodes. Throws
/// std::invalid_argument for non-linear sources or malformed allocations,
/// InfeasibleInstance when the chunk-rates violate a cut or the source does
/// not determine W, and std::runtime_error when every attempt fails.
TransmissionScheme design_transmissions(const Instance& instance, const ChunkAllocation& allocation,
                                        const DesignOptions& options = {});

struct GraphEdge {
  std::size_t from = 0;
  std::size_t to = 0;
  std::uint64_t capacity = 0;
};

/// Super-source S, senders s_i, relays t_i (one per terminal that can reach
/// another user) and receivers r_j for users j.
struct MulticastGraph {
  std::vector<std::string> nodes;
  std::vector<GraphEdge> edges;
  std::size_t source = 0;
  std::vector<std::size_t> receivers;  // node index per user, ascending user
  std::size_t sender_count = 0;
  std::size_t relay_count = 0;

  std::size_t node(const std::string& name) const;
  std::uint64_t capacity(const std::string& from, const std::string& to) const;
  std::string to_dot() const;
};

MulticastGraph build_multicast_graph(const Instance& instance, const ChunkAllocation& allocation);

std::uint64_t max_flow(const MulticastGraph& graph, std::size_t from, std::size_t to);

struct UserOutcome {
  std::size_t user = 0;
  bool unique = false;     // stacked system has full column rank
  bool recovered = false;  // unique and equal to the drawn W
};

struct SimulationResult {
  std::vector<UserOutcome> users;
  bool success() const;
};

/// Draws W uniformly over the coding field, runs every transmission and lets
/// each user solve its stacked system.
SimulationResult simulate_exchange(const TransmissionScheme& scheme, std::uint64_t seed);

}  // namespace dex
