#include "dex/network_code.hpp"

#include <algorithm>
#include <deque>
#include <limits>
#include <random>
#include <sstream>
#include <stdexcept>

#include "dex/cutset_lp.hpp"
#include "dex/error.hpp"

namespace dex {

Rational ChunkAllocation::total_rate() const {
  Rational total = 0;
  for (auto r : chunk_rates) total += Rational(static_cast<long>(r));
  return total / static_cast<long>(chunk_factor);
}

ChunkAllocation rationalize(std::span<const Rational> rates, std::uint64_t max_denominator) {
  for (const auto& r : rates) {
    if (r < 0) throw std::invalid_argument("rates must be nonnegative");
  }
  const Integer l = common_denominator(rates);
  if (l > max_denominator) {
    throw std::domain_error("chunk factor " + l.str() + " exceeds the denominator bound " +
                            std::to_string(max_denominator));
  }
  ChunkAllocation out;
  out.chunk_factor = l.convert_to<std::uint64_t>();
  for (const auto& r : rates) {
    const Rational scaled = r * Rational(l);
    out.chunk_rates.push_back(boost::multiprecision::numerator(scaled).convert_to<std::uint64_t>());
  }
  return out;
}

namespace {

Rational round_to_grid(const Rational& x, std::uint64_t grid, bool upward) {
  const Rational scaled = x * static_cast<long>(grid);
  const Integer num = boost::multiprecision::numerator(scaled);
  const Integer den = boost::multiprecision::denominator(scaled);
  Integer q = num / den;  // x >= 0, so truncation is floor
  if (upward) {
    if (q * den != num) q += 1;
  } else if (Rational(num - q * den, den) * 2 >= 1) {
    q += 1;
  }
  return Rational(q, Integer(grid));
}

}  // namespace

RateVector snap_rates(const Instance& instance, std::span<const Rational> rates, std::uint64_t max_denominator) {
  const std::size_t m = instance.terminal_count();
  if (rates.size() != m) throw std::invalid_argument("rate vector length mismatch");
  if (max_denominator == 0) throw std::invalid_argument("max_denominator must be positive");
  RateVector clipped(rates.begin(), rates.end());
  for (std::size_t i = 0; i < m; ++i) {
    if (clipped[i] < 0 || !contains(instance.transmitters(), i)) clipped[i] = 0;
  }

  const Rational tolerance(1, 2 * static_cast<long>(max_denominator));
  RateVector snapped;
  for (std::uint64_t grid = 1; grid <= max_denominator && snapped.empty(); ++grid) {
    RateVector candidate;
    bool close = true;
    for (const auto& r : clipped) {
      candidate.push_back(round_to_grid(r, grid, false));
      if (abs(candidate.back() - r) > tolerance) {
        close = false;
        break;
      }
    }
    if (close) snapped = std::move(candidate);
  }
  if (snapped.empty()) {
    for (const auto& r : clipped) snapped.push_back(round_to_grid(r, max_denominator, true));
  }

  const auto& weights = instance.weights();
  for (;;) {
    const auto violations = violated_cuts(instance, snapped);
    if (violations.empty()) break;
    const auto worst = std::max_element(violations.begin(), violations.end(), [](const auto& a, const auto& b) {
      return (a.required - a.provided) < (b.required - b.provided);
    });
    const auto candidates = members(worst->subset & instance.transmitters());
    if (candidates.empty()) throw InfeasibleInstance("cut " + format_set(worst->subset) + " has no transmitter");
    // Cheapest weight per violated cut the raise touches.
    auto touched = [&](std::size_t i) {
      return static_cast<long>(std::count_if(violations.begin(), violations.end(),
                                             [&](const auto& v) { return contains(v.subset, i); }));
    };
    const auto cheapest = *std::min_element(candidates.begin(), candidates.end(), [&](std::size_t a, std::size_t b) {
      return weights[a] * touched(b) < weights[b] * touched(a);
    });
    snapped[cheapest] += worst->required - worst->provided;
  }
  return snapped;
}

// ---------------------------------------------------------------------------

namespace {

FieldEmbedding embedding_for(const TransmissionScheme& scheme) {
  return FieldEmbedding(scheme.source.field(), scheme.coding_field);
}

}  // namespace

FieldMatrix TransmissionScheme::extended_observation(std::size_t terminal) const {
  return source.observation(terminal).block_replicated(chunk_factor).mapped(embedding_for(*this));
}

FieldMatrix TransmissionScheme::transmission_matrix(std::size_t terminal) const {
  return coding_matrices.at(terminal) * extended_observation(terminal);
}

bool DecodabilityReport::all_decodable() const {
  return std::all_of(users.begin(), users.end(), [](const auto& u) { return u.decodable(); });
}

namespace {

std::vector<FieldMatrix> extended_observations(const TransmissionScheme& scheme) {
  std::vector<FieldMatrix> out;
  const FieldEmbedding embedding = embedding_for(scheme);
  for (std::size_t i = 0; i < scheme.source.terminal_count(); ++i) {
    out.push_back(scheme.source.observation(i).block_replicated(scheme.chunk_factor).mapped(embedding));
  }
  return out;
}

void check_scheme_shape(const TransmissionScheme& scheme) {
  const std::size_t m = scheme.source.terminal_count();
  if (scheme.coding_matrices.size() != m || scheme.chunk_rates.size() != m) {
    throw std::invalid_argument("scheme must carry one coding matrix and chunk-rate per terminal");
  }
  for (std::size_t i = 0; i < m; ++i) {
    const auto& v = scheme.coding_matrices[i];
    if (!(v.field() == scheme.coding_field) || v.rows() != scheme.chunk_rates[i] ||
        v.cols() != scheme.source.observation(i).rows() * scheme.chunk_factor) {
      throw std::invalid_argument("coding matrix of terminal " + std::to_string(i) + " has the wrong shape or field");
    }
  }
}

// A'_l stacked on V_i A'_i for every i != l.
FieldMatrix receiver_system(const TransmissionScheme& scheme, const std::vector<FieldMatrix>& extended,
                            const std::vector<FieldMatrix>& transmitted, std::size_t user) {
  std::vector<FieldMatrix> blocks{extended[user]};
  for (std::size_t i = 0; i < transmitted.size(); ++i) {
    if (i != user) blocks.push_back(transmitted[i]);
  }
  return FieldMatrix::stack(blocks, scheme.coding_field, scheme.source.packet_count() * scheme.chunk_factor);
}

}  // namespace

DecodabilityReport verify_decodability(const TransmissionScheme& scheme) {
  check_scheme_shape(scheme);
  const auto extended = extended_observations(scheme);
  std::vector<FieldMatrix> transmitted;
  for (std::size_t i = 0; i < extended.size(); ++i) transmitted.push_back(scheme.coding_matrices[i] * extended[i]);

  DecodabilityReport report;
  const std::size_t required = scheme.source.packet_count() * scheme.chunk_factor;
  for (auto l : members(scheme.users)) {
    const auto system = receiver_system(scheme, extended, transmitted, l);
    report.users.push_back({l, rank(system), required});
  }
  return report;
}

unsigned default_extension_degree(const Field& source_field, std::size_t users, std::size_t packets,
                                  std::uint64_t chunk_factor) {
  const long double target = 2.0L * static_cast<long double>(users) * static_cast<long double>(packets) *
                             static_cast<long double>(chunk_factor);
  unsigned t = 1;
  long double size = static_cast<long double>(source_field.order());
  while (size <= target) {
    size *= static_cast<long double>(source_field.order());
    ++t;
  }
  return t;
}

TransmissionScheme design_transmissions(const Instance& instance, const ChunkAllocation& allocation,
                                        const DesignOptions& options) {
  const LinearSource* source = instance.model().linear_source();
  if (source == nullptr) throw std::invalid_argument("code design needs a linear or raw-packet source");
  const std::size_t m = instance.terminal_count();
  if (allocation.chunk_rates.size() != m || allocation.chunk_factor == 0) {
    throw std::invalid_argument("chunk allocation does not match the instance");
  }
  for (std::size_t i = 0; i < m; ++i) {
    if (allocation.chunk_rates[i] != 0 && !contains(instance.transmitters(), i)) {
      throw std::invalid_argument("terminal " + std::to_string(i) + " is not allowed to transmit");
    }
  }
  if (source->rank_of(all_terminals(m)) != source->packet_count()) {
    throw InfeasibleInstance("the terminals jointly do not determine all packets");
  }

  // The L-chunk extension multiplies every entropy by L.
  RateVector scaled;
  const auto chunk_factor = static_cast<long>(allocation.chunk_factor);
  for (auto r : allocation.chunk_rates) scaled.push_back(Rational(static_cast<long>(r), chunk_factor));
  if (const auto violations = violated_cuts(instance, scaled); !violations.empty()) {
    throw InfeasibleInstance("chunk-rates violate cut " + format_set(violations.front().subset));
  }

  const unsigned t = options.extension_degree != 0
                         ? options.extension_degree
                         : default_extension_degree(source->field(), instance.user_count(), source->packet_count(),
                                                    allocation.chunk_factor);
  TransmissionScheme scheme{.source = *source,
                            .users = instance.users(),
                            .coding_field = Field::make(source->field().characteristic(), source->field().degree() * t),
                            .extension_degree = t,
                            .chunk_factor = allocation.chunk_factor,
                            .chunk_rates = allocation.chunk_rates,
                            .coding_matrices = {}};
  const auto q = scheme.coding_field.order();

  for (std::size_t attempt = 0; attempt < options.max_attempts; ++attempt) {
    std::seed_seq seq{static_cast<std::uint32_t>(options.seed), static_cast<std::uint32_t>(options.seed >> 32),
                      static_cast<std::uint32_t>(attempt)};
    std::mt19937_64 rng(seq);
    std::uniform_int_distribution<Field::Element> symbol(0, static_cast<Field::Element>(q - 1));
    scheme.coding_matrices.clear();
    for (std::size_t i = 0; i < m; ++i) {
      FieldMatrix v(scheme.coding_field, allocation.chunk_rates[i], source->observation(i).rows() * allocation.chunk_factor);
      for (std::size_t r = 0; r < v.rows(); ++r) {
        for (std::size_t c = 0; c < v.cols(); ++c) v.set(r, c, symbol(rng));
      }
      scheme.coding_matrices.push_back(std::move(v));
    }
    if (verify_decodability(scheme).all_decodable()) return scheme;
  }
  throw std::runtime_error("no decodable scheme found in " + std::to_string(options.max_attempts) +
                           " attempts over " + scheme.coding_field.name() + "; try a larger extension degree");
}

// ---------------------------------------------------------------------------

std::size_t MulticastGraph::node(const std::string& name) const {
  const auto it = std::find(nodes.begin(), nodes.end(), name);
  if (it == nodes.end()) throw std::out_of_range("no node named " + name);
  return static_cast<std::size_t>(it - nodes.begin());
}

std::uint64_t MulticastGraph::capacity(const std::string& from, const std::string& to) const {
  const auto a = node(from), b = node(to);
  for (const auto& e : edges) {
    if (e.from == a && e.to == b) return e.capacity;
  }
  throw std::out_of_range("no edge " + from + " -> " + to);
}

std::string MulticastGraph::to_dot() const {
  std::ostringstream out;
  out << "digraph multicast {\n  rankdir=TB;\n";
  for (const auto& name : nodes) out << "  \"" << name << "\";\n";
  for (const auto& e : edges) {
    out << "  \"" << nodes[e.from] << "\" -> \"" << nodes[e.to] << "\" [label=\"" << e.capacity << "\"];\n";
  }
  out << "}\n";
  return out.str();
}

MulticastGraph build_multicast_graph(const Instance& instance, const ChunkAllocation& allocation) {
  const LinearSource* source = instance.model().linear_source();
  if (source == nullptr) throw std::invalid_argument("multicast graph needs a linear or raw-packet source");
  const std::size_t m = instance.terminal_count();
  if (allocation.chunk_rates.size() != m) throw std::invalid_argument("chunk allocation does not match the instance");
  const TerminalSet users = instance.users();
  const std::uint64_t l = allocation.chunk_factor;

  MulticastGraph g;
  auto add_node = [&](std::string name) {
    g.nodes.push_back(std::move(name));
    return g.nodes.size() - 1;
  };
  g.source = add_node("S");
  std::vector<std::size_t> sender(m), relay(m, 0), receiver(m, 0);
  for (std::size_t i = 0; i < m; ++i) sender[i] = add_node("s" + std::to_string(i));
  g.sender_count = m;
  for (std::size_t i = 0; i < m; ++i) {
    if ((users & ~singleton(i)) != 0) {
      relay[i] = add_node("t" + std::to_string(i));
      ++g.relay_count;
    }
  }
  for (auto j : members(users)) {
    receiver[j] = add_node("r" + std::to_string(j));
    g.receivers.push_back(receiver[j]);
  }

  for (std::size_t i = 0; i < m; ++i) {
    const std::uint64_t observed = source->observation(i).rows() * l;
    g.edges.push_back({g.source, sender[i], observed});
    if (contains(users, i)) g.edges.push_back({sender[i], receiver[i], observed});
    if ((users & ~singleton(i)) == 0) continue;
    g.edges.push_back({sender[i], relay[i], allocation.chunk_rates[i]});
    for (auto j : members(users & ~singleton(i))) g.edges.push_back({relay[i], receiver[j], allocation.chunk_rates[i]});
  }
  return g;
}

std::uint64_t max_flow(const MulticastGraph& graph, std::size_t from, std::size_t to) {
  const std::size_t n = graph.nodes.size();
  std::vector<std::vector<std::uint64_t>> residual(n, std::vector<std::uint64_t>(n, 0));
  for (const auto& e : graph.edges) residual[e.from][e.to] += e.capacity;
  std::uint64_t flow = 0;
  for (;;) {
    std::vector<std::size_t> parent(n, n);
    parent[from] = from;
    std::deque<std::size_t> queue{from};
    while (!queue.empty() && parent[to] == n) {
      const auto u = queue.front();
      queue.pop_front();
      for (std::size_t v = 0; v < n; ++v) {
        if (parent[v] == n && residual[u][v] > 0) {
          parent[v] = u;
          queue.push_back(v);
        }
      }
    }
    if (parent[to] == n) return flow;
    std::uint64_t push = std::numeric_limits<std::uint64_t>::max();
    for (auto v = to; v != from; v = parent[v]) push = std::min(push, residual[parent[v]][v]);
    for (auto v = to; v != from; v = parent[v]) {
      residual[parent[v]][v] -= push;
      residual[v][parent[v]] += push;
    }
    flow += push;
  }
}

// ---------------------------------------------------------------------------

bool SimulationResult::success() const {
  return std::all_of(users.begin(), users.end(), [](const auto& u) { return u.recovered; });
}

SimulationResult simulate_exchange(const TransmissionScheme& scheme, std::uint64_t seed) {
  check_scheme_shape(scheme);
  const Field& f = scheme.coding_field;
  const std::size_t unknowns = scheme.source.packet_count() * scheme.chunk_factor;

  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<Field::Element> symbol(0, static_cast<Field::Element>(f.order() - 1));
  FieldVector w(unknowns);
  for (auto& x : w) x = symbol(rng);

  const auto extended = extended_observations(scheme);
  std::vector<FieldVector> observed;
  std::vector<FieldVector> sent;
  for (std::size_t i = 0; i < extended.size(); ++i) {
    observed.push_back(extended[i].apply(w));
    sent.push_back(scheme.coding_matrices[i].apply(observed.back()));  // uses only terminal i's data
  }

  SimulationResult result;
  for (auto l : members(scheme.users)) {
    std::vector<FieldMatrix> blocks{extended[l]};
    FieldVector rhs = observed[l];
    for (std::size_t i = 0; i < extended.size(); ++i) {
      if (i == l) continue;
      blocks.push_back(scheme.coding_matrices[i] * extended[i]);
      rhs.insert(rhs.end(), sent[i].begin(), sent[i].end());
    }
    const auto system = FieldMatrix::stack(blocks, f, unknowns);
    UserOutcome outcome{.user = l};
    if (const auto x = solve_linear(system, rhs)) {
      outcome.unique = rank(system) == unknowns;
      outcome.recovered = outcome.unique && *x == w;
    }
    result.users.push_back(outcome);
  }
  return result;
}

}  // namespace dex
