#pragma once

#include <array>
#include <bit>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <vector>

#include "dex/field.hpp"
#include "dex/rational.hpp"

namespace dex {

/// Bitmask over terminals; terminal i (0-based) is bit i.
using TerminalSet = std::uint32_t;

inline constexpr std::size_t kMaxTerminals = 31;

constexpr TerminalSet singleton(std::size_t i) { return TerminalSet{1} << i; }
constexpr bool contains(TerminalSet set, std::size_t i) { return (set >> i) & 1U; }
constexpr TerminalSet all_terminals(std::size_t m) { return m == 0 ? 0 : (~TerminalSet{0} >> (32 - m)); }
constexpr std::size_t cardinality(TerminalSet set) { return static_cast<std::size_t>(std::popcount(set)); }
std::vector<std::size_t> members(TerminalSet set);

/// Each terminal observes A_i W for a uniform W over the field; joint
/// entropies (in field symbols) are ranks of stacked observation matrices.
class LinearSource {
 public:
  /// Throws std::invalid_argument if matrices disagree on field or column
  /// count, or if there are more than kMaxTerminals of them.
  LinearSource(Field field, std::size_t packet_count, std::vector<FieldMatrix> observations);

  const Field& field() const noexcept { return field_; }
  std::size_t packet_count() const noexcept { return packet_count_; }
  std::size_t terminal_count() const noexcept { return observations_.size(); }
  const FieldMatrix& observation(std::size_t i) const { return observations_.at(i); }
  const std::vector<FieldMatrix>& observations() const noexcept { return observations_; }

  FieldMatrix stacked(TerminalSet set) const;
  std::size_t rank_of(TerminalSet set) const;

 private:
  Field field_;
  std::size_t packet_count_;
  std::vector<FieldMatrix> observations_;
};

/// Observation matrices whose rows are the standard basis vectors of the
/// owned packets. Throws std::invalid_argument on an index >= packet_count.
LinearSource raw_source(const std::vector<std::vector<std::size_t>>& ownership, std::size_t packet_count,
                        Field field = Field::make(2));

/// Explicit joint entropies, values[mask] for every subset mask.
struct EntropyTable {
  std::size_t terminal_count = 0;
  std::vector<Rational> values;
};

struct TableReport {
  bool normalized = true;  // H(empty) == 0
  /// (S, i): H(S + i) < H(S).
  std::vector<std::pair<TerminalSet, std::size_t>> monotonicity_violations;
  /// (S, i, j): H(S+i) + H(S+j) < H(S+i+j) + H(S).
  std::vector<std::array<TerminalSet, 3>> submodularity_violations;

  bool valid() const { return normalized && monotonicity_violations.empty(); }
  bool submodular() const { return submodularity_violations.empty(); }
};

/// Throws std::invalid_argument when values.size() != 2^terminal_count.
TableReport validate_table(const EntropyTable& table);

/// Entropy oracle H(X_S) over subsets of terminals.
class SourceModel {
 public:
  enum class Kind { linear, raw, tabular };

  static SourceModel linear(LinearSource source);
  static SourceModel raw(std::vector<std::vector<std::size_t>> ownership, std::size_t packet_count,
                         Field field = Field::make(2));
  /// Throws std::invalid_argument when the table is not normalized or not
  /// monotone; submodularity failures are kept in table_report().
  static SourceModel tabular(EntropyTable table);

  Kind kind() const noexcept { return kind_; }
  std::size_t terminal_count() const noexcept { return terminal_count_; }

  Rational joint_entropy(TerminalSet set) const;
  /// H(X_S | X_T) = H(S u T) - H(T).
  Rational cond_entropy(TerminalSet s, TerminalSet t) const;

  /// Present for linear and raw models (raw is lowered to identity rows).
  const LinearSource* linear_source() const noexcept { return linear_ ? &*linear_ : nullptr; }
  const std::vector<std::vector<std::size_t>>& ownership() const noexcept { return ownership_; }
  const EntropyTable* table() const noexcept { return table_ ? &*table_ : nullptr; }
  const TableReport* table_report() const noexcept { return report_ ? &*report_ : nullptr; }
  std::optional<Field> field() const;

  /// False only for tables failing the submodularity check.
  bool submodular() const noexcept { return !report_ || report_->submodular(); }

  /// Evaluates the oracle on all subsets.
  EntropyTable tabulate() const;

 private:
  SourceModel() = default;
  Rational evaluate(TerminalSet set) const;

  struct Memo;
  Kind kind_ = Kind::linear;
  std::size_t terminal_count_ = 0;
  std::optional<LinearSource> linear_;
  std::vector<std::vector<std::size_t>> ownership_;
  std::vector<std::vector<std::uint64_t>> packet_bits_;
  std::optional<EntropyTable> table_;
  std::optional<TableReport> report_;
  std::shared_ptr<Memo> memo_;
};

}  // namespace dex
