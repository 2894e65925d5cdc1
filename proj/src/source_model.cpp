#include "dex/source_model.hpp"

#include <mutex>
#include <stdexcept>
#include <string>
#include <unordered_map>

namespace dex {

std::vector<std::size_t> members(TerminalSet set) {
  std::vector<std::size_t> out;
  while (set != 0) {
    out.push_back(static_cast<std::size_t>(std::countr_zero(set)));
    set &= set - 1;
  }
  return out;
}

LinearSource::LinearSource(Field field, std::size_t packet_count, std::vector<FieldMatrix> observations)
    : field_(std::move(field)), packet_count_(packet_count), observations_(std::move(observations)) {
  if (observations_.size() > kMaxTerminals) {
    throw std::invalid_argument("at most " + std::to_string(kMaxTerminals) + " terminals are supported");
  }
  for (std::size_t i = 0; i < observations_.size(); ++i) {
    const auto& a = observations_[i];
    if (a.cols() != packet_count_) {
      throw std::invalid_argument("observation matrix of terminal " + std::to_string(i) + " has " +
                                  std::to_string(a.cols()) + " columns, expected " + std::to_string(packet_count_));
    }
    if (!(a.field() == field_)) {
      throw std::invalid_argument("observation matrix of terminal " + std::to_string(i) + " uses a different field");
    }
  }
}

FieldMatrix LinearSource::stacked(TerminalSet set) const {
  std::vector<FieldMatrix> blocks;
  for (auto i : members(set)) blocks.push_back(observations_.at(i));
  return FieldMatrix::stack(blocks, field_, packet_count_);
}

std::size_t LinearSource::rank_of(TerminalSet set) const { return rank(stacked(set)); }

LinearSource raw_source(const std::vector<std::vector<std::size_t>>& ownership, std::size_t packet_count,
                        Field field) {
  std::vector<FieldMatrix> matrices;
  for (std::size_t i = 0; i < ownership.size(); ++i) {
    FieldMatrix a(field, ownership[i].size(), packet_count);
    for (std::size_t r = 0; r < ownership[i].size(); ++r) {
      const auto packet = ownership[i][r];
      if (packet >= packet_count) {
        throw std::invalid_argument("terminal " + std::to_string(i) + " owns packet " + std::to_string(packet) +
                                    " but there are only " + std::to_string(packet_count));
      }
      a.set(r, packet, 1);
    }
    matrices.push_back(std::move(a));
  }
  return LinearSource(std::move(field), packet_count, std::move(matrices));
}

TableReport validate_table(const EntropyTable& table) {
  const std::size_t m = table.terminal_count;
  if (m > kMaxTerminals || table.values.size() != (std::size_t{1} << m)) {
    throw std::invalid_argument("entropy table for " + std::to_string(m) + " terminals needs " +
                                std::to_string(std::size_t{1} << std::min(m, kMaxTerminals)) + " entries, got " +
                                std::to_string(table.values.size()));
  }
  TableReport report;
  const auto& h = table.values;
  report.normalized = h[0] == 0;
  const TerminalSet full = all_terminals(m);
  for (TerminalSet s = 0; s <= full; ++s) {
    for (std::size_t i = 0; i < m; ++i) {
      if (contains(s, i)) continue;
      const TerminalSet si = s | singleton(i);
      if (h[si] < h[s]) report.monotonicity_violations.emplace_back(s, i);
      for (std::size_t j = i + 1; j < m; ++j) {
        if (contains(s, j)) continue;
        const TerminalSet sj = s | singleton(j);
        if (h[si] + h[sj] < h[si | sj] + h[s]) {
          report.submodularity_violations.push_back({s, singleton(i), singleton(j)});
        }
      }
    }
    if (s == full) break;
  }
  return report;
}

struct SourceModel::Memo {
  std::mutex mutex;
  std::unordered_map<TerminalSet, Rational> values;
};

SourceModel SourceModel::linear(LinearSource source) {
  SourceModel model;
  model.kind_ = Kind::linear;
  model.terminal_count_ = source.terminal_count();
  model.linear_ = std::move(source);
  model.memo_ = std::make_shared<Memo>();
  return model;
}

SourceModel SourceModel::raw(std::vector<std::vector<std::size_t>> ownership, std::size_t packet_count,
                             Field field) {
  SourceModel model;
  model.kind_ = Kind::raw;
  model.linear_ = raw_source(ownership, packet_count, std::move(field));
  model.terminal_count_ = ownership.size();
  model.packet_bits_.assign(ownership.size(), std::vector<std::uint64_t>((packet_count + 63) / 64, 0));
  for (std::size_t i = 0; i < ownership.size(); ++i) {
    for (auto p : ownership[i]) model.packet_bits_[i][p / 64] |= std::uint64_t{1} << (p % 64);
  }
  model.ownership_ = std::move(ownership);
  return model;
}

SourceModel SourceModel::tabular(EntropyTable table) {
  TableReport report = validate_table(table);
  if (!report.normalized) throw std::invalid_argument("entropy table: H(empty set) must be 0");
  if (!report.monotonicity_violations.empty()) {
    const auto [s, i] = report.monotonicity_violations.front();
    throw std::invalid_argument("entropy table is not monotone: H(" + std::to_string(s | singleton(i)) + ") < H(" +
                                std::to_string(s) + ")");
  }
  SourceModel model;
  model.kind_ = Kind::tabular;
  model.terminal_count_ = table.terminal_count;
  model.table_ = std::move(table);
  model.report_ = std::move(report);
  return model;
}

std::optional<Field> SourceModel::field() const {
  if (linear_) return linear_->field();
  return std::nullopt;
}

Rational SourceModel::evaluate(TerminalSet set) const {
  switch (kind_) {
    case Kind::tabular:
      return table_->values[set];
    case Kind::raw: {
      std::size_t count = 0;
      const std::size_t words = packet_bits_.empty() ? 0 : packet_bits_.front().size();
      for (std::size_t w = 0; w < words; ++w) {
        std::uint64_t bits = 0;
        for (auto i : members(set)) bits |= packet_bits_[i][w];
        count += static_cast<std::size_t>(std::popcount(bits));
      }
      return Rational(count);
    }
    case Kind::linear:
      break;
  }
  {
    std::lock_guard lock(memo_->mutex);
    if (auto it = memo_->values.find(set); it != memo_->values.end()) return it->second;
  }
  Rational value(linear_->rank_of(set));
  std::lock_guard lock(memo_->mutex);
  memo_->values.emplace(set, value);
  return value;
}

Rational SourceModel::joint_entropy(TerminalSet set) const {
  if ((set & ~all_terminals(terminal_count_)) != 0) {
    throw std::out_of_range("terminal set " + std::to_string(set) + " exceeds " + std::to_string(terminal_count_) +
                            " terminals");
  }
  if (set == 0) return Rational(0);
  return evaluate(set);
}

Rational SourceModel::cond_entropy(TerminalSet s, TerminalSet t) const {
  return joint_entropy(s | t) - joint_entropy(t);
}

EntropyTable SourceModel::tabulate() const {
  if (terminal_count_ > 24) throw std::length_error("tabulation limited to 24 terminals");
  EntropyTable table;
  table.terminal_count = terminal_count_;
  const std::size_t count = std::size_t{1} << terminal_count_;
  table.values.reserve(count);
  for (std::size_t s = 0; s < count; ++s) table.values.push_back(joint_entropy(static_cast<TerminalSet>(s)));
  return table;
}

}  // namespace dex
