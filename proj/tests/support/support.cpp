#include "support.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>

namespace dex::testing {

std::filesystem::path fixture(const std::string& name) { return std::filesystem::path(DEX_FIXTURE_DIR) / name; }

LinearSource six_terminal_source(std::uint32_t characteristic) {
  const Field f = Field::make(characteristic);
  const std::vector<FieldVector> rows{{1, 1, 0}, {1, 0, 1}, {0, 1, 1}, {1, 0, 0}, {0, 1, 0}, {0, 0, 1}};
  std::vector<FieldMatrix> obs;
  for (const auto& r : rows) obs.push_back(FieldMatrix::from_rows(f, {r}, 3));
  return LinearSource(f, 3, std::move(obs));
}

Instance six_terminal_instance(std::uint32_t characteristic, TerminalSet users) {
  return Instance(SourceModel::linear(six_terminal_source(characteristic)), users, std::vector<Rational>(6, Rational(1)));
}

Instance two_users_one_helper() {
  return Instance(SourceModel::raw({{1, 2}, {0, 1, 3}, {0, 2}}, 4), 0b011, std::vector<Rational>(3, Rational(1)));
}

namespace {

bool decodable_with(const SourceModel& model, TerminalSet transmitters, TerminalSet users, const Rational& total) {
  for (auto l : members(users)) {
    if (model.joint_entropy(transmitters | singleton(l)) != total) return false;
  }
  return true;
}

}  // namespace

std::optional<Instance> random_instance(std::mt19937_64& rng, const RandomSpec& spec) {
  static const std::uint32_t primes[] = {2, 3, 5};
  auto uniform = [&](std::size_t lo, std::size_t hi) { return std::uniform_int_distribution<std::size_t>(lo, hi)(rng); };

  const std::size_t m = uniform(spec.min_terminals, spec.max_terminals);
  const Field field = Field::make(primes[uniform(0, 2)]);
  const std::size_t n = uniform(1, spec.max_packets);

  std::optional<LinearSource> source;
  while (!source) {
    std::vector<FieldMatrix> obs;
    for (std::size_t i = 0; i < m; ++i) {
      FieldMatrix a(field, uniform(0, n), n);
      for (std::size_t r = 0; r < a.rows(); ++r) {
        for (std::size_t c = 0; c < n; ++c) a.set(r, c, static_cast<Field::Element>(uniform(0, field.order() - 1)));
      }
      obs.push_back(std::move(a));
    }
    LinearSource candidate(field, n, std::move(obs));
    if (candidate.rank_of(all_terminals(m)) == n) source = std::move(candidate);
  }

  const std::size_t k = uniform(std::min(spec.min_users, m), std::min(spec.max_users, m));
  std::vector<std::size_t> perm(m);
  for (std::size_t i = 0; i < m; ++i) perm[i] = i;
  std::shuffle(perm.begin(), perm.end(), rng);
  TerminalSet users = 0;
  for (std::size_t i = 0; i < k; ++i) users |= singleton(perm[i]);

  std::vector<Rational> weights;
  for (std::size_t i = 0; i < m; ++i) {
    const auto den = static_cast<long>(uniform(1, 4));
    const auto num = static_cast<long>(uniform(0, static_cast<std::size_t>(spec.max_weight * den)));
    weights.emplace_back(num, den);
  }

  SourceModel model = SourceModel::linear(std::move(*source));
  std::optional<TerminalSet> transmitters;
  if (spec.helpers_only) {
    const TerminalSet helpers = all_terminals(m) & ~users;
    const Rational total(static_cast<long>(n));
    if (!decodable_with(model, helpers, users, total)) return std::nullopt;
    transmitters = helpers;
    for (int attempt = 0; attempt < 8; ++attempt) {
      TerminalSet pick = 0;
      for (auto h : members(helpers)) {
        if (uniform(0, 1)) pick |= singleton(h);
      }
      if (decodable_with(model, pick, users, total)) {
        transmitters = pick;
        break;
      }
    }
  }
  return Instance(std::move(model), users, std::move(weights), transmitters);
}

namespace {

// Solves the square system rows * x = rhs; nullopt if singular.
std::optional<std::vector<Rational>> solve_square(std::vector<std::vector<Rational>> a, std::vector<Rational> b) {
  const std::size_t n = b.size();
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t pivot = col;
    while (pivot < n && a[pivot][col] == 0) ++pivot;
    if (pivot == n) return std::nullopt;
    std::swap(a[pivot], a[col]);
    std::swap(b[pivot], b[col]);
    for (std::size_t r = 0; r < n; ++r) {
      if (r == col || a[r][col] == 0) continue;
      const Rational factor = a[r][col] / a[col][col];
      for (std::size_t c = col; c < n; ++c) a[r][c] -= factor * a[col][c];
      b[r] -= factor * b[col];
    }
  }
  for (std::size_t i = 0; i < n; ++i) b[i] /= a[i][i];
  return b;
}

}  // namespace

Rational vertex_enumeration_optimum(const Instance& instance) {
  const std::size_t m = instance.terminal_count();
  if (m > 5) throw std::invalid_argument("vertex enumeration is limited to 5 terminals");
  const std::vector<std::size_t> vars = members(instance.transmitters());
  const std::size_t d = vars.size();

  // Rows over the transmitter variables.
  std::vector<std::vector<Rational>> rows;
  std::vector<Rational> rhs;
  const TerminalSet full = all_terminals(m);
  for (TerminalSet s = 1; s < full; ++s) {
    if ((instance.users() & ~s) == 0) continue;
    std::vector<Rational> row(d);
    for (std::size_t j = 0; j < d; ++j) row[j] = contains(s, vars[j]) ? 1 : 0;
    rows.push_back(std::move(row));
    rhs.push_back(instance.model().cond_entropy(s, full & ~s));
  }
  for (std::size_t j = 0; j < d; ++j) {
    std::vector<Rational> row(d, Rational(0));
    row[j] = 1;
    rows.push_back(std::move(row));
    rhs.push_back(0);
  }
  if (d == 0) {
    for (const auto& r : rhs) {
      if (r > 0) throw std::runtime_error("infeasible");
    }
    return 0;
  }

  std::optional<Rational> best;
  std::vector<std::size_t> pick(d);
  const std::size_t total = rows.size();
  // Iterate d-combinations of constraint indices.
  for (std::size_t i = 0; i < d; ++i) pick[i] = i;
  while (true) {
    std::vector<std::vector<Rational>> a;
    std::vector<Rational> b;
    for (auto i : pick) {
      a.push_back(rows[i]);
      b.push_back(rhs[i]);
    }
    if (auto x = solve_square(a, b)) {
      bool feasible = true;
      for (std::size_t r = 0; r < total && feasible; ++r) {
        Rational lhs = 0;
        for (std::size_t j = 0; j < d; ++j) lhs += rows[r][j] * (*x)[j];
        feasible = lhs >= rhs[r];
      }
      if (feasible) {
        Rational value = 0;
        for (std::size_t j = 0; j < d; ++j) value += instance.weights()[vars[j]] * (*x)[j];
        if (!best || value < *best) best = value;
      }
    }
    std::size_t i = d;
    while (i > 0 && pick[i - 1] == total - d + i - 1) --i;
    if (i == 0) break;
    ++pick[i - 1];
    for (std::size_t j = i; j < d; ++j) pick[j] = pick[j - 1] + 1;
  }
  if (!best) throw std::runtime_error("no feasible vertex");
  return *best;
}

std::size_t span_rank(const FieldMatrix& m) {
  const std::uint64_t p = m.field().order();
  std::set<FieldVector> span;
  std::vector<std::uint64_t> coeff(m.rows(), 0);
  while (true) {
    FieldVector v(m.cols(), 0);
    for (std::size_t r = 0; r < m.rows(); ++r) {
      for (std::size_t c = 0; c < m.cols(); ++c) {
        v[c] = static_cast<Field::Element>((v[c] + coeff[r] * m.at(r, c)) % p);
      }
    }
    span.insert(std::move(v));
    std::size_t r = 0;
    while (r < coeff.size() && ++coeff[r] == p) coeff[r++] = 0;
    if (r == coeff.size()) break;
  }
  std::size_t rank = 0;
  for (std::uint64_t size = 1; size < span.size(); size *= p) ++rank;
  return rank;
}

}  // namespace dex::testing
