#include "dex/cutset_lp.hpp"

#include <stdexcept>

#include "dex/error.hpp"

namespace dex {

std::string format_set(TerminalSet set) {
  std::string out = "{";
  bool first = true;
  for (auto i : members(set)) {
    if (!first) out += ",";
    out += std::to_string(i);
    first = false;
  }
  return out + "}";
}

std::vector<TerminalSet> enumerate_cutsets(std::size_t terminal_count, TerminalSet users) {
  if (terminal_count > 12) throw GuardExceeded("cut-set enumeration limited to 12 terminals");
  const TerminalSet full = all_terminals(terminal_count);
  if ((users & ~full) != 0 || users == 0) throw std::invalid_argument("user set must be a nonempty subset");
  std::vector<TerminalSet> out;
  for (TerminalSet s = 1; s < full; ++s) {
    if ((s & users) != users) out.push_back(s);
  }
  return out;
}

CutSetLP build_lp(const Instance& instance) {
  const std::size_t m = instance.terminal_count();
  const TerminalSet full = all_terminals(m);
  CutSetLP lp;
  lp.terminal_count = m;
  lp.users = instance.users();
  lp.transmitters = instance.transmitters();
  lp.objective = instance.weights();
  const SourceModel& model = instance.model();
  for (auto s : enumerate_cutsets(m, instance.users())) {
    const TerminalSet outside = full & ~s;
    CutConstraint c;
    c.subset = s;
    c.rhs = model.cond_entropy(s, outside);
    c.owner = members(instance.users() & outside).front();
    lp.constraints.push_back(std::move(c));
  }
  return lp;
}

namespace {

// Tableau for  max h.y  s.t.  G^T y <= alpha, y >= 0, one row per
// transmitter. The final reduced costs of the slack columns are an optimal
// rate vector of the cut-set LP.
class DualSimplex {
 public:
  DualSimplex(const CutSetLP& lp, std::vector<std::size_t> rows) : rows_(std::move(rows)) {
    const std::size_t r = rows_.size();
    cuts_ = lp.constraints.size();
    cols_ = cuts_ + r;
    tableau_.assign(r, std::vector<Rational>(cols_, Rational(0)));
    rhs_.resize(r);
    basis_.resize(r);
    cost_.assign(cols_, Rational(0));
    for (std::size_t i = 0; i < r; ++i) {
      const std::size_t terminal = rows_[i];
      for (std::size_t j = 0; j < cuts_; ++j) {
        if (contains(lp.constraints[j].subset, terminal)) tableau_[i][j] = 1;
      }
      tableau_[i][cuts_ + i] = 1;
      rhs_[i] = lp.objective[terminal];
      basis_[i] = cuts_ + i;
    }
    for (std::size_t j = 0; j < cuts_; ++j) cost_[j] = -lp.constraints[j].rhs;
  }

  std::size_t run() {
    std::size_t pivots = 0;
    for (;;) {
      std::size_t entering = cols_;
      for (std::size_t j = 0; j < cols_; ++j) {
        if (cost_[j] < 0) {
          entering = j;
          break;
        }
      }
      if (entering == cols_) return pivots;

      std::size_t leaving = rows_.size();
      Rational best_ratio;
      for (std::size_t i = 0; i < rows_.size(); ++i) {
        if (tableau_[i][entering] <= 0) continue;
        Rational ratio = rhs_[i] / tableau_[i][entering];
        if (leaving == rows_.size() || ratio < best_ratio ||
            (ratio == best_ratio && basis_[i] < basis_[leaving])) {
          leaving = i;
          best_ratio = std::move(ratio);
        }
      }
      if (leaving == rows_.size()) {
        throw InfeasibleInstance("cut-set constraints are infeasible (a cut contains no transmitter)");
      }
      pivot(leaving, entering);
      ++pivots;
    }
  }

  Rational value() const { return value_; }
  Rational slack_cost(std::size_t row) const { return cost_[cuts_ + row]; }

 private:
  void pivot(std::size_t row, std::size_t col) {
    const Rational scale = tableau_[row][col];
    for (auto& x : tableau_[row]) x /= scale;
    rhs_[row] /= scale;
    for (std::size_t i = 0; i < rows_.size(); ++i) {
      if (i == row || tableau_[i][col] == 0) continue;
      const Rational factor = tableau_[i][col];
      for (std::size_t j = 0; j < cols_; ++j) {
        if (tableau_[row][j] != 0) tableau_[i][j] -= factor * tableau_[row][j];
      }
      rhs_[i] -= factor * rhs_[row];
    }
    const Rational factor = cost_[col];
    for (std::size_t j = 0; j < cols_; ++j) {
      if (tableau_[row][j] != 0) cost_[j] -= factor * tableau_[row][j];
    }
    value_ -= factor * rhs_[row];
    basis_[row] = col;
  }

  std::vector<std::size_t> rows_;
  std::size_t cuts_ = 0;
  std::size_t cols_ = 0;
  std::vector<std::vector<Rational>> tableau_;
  std::vector<Rational> rhs_;
  std::vector<Rational> cost_;
  std::vector<std::size_t> basis_;
  Rational value_ = 0;
};

}  // namespace

LpSolution solve_exact(const CutSetLP& lp) {
  if (lp.terminal_count > 10) throw GuardExceeded("exact cut-set LP limited to 10 terminals");
  if (lp.objective.size() != lp.terminal_count) throw std::invalid_argument("objective length mismatch");

  DualSimplex simplex(lp, members(lp.transmitters));
  LpSolution solution;
  solution.pivots = simplex.run();
  solution.rates.assign(lp.terminal_count, Rational(0));
  const auto rows = members(lp.transmitters);
  for (std::size_t i = 0; i < rows.size(); ++i) solution.rates[rows[i]] = simplex.slack_cost(i);
  solution.value = simplex.value();

  // Strong duality certificate: the recovered rates must be feasible and
  // attain the dual value.
  Rational primal = 0;
  for (std::size_t i = 0; i < lp.terminal_count; ++i) {
    if (solution.rates[i] < 0) throw std::logic_error("simplex produced a negative rate");
    primal += lp.objective[i] * solution.rates[i];
  }
  for (const auto& c : lp.constraints) {
    Rational sum = 0;
    for (auto i : members(c.subset & lp.transmitters)) sum += solution.rates[i];
    if (sum < c.rhs) throw std::logic_error("simplex rates violate cut " + format_set(c.subset));
  }
  if (primal != solution.value) throw std::logic_error("simplex primal and dual values disagree");
  return solution;
}

std::vector<CutViolation> violated_cuts(const Instance& instance, std::span<const Rational> rates) {
  const std::size_t m = instance.terminal_count();
  if (m > 20) throw GuardExceeded("exhaustive cut check limited to 20 terminals");
  if (rates.size() != m) throw std::invalid_argument("rate vector length mismatch");
  const TerminalSet full = all_terminals(m);
  const TerminalSet users = instance.users();
  const SourceModel& model = instance.model();
  const Rational total = model.joint_entropy(full);
  std::vector<CutViolation> out;
  for (TerminalSet s = 1; s < full; ++s) {
    if ((s & users) == users) continue;
    Rational provided = 0;
    for (auto i : members(s & instance.transmitters())) provided += rates[i];
    Rational required = total - model.joint_entropy(full & ~s);
    if (provided < required) out.push_back({s, std::move(required), std::move(provided)});
  }
  return out;
}

}  // namespace dex
