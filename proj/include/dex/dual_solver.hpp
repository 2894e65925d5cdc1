#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "dex/instance.hpp"

namespace dex {

/// Euclidean projection of v onto {x >= 0, sum x = budget, x[pinned] = 0}.
/// The pinned coordinate is dropped before projecting and comes back as 0.
template <typename T>
std::vector<T> project_onto_simplex(std::span<const T> v, const T& budget, std::optional<std::size_t> pinned) {
  if (budget < T(0)) throw std::invalid_argument("simplex budget must be nonnegative");
  std::vector<std::size_t> free;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!pinned || *pinned != i) free.push_back(i);
  }
  std::vector<T> out(v.size(), T(0));
  if (budget == T(0)) return out;
  if (free.empty()) {
    if (budget > T(0)) throw std::invalid_argument("no free coordinate to carry a positive budget");
    return out;
  }
  std::vector<T> sorted;
  sorted.reserve(free.size());
  for (auto i : free) sorted.push_back(v[i]);
  std::sort(sorted.begin(), sorted.end(), [](const T& a, const T& b) { return b < a; });

  T prefix(0);
  T threshold(0);
  for (std::size_t j = 0; j < sorted.size(); ++j) {
    prefix += sorted[j];
    T candidate = (prefix - budget) / T(static_cast<long>(j + 1));
    if (sorted[j] - candidate > T(0)) threshold = candidate;
  }
  for (auto i : free) {
    T x = v[i] - threshold;
    out[i] = x > T(0) ? x : T(0);
  }
  return out;
}

/// Exact projection used for a single multiplier column.
std::vector<Rational> project_column(std::span<const Rational> v, const Rational& budget,
                                     std::optional<std::size_t> pinned = std::nullopt);

/// Multipliers lambda_i^(l): one row per user l, one column per terminal i.
///
/// Entries are stored as integer shares of their column budget,
/// lambda = alpha_i * shares / scale, so every column sums to alpha_i
/// exactly and the pinned entries lambda_l^(l) are exactly zero.
class DualMatrix {
 public:
  DualMatrix(std::vector<std::size_t> users, std::vector<Rational> budgets, std::int64_t scale);

  std::size_t rows() const noexcept { return users_.size(); }
  std::size_t cols() const noexcept { return budgets_.size(); }
  const std::vector<std::size_t>& users() const noexcept { return users_; }
  const std::vector<Rational>& budgets() const noexcept { return budgets_; }
  std::int64_t scale() const noexcept { return scale_; }

  bool pinned(std::size_t row, std::size_t col) const { return users_[row] == col; }
  std::int64_t shares(std::size_t row, std::size_t col) const { return shares_[row * cols() + col]; }
  void set_shares(std::size_t row, std::size_t col, std::int64_t value) { shares_[row * cols() + col] = value; }

  Rational lambda(std::size_t row, std::size_t col) const;
  RateVector row_weights(std::size_t row) const;
  Rational column_sum(std::size_t col) const;

  /// Throws std::logic_error when a column sum, sign or pin is off.
  void check() const;

  /// Lambda <- projection of (Lambda + theta * direction), column by column,
  /// rounded back onto the share grid. `direction` is rows() x cols(),
  /// row-major, in lambda units.
  void ascend(std::span<const long double> direction, long double theta);

  friend bool operator==(const DualMatrix&, const DualMatrix&) = default;

 private:
  std::vector<std::size_t> users_;
  std::vector<Rational> budgets_;
  std::int64_t scale_;
  std::vector<std::int64_t> shares_;
};

/// Step sizes theta[n] for n >= 1: a / (b + c n) or n^(-a).
struct StepSchedule {
  enum class Family { harmonic, power };
  Family family = Family::harmonic;
  long double a = 1;
  long double b = 1;
  long double c = 1;

  /// Throws std::invalid_argument outside a > 0, b >= 0, c > 0 (harmonic)
  /// or 0 < a < 1 (power).
  void validate() const;
  long double operator()(std::size_t n) const;
};

struct TraceRecord {
  std::size_t iteration = 0;
  long double primal = 0;
  long double dual = 0;
  long double gap = 0;
};

struct SolverConfig {
  StepSchedule schedule;
  /// Multiplies every step. 0 picks 4 max_i alpha_i / H(X_M) from the instance.
  long double step_scale = 0;
  std::size_t max_iterations = 50'000;
  double gap_tolerance = 1e-3;
  std::vector<std::size_t> tie_break;
  std::function<void(const TraceRecord&)> trace;
};

struct Solution {
  RateVector rates;  // Z: componentwise max of the averaged user rows
  Rational primal_objective;
  Rational dual_objective;
  Rational gap;
  std::size_t iterations = 0;
  bool converged = false;
  DualMatrix certificate;  // multipliers attaining dual_objective
  RateMatrix averaged;     // R-hat at the final iteration
};

/// alpha_i / k on helper columns, alpha_i / (k - 1) on user columns with the
/// diagonal pinned to zero. Throws std::invalid_argument for a single user.
DualMatrix init_dual(const Instance& instance);

DualMatrix subgradient_step(const DualMatrix& lambda, const RateMatrix& rates, const Rational& theta);

/// sum_j mu_j R[j]. Throws std::invalid_argument unless mu is a probability
/// vector matching the history length.
RateMatrix recover_primal(std::span<const RateMatrix> history, std::span<const Rational> mu);

/// Running average of rate matrices (uniform mu).
class PrimalAverager {
 public:
  void add(const RateMatrix& rates);
  std::size_t count() const noexcept { return count_; }
  RateMatrix average() const;

 private:
  RateMatrix sum_;
  std::size_t count_ = 0;
};

/// sum_l g_l(Lambda^(l)), each term evaluated by a fresh greedy call.
Rational dual_objective(const DualMatrix& lambda, const Instance& instance,
                        std::span<const std::size_t> tie_break = {});

/// Subgradient ascent on the multipliers with ergodic primal recovery.
/// A single user bypasses the dual entirely. Never throws for slow
/// convergence; check Solution::converged.
Solution solve(const Instance& instance, const SolverConfig& config = {});

/// Primal objective of solution.rates minus the re-evaluated dual objective
/// of its certificate.
Rational duality_gap(const Solution& solution, const Instance& instance,
                     std::span<const std::size_t> tie_break = {});

}  // namespace dex
