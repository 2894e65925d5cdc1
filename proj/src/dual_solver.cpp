#include "dex/dual_solver.hpp"

#include <cmath>
#include <limits>
#include <numeric>
#include <string>
#include <unordered_map>

#include "dex/greedy.hpp"

namespace dex {

__extension__ using Wide = __int128;

std::vector<Rational> project_column(std::span<const Rational> v, const Rational& budget,
                                     std::optional<std::size_t> pinned) {
  return project_onto_simplex<Rational>(v, budget, pinned);
}

// ---------------------------------------------------------------------------

DualMatrix::DualMatrix(std::vector<std::size_t> users, std::vector<Rational> budgets, std::int64_t scale)
    : users_(std::move(users)), budgets_(std::move(budgets)), scale_(scale), shares_(users_.size() * budgets_.size(), 0) {
  if (scale_ <= 0) throw std::invalid_argument("share scale must be positive");
}

Rational DualMatrix::lambda(std::size_t row, std::size_t col) const {
  return budgets_[col] * Rational(shares(row, col), scale_);
}

RateVector DualMatrix::row_weights(std::size_t row) const {
  RateVector out;
  out.reserve(cols());
  for (std::size_t i = 0; i < cols(); ++i) out.push_back(lambda(row, i));
  return out;
}

Rational DualMatrix::column_sum(std::size_t col) const {
  Rational total = 0;
  for (std::size_t l = 0; l < rows(); ++l) total += lambda(l, col);
  return total;
}

void DualMatrix::check() const {
  for (std::size_t i = 0; i < cols(); ++i) {
    std::int64_t total = 0;
    std::size_t free_rows = 0;
    for (std::size_t l = 0; l < rows(); ++l) {
      const auto s = shares(l, i);
      if (s < 0) throw std::logic_error("negative multiplier in column " + std::to_string(i));
      if (pinned(l, i)) {
        if (s != 0) throw std::logic_error("pinned multiplier in column " + std::to_string(i) + " is nonzero");
        continue;
      }
      ++free_rows;
      total += s;
    }
    const std::int64_t expected = (budgets_[i] == 0 || free_rows == 0) ? 0 : scale_;
    if (total != expected) throw std::logic_error("column " + std::to_string(i) + " does not sum to its weight");
  }
}

void DualMatrix::ascend(std::span<const long double> direction, long double theta) {
  if (direction.size() != shares_.size()) throw std::invalid_argument("direction shape mismatch");
  const std::size_t k = rows();
  std::vector<long double> v(k);
  std::vector<std::int64_t> rounded(k);
  std::vector<std::pair<long double, std::size_t>> remainders;
  for (std::size_t i = 0; i < cols(); ++i) {
    if (budgets_[i] == 0) continue;
    std::optional<std::size_t> pin;
    for (std::size_t l = 0; l < k; ++l) {
      if (pinned(l, i)) pin = l;
    }
    if (pin && k == 1) continue;
    const long double to_shares = static_cast<long double>(scale_) / budgets_[i].convert_to<long double>();
    for (std::size_t l = 0; l < k; ++l) {
      v[l] = static_cast<long double>(shares(l, i)) + theta * direction[l * cols() + i] * to_shares;
    }
    const auto x = project_onto_simplex<long double>(v, static_cast<long double>(scale_), pin);

    // Largest-remainder rounding keeps the column sum exactly on the grid.
    std::int64_t total = 0;
    remainders.clear();
    for (std::size_t l = 0; l < k; ++l) {
      if (pin && *pin == l) {
        rounded[l] = 0;
        continue;
      }
      const long double fl = std::floor(x[l]);
      rounded[l] = static_cast<std::int64_t>(fl);
      total += rounded[l];
      remainders.emplace_back(x[l] - fl, l);
    }
    std::stable_sort(remainders.begin(), remainders.end(),
                     [](const auto& a, const auto& b) { return a.first > b.first; });
    std::int64_t deficit = scale_ - total;
    std::size_t guard = 4 * k + 4;
    for (std::size_t r = 0; deficit != 0 && !remainders.empty() && guard > 0; r = (r + 1) % remainders.size(), --guard) {
      const auto l = remainders[r].second;
      if (deficit > 0) {
        ++rounded[l];
        --deficit;
      } else if (rounded[l] > 0) {
        --rounded[l];
        ++deficit;
      }
    }
    if (deficit != 0) throw std::logic_error("multiplier rounding failed in column " + std::to_string(i));
    for (std::size_t l = 0; l < k; ++l) set_shares(l, i, rounded[l]);
  }
}

// ---------------------------------------------------------------------------

void StepSchedule::validate() const {
  if (family == Family::harmonic) {
    if (!(a > 0) || !(b >= 0) || !(c > 0)) throw std::invalid_argument("step schedule a/(b+cn) needs a>0, b>=0, c>0");
  } else {
    if (!(a > 0 && a < 1)) throw std::invalid_argument("step schedule n^-a needs 0<a<1");
  }
}

long double StepSchedule::operator()(std::size_t n) const {
  const auto x = static_cast<long double>(n);
  if (family == Family::harmonic) return a / (b + c * x);
  return std::pow(x, -a);
}

// ---------------------------------------------------------------------------

namespace {

std::int64_t share_scale(std::size_t k) {
  const std::int64_t base = 1'000'000'000'000;  // 1e-12 quantum
  const auto kk = static_cast<std::int64_t>(k);
  return std::lcm(kk, std::max<std::int64_t>(kk - 1, 1)) * base;
}

std::int64_t to_int64(const Integer& value, const char* what) {
  if (value > std::numeric_limits<std::int64_t>::max() / 4 || value < -(std::numeric_limits<std::int64_t>::max() / 4)) {
    throw std::domain_error(std::string(what) + " too fine-grained for the dual solver");
  }
  return value.convert_to<std::int64_t>();
}

// Joint entropies as integers over one common denominator.
class ScaledEntropy {
 public:
  explicit ScaledEntropy(const SourceModel& model) : model_(model) {
    if (const auto* table = model.table()) {
      denominator_ = to_int64(common_denominator(table->values), "entropy table");
    }
  }

  std::int64_t denominator() const noexcept { return denominator_; }

  std::int64_t operator()(TerminalSet set) {
    if (auto it = cache_.find(set); it != cache_.end()) return it->second;
    const Rational scaled = model_.joint_entropy(set) * denominator_;
    const auto value = to_int64(boost::multiprecision::numerator(scaled), "entropy");
    cache_.emplace(set, value);
    return value;
  }

 private:
  const SourceModel& model_;
  std::int64_t denominator_ = 1;
  std::unordered_map<TerminalSet, std::int64_t> cache_;
};

Solution solve_single_user(const Instance& instance, const SolverConfig& config) {
  const std::size_t target = instance.user_list().front();
  const std::size_t m = instance.terminal_count();
  Solution solution{.rates = edmonds_allocate(instance, target, instance.weights(), config.tie_break),
                    .primal_objective = 0,
                    .dual_objective = 0,
                    .gap = 0,
                    .iterations = 0,
                    .converged = true,
                    .certificate = DualMatrix({target}, instance.weights(), 1),
                    .averaged = {}};
  for (std::size_t i = 0; i < m; ++i) {
    if (i != target && instance.weights()[i] > 0) solution.certificate.set_shares(0, i, 1);
  }
  solution.primal_objective = instance.objective(solution.rates);
  solution.dual_objective = solution.primal_objective;
  solution.averaged = {solution.rates};
  return solution;
}

}  // namespace

DualMatrix init_dual(const Instance& instance) {
  const auto users = instance.user_list();
  const std::size_t k = users.size();
  if (k < 2) throw std::invalid_argument("dual initialization needs at least two users");
  const std::int64_t scale = share_scale(k);
  DualMatrix lambda(users, instance.weights(), scale);
  for (std::size_t i = 0; i < instance.terminal_count(); ++i) {
    if (instance.weights()[i] == 0) continue;
    const bool is_user = contains(instance.users(), i);
    const std::int64_t each = is_user ? scale / static_cast<std::int64_t>(k - 1) : scale / static_cast<std::int64_t>(k);
    for (std::size_t l = 0; l < k; ++l) lambda.set_shares(l, i, users[l] == i ? 0 : each);
  }
  return lambda;
}

DualMatrix subgradient_step(const DualMatrix& lambda, const RateMatrix& rates, const Rational& theta) {
  if (rates.size() != lambda.rows()) throw std::invalid_argument("rate matrix row count mismatch");
  std::vector<long double> direction;
  direction.reserve(lambda.rows() * lambda.cols());
  for (const auto& row : rates) {
    if (row.size() != lambda.cols()) throw std::invalid_argument("rate matrix column count mismatch");
    for (const auto& r : row) direction.push_back(r.convert_to<long double>());
  }
  DualMatrix next = lambda;
  if (theta != 0) next.ascend(direction, theta.convert_to<long double>());
  return next;
}

RateMatrix recover_primal(std::span<const RateMatrix> history, std::span<const Rational> mu) {
  if (history.empty() || history.size() != mu.size()) {
    throw std::invalid_argument("history and averaging weights must be nonempty and of equal length");
  }
  Rational total = 0;
  for (const auto& w : mu) {
    if (w < 0) throw std::invalid_argument("averaging weights must be nonnegative");
    total += w;
  }
  if (total != 1) throw std::invalid_argument("averaging weights must sum to one");
  RateMatrix out = history.front();
  for (auto& row : out) {
    for (auto& x : row) x = 0;
  }
  for (std::size_t j = 0; j < history.size(); ++j) {
    if (history[j].size() != out.size()) throw std::invalid_argument("rate matrix shape mismatch");
    for (std::size_t l = 0; l < out.size(); ++l) {
      if (history[j][l].size() != out[l].size()) throw std::invalid_argument("rate matrix shape mismatch");
      for (std::size_t i = 0; i < out[l].size(); ++i) out[l][i] += mu[j] * history[j][l][i];
    }
  }
  return out;
}

void PrimalAverager::add(const RateMatrix& rates) {
  if (count_ == 0) {
    sum_ = rates;
  } else {
    if (rates.size() != sum_.size()) throw std::invalid_argument("rate matrix shape mismatch");
    for (std::size_t l = 0; l < sum_.size(); ++l) {
      if (rates[l].size() != sum_[l].size()) throw std::invalid_argument("rate matrix shape mismatch");
      for (std::size_t i = 0; i < sum_[l].size(); ++i) sum_[l][i] += rates[l][i];
    }
  }
  ++count_;
}

RateMatrix PrimalAverager::average() const {
  if (count_ == 0) throw std::logic_error("no rate matrices averaged yet");
  RateMatrix out = sum_;
  for (auto& row : out) {
    for (auto& x : row) x /= static_cast<long>(count_);
  }
  return out;
}

Rational dual_objective(const DualMatrix& lambda, const Instance& instance, std::span<const std::size_t> tie_break) {
  Rational total = 0;
  for (std::size_t l = 0; l < lambda.rows(); ++l) {
    const auto weights = lambda.row_weights(l);
    const auto rates = edmonds_allocate(instance, lambda.users()[l], weights, tie_break);
    for (std::size_t i = 0; i < weights.size(); ++i) total += weights[i] * rates[i];
  }
  return total;
}

Rational duality_gap(const Solution& solution, const Instance& instance, std::span<const std::size_t> tie_break) {
  return instance.objective(solution.rates) - dual_objective(solution.certificate, instance, tie_break);
}

Solution solve(const Instance& instance, const SolverConfig& config) {
  config.schedule.validate();
  if (config.max_iterations == 0) throw std::invalid_argument("max_iterations must be positive");
  if (instance.user_count() == 1) return solve_single_user(instance, config);

  const std::size_t m = instance.terminal_count();
  const auto users = instance.user_list();
  const std::size_t k = users.size();
  const auto ranks = tie_ranks(m, config.tie_break);

  const auto& alpha = instance.weights();
  const Integer alpha_den = common_denominator(alpha);
  std::vector<std::int64_t> alpha_num(m);
  std::vector<long double> alpha_value(m);
  for (std::size_t i = 0; i < m; ++i) {
    alpha_num[i] = to_int64(boost::multiprecision::numerator(Rational(alpha[i] * alpha_den)), "weights");
    alpha_value[i] = alpha[i].convert_to<long double>();
  }

  ScaledEntropy entropy(instance.model());
  const auto h_den = static_cast<long double>(entropy.denominator());

  DualMatrix lambda = init_dual(instance);
  const auto share_unit = static_cast<long double>(lambda.scale());
  DualMatrix best_lambda = lambda;
  long double best_dual = -std::numeric_limits<long double>::infinity();

  long double step_scale = config.step_scale;
  if (step_scale < 0) throw std::invalid_argument("step_scale must be nonnegative");
  if (step_scale == 0) {
    const long double alpha_max = *std::max_element(alpha_value.begin(), alpha_value.end());
    const long double h_total = static_cast<long double>(entropy(all_terminals(m))) / h_den;
    step_scale = alpha_max > 0 && h_total > 0 ? 4 * alpha_max / h_total : 1;
  }

  // Uniform averages over the whole run and over a window restarted at each
  // power of two; both are convex combinations of iterates.
  std::vector<std::int64_t> sums(k * m, 0);
  std::vector<std::int64_t> window(k * m, 0);
  std::size_t window_start = 1;
  std::vector<std::int64_t> best_sums;
  std::size_t best_count = 0;
  long double best_primal = std::numeric_limits<long double>::infinity();
  std::vector<std::int64_t> current(k * m, 0);
  std::vector<Wide> keys(m);
  std::vector<long double> direction(k * m);

  // Greedy vertex of every user for the multipliers; fills `out` and returns
  // the dual objective.
  auto evaluate = [&](const DualMatrix& lam, std::vector<std::int64_t>& out) {
    long double dual = 0;
    for (std::size_t l = 0; l < k; ++l) {
      for (std::size_t i = 0; i < m; ++i) keys[i] = static_cast<Wide>(alpha_num[i]) * lam.shares(l, i);
      const TerminalSet candidates = instance.transmitters() & ~singleton(users[l]);
      const auto order = greedy_order<Wide>(candidates, keys, ranks);
      std::fill_n(out.begin() + static_cast<std::ptrdiff_t>(l * m), m, 0);
      TerminalSet known = singleton(users[l]);
      std::int64_t known_h = entropy(known);
      for (auto j : order) {
        known |= singleton(j);
        const std::int64_t next_h = entropy(known);
        out[l * m + j] = next_h - known_h;
        known_h = next_h;
      }
      for (std::size_t i = 0; i < m; ++i) {
        const auto r = out[l * m + i];
        if (r == 0) continue;
        dual += alpha_value[i] * (static_cast<long double>(lam.shares(l, i)) / share_unit) *
                (static_cast<long double>(r) / h_den);
      }
    }
    return dual;
  };

  // Running sum of the multipliers over the same window; their average is
  // dual feasible and often better than the last iterate.
  std::vector<Wide> lambda_window(k * m, 0);
  std::vector<std::int64_t> scratch(k * m, 0);
  constexpr std::size_t kAverageCheck = 64;

  std::size_t n = 0;
  bool converged = false;
  while (n < config.max_iterations) {
    ++n;
    const long double dual = evaluate(lambda, current);
    if (dual > best_dual) {
      best_dual = dual;
      best_lambda = lambda;
    }
    if (n == 2 * window_start) {
      window_start = n;
      std::fill(window.begin(), window.end(), 0);
      std::fill(lambda_window.begin(), lambda_window.end(), 0);
    }
    for (std::size_t x = 0; x < k * m; ++x) lambda_window[x] += lambda.shares(x / m, x % m);
    if (const std::size_t count = n - window_start + 1; count > 1 && n % kAverageCheck == 0) {
      DualMatrix mean = lambda;
      for (std::size_t i = 0; i < m; ++i) {
        Wide total = 0;
        std::vector<std::pair<Wide, std::size_t>> rest;
        for (std::size_t l = 0; l < k; ++l) {
          const Wide sum = lambda_window[l * m + i];
          const auto q = static_cast<std::int64_t>(sum / static_cast<Wide>(count));
          mean.set_shares(l, i, q);
          total += q;
          rest.emplace_back(sum % static_cast<Wide>(count), l);
        }
        // Every iterate's column sums to the same total, so the floors fall
        // short by fewer than k shares.
        std::stable_sort(rest.begin(), rest.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
        const Wide target = lambda.budgets()[i] == 0 ? 0 : static_cast<Wide>(lambda.scale());
        for (std::size_t r = 0; total < target; ++r, ++total) {
          const auto l = rest[r].second;
          mean.set_shares(l, i, mean.shares(l, i) + 1);
        }
      }
      const long double mean_dual = evaluate(mean, scratch);
      if (mean_dual > best_dual) {
        best_dual = mean_dual;
        best_lambda = std::move(mean);
      }
    }
    for (std::size_t x = 0; x < k * m; ++x) {
      sums[x] += current[x];
      window[x] += current[x];
    }

    auto consider = [&](const std::vector<std::int64_t>& acc, std::size_t count) {
      long double primal = 0;
      for (std::size_t i = 0; i < m; ++i) {
        std::int64_t top = 0;
        for (std::size_t l = 0; l < k; ++l) top = std::max(top, acc[l * m + i]);
        primal += alpha_value[i] * static_cast<long double>(top) / (h_den * static_cast<long double>(count));
      }
      if (primal < best_primal) {
        best_primal = primal;
        best_sums = acc;
        best_count = count;
      }
    };
    consider(sums, n);
    consider(window, n - window_start + 1);
    const long double gap = best_primal - best_dual;
    if (config.trace) config.trace({n, best_primal, best_dual, gap});
    if (gap <= config.gap_tolerance) {
      converged = true;
      break;
    }
    for (std::size_t x = 0; x < k * m; ++x) direction[x] = static_cast<long double>(current[x]) / h_den;
    lambda.ascend(direction, step_scale * config.schedule(n));
  }

  RateMatrix averaged(k, RateVector(m, Rational(0)));
  const Rational norm = Rational(entropy.denominator()) * static_cast<long>(best_count);
  RateVector rates(m, Rational(0));
  for (std::size_t l = 0; l < k; ++l) {
    for (std::size_t i = 0; i < m; ++i) {
      averaged[l][i] = Rational(best_sums[l * m + i]) / norm;
      if (averaged[l][i] > rates[i]) rates[i] = averaged[l][i];
    }
  }
  Solution solution{.rates = std::move(rates),
                    .primal_objective = 0,
                    .dual_objective = dual_objective(best_lambda, instance, config.tie_break),
                    .gap = 0,
                    .iterations = n,
                    .converged = false,
                    .certificate = std::move(best_lambda),
                    .averaged = std::move(averaged)};
  solution.primal_objective = instance.objective(solution.rates);
  solution.gap = solution.primal_objective - solution.dual_objective;
  solution.converged = converged && solution.gap <= Rational(config.gap_tolerance);
  return solution;
}

}  // namespace dex
