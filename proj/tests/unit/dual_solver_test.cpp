#include <doctest.h>

#include <random>

#include "dex/cutset_lp.hpp"
#include "dex/dual_solver.hpp"
#include "dex/greedy.hpp"
#include "support.hpp"

using namespace dex;

namespace {

RateVector q(std::initializer_list<Rational> v) { return RateVector(v); }

// Squared-distance minimizer over a 1e-3 grid of the two-point simplex.
std::pair<double, double> grid_projection(double v0, double v1, double budget) {
  double best = 1e300, x0 = 0;
  for (int i = 0; i <= 1000; ++i) {
    const double a = budget * i / 1000.0, b = budget - a;
    const double d = (a - v0) * (a - v0) + (b - v1) * (b - v1);
    if (d < best) best = d, x0 = a;
  }
  return {x0, budget - x0};
}

Instance two_disjoint_users() {
  return Instance(SourceModel::raw({{0}, {1}}, 2), 0b11, {1, 1});
}

}  // namespace

TEST_CASE("init_dual") {
  const auto inst = testing::six_terminal_instance(3, 0b111);
  const DualMatrix d = init_dual(inst);
  d.check();
  for (std::size_t l = 0; l < 3; ++l) {
    CHECK(d.lambda(l, 4) == Rational(1, 3));
    CHECK(d.lambda(l, 0) == (l == 0 ? Rational(0) : Rational(1, 2)));
  }
  const Instance two(SourceModel::linear(testing::six_terminal_source(3)), 0b11, {1, 2, 0, 1, 1, 1});
  const DualMatrix d2 = init_dual(two);
  CHECK(d2.lambda(0, 1) == 2);
  CHECK(d2.lambda(1, 1) == 0);
  CHECK(d2.lambda(0, 2) == 0);
  CHECK(d2.lambda(1, 2) == 0);
  CHECK(d2.column_sum(1) == 2);
  CHECK_THROWS(init_dual(testing::six_terminal_instance(3, 0b1)));
}

TEST_CASE("column projection") {
  CHECK(project_column(q({Rational(7, 10), Rational(1, 2)}), 1) == q({Rational(3, 5), Rational(2, 5)}));
  CHECK(project_column(q({Rational(3, 2), Rational(-3, 10)}), 1) == q({1, 0}));
  const auto [g0, g1] = grid_projection(1.5, -0.3, 1.0);
  CHECK(g0 == doctest::Approx(1.0));
  CHECK(g1 == doctest::Approx(0.0));
  const auto [h0, h1] = grid_projection(0.7, 0.5, 1.0);
  CHECK(h0 == doctest::Approx(0.6));
  CHECK(h1 == doctest::Approx(0.4));

  const auto on = q({Rational(1, 4), 0, Rational(3, 4)});
  CHECK(project_column(on, 1) == on);
  CHECK(project_column(q({5, 7, 1}), 2, 1) == q({2, 0, 0}));
  CHECK(project_column(q({1, 2}), 0) == q({0, 0}));
}

TEST_CASE("column projection matches grid search") {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-2, 2);
  for (int trial = 0; trial < 50; ++trial) {
    const double v0 = u(rng), v1 = u(rng);
    const auto exact = project_column(q({parse_rational(std::to_string(v0)), parse_rational(std::to_string(v1))}), 1);
    const auto [g0, g1] = grid_projection(std::stod(std::to_string(v0)), std::stod(std::to_string(v1)), 1.0);
    CHECK(to_double(exact[0]) == doctest::Approx(g0).epsilon(2e-3));
    CHECK(to_double(exact[1]) == doctest::Approx(g1).epsilon(2e-3));
  }
}

TEST_CASE("subgradient step") {
  const auto inst = testing::six_terminal_instance(3, 0b111);
  const DualMatrix init = init_dual(inst);
  RateMatrix r(3, RateVector(6, Rational(0)));
  r[0] = q({0, 1, 0, 0, 2, 1});
  r[1] = q({1, 0, 0, 1, 0, 1});
  r[2] = q({0, 1, 0, 1, 1, 1});
  CHECK(subgradient_step(init, r, 0) == init);

  const DualMatrix next = subgradient_step(init, r, Rational(1, 2));
  next.check();
  for (std::size_t i = 0; i < 6; ++i) CHECK(next.column_sum(i) == 1);
  // Column 5 has equal entries, so the ascent is projected out.
  for (std::size_t l = 0; l < 3; ++l) CHECK(next.lambda(l, 5) == init.lambda(l, 5));
  // Column 4: (4/3,1/3,5/6) drops by the threshold 7/12 to (3/4,0,1/4).
  CHECK(next.lambda(0, 4) == Rational(3, 4));
  CHECK(next.lambda(1, 4) == 0);
  CHECK(next.lambda(2, 4) == Rational(1, 4));
  CHECK(next.lambda(0, 0) == 0);
}

TEST_CASE("primal recovery") {
  const RateMatrix a{{1, 0}, {0, 2}};
  const RateMatrix b{{3, 2}, {0, 0}};
  const std::vector<RateMatrix> one{a};
  CHECK(recover_primal(one, q({1})) == a);
  const std::vector<RateMatrix> two{a, b};
  CHECK(recover_primal(two, q({Rational(1, 2), Rational(1, 2)})) == RateMatrix{{2, 1}, {0, 1}});
  const std::vector<RateMatrix> same{a, a, a};
  CHECK(recover_primal(same, q({Rational(1, 3), Rational(1, 3), Rational(1, 3)})) == a);
  CHECK_THROWS(recover_primal(two, q({1, 1})));

  PrimalAverager avg;
  avg.add(a);
  CHECK(avg.average() == a);
  avg.add(b);
  CHECK(avg.average() == RateMatrix{{2, 1}, {0, 1}});
  CHECK(avg.count() == 2);
}

TEST_CASE("step schedules") {
  StepSchedule s;
  CHECK(static_cast<double>(s(1)) == doctest::Approx(0.5));
  CHECK(static_cast<double>(s(3)) == doctest::Approx(0.25));
  StepSchedule p{StepSchedule::Family::power, 0.5L};
  CHECK(static_cast<double>(p(4)) == doctest::Approx(0.5));
  CHECK_THROWS((StepSchedule{StepSchedule::Family::power, 1.0L}.validate()));
  CHECK_THROWS((StepSchedule{StepSchedule::Family::harmonic, 1, -1, 1}.validate()));
  CHECK_THROWS((StepSchedule{StepSchedule::Family::harmonic, 0, 1, 1}.validate()));
}

TEST_CASE("solve on the three-user example") {
  const auto inst = testing::six_terminal_instance(3, 0b111);
  const Solution s = solve(inst);
  CHECK(s.converged);
  CHECK(s.gap <= Rational(1, 1000));
  CHECK(s.gap >= 0);
  CHECK(abs(s.primal_objective - Rational(9, 4)) <= Rational(1, 1000));
  const double expected[] = {0.25, 0.25, 0.25, 0.5, 0.5, 0.5};
  for (std::size_t i = 0; i < 6; ++i) CHECK(to_double(s.rates[i]) == doctest::Approx(expected[i]).epsilon(0.01));
  CHECK(violated_cuts(inst, s.rates).empty());
  CHECK(s.dual_objective <= Rational(9, 4));
  CHECK(duality_gap(s, inst) == s.gap);
  CHECK(s.averaged.size() == 3);
  s.certificate.check();
}

TEST_CASE("duality gap") {
  const auto inst = testing::six_terminal_instance(3, 0b111);
  CHECK(dual_objective(init_dual(inst), inst) == 2);

  // Two users each holding one packet: multipliers (0 1; 1 0) are optimal.
  const auto pair = two_disjoint_users();
  const Solution s = solve(pair);
  CHECK(s.rates == q({1, 1}));
  CHECK(s.gap == 0);
  CHECK(s.dual_objective == 2);

  const auto single = testing::six_terminal_instance(3, 0b1);
  const Solution k1 = solve(single);
  CHECK(k1.rates == edmonds_allocate(single, 0, single.weights()));
  CHECK(k1.gap == 0);
  CHECK(k1.primal_objective == 2);
  CHECK(duality_gap(k1, single) == 0);
}

TEST_CASE("two users and a helper") {
  const auto inst = testing::two_users_one_helper();
  const Solution s = solve(inst);
  CHECK(s.converged);
  CHECK(abs(s.primal_objective - 2) <= Rational(1, 1000));
  CHECK(violated_cuts(inst, s.rates).empty());
}

TEST_CASE("recovered primal is feasible and duality brackets the optimum along the trajectory") {
  const auto inst = testing::six_terminal_instance(3, 0b111);
  const Rational opt = solve_exact(build_lp(inst)).value;
  for (std::size_t n : {1, 2, 5, 17, 60, 250}) {
    SolverConfig config;
    config.max_iterations = n;
    config.gap_tolerance = 0;
    const Solution s = solve(inst, config);
    CHECK(s.iterations == n);
    CHECK(violated_cuts(inst, s.rates).empty());
    const auto users = inst.user_list();
    for (std::size_t l = 0; l < users.size(); ++l) CHECK(feasible_in_region(s.averaged[l], inst, users[l]));
    CHECK(s.dual_objective <= opt);
    CHECK(opt <= s.primal_objective);
    s.certificate.check();
  }
}

TEST_CASE("gap shrinks over decades of iterations") {
  for (const auto& inst : {testing::six_terminal_instance(3, 0b111), testing::six_terminal_instance(2, 0b111)}) {
    Rational previous = -1;
    for (std::size_t n : {10, 100, 1000}) {
      SolverConfig config;
      config.max_iterations = n;
      config.gap_tolerance = 0;
      const Rational gap = solve(inst, config).gap;
      if (previous >= 0) CHECK(gap < previous);
      previous = gap;
    }
  }
}

TEST_CASE("solver is deterministic and traces every iteration") {
  std::mt19937_64 rng(41);
  testing::RandomSpec spec;
  spec.min_users = 2;
  spec.max_users = 4;
  const auto inst = testing::random_instance(rng, spec);
  REQUIRE(inst);
  SolverConfig config;
  config.max_iterations = 300;
  std::size_t traced = 0;
  config.trace = [&](const TraceRecord& r) {
    ++traced;
    CHECK(r.gap == doctest::Approx(static_cast<double>(r.primal - r.dual)));
  };
  const Solution a = solve(*inst, config);
  config.trace = nullptr;
  const Solution b = solve(*inst, config);
  CHECK(traced == a.iterations);
  CHECK(a.rates == b.rates);
  CHECK(a.certificate == b.certificate);
  CHECK(a.gap == b.gap);
}

TEST_CASE("power step schedule also converges") {
  const auto inst = testing::two_users_one_helper();
  SolverConfig config;
  config.schedule = StepSchedule{StepSchedule::Family::power, 0.6L};
  const Solution s = solve(inst, config);
  CHECK(s.converged);
  CHECK(abs(s.primal_objective - 2) <= Rational(1, 1000));
}

TEST_CASE("explicit step scales") {
  const auto inst = testing::six_terminal_instance(3, 0b111);
  SolverConfig unscaled;
  unscaled.step_scale = 1;
  const Solution s = solve(inst, unscaled);
  CHECK(s.converged);
  CHECK(abs(s.primal_objective - Rational(9, 4)) <= Rational(1, 1000));
  SolverConfig bad;
  bad.step_scale = -1;
  CHECK_THROWS_AS(solve(inst, bad), std::invalid_argument);
}

TEST_CASE("reported rates are the column maxima of the reported averages") {
  std::mt19937_64 rng(59);
  testing::RandomSpec spec;
  spec.min_users = 2;
  spec.max_users = 5;
  for (int trial = 0; trial < 10; ++trial) {
    const auto inst = testing::random_instance(rng, spec);
    REQUIRE(inst);
    const Solution s = solve(*inst);
    for (std::size_t i = 0; i < inst->terminal_count(); ++i) {
      Rational top = 0;
      for (const auto& row : s.averaged) top = row[i] > top ? row[i] : top;
      CHECK(s.rates[i] == top);
    }
    CHECK(s.primal_objective == inst->objective(s.rates));
    CHECK(s.gap == duality_gap(s, *inst));
  }
}
