#include <doctest.h>

#include <random>

#include "dex/field.hpp"
#include "support.hpp"

using namespace dex;

namespace {

// Schoolbook product of base-p encoded polynomials reduced by a monic modulus.
std::uint32_t poly_mulmod(std::uint32_t a, std::uint32_t b, std::uint32_t p, const std::vector<std::uint32_t>& monic) {
  const std::size_t w = monic.size() - 1;
  std::vector<std::uint64_t> x(w), y(w), prod(2 * w, 0);
  for (std::size_t i = 0; i < w; ++i, a /= p, b /= p) {
    x[i] = a % p;
    y[i] = b % p;
  }
  for (std::size_t i = 0; i < w; ++i)
    for (std::size_t j = 0; j < w; ++j) prod[i + j] = (prod[i + j] + x[i] * y[j]) % p;
  for (std::size_t d = 2 * w - 1; d >= w; --d) {
    const auto c = prod[d];
    if (c == 0) continue;
    for (std::size_t k = 0; k <= w; ++k) prod[d - w + k] = (prod[d - w + k] + (p - c) * monic[k] % p) % p;
  }
  std::uint32_t out = 0;
  for (std::size_t i = w; i-- > 0;) out = out * p + static_cast<std::uint32_t>(prod[i]);
  return out;
}

FieldMatrix random_matrix(std::mt19937_64& rng, const Field& f, std::size_t rows, std::size_t cols) {
  FieldMatrix m(f, rows, cols);
  std::uniform_int_distribution<std::uint64_t> d(0, f.order() - 1);
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c) m.set(r, c, static_cast<Field::Element>(d(rng)));
  return m;
}

}  // namespace

TEST_CASE("prime fields") {
  const Field f2 = Field::make(2), f3 = Field::make(3);
  CHECK(f2.order() == 2);
  CHECK(f3.order() == 3);
  CHECK(f3.name() == "GF(3)");
  CHECK(f3.add(2, 2) == 1);
  CHECK(f3.mul(2, 2) == 1);
  CHECK(f3.inv(2) == 2);
  CHECK(f3.neg(1) == 2);
  CHECK_THROWS_AS(f3.inv(0), std::domain_error);
  for (std::uint32_t p : {2u, 3u, 5u, 7u, 13u}) {
    const Field f = Field::make(p);
    for (Field::Element a = 1; a < p; ++a) CHECK(f.mul(a, f.inv(a)) == 1);
  }
}

TEST_CASE("make_field rejects bad parameters") {
  CHECK_THROWS_AS(Field::make(4), std::invalid_argument);
  CHECK_THROWS_AS(Field::make(1), std::invalid_argument);
  CHECK_THROWS_AS(Field::make(2, 0), std::invalid_argument);
  CHECK_THROWS_AS(Field::with_modulus(2, {1, 0, 1}), std::invalid_argument);  // x^2 + 1 = (x + 1)^2
}

TEST_CASE("GF(256) modulus is irreducible and arithmetic matches polynomial reduction") {
  const Field f = Field::make(2, 8);
  CHECK(f.order() == 256);
  const std::vector<std::uint32_t> monic(f.modulus().begin(), f.modulus().end());
  REQUIRE(monic.size() == 9);
  CHECK(monic.back() == 1);
  // The lexicographically first irreducible octic over GF(2) is x^8 + x^4 + x^3 + x + 1.
  CHECK(monic == std::vector<std::uint32_t>{1, 1, 0, 1, 1, 0, 0, 0, 1});
  // No zero divisors in the quotient ring <=> the modulus is irreducible.
  bool zero_divisor = false, mismatch = false;
  for (std::uint32_t a = 1; a < 256; ++a) {
    for (std::uint32_t b = 1; b < 256; ++b) {
      const auto c = poly_mulmod(a, b, 2, monic);
      zero_divisor |= c == 0;
      mismatch |= c != f.mul(a, b);
    }
  }
  CHECK_FALSE(zero_divisor);
  CHECK_FALSE(mismatch);
}

TEST_CASE("odd-characteristic extensions") {
  for (auto [p, w] : {std::pair{3u, 2u}, {3u, 3u}, {5u, 2u}, {2u, 5u}}) {
    const Field f = Field::make(p, w);
    const std::vector<std::uint32_t> monic(f.modulus().begin(), f.modulus().end());
    bool ok = true;
    for (Field::Element a = 1; a < f.order(); ++a) {
      ok &= f.mul(a, f.inv(a)) == 1;
      ok &= f.pow(a, f.order() - 1) == 1;
      for (Field::Element b = 1; b < f.order(); b += 3) ok &= f.mul(a, b) == poly_mulmod(a, b, p, monic);
    }
    CHECK(ok);
    CHECK(is_irreducible(p, monic));
  }
}

TEST_CASE("embedding preserves arithmetic") {
  const Field small = Field::make(3, 2), big = Field::make(3, 4);
  const FieldEmbedding e(small, big);
  for (Field::Element a = 0; a < 9; ++a) {
    for (Field::Element b = 0; b < 9; ++b) {
      CHECK(e(small.add(a, b)) == big.add(e(a), e(b)));
      CHECK(e(small.mul(a, b)) == big.mul(e(a), e(b)));
    }
  }
  const FieldEmbedding prime(Field::make(3), big);
  CHECK(prime(2) == 2);
}

TEST_CASE("rank examples") {
  const Field f2 = Field::make(2), f3 = Field::make(3);
  CHECK(rank(FieldMatrix::identity(f2, 3)) == 3);
  const std::vector<FieldVector> rows{{1, 1, 0}, {1, 0, 1}, {0, 1, 1}};
  CHECK(rank(FieldMatrix::from_rows(f2, rows, 3)) == 2);
  CHECK(rank(FieldMatrix::from_rows(f3, rows, 3)) == 3);
  CHECK(rank(FieldMatrix(f2, 0, 4)) == 0);
  CHECK(rank(FieldMatrix(f2, 3, 0)) == 0);
  CHECK_THROWS_AS(FieldMatrix::from_rows(f2, {{1, 2}}, 2), std::invalid_argument);
  CHECK_THROWS_AS(FieldMatrix::from_rows(f2, {{1, 0}, {1}}, 2), std::invalid_argument);
}

TEST_CASE("rank agrees with row-span enumeration") {
  std::mt19937_64 rng(7);
  for (std::uint32_t p : {2u, 3u, 5u}) {
    const Field f = Field::make(p);
    for (int trial = 0; trial < 60; ++trial) {
      const auto m = random_matrix(rng, f, 1 + trial % 5, 1 + (trial / 5) % 5);
      CHECK(rank(m) == testing::span_rank(m));
    }
  }
}

TEST_CASE("rank properties") {
  std::mt19937_64 rng(11);
  for (std::uint32_t p : {2u, 3u, 7u}) {
    const Field f = Field::make(p);
    for (int trial = 0; trial < 50; ++trial) {
      const auto a = random_matrix(rng, f, 1 + trial % 6, 4);
      const auto b = random_matrix(rng, f, 1 + trial % 3, 4);
      const auto ra = rank(a), rb = rank(b);
      CHECK(ra <= std::min(a.rows(), a.cols()));
      CHECK(rank(a.stacked(b)) >= std::max(ra, rb));
      // Row permutation and nonzero row scaling.
      FieldMatrix c(f, a.rows(), a.cols());
      std::vector<std::size_t> perm(a.rows());
      for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = i;
      std::shuffle(perm.begin(), perm.end(), rng);
      const auto scale = static_cast<Field::Element>(1 + rng() % (p - 1));
      for (std::size_t r = 0; r < a.rows(); ++r)
        for (std::size_t col = 0; col < a.cols(); ++col) c.set(r, col, f.mul(scale, a.at(perm[r], col)));
      CHECK(rank(c) == ra);
    }
  }
}

TEST_CASE("reduced row echelon form") {
  const Field f3 = Field::make(3);
  const auto e = reduced_row_echelon(FieldMatrix::from_rows(f3, {{0, 2, 1}, {1, 1, 0}, {1, 0, 1}}, 3));
  CHECK(e.pivot_columns == std::vector<std::size_t>{0, 1});
  CHECK(e.reduced.row(0)[0] == 1);
  CHECK(e.reduced.row(1)[1] == 1);
  CHECK(e.reduced.row(0)[1] == 0);
}

TEST_CASE("solve_linear examples") {
  const Field f2 = Field::make(2);
  const FieldVector b{1, 0, 1};
  CHECK(solve_linear(FieldMatrix::identity(f2, 3), b) == FieldVector{1, 0, 1});
  const auto m = FieldMatrix::from_rows(f2, {{1, 1, 0}, {0, 1, 1}}, 3);
  // Pivots in columns 0 and 1; the free column 2 is set to zero.
  CHECK(solve_linear(m, FieldVector{1, 1}) == FieldVector{0, 1, 0});
  CHECK(m.apply(FieldVector{1, 0, 1}) == FieldVector{1, 1});
  CHECK_FALSE(solve_linear(FieldMatrix::from_rows(f2, {{1, 1, 0}, {1, 1, 0}}, 3), FieldVector{1, 0}).has_value());
  CHECK_THROWS_AS(solve_linear(m, FieldVector{1}), std::invalid_argument);
}

TEST_CASE("solve_linear solutions satisfy the system") {
  std::mt19937_64 rng(3);
  for (auto [p, w] : {std::pair{2u, 1u}, {5u, 1u}, {2u, 4u}, {3u, 2u}}) {
    const Field f = Field::make(p, w);
    for (int trial = 0; trial < 40; ++trial) {
      const auto m = random_matrix(rng, f, 1 + trial % 5, 1 + trial % 4);
      FieldVector x(m.cols());
      for (auto& v : x) v = static_cast<Field::Element>(rng() % f.order());
      const FieldVector b = m.apply(x);
      const auto sol = solve_linear(m, b);
      REQUIRE(sol.has_value());
      CHECK(m.apply(*sol) == b);
    }
  }
}

TEST_CASE("matrix products and block replication") {
  const Field f3 = Field::make(3);
  const auto a = FieldMatrix::from_rows(f3, {{1, 2}, {0, 1}}, 2);
  const auto prod = a * a;
  CHECK(prod == FieldMatrix::from_rows(f3, {{1, 1}, {0, 1}}, 2));
  const auto rep = a.block_replicated(3);
  CHECK(rep.rows() == 6);
  CHECK(rep.cols() == 6);
  CHECK(rep.at(2, 2) == 1);
  CHECK(rep.at(2, 3) == 2);
  CHECK(rep.at(0, 2) == 0);
  CHECK(rank(rep) == 3 * rank(a));
}
