#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace dex {

bool is_prime(std::uint64_t n);

/// True iff the monic polynomial (coefficients low to high, leading 1
/// included) has no monic factor of degree 1..deg/2 over GF(p).
bool is_irreducible(std::uint32_t characteristic, std::span<const std::uint32_t> monic);

/// GF(p^w). An element is encoded as the integer sum c_j p^j of its
/// polynomial coefficients, so prime-field elements are plain residues and
/// the prime subfield occupies 0..p-1 in every extension.
///
/// The modulus for w > 1 is the first monic irreducible polynomial of degree
/// w when its lower coefficients are read as a base-p integer, i.e. the
/// lowest in lexicographic order from the x^(w-1) coefficient down.
class Field {
 public:
  using Element = std::uint32_t;

  /// Throws std::invalid_argument for a non-prime characteristic, w < 1, or
  /// p^w >= 2^31.
  static Field make(std::uint32_t characteristic, unsigned degree = 1);

  /// Uses the given monic modulus; irreducibility is verified.
  static Field with_modulus(std::uint32_t characteristic, std::vector<std::uint32_t> monic);

  std::uint32_t characteristic() const noexcept;
  unsigned degree() const noexcept;
  std::uint64_t order() const noexcept;
  /// Monic modulus, low to high; empty for prime fields.
  std::span<const std::uint32_t> modulus() const noexcept;
  std::string name() const;

  bool contains(Element a) const noexcept { return a < order(); }

  Element add(Element a, Element b) const;
  Element sub(Element a, Element b) const;
  Element neg(Element a) const;
  Element mul(Element a, Element b) const;
  /// Throws std::domain_error for zero.
  Element inv(Element a) const;
  Element div(Element a, Element b) const { return mul(a, inv(b)); }
  Element pow(Element a, std::uint64_t exponent) const;

  friend bool operator==(const Field& a, const Field& b);

 private:
  struct Impl;
  explicit Field(std::shared_ptr<const Impl> impl) : impl_(std::move(impl)) {}
  std::shared_ptr<const Impl> impl_;
};

using FieldVector = std::vector<Field::Element>;

/// Homomorphic embedding of a subfield into a larger field of the same
/// characteristic whose degree is a multiple of the smaller one.
class FieldEmbedding {
 public:
  FieldEmbedding(const Field& from, const Field& to);

  const Field& from() const noexcept { return from_; }
  const Field& to() const noexcept { return to_; }
  Field::Element operator()(Field::Element a) const;

 private:
  Field from_;
  Field to_;
  std::vector<Field::Element> powers_;  // images of x^0 .. x^(w-1)
};

/// Dense row-major matrix over a Field.
class FieldMatrix {
 public:
  using Element = Field::Element;

  FieldMatrix(Field field, std::size_t rows, std::size_t cols);
  /// Throws std::invalid_argument on ragged rows or out-of-field entries.
  static FieldMatrix from_rows(Field field, const std::vector<FieldVector>& rows, std::size_t cols);
  static FieldMatrix identity(Field field, std::size_t n);

  const Field& field() const noexcept { return field_; }
  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  bool empty() const noexcept { return rows_ == 0 || cols_ == 0; }

  Element at(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }
  void set(std::size_t r, std::size_t c, Element v);
  std::span<const Element> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }
  std::span<Element> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }

  /// Vertical concatenation; column counts and fields must agree.
  FieldMatrix stacked(const FieldMatrix& below) const;
  static FieldMatrix stack(std::span<const FieldMatrix> blocks, Field field, std::size_t cols);

  /// Block-diagonal replication diag(A, ..., A) with `copies` blocks.
  FieldMatrix block_replicated(std::size_t copies) const;

  FieldMatrix mapped(const FieldEmbedding& embedding) const;

  FieldVector apply(std::span<const Element> x) const;

  friend FieldMatrix operator*(const FieldMatrix& a, const FieldMatrix& b);
  friend bool operator==(const FieldMatrix& a, const FieldMatrix& b);

 private:
  Field field_;
  std::size_t rows_;
  std::size_t cols_;
  std::vector<Element> data_;
};

struct EchelonForm {
  FieldMatrix reduced;
  std::vector<std::size_t> pivot_columns;
};

EchelonForm reduced_row_echelon(FieldMatrix m);

std::size_t rank(const FieldMatrix& m);

/// One solution of m x = b with free variables set to zero, or nullopt when
/// the system is inconsistent. Throws std::invalid_argument if b.size() !=
/// m.rows().
std::optional<FieldVector> solve_linear(const FieldMatrix& m, std::span<const Field::Element> b);

}  // namespace dex
