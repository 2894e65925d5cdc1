#include "dex/field.hpp"

#include <algorithm>
#include <stdexcept>
#include <utility>

namespace dex {

bool is_prime(std::uint64_t n) {
  if (n < 2) return false;
  for (std::uint64_t d = 2; d * d <= n; ++d) {
    if (n % d == 0) return false;
  }
  return true;
}

namespace {

using Poly = std::vector<std::uint32_t>;  // low to high

void trim(Poly& p) {
  while (!p.empty() && p.back() == 0) p.pop_back();
}

// Remainder of a modulo a monic divisor over GF(p).
Poly poly_mod(Poly a, const Poly& monic, std::uint32_t p) {
  const std::size_t d = monic.size() - 1;
  trim(a);
  while (a.size() > d) {
    const std::uint64_t lead = a.back();
    const std::size_t shift = a.size() - 1 - d;
    for (std::size_t j = 0; j <= d; ++j) {
      const std::uint64_t sub = lead * monic[j] % p;
      a[shift + j] = static_cast<std::uint32_t>((a[shift + j] + p - sub) % p);
    }
    trim(a);
  }
  return a;
}

std::uint64_t ipow(std::uint64_t base, unsigned e) {
  std::uint64_t r = 1;
  while (e-- > 0) r *= base;
  return r;
}

std::vector<std::uint64_t> prime_factors(std::uint64_t n) {
  std::vector<std::uint64_t> out;
  for (std::uint64_t d = 2; d * d <= n; ++d) {
    if (n % d == 0) {
      out.push_back(d);
      while (n % d == 0) n /= d;
    }
  }
  if (n > 1) out.push_back(n);
  return out;
}

constexpr std::uint64_t kMaxOrder = std::uint64_t{1} << 31;
constexpr std::uint64_t kMaxTableOrder = std::uint64_t{1} << 16;

}  // namespace

bool is_irreducible(std::uint32_t p, std::span<const std::uint32_t> monic) {
  if (monic.size() < 2 || monic.back() != 1) {
    throw std::invalid_argument("polynomial must be monic of degree >= 1");
  }
  const unsigned degree = static_cast<unsigned>(monic.size() - 1);
  const Poly f(monic.begin(), monic.end());
  for (unsigned d = 1; d <= degree / 2; ++d) {
    const std::uint64_t count = ipow(p, d);
    for (std::uint64_t code = 0; code < count; ++code) {
      Poly g(d + 1);
      std::uint64_t c = code;
      for (unsigned j = 0; j < d; ++j) {
        g[j] = static_cast<std::uint32_t>(c % p);
        c /= p;
      }
      g[d] = 1;
      if (poly_mod(f, g, p).empty()) return false;
    }
  }
  return true;
}

struct Field::Impl {
  std::uint32_t p = 2;
  unsigned w = 1;
  std::uint64_t q = 2;
  Poly modulus;
  std::vector<Element> exp;  // length 2(q-1) when tabulated
  std::vector<std::uint32_t> log;

  Poly digits(Element a) const {
    Poly out(w);
    for (unsigned j = 0; j < w; ++j) {
      out[j] = a % p;
      a /= p;
    }
    return out;
  }

  Element encode(const Poly& c) const {
    std::uint64_t v = 0;
    for (std::size_t j = c.size(); j-- > 0;) v = v * p + c[j];
    return static_cast<Element>(v);
  }

  Element add(Element a, Element b) const {
    if (w == 1) return static_cast<Element>((std::uint64_t{a} + b) % p);
    if (p == 2) return a ^ b;
    std::uint64_t out = 0, scale = 1;
    for (unsigned j = 0; j < w; ++j) {
      out += ((a % p + b % p) % p) * scale;
      a /= p;
      b /= p;
      scale *= p;
    }
    return static_cast<Element>(out);
  }

  Element neg(Element a) const {
    if (w == 1) return a == 0 ? 0 : p - a;
    if (p == 2) return a;
    std::uint64_t out = 0, scale = 1;
    for (unsigned j = 0; j < w; ++j) {
      out += ((p - a % p) % p) * scale;
      a /= p;
      scale *= p;
    }
    return static_cast<Element>(out);
  }

  Element slow_mul(Element a, Element b) const {
    if (w == 1) return static_cast<Element>(std::uint64_t{a} * b % p);
    const Poly x = digits(a), y = digits(b);
    Poly prod(2 * w - 1, 0);
    for (unsigned i = 0; i < w; ++i) {
      if (x[i] == 0) continue;
      for (unsigned j = 0; j < w; ++j) {
        prod[i + j] = static_cast<std::uint32_t>((prod[i + j] + std::uint64_t{x[i]} * y[j]) % p);
      }
    }
    Poly r = poly_mod(std::move(prod), modulus, p);
    r.resize(w, 0);
    return encode(r);
  }

  Element mul(Element a, Element b) const {
    if (a == 0 || b == 0) return 0;
    if (!exp.empty()) return exp[log[a] + log[b]];
    return slow_mul(a, b);
  }

  Element pow(Element a, std::uint64_t e) const {
    Element result = 1;
    while (e > 0) {
      if (e & 1) result = mul(result, a);
      a = mul(a, a);
      e >>= 1;
    }
    return result;
  }

  void build_tables() {
    if (q > kMaxTableOrder) return;
    const std::uint64_t n = q - 1;
    const auto factors = prime_factors(n);
    Element generator = 0;
    for (Element g = 1; g < q; ++g) {
      bool primitive = true;
      for (auto f : factors) {
        if (pow(g, n / f) == 1) {
          primitive = false;
          break;
        }
      }
      if (primitive) {
        generator = g;
        break;
      }
    }
    exp.assign(2 * n, 0);
    log.assign(q, 0);
    Element x = 1;
    for (std::uint64_t i = 0; i < n; ++i) {
      exp[i] = x;
      exp[i + n] = x;
      log[x] = static_cast<std::uint32_t>(i);
      x = slow_mul(x, generator);
    }
  }
};

Field Field::make(std::uint32_t characteristic, unsigned degree) {
  if (!is_prime(characteristic)) {
    throw std::invalid_argument("field characteristic " + std::to_string(characteristic) + " is not prime");
  }
  if (degree < 1) throw std::invalid_argument("field degree must be at least 1");
  if (degree == 1) return with_modulus(characteristic, {});

  const std::uint64_t count = [&] {
    std::uint64_t c = 1;
    for (unsigned i = 0; i < degree; ++i) {
      c *= characteristic;
      if (c >= kMaxOrder) throw std::invalid_argument("field order exceeds 2^31");
    }
    return c;
  }();
  for (std::uint64_t code = 0; code < count; ++code) {
    std::vector<std::uint32_t> monic(degree + 1);
    std::uint64_t c = code;
    for (unsigned j = 0; j < degree; ++j) {
      monic[j] = static_cast<std::uint32_t>(c % characteristic);
      c /= characteristic;
    }
    monic[degree] = 1;
    if (monic[0] != 0 && is_irreducible(characteristic, monic)) {
      return with_modulus(characteristic, std::move(monic));
    }
  }
  throw std::logic_error("no irreducible polynomial found");  // unreachable
}

Field Field::with_modulus(std::uint32_t characteristic, std::vector<std::uint32_t> monic) {
  if (!is_prime(characteristic)) {
    throw std::invalid_argument("field characteristic " + std::to_string(characteristic) + " is not prime");
  }
  auto impl = std::make_shared<Impl>();
  impl->p = characteristic;
  if (monic.empty()) {
    impl->w = 1;
  } else {
    for (auto c : monic) {
      if (c >= characteristic) throw std::invalid_argument("modulus coefficient out of range");
    }
    if (monic.size() == 2) {
      // Linear moduli give the prime field itself.
      monic.clear();
      impl->w = 1;
    } else {
      if (!is_irreducible(characteristic, monic)) {
        throw std::invalid_argument("modulus polynomial is reducible");
      }
      impl->w = static_cast<unsigned>(monic.size() - 1);
    }
  }
  std::uint64_t q = 1;
  for (unsigned i = 0; i < impl->w; ++i) {
    q *= characteristic;
    if (q >= kMaxOrder) throw std::invalid_argument("field order exceeds 2^31");
  }
  impl->q = q;
  impl->modulus = std::move(monic);
  impl->build_tables();
  return Field(std::move(impl));
}

std::uint32_t Field::characteristic() const noexcept { return impl_->p; }
unsigned Field::degree() const noexcept { return impl_->w; }
std::uint64_t Field::order() const noexcept { return impl_->q; }
std::span<const std::uint32_t> Field::modulus() const noexcept { return impl_->modulus; }

std::string Field::name() const {
  if (impl_->w == 1) return "GF(" + std::to_string(impl_->p) + ")";
  return "GF(" + std::to_string(impl_->p) + "^" + std::to_string(impl_->w) + ")";
}

Field::Element Field::add(Element a, Element b) const { return impl_->add(a, b); }
Field::Element Field::sub(Element a, Element b) const { return impl_->add(a, impl_->neg(b)); }
Field::Element Field::neg(Element a) const { return impl_->neg(a); }
Field::Element Field::mul(Element a, Element b) const { return impl_->mul(a, b); }
Field::Element Field::pow(Element a, std::uint64_t e) const { return impl_->pow(a, e); }

Field::Element Field::inv(Element a) const {
  if (a == 0) throw std::domain_error("inverse of zero");
  if (!impl_->exp.empty()) {
    const std::uint64_t n = impl_->q - 1;
    return impl_->exp[(n - impl_->log[a]) % n];
  }
  return impl_->pow(a, impl_->q - 2);
}

bool operator==(const Field& a, const Field& b) {
  if (a.impl_ == b.impl_) return true;
  return a.impl_->p == b.impl_->p && a.impl_->w == b.impl_->w && a.impl_->modulus == b.impl_->modulus;
}

// ---------------------------------------------------------------------------

FieldEmbedding::FieldEmbedding(const Field& from, const Field& to) : from_(from), to_(to) {
  if (from.characteristic() != to.characteristic() || to.degree() % from.degree() != 0) {
    throw std::invalid_argument("cannot embed " + from.name() + " into " + to.name());
  }
  const unsigned w = from.degree();
  if (w == 1) return;
  if (from == to) {
    Field::Element x = 1;
    for (unsigned j = 0; j < w; ++j) {
      powers_.push_back(x);
      x = to.mul(x, from.characteristic());  // the element "x" encodes as p
    }
    return;
  }
  // Find a root of the subfield modulus in the larger field; x maps to it.
  const auto f = from.modulus();
  for (Field::Element beta = 1; beta < to.order(); ++beta) {
    Field::Element acc = 0;
    for (std::size_t j = f.size(); j-- > 0;) acc = to.add(to.mul(acc, beta), f[j]);
    if (acc == 0) {
      Field::Element x = 1;
      for (unsigned j = 0; j < w; ++j) {
        powers_.push_back(x);
        x = to.mul(x, beta);
      }
      return;
    }
  }
  throw std::logic_error("subfield modulus has no root in the extension");
}

Field::Element FieldEmbedding::operator()(Field::Element a) const {
  if (!from_.contains(a)) throw std::invalid_argument("element outside source field");
  if (powers_.empty()) return a;
  const std::uint32_t p = from_.characteristic();
  Field::Element out = 0;
  for (auto base : powers_) {
    out = to_.add(out, to_.mul(a % p, base));
    a /= p;
  }
  return out;
}

// ---------------------------------------------------------------------------

FieldMatrix::FieldMatrix(Field field, std::size_t rows, std::size_t cols)
    : field_(std::move(field)), rows_(rows), cols_(cols), data_(rows * cols, 0) {}

FieldMatrix FieldMatrix::from_rows(Field field, const std::vector<FieldVector>& rows, std::size_t cols) {
  FieldMatrix m(std::move(field), rows.size(), cols);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].size() != cols) {
      throw std::invalid_argument("row " + std::to_string(r) + " has " + std::to_string(rows[r].size()) +
                                  " entries, expected " + std::to_string(cols));
    }
    for (std::size_t c = 0; c < cols; ++c) m.set(r, c, rows[r][c]);
  }
  return m;
}

FieldMatrix FieldMatrix::identity(Field field, std::size_t n) {
  FieldMatrix m(std::move(field), n, n);
  for (std::size_t i = 0; i < n; ++i) m.data_[i * n + i] = 1;
  return m;
}

void FieldMatrix::set(std::size_t r, std::size_t c, Element v) {
  if (!field_.contains(v)) {
    throw std::invalid_argument("entry " + std::to_string(v) + " is not an element of " + field_.name());
  }
  data_[r * cols_ + c] = v;
}

FieldMatrix FieldMatrix::stacked(const FieldMatrix& below) const {
  if (below.cols_ != cols_ || !(below.field_ == field_)) {
    throw std::invalid_argument("stacked matrices must share field and column count");
  }
  FieldMatrix out(field_, rows_ + below.rows_, cols_);
  std::copy(data_.begin(), data_.end(), out.data_.begin());
  std::copy(below.data_.begin(), below.data_.end(), out.data_.begin() + static_cast<std::ptrdiff_t>(data_.size()));
  return out;
}

FieldMatrix FieldMatrix::stack(std::span<const FieldMatrix> blocks, Field field, std::size_t cols) {
  std::size_t total = 0;
  for (const auto& b : blocks) {
    if (b.cols_ != cols || !(b.field_ == field)) {
      throw std::invalid_argument("stacked matrices must share field and column count");
    }
    total += b.rows_;
  }
  FieldMatrix out(std::move(field), total, cols);
  auto it = out.data_.begin();
  for (const auto& b : blocks) it = std::copy(b.data_.begin(), b.data_.end(), it);
  return out;
}

FieldMatrix FieldMatrix::block_replicated(std::size_t copies) const {
  FieldMatrix out(field_, rows_ * copies, cols_ * copies);
  for (std::size_t b = 0; b < copies; ++b) {
    for (std::size_t r = 0; r < rows_; ++r) {
      for (std::size_t c = 0; c < cols_; ++c) {
        out.data_[(b * rows_ + r) * out.cols_ + b * cols_ + c] = at(r, c);
      }
    }
  }
  return out;
}

FieldMatrix FieldMatrix::mapped(const FieldEmbedding& embedding) const {
  if (!(embedding.from() == field_)) throw std::invalid_argument("embedding source field mismatch");
  FieldMatrix out(embedding.to(), rows_, cols_);
  for (std::size_t i = 0; i < data_.size(); ++i) out.data_[i] = embedding(data_[i]);
  return out;
}

FieldVector FieldMatrix::apply(std::span<const Element> x) const {
  if (x.size() != cols_) throw std::invalid_argument("vector length does not match column count");
  FieldVector y(rows_, 0);
  for (std::size_t r = 0; r < rows_; ++r) {
    Element acc = 0;
    for (std::size_t c = 0; c < cols_; ++c) acc = field_.add(acc, field_.mul(at(r, c), x[c]));
    y[r] = acc;
  }
  return y;
}

FieldMatrix operator*(const FieldMatrix& a, const FieldMatrix& b) {
  if (a.cols_ != b.rows_ || !(a.field_ == b.field_)) {
    throw std::invalid_argument("matrix product shape or field mismatch");
  }
  const Field& f = a.field_;
  FieldMatrix out(f, a.rows_, b.cols_);
  for (std::size_t i = 0; i < a.rows_; ++i) {
    for (std::size_t k = 0; k < a.cols_; ++k) {
      const auto aik = a.at(i, k);
      if (aik == 0) continue;
      for (std::size_t j = 0; j < b.cols_; ++j) {
        auto& dst = out.data_[i * out.cols_ + j];
        dst = f.add(dst, f.mul(aik, b.at(k, j)));
      }
    }
  }
  return out;
}

bool operator==(const FieldMatrix& a, const FieldMatrix& b) {
  return a.rows_ == b.rows_ && a.cols_ == b.cols_ && a.field_ == b.field_ && a.data_ == b.data_;
}

EchelonForm reduced_row_echelon(FieldMatrix m) {
  const Field f = m.field();
  std::vector<std::size_t> pivots;
  std::size_t lead = 0;
  for (std::size_t c = 0; c < m.cols() && lead < m.rows(); ++c) {
    std::size_t pivot = lead;
    while (pivot < m.rows() && m.at(pivot, c) == 0) ++pivot;
    if (pivot == m.rows()) continue;
    if (pivot != lead) {
      auto a = m.row(pivot);
      auto b = m.row(lead);
      std::swap_ranges(a.begin(), a.end(), b.begin());
    }
    const auto scale = f.inv(m.at(lead, c));
    for (auto& x : m.row(lead)) x = f.mul(x, scale);
    for (std::size_t r = 0; r < m.rows(); ++r) {
      if (r == lead) continue;
      const auto factor = m.at(r, c);
      if (factor == 0) continue;
      auto dst = m.row(r);
      auto src = m.row(lead);
      for (std::size_t j = c; j < m.cols(); ++j) dst[j] = f.sub(dst[j], f.mul(factor, src[j]));
    }
    pivots.push_back(c);
    ++lead;
  }
  return {std::move(m), std::move(pivots)};
}

std::size_t rank(const FieldMatrix& m) {
  if (m.empty()) return 0;
  return reduced_row_echelon(m).pivot_columns.size();
}

std::optional<FieldVector> solve_linear(const FieldMatrix& m, std::span<const Field::Element> b) {
  if (b.size() != m.rows()) {
    throw std::invalid_argument("right-hand side has " + std::to_string(b.size()) + " entries, matrix has " +
                                std::to_string(m.rows()) + " rows");
  }
  FieldMatrix augmented(m.field(), m.rows(), m.cols() + 1);
  for (std::size_t r = 0; r < m.rows(); ++r) {
    for (std::size_t c = 0; c < m.cols(); ++c) augmented.set(r, c, m.at(r, c));
    augmented.set(r, m.cols(), b[r]);
  }
  const auto echelon = reduced_row_echelon(std::move(augmented));
  FieldVector x(m.cols(), 0);
  for (std::size_t i = 0; i < echelon.pivot_columns.size(); ++i) {
    const auto c = echelon.pivot_columns[i];
    if (c == m.cols()) return std::nullopt;
    x[c] = echelon.reduced.at(i, m.cols());
  }
  return x;
}

}  // namespace dex
