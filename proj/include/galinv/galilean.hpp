#pragma once

// Matrix realizations of the Galilean group Gal(n) and its Lie algebra
// gal(n), structure constants, the dual space gal(n)* as matrices modulo
// gal(n)^perp, the coadjoint action, and the Lie-Poisson bracket.
//
// Matrices are (n+2)x(n+2). Block positions quoted in comments are 1-based
// to match the usual block notation; storage is 0-based.
//
//   group element          algebra element        dual representative
//   [ rho | v  x  ]        [ K | v  x  ]          [ K* | v*  x* ]
//   [  0  | 1  x0 ]        [ 0 | 0  x0 ]          [ 0  | 0   t* ]
//   [  0  | 0  1  ]        [ 0 | 0  0  ]          [ 0  | 0   0  ]

#include "galinv/matrix.hpp"
#include "galinv/polyring.hpp"

#include <absl/container/flat_hash_map.h>

#include <cstdint>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace galinv {

using Kind = VarTable::Kind;

// E(i,j) rotation, B(i) boost, P(i) space translation, H time translation.
// Labels are in bijection with VarTable variables:
// E(i,j) <-> K_{i,j}, B(i) <-> V_i, P(i) <-> X_i, H <-> T.
struct BasisLabel {
  Kind kind;
  int i = 0;
  int j = 0;

  static BasisLabel E(int i, int j) { return {Kind::Rotation, i, j}; }
  static BasisLabel B(int i) { return {Kind::Boost, i, 0}; }
  static BasisLabel P(int i) { return {Kind::Translation, i, 0}; }
  static BasisLabel H() { return {Kind::Time, 0, 0}; }

  friend bool operator==(const BasisLabel&, const BasisLabel&) = default;

  bool valid_for(int n) const {
    switch (kind) {
      case Kind::Rotation: return 1 <= i && i < j && j <= n;
      case Kind::Boost:
      case Kind::Translation: return 1 <= i && i <= n;
      case Kind::Time: return true;
    }
    return false;
  }

  std::string name() const {
    switch (kind) {
      case Kind::Rotation: return "E_" + std::to_string(i) + "_" + std::to_string(j);
      case Kind::Boost: return "B_" + std::to_string(i);
      case Kind::Translation: return "P_" + std::to_string(i);
      case Kind::Time: return "H";
    }
    return {};
  }
};

inline std::size_t label_index(int n, const BasisLabel& l) {
  if (!l.valid_for(n)) throw std::invalid_argument("basis label " + l.name() + " invalid for n=" + std::to_string(n));
  return VarTable(n).index({l.kind, l.i, l.j});
}

inline BasisLabel label_at(int n, std::size_t idx) {
  const auto s = VarTable(n).symbol(idx);
  return {s.kind, s.i, s.j};
}

inline std::vector<BasisLabel> basis_labels(int n) {
  std::vector<BasisLabel> out;
  const std::size_t d = VarTable(n).size();
  out.reserve(d);
  for (std::size_t k = 0; k < d; ++k) out.push_back(label_at(n, k));
  return out;
}

inline RationalMatrix basis_matrix(const BasisLabel& label, int n) {
  if (n < 1 || !label.valid_for(n))
    throw std::invalid_argument("basis label " + label.name() + " invalid for n=" + std::to_string(n));
  const std::size_t m = static_cast<std::size_t>(n) + 2;
  RationalMatrix z(m, m);
  const std::size_t boost_col = n, trans_col = n + 1;
  switch (label.kind) {
    case Kind::Rotation:
      z(label.i - 1, label.j - 1) = 1;
      z(label.j - 1, label.i - 1) = -1;
      break;
    case Kind::Boost: z(label.i - 1, boost_col) = 1; break;
    case Kind::Translation: z(label.i - 1, trans_col) = 1; break;
    case Kind::Time: z(boost_col, trans_col) = 1; break;
  }
  return z;
}

class SpanError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// Coordinates of a matrix of gal(n) in the basis; throws SpanError when the
// matrix is not of algebra shape.
inline std::vector<Rational> algebra_coordinates(const RationalMatrix& z, int n) {
  const VarTable vt(n);
  const std::size_t m = static_cast<std::size_t>(n) + 2;
  if (z.rows() != m || z.cols() != m) throw SpanError("matrix has wrong size for gal(n)");
  std::vector<Rational> c(vt.size());
  for (int i = 1; i <= n; ++i)
    for (int j = i + 1; j <= n; ++j) c[vt.k_index(i, j)] = z(i - 1, j - 1);
  for (int i = 1; i <= n; ++i) {
    c[vt.v_index(i)] = z(i - 1, n);
    c[vt.x_index(i)] = z(i - 1, n + 1);
  }
  c[vt.t_index()] = z(n, n + 1);
  RationalMatrix rebuilt(m, m);
  for (std::size_t k = 0; k < c.size(); ++k)
    if (c[k] != 0) rebuilt += basis_matrix(label_at(n, k), n) * c[k];
  if (!(rebuilt == z)) throw SpanError("matrix does not lie in gal(n)");
  return c;
}

// [Z_a, Z_b] = sum_c c_ab^c Z_c, derived from matrix commutators of the
// basis. Antisymmetry and the Jacobi identity are checked on construction.
class StructureConstants {
 public:
  using SparseVector = std::vector<std::pair<std::size_t, Rational>>;

  explicit StructureConstants(int n) : n_(n), dim_(VarTable(n).size()), table_(dim_ * dim_) {
    std::vector<RationalMatrix> basis;
    basis.reserve(dim_);
    for (std::size_t a = 0; a < dim_; ++a) basis.push_back(basis_matrix(label_at(n, a), n));
    for (std::size_t a = 0; a < dim_; ++a)
      for (std::size_t b = a + 1; b < dim_; ++b) {
        const RationalMatrix comm = basis[a] * basis[b] - basis[b] * basis[a];
        if (comm.is_zero()) continue;
        const auto coords = algebra_coordinates(comm, n);
        SparseVector v, neg;
        for (std::size_t c = 0; c < dim_; ++c)
          if (coords[c] != 0) {
            v.emplace_back(c, coords[c]);
            neg.emplace_back(c, -coords[c]);
          }
        table_[a * dim_ + b] = std::move(v);
        table_[b * dim_ + a] = std::move(neg);
      }
    check_jacobi();
  }

  int n() const { return n_; }
  std::size_t dim() const { return dim_; }

  const SparseVector& bracket(std::size_t a, std::size_t b) const { return table_[a * dim_ + b]; }

  // Bracket of two arbitrary algebra elements given in coordinates.
  std::vector<Rational> bracket(const std::vector<Rational>& x, const std::vector<Rational>& y) const {
    std::vector<Rational> out(dim_);
    for (std::size_t a = 0; a < dim_; ++a) {
      if (x[a] == 0) continue;
      for (std::size_t b = 0; b < dim_; ++b) {
        if (y[b] == 0) continue;
        for (const auto& [c, v] : bracket(a, b)) out[c] += x[a] * y[b] * v;
      }
    }
    return out;
  }

 private:
  void check_jacobi() const {
    std::vector<Rational> acc(dim_);
    auto add_nested = [&](std::size_t a, std::size_t b, std::size_t c) {
      // [[a,b],c]
      for (const auto& [e, v] : bracket(a, b))
        for (const auto& [f, w] : bracket(e, c)) acc[f] += v * w;
    };
    for (std::size_t a = 0; a < dim_; ++a)
      for (std::size_t b = a + 1; b < dim_; ++b)
        for (std::size_t c = b + 1; c < dim_; ++c) {
          add_nested(a, b, c);
          add_nested(b, c, a);
          add_nested(c, a, b);
          for (auto& v : acc)
            if (v != 0) throw SpanError("Jacobi identity violated");
        }
  }

  int n_;
  std::size_t dim_;
  std::vector<SparseVector> table_;
};

inline StructureConstants structure_constants(int n) { return StructureConstants(n); }

// Element of gal(n)* in dual-basis coordinates. K* is kept as a full
// skew-symmetric matrix; only its strict upper triangle is a coordinate.
struct DualVector {
  int n = 1;
  RationalMatrix kstar;
  std::vector<Rational> vstar;
  std::vector<Rational> xstar;
  Rational tstar;

  static DualVector zero(int n) {
    if (n < 1) throw std::invalid_argument("DualVector: n must be >= 1");
    return {n, RationalMatrix(n, n), std::vector<Rational>(n), std::vector<Rational>(n), Rational(0)};
  }

  static DualVector from_coordinates(int n, std::span<const Rational> c) {
    const VarTable vt(n);
    if (c.size() != vt.size()) throw std::invalid_argument("DualVector: wrong coordinate count");
    DualVector d = zero(n);
    for (int i = 1; i <= n; ++i)
      for (int j = i + 1; j <= n; ++j) {
        d.kstar(i - 1, j - 1) = c[vt.k_index(i, j)];
        d.kstar(j - 1, i - 1) = -c[vt.k_index(i, j)];
      }
    for (int i = 1; i <= n; ++i) {
      d.vstar[i - 1] = c[vt.v_index(i)];
      d.xstar[i - 1] = c[vt.x_index(i)];
    }
    d.tstar = c[vt.t_index()];
    return d;
  }

  // Coordinates in VarTable order, ready for polynomial evaluation.
  std::vector<Rational> coordinates() const {
    const VarTable vt(n);
    std::vector<Rational> c(vt.size());
    for (int i = 1; i <= n; ++i)
      for (int j = i + 1; j <= n; ++j) c[vt.k_index(i, j)] = kstar(i - 1, j - 1);
    for (int i = 1; i <= n; ++i) {
      c[vt.v_index(i)] = vstar[i - 1];
      c[vt.x_index(i)] = xstar[i - 1];
    }
    c[vt.t_index()] = tstar;
    return c;
  }

  void validate() const {
    const auto un = static_cast<std::size_t>(n);
    if (kstar.rows() != un || kstar.cols() != un || vstar.size() != un || xstar.size() != un)
      throw std::invalid_argument("DualVector: block sizes do not match n");
    for (std::size_t i = 0; i < un; ++i)
      for (std::size_t j = 0; j < un; ++j)
        if (kstar(i, j) != -kstar(j, i)) throw std::invalid_argument("DualVector: Kstar is not skew-symmetric");
  }

  friend bool operator==(const DualVector&, const DualVector&) = default;
};

inline RationalMatrix dual_to_matrix(const DualVector& xi) {
  const int n = xi.n;
  const std::size_t m = static_cast<std::size_t>(n) + 2;
  RationalMatrix a(m, m);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) a(i, j) = xi.kstar(i, j);
    a(i, n) = xi.vstar[i];
    a(i, n + 1) = xi.xstar[i];
  }
  a(n, n + 1) = xi.tstar;
  return a;
}

// Quotient by gal(n)^perp: symmetric parts of the upper-left block, the
// bottom two rows below the spatial block, and the (n+1,n+1), (n+2,n+1),
// (n+2,n+2) slots are all discarded.
inline DualVector project_dual(const RationalMatrix& a) {
  if (!a.square() || a.rows() < 3) throw std::invalid_argument("project_dual: matrix must be square of size n+2 >= 3");
  const int n = static_cast<int>(a.rows()) - 2;
  DualVector xi = DualVector::zero(n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) xi.kstar(i, j) = (a(i, j) - a(j, i)) / 2;
    xi.vstar[i] = a(i, n);
    xi.xstar[i] = a(i, n + 1);
  }
  xi.tstar = a(n, n + 1);
  return xi;
}

class GroupElement {
 public:
  // Identity of Gal(n).
  explicit GroupElement(int n) : n_(n), m_(RationalMatrix::identity(static_cast<std::size_t>(n) + 2)) {
    if (n < 1) throw std::invalid_argument("GroupElement: n must be >= 1");
  }

  // Validates the block shape; rho must be exactly orthogonal.
  static GroupElement from_matrix(RationalMatrix m) {
    if (!m.square() || m.rows() < 3) throw std::invalid_argument("GroupElement: matrix must be square of size n+2 >= 3");
    GroupElement g(static_cast<int>(m.rows()) - 2);
    g.m_ = std::move(m);
    g.validate();
    return g;
  }

  static GroupElement from_blocks(const RationalMatrix& rho, const std::vector<Rational>& boost,
                                  const std::vector<Rational>& translation, const Rational& time_shift) {
    const int n = static_cast<int>(rho.rows());
    if (!rho.square() || boost.size() != rho.rows() || translation.size() != rho.rows())
      throw std::invalid_argument("GroupElement: block sizes disagree");
    GroupElement g(n);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) g.m_(i, j) = rho(i, j);
      g.m_(i, n) = boost[i];
      g.m_(i, n + 1) = translation[i];
    }
    g.m_(n, n + 1) = time_shift;
    g.validate();
    return g;
  }

  int n() const { return n_; }
  const RationalMatrix& matrix() const { return m_; }

  RationalMatrix rho() const {
    RationalMatrix r(n_, n_);
    for (int i = 0; i < n_; ++i)
      for (int j = 0; j < n_; ++j) r(i, j) = m_(i, j);
    return r;
  }
  std::vector<Rational> boost() const { return column(n_); }
  std::vector<Rational> translation() const { return column(n_ + 1); }
  Rational time_shift() const { return m_(n_, n_ + 1); }

  // Block inverse: [[rho, U], [0, C]]^-1 = [[rho^T, -rho^T U C^-1], [0, C^-1]].
  GroupElement inverse() const {
    const RationalMatrix rt = rho().transpose();
    const Rational x0 = time_shift();
    std::vector<Rational> nb(n_), nt(n_);
    const auto b = boost(), t = translation();
    for (int i = 0; i < n_; ++i) {
      Rational sb = 0, st = 0;
      for (int k = 0; k < n_; ++k) {
        sb += rt(i, k) * b[k];
        st += rt(i, k) * t[k];
      }
      // U C^-1 = [b, t - x0 b]
      nb[i] = -sb;
      nt[i] = -(st - x0 * sb);
    }
    return from_blocks(rt, nb, nt, -x0);
  }

  friend GroupElement operator*(const GroupElement& a, const GroupElement& b) {
    if (a.n_ != b.n_) throw std::invalid_argument("GroupElement: dimension mismatch");
    GroupElement g(a.n_);
    g.m_ = a.m_ * b.m_;
    return g;
  }

  friend bool operator==(const GroupElement& a, const GroupElement& b) { return a.m_ == b.m_; }

  void validate() const {
    const int n = n_;
    const auto r = rho();
    if (!(r.transpose() * r == RationalMatrix::identity(n)))
      throw std::invalid_argument("GroupElement: rotation block is not orthogonal");
    for (int j = 0; j < n + 2; ++j) {
      const Rational row1 = j == n ? Rational(1) : (j == n + 1 ? m_(n, n + 1) : Rational(0));
      const Rational row2 = j == n + 1 ? Rational(1) : Rational(0);
      if (m_(n, j) != row1 || m_(n + 1, j) != row2)
        throw std::invalid_argument("GroupElement: bottom rows do not have Galilean shape");
    }
  }

 private:
  std::vector<Rational> column(int c) const {
    std::vector<Rational> v(n_);
    for (int i = 0; i < n_; ++i) v[i] = m_(i, c);
    return v;
  }

  int n_;
  RationalMatrix m_;
};

// Ad*(g) xi = [ (g A^T g^-1)^T ] modulo gal(n)^perp.
inline DualVector coadjoint(const GroupElement& g, const DualVector& xi) {
  if (g.n() != xi.n) throw std::invalid_argument("coadjoint: dimension mismatch");
  const RationalMatrix a = dual_to_matrix(xi);
  return project_dual((g.matrix() * a.transpose() * g.inverse().matrix()).transpose());
}

// Rotation by the Cayley transform (I - S)^-1 (I + S) of a skew matrix.
inline GroupElement cayley_rotation(const RationalMatrix& s) {
  const std::size_t n = s.rows();
  if (!s.square() || n < 1) throw std::invalid_argument("cayley_rotation: S must be square");
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (s(i, j) != -s(j, i)) throw std::invalid_argument("cayley_rotation: S must be skew-symmetric");
  const RationalMatrix id = RationalMatrix::identity(n);
  const RationalMatrix rho = inverse(id - s) * (id + s);  // SingularMatrixError is retryable
  return GroupElement::from_blocks(rho, std::vector<Rational>(n), std::vector<Rational>(n), 0);
}

// diag(-1, 1, ..., 1): the non-identity component of O(n).
inline GroupElement reflection(int n) {
  RationalMatrix rho = RationalMatrix::identity(n);
  rho(0, 0) = -1;
  return GroupElement::from_blocks(rho, std::vector<Rational>(n), std::vector<Rational>(n), 0);
}

// Matrix L with Ad*(g)xi = L xi in coordinates; column b is the image of the
// b-th unit dual vector.
inline RationalMatrix coadjoint_matrix(const GroupElement& g) {
  const int n = g.n();
  const std::size_t d = VarTable(n).size();
  RationalMatrix l(d, d);
  std::vector<Rational> unit(d);
  for (std::size_t b = 0; b < d; ++b) {
    unit[b] = 1;
    const auto image = coadjoint(g, DualVector::from_coordinates(n, unit)).coordinates();
    for (std::size_t a = 0; a < d; ++a) l(a, b) = image[a];
    unit[b] = 0;
  }
  return l;
}

// The polynomial xi -> Q(Ad*(g) xi).
inline MultiPoly pullback(const MultiPoly& q, const GroupElement& g) {
  if (q.n() != g.n()) throw VartableMismatch();
  const int n = g.n();
  const RationalMatrix l = coadjoint_matrix(g);
  std::vector<MultiPoly> images;
  images.reserve(l.rows());
  for (std::size_t a = 0; a < l.rows(); ++a) {
    std::vector<MultiPoly::Term> form;
    for (std::size_t b = 0; b < l.cols(); ++b)
      if (l(a, b) != 0) form.emplace_back(Monomial::variable(b), l(a, b));
    images.push_back(MultiPoly::from_terms(n, std::move(form)));
  }
  return q.substitute(images);
}

namespace detail {

// Word-sized keys and int64 coefficients. Returns nullopt when the input does
// not fit or an intermediate sum would overflow; callers then take the exact
// big-integer route.
inline std::optional<MultiPoly> bracket_packed(std::size_t z, const MultiPoly& q, const StructureConstants& sc) {
  if (sc.dim() > packed::kMaxVars) return std::nullopt;
  std::vector<std::pair<std::uint64_t, std::int64_t>> terms;
  terms.reserve(q.terms().size());
  for (const auto& [m, coeff] : q.terms()) {
    if (!is_integer(coeff) || !coeff.get_num().fits_slong_p()) return std::nullopt;
    const auto key = packed::pack(m);
    if (!key) return std::nullopt;
    terms.emplace_back(*key, coeff.get_num().get_si());
  }
  absl::flat_hash_map<std::uint64_t, std::int64_t> acc;
  acc.reserve(terms.size() * 2);
  for (const auto& [key, coeff] : terms) {
    std::uint64_t rest = key;
    while (rest) {
      const unsigned var = static_cast<unsigned>(rest & 63) - 1;
      std::int64_t exp = 0;
      while (rest && static_cast<unsigned>(rest & 63) - 1 == var) {
        ++exp;
        rest >>= 6;
      }
      for (const auto& [c, v] : sc.bracket(z, var)) {
        if (!is_integer(v) || !v.get_num().fits_slong_p()) return std::nullopt;
        std::int64_t term = 0;
        if (__builtin_mul_overflow(coeff, v.get_num().get_si(), &term) || __builtin_mul_overflow(term, exp, &term))
          return std::nullopt;
        auto& slot = acc[packed::substituted(key, var, static_cast<unsigned>(c))];
        if (__builtin_add_overflow(slot, term, &slot)) return std::nullopt;
      }
    }
  }
  std::vector<MultiPoly::Term> out;
  for (const auto& [key, c] : acc)
    if (c != 0) out.emplace_back(packed::unpack(key), Rational(static_cast<long>(c)));
  return MultiPoly::from_terms(q.n(), std::move(out));
}

}  // namespace detail

// {l_Z, Q} = sum_{b,c} c_{Zb}^c xi_c dQ/dxi_b, applied term by term.
inline MultiPoly bracket_with_coordinate(std::size_t z, const MultiPoly& q, const StructureConstants& sc) {
  if (q.n() != sc.n()) throw VartableMismatch();
  if (auto fast = detail::bracket_packed(z, q, sc)) return std::move(*fast);

  bool integral = q.has_integer_coefficients();
  for (std::size_t b = 0; integral && b < sc.dim(); ++b)
    for (const auto& [c, v] : sc.bracket(z, b))
      if (!is_integer(v) || !v.get_num().fits_slong_p()) integral = false;

  if (integral) {
    MultiPoly::IntegerAccumulator acc;
    for (const auto& [m, coeff] : q.terms()) {
      const Integer& num = coeff.get_num();
      for (const auto& p : m.powers()) {
        for (const auto& [c, v] : sc.bracket(z, p.var)) {
          const long factor = v.get_num().get_si() * static_cast<long>(p.exp);
          auto [it, fresh] = acc.try_emplace(m.substituted(p.var, c));
          if (factor >= 0)
            mpz_addmul_ui(it->second.get_mpz_t(), num.get_mpz_t(), static_cast<unsigned long>(factor));
          else
            mpz_submul_ui(it->second.get_mpz_t(), num.get_mpz_t(), static_cast<unsigned long>(-factor));
        }
      }
    }
    return MultiPoly::from_accumulator(q.n(), std::move(acc));
  }

  MultiPoly::Accumulator acc;
  Rational scaled;
  for (const auto& [m, coeff] : q.terms()) {
    for (const auto& p : m.powers()) {
      for (const auto& [c, v] : sc.bracket(z, p.var)) {
        scaled = coeff * v;
        scaled *= p.exp;
        auto [it, fresh] = acc.try_emplace(m.substituted(p.var, c), scaled);
        if (!fresh) it->second += scaled;
      }
    }
  }
  return MultiPoly::from_accumulator(q.n(), std::move(acc));
}

// {f,g}(xi) = sum_{a,b,c} c_ab^c xi_c df/dxi_a dg/dxi_b.
inline MultiPoly lie_poisson_bracket(const MultiPoly& f, const MultiPoly& g, const StructureConstants& sc) {
  if (f.n() != g.n() || f.n() != sc.n()) throw VartableMismatch();
  MultiPoly out(f.n());
  for (std::size_t a = 0; a < sc.dim(); ++a) {
    const MultiPoly df = f.partial(a);
    if (df.is_zero()) continue;
    out += df * bracket_with_coordinate(a, g, sc);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Exact random sampling. Rationals are p/q with |p| <= 20, 1 <= q <= 10.

using Rng = std::mt19937_64;

inline Rational random_rational(Rng& rng, int max_num = 20, int max_den = 10) {
  std::uniform_int_distribution<int> num(-max_num, max_num), den(1, max_den);
  const int p = num(rng);
  const int q = den(rng);
  Rational r(p, q);
  r.canonicalize();
  return r;
}

inline Rational random_nonzero_rational(Rng& rng, int max_num = 20, int max_den = 10) {
  for (;;) {
    Rational r = random_rational(rng, max_num, max_den);
    if (r != 0) return r;
  }
}

inline RationalMatrix random_skew(int n, Rng& rng) {
  RationalMatrix s(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      const Rational r = random_rational(rng);
      s(i, j) = r;
      s(j, i) = -r;
    }
  return s;
}

inline DualVector random_dual(int n, Rng& rng) {
  const std::size_t d = VarTable(n).size();
  std::vector<Rational> c(d);
  for (auto& v : c) v = random_rational(rng);
  return DualVector::from_coordinates(n, c);
}

// Cayley rotation x (boost, translation, time shift), optionally composed with
// the reflection.
inline GroupElement random_group_element(int n, Rng& rng, bool with_reflection) {
  GroupElement rot(n);
  for (;;) {
    try {
      rot = cayley_rotation(random_skew(n, rng));
      break;
    } catch (const SingularMatrixError&) {
      // resample
    }
  }
  std::vector<Rational> b(n), t(n);
  for (int i = 0; i < n; ++i) {
    b[i] = random_rational(rng);
    t[i] = random_rational(rng);
  }
  const Rational x0 = random_rational(rng);
  GroupElement g = GroupElement::from_blocks(RationalMatrix::identity(n), b, t, x0) * rot;
  if (with_reflection) g = g * reflection(n);
  return g;
}

// ---------------------------------------------------------------------------
// JSON

namespace detail {

inline Rational rational_from_json(const json& v) {
  if (v.is_string()) return parse_rational(v.get<std::string>());
  if (v.is_number_integer()) return Rational(Integer(std::to_string(v.get<long long>())));
  throw ParseError("expected a rational string \"p/q\" or an integer");
}

inline std::vector<Rational> rational_vector_from_json(const json& v, std::size_t len, const char* what) {
  if (!v.is_array() || v.size() != len)
    throw ParseError(std::string(what) + " must be an array of length " + std::to_string(len));
  std::vector<Rational> out;
  for (const auto& e : v) out.push_back(rational_from_json(e));
  return out;
}

inline RationalMatrix rational_matrix_from_json(const json& v, std::size_t rows, std::size_t cols, const char* what) {
  if (!v.is_array() || v.size() != rows)
    throw ParseError(std::string(what) + " must have " + std::to_string(rows) + " rows");
  RationalMatrix m(rows, cols);
  for (std::size_t i = 0; i < rows; ++i) {
    const auto row = rational_vector_from_json(v[i], cols, what);
    for (std::size_t j = 0; j < cols; ++j) m(i, j) = row[j];
  }
  return m;
}

inline json to_json(const std::vector<Rational>& v) {
  json a = json::array();
  for (const auto& r : v) a.push_back(to_string(r));
  return a;
}

inline json to_json(const RationalMatrix& m) {
  json a = json::array();
  for (std::size_t i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (std::size_t j = 0; j < m.cols(); ++j) row.push_back(to_string(m(i, j)));
    a.push_back(std::move(row));
  }
  return a;
}

inline int positive_n(const json& j) {
  if (!j.is_object() || !j.contains("n") || !j["n"].is_number_integer() || j["n"].get<int>() < 1)
    throw ParseError("'n' must be a positive integer");
  return j["n"].get<int>();
}

}  // namespace detail

inline json dual_to_json(const DualVector& xi) {
  return json{{"schema", "v1"},
              {"n", xi.n},
              {"Kstar", detail::to_json(xi.kstar)},
              {"vstar", detail::to_json(xi.vstar)},
              {"xstar", detail::to_json(xi.xstar)},
              {"tstar", to_string(xi.tstar)}};
}

inline DualVector dual_from_json(const json& j) {
  const int n = detail::positive_n(j);
  for (const char* key : {"Kstar", "vstar", "xstar", "tstar"})
    if (!j.contains(key)) throw ParseError(std::string("dual vector JSON is missing '") + key + "'");
  DualVector xi = DualVector::zero(n);
  xi.kstar = detail::rational_matrix_from_json(j["Kstar"], n, n, "Kstar");
  xi.vstar = detail::rational_vector_from_json(j["vstar"], n, "vstar");
  xi.xstar = detail::rational_vector_from_json(j["xstar"], n, "xstar");
  xi.tstar = detail::rational_from_json(j["tstar"]);
  try {
    xi.validate();
  } catch (const std::invalid_argument& e) {
    throw ParseError(e.what());
  }
  return xi;
}

inline json group_to_json(const GroupElement& g) {
  return json{{"schema", "v1"},
              {"n", g.n()},
              {"matrix", detail::to_json(g.matrix())},
              {"rho", detail::to_json(g.rho())},
              {"boost", detail::to_json(g.boost())},
              {"translation", detail::to_json(g.translation())},
              {"time_shift", to_string(g.time_shift())}};
}

// The full matrix is authoritative; declared blocks must agree with it.
inline GroupElement group_from_json(const json& j) {
  const int n = detail::positive_n(j);
  if (!j.contains("matrix")) throw ParseError("group element JSON is missing 'matrix'");
  const std::size_t m = static_cast<std::size_t>(n) + 2;
  GroupElement g(n);
  try {
    g = GroupElement::from_matrix(detail::rational_matrix_from_json(j["matrix"], m, m, "matrix"));
  } catch (const std::invalid_argument& e) {
    throw ParseError(e.what());
  }
  if (j.contains("rho") && !(detail::rational_matrix_from_json(j["rho"], n, n, "rho") == g.rho()))
    throw ParseError("declared 'rho' disagrees with 'matrix'");
  if (j.contains("boost") && detail::rational_vector_from_json(j["boost"], n, "boost") != g.boost())
    throw ParseError("declared 'boost' disagrees with 'matrix'");
  if (j.contains("translation") && detail::rational_vector_from_json(j["translation"], n, "translation") != g.translation())
    throw ParseError("declared 'translation' disagrees with 'matrix'");
  if (j.contains("time_shift") && detail::rational_from_json(j["time_shift"]) != g.time_shift())
    throw ParseError("declared 'time_shift' disagrees with 'matrix'");
  return g;
}

inline json structure_to_json(const StructureConstants& sc) {
  const int n = sc.n();
  json basis = json::array();
  for (const auto& l : basis_labels(n)) basis.push_back(l.name());
  json entries = json::array();
  for (std::size_t a = 0; a < sc.dim(); ++a)
    for (std::size_t b = 0; b < sc.dim(); ++b)
      for (const auto& [c, v] : sc.bracket(a, b))
        entries.push_back(json{{"a", label_at(n, a).name()},
                               {"b", label_at(n, b).name()},
                               {"c", label_at(n, c).name()},
                               {"coeff", to_string(v)}});
  return json{{"schema", "v1"}, {"n", n}, {"basis", std::move(basis)}, {"constants", std::move(entries)}};
}

}  // namespace galinv
