#pragma once

// Sparse multivariate polynomials over Q in the dual coordinates of gal(n)*.
//
// Variables are laid out once, in VarTable, and every other module indexes
// through that layout:
//
//   K_{1,2}, K_{1,3}, ..., K_{n-1,n}   rotation coordinates (lexicographic)
//   V_1, ..., V_n                      boost coordinates
//   X_1, ..., X_n                      translation coordinates
//   T                                  time-shift coordinate
//
// A MultiPoly keeps its terms sorted in graded-lex order (higher degree first,
// then larger exponent on the earlier variable first) with no zero
// coefficients, so two equal polynomials have identical term lists.

#include "galinv/rational.hpp"

#include "json.hpp"

#include <boost/container/small_vector.hpp>

#include <algorithm>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace galinv {

using json = nlohmann::ordered_json;

class VarTable {
 public:
  enum class Kind { Rotation, Boost, Translation, Time };

  // (i, j) are 1-based; j is only meaningful for rotations.
  struct Symbol {
    Kind kind;
    int i = 0;
    int j = 0;
    friend bool operator==(const Symbol&, const Symbol&) = default;
  };

  explicit VarTable(int n) : n_(n) {
    if (n < 1) throw std::invalid_argument("VarTable: n must be >= 1");
  }

  int n() const { return n_; }
  std::size_t size() const { return rotation_count() + 2 * static_cast<std::size_t>(n_) + 1; }
  std::size_t rotation_count() const { return static_cast<std::size_t>(n_) * (n_ - 1) / 2; }

  std::size_t k_index(int i, int j) const {
    if (i > j) std::swap(i, j);
    if (i < 1 || j > n_ || i == j) throw std::out_of_range("K index out of range");
    // Rows 1..i-1 of the strict upper triangle hold (n-1) + ... + (n-i+1) entries.
    return static_cast<std::size_t>((i - 1) * (2 * n_ - i) / 2 + (j - i - 1));
  }
  std::size_t v_index(int i) const { return rotation_count() + checked(i) - 1; }
  std::size_t x_index(int i) const { return rotation_count() + n_ + checked(i) - 1; }
  std::size_t t_index() const { return size() - 1; }

  Symbol symbol(std::size_t idx) const {
    if (idx >= size()) throw std::out_of_range("variable index out of range");
    if (idx < rotation_count()) {
      int i = 1;
      std::size_t off = idx;
      while (off >= static_cast<std::size_t>(n_ - i)) {
        off -= static_cast<std::size_t>(n_ - i);
        ++i;
      }
      return {Kind::Rotation, i, i + 1 + static_cast<int>(off)};
    }
    idx -= rotation_count();
    if (idx < static_cast<std::size_t>(n_)) return {Kind::Boost, static_cast<int>(idx) + 1, 0};
    idx -= n_;
    if (idx < static_cast<std::size_t>(n_)) return {Kind::Translation, static_cast<int>(idx) + 1, 0};
    return {Kind::Time, 0, 0};
  }

  std::size_t index(const Symbol& s) const {
    switch (s.kind) {
      case Kind::Rotation: return k_index(s.i, s.j);
      case Kind::Boost: return v_index(s.i);
      case Kind::Translation: return x_index(s.i);
      case Kind::Time: return t_index();
    }
    throw std::logic_error("unreachable");
  }

  std::string name(std::size_t idx) const {
    const Symbol s = symbol(idx);
    switch (s.kind) {
      case Kind::Rotation: return "K_" + std::to_string(s.i) + "_" + std::to_string(s.j);
      case Kind::Boost: return "V_" + std::to_string(s.i);
      case Kind::Translation: return "X_" + std::to_string(s.i);
      case Kind::Time: return "T";
    }
    return {};
  }

  std::string latex(std::size_t idx) const {
    const Symbol s = symbol(idx);
    switch (s.kind) {
      case Kind::Rotation: return "K_{" + std::to_string(s.i) + "," + std::to_string(s.j) + "}";
      case Kind::Boost: return "V_{" + std::to_string(s.i) + "}";
      case Kind::Translation: return "X_{" + std::to_string(s.i) + "}";
      case Kind::Time: return "T";
    }
    return {};
  }

  std::optional<std::size_t> find(std::string_view name) const {
    auto parse_int = [](std::string_view s) -> std::optional<int> {
      if (s.empty() || s.size() > 4) return std::nullopt;
      int v = 0;
      for (char c : s) {
        if (c < '0' || c > '9') return std::nullopt;
        v = v * 10 + (c - '0');
      }
      return v;
    };
    if (name == "T") return t_index();
    if (name.size() < 3 || name[1] != '_') return std::nullopt;
    const std::string_view rest = name.substr(2);
    if (name[0] == 'V' || name[0] == 'X') {
      auto i = parse_int(rest);
      if (!i || *i < 1 || *i > n_) return std::nullopt;
      return name[0] == 'V' ? v_index(*i) : x_index(*i);
    }
    if (name[0] == 'K') {
      const auto us = rest.find('_');
      if (us == std::string_view::npos) return std::nullopt;
      auto i = parse_int(rest.substr(0, us));
      auto j = parse_int(rest.substr(us + 1));
      if (!i || !j || *i < 1 || *j > n_ || *i >= *j) return std::nullopt;
      return k_index(*i, *j);
    }
    return std::nullopt;
  }

 private:
  std::size_t checked(int i) const {
    if (i < 1 || i > n_) throw std::out_of_range("coordinate index out of range");
    return static_cast<std::size_t>(i);
  }

  int n_;
};

struct VarPower {
  std::uint16_t var;
  std::uint16_t exp;
  friend bool operator==(const VarPower&, const VarPower&) = default;
};

// Product of variable powers, stored sparsely and sorted by variable index.
// Storage is inline for up to ten distinct variables.
class Monomial {
 public:
  using Storage = boost::container::small_vector<VarPower, 10>;

  Monomial() = default;

  explicit Monomial(const std::vector<VarPower>& powers) {
    std::vector<VarPower> sorted = powers;
    std::sort(sorted.begin(), sorted.end(), [](auto& a, auto& b) { return a.var < b.var; });
    for (const auto& p : sorted) {
      if (!powers_.empty() && powers_.back().var == p.var)
        powers_.back().exp = checked_exp(std::uint32_t{powers_.back().exp} + p.exp);
      else
        powers_.push_back(p);
    }
    powers_.erase(std::remove_if(powers_.begin(), powers_.end(), [](const VarPower& p) { return p.exp == 0; }),
                  powers_.end());
  }

  static Monomial variable(std::size_t var, std::uint32_t exp = 1) {
    Monomial m;
    if (var > 0xffff) throw std::out_of_range("Monomial: variable index too large");
    if (exp) m.powers_.push_back({static_cast<std::uint16_t>(var), checked_exp(exp)});
    return m;
  }

  const Storage& powers() const { return powers_; }
  bool is_one() const { return powers_.empty(); }

  std::uint32_t degree() const {
    std::uint32_t d = 0;
    for (const auto& p : powers_) d += p.exp;
    return d;
  }

  std::uint32_t exponent(std::size_t var) const {
    for (const auto& p : powers_)
      if (p.var == var) return p.exp;
    return 0;
  }

  // The monomial with the exponent of `var` lowered by one (caller ensures > 0).
  Monomial lowered(std::size_t var) const {
    Monomial m = *this;
    for (auto it = m.powers_.begin(); it != m.powers_.end(); ++it)
      if (it->var == var) {
        if (--it->exp == 0) m.powers_.erase(it);
        return m;
      }
    throw std::logic_error("Monomial::lowered: variable absent");
  }

  friend Monomial operator*(const Monomial& a, const Monomial& b) {
    Monomial r;
    r.powers_.reserve(a.powers_.size() + b.powers_.size());
    auto i = a.powers_.begin(), j = b.powers_.begin();
    while (i != a.powers_.end() && j != b.powers_.end()) {
      if (i->var < j->var)
        r.powers_.push_back(*i++);
      else if (j->var < i->var)
        r.powers_.push_back(*j++);
      else {
        r.powers_.push_back({i->var, checked_exp(std::uint32_t{i->exp} + j->exp)});
        ++i;
        ++j;
      }
    }
    r.powers_.insert(r.powers_.end(), i, a.powers_.end());
    r.powers_.insert(r.powers_.end(), j, b.powers_.end());
    return r;
  }

  friend bool operator==(const Monomial&, const Monomial&) = default;

  // Graded-lex "comes first" relation used for the canonical term order.
  friend bool precedes(const Monomial& a, const Monomial& b) {
    const auto da = a.degree(), db = b.degree();
    if (da != db) return da > db;
    const auto& pa = a.powers_;
    const auto& pb = b.powers_;
    const std::size_t len = std::min(pa.size(), pb.size());
    for (std::size_t k = 0; k < len; ++k) {
      if (pa[k].var != pb[k].var) return pa[k].var < pb[k].var;
      if (pa[k].exp != pb[k].exp) return pa[k].exp > pb[k].exp;
    }
    return pa.size() < pb.size();
  }

  // The monomial with one factor of `from` replaced by `to`.
  Monomial substituted(std::size_t from, std::size_t to) const {
    Monomial m;
    const auto t = static_cast<std::uint16_t>(to);
    bool placed = false;
    for (const auto& p : powers_) {
      std::uint16_t e = p.exp;
      if (p.var == from) --e;
      if (!placed && t <= p.var) {
        if (t == p.var) {
          ++e;
        } else {
          m.powers_.push_back({t, 1});
        }
        placed = true;
      }
      if (e) m.powers_.push_back({p.var, e});
    }
    if (!placed) m.powers_.push_back({t, 1});
    return m;
  }

  std::size_t hash() const {
    std::size_t h = 1469598103934665603ull;
    for (const auto& p : powers_) {
      h ^= (static_cast<std::size_t>(p.var) << 16) ^ p.exp;
      h *= 1099511628211ull;
    }
    return h;
  }

 private:
  static std::uint16_t checked_exp(std::uint32_t e) {
    if (e > 0xffff) throw std::overflow_error("Monomial: exponent overflow");
    return static_cast<std::uint16_t>(e);
  }

  Storage powers_;
};

struct MonomialHash {
  std::size_t operator()(const Monomial& m) const { return m.hash(); }
};

// A monomial of degree <= 10 in fewer than 64 variables fits in one word as a
// sorted list of 6-bit digits (variable index + 1), lowest digit first. The
// hot bracket loops key their hash tables on this instead of Monomial.
namespace packed {

inline constexpr std::size_t kMaxVars = 63;
inline constexpr std::uint32_t kMaxDegree = 10;

inline std::optional<std::uint64_t> pack(const Monomial& m) {
  std::uint64_t key = 0;
  unsigned shift = 0;
  for (const auto& p : m.powers()) {
    if (p.var >= kMaxVars) return std::nullopt;
    for (unsigned e = 0; e < p.exp; ++e) {
      if (shift >= 6 * kMaxDegree) return std::nullopt;
      key |= std::uint64_t{p.var + 1u} << shift;
      shift += 6;
    }
  }
  return key;
}

inline Monomial unpack(std::uint64_t key) {
  std::vector<VarPower> powers;
  for (; key; key >>= 6) {
    const auto v = static_cast<std::uint16_t>((key & 63) - 1);
    if (!powers.empty() && powers.back().var == v)
      ++powers.back().exp;
    else
      powers.push_back({v, 1});
  }
  return Monomial(powers);
}

// Replaces one digit `from` by `to` and restores the sorted order.
inline std::uint64_t substituted(std::uint64_t key, unsigned from, unsigned to) {
  unsigned digits[kMaxDegree];
  unsigned len = 0;
  bool done = false;
  for (; key; key >>= 6) {
    unsigned v = static_cast<unsigned>(key & 63) - 1;
    if (!done && v == from) {
      v = to;
      done = true;
    }
    digits[len++] = v;
  }
  std::sort(digits, digits + len);
  std::uint64_t out = 0;
  for (unsigned i = 0; i < len; ++i) out |= std::uint64_t{digits[i] + 1} << (6 * i);
  return out;
}

}  // namespace packed

class VartableMismatch : public std::invalid_argument {
 public:
  VartableMismatch() : std::invalid_argument("polynomials live over different variable tables") {}
};

class MultiPoly {
 public:
  using Term = std::pair<Monomial, Rational>;
  using Accumulator = std::unordered_map<Monomial, Rational, MonomialHash>;

  explicit MultiPoly(int n) : n_(n) { VarTable check(n); }

  static MultiPoly constant(int n, const Rational& c) {
    MultiPoly p(n);
    if (c != 0) p.terms_.emplace_back(Monomial{}, c);
    return p;
  }
  static MultiPoly variable(int n, std::size_t var, const Rational& c = 1) {
    MultiPoly p(n);
    if (var >= p.vartable().size()) throw std::out_of_range("variable index out of range");
    if (c != 0) p.terms_.emplace_back(Monomial::variable(var), c);
    return p;
  }
  static MultiPoly monomial(int n, Monomial m, const Rational& c = 1) {
    MultiPoly p(n);
    if (c != 0) p.terms_.emplace_back(std::move(m), c);
    return p;
  }

  // Builds the canonical form from an unordered accumulation.
  static MultiPoly from_accumulator(int n, Accumulator&& acc) {
    MultiPoly p(n);
    p.terms_.reserve(acc.size());
    for (auto& [m, c] : acc)
      if (c != 0) p.terms_.emplace_back(m, std::move(c));
    p.sort_terms();
    return p;
  }

  using IntegerAccumulator = std::unordered_map<Monomial, Integer, MonomialHash>;

  static MultiPoly from_accumulator(int n, IntegerAccumulator&& acc) {
    MultiPoly p(n);
    p.terms_.reserve(acc.size());
    for (auto& [m, c] : acc)
      if (c != 0) p.terms_.emplace_back(m, Rational(c));
    p.sort_terms();
    return p;
  }

  bool has_integer_coefficients() const {
    return std::all_of(terms_.begin(), terms_.end(), [](const Term& t) { return is_integer(t.second); });
  }

  static MultiPoly from_terms(int n, std::vector<Term> terms) {
    Accumulator acc;
    for (auto& [m, c] : terms) acc[m] += c;
    return from_accumulator(n, std::move(acc));
  }

  int n() const { return n_; }
  VarTable vartable() const { return VarTable(n_); }
  std::size_t var_count() const { return VarTable(n_).size(); }
  const std::vector<Term>& terms() const { return terms_; }
  std::size_t size() const { return terms_.size(); }
  bool is_zero() const { return terms_.empty(); }

  // Total degree; -1 for the zero polynomial.
  int degree() const {
    int d = -1;
    for (const auto& t : terms_) d = std::max<int>(d, static_cast<int>(t.first.degree()));
    return d;
  }

  bool is_homogeneous() const {
    if (terms_.empty()) return true;
    const auto d = terms_.front().first.degree();
    return std::all_of(terms_.begin(), terms_.end(), [d](const Term& t) { return t.first.degree() == d; });
  }

  Rational constant_term() const {
    if (!terms_.empty() && terms_.back().first.is_one()) return terms_.back().second;
    return 0;
  }

  Rational coefficient(const Monomial& m) const {
    for (const auto& [mono, c] : terms_)
      if (mono == m) return c;
    return 0;
  }

  MultiPoly& operator+=(const MultiPoly& o) { return *this = merge(*this, o, 1); }
  MultiPoly& operator-=(const MultiPoly& o) { return *this = merge(*this, o, -1); }
  MultiPoly& operator*=(const MultiPoly& o) { return *this = *this * o; }
  MultiPoly& operator*=(const Rational& s) {
    if (s == 0)
      terms_.clear();
    else
      for (auto& t : terms_) t.second *= s;
    return *this;
  }

  friend MultiPoly operator+(const MultiPoly& a, const MultiPoly& b) { return merge(a, b, 1); }
  friend MultiPoly operator-(const MultiPoly& a, const MultiPoly& b) { return merge(a, b, -1); }
  friend MultiPoly operator-(MultiPoly a) {
    for (auto& t : a.terms_) t.second = -t.second;
    return a;
  }
  friend MultiPoly operator*(MultiPoly a, const Rational& s) { return a *= s; }
  friend MultiPoly operator*(const Rational& s, MultiPoly a) { return a *= s; }

  friend MultiPoly operator*(const MultiPoly& a, const MultiPoly& b) {
    if (a.n_ != b.n_) throw VartableMismatch();
    if (a.is_zero() || b.is_zero()) return MultiPoly(a.n_);
    Accumulator acc;
    acc.reserve(a.size() * b.size());
    Rational prod;
    for (const auto& [ma, ca] : a.terms_)
      for (const auto& [mb, cb] : b.terms_) {
        mpq_mul(prod.get_mpq_t(), ca.get_mpq_t(), cb.get_mpq_t());
        auto [it, fresh] = acc.try_emplace(ma * mb, prod);
        if (!fresh) it->second += prod;
      }
    return from_accumulator(a.n_, std::move(acc));
  }

  MultiPoly pow(unsigned e) const {
    MultiPoly r = constant(n_, 1), base = *this;
    while (e) {
      if (e & 1u) r *= base;
      e >>= 1;
      if (e) base *= base;
    }
    return r;
  }

  friend bool operator==(const MultiPoly& a, const MultiPoly& b) {
    return a.n_ == b.n_ && a.terms_ == b.terms_;
  }

  MultiPoly partial(std::size_t var) const {
    if (var >= var_count()) throw std::out_of_range("variable index out of range");
    std::vector<Term> out;
    for (const auto& [m, c] : terms_) {
      const auto e = m.exponent(var);
      if (e == 0) continue;
      out.emplace_back(m.lowered(var), c * e);
    }
    // Differentiating one variable keeps distinct monomials distinct, and
    // the induced order can change, so a re-sort is enough.
    MultiPoly p(n_);
    p.terms_ = std::move(out);
    p.sort_terms();
    return p;
  }

  // Exact value. The point is brought to a common denominator L and each
  // term is accumulated as an integer scaled by L^(degree - term degree), so
  // there is a single rational division at the end.
  Rational evaluate(std::span<const Rational> point) const {
    check_point(point.size());
    if (terms_.empty()) return 0;
    Integer point_den = 1, coeff_den = 1;
    for (const auto& v : point) point_den = lcm(point_den, Integer(v.get_den()));
    for (const auto& [m, c] : terms_) coeff_den = lcm(coeff_den, Integer(c.get_den()));
    std::vector<Integer> scaled(point.size());
    for (std::size_t i = 0; i < point.size(); ++i)
      scaled[i] = point[i].get_num() * (point_den / point[i].get_den());
    const auto top = static_cast<std::uint32_t>(degree());
    PowerCache<Integer> powers(scaled);
    std::vector<Integer> den_powers(top + 1);
    den_powers[0] = 1;
    for (std::uint32_t k = 1; k <= top; ++k) den_powers[k] = den_powers[k - 1] * point_den;
    Integer sum = 0, term;
    for (const auto& [m, c] : terms_) {
      term = c.get_num() * (coeff_den / c.get_den());
      for (const auto& p : m.powers()) term *= powers.get(p.var, p.exp);
      term *= den_powers[top - m.degree()];
      sum += term;
    }
    Rational out(sum, coeff_den * den_powers[top]);
    out.canonicalize();
    return out;
  }

  // Direct term summation in IEEE double.
  double evaluate_float(std::span<const double> point) const {
    check_point(point.size());
    double sum = 0.0;
    for (const auto& [m, c] : terms_) {
      double term = c.get_d();
      for (const auto& p : m.powers()) {
        double v = 1.0;
        for (std::uint32_t k = 0; k < p.exp; ++k) v *= point[p.var];
        term *= v;
      }
      sum += term;
    }
    return sum;
  }

  // Exact gradient at a point in one pass over the terms, with the same
  // common-denominator scaling as evaluate().
  std::vector<Rational> gradient(std::span<const Rational> point) const {
    check_point(point.size());
    std::vector<Rational> g(point.size(), Rational(0));
    if (terms_.empty() || degree() == 0) return g;
    Integer point_den = 1, coeff_den = 1;
    for (const auto& v : point) point_den = lcm(point_den, Integer(v.get_den()));
    for (const auto& [m, c] : terms_) coeff_den = lcm(coeff_den, Integer(c.get_den()));
    std::vector<Integer> scaled(point.size());
    for (std::size_t i = 0; i < point.size(); ++i)
      scaled[i] = point[i].get_num() * (point_den / point[i].get_den());
    const auto top = static_cast<std::uint32_t>(degree());
    PowerCache<Integer> powers(scaled);
    std::vector<Integer> den_powers(top + 1);
    den_powers[0] = 1;
    for (std::uint32_t k = 1; k <= top; ++k) den_powers[k] = den_powers[k - 1] * point_den;
    std::vector<Integer> sums(point.size(), Integer(0));
    Integer base, term;
    for (const auto& [m, c] : terms_) {
      if (m.is_one()) continue;
      base = c.get_num() * (coeff_den / c.get_den());
      base *= den_powers[top - m.degree()];
      const auto& ps = m.powers();
      for (std::size_t k = 0; k < ps.size(); ++k) {
        term = base * ps[k].exp;
        for (std::size_t l = 0; l < ps.size(); ++l)
          term *= powers.get(ps[l].var, l == k ? ps[l].exp - 1 : ps[l].exp);
        sums[ps[k].var] += term;
      }
    }
    const Integer den = coeff_den * den_powers[top - 1];
    for (std::size_t i = 0; i < g.size(); ++i) {
      g[i] = Rational(sums[i], den);
      g[i].canonicalize();
    }
    return g;
  }

  // Replaces every variable by a polynomial (typically a linear form).
  MultiPoly substitute(const std::vector<MultiPoly>& images) const {
    if (images.size() != var_count()) throw std::invalid_argument("substitute: wrong image count");
    for (const auto& im : images)
      if (im.n_ != n_) throw VartableMismatch();
    std::vector<std::vector<MultiPoly>> cache(images.size());
    auto power_of = [&](std::size_t var, std::uint32_t e) -> const MultiPoly& {
      auto& row = cache[var];
      if (row.empty()) row.push_back(constant(n_, 1));
      while (row.size() <= e) row.push_back(row.back() * images[var]);
      return row[e];
    };
    Accumulator acc;
    for (const auto& [m, c] : terms_) {
      MultiPoly t = constant(n_, c);
      for (const auto& p : m.powers()) t *= power_of(p.var, p.exp);
      for (auto& [mt, ct] : t.terms_) acc[mt] += ct;
    }
    return from_accumulator(n_, std::move(acc));
  }

  std::string to_text() const {
    const VarTable vt(n_);
    return render(
        [&](std::size_t var, std::uint32_t e) {
          return e == 1 ? vt.name(var) : vt.name(var) + "^" + std::to_string(e);
        },
        "*", [](const Rational& c) { return to_string(c); });
  }

  std::string to_latex() const {
    const VarTable vt(n_);
    return render(
        [&](std::size_t var, std::uint32_t e) {
          return e == 1 ? vt.latex(var) : vt.latex(var) + "^{" + std::to_string(e) + "}";
        },
        " ",
        [](const Rational& c) {
          if (is_integer(c)) return to_string(c);
          return "\\frac{" + c.get_num().get_str() + "}{" + c.get_den().get_str() + "}";
        });
  }

  json to_json() const {
    const VarTable vt(n_);
    json j;
    j["n"] = n_;
    json terms = json::array();
    for (const auto& [m, c] : terms_) {
      json exps = json::object();
      for (const auto& p : m.powers()) exps[vt.name(p.var)] = p.exp;
      terms.push_back(json{{"coeff", to_string(c)}, {"exps", std::move(exps)}});
    }
    j["terms"] = std::move(terms);
    return j;
  }

  static MultiPoly from_json(const json& j) {
    if (!j.is_object() || !j.contains("n") || !j.contains("terms"))
      throw ParseError("polynomial JSON needs 'n' and 'terms'");
    if (!j["n"].is_number_integer() || j["n"].get<int>() < 1)
      throw ParseError("polynomial JSON: 'n' must be a positive integer");
    const int n = j["n"].get<int>();
    const VarTable vt(n);
    if (!j["terms"].is_array()) throw ParseError("polynomial JSON: 'terms' must be an array");
    std::vector<Term> terms;
    for (const auto& t : j["terms"]) {
      if (!t.is_object() || !t.contains("coeff") || !t["coeff"].is_string())
        throw ParseError("polynomial JSON: each term needs a string 'coeff'");
      std::vector<VarPower> powers;
      if (t.contains("exps")) {
        if (!t["exps"].is_object()) throw ParseError("polynomial JSON: 'exps' must be an object");
        for (const auto& [name, e] : t["exps"].items()) {
          const auto idx = vt.find(name);
          if (!idx) throw ParseError("polynomial JSON: unknown variable '" + name + "'");
          if (!e.is_number_integer() || e.get<long long>() < 0)
            throw ParseError("polynomial JSON: exponent of '" + name + "' must be a nonnegative integer");
          if (e.get<long long>() > 0xffff) throw ParseError("polynomial JSON: exponent too large");
          powers.push_back({static_cast<std::uint16_t>(*idx), static_cast<std::uint16_t>(e.get<long long>())});
        }
      }
      terms.emplace_back(Monomial(std::move(powers)), parse_rational(t["coeff"].get<std::string>()));
    }
    return from_terms(n, std::move(terms));
  }

 private:
  template <typename S>
  class PowerCache {
   public:
    explicit PowerCache(std::span<const S> point) : point_(point), table_(point.size()) {}
    const S& get(std::size_t var, std::uint32_t e) {
      auto& row = table_[var];
      if (row.empty()) row.push_back(S(1));
      while (row.size() <= e) row.push_back(row.back() * point_[var]);
      return row[e];
    }

   private:
    std::span<const S> point_;
    std::vector<std::vector<S>> table_;
  };

  void check_point(std::size_t len) const {
    if (len != var_count()) throw std::invalid_argument("evaluation point has wrong length");
  }

  void sort_terms() {
    std::sort(terms_.begin(), terms_.end(),
              [](const Term& a, const Term& b) { return precedes(a.first, b.first); });
  }

  static MultiPoly merge(const MultiPoly& a, const MultiPoly& b, int sign) {
    if (a.n_ != b.n_) throw VartableMismatch();
    MultiPoly r(a.n_);
    r.terms_.reserve(a.size() + b.size());
    auto i = a.terms_.begin(), j = b.terms_.begin();
    while (i != a.terms_.end() || j != b.terms_.end()) {
      if (j == b.terms_.end() || (i != a.terms_.end() && precedes(i->first, j->first))) {
        r.terms_.push_back(*i++);
      } else if (i == a.terms_.end() || precedes(j->first, i->first)) {
        r.terms_.emplace_back(j->first, sign > 0 ? j->second : Rational(-j->second));
        ++j;
      } else {
        Rational c = i->second;
        if (sign > 0)
          c += j->second;
        else
          c -= j->second;
        if (c != 0) r.terms_.emplace_back(i->first, std::move(c));
        ++i;
        ++j;
      }
    }
    return r;
  }

  template <typename PowerFn, typename CoeffFn>
  std::string render(PowerFn power, const std::string& sep, CoeffFn coeff) const {
    if (terms_.empty()) return "0";
    std::ostringstream os;
    bool first = true;
    for (const auto& [m, c] : terms_) {
      Rational mag = abs(c);
      if (first)
        os << (c < 0 ? "-" : "");
      else
        os << (c < 0 ? " - " : " + ");
      first = false;
      std::string factors;
      for (const auto& p : m.powers()) {
        if (!factors.empty()) factors += sep;
        factors += power(p.var, p.exp);
      }
      if (factors.empty())
        os << coeff(mag);
      else if (mag == 1)
        os << factors;
      else
        os << coeff(mag) << sep << factors;
    }
    return os.str();
  }

  int n_;
  std::vector<Term> terms_;
};

// Scalar-free helpers matching the operation names used across the library.
inline MultiPoly add(const MultiPoly& a, const MultiPoly& b) { return a + b; }
inline MultiPoly mul(const MultiPoly& a, const MultiPoly& b) { return a * b; }
inline MultiPoly partial(const MultiPoly& p, std::size_t var) { return p.partial(var); }
inline Rational evaluate(const MultiPoly& p, std::span<const Rational> point) { return p.evaluate(point); }
inline double evaluate_float(const MultiPoly& p, std::span<const double> point) {
  return p.evaluate_float(point);
}

}  // namespace galinv
