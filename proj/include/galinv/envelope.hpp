#pragma once

// The universal enveloping algebra U(gal(n)) in a PBW basis.
//
// A PBW monomial Z_1^e_1 ... Z_d^e_d uses the VarTable order for the basis,
// so it is stored as a Monomial whose "variables" are basis indices. Every
// product is reduced to normal order with XY = YX + [X,Y].

#include "galinv/galilean.hpp"
#include "galinv/parallel.hpp"
#include "galinv/polyring.hpp"

#include <mutex>
#include <optional>
#include <shared_mutex>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

namespace galinv {

using PBWMonomial = Monomial;

// Finite linear combination of normal-ordered PBW monomials.
class UEAElement {
 public:
  explicit UEAElement(int n) : poly_(n) {}

  static UEAElement one(int n) { return UEAElement(MultiPoly::constant(n, 1)); }
  static UEAElement generator(int n, std::size_t index, const Rational& c = 1) {
    return UEAElement(MultiPoly::variable(n, index, c));
  }
  static UEAElement monomial(int n, PBWMonomial m, const Rational& c = 1) {
    return UEAElement(MultiPoly::monomial(n, std::move(m), c));
  }
  static UEAElement from_accumulator(int n, MultiPoly::Accumulator&& acc) {
    return UEAElement(MultiPoly::from_accumulator(n, std::move(acc)));
  }

  int n() const { return poly_.n(); }
  const std::vector<MultiPoly::Term>& terms() const { return poly_.terms(); }
  bool is_zero() const { return poly_.is_zero(); }
  int degree() const { return poly_.degree(); }
  Rational coefficient(const PBWMonomial& m) const { return poly_.coefficient(m); }

  UEAElement& operator+=(const UEAElement& o) {
    poly_ += o.poly_;
    return *this;
  }
  UEAElement& operator-=(const UEAElement& o) {
    poly_ -= o.poly_;
    return *this;
  }
  UEAElement& operator*=(const Rational& s) {
    poly_ *= s;
    return *this;
  }
  friend UEAElement operator+(UEAElement a, const UEAElement& b) { return a += b; }
  friend UEAElement operator-(UEAElement a, const UEAElement& b) { return a -= b; }
  friend UEAElement operator*(UEAElement a, const Rational& s) { return a *= s; }
  friend bool operator==(const UEAElement& a, const UEAElement& b) { return a.poly_ == b.poly_; }

  // "2 B_1 P_1 - 1/2 H", letters in PBW order.
  std::string to_text() const {
    if (is_zero()) return "0";
    std::string out;
    bool first = true;
    for (const auto& [m, c] : terms()) {
      Rational mag = abs(c);
      if (first) {
        if (c < 0) out += "-";
      } else {
        out += c < 0 ? " - " : " + ";
      }
      first = false;
      std::string word;
      for (const auto& p : m.powers()) {
        if (!word.empty()) word += ' ';
        word += label_at(n(), p.var).name();
        if (p.exp > 1) word += "^" + std::to_string(p.exp);
      }
      if (word.empty())
        out += to_string(mag);
      else if (mag == 1)
        out += word;
      else
        out += to_string(mag) + " " + word;
    }
    return out;
  }

  json to_json() const {
    const std::size_t d = VarTable(n()).size();
    json terms_json = json::array();
    for (const auto& [m, c] : terms()) {
      std::vector<unsigned> exps(d, 0);
      for (const auto& p : m.powers()) exps[p.var] = p.exp;
      terms_json.push_back(json{{"coeff", to_string(c)}, {"pbw", exps}});
    }
    return terms_json;
  }

 private:
  explicit UEAElement(MultiPoly p) : poly_(std::move(p)) {}
  MultiPoly poly_;
};

struct CentralityResult {
  bool central = true;
  std::optional<BasisLabel> witness;
  std::optional<UEAElement> residue;
};

// Owns the structure constants for gal(n) and the normal-ordering memo.
// Thread-safe: lookups take a shared lock, inserts an exclusive one, and a
// memo entry never changes once written, so results do not depend on timing.
class Envelope {
 public:
  explicit Envelope(int n) : n_(n), sc_(n) {}

  int n() const { return n_; }
  std::size_t dim() const { return sc_.dim(); }
  const StructureConstants& structure() const { return sc_; }

  UEAElement normal_order(std::span<const std::size_t> word) const {
    UEAElement cur = UEAElement::one(n_);
    for (auto it = word.rbegin(); it != word.rend(); ++it) {
      check_index(*it);
      cur = left_multiply(*it, cur);
    }
    return cur;
  }

  UEAElement normal_order(const std::vector<BasisLabel>& word) const {
    std::vector<std::size_t> idx;
    idx.reserve(word.size());
    for (const auto& l : word) idx.push_back(label_index(n_, l));
    return normal_order(idx);
  }

  UEAElement multiply(const UEAElement& a, const UEAElement& b) const {
    check_n(a);
    check_n(b);
    MultiPoly::Accumulator acc;
    for (const auto& [m, c] : a.terms()) {
      UEAElement cur = b;
      const auto letters = letters_of(m);
      for (auto it = letters.rbegin(); it != letters.rend(); ++it) cur = left_multiply(*it, cur);
      for (const auto& [mm, cc] : cur.terms()) acc[mm] += c * cc;
    }
    return UEAElement::from_accumulator(n_, std::move(acc));
  }

  UEAElement commutator(const UEAElement& a, const UEAElement& b) const {
    return multiply(a, b) - multiply(b, a);
  }

  // Full symmetrization: a degree-k monomial maps to the average of all
  // arrangements of its letters. Uses sym(S) = (1/k) sum_a mult(a) a sym(S-a).
  UEAElement symmetrize(const MultiPoly& p) const {
    if (p.n() != n_) throw VartableMismatch();
    MultiPoly::Accumulator acc;
    for (const auto& [m, c] : p.terms())
      for (const auto& [mm, cc] : symmetrized_monomial(m).terms()) acc[mm] += c * cc;
    return UEAElement::from_accumulator(n_, std::move(acc));
  }

  CentralityResult is_central(const UEAElement& u, unsigned threads = 1) const {
    check_n(u);
    std::vector<UEAElement> residues(dim(), UEAElement(n_));
    parallel_for(dim(), threads, [&](std::size_t z) {
      residues[z] = commutator(u, UEAElement::generator(n_, z));
    });
    for (std::size_t z = 0; z < dim(); ++z)
      if (!residues[z].is_zero()) return {false, label_at(n_, z), residues[z]};
    return {};
  }

  // lambda(pq) - lambda(p) lambda(q).
  UEAElement symmetrization_defect(const MultiPoly& p, const MultiPoly& q) const {
    return symmetrize(p * q) - multiply(symmetrize(p), symmetrize(q));
  }

  // The defect vanishes or has degree below deg p + deg q.
  bool degree_drop_check(const MultiPoly& p, const MultiPoly& q) const {
    const UEAElement diff = symmetrization_defect(p, q);
    if (diff.is_zero()) return true;
    return diff.degree() < std::max(p.degree(), 0) + std::max(q.degree(), 0);
  }

  std::size_t memo_size() const {
    std::shared_lock lock(mutex_);
    return product_memo_.size();
  }

 private:
  struct Key {
    std::size_t letter;
    PBWMonomial mono;
    friend bool operator==(const Key&, const Key&) = default;
  };
  struct KeyHash {
    std::size_t operator()(const Key& k) const { return k.mono.hash() * 31 + k.letter; }
  };

  static std::vector<std::size_t> letters_of(const PBWMonomial& m) {
    std::vector<std::size_t> out;
    for (const auto& p : m.powers())
      for (unsigned e = 0; e < p.exp; ++e) out.push_back(p.var);
    return out;
  }

  void check_index(std::size_t idx) const {
    if (idx >= dim()) throw std::out_of_range("basis index out of range for gal(" + std::to_string(n_) + ")");
  }
  void check_n(const UEAElement& u) const {
    if (u.n() != n_) throw VartableMismatch();
  }

  UEAElement left_multiply(std::size_t letter, const UEAElement& u) const {
    MultiPoly::Accumulator acc;
    for (const auto& [m, c] : u.terms())
      for (const auto& [mm, cc] : left_multiply(letter, m).terms()) acc[mm] += c * cc;
    return UEAElement::from_accumulator(n_, std::move(acc));
  }

  // Z_letter * m, normal-ordered. With m = Z_j m' and j < letter:
  //   Z_letter Z_j m' = Z_j (Z_letter m') + [Z_letter, Z_j] m'.
  const UEAElement& left_multiply(std::size_t letter, const PBWMonomial& m) const {
    Key key{letter, m};
    {
      std::shared_lock lock(mutex_);
      if (auto it = product_memo_.find(key); it != product_memo_.end()) return it->second;
    }
    UEAElement result(n_);
    if (m.is_one() || letter <= m.powers().front().var) {
      result = UEAElement::monomial(n_, m * Monomial::variable(letter));
    } else {
      const std::size_t j = m.powers().front().var;
      const PBWMonomial rest = m.lowered(j);
      result = left_multiply(j, left_multiply(letter, rest));
      for (const auto& [c, v] : sc_.bracket(letter, j)) result += left_multiply(c, rest) * v;
    }
    std::unique_lock lock(mutex_);
    return product_memo_.try_emplace(std::move(key), std::move(result)).first->second;
  }

  const UEAElement& symmetrized_monomial(const PBWMonomial& m) const {
    {
      std::shared_lock lock(mutex_);
      if (auto it = sym_memo_.find(m); it != sym_memo_.end()) return it->second;
    }
    UEAElement result(n_);
    const std::uint32_t k = m.degree();
    if (k <= 1) {
      result = UEAElement::monomial(n_, m);
    } else {
      MultiPoly::Accumulator acc;
      for (const auto& p : m.powers()) {
        const UEAElement tail = left_multiply(p.var, symmetrized_monomial(m.lowered(p.var)));
        for (const auto& [mm, cc] : tail.terms()) acc[mm] += cc * p.exp;
      }
      result = UEAElement::from_accumulator(n_, std::move(acc)) * Rational(1, k);
    }
    std::unique_lock lock(mutex_);
    return sym_memo_.try_emplace(m, std::move(result)).first->second;
  }

  int n_;
  StructureConstants sc_;
  mutable std::shared_mutex mutex_;
  // Node-based maps: references to values stay valid across rehashing.
  mutable std::unordered_map<Key, UEAElement, KeyHash> product_memo_;
  mutable std::unordered_map<PBWMonomial, UEAElement, MonomialHash> sym_memo_;
};

inline UEAElement normal_order(const Envelope& env, const std::vector<BasisLabel>& word) {
  return env.normal_order(word);
}
inline UEAElement multiply(const Envelope& env, const UEAElement& a, const UEAElement& b) {
  return env.multiply(a, b);
}
inline UEAElement symmetrize(const Envelope& env, const MultiPoly& p) { return env.symmetrize(p); }
inline UEAElement commutator(const Envelope& env, const UEAElement& a, const UEAElement& b) {
  return env.commutator(a, b);
}
inline CentralityResult is_central(const Envelope& env, const UEAElement& u, unsigned threads = 1) {
  return env.is_central(u, threads);
}
inline bool degree_drop_check(const Envelope& env, const MultiPoly& p, const MultiPoly& q) {
  return env.degree_drop_check(p, q);
}

}  // namespace galinv
