#pragma once

// Generators of the coadjoint-invariant polynomials on gal(n)*.
//
//   Q1 = sum X_i^2
//   Q2 = (sum X_i^2)(sum V_i^2) - (sum X_i V_i)^2
//   Q3, Q4, ... = sums of the 2k x 2k principal minors of the augmented
//                 skew matrix K' that contain its last two rows and columns,
//                 for 2k = 6, 8, ..., 2*floor((n-2)/2) + 4
//
// where
//
//   K' = [  K*     v*  x* ]
//        [ -v*^T   0   0  ]
//        [ -x*^T   0   0  ]
//
// Principal minors of a skew matrix are squares of Pfaffians, so every
// minor is computed as Pf^2 by expansion along the first row.

#include "galinv/matrix.hpp"
#include "galinv/parallel.hpp"
#include "galinv/polyring.hpp"

#include <bit>
#include <cstdint>
#include <functional>
#include <span>
#include <type_traits>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

namespace galinv {

inline MultiPoly q1(int n) {
  const VarTable vt(n);
  std::vector<MultiPoly::Term> terms;
  for (int i = 1; i <= n; ++i) terms.emplace_back(Monomial::variable(vt.x_index(i), 2), 1);
  return MultiPoly::from_terms(n, std::move(terms));
}

inline MultiPoly q2(int n) {
  if (n < 2) throw std::invalid_argument("q2 is identically zero for n = 1");
  const VarTable vt(n);
  MultiPoly xx(n), vv(n), xv(n);
  for (int i = 1; i <= n; ++i) {
    const auto x = MultiPoly::variable(n, vt.x_index(i));
    const auto v = MultiPoly::variable(n, vt.v_index(i));
    xx += x * x;
    vv += v * v;
    xv += x * v;
  }
  return xx * vv - xv * xv;
}

// Symbolic (n+2)x(n+2) matrix with single-variable entries.
class AugmentedMatrix {
 public:
  explicit AugmentedMatrix(int n) : n_(n), m_(static_cast<std::size_t>(n) + 2) {
    const VarTable vt(n);
    entries_.assign(m_ * m_, MultiPoly(n));
    for (int i = 1; i <= n; ++i) {
      for (int j = i + 1; j <= n; ++j) {
        set(i, j, MultiPoly::variable(n, vt.k_index(i, j)));
        set(j, i, MultiPoly::variable(n, vt.k_index(i, j), -1));
      }
      set(i, n + 1, MultiPoly::variable(n, vt.v_index(i)));
      set(i, n + 2, MultiPoly::variable(n, vt.x_index(i)));
      set(n + 1, i, MultiPoly::variable(n, vt.v_index(i), -1));
      set(n + 2, i, MultiPoly::variable(n, vt.x_index(i), -1));
    }
  }

  int n() const { return n_; }
  std::size_t size() const { return m_; }

  // 1-based access.
  const MultiPoly& operator()(int i, int j) const { return entries_[(i - 1) * m_ + (j - 1)]; }

  bool is_skew() const {
    for (std::size_t i = 1; i <= m_; ++i)
      for (std::size_t j = 1; j <= m_; ++j)
        if (!((*this)(i, j) == -(*this)(j, i))) return false;
    return true;
  }

  // Numeric instance at a coordinate point (used for determinant oracles).
  template <typename T>
  Matrix<T> at(std::span<const T> point) const {
    Matrix<T> out(m_, m_);
    for (std::size_t i = 0; i < m_; ++i)
      for (std::size_t j = 0; j < m_; ++j) {
        const auto& e = entries_[i * m_ + j];
        for (const auto& [mono, c] : e.terms()) {
          T v;
          if constexpr (std::is_same_v<T, Rational>)
            v = c;
          else
            v = static_cast<T>(c.get_d());
          for (const auto& p : mono.powers()) v *= point[p.var];
          out(i, j) += v;
        }
      }
    return out;
  }

 private:
  void set(int i, int j, MultiPoly p) { entries_[(i - 1) * m_ + (j - 1)] = std::move(p); }

  int n_;
  std::size_t m_;
  std::vector<MultiPoly> entries_;
};

inline AugmentedMatrix augmented(int n) { return AugmentedMatrix(n); }

// Pfaffians of principal submatrices of K', memoized by index bitmask
// (bit k-1 set <=> 1-based index k present).
class PfaffianTable {
 public:
  explicit PfaffianTable(const AugmentedMatrix& k) : k_(k) {
    if (k.size() > 30) throw std::invalid_argument("PfaffianTable: matrix too large");
  }

  const MultiPoly& get(std::uint32_t mask) {
    if (auto it = memo_.find(mask); it != memo_.end()) return it->second;
    MultiPoly result(k_.n());
    if (mask == 0) {
      result = MultiPoly::constant(k_.n(), 1);
    } else if (std::popcount(mask) % 2 == 0) {
      const int first = std::countr_zero(mask);
      const std::uint32_t rest = mask & ~(1u << first);
      int position = 1;  // 1-based position of `first` is 1; partners start at 2
      for (int j = first + 1; j < 32; ++j) {
        if (!(rest & (1u << j))) continue;
        ++position;
        const MultiPoly& entry = k_(first + 1, j + 1);
        if (entry.is_zero()) continue;
        const MultiPoly& minor = get(rest & ~(1u << j));
        if (minor.is_zero()) continue;
        MultiPoly t = entry * minor;
        if (position % 2 == 0)
          result += t;
        else
          result -= t;
      }
    }
    return memo_.emplace(mask, std::move(result)).first->second;
  }

 private:
  const AugmentedMatrix& k_;
  std::unordered_map<std::uint32_t, MultiPoly> memo_;
};

namespace detail {

inline void for_each_subset(int n, int k, const std::function<void(const std::vector<int>&)>& fn) {
  std::vector<int> idx(k);
  std::iota(idx.begin(), idx.end(), 0);
  if (k > n) return;
  for (;;) {
    fn(idx);
    int i = k - 1;
    while (i >= 0 && idx[i] == n - k + i) --i;
    if (i < 0) return;
    ++idx[i];
    for (int j = i + 1; j < k; ++j) idx[j] = idx[j - 1] + 1;
  }
}

}  // namespace detail

// Sum of det(K'_{I,I}) over index sets I of the given size with
// {n+1, n+2} contained in I. Homogeneous of degree `size`.
inline MultiPoly minor_sum(int n, int size, unsigned threads = worker_threads()) {
  if (size % 2 != 0 || size < 4 || size > n + 2)
    throw std::invalid_argument("minor_sum: size must be even with 4 <= size <= n+2 (got " + std::to_string(size) +
                                " for n=" + std::to_string(n) + ")");
  const AugmentedMatrix k(n);
  PfaffianTable pf(k);
  const std::uint32_t tail = (1u << n) | (1u << (n + 1));
  std::vector<std::uint32_t> masks;
  detail::for_each_subset(n, size - 2, [&](const std::vector<int>& s) {
    std::uint32_t m = tail;
    for (int i : s) m |= 1u << i;
    masks.push_back(m);
  });
  std::vector<const MultiPoly*> pfaffians;
  pfaffians.reserve(masks.size());
  for (auto m : masks) pfaffians.push_back(&pf.get(m));

  std::vector<MultiPoly> squares(masks.size(), MultiPoly(n));
  parallel_for(masks.size(), threads, [&](std::size_t i) { squares[i] = *pfaffians[i] * *pfaffians[i]; });
  // Pairwise reduction in index order.
  while (squares.size() > 1) {
    std::vector<MultiPoly> next;
    next.reserve((squares.size() + 1) / 2);
    for (std::size_t i = 0; i + 1 < squares.size(); i += 2) next.push_back(squares[i] + squares[i + 1]);
    if (squares.size() % 2) next.push_back(std::move(squares.back()));
    squares = std::move(next);
  }
  return squares.empty() ? MultiPoly(n) : std::move(squares.front());
}

struct NamedInvariant {
  std::string name;
  int degree;
  MultiPoly poly;
};

struct InvariantSet {
  int n;
  std::vector<NamedInvariant> polys;

  std::size_t size() const { return polys.size(); }
  std::vector<MultiPoly> polynomials() const {
    std::vector<MultiPoly> out;
    for (const auto& p : polys) out.push_back(p.poly);
    return out;
  }

  json to_json() const {
    json gens = json::array();
    for (const auto& p : polys) {
      json g = p.poly.to_json();
      json entry{{"name", p.name}, {"degree", p.degree}};
      entry["n"] = g["n"];
      entry["terms"] = std::move(g["terms"]);
      gens.push_back(std::move(entry));
    }
    return json{{"schema", "v1"}, {"n", n}, {"generators", std::move(gens)}};
  }

  static InvariantSet from_json(const json& j) {
    if (!j.is_object() || !j.contains("n") || !j.contains("generators") || !j["generators"].is_array())
      throw ParseError("invariant set JSON needs 'n' and 'generators'");
    InvariantSet s{j["n"].get<int>(), {}};
    for (const auto& g : j["generators"]) {
      if (!g.contains("name") || !g.contains("degree")) throw ParseError("generator needs 'name' and 'degree'");
      MultiPoly p = MultiPoly::from_json(g);
      if (p.n() != s.n) throw ParseError("generator has mismatched 'n'");
      s.polys.push_back({g["name"].get<std::string>(), g["degree"].get<int>(), std::move(p)});
    }
    return s;
  }

  std::string to_text() const {
    std::ostringstream os;
    for (const auto& p : polys) os << p.name << " = " << p.poly.to_text() << '\n';
    return os.str();
  }

  std::string to_latex() const {
    std::ostringstream os;
    for (const auto& p : polys) os << "Q_{" << p.name.substr(1) << "} = " << p.poly.to_latex() << '\n';
    return os.str();
  }
};

// Number of K-type generators (sizes 6, 8, ...) shipped for n.
inline int k_type_count(int n) { return n >= 4 ? (n - 2) / 2 : 0; }

inline InvariantSet generator_set(int n, unsigned threads = worker_threads()) {
  if (n < 1) throw std::invalid_argument("generator_set: n must be >= 1");
  InvariantSet s{n, {}};
  s.polys.push_back({"Q1", 2, q1(n)});
  if (n >= 2) s.polys.push_back({"Q2", 4, q2(n)});
  for (int k = 1; k <= k_type_count(n); ++k) {
    const int size = 2 * k + 4;
    s.polys.push_back({"Q" + std::to_string(k + 2), size, minor_sum(n, size, threads)});
  }
  return s;
}

// Coefficients c_0..c_m of det(lambda I - M) = sum_k c_k lambda^(m-k), where
// c_k = (-1)^k * (sum of k x k principal minors) = (-1)^k tr(wedge^k M).
template <typename T>
std::vector<T> charpoly_coeffs(const Matrix<T>& m) {
  if (!m.square()) throw std::invalid_argument("charpoly_coeffs: matrix must be square");
  const int size = static_cast<int>(m.rows());
  std::vector<T> c(size + 1, T(0));
  c[0] = T(1);
  for (int k = 1; k <= size; ++k) {
    T sum(0);
    detail::for_each_subset(size, k, [&](const std::vector<int>& s) {
      std::vector<std::size_t> idx(s.begin(), s.end());
      sum += determinant(m.submatrix(idx, idx));
    });
    c[k] = (k % 2 == 0) ? sum : T(-sum);
  }
  return c;
}

}  // namespace galinv
