#pragma once

// Independent reference computations. None of these call the code path they
// are used to check; they are deliberately naive.

#include "galinv/galinv.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <complex>
#include <map>
#include <random>
#include <vector>

namespace galinv::testing {

// Cofactor expansion along the first row.
inline Rational laplace_det(const RationalMatrix& m) {
  const std::size_t n = m.rows();
  if (n == 0) return 1;
  if (n == 1) return m(0, 0);
  Rational det = 0;
  for (std::size_t c = 0; c < n; ++c) {
    if (m(0, c) == 0) continue;
    RationalMatrix minor(n - 1, n - 1);
    for (std::size_t i = 1; i < n; ++i)
      for (std::size_t j = 0, jj = 0; j < n; ++j)
        if (j != c) minor(i - 1, jj++) = m(i, j);
    const Rational term = m(0, c) * laplace_det(minor);
    det += (c % 2 == 0) ? term : Rational(-term);
  }
  return det;
}

// Faddeev-LeVerrier: c_k of det(lambda I - M) = sum_k c_k lambda^(m-k).
inline std::vector<Rational> faddeev_leverrier(const RationalMatrix& a) {
  const std::size_t m = a.rows();
  std::vector<Rational> c(m + 1);
  c[0] = 1;
  RationalMatrix mk(m, m);  // M_0 = 0
  for (std::size_t k = 1; k <= m; ++k) {
    RationalMatrix shifted = mk;
    for (std::size_t i = 0; i < m; ++i) shifted(i, i) += c[k - 1];
    mk = a * shifted;
    Rational trace = 0;
    for (std::size_t i = 0; i < m; ++i) trace += mk(i, i);
    c[k] = -trace / Rational(static_cast<long>(k));
  }
  return c;
}

// Position of the +1 entry that defines each basis matrix.
inline std::pair<std::size_t, std::size_t> defining_slot(const BasisLabel& l, int n) {
  switch (l.kind) {
    case Kind::Rotation: return {l.i - 1, l.j - 1};
    case Kind::Boost: return {l.i - 1, static_cast<std::size_t>(n)};
    case Kind::Translation: return {l.i - 1, static_cast<std::size_t>(n) + 1};
    case Kind::Time: return {static_cast<std::size_t>(n), static_cast<std::size_t>(n) + 1};
  }
  return {0, 0};
}

// Coordinates of [Z_a, Z_b] read from the matrix commutator, by slot.
inline std::vector<Rational> commutator_coordinates(std::size_t a, std::size_t b, int n) {
  const RationalMatrix za = basis_matrix(label_at(n, a), n), zb = basis_matrix(label_at(n, b), n);
  const RationalMatrix comm = za * zb - zb * za;
  std::vector<Rational> out(VarTable(n).size());
  for (std::size_t c = 0; c < out.size(); ++c) {
    const auto [r, col] = defining_slot(label_at(n, c), n);
    out[c] = comm(r, col);
  }
  return out;
}

// {f,g} = sum_{a,b,c} c_ab^c xi_c df/da dg/db, with the constants taken from
// the matrix commutators above.
inline MultiPoly naive_poisson(const MultiPoly& f, const MultiPoly& g) {
  const int n = f.n();
  const std::size_t d = VarTable(n).size();
  MultiPoly out(n);
  for (std::size_t a = 0; a < d; ++a) {
    const MultiPoly fa = f.partial(a);
    if (fa.is_zero()) continue;
    for (std::size_t b = 0; b < d; ++b) {
      const MultiPoly gb = g.partial(b);
      if (gb.is_zero()) continue;
      const auto coords = commutator_coordinates(a, b, n);
      for (std::size_t c = 0; c < d; ++c)
        if (coords[c] != 0) out += fa * gb * MultiPoly::variable(n, c, coords[c]);
    }
  }
  return out;
}

using Word = std::vector<std::size_t>;

// PBW rewriting that fixes a random out-of-order adjacent pair at each step,
// using XY = YX + [X,Y] with matrix-commutator constants.
inline UEAElement naive_normal_order(int n, const Word& word, std::mt19937_64& rng) {
  std::map<Word, Rational> pending{{word, Rational(1)}};
  UEAElement out(n);
  while (!pending.empty()) {
    auto node = pending.extract(pending.begin());
    const Word& w = node.key();
    const Rational& coeff = node.mapped();
    if (coeff == 0) continue;
    std::vector<std::size_t> descents;
    for (std::size_t i = 0; i + 1 < w.size(); ++i)
      if (w[i] > w[i + 1]) descents.push_back(i);
    if (descents.empty()) {
      std::vector<VarPower> powers;
      for (auto l : w) powers.push_back({static_cast<std::uint16_t>(l), 1});
      out += UEAElement::monomial(n, Monomial(powers), coeff);
      continue;
    }
    const std::size_t i =
        descents[std::uniform_int_distribution<std::size_t>(0, descents.size() - 1)(rng)];
    Word swapped = w;
    std::swap(swapped[i], swapped[i + 1]);
    pending[swapped] += coeff;
    const auto coords = commutator_coordinates(w[i], w[i + 1], n);
    for (std::size_t c = 0; c < coords.size(); ++c) {
      if (coords[c] == 0) continue;
      Word shorter(w.begin(), w.begin() + i);
      shorter.push_back(c);
      shorter.insert(shorter.end(), w.begin() + i + 2, w.end());
      pending[shorter] += coeff * coords[c];
    }
  }
  return out;
}

// Average of every distinct arrangement of the monomial's letters.
inline UEAElement enumerated_symmetrization(int n, const Monomial& m, std::mt19937_64& rng) {
  Word letters;
  for (const auto& p : m.powers())
    for (unsigned e = 0; e < p.exp; ++e) letters.push_back(p.var);
  std::sort(letters.begin(), letters.end());
  UEAElement sum(n);
  long count = 0;
  do {
    sum += naive_normal_order(n, letters, rng);
    ++count;
  } while (std::next_permutation(letters.begin(), letters.end()));
  return sum * Rational(1, count);
}

struct GramSchmidt {
  double a;
  double b;
};

// A = |x*|, B = |v* - (v*.e) e| with e = x*/|x*|, coordinate by coordinate.
inline GramSchmidt gram_schmidt(const std::vector<double>& x, const std::vector<double>& v) {
  double xx = 0, xv = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    xx += x[i] * x[i];
    xv += x[i] * v[i];
  }
  double bb = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = v[i] - xv / xx * x[i];
    bb += r * r;
  }
  return {std::sqrt(xx), std::sqrt(bb)};
}

// Rotation angles of a real skew matrix from the imaginary parts of its
// (complex) eigenvalues, descending, padded with zeros to floor(m/2).
inline std::vector<double> skew_angles(const Eigen::MatrixXd& k) {
  const int m = static_cast<int>(k.rows());
  Eigen::EigenSolver<Eigen::MatrixXd> es(k, false);
  std::vector<double> im;
  for (int i = 0; i < m; ++i)
    if (es.eigenvalues()(i).imag() > 0) im.push_back(es.eigenvalues()(i).imag());
  std::sort(im.rbegin(), im.rend());
  im.resize(m / 2, 0.0);
  return im;
}

inline double relative_error(double got, double want) {
  return std::abs(got - want) / std::max(1.0, std::abs(want));
}

}  // namespace galinv::testing
