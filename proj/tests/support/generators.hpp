#pragma once

// Hand-rolled random inputs for property tests. Every generator takes an
// explicit engine so failures replay from the seed printed by Catch2.

#include "galinv/galinv.hpp"

#include <Eigen/Dense>

#include <random>
#include <vector>

namespace galinv::testing {

using Engine = std::mt19937_64;

inline Rational small_rational(Engine& rng, int max_num = 9, int max_den = 5) {
  std::uniform_int_distribution<int> num(-max_num, max_num), den(1, max_den);
  Rational r(num(rng), den(rng));
  r.canonicalize();
  return r;
}

inline Rational small_nonzero_rational(Engine& rng) {
  for (;;)
    if (Rational r = small_rational(rng); r != 0) return r;
}

// Up to `max_terms` terms of degree <= max_degree over the first
// `max_vars` variables of VarTable(n).
inline MultiPoly random_poly(int n, Engine& rng, int max_degree = 4, int max_terms = 5, std::size_t max_vars = 5) {
  const std::size_t vars = std::min(max_vars, VarTable(n).size());
  std::uniform_int_distribution<int> terms(0, max_terms), degree(0, max_degree);
  std::uniform_int_distribution<std::size_t> var(0, vars - 1);
  std::vector<MultiPoly::Term> out;
  const int count = terms(rng);
  for (int t = 0; t < count; ++t) {
    std::vector<VarPower> powers;
    const int d = degree(rng);
    for (int k = 0; k < d; ++k) powers.push_back({static_cast<std::uint16_t>(var(rng)), 1});
    out.emplace_back(Monomial(powers), small_rational(rng));
  }
  return MultiPoly::from_terms(n, std::move(out));
}

// Same, but over every variable of gal(n)*.
inline MultiPoly random_full_poly(int n, Engine& rng, int max_degree = 3, int max_terms = 4) {
  return random_poly(n, rng, max_degree, max_terms, VarTable(n).size());
}

inline std::vector<Rational> random_point(int n, Engine& rng) {
  std::vector<Rational> p(VarTable(n).size());
  for (auto& v : p) v = small_rational(rng);
  return p;
}

inline std::vector<double> random_float_point(int n, Engine& rng) {
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  std::vector<double> p(VarTable(n).size());
  for (auto& v : p) v = unit(rng);
  return p;
}

inline std::vector<std::size_t> random_word(int n, Engine& rng, int max_len) {
  std::uniform_int_distribution<int> len(0, max_len);
  std::uniform_int_distribution<std::size_t> letter(0, VarTable(n).size() - 1);
  std::vector<std::size_t> w(len(rng));
  for (auto& l : w) l = letter(rng);
  return w;
}

inline Eigen::MatrixXd random_float_skew(int m, Engine& rng) {
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  Eigen::MatrixXd k = Eigen::MatrixXd::Zero(m, m);
  for (int i = 0; i < m; ++i)
    for (int j = i + 1; j < m; ++j) {
      k(i, j) = unit(rng);
      k(j, i) = -k(i, j);
    }
  return k;
}

// Non-degenerate float dual element with entries in [-1, 1].
inline FloatDual random_generic_dual(int n, Engine& rng) {
  for (;;) {
    const auto c = random_float_point(n, rng);
    FloatDual f = FloatDual::from_coordinates(n, c);
    const double a = f.xstar.norm();
    if (a < 1e-3) continue;
    if (n >= 2) {
      const Eigen::VectorXd w = f.vstar - f.vstar.dot(f.xstar) / (a * a) * f.xstar;
      if (w.norm() < 1e-3) continue;
    }
    return f;
  }
}

}  // namespace galinv::testing
