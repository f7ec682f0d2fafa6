#pragma once

// Floating-point reduction of a generic dual element to the transversal
//
//   x* = (A, 0, ..., 0),  v* = (0, B, 0, ..., 0),  t* = 0,
//   K* = 0 except a block-diagonal torus element on indices 3..n,
//
// one group element per step. Each step's group element is found from the
// current point rather than from fixed formulas, and the reduced point is
// always recomputed by applying the coadjoint action, so any error in a step
// shows up in the residual.

#include "galinv/galilean.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace galinv {

// Float mirror of DualVector.
struct FloatDual {
  int n = 1;
  Eigen::MatrixXd kstar;
  Eigen::VectorXd vstar;
  Eigen::VectorXd xstar;
  double tstar = 0;

  static FloatDual zero(int n) {
    if (n < 1) throw std::invalid_argument("FloatDual: n must be >= 1");
    return {n, Eigen::MatrixXd::Zero(n, n), Eigen::VectorXd::Zero(n), Eigen::VectorXd::Zero(n), 0.0};
  }

  static FloatDual from_exact(const DualVector& xi) {
    FloatDual f = zero(xi.n);
    for (int i = 0; i < xi.n; ++i) {
      for (int j = 0; j < xi.n; ++j) f.kstar(i, j) = xi.kstar(i, j).get_d();
      f.vstar(i) = xi.vstar[i].get_d();
      f.xstar(i) = xi.xstar[i].get_d();
    }
    f.tstar = xi.tstar.get_d();
    return f;
  }

  static FloatDual from_coordinates(int n, std::span<const double> c) {
    const VarTable vt(n);
    if (c.size() != vt.size()) throw std::invalid_argument("FloatDual: wrong coordinate count");
    FloatDual f = zero(n);
    for (int i = 1; i <= n; ++i)
      for (int j = i + 1; j <= n; ++j) {
        f.kstar(i - 1, j - 1) = c[vt.k_index(i, j)];
        f.kstar(j - 1, i - 1) = -c[vt.k_index(i, j)];
      }
    for (int i = 1; i <= n; ++i) {
      f.vstar(i - 1) = c[vt.v_index(i)];
      f.xstar(i - 1) = c[vt.x_index(i)];
    }
    f.tstar = c[vt.t_index()];
    return f;
  }

  std::vector<double> coordinates() const {
    const VarTable vt(n);
    std::vector<double> c(vt.size());
    for (int i = 1; i <= n; ++i)
      for (int j = i + 1; j <= n; ++j) c[vt.k_index(i, j)] = kstar(i - 1, j - 1);
    for (int i = 1; i <= n; ++i) {
      c[vt.v_index(i)] = vstar(i - 1);
      c[vt.x_index(i)] = xstar(i - 1);
    }
    c[vt.t_index()] = tstar;
    return c;
  }

  // Largest absolute coordinate.
  double scale() const {
    double s = std::abs(tstar);
    if (n > 0) s = std::max({s, kstar.cwiseAbs().maxCoeff(), vstar.cwiseAbs().maxCoeff(), xstar.cwiseAbs().maxCoeff()});
    return s;
  }
};

// Accepts numbers or "p/q" strings. K* must be skew to 1e-12 and is then
// replaced by its exact skew part.
inline FloatDual float_dual_from_json(const json& j) {
  auto number = [](const json& v) -> double {
    if (v.is_number()) return v.get<double>();
    if (v.is_string()) return to_double(parse_rational(v.get<std::string>()));
    throw ParseError("expected a number or a rational string");
  };
  if (!j.is_object() || !j.contains("n") || !j["n"].is_number_integer())
    throw ParseError("dual JSON needs an integer 'n'");
  const int n = j["n"].get<int>();
  if (n < 1) throw ParseError("dual JSON: n must be >= 1");
  for (const char* key : {"Kstar", "vstar", "xstar", "tstar"})
    if (!j.contains(key)) throw ParseError(std::string("dual JSON is missing '") + key + "'");
  FloatDual f = FloatDual::zero(n);
  const json& k = j["Kstar"];
  if (!k.is_array() || static_cast<int>(k.size()) != n) throw ParseError("Kstar must have n rows");
  for (int r = 0; r < n; ++r) {
    if (!k[r].is_array() || static_cast<int>(k[r].size()) != n) throw ParseError("Kstar rows must have n entries");
    for (int c = 0; c < n; ++c) f.kstar(r, c) = number(k[r][c]);
  }
  for (const auto& [key, vec] : {std::pair{"vstar", &f.vstar}, std::pair{"xstar", &f.xstar}}) {
    const json& v = j[key];
    if (!v.is_array() || static_cast<int>(v.size()) != n) throw ParseError(std::string(key) + " must have n entries");
    for (int r = 0; r < n; ++r) (*vec)(r) = number(v[r]);
  }
  f.tstar = number(j["tstar"]);
  if ((f.kstar + f.kstar.transpose()).cwiseAbs().maxCoeff() > 1e-12) throw ParseError("Kstar is not skew-symmetric");
  f.kstar = (0.5 * (f.kstar - f.kstar.transpose())).eval();
  return f;
}

inline json float_dual_to_json(const FloatDual& f) {
  json k = json::array();
  for (int r = 0; r < f.n; ++r) {
    json row = json::array();
    for (int c = 0; c < f.n; ++c) row.push_back(f.kstar(r, c));
    k.push_back(std::move(row));
  }
  std::vector<double> v(f.vstar.data(), f.vstar.data() + f.n), x(f.xstar.data(), f.xstar.data() + f.n);
  return json{{"schema", "v1"}, {"n", f.n}, {"Kstar", k}, {"vstar", v}, {"xstar", x}, {"tstar", f.tstar}};
}

// Float group element in the same (n+2)x(n+2) block layout as GroupElement.
class FloatGroupElement {
 public:
  explicit FloatGroupElement(int n) : n_(n), m_(Eigen::MatrixXd::Identity(n + 2, n + 2)) {}

  static FloatGroupElement from_blocks(const Eigen::MatrixXd& rho, const Eigen::VectorXd& boost,
                                       const Eigen::VectorXd& translation, double time_shift) {
    const int n = static_cast<int>(rho.rows());
    FloatGroupElement g(n);
    g.m_.topLeftCorner(n, n) = rho;
    g.m_.block(0, n, n, 1) = boost;
    g.m_.block(0, n + 1, n, 1) = translation;
    g.m_(n, n + 1) = time_shift;
    return g;
  }

  static FloatGroupElement from_exact(const GroupElement& g) {
    FloatGroupElement f(g.n());
    for (int i = 0; i < g.n() + 2; ++i)
      for (int j = 0; j < g.n() + 2; ++j) f.m_(i, j) = g.matrix()(i, j).get_d();
    return f;
  }

  int n() const { return n_; }
  const Eigen::MatrixXd& matrix() const { return m_; }
  Eigen::MatrixXd rho() const { return m_.topLeftCorner(n_, n_); }

  // Block inverse; rho is orthogonal so its inverse is its transpose.
  FloatGroupElement inverse() const {
    const Eigen::MatrixXd rt = rho().transpose();
    const Eigen::VectorXd v = m_.block(0, n_, n_, 1), x = m_.block(0, n_ + 1, n_, 1);
    const double x0 = m_(n_, n_ + 1);
    return from_blocks(rt, -rt * v, -rt * (x - v * x0), -x0);
  }

  friend FloatGroupElement operator*(const FloatGroupElement& a, const FloatGroupElement& b) {
    FloatGroupElement c(a.n_);
    c.m_ = a.m_ * b.m_;
    return c;
  }

  // Distance of the rotation block from orthogonality.
  double orthogonality_defect() const {
    const Eigen::MatrixXd r = rho();
    return (r.transpose() * r - Eigen::MatrixXd::Identity(n_, n_)).cwiseAbs().maxCoeff();
  }

 private:
  int n_;
  Eigen::MatrixXd m_;
};

inline Eigen::MatrixXd dual_to_matrix(const FloatDual& xi) {
  const int n = xi.n;
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n + 2, n + 2);
  a.topLeftCorner(n, n) = xi.kstar;
  a.block(0, n, n, 1) = xi.vstar;
  a.block(0, n + 1, n, 1) = xi.xstar;
  a(n, n + 1) = xi.tstar;
  return a;
}

inline FloatDual project_dual(const Eigen::MatrixXd& a) {
  const int n = static_cast<int>(a.rows()) - 2;
  FloatDual xi = FloatDual::zero(n);
  xi.kstar = 0.5 * (a.topLeftCorner(n, n) - a.topLeftCorner(n, n).transpose());
  xi.vstar = a.block(0, n, n, 1);
  xi.xstar = a.block(0, n + 1, n, 1);
  xi.tstar = a(n, n + 1);
  return xi;
}

inline FloatDual coadjoint(const FloatGroupElement& g, const FloatDual& xi) {
  if (g.n() != xi.n) throw std::invalid_argument("coadjoint: dimension mismatch");
  const Eigen::MatrixXd a = dual_to_matrix(xi);
  return project_dual((g.matrix() * a.transpose() * g.inverse().matrix()).transpose());
}

struct SkewCanonical {
  Eigen::MatrixXd q;            // orthogonal, Q^T K Q canonical
  std::vector<double> angles;   // floor(m/2) values, >= 0, descending
};

// Q^T K Q = diag([[0, t_1], [-t_1, 0]], ..., [0]) with t_1 >= t_2 >= ... >= 0.
// The t_j^2 are the eigenvalues of the symmetric matrix -K^2; for a unit
// eigenvector u, the partner column is -K u / t.
inline SkewCanonical skew_canonical(const Eigen::MatrixXd& k) {
  const int m = static_cast<int>(k.rows());
  if (k.cols() != m) throw std::invalid_argument("skew_canonical: matrix must be square");
  const double scale = m ? k.cwiseAbs().maxCoeff() : 0.0;
  if (m && (k + k.transpose()).cwiseAbs().maxCoeff() > 1e-12 * std::max(1.0, scale))
    throw std::invalid_argument("skew_canonical: matrix must be skew-symmetric");
  SkewCanonical out{Eigen::MatrixXd::Identity(m, m), std::vector<double>(m / 2, 0.0)};
  if (m < 2 || scale == 0) return out;

  const Eigen::MatrixXd s = -k * k;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(0.5 * (s + s.transpose()));
  const Eigen::MatrixXd& vecs = eig.eigenvectors();  // ascending eigenvalues

  std::vector<Eigen::VectorXd> cols;
  auto orthonormalize = [&](Eigen::VectorXd v) -> Eigen::VectorXd {
    for (int pass = 0; pass < 2; ++pass)
      for (const auto& c : cols) v -= c.dot(v) * c;
    return v;
  };
  const double zero_angle = 1e-14 * scale;
  int pairs = 0;
  for (int e = m - 1; e >= 0 && pairs < m / 2; --e) {
    Eigen::VectorXd u = orthonormalize(vecs.col(e));
    if (u.norm() < 0.5) continue;  // already spanned by earlier pairs
    u.normalize();
    Eigen::VectorXd w = -k * u;
    const double theta = w.norm();
    if (theta <= zero_angle) break;
    w = orthonormalize(w / theta);
    w.normalize();
    cols.push_back(u);
    cols.push_back(w);
    out.angles[pairs++] = u.dot(k * w);
  }
  // The kernel part: complete to an orthonormal basis.
  for (int e = m - 1; e >= 0 && static_cast<int>(cols.size()) < m; --e) {
    Eigen::VectorXd u = orthonormalize(vecs.col(e));
    if (u.norm() < 0.5) continue;
    cols.push_back(u.normalized());
  }
  for (int c = 0; c < m; ++c) out.q.col(c) = cols[c];
  return out;
}

struct TransversalForm {
  int n = 1;
  double A = 0;
  double B = 0;
  std::vector<double> thetas;
  bool degenerate = false;

  // The transversal point with these parameters.
  FloatDual point() const {
    FloatDual f = FloatDual::zero(n);
    f.xstar(0) = A;
    if (n >= 2) f.vstar(1) = B;
    for (std::size_t j = 0; j < thetas.size(); ++j) {
      const int a = 2 + 2 * static_cast<int>(j);
      f.kstar(a, a + 1) = thetas[j];
      f.kstar(a + 1, a) = -thetas[j];
    }
    return f;
  }
};

inline std::size_t torus_rank(int n) { return n >= 2 ? static_cast<std::size_t>(n - 2) / 2 : 0; }

enum class StepKind { Rotation, TimeShift, BoostTranslation, TorusRotation };

inline const char* step_name(StepKind k) {
  switch (k) {
    case StepKind::Rotation: return "rotation";
    case StepKind::TimeShift: return "time-shift";
    case StepKind::BoostTranslation: return "boost-translation";
    case StepKind::TorusRotation: return "torus-rotation";
  }
  return "?";
}

struct ReductionStep {
  StepKind kind;
  FloatGroupElement g;
};

struct ReductionTrace {
  int n = 1;
  std::vector<ReductionStep> steps;

  // g_k ... g_1: the single group element taking the input to the output.
  FloatGroupElement composed() const {
    FloatGroupElement g(n);
    for (const auto& s : steps) g = s.g * g;
    return g;
  }
};

struct Reduction {
  TransversalForm form;
  ReductionTrace trace;
  FloatDual reduced;
  double residual = 0;  // max |reduced - form.point()| / input scale
};

namespace detail {

inline bool rotation_done(const FloatDual& xi, double eps) {
  if (xi.xstar(0) < 0) return false;
  for (int i = 1; i < xi.n; ++i)
    if (std::abs(xi.xstar(i)) > eps) return false;
  if (xi.n >= 2 && xi.vstar(1) < 0) return false;
  for (int i = 2; i < xi.n; ++i)
    if (std::abs(xi.vstar(i)) > eps) return false;
  return true;
}

inline bool clearing_done(const FloatDual& xi, double eps) {
  if (std::abs(xi.tstar) > eps) return false;
  for (int j = 1; j < xi.n; ++j)
    if (std::abs(xi.kstar(0, j)) > eps) return false;
  for (int j = 2; j < xi.n; ++j)
    if (std::abs(xi.kstar(1, j)) > eps) return false;
  return true;
}

inline bool torus_done(const FloatDual& xi, double eps) {
  const int m = xi.n - 2;
  if (m < 2) return true;
  double prev = INFINITY;
  for (int a = 0; a < m; ++a)
    for (int b = a + 1; b < m; ++b) {
      const double v = xi.kstar(a + 2, b + 2);
      const bool on_pattern = (a % 2 == 0) && b == a + 1;
      if (!on_pattern && std::abs(v) > eps) return false;
      if (on_pattern) {
        if (v < -eps || v > prev + eps) return false;
        prev = v;
      }
    }
  return true;
}

// Off-pattern size relative to the transversal point read off `xi`.
inline TransversalForm read_form(const FloatDual& xi) {
  TransversalForm t{xi.n, xi.xstar(0), xi.n >= 2 ? xi.vstar(1) : 0.0, {}, false};
  for (std::size_t j = 0; j < torus_rank(xi.n); ++j) {
    const int a = 2 + 2 * static_cast<int>(j);
    t.thetas.push_back(xi.kstar(a, a + 1));
  }
  return t;
}

inline double max_difference(const FloatDual& a, const FloatDual& b) {
  const auto ca = a.coordinates(), cb = b.coordinates();
  double d = 0;
  for (std::size_t i = 0; i < ca.size(); ++i) d = std::max(d, std::abs(ca[i] - cb[i]));
  return d;
}

}  // namespace detail

// Reduces xi to the transversal. Inputs with |x*| <= tol, or (n >= 2) with
// the part of v* orthogonal to x* of norm <= tol, are reported degenerate
// and reduced only as far as the failing step.
inline Reduction reduce(const FloatDual& input, double tol = 1e-9) {
  const int n = input.n;
  const double scale = std::max(input.scale(), 1e-300);
  const double eps = 1e-10 * scale;  // "already canonical" threshold
  Reduction r{{n, 0, 0, {}, false}, {n, {}}, input, 0};
  FloatDual xi = input;
  auto apply = [&](StepKind kind, const FloatGroupElement& g) {
    r.trace.steps.push_back({kind, g});
    xi = coadjoint(g, xi);
  };
  auto finish = [&](bool degenerate) {
    r.reduced = xi;
    r.form = detail::read_form(xi);
    r.form.degenerate = degenerate;
    r.residual = degenerate ? 0.0 : detail::max_difference(xi, r.form.point()) / scale;
    return r;
  };

  // Rotation: x* -> A e_1 and the component of v* orthogonal to x* -> B e_2.
  const double a_norm = input.xstar.norm();
  if (a_norm <= tol) return finish(true);
  const Eigen::VectorXd e1 = input.xstar / a_norm;
  Eigen::VectorXd w = input.vstar - input.vstar.dot(e1) * e1;
  if (n >= 2 && w.norm() <= tol) return finish(true);
  if (!detail::rotation_done(xi, eps)) {
    Eigen::MatrixXd frame(n, n >= 2 ? 2 : 1);
    frame.col(0) = e1;
    if (n >= 2) frame.col(1) = w.normalized();
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(frame);
    Eigen::MatrixXd q = qr.householderQ();
    for (int c = 0; c < frame.cols(); ++c)
      if (q.col(c).dot(frame.col(c)) < 0) q.col(c) = -q.col(c);
    apply(StepKind::Rotation, FloatGroupElement::from_blocks(q.transpose(), Eigen::VectorXd::Zero(n),
                                                             Eigen::VectorXd::Zero(n), 0.0));
  }

  // Time shift: v* -> v* + x0 x*, chosen to clear v*_1.
  if (std::abs(xi.vstar(0)) > eps) {
    const FloatDual probe = coadjoint(FloatGroupElement::from_blocks(Eigen::MatrixXd::Identity(n, n),
                                                                     Eigen::VectorXd::Zero(n),
                                                                     Eigen::VectorXd::Zero(n), 1.0),
                                      xi);
    const double rate = probe.vstar(0) - xi.vstar(0);
    apply(StepKind::TimeShift, FloatGroupElement::from_blocks(Eigen::MatrixXd::Identity(n, n),
                                                              Eigen::VectorXd::Zero(n), Eigen::VectorXd::Zero(n),
                                                              -xi.vstar(0) / rate));
  }

  // Boost and translation. With x* and v* already in place, the action on
  // (K*_{1j}, K*_{2j}, t*) is affine in the free parameters
  //   v_1, v_3, ..., v_n and x_2, ..., x_n,
  // giving a square linear system (just v_1 against t* when n = 1). Its columns are measured by applying unit
  // steps, so no sign convention is hard-coded here.
  if (!detail::clearing_done(xi, eps)) {
    struct Param {
      bool boost;
      int index;
    };
    std::vector<Param> params;
    params.push_back({true, 0});
    for (int i = 2; i < n; ++i) params.push_back({true, i});
    for (int i = 1; i < n; ++i) params.push_back({false, i});
    const int size = static_cast<int>(params.size());
    auto targets = [n, size](const FloatDual& f) {
      Eigen::VectorXd t(size);
      int k = 0;
      for (int j = 1; j < n; ++j) t(k++) = f.kstar(0, j);
      for (int j = 2; j < n; ++j) t(k++) = f.kstar(1, j);
      t(k++) = f.tstar;
      return t;
    };
    auto element = [n, &params](const Eigen::VectorXd& p) {
      Eigen::VectorXd v = Eigen::VectorXd::Zero(n), x = Eigen::VectorXd::Zero(n);
      for (std::size_t k = 0; k < params.size(); ++k) (params[k].boost ? v : x)(params[k].index) = p(k);
      return FloatGroupElement::from_blocks(Eigen::MatrixXd::Identity(n, n), v, x, 0.0);
    };
    const Eigen::VectorXd base = targets(xi);
    Eigen::MatrixXd jac(size, size);
    for (int k = 0; k < size; ++k) {
      Eigen::VectorXd unit = Eigen::VectorXd::Zero(size);
      unit(k) = 1.0;
      jac.col(k) = targets(coadjoint(element(unit), xi)) - base;
    }
    const Eigen::VectorXd step = jac.colPivHouseholderQr().solve(-base);
    apply(StepKind::BoostTranslation, element(step));
  }

  // Torus: conjugate the lower (n-2)x(n-2) block of K* to canonical form.
  if (n >= 4 && !detail::torus_done(xi, eps)) {
    const int m = n - 2;
    const SkewCanonical sc = skew_canonical(0.5 * (xi.kstar.bottomRightCorner(m, m) -
                                                   xi.kstar.bottomRightCorner(m, m).transpose()));
    Eigen::MatrixXd rho = Eigen::MatrixXd::Identity(n, n);
    rho.bottomRightCorner(m, m) = sc.q.transpose();
    apply(StepKind::TorusRotation,
          FloatGroupElement::from_blocks(rho, Eigen::VectorXd::Zero(n), Eigen::VectorXd::Zero(n), 0.0));
  }
  return finish(false);
}

// [A^2, A^2 B^2, A^2 B^2 e_1(theta^2), A^2 B^2 e_2(theta^2), ...], in the
// order of generator_set(n).
inline std::vector<double> closed_form_invariants(const TransversalForm& t) {
  if (t.degenerate) throw std::invalid_argument("closed_form_invariants: degenerate form");
  const double a2 = t.A * t.A;
  std::vector<double> out{a2};
  if (t.n < 2) return out;
  const double a2b2 = a2 * t.B * t.B;
  out.push_back(a2b2);
  // Elementary symmetric polynomials of the squared angles.
  std::vector<double> e(t.thetas.size() + 1, 0.0);
  e[0] = 1;
  for (double th : t.thetas)
    for (std::size_t k = e.size() - 1; k >= 1; --k) e[k] += e[k - 1] * th * th;
  for (std::size_t k = 1; k < e.size(); ++k) out.push_back(a2b2 * e[k]);
  return out;
}

}  // namespace galinv
