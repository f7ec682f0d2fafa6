#pragma once

// Verification checks for a generator set and the suite that runs them.
//
// Exact checks: bracket with every linear coordinate, pullback by the
// reflection, sampled group invariance with rational group elements, Jacobian
// rank, minor_sum(n,4) = q2, centrality and degree drop in U(gal(n)).
// Float check: the minor-sum / characteristic-polynomial identity.
//
// Every randomized check draws from its own generator seeded by (suite seed,
// check name), and results land in per-check slots, so the report is the same
// for any worker count.

#include "galinv/envelope.hpp"
#include "galinv/galilean.hpp"
#include "galinv/invariants.hpp"
#include "galinv/matrix.hpp"
#include "galinv/orbitreduce.hpp"
#include "galinv/parallel.hpp"
#include "galinv/polyring.hpp"

#include <chrono>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

namespace galinv {

// splitmix64 over the seed and an FNV-1a digest of the name.
inline std::uint64_t derive_seed(std::uint64_t seed, std::string_view name) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : name) {
    h ^= c;
    h *= 1099511628211ull;
  }
  std::uint64_t z = seed ^ h;
  z += 0x9e3779b97f4a7c15ull;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

struct InfinitesimalResult {
  bool passed = true;
  std::optional<BasisLabel> failing;  // first basis element with a nonzero bracket
  MultiPoly residual;

  explicit InfinitesimalResult(int n) : residual(n) {}
};

inline InfinitesimalResult check_infinitesimal_invariance(const MultiPoly& q, const StructureConstants& sc) {
  InfinitesimalResult r(q.n());
  for (std::size_t z = 0; z < sc.dim(); ++z) {
    MultiPoly b = bracket_with_coordinate(z, q, sc);
    if (!b.is_zero()) {
      r.passed = false;
      r.failing = label_at(q.n(), z);
      r.residual = std::move(b);
      return r;
    }
  }
  return r;
}

inline InfinitesimalResult check_infinitesimal_invariance(const MultiPoly& q, int n) {
  return check_infinitesimal_invariance(q, StructureConstants(n));
}

inline bool check_reflection_invariance(const MultiPoly& q, int n) {
  return pullback(q, reflection(n)) == q;
}

struct SampledResult {
  bool passed = true;
  int trials = 0;
  int failures = 0;
  int first_failure = -1;  // trial index
};

// Each trial samples a rational group element (reflection included on a coin
// flip) and a rational dual point, and compares exact values of every q.
inline std::vector<SampledResult> check_group_invariance_sampled(const std::vector<MultiPoly>& qs, int n, int trials,
                                                                 std::uint64_t seed) {
  if (trials < 1) throw std::invalid_argument("check_group_invariance_sampled: trials must be >= 1");
  std::vector<SampledResult> out(qs.size());
  Rng rng(seed);
  std::bernoulli_distribution coin(0.5);
  for (int t = 0; t < trials; ++t) {
    const GroupElement g = random_group_element(n, rng, coin(rng));
    const DualVector xi = random_dual(n, rng);
    const auto before = xi.coordinates();
    const auto after = coadjoint(g, xi).coordinates();
    for (std::size_t k = 0; k < qs.size(); ++k) {
      ++out[k].trials;
      if (qs[k].evaluate(before) != qs[k].evaluate(after)) {
        out[k].passed = false;
        if (out[k].failures++ == 0) out[k].first_failure = t;
      }
    }
  }
  return out;
}

inline SampledResult check_group_invariance_sampled(const MultiPoly& q, int n, int trials, std::uint64_t seed) {
  return check_group_invariance_sampled(std::vector<MultiPoly>{q}, n, trials, seed).front();
}

// Exact rank of [dQ_i/dxi_j](point).
inline std::size_t jacobian_rank(const std::vector<MultiPoly>& qs, std::span<const Rational> point) {
  if (qs.empty()) return 0;
  const std::size_t d = qs.front().var_count();
  if (point.size() != d) throw std::invalid_argument("jacobian_rank: point has wrong length");
  RationalMatrix jac(qs.size(), d);
  for (std::size_t i = 0; i < qs.size(); ++i) {
    const auto grad = qs[i].gradient(point);
    for (std::size_t j = 0; j < d; ++j) jac(i, j) = grad[j];
  }
  return rank(jac);
}

struct IndependenceResult {
  bool passed = false;
  std::size_t rank = 0;
  std::size_t size = 0;
  int points_tried = 0;
};

// Full rank at some random point certifies algebraic independence.
inline IndependenceResult check_independence(const std::vector<MultiPoly>& qs, int n, std::uint64_t seed,
                                             int attempts = 3) {
  IndependenceResult r{false, 0, qs.size(), 0};
  Rng rng(seed);
  const std::size_t d = VarTable(n).size();
  for (int a = 0; a < attempts && !r.passed; ++a) {
    std::vector<Rational> point(d);
    for (auto& v : point) v = random_rational(rng);
    r.rank = std::max(r.rank, jacobian_rank(qs, point));
    r.points_tried = a + 1;
    r.passed = r.rank == qs.size();
  }
  return r;
}

// Corank of the bracket matrix [sum_c c_ab^c xi_c] at xi. At a generic point
// this is the index of the algebra: the largest possible number of
// functionally independent invariants.
inline std::size_t bracket_corank(const StructureConstants& sc, std::span<const Rational> xi) {
  if (xi.size() != sc.dim()) throw std::invalid_argument("bracket_corank: point has wrong length");
  RationalMatrix m(sc.dim(), sc.dim());
  for (std::size_t a = 0; a < sc.dim(); ++a)
    for (std::size_t b = 0; b < sc.dim(); ++b)
      for (const auto& [c, v] : sc.bracket(a, b)) m(a, b) += v * xi[c];
  return sc.dim() - rank(m);
}

// Minimum corank over a few random points (rank only drops on special sets).
inline std::size_t algebra_index(const StructureConstants& sc, std::uint64_t seed, int attempts = 3) {
  Rng rng(seed);
  std::size_t best = sc.dim();
  for (int a = 0; a < attempts; ++a) {
    std::vector<Rational> xi(sc.dim());
    for (auto& v : xi) v = random_rational(rng);
    best = std::min(best, bracket_corank(sc, xi));
  }
  return best;
}

struct IdentityResult {
  bool passed = true;
  double max_relative_error = 0;
  int trials = 0;
  int resamples = 0;
};

// minor_sum(n, 2k+4)(xi) against A^2 B^2 c_2k(P K* P), P the orthogonal
// projector onto span{x*, v*}^perp, for k = 1 .. floor((n-2)/2).
inline IdentityResult check_minor_charpoly_identity(int n, int trials, std::uint64_t seed, double tol,
                                                    const std::vector<MultiPoly>* sums = nullptr) {
  if (n < 4) throw std::invalid_argument("check_minor_charpoly_identity: n must be >= 4");
  std::vector<MultiPoly> own;
  if (!sums) {
    for (int k = 1; k <= k_type_count(n); ++k) own.push_back(minor_sum(n, 2 * k + 4, 1));
    sums = &own;
  }
  IdentityResult r;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  const std::size_t d = VarTable(n).size();
  while (r.trials < trials) {
    std::vector<double> c(d);
    for (auto& v : c) v = unit(rng);
    const FloatDual xi = FloatDual::from_coordinates(n, c);
    const double a = xi.xstar.norm();
    const Eigen::VectorXd w = xi.vstar - xi.vstar.dot(xi.xstar) / (a * a) * xi.xstar;
    const double b = w.norm();
    if (a <= 1e-9 || b <= 1e-9) {
      ++r.resamples;
      continue;
    }
    ++r.trials;
    Eigen::MatrixXd basis(n, 2);
    basis.col(0) = xi.xstar / a;
    basis.col(1) = w / b;
    const Eigen::MatrixXd proj = Eigen::MatrixXd::Identity(n, n) - basis * basis.transpose();
    const Eigen::MatrixXd pkp = proj * xi.kstar * proj;
    FloatMatrix m(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) m(i, j) = pkp(i, j);
    const auto coeffs = charpoly_coeffs(m);
    for (std::size_t k = 1; k <= sums->size(); ++k) {
      const double lhs = (*sums)[k - 1].evaluate_float(c);
      const double rhs = a * a * b * b * coeffs[2 * k];
      const double err = std::abs(lhs - rhs) / std::max(1.0, std::abs(lhs));
      r.max_relative_error = std::max(r.max_relative_error, err);
      if (err > tol) r.passed = false;
    }
  }
  return r;
}

// Product of generators with random exponents, total degree <= max_degree.
inline MultiPoly random_generator_product(const InvariantSet& set, Rng& rng, int max_degree) {
  std::uniform_int_distribution<std::size_t> pick(0, set.size() - 1);
  std::uniform_int_distribution<int> factors(1, 2);
  MultiPoly p = MultiPoly::constant(set.n, 1);
  int degree = 0;
  const int count = factors(rng);
  for (int f = 0; f < count; ++f) {
    const auto& g = set.polys[pick(rng)];
    if (degree + g.degree > max_degree) continue;
    p *= g.poly;
    degree += g.degree;
  }
  if (degree == 0) p = set.polys.front().poly;
  return p;
}

struct CheckEntry {
  std::string name;
  bool passed = false;
  std::string detail;
  double runtime = 0;  // seconds; kept out of JSON so reports stay byte-stable
};

struct VerificationReport {
  int n = 1;
  std::uint64_t seed = 0;
  int trials = 0;
  std::vector<CheckEntry> checks;

  bool passed() const {
    for (const auto& c : checks)
      if (!c.passed) return false;
    return true;
  }

  json to_json() const {
    json arr = json::array();
    for (const auto& c : checks)
      arr.push_back(json{{"name", c.name}, {"status", c.passed ? "pass" : "fail"}, {"detail", c.detail}});
    return json{{"schema", "v1"}, {"n", n}, {"seed", seed}, {"trials", trials}, {"passed", passed()},
                {"checks", std::move(arr)}};
  }

  std::string to_text() const {
    std::ostringstream os;
    os << "verify n=" << n << " seed=" << seed << " trials=" << trials << '\n';
    for (const auto& c : checks) os << (c.passed ? "PASS " : "FAIL ") << c.name << ": " << c.detail << '\n';
    os << (passed() ? "all checks passed" : "some checks FAILED") << '\n';
    return os.str();
  }
};

struct SuiteOptions {
  int trials = 100;
  int identity_trials = 50;
  double identity_tol = 1e-9;
  int degree_drop_pairs = 5;
  bool force_centrality_n4 = false;
  unsigned threads = worker_threads();
};

inline constexpr int kMaxSuiteN = 8;

inline VerificationReport run_suite(int n, std::uint64_t seed, const SuiteOptions& opt = {}) {
  if (n < 1 || n > kMaxSuiteN)
    throw std::invalid_argument("run_suite: n must be in 1.." + std::to_string(kMaxSuiteN));
  VerificationReport report{n, seed, opt.trials, {}};
  const InvariantSet set = generator_set(n, opt.threads);
  const auto polys = set.polynomials();
  const StructureConstants sc(n);
  const bool centrality = n <= 3 || (n == 4 && opt.force_centrality_n4);

  // Build the task list first; each task fills its own slot.
  struct Task {
    std::string name;
    std::function<void(CheckEntry&)> run;
  };
  std::vector<Task> tasks;
  auto seed_for = [seed](const std::string& name) { return derive_seed(seed, name); };

  for (const auto& g : set.polys) {
    tasks.push_back({"infinitesimal_invariance:" + g.name, [&, &g = g](CheckEntry& e) {
                       const auto r = check_infinitesimal_invariance(g.poly, sc);
                       e.passed = r.passed;
                       e.detail = r.passed ? "all " + std::to_string(sc.dim()) + " brackets vanish"
                                           : "bracket with " + r.failing->name() + " has " +
                                                 std::to_string(r.residual.size()) + " terms";
                     }});
    tasks.push_back({"reflection_invariance:" + g.name, [&, &g = g](CheckEntry& e) {
                       e.passed = check_reflection_invariance(g.poly, n);
                       e.detail = e.passed ? "pullback is identical" : "pullback differs";
                     }});
  }
  tasks.push_back({"sampled_invariance", [&](CheckEntry& e) {
                     const auto rs = check_group_invariance_sampled(polys, n, opt.trials, seed_for("sampled_invariance"));
                     e.passed = true;
                     std::ostringstream os;
                     for (std::size_t k = 0; k < rs.size(); ++k) {
                       e.passed = e.passed && rs[k].passed;
                       os << (k ? ", " : "") << set.polys[k].name << " " << rs[k].trials - rs[k].failures << "/"
                          << rs[k].trials;
                     }
                     e.detail = os.str() + " exact matches";
                   }});
  tasks.push_back({"independence", [&](CheckEntry& e) {
                     const auto r = check_independence(polys, n, seed_for("independence"));
                     e.passed = r.passed;
                     e.detail = "Jacobian rank " + std::to_string(r.rank) + " of " + std::to_string(r.size) +
                                " generators (" + std::to_string(r.points_tried) + " point(s))";
                   }});
  tasks.push_back({"invariant_count", [&](CheckEntry& e) {
                     const std::size_t index = algebra_index(sc, seed_for("invariant_count"));
                     e.passed = index == set.size();
                     e.detail = std::to_string(set.size()) + " generators, algebra index " + std::to_string(index);
                   }});
  if (n >= 2)
    tasks.push_back({"minor_sum_4_equals_q2", [&](CheckEntry& e) {
                       e.passed = minor_sum(n, 4, 1) == q2(n);
                       e.detail = e.passed ? "identical polynomials" : "polynomials differ";
                     }});
  if (n >= 4)
    tasks.push_back({"minor_charpoly_identity", [&](CheckEntry& e) {
                       std::vector<MultiPoly> sums(polys.begin() + 2, polys.end());
                       const auto r = check_minor_charpoly_identity(n, opt.identity_trials,
                                                                    seed_for("minor_charpoly_identity"),
                                                                    opt.identity_tol, &sums);
                       e.passed = r.passed;
                       std::ostringstream os;
                       os.precision(3);
                       os << r.trials << " trials, max relative error " << std::scientific << r.max_relative_error;
                       e.detail = os.str();
                     }});
  std::optional<Envelope> env;
  if (centrality) {
    env.emplace(n);
    for (const auto& g : set.polys)
      tasks.push_back({"centrality:" + g.name, [&, &g = g](CheckEntry& e) {
                         const auto r = env->is_central(env->symmetrize(g.poly));
                         e.passed = r.central;
                         e.detail = r.central ? "commutes with all " + std::to_string(env->dim()) + " basis elements"
                                              : "commutator with " + r.witness->name() + " is " +
                                                    r.residue->to_text();
                       }});
    tasks.push_back({"degree_drop", [&](CheckEntry& e) {
                       Rng rng(seed_for("degree_drop"));
                       int ok = 0;
                       for (int k = 0; k < opt.degree_drop_pairs; ++k) {
                         const MultiPoly p = random_generator_product(set, rng, 4);
                         const MultiPoly q = random_generator_product(set, rng, 4);
                         ok += env->degree_drop_check(p, q) ? 1 : 0;
                       }
                       e.passed = ok == opt.degree_drop_pairs;
                       e.detail = std::to_string(ok) + "/" + std::to_string(opt.degree_drop_pairs) + " pairs";
                     }});
  }

  report.checks.resize(tasks.size());
  parallel_for(tasks.size(), opt.threads, [&](std::size_t i) {
    const auto start = std::chrono::steady_clock::now();
    CheckEntry& e = report.checks[i];
    e.name = tasks[i].name;
    tasks[i].run(e);
    e.runtime = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  });
  return report;
}

}  // namespace galinv
