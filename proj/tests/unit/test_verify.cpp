#include "catch_amalgamated.hpp"

#include "support/generators.hpp"
#include "support/oracles.hpp"

#include "galinv/verify.hpp"

using namespace galinv;
using galinv::testing::Engine;

namespace {

MultiPoly coord(int n, const BasisLabel& l) { return MultiPoly::variable(n, label_index(n, l)); }

const CheckEntry* find_check(const VerificationReport& r, const std::string& name) {
  for (const auto& c : r.checks)
    if (c.name == name) return &c;
  return nullptr;
}

}  // namespace

TEST_CASE("derive_seed separates check names", "[verify]") {
  CHECK(derive_seed(1, "a") == derive_seed(1, "a"));
  CHECK(derive_seed(1, "a") != derive_seed(1, "b"));
  CHECK(derive_seed(1, "a") != derive_seed(2, "a"));
}

TEST_CASE("check_infinitesimal_invariance", "[verify]") {
  CHECK(check_infinitesimal_invariance(q1(2), 2).passed);
  const auto x1 = check_infinitesimal_invariance(coord(2, BasisLabel::P(1)), 2);
  CHECK_FALSE(x1.passed);
  REQUIRE(x1.failing);
  CHECK(x1.failing->kind == Kind::Rotation);
  CHECK_FALSE(x1.residual.is_zero());
  CHECK(check_infinitesimal_invariance(MultiPoly::constant(3, 7), 3).passed);
}

TEST_CASE("generators are infinitesimally invariant for n <= 5", "[verify]") {
  for (int n = 1; n <= 5; ++n)
    for (const auto& g : generator_set(n).polys) {
      INFO("n = " << n << ", " << g.name);
      CHECK(check_infinitesimal_invariance(g.poly, n).passed);
    }
}

TEST_CASE("infinitesimal check agrees with the naive bracket", "[verify][property]") {
  Engine rng(13);
  for (int t = 0; t < 20; ++t) {
    const int n = 1 + t % 3;
    const MultiPoly q = galinv::testing::random_full_poly(n, rng);
    bool all_zero = true;
    for (std::size_t z = 0; z < VarTable(n).size(); ++z)
      all_zero = all_zero && galinv::testing::naive_poisson(MultiPoly::variable(n, z), q).is_zero();
    CHECK(check_infinitesimal_invariance(q, n).passed == all_zero);
  }
}

TEST_CASE("check_reflection_invariance", "[verify]") {
  const MultiPoly x = coord(1, BasisLabel::P(1));
  CHECK(check_reflection_invariance(x * x, 1));
  CHECK_FALSE(check_reflection_invariance(x, 1));
  CHECK(check_reflection_invariance(q2(3), 3));
  for (int n = 1; n <= 5; ++n)
    for (const auto& g : generator_set(n).polys) CHECK(check_reflection_invariance(g.poly, n));
}

TEST_CASE("check_group_invariance_sampled", "[verify]") {
  const SampledResult r = check_group_invariance_sampled(q1(4), 4, 100, 42);
  CHECK(r.passed);
  CHECK(r.trials == 100);
  CHECK(r.failures == 0);

  const SampledResult t = check_group_invariance_sampled(coord(2, BasisLabel::H()), 2, 20, 42);
  CHECK_FALSE(t.passed);
  CHECK(t.failures > 0);

  // A pure boost moves t* by -v.x*, so T is not invariant.
  DualVector xi = DualVector::zero(2);
  xi.xstar = {1, 2};
  const GroupElement boost = GroupElement::from_blocks(RationalMatrix::identity(2), {1, 0}, {0, 0}, 0);
  CHECK(coadjoint(boost, xi).tstar == -1);

  // The identity never changes anything.
  const DualVector same = random_dual(3, *std::make_unique<galinv::Rng>(1));
  CHECK(coadjoint(GroupElement(3), same) == same);
}

TEST_CASE("sampled invariance is reproducible from the seed", "[verify]") {
  const auto a = check_group_invariance_sampled(coord(2, BasisLabel::H()), 2, 30, 9);
  const auto b = check_group_invariance_sampled(coord(2, BasisLabel::H()), 2, 30, 9);
  CHECK(a.failures == b.failures);
  CHECK(a.first_failure == b.first_failure);
}

TEST_CASE("jacobian_rank", "[verify]") {
  const int n = 2;
  std::vector<Rational> p(VarTable(n).size());
  p[VarTable(n).x_index(1)] = 1;
  p[VarTable(n).v_index(2)] = 1;
  CHECK(jacobian_rank({q1(n), q2(n)}, p) == 2);

  Engine rng(6);
  const auto x = galinv::testing::random_point(3, rng);
  CHECK(jacobian_rank({q1(3), q1(3) * q1(3)}, x) == 1);

  const auto six = galinv::testing::random_point(6, rng);
  CHECK(jacobian_rank(generator_set(6).polynomials(), six) == 4);
  CHECK_THROWS(jacobian_rank({q1(2)}, std::vector<Rational>(3)));
}

TEST_CASE("independence and the algebra index agree with the shipped count", "[verify]") {
  for (int n = 1; n <= 7; ++n) {
    const InvariantSet set = generator_set(n);
    const IndependenceResult r = check_independence(set.polynomials(), n, 100 + n);
    CHECK(r.passed);
    CHECK(r.rank == set.size());
    CHECK(algebra_index(StructureConstants(n), 7 + n) == set.size());
  }
}

TEST_CASE("bracket_corank at special points", "[verify]") {
  const StructureConstants sc(2);
  // At the origin every bracket vanishes.
  CHECK(bracket_corank(sc, std::vector<Rational>(sc.dim())) == sc.dim());
  Engine rng(1);
  CHECK(bracket_corank(sc, galinv::testing::random_point(2, rng)) == 2);
}

TEST_CASE("check_minor_charpoly_identity", "[verify]") {
  // Transversal point: A = 2, B = 3, angle 5 gives 4 * 9 * 25 on both sides.
  const int n = 4;
  std::vector<double> x(VarTable(n).size(), 0.0);
  x[VarTable(n).x_index(1)] = 2;
  x[VarTable(n).v_index(2)] = 3;
  x[VarTable(n).k_index(3, 4)] = 5;
  CHECK(minor_sum(n, 6).evaluate_float(x) == 900.0);
  FloatMatrix pkp(n, n);
  pkp(2, 3) = 5;
  pkp(3, 2) = -5;
  CHECK(2.0 * 2.0 * 3.0 * 3.0 * charpoly_coeffs(pkp)[2] == 900.0);

  // K* = 0: both sides vanish for every K-type size.
  Engine rng(3);
  for (int t = 0; t < 5; ++t) {
    auto c = galinv::testing::random_float_point(5, rng);
    for (std::size_t k = 0; k < VarTable(5).rotation_count(); ++k) c[k] = 0.0;
    CHECK(minor_sum(5, 6).evaluate_float(c) == 0.0);
  }

  for (int m = 4; m <= 6; ++m) {
    const IdentityResult r = check_minor_charpoly_identity(m, 50, 1234 + m, 1e-9);
    CHECK(r.passed);
    CHECK(r.trials == 50);
    CHECK(r.max_relative_error < 1e-9);
  }
  CHECK_THROWS(check_minor_charpoly_identity(3, 1, 1, 1e-9));
}

TEST_CASE("run_suite n = 1", "[verify]") {
  SuiteOptions opt;
  opt.trials = 30;
  const VerificationReport r = run_suite(1, 5, opt);
  CHECK(r.passed());
  const CheckEntry* c = find_check(r, "centrality:Q1");
  REQUIRE(c);
  CHECK(c->passed);
  CHECK(find_check(r, "minor_sum_4_equals_q2") == nullptr);
}

TEST_CASE("run_suite n = 3", "[verify]") {
  SuiteOptions opt;
  opt.trials = 20;
  const VerificationReport r = run_suite(3, 11, opt);
  CHECK(r.passed());
  const CheckEntry* ind = find_check(r, "independence");
  REQUIRE(ind);
  CHECK(ind->detail.find("rank 2 of 2") != std::string::npos);
  CHECK(find_check(r, "centrality:Q2"));
  CHECK(find_check(r, "degree_drop"));
  CHECK(find_check(r, "minor_charpoly_identity") == nullptr);
}

TEST_CASE("run_suite n = 4 skips centrality unless forced", "[verify]") {
  SuiteOptions opt;
  opt.trials = 10;
  const VerificationReport plain = run_suite(4, 1, opt);
  CHECK(plain.passed());
  CHECK(find_check(plain, "centrality:Q1") == nullptr);
  CHECK(find_check(plain, "minor_charpoly_identity"));
  opt.force_centrality_n4 = true;
  const VerificationReport forced = run_suite(4, 1, opt);
  CHECK(forced.passed());
  REQUIRE(find_check(forced, "centrality:Q3"));
  CHECK(find_check(forced, "centrality:Q3")->passed);
  CHECK_THROWS(run_suite(9, 1));
  CHECK_THROWS(run_suite(0, 1));
}

TEST_CASE("reports are byte-identical across runs and thread counts", "[verify]") {
  SuiteOptions opt;
  opt.trials = 15;
  for (int n : {2, 4}) {
    opt.threads = 1;
    const std::string a = run_suite(n, 77, opt).to_json().dump(2);
    const std::string b = run_suite(n, 77, opt).to_json().dump(2);
    opt.threads = 3;
    const std::string c = run_suite(n, 77, opt).to_json().dump(2);
    CHECK(a == b);
    CHECK(a == c);
  }
}

TEST_CASE("report formats", "[verify]") {
  VerificationReport r{2, 7, 100, {{"x", true, "fine", 0.5}, {"y", false, "broken", 1.5}}};
  CHECK_FALSE(r.passed());
  const json j = r.to_json();
  CHECK(j["schema"] == "v1");
  CHECK(j["passed"] == false);
  CHECK(j["checks"][1] == json{{"name", "y"}, {"status", "fail"}, {"detail", "broken"}});
  CHECK(j.dump().find("runtime") == std::string::npos);
  CHECK(r.to_text() == "verify n=2 seed=7 trials=100\nPASS x: fine\nFAIL y: broken\nsome checks FAILED\n");
}
