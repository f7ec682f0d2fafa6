#include "catch_amalgamated.hpp"

#include "support/generators.hpp"
#include "support/oracles.hpp"

#include "galinv/envelope.hpp"
#include "galinv/invariants.hpp"

using namespace galinv;
using galinv::testing::Engine;

namespace {

UEAElement gen(int n, const BasisLabel& l) { return UEAElement::generator(n, label_index(n, l)); }

MultiPoly coord(int n, const BasisLabel& l) { return MultiPoly::variable(n, label_index(n, l)); }

UEAElement random_element(const Envelope& env, Engine& rng, int max_len, int terms) {
  UEAElement u(env.n());
  for (int t = 0; t < terms; ++t) {
    const auto w = galinv::testing::random_word(env.n(), rng, max_len);
    u += env.normal_order(w) * galinv::testing::small_nonzero_rational(rng);
  }
  return u;
}

}  // namespace

TEST_CASE("normal_order examples", "[envelope]") {
  const Envelope env(1);
  const auto b = BasisLabel::B(1), p = BasisLabel::P(1), h = BasisLabel::H();
  // [B, P] = 0 and B precedes P, so the word is reordered without correction.
  CHECK(env.normal_order(std::vector<BasisLabel>{p, b}) == env.normal_order(std::vector<BasisLabel>{b, p}));
  CHECK(env.normal_order(std::vector<BasisLabel>{p, b}).to_text() == "B_1 P_1");
  // H B = B H - [B, H] = B H - P.
  CHECK(env.normal_order(std::vector<BasisLabel>{h, b}).to_text() == "B_1 H - P_1");
  CHECK(env.normal_order(std::vector<BasisLabel>{}) == UEAElement::one(1));
}

TEST_CASE("multiply examples", "[envelope]") {
  const Envelope env(1);
  Engine rng(3);
  const UEAElement a = random_element(env, rng, 3, 3);
  CHECK(env.multiply(UEAElement::one(1), a) == a);
  CHECK(env.multiply(a, UEAElement::one(1)) == a);
  const UEAElement b = gen(1, BasisLabel::B(1)), h = gen(1, BasisLabel::H());
  CHECK(env.multiply(b, h) - env.multiply(h, b) == gen(1, BasisLabel::P(1)));
  CHECK_THROWS(env.multiply(b, UEAElement::one(2)));
}

TEST_CASE("product degree respects the filtration", "[envelope][property]") {
  Engine rng(12);
  for (int n = 1; n <= 3; ++n) {
    const Envelope env(n);
    for (int t = 0; t < 30; ++t) {
      const UEAElement a = random_element(env, rng, 3, 2), b = random_element(env, rng, 3, 2);
      if (a.is_zero() || b.is_zero()) continue;
      const UEAElement ab = env.multiply(a, b);
      CHECK(ab.degree() <= a.degree() + b.degree());
      // Top-degree parts multiply like commuting polynomials, so degrees add.
      CHECK(ab.degree() == a.degree() + b.degree());
    }
  }
}

TEST_CASE("normal ordering is confluent", "[envelope][property]") {
  Engine rng(2024);
  for (int n = 1; n <= 3; ++n) {
    const Envelope env(n);
    for (int t = 0; t < 60; ++t) {
      const auto w = galinv::testing::random_word(n, rng, 5);
      const UEAElement want = env.normal_order(w);
      for (int strategy = 0; strategy < 3; ++strategy) CHECK(galinv::testing::naive_normal_order(n, w, rng) == want);
    }
  }
}

TEST_CASE("multiplication is associative", "[envelope][property]") {
  Engine rng(88);
  for (int n = 1; n <= 3; ++n) {
    const Envelope env(n);
    for (int t = 0; t < 25; ++t) {
      const UEAElement a = random_element(env, rng, 3, 2), b = random_element(env, rng, 3, 2),
                       c = random_element(env, rng, 3, 2);
      CHECK(env.multiply(env.multiply(a, b), c) == env.multiply(a, env.multiply(b, c)));
      CHECK(env.multiply(a, b + c) == env.multiply(a, b) + env.multiply(a, c));
    }
  }
}

TEST_CASE("symmetrize examples", "[envelope]") {
  const Envelope one(1);
  const MultiPoly x = coord(1, BasisLabel::P(1)), v = coord(1, BasisLabel::B(1));
  CHECK(one.symmetrize(x) == gen(1, BasisLabel::P(1)));
  CHECK(one.symmetrize(x * x) == one.multiply(gen(1, BasisLabel::P(1)), gen(1, BasisLabel::P(1))));
  CHECK(one.symmetrize(x * x).to_text() == "P_1^2");
  const UEAElement bp = gen(1, BasisLabel::B(1)), pp = gen(1, BasisLabel::P(1));
  CHECK(one.symmetrize(v * x) == (one.multiply(bp, pp) + one.multiply(pp, bp)) * Rational(1, 2));
  CHECK(one.symmetrize(MultiPoly::constant(1, Rational(3, 4))) == UEAElement::one(1) * Rational(3, 4));
}

TEST_CASE("symmetrize agrees with explicit arrangement averaging", "[envelope][property]") {
  Engine rng(606);
  for (int n = 1; n <= 3; ++n) {
    const Envelope env(n);
    for (int t = 0; t < 30; ++t) {
      const MultiPoly p = galinv::testing::random_full_poly(n, rng, 4, 3);
      UEAElement want(n);
      for (const auto& [m, c] : p.terms()) want += galinv::testing::enumerated_symmetrization(n, m, rng) * c;
      CHECK(env.symmetrize(p) == want);
    }
  }
}

TEST_CASE("symmetrize is linear and keeps degree", "[envelope][property]") {
  Engine rng(71);
  for (int n = 1; n <= 3; ++n) {
    const Envelope env(n);
    for (int t = 0; t < 30; ++t) {
      const MultiPoly p = galinv::testing::random_full_poly(n, rng, 4, 4),
                      q = galinv::testing::random_full_poly(n, rng, 4, 4);
      const Rational s = galinv::testing::small_rational(rng);
      CHECK(env.symmetrize(p + q * s) == env.symmetrize(p) + env.symmetrize(q) * s);
      CHECK(env.symmetrize(p).degree() == p.degree());
    }
  }
}

TEST_CASE("commutator examples", "[envelope]") {
  const Envelope one(1);
  Engine rng(4);
  const UEAElement a = random_element(one, rng, 3, 3);
  CHECK(one.commutator(a, a).is_zero());
  CHECK(one.commutator(gen(1, BasisLabel::B(1)), gen(1, BasisLabel::H())) == gen(1, BasisLabel::P(1)));

  const Envelope two(2);
  const UEAElement lq1 = two.symmetrize(q1(2));
  for (const auto& z : basis_labels(2)) CHECK(two.commutator(lq1, gen(2, z)).is_zero());
}

TEST_CASE("is_central examples", "[envelope]") {
  const Envelope one(1);
  CHECK(one.is_central(UEAElement::one(1)).central);
  const CentralityResult r = one.is_central(gen(1, BasisLabel::B(1)));
  CHECK_FALSE(r.central);
  REQUIRE(r.witness);
  CHECK(*r.witness == BasisLabel::H());
  REQUIRE(r.residue);
  CHECK(*r.residue == gen(1, BasisLabel::P(1)));
}

TEST_CASE("symmetrized generators are central for n <= 4", "[envelope]") {
  for (int n = 1; n <= 4; ++n) {
    const Envelope env(n);
    for (const auto& g : generator_set(n).polys) {
      INFO("n = " << n << ", " << g.name);
      CHECK(env.is_central(env.symmetrize(g.poly), 2).central);
    }
  }
}

TEST_CASE("non-invariant polynomials are not central", "[envelope]") {
  const Envelope env(2);
  const MultiPoly x1 = coord(2, BasisLabel::P(1)), v1 = coord(2, BasisLabel::B(1));
  CHECK_FALSE(env.is_central(env.symmetrize(x1 * x1)).central);
  CHECK_FALSE(env.is_central(env.symmetrize(v1 * v1 + x1 * x1)).central);
}

TEST_CASE("centrality does not depend on the thread count", "[envelope]") {
  const Envelope env(3);
  const UEAElement u = env.symmetrize(coord(3, BasisLabel::B(1)) * coord(3, BasisLabel::P(2)));
  const CentralityResult a = env.is_central(u, 1), b = env.is_central(u, 4);
  CHECK(a.central == b.central);
  REQUIRE(a.witness);
  CHECK(*a.witness == *b.witness);
  CHECK(*a.residue == *b.residue);
}

TEST_CASE("degree_drop_check examples", "[envelope]") {
  const Envelope one(1);
  const MultiPoly x = coord(1, BasisLabel::P(1)), v = coord(1, BasisLabel::B(1)), t = coord(1, BasisLabel::H());
  CHECK(one.symmetrization_defect(x, x).is_zero());
  CHECK(one.degree_drop_check(x, x));
  CHECK(one.degree_drop_check(v, t));
  CHECK(one.symmetrization_defect(v, t).degree() <= 1);
  // lambda(VT) - B H = (BH + HB)/2 - BH = -P/2.
  CHECK(one.symmetrization_defect(v, t) == gen(1, BasisLabel::P(1)) * Rational(-1, 2));
  const MultiPoly c = MultiPoly::constant(1, 5);
  CHECK(one.symmetrization_defect(c, v * t).is_zero());
  CHECK(one.symmetrization_defect(v * t, c).is_zero());
}

TEST_CASE("degree drops for products of generators", "[envelope][property]") {
  galinv::Rng rng(15);
  for (int n = 1; n <= 3; ++n) {
    const Envelope env(n);
    const InvariantSet set = generator_set(n);
    for (int t = 0; t < 5; ++t) {
      const MultiPoly p = random_generator_product(set, rng, 4), q = random_generator_product(set, rng, 4);
      CHECK(env.degree_drop_check(p, q));
    }
  }
}

TEST_CASE("UEA JSON lists PBW exponent vectors", "[envelope]") {
  const Envelope one(1);
  const json j = one.normal_order(std::vector<BasisLabel>{BasisLabel::H(), BasisLabel::B(1)}).to_json();
  CHECK(j == json::parse(R"([{"coeff":"1","pbw":[1,0,1]},{"coeff":"-1","pbw":[0,1,0]}])"));
}
