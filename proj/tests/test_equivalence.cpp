#include <doctest.h>

#include <cmath>
#include <variant>

#include "irtmpt/equivalence.hpp"
#include "irtmpt/errors.hpp"
#include "irtmpt/mpt_graph.hpp"
#include "test_support.hpp"

using namespace irtmpt;

namespace {

PsiTable flat_table(const ModelDims& dims) {
  PsiTable t = PsiTable::constant(dims, 0.5);
  t.psi2.setConstant(0.6);
  t.psi8 = 0.4;
  return t;
}

IrtParams with_sixth_columns(const ModelDims& dims, std::vector<double> th6, std::vector<double> de6) {
  IrtParams p = canonicalize(testing::random_params(dims, 11));
  for (int t = 0; t < dims.T; ++t) p.theta(t, linked_column(6)) = th6[static_cast<std::size_t>(t)];
  for (int k = 0; k < dims.K; ++k) p.delta(k, linked_column(6)) = de6[static_cast<std::size_t>(k)];
  return p;
}

}  // namespace

TEST_CASE("case labels round-trip") {
  for (CaseLabel c : {CaseLabel::ThetaSixZero, CaseLabel::DeltaSixZero, CaseLabel::BothZero, CaseLabel::Neither})
    CHECK(parse_case_label(to_string(c)) == c);
  CHECK_FALSE(parse_case_label("sideways").has_value());
}

TEST_CASE("eta range bounds") {
  PsiTable t = flat_table({2, 2});
  t.psi7 << 0.3, 0.5;
  CHECK(eta_range(t).lo == doctest::Approx(0.7).epsilon(1e-15));

  // inner max is max{0.5, 0.3/0.7} = 0.5, so hi = (1 - 0.25) / 0.5
  t.psi7.setConstant(0.5);
  CHECK(eta_range(t).hi == doctest::Approx(1.5).epsilon(1e-15));

  PsiTable g = flat_table({2, 3});
  g.psi7 << 0.3, 0.5, 0.5;
  const Interval gr = generator_eta_range(g);
  CHECK(gr.lo == doctest::Approx(0.7).epsilon(1e-15));
  CHECK(gr.hi == doctest::Approx(1.4).epsilon(1e-15));
  CHECK(gr.hi <= eta_range(g).hi);

  PsiTable mixed = flat_table({2, 2});
  mixed.psi6(0, 0) = 0.3;
  mixed.psi6(1, 1) = 0.7;
  CHECK_THROWS_AS(generator_eta_range(mixed), DomainError);

  PsiTable near_one = flat_table({2, 2});
  near_one.psi7(1) = 1.0 - 1e-12;
  CHECK(eta_range(near_one).lo == doctest::Approx(0.6));
  near_one.psi6(0, 0) = 1.0 - 1e-12;
  CHECK(std::isfinite(eta_range(near_one).hi));
  near_one.psi6.setConstant(1.0 - 1e-12);
  CHECK(std::isinf(eta_range(near_one).hi));
}

TEST_CASE("xi range") {
  PsiTable t = flat_table({2, 2});
  const Interval a = xi_range(0.8, t);
  CHECK(a.lo == 1.0);
  CHECK(a.hi == doctest::Approx(1.2).epsilon(1e-15));

  t.psi6.col(1).setConstant(0.8);
  CHECK(xi_range(0.8, t).hi == doctest::Approx(1.05).epsilon(1e-15));

  const Interval above = xi_range(1.2, flat_table({2, 2}));
  CHECK(above.hi == 1.0);
  CHECK(above.lo == doctest::Approx(0.8).epsilon(1e-15));

  CHECK_THROWS_AS(xi_range(1.0, t), DomainError);
  const Interval tight = xi_range(1.0 - 1e-9, flat_table({2, 2}));
  CHECK(tight.hi - tight.lo < 1e-8);
}

TEST_CASE("apply transform by hand") {
  const PsiTable t = flat_table({2, 2});
  const TransformResult same = apply_transform(t, EtaXiTransform{});
  CHECK(max_abs_diff(same.table, t) == 0.0);

  const EtaXiTransform tr{0.8, {12.0 / 11.0}};
  const TransformResult r = apply_transform(t, tr);
  CHECK(r.table.psi8 == doctest::Approx(0.25).epsilon(1e-15));
  CHECK((1 - t.psi8) / (1 - r.table.psi8) == doctest::Approx(0.8).epsilon(1e-15));
  CHECK(r.table.psi3(0, 0) == doctest::Approx(6.0 / 11.0).epsilon(1e-15));
  CHECK(r.table.psi4(0, 0) == doctest::Approx(5.0 / 12.0).epsilon(1e-15));
  CHECK(r.table.psi2(0) == doctest::Approx(0.55).epsilon(1e-15));
  CHECK(r.consistent());
  CHECK(implied_xi(t, 0.8)[0] == doctest::Approx(12.0 / 11.0).epsilon(1e-15));
  CHECK(verify_pair(t, r.table, 1e-15).pass);

  // A xi that disagrees with the per-cell value is reported, not silently used.
  const TransformResult off = apply_transform(t, EtaXiTransform{0.8, {1.05}});
  CHECK_FALSE(off.consistent());
  CHECK(off.max_xi_discrepancy > 1e-3);
}

TEST_CASE("classification") {
  const ModelDims d{2, 3};
  CHECK(classify_case(with_sixth_columns(d, {0, 0}, {0.1, -0.1, 0}), 1e-9) == CaseLabel::ThetaSixZero);
  CHECK(classify_case(with_sixth_columns(d, {0.2, -0.2}, {0, 0, 0}), 1e-9) == CaseLabel::DeltaSixZero);
  CHECK(classify_case(with_sixth_columns(d, {0, 0}, {0, 0, 0}), 1e-9) == CaseLabel::BothZero);
  CHECK(classify_case(with_sixth_columns(d, {0.2, -0.2}, {0.1, -0.1, 0}), 1e-9) == CaseLabel::Neither);
  CHECK_THROWS_AS(classify_case(testing::random_params(d, 3)), DomainError);
}

TEST_CASE("generator examples") {
  const EquivalentPair a = generate_nonidentifiable({2, 3}, CaseLabel::ThetaSixZero, 1);
  CHECK(a.verification.max_dist_distribution <= 1e-12);
  CHECK(a.verification.max_dist_params >= 1e-3);
  CHECK(std::abs(a.transform.eta - 1) >= 0.05);
  CHECK(a.oracle_max_dist <= 1e-12);
  CHECK(classify_case(a.omega) == CaseLabel::ThetaSixZero);
  REQUIRE(a.omega_prime.has_value());
  CHECK(max_abs_diff(build_psi_table(*a.omega_prime), a.omega_prime_table) <= 1e-12);

  const EquivalentPair b = generate_nonidentifiable({2, 3}, CaseLabel::BothZero, 7);
  CHECK(check_necessary_equalities(b.omega_table, b.omega_prime_table, 1e-12).pass);
  CHECK(classify_case(b.omega) == CaseLabel::BothZero);

  const EquivalentPair c = generate_nonidentifiable({3, 4}, CaseLabel::DeltaSixZero, 3);
  CHECK(c.verification.pass);
  CHECK(classify_case(c.omega) == CaseLabel::DeltaSixZero);

  CHECK_THROWS_AS(generate_nonidentifiable({2, 3}, CaseLabel::Neither, 1), DomainError);

  GeneratorOptions above;
  above.eta_above_one = true;
  const EquivalentPair d = generate_nonidentifiable({2, 3}, CaseLabel::ThetaSixZero, 5, above);
  CHECK(d.transform.eta > 1.05);
  CHECK(d.verification.pass);
}

TEST_CASE("generator is reproducible") {
  const EquivalentPair a = generate_nonidentifiable({3, 3}, CaseLabel::ThetaSixZero, 42);
  const EquivalentPair b = generate_nonidentifiable({3, 3}, CaseLabel::ThetaSixZero, 42);
  CHECK(a.transform.eta == b.transform.eta);
  CHECK(max_abs_diff(a.omega_prime_table, b.omega_prime_table) == 0.0);
}

TEST_CASE("impossible margins exhaust the retry budget") {
  GeneratorOptions o;
  o.eta_margin = 0.9;
  o.max_retries = 20;
  CHECK_THROWS_AS(generate_nonidentifiable({2, 3}, CaseLabel::ThetaSixZero, 1, o), GenerationFailure);
}

TEST_CASE("two psi3' expressions agree on theta6-zero tables") {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const EquivalentPair p = generate_nonidentifiable({3, 4}, CaseLabel::ThetaSixZero, seed);
    const double xi = p.transform.xi.at(0);
    const PsiTable& a = p.omega_table;
    const PsiTable& b = p.omega_prime_table;
    for (int t = 0; t < 3; ++t)
      for (int k = 0; k < 4; ++k) CHECK(std::abs(xi * a.psi3(t, k) - b.psi3(t, k)) <= 1e-12);
  }
}

TEST_CASE("find_transform recovers a partner from a constructed point") {
  for (CaseLabel c : {CaseLabel::ThetaSixZero, CaseLabel::DeltaSixZero, CaseLabel::BothZero}) {
    const EquivalentPair p = generate_nonidentifiable({3, 4}, c, 9);
    const TransformSearch s = find_transform(p.omega_table, c, 0.05);
    REQUIRE(s.transform.has_value());
    const TransformResult r = apply_transform(p.omega_table, *s.transform);
    CHECK(r.consistent());
    CHECK(verify_pair(p.omega_table, r.table, 1e-12).pass);
  }
}

TEST_CASE("neither case cannot be lifted") {
  const IrtParams p = canonicalize(testing::random_params({3, 4}, 21));
  REQUIRE(classify_case(p) == CaseLabel::Neither);
  const PsiTable t = build_psi_table(p);
  const Interval range = eta_range(t);
  const double eta = 0.5 * (std::max(range.lo, 0.0) + 1.0);
  const TransformResult r = apply_transform(t, EtaXiTransform{eta, implied_xi(t, eta)});
  const auto lifted = lift_to_params(r.table);
  REQUIRE(std::holds_alternative<LiftFailure>(lifted));
  CHECK(std::get<LiftFailure>(lifted).residual > 1e-6);
}
