#include "lml/moment.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace lml;
using namespace lml::moment;
using special::ShiftPair;
using special::WeightSpec;

namespace {

double rel(cplx a, cplx b) { return std::abs(a - b) / std::abs(b); }

arith::CoefficientVector single(std::uint64_t q, double kappa, std::size_t at, cplx v) {
  std::vector<cplx> c(at);
  c[at - 1] = v;
  return {q, kappa, std::move(c), arith::CoeffOrigin::file};
}

MomentContext afe_context(std::uint64_t q) {
  return MomentContext(chars::CharacterTable::build(q), {PairMethod::afe});
}

} // namespace

TEST_CASE("character side equals the congruence expansion") {
  auto ctx = afe_context(13);
  const auto unit = arith::unit_coeffs(13, 0.3);
  for (const auto &shift : {ShiftPair::central(13), ShiftPair::inverse_log(13)}) {
    const auto spec = WeightSpec::gaussian(shift);
    CHECK(rel(empirical_moment(ctx, unit, spec), congruence_moment(ctx, unit, spec)) < 1e-10);
    const auto two = single(13, 0.3, 2, {0.6, -0.8});
    CHECK(rel(empirical_moment(ctx, two, spec), congruence_moment(ctx, two, spec)) < 1e-9);
  }
  // unequal complex shifts exercise the m^{beta-alpha} factor
  for (std::uint64_t q : {13u, 31u}) {
    auto c = afe_context(q);
    const auto spec =
        WeightSpec::gaussian(ShiftPair::make({0.04, 0.9}, {-0.02, -0.3}, q));
    for (std::uint64_t seed = 0; seed < 3; ++seed) {
      const auto coeffs = arith::random_coeffs(q, 0.5, seed);
      CHECK(rel(empirical_moment(c, coeffs, spec), congruence_moment(c, coeffs, spec)) <
            1e-9);
    }
  }
}

TEST_CASE("multiples of q are invisible to characters") {
  auto ctx = afe_context(13);
  const auto spec = WeightSpec::gaussian(ShiftPair::inverse_log(13));
  const auto c = arith::random_coeffs(13, 0.3, 5);
  const cplx with = congruence_moment(ctx, c, spec, true);
  const cplx without = congruence_moment(ctx, c, spec, false);
  CHECK(rel(without, empirical_moment(ctx, c, spec)) < 1e-9);
  CHECK(rel(with, without) > 1e-4);
  CHECK_THROWS_AS(congruence_moment(401, arith::unit_coeffs(401, 0.3), spec),
                  std::invalid_argument);
}

TEST_CASE("conjugation and positivity") {
  auto ctx = afe_context(31);
  const auto d = arith::d_half_coeffs(31, 0.6);
  const auto shift = ShiftPair::make({0.05, 0.4}, {0.02, -0.7}, 31);
  const cplx i1 = empirical_moment(ctx, d, WeightSpec::gaussian(shift));
  const cplx i2 = empirical_moment(ctx, d, WeightSpec::gaussian(shift.conjugate_swap()));
  CHECK(std::abs(std::conj(i1) - i2) < 1e-10 * std::abs(i1));

  const auto r = empirical_moment(ctx, arith::random_coeffs(31, 0.6, 1),
                                  WeightSpec::gaussian(ShiftPair::inverse_log(31)));
  CHECK(r.real() > 0.0);
  CHECK(std::abs(r.imag()) < 1e-10);
}

TEST_CASE("unit coefficients give the mean square of L(1/2)") {
  auto ctx = afe_context(101);
  const cplx m = empirical_moment(ctx, arith::unit_coeffs(101, 0.3),
                                  WeightSpec::gaussian(ShiftPair::central(101)));
  double direct = 0.0;
  for (auto j : ctx.table().even_primitive_indices())
    direct += std::norm(chars::l_value_oracle(ctx.table(), j, 0.5));
  CHECK(m.real() == doctest::Approx(direct / 49.0).epsilon(1e-9));
}

TEST_CASE("pair method selection") {
  MomentContext ctx(chars::CharacterTable::build(101),
                    {PairMethod::automatic, 1, 1000});
  const auto spec = WeightSpec::gaussian(ShiftPair::inverse_log(101));
  PairMethod used{};
  ctx.pair_values(spec, &used);
  CHECK(used == PairMethod::hurwitz);
  auto afe = afe_context(101);
  const auto c = arith::random_coeffs(101, 0.4, 2);
  CHECK(rel(empirical_moment(ctx, c, spec), empirical_moment(afe, c, spec)) < 1e-9);
}

TEST_CASE("main term") {
  const std::uint64_t q = 1009;
  const double logq = std::log(1009.0);
  const auto shift = ShiftPair::inverse_log(q);
  const cplx s = shift.alpha;
  const cplx collapsed =
      special::riemann_zeta(1.0 + 2.0 * s) +
      std::exp(-2.0 * s * std::log(q / std::numbers::pi)) * gamma_ratio(s, s) *
          special::riemann_zeta(1.0 - 2.0 * s);
  const cplx mt = twisted_main_term(q, shift, arith::unit_coeffs(q, 0.3));
  CHECK(rel(mt, collapsed) < 1e-13);
  CHECK(std::abs(mt.imag()) < 1e-13);
  CHECK(std::isfinite(mt.real()));
  CHECK_THROWS_AS(twisted_main_term(q, ShiftPair{1e-6, 1e-6, logq}, arith::unit_coeffs(q, 0.3)),
                  std::invalid_argument);

  // support {1, 2}: (d,a,b) in {(1,1,1), (1,1,2), (1,2,1), (2,1,1)}
  const arith::CoefficientVector c(q, 0.3, {cplx{0.5, 0.1}, cplx{-0.3, 0.7}},
                                   arith::CoeffOrigin::file);
  const cplx a = {0.03, 0.2}, b = {0.05, -0.1};
  auto term = [&](cplx x, cplx y, double d, double aa, double bb) {
    return x * std::conj(y) / d * std::pow(aa, -(1.0 + b)) * std::pow(bb, -(1.0 + a));
  };
  const cplx expected = term(c[1], c[1], 1, 1, 1) + term(c[1], c[2], 1, 1, 2) +
                        term(c[2], c[1], 1, 2, 1) + term(c[2], c[2], 2, 1, 1);
  CHECK(rel(coprime_double_sums(c, a, b).first, expected) < 1e-14);
}

TEST_CASE("central limit") {
  for (std::uint64_t q : {101u, 1009u}) {
    const auto lim = central_main_term(q, arith::unit_coeffs(q, 0.3));
    CHECK(lim.value.real() == doctest::Approx(central_unit_limit(q)).epsilon(1e-6));
    // log(q/pi) + gamma - 3 log 2 - pi/2 is the same number
    const double alt = std::log(q / std::numbers::pi) + euler_gamma - 3 * std::log(2.0) -
                       std::numbers::pi / 2;
    CHECK(central_unit_limit(q) == doctest::Approx(alt).epsilon(1e-14));
  }
  const std::uint64_t q = 1009;
  const auto d = arith::d_half_coeffs(q, 0.4);
  const auto lim = central_main_term(q, d);
  CHECK(std::abs(lim.value.imag()) < 1e-12);
  // the main term is analytic in the shift, so the symmetric average is O(s^2)
  const double s = 1e-3 / std::log(1009.0);
  const cplx near = 0.5 * (twisted_main_term(q, ShiftPair{s, s, std::log(1009.0)}, d) +
                           twisted_main_term(q, ShiftPair{-s, -s, std::log(1009.0)}, d));
  CHECK(rel(near, lim.value) < 1e-6);
}

TEST_CASE("diagonal term") {
  const std::uint64_t q = 13;
  const auto spec = WeightSpec::gaussian(ShiftPair::make(0.01, 0.01, q));
  const auto c = arith::random_coeffs(q, 0.5, 9);
  const cplx contour = diagonal_term(q, c, spec);
  CHECK(std::abs(contour - diagonal_term_direct(q, c, spec)) < 1e-6 * std::abs(contour));
  auto wide = spec;
  wide.contour_cut *= 2;
  CHECK(std::abs(diagonal_term(q, c, wide) - contour) < 1e-9);
  CHECK_THROWS_AS(diagonal_term(q, c, WeightSpec::gaussian(ShiftPair::central(q))),
                  std::invalid_argument);
}

TEST_CASE("third moment") {
  const auto t = chars::CharacterTable::build(5);
  const double l = std::abs(chars::l_value_oracle(t, 2, 0.5));
  CHECK(third_moment(t) == doctest::Approx(l * l * l).epsilon(1e-12));
  const auto t1009 = chars::CharacterTable::build(1009);
  for (double v : third_moment_terms(t1009))
    CHECK(v >= 0.0);
}

TEST_CASE("twisted uniformity instance") {
  const auto t = chars::CharacterTable::build(1009);
  const double logq = std::log(1009.0);
  std::vector<double> ratios;
  for (double tt : {0.0, 1.0, logq / 2}) {
    const auto inst = twisted_uniformity_instance(t, 0.0, tt);
    CHECK(std::isfinite(inst.ratio));
    CHECK(inst.ratio > 0.0);
    CHECK(inst.poly_length == 32);
    ratios.push_back(inst.ratio);
  }
  const auto [lo, hi] = std::minmax_element(ratios.begin(), ratios.end());
  CHECK(*hi / *lo < 3.0);
  CHECK_THROWS_AS(twisted_uniformity_instance(t, 0.0, 10.0), std::invalid_argument);
}

TEST_CASE("report JSON") {
  MomentReport r;
  r.q = 13;
  r.kappa = 0.3;
  r.shift = ShiftPair::inverse_log(13);
  r.method = "pairs=afe";
  r.seed = 4;
  r.set_values({2.0, 0.0}, {1.0, 0.0});
  CHECK(r.rel_dev == 1.0);
  const std::string json = r.to_json();
  std::size_t pos = 0;
  for (const char *key : {"\"q\"", "\"kappa\"", "\"alpha\"", "\"beta\"", "\"empirical\"",
                          "\"predicted\"", "\"rel_dev\"", "\"method\"", "\"seed\"",
                          "\"versions\""}) {
    const auto at = json.find(key);
    REQUIRE(at != std::string::npos);
    CHECK(at >= pos);
    pos = at;
  }
  CHECK(json.find("\"kappa\":0.29999999999999999") != std::string::npos);
  r.set_values({1.0, 0.0}, {0.0, 0.0});
  CHECK(std::isfinite(r.rel_dev));
}
