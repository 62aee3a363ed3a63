#include "lml/characters.hpp"

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>

using namespace lml;
using namespace lml::chars;

namespace {

std::filesystem::path scratch_dir() {
  auto dir = std::filesystem::temp_directory_path() / "lml_test_chars";
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

double norm_rel(const FamilyValues &a, const FamilyValues &b) {
  double e = 0.0, s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    e = std::max(e, std::abs(a.values()[i] - b.values()[i]));
    s = std::max(s, std::abs(b.values()[i]));
  }
  return e / s;
}

} // namespace

TEST_CASE("character table basics") {
  const auto t = CharacterTable::build(13);
  CHECK(t.generator() == 2);
  CHECK(t.dlog(1) == 0);
  CHECK(t.dlog(2) == 1);
  CHECK(t.dlog(12) == 6); // -1 = g^{(q-1)/2}
  CHECK(t.even_primitive_indices() == std::vector<std::uint64_t>{2, 4, 6, 8, 10});
  CHECK(t.conjugate_index(4) == 8);
  for (std::uint64_t j = 0; j < 12; ++j) {
    // completely multiplicative, zero on multiples of q, parity from chi(-1)
    for (std::uint64_t m = 1; m < 30; ++m)
      for (std::uint64_t n = 1; n < 30; ++n)
        CHECK(std::abs(t.chi(j, m * n) - t.chi(j, m) * t.chi(j, n)) < 1e-13);
    CHECK(t.chi(j, 26) == cplx{});
    const double parity = t.chi(j, 12).real();
    CHECK(parity == doctest::Approx(CharacterTable::is_even(j) ? 1.0 : -1.0));
  }
  CHECK_THROWS_AS(t.dlog(26), std::invalid_argument);
}

TEST_CASE("orthogonality against the closed form") {
  for (std::uint64_t q : {7u, 13u, 31u}) {
    const auto t = CharacterTable::build(q);
    for (std::uint64_t m = 1; m <= 2 * q; ++m)
      for (std::uint64_t n = 1; n <= 2 * q; ++n) {
        if (m % q == 0 || n % q == 0)
          continue;
        const cplx d = orthogonality_direct(t, m, n);
        CHECK(std::abs(d - static_cast<double>(orthogonality_closed_form(q, m, n))) < 1e-9);
      }
    CHECK_THROWS_AS(orthogonality_sum(t, q, 1), std::invalid_argument);
  }
}

TEST_CASE("family engine equals per-character summation") {
  for (std::uint64_t q : {5u, 13u, 101u, 1009u}) {
    const auto t = CharacterTable::build(q);
    for (std::uint64_t seed = 0; seed < 3; ++seed) {
      const auto c = arith::unit_disk_samples(3 * q + 7, seed);
      CHECK(norm_rel(family_twisted_sums(t, c), family_twisted_sums_naive(t, c)) < 1e-12);
    }
  }
}

TEST_CASE("cache round trip and corruption handling") {
  const auto dir = scratch_dir();
  const auto built = CharacterTable::load_or_build(1009, dir);
  const auto path = dir / "chartable_1009.bin";
  REQUIRE(std::filesystem::exists(path));
  const auto loaded = CharacterTable::load(path);
  CHECK(loaded.generator() == built.generator());
  const auto c = arith::unit_disk_samples(500, 1);
  const auto a = family_twisted_sums(built, c), b = family_twisted_sums(loaded, c);
  for (std::size_t i = 0; i < a.size(); ++i)
    CHECK(a.values()[i] == b.values()[i]);

  {
    std::fstream f(path, std::ios::in | std::ios::out | std::ios::binary);
    f.seekp(40);
    f.put('\x7f');
  }
  CHECK_THROWS_AS(CharacterTable::load(path), std::runtime_error);
  const auto rebuilt = CharacterTable::load_or_build(1009, dir);
  CHECK(rebuilt.dlog(3) == built.dlog(3));
  CHECK_NOTHROW(CharacterTable::load(path));
}

TEST_CASE("family CSV round trip") {
  const auto dir = scratch_dir();
  const auto t = CharacterTable::build(101);
  const auto v = family_twisted_sums(t, arith::unit_disk_samples(60, 2));
  write_family_csv(dir / "fam.csv", v);
  const auto r = read_family_csv(dir / "fam.csv", 101, FamilyTag::twisted_sum);
  for (std::size_t i = 0; i < v.size(); ++i)
    CHECK(r.values()[i] == v.values()[i]);
  CHECK(r.at(2) == v.values()[0]);
  CHECK_THROWS_AS(v.at(3), std::out_of_range);
  CHECK_THROWS_AS(v.at(100), std::out_of_range);
}

TEST_CASE("Hurwitz L-values") {
  // q = 5: the single even primitive character is the Legendre symbol
  const auto t = CharacterTable::build(5);
  const auto fam = family_l_values(t, cplx{0.5, 0.0});
  REQUIRE(fam.size() == 1);
  CHECK(std::abs(fam.values()[0] - l_value_oracle(t, 2, 0.5)) < 1e-13);
  // reference from an arbitrary-precision evaluation
  CHECK(fam.values()[0].real() == doctest::Approx(0.2317509475040158).epsilon(1e-12));
  // L(2, chi) by summing the series directly
  cplx series{0.0, 0.0};
  for (std::uint64_t n = 200000; n >= 1; --n)
    series += t.chi(2, n) / (static_cast<double>(n) * static_cast<double>(n));
  CHECK(std::abs(l_value_oracle(t, 2, 2.0) - series) < 1e-9);
  // L(1, chi) for the Legendre symbol mod 5: 2 log(golden ratio) / sqrt 5
  const double phi = (1.0 + std::sqrt(5.0)) / 2.0;
  CHECK(l_value_oracle(t, 2, 1.0).real() ==
        doctest::Approx(2.0 * std::log(phi) / std::sqrt(5.0)).epsilon(1e-12));
  CHECK_THROWS_AS(l_value_oracle(t, 0, 1.0), std::invalid_argument);

  const auto t101 = CharacterTable::build(101);
  const cplx s{0.6, 3.0};
  const auto all = family_l_values(t101, s, 2);
  for (std::uint64_t j : {2u, 50u, 98u})
    CHECK(std::abs(all.at(j) - l_value_oracle(t101, j, s)) < 1e-11);
}

TEST_CASE("AFE pair values match Hurwitz products") {
  const std::uint64_t q = 61;
  const auto t = CharacterTable::build(q);
  const auto shift = special::ShiftPair::make({0.07, 0.4}, {-0.03, 1.1}, q);
  const auto spec = special::WeightSpec::gaussian(shift);
  const AfeKernel kernel(q, spec);
  CHECK(kernel.max_product() ==
        AfeKernel::required_products(q, spec));
  const auto afe = afe_pair_values(t, kernel, 3);
  for (auto j : t.even_primitive_indices()) {
    const cplx expected = l_value_oracle(t, j, 0.5 + shift.alpha) *
                          l_value_oracle(t, t.conjugate_index(j), 0.5 + shift.beta);
    CHECK(std::abs(afe.at(j) - expected) < 1e-8);
  }
  const auto hurwitz = hurwitz_pair_values(t, shift);
  CHECK(norm_rel(afe, hurwitz) < 1e-9);
  CHECK_THROWS_AS(AfeKernel(q, spec, 100), std::length_error);
}

TEST_CASE("worker count does not change results") {
  const auto t = CharacterTable::build(101);
  const auto spec = special::WeightSpec::gaussian(special::ShiftPair::inverse_log(101));
  const AfeKernel kernel(101, spec);
  const auto a = afe_pair_values(t, kernel, 1), b = afe_pair_values(t, kernel, 4);
  for (std::size_t i = 0; i < a.size(); ++i)
    CHECK(a.values()[i] == b.values()[i]);
}

TEST_CASE("Dirichlet polynomial values") {
  const auto t = CharacterTable::build(101);
  const auto c = arith::random_coeffs(101, 0.5, 4);
  const auto poly = dirichlet_poly_values(t, c);
  for (std::uint64_t j : {2u, 40u}) {
    cplx direct{0.0, 0.0};
    for (std::size_t a = 1; a <= c.length(); ++a)
      direct += c[a] * t.chi(j, a) / std::sqrt(static_cast<double>(a));
    CHECK(std::abs(poly.at(j) - direct) < 1e-13);
  }
  CHECK_THROWS_AS(dirichlet_poly_values(t, arith::unit_coeffs(103, 0.3)),
                  std::invalid_argument);
}
