#include "lml/offdiag.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <numeric>
#include <random>

using namespace lml;
using namespace lml::offdiag;

namespace {

// composite Simpson on [lo, hi]
template <class F> double simpson(F f, double lo, double hi, int panels) {
  const double h = (hi - lo) / panels;
  double s = f(lo) + f(hi);
  for (int i = 1; i < panels; ++i)
    s += (i % 2 ? 4.0 : 2.0) * f(lo + i * h);
  return s * h / 3.0;
}

double rel(cplx a, cplx b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

} // namespace

TEST_CASE("bump shape") {
  const Bump w;
  CHECK(w(1.0) == 0.0);
  CHECK(w(2.0) == 0.0);
  CHECK(w(0.5) == 0.0);
  CHECK(w(2.5) == 0.0);
  CHECK(w(Bump::kink()) == doctest::Approx(1.0));
  // first and second derivatives continuous across the ends and the kink
  for (double u : {1.0, Bump::kink(), 2.0}) {
    const double h = 1e-4;
    const double d_left = (w(u) - w(u - h)) / h, d_right = (w(u + h) - w(u)) / h;
    CHECK(std::abs(d_left - d_right) < 1e-3);
  }
  CHECK(Bump::mass() ==
        doctest::Approx(simpson(w, 1.0, 2.0, 200000)).epsilon(1e-10));
}

TEST_CASE("dyadic partition of unity") {
  for (double R : {1.0, 3.0, 1000.0, 123456.0}) {
    const auto blocks = dyadic_partition(R);
    CHECK(static_cast<double>(blocks.size()) <= 2.0 * std::log2(R) + 3.0);
    std::mt19937_64 eng(11);
    std::uniform_real_distribution<double> u(1.0, R);
    for (int i = 0; i < 1000; ++i) {
      const double x = u(eng);
      CHECK(std::abs(partition_sum(blocks, x) - 1.0) < 1e-12);
    }
    CHECK(std::abs(partition_sum(blocks, 1.0) - 1.0) < 1e-12);
    CHECK(std::abs(partition_sum(blocks, R) - 1.0) < 1e-12);
    const Bump w;
    for (const auto &b : blocks) {
      CHECK(w(b.M * 0.999 / b.M) == 0.0);
      CHECK(w(2.001 * b.M / b.M) == 0.0);
    }
  }
  CHECK_THROWS_AS(dyadic_partition(0.5), std::invalid_argument);
}

TEST_CASE("brute-force off-diagonal sum") {
  SUBCASE("no solutions below q") {
    const DyadicBox box{101, 1, 1, 20, 20};
    const auto one = RangeCoeffs::ones(1, 1);
    CHECK(offdiag_bruteforce(box, one, one, CongruenceSign::plus) == cplx{});
    CHECK(offdiag_bruteforce(box, one, one, CongruenceSign::minus) == cplx{});
  }
  SUBCASE("hand enumeration at q = 13") {
    const DyadicBox box{13, 1, 1, 13, 13};
    const auto one = RangeCoeffs::ones(1, 1);
    const Bump w;
    double plus = 0.0, minus = 0.0;
    for (int m = 14; m <= 25; ++m)
      for (int n = 14; n <= 25; ++n) {
        const double wt = w(m / 13.0) * w(n / 13.0) / 13.0;
        if (m != n && (m - n) % 13 == 0)
          plus += wt;
        if ((m + n) % 13 == 0)
          minus += wt;
      }
    CHECK(offdiag_bruteforce(box, one, one, CongruenceSign::plus).real() ==
          doctest::Approx(plus).epsilon(1e-14));
    CHECK(offdiag_bruteforce(box, one, one, CongruenceSign::minus).real() ==
          doctest::Approx(minus).epsilon(1e-14));
    CHECK(plus == 0.0); // no two distinct m, n in [14, 25] differ by 13
    CHECK(minus > 0.0);
  }
  SUBCASE("two enumerations agree") {
    for (const DyadicBox box : {DyadicBox{101, 2, 3, 150, 90}, DyadicBox{13, 4, 4, 40, 40},
                                DyadicBox{101, 8, 2, 64, 300}}) {
      const auto a = RangeCoeffs::unit_disk(box.a_first(), box.a_last(), 1);
      const auto b = RangeCoeffs::unit_disk(box.b_first(), box.b_last(), 2);
      for (auto sg : {CongruenceSign::plus, CongruenceSign::minus})
        CHECK(rel(offdiag_bruteforce(box, a, b, sg), offdiag_bruteforce_by_m(box, a, b, sg)) <
              1e-12);
    }
  }
  CHECK_THROWS_AS(offdiag_bruteforce({101, 1e5, 1, 1e4, 1}, RangeCoeffs::ones(1, 1),
                                     RangeCoeffs::ones(1, 1), CongruenceSign::plus),
                  std::length_error);
}

TEST_CASE("first secondary main term") {
  const DyadicBox box{101, 2, 2, 256, 256};
  SUBCASE("r support bound") {
    for (std::uint64_t a = 1; a <= 3; ++a)
      for (std::uint64_t b = 1; b <= 3; ++b)
        for (auto sg : {CongruenceSign::plus, CongruenceSign::minus}) {
          const auto rr = m1_r_range(box, a, b, sg);
          const double bound = 4.0 * (box.A * box.M + box.B * box.N) / 101.0;
          CHECK(std::abs(static_cast<double>(rr.lo)) <= bound);
          CHECK(std::abs(static_cast<double>(rr.hi)) <= bound);
          for (long long r : {rr.lo - 1, rr.lo - 5, rr.hi + 1, rr.hi + 5})
            CHECK(m1_integral(box, a, b, r, sg) == 0.0);
        }
  }
  SUBCASE("widening the r range is lossless") {
    const auto a = RangeCoeffs::unit_disk(2, 3, 5), b = RangeCoeffs::unit_disk(2, 3, 6);
    for (auto sg : {CongruenceSign::plus, CongruenceSign::minus})
      CHECK(secondary_main_m1(box, a, b, sg) == secondary_main_m1(box, a, b, sg, 7));
  }
  SUBCASE("single integral against Simpson") {
    const Bump w;
    const std::uint64_t a = 3, b = 2;
    const auto rr = m1_r_range(box, a, b, CongruenceSign::plus);
    const long long r = rr.lo + (rr.hi - rr.lo) / 2 == 0 ? 1 : rr.lo + (rr.hi - rr.lo) / 2;
    auto f = [&](double x) {
      return w(b * x / box.M) * w((a * b * x - 101.0 * r) / (b * box.N));
    };
    const double oracle = simpson(f, box.M / b, 2 * box.M / b, 400000);
    CHECK(oracle > 0.0);
    CHECK(m1_integral(box, a, b, r, CongruenceSign::plus) ==
          doctest::Approx(oracle).epsilon(1e-9));
  }
  SUBCASE("decomposition residual on a balanced box") {
    const auto a = RangeCoeffs::unit_disk(2, 3, 1), b = RangeCoeffs::unit_disk(2, 3, 2);
    const cplx S = offdiag_bruteforce(box, a, b, CongruenceSign::plus) +
                   offdiag_bruteforce(box, a, b, CongruenceSign::minus);
    const cplx p = secondary_main_m1(box, a, b, CongruenceSign::plus);
    const cplx m = secondary_main_m1(box, a, b, CongruenceSign::minus);
    CHECK(std::abs(S - p - m) < std::min(std::abs(p), std::abs(m)));
  }
}

TEST_CASE("second secondary main term") {
  const DyadicBox box{101, 2, 4, 300, 500};
  const auto a = RangeCoeffs::ones(2, 3), b = RangeCoeffs::ones(4, 7);
  const Bump w;
  double wm = 0.0, wn = 0.0;
  for (int m = 301; m < 600; ++m)
    wm += w(m / 300.0);
  for (int n = 501; n < 1000; ++n)
    wn += w(n / 500.0);
  const double norm = 1.0 / std::sqrt(2.0 * 4.0 * 300.0 * 500.0);
  const cplx m2 = secondary_main_m2(box, a, b);
  CHECK(m2.real() ==
        doctest::Approx(2 * norm * 2 * 4 * wm * (500.0 / 101.0) * Bump::mass()).epsilon(1e-13));
  // zero Poisson frequency: averaging the n-sum over residue classes mod q
  const double poisson = 2 * norm * 2 * 4 * wm * wn / 101.0;
  CHECK(m2.real() == doctest::Approx(poisson).epsilon(1e-6));
}

TEST_CASE("Kloosterman-fraction sums") {
  SUBCASE("single term") {
    BilinearPhaseSum s;
    s.q = 101;
    s.alpha = RangeCoeffs::ones(1, 1);
    s.beta = RangeCoeffs::ones(7, 7);
    s = kloosterman_fraction_sum(s);
    CHECK(s.terms == 1);
    CHECK(std::abs(s.value) == doctest::Approx(1.0));
    CHECK(s.ratio == doctest::Approx(1.0));
  }
  SUBCASE("agrees with a direct phase evaluation") {
    BilinearPhaseSum s;
    s.q = 1009;
    s.r_min = -3;
    s.r_max = 2;
    s.g_min = -2;
    s.g_max = 4;
    s.alpha = RangeCoeffs::unit_disk(5, 20, 1);
    s.beta = RangeCoeffs::unit_disk(3, 30, 2); // mixes histogram and direct paths
    const auto out = kloosterman_fraction_sum(s);
    cplx direct{0.0, 0.0};
    for (std::size_t a = 5; a <= 20; ++a)
      for (std::size_t b = 3; b <= 30; ++b) {
        if (std::gcd(a, b) != 1)
          continue;
        std::size_t ainv = 1;
        while ((a * ainv) % b != 1 % b)
          ++ainv;
        for (long long r = -3; r <= 2; ++r)
          for (long long g = -2; g <= 4; ++g) {
            if (r == 0 || g == 0)
              continue;
            const double phase = -static_cast<double>(1009LL * r * g * static_cast<long long>(ainv)) /
                                 static_cast<double>(b);
            const double th = 2 * std::numbers::pi * (phase - std::floor(phase));
            direct += s.alpha.at(a) * s.beta.at(b) * cplx{std::cos(th), std::sin(th)};
          }
      }
    CHECK(std::abs(out.value - direct) < 1e-10 * (1 + std::abs(direct)));
    CHECK(out.ratio <= 1.0 + 1e-12);

    auto conj = s;
    for (auto *v : {&conj.alpha.values, &conj.beta.values})
      for (auto &z : *v)
        z = std::conj(z);
    // conjugated coefficients with r -> -r conjugate the value
    conj.r_min = -2;
    conj.r_max = 3;
    CHECK(std::abs(kloosterman_fraction_sum(conj).value - std::conj(out.value)) < 1e-10);
  }
  SUBCASE("cancellation for unit coefficients") {
    BilinearPhaseSum s;
    s.q = 101;
    s.alpha = RangeCoeffs::ones(64, 127);
    s.beta = RangeCoeffs::ones(64, 127);
    s = kloosterman_fraction_sum(s);
    CHECK(s.ratio < 1.0);
    CHECK(s.ratio >= 0.0);
  }
  SUBCASE("budget") {
    BilinearPhaseSum s;
    s.q = 101;
    s.r_min = -100;
    s.r_max = 100;
    s.g_min = -100;
    s.g_max = 100;
    s.alpha = RangeCoeffs::ones(100, 199);
    s.beta = RangeCoeffs::ones(100, 199);
    CHECK_THROWS_AS(kloosterman_fraction_sum(s), std::length_error);
  }
}

TEST_CASE("cancellation exponent") {
  const auto fit = fit_cancellation_exponent(101, {5, 6, 7, 8});
  CHECK(fit.ratios.size() == 4);
  CHECK(fit.delta > 0.0);
}

TEST_CASE("sweep") {
  SweepConfig cfg;
  CHECK(sweep_csv(cancellation_sweep(cfg)) == std::string(sweep_header) + "\n");
  cfg.boxes = {{0, 2, 2, 256, 256}, {0, 1, 4, 512, 16}};
  const auto all = cancellation_sweep(cfg);
  REQUIRE(all.size() == 2);
  CHECK(all[0].balanced);
  CHECK_FALSE(all[1].balanced);
  cfg.regime = RegimeFilter::balanced;
  CHECK(cancellation_sweep(cfg).size() == 1);
  cfg.regime = RegimeFilter::unbalanced;
  CHECK(cancellation_sweep(cfg).size() == 1);
  cfg.regime = RegimeFilter::all;
  CHECK(sweep_csv(cancellation_sweep(cfg)) == sweep_csv(all));
  cfg.seed = 1;
  CHECK(sweep_csv(cancellation_sweep(cfg)) != sweep_csv(all));
  CHECK_THROWS_AS(parse_regime("mixed"), std::invalid_argument);
}
