#include "lml/fft.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace lml;

namespace {

std::vector<cplx> naive_dft(const std::vector<cplx> &x, int sign) {
  const std::size_t n = x.size();
  std::vector<cplx> out(n);
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t k = 0; k < n; ++k) {
      const double th = sign * 2.0 * std::numbers::pi *
                        static_cast<double>((j * k) % n) / static_cast<double>(n);
      out[j] += x[k] * cplx{std::cos(th), std::sin(th)};
    }
  return out;
}

std::vector<cplx> random_vector(std::size_t n, unsigned seed) {
  std::mt19937_64 eng(seed);
  std::normal_distribution<double> d;
  std::vector<cplx> v(n);
  for (auto &z : v)
    z = {d(eng), d(eng)};
  return v;
}

double max_err(const std::vector<cplx> &a, const std::vector<cplx> &b) {
  double e = 0.0, s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    e = std::max(e, std::abs(a[i] - b[i]));
    s = std::max(s, std::abs(b[i]));
  }
  return e / s;
}

} // namespace

TEST_CASE("unit roots are exact at rational quarter points") {
  CHECK(unit_root(0, 7) == cplx{1.0, 0.0});
  CHECK(std::abs(unit_root(5, 20) - cplx{0.0, 1.0}) < 1e-16);
  CHECK(std::abs(unit_root(-1, 4) - cplx{0.0, -1.0}) < 1e-16);
  CHECK(std::abs(unit_root(1000000007, 1000000006) - unit_root(1, 1000000006)) < 1e-15);
}

TEST_CASE("transforms agree with the naive DFT") {
  for (std::size_t n : {1u, 2u, 3u, 8u, 12u, 49u, 64u, 97u, 500u, 1004u}) {
    const auto x = random_vector(n, static_cast<unsigned>(n));
    const Dft dft(n);
    for (int sign : {+1, -1})
      CHECK(max_err(dft(x, sign), naive_dft(x, sign)) < 1e-12);
  }
  CHECK_THROWS_AS(Radix2Fft(12), std::invalid_argument);
  CHECK_THROWS_AS(Dft(0), std::invalid_argument);
}

TEST_CASE("round trip at a family-sized length") {
  const std::size_t n = 50001; // (100003 - 1) / 2
  const auto x = random_vector(n, 3);
  const Dft dft(n);
  auto y = dft(dft(x, +1), -1);
  for (auto &z : y)
    z /= static_cast<double>(n);
  CHECK(max_err(y, x) < 1e-12);
  // single-bin check against a direct sum
  const auto f = dft(x, +1);
  cplx direct{0.0, 0.0};
  for (std::size_t k = 0; k < n; ++k)
    direct += x[k] * unit_root(static_cast<long long>((17 * k) % n), static_cast<long long>(n));
  CHECK(std::abs(f[17] - direct) < 1e-9 * std::abs(direct));
}
