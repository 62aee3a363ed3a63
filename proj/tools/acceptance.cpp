// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// nonzero if any fails. Pass criterion numbers as arguments to run a subset.

#include "lml/arithmetic.hpp"
#include "lml/characters.hpp"
#include "lml/moment.hpp"
#include "lml/offdiag.hpp"
#include "lml/parallel.hpp"
#include "lml/special.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numeric>
#include <numbers>
#include <set>
#include <string>
#include <vector>

using namespace lml;
using special::ShiftPair;
using special::WeightSpec;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

double rel(cplx a, cplx b) { return std::abs(a - b) / std::abs(b); }

double spread(const std::vector<double> &v) {
  const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
  return *hi / *lo;
}

struct Outcome {
  bool pass;
  std::string detail;
};

std::string fmt(const char *f, double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, x);
  return buf;
}

Outcome exact_identity() {
  const auto t0 = Clock::now();
  double worst = 0.0;
  for (std::uint64_t q : {13u, 101u}) {
    moment::MomentContext ctx(chars::CharacterTable::build(q), {moment::PairMethod::afe});
    for (const auto &shift : {ShiftPair::central(q), ShiftPair::inverse_log(q)}) {
      const auto spec = WeightSpec::gaussian(shift);
      for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const auto c = arith::random_coeffs(q, 0.3, seed);
        worst = std::max(worst, rel(moment::empirical_moment(ctx, c, spec),
                                    moment::congruence_moment(ctx, c, spec)));
      }
    }
  }
  const double secs = seconds_since(t0);
  return {worst <= 1e-8 && secs <= 120.0,
          fmt("max rel dev %.3g", worst) + fmt(" (tol 1e-8), %.1fs", secs)};
}

Outcome afe_vs_oracle() {
  const auto t0 = Clock::now();
  const auto table = chars::CharacterTable::build(101);
  const auto pairs =
      chars::afe_pair_values(table, WeightSpec::gaussian(ShiftPair::central(101)));
  double worst = 0.0;
  std::size_t count = 0;
  for (auto j : table.even_primitive_indices()) {
    const cplx expect = chars::l_value_oracle(table, j, 0.5) *
                        chars::l_value_oracle(table, 100 - j, 0.5);
    worst = std::max(worst, std::abs(pairs.at(j) - expect));
    ++count;
  }
  const double secs = seconds_since(t0);
  return {count == 49 && worst <= 1e-6 && secs <= 60.0,
          std::to_string(count) + " characters" + fmt(", max abs dev %.3g", worst) +
              fmt(" (tol 1e-6), %.1fs", secs)};
}

Outcome second_moment_trend() {
  const auto t0 = Clock::now();
  std::vector<double> devs;
  std::string detail = "rel_dev";
  for (std::uint64_t q : {1009u, 10007u, 100003u}) {
    moment::MomentContext ctx(chars::CharacterTable::build(q),
                              {moment::PairMethod::automatic, default_workers()});
    const auto shift = ShiftPair::inverse_log(q);
    const auto c = arith::d_half_coeffs(q, 0.3);
    const cplx emp = moment::empirical_moment(ctx, c, WeightSpec::gaussian(shift));
    const cplx pred = moment::twisted_main_term(q, shift, c);
    devs.push_back(rel(emp, pred));
    detail += " " + std::to_string(q) + fmt(":%.4g", devs.back());
  }
  const bool decreasing = devs[0] > devs[1] && devs[1] > devs[2];
  const double secs = seconds_since(t0);
  return {decreasing && devs[2] <= 0.05 && secs <= 900.0,
          detail + (decreasing ? " (decreasing" : " (not decreasing") +
              ", ceiling 0.05)" + fmt(", %.1fs", secs)};
}

Outcome orthogonality() {
  long long checked = 0, bad = 0;
  for (std::uint64_t q : {7u, 13u, 101u}) {
    const auto table = chars::CharacterTable::build(q);
    for (std::uint64_t m = 1; m <= 2 * q; ++m)
      for (std::uint64_t n = 1; n <= 2 * q; ++n) {
        if (std::gcd(m, n) != 1 || m % q == 0 || n % q == 0)
          continue;
        const cplx d = chars::orthogonality_direct(table, m, n);
        const long long c = chars::orthogonality_closed_form(q, m, n);
        if (std::llround(d.real()) != c || std::abs(d.real() - c) > 1e-6 ||
            std::abs(d.imag()) > 1e-6)
          ++bad;
        ++checked;
      }
  }
  return {bad == 0,
          std::to_string(checked) + " pairs, " + std::to_string(bad) + " disagreements"};
}

Outcome central_limit() {
  double worst = 0.0;
  for (std::uint64_t q : {101u, 1009u}) {
    const double target = std::log(q / std::numbers::pi) + 2.0 * euler_gamma +
                          special::digamma(cplx{0.25, 0.0}).real();
    const auto lim = moment::central_main_term(q, arith::unit_coeffs(q, 0.3));
    worst = std::max(worst, std::abs(lim.value - target));
  }
  return {worst <= 1e-6, fmt("max abs dev %.3g (tol 1e-6)", worst)};
}

Outcome third_moment_band() {
  const auto t0 = Clock::now();
  std::vector<double> norm;
  std::string detail = "normalized";
  for (std::uint64_t q : {1009u, 10007u, 100003u}) {
    const auto table = chars::CharacterTable::build(q);
    norm.push_back(moment::third_moment(table, default_workers()) /
                   std::pow(std::log(static_cast<double>(q)), 2.25));
    detail += " " + std::to_string(q) + fmt(":%.4g", norm.back());
  }
  const double s = spread(norm), secs = seconds_since(t0);
  return {s <= 3.0 && secs <= 900.0,
          detail + fmt(", max/min %.3g (tol 3)", s) + fmt(", %.1fs", secs)};
}

Outcome euler_product_growth() {
  std::vector<double> norm;
  std::string detail = "normalized";
  for (std::size_t x : {1000u, 10000u, 100000u}) {
    norm.push_back(arith::lcm_weighted_sum(x) /
                   std::pow(std::log(static_cast<double>(x)), 1.25));
    detail += " " + std::to_string(x) + fmt(":%.4g", norm.back());
  }
  const double s = spread(norm);
  return {s <= 2.0, detail + fmt(", max/min %.3g (tol 2)", s)};
}

double max_rel(const chars::FamilyValues &a, const chars::FamilyValues &b) {
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    num = std::max(num, std::abs(a.values()[i] - b.values()[i]));
    den = std::max(den, std::abs(b.values()[i]));
  }
  return num / den;
}

Outcome family_engine() {
  double worst = 0.0;
  for (std::uint64_t q : {1009u, 2003u}) {
    const auto table = chars::CharacterTable::build(q);
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
      const auto c = arith::unit_disk_samples(q - 1, 1000 * q + seed);
      worst = std::max(worst, max_rel(chars::family_twisted_sums(table, c),
                                      chars::family_twisted_sums_naive(table, c)));
    }
  }
  const auto table = chars::CharacterTable::build(100003);
  const auto c = arith::unit_disk_samples(100002, 7);
  auto t0 = Clock::now();
  const auto fast = chars::family_twisted_sums(table, c);
  const double t_fast = seconds_since(t0);
  t0 = Clock::now();
  const auto naive = chars::family_twisted_sums_naive(table, c);
  const double t_naive = seconds_since(t0);
  const double speedup = t_naive / t_fast;
  const double big = max_rel(fast, naive);
  return {worst <= 1e-9 && big <= 1e-9 && speedup >= 20.0,
          fmt("max rel dev %.3g over 100 vectors", worst) +
              fmt(" (tol 1e-9), q=100003 dev %.3g", big) +
              fmt(", speedup %.0fx (need 20x)", speedup)};
}

Outcome offdiag_decomposition() {
  const auto t0 = Clock::now();
  offdiag::SweepConfig one;
  one.boxes = {{0, 2, 2, 256, 256}};
  const auto row = offdiag::cancellation_sweep(one).at(0);
  const double resid = std::abs(row.S - row.m1_plus - row.m1_minus);
  const double floor = std::min(std::abs(row.m1_plus), std::abs(row.m1_minus));

  offdiag::SweepConfig grid;
  grid.boxes = offdiag::standard_grid();
  std::size_t eligible = 0, bad = 0;
  double worst = 0.0;
  for (const auto &r : offdiag::cancellation_sweep(grid)) {
    if (r.klo_terms < 1000)
      continue;
    ++eligible;
    worst = std::max(worst, r.klo_ratio);
    if (!(r.klo_ratio < 1.0))
      ++bad;
  }
  const double secs = seconds_since(t0);
  return {row.balanced && resid < floor && bad == 0 && eligible > 0 && secs <= 300.0,
          fmt("box (101,2,2,256,256) residual %.3g", resid) +
              fmt(" vs min|M1| %.3g; ", floor) + std::to_string(eligible) +
              " swept boxes with >=1e3 terms" + fmt(", max ratio %.3g", worst) +
              fmt(", %.1fs", secs)};
}

} // namespace

int main(int argc, char **argv) {
  const std::vector<std::pair<const char *, std::function<Outcome()>>> criteria = {
      {"exact identity", exact_identity},
      {"AFE against L-value oracle", afe_vs_oracle},
      {"twisted second moment trend", second_moment_trend},
      {"orthogonality", orthogonality},
      {"central main-term limit", central_limit},
      {"third moment band", third_moment_band},
      {"Euler product growth", euler_product_growth},
      {"family engine equivalence and speed", family_engine},
      {"off-diagonal decomposition", offdiag_decomposition},
  };
  std::set<int> wanted;
  for (int i = 1; i < argc; ++i)
    wanted.insert(std::atoi(argv[i]));

  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i + 1);
    if (!wanted.empty() && !wanted.count(id))
      continue;
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception &e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    failures += !o.pass;
    std::printf("criterion %d: %s  %s: %s\n", id, o.pass ? "PASS" : "FAIL",
                criteria[i].first, o.detail.c_str());
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
