#pragma once

#include "lml/arithmetic.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace lml::offdiag {

// 6t^5 - 15t^4 + 10t^3 on [0, 1], clamped outside.
double smoothstep5(double t);

/// Bump supported on [1, 2], C^2, built in log scale so that half-octave
/// translates sum to one:
///   W(u) = S(2 log2 u)           on [1, sqrt 2]
///   W(u) = 1 - S(2 log2 u - 1)   on [sqrt 2, 2]
struct Bump {
  double operator()(double u) const;
  // Interior point where W switches pieces.
  static double kink() { return 1.4142135623730951; }
  // Integral of W over [1, 2].
  static double mass();
};

struct PartitionBlock {
  int k = 0;      // M = 2^{k/2}
  double M = 1.0;
};

// Blocks M = 2^{k/2}, k = -1 .. floor(2 log2 range_max), whose translates
// W(x/M) sum to 1 on [1, range_max].
std::vector<PartitionBlock> dyadic_partition(double range_max);
double partition_sum(const std::vector<PartitionBlock> &blocks, double x);

/// Box scales. Index ranges are the integers in [A, 2A), [B, 2B); the bumps
/// W(m/M), W(n/N) restrict m, n to (M, 2M), (N, 2N).
struct DyadicBox {
  std::uint64_t q = 0;
  double A = 1, B = 1, M = 1, N = 1;

  std::size_t a_first() const;
  std::size_t a_last() const; // inclusive
  std::size_t b_first() const;
  std::size_t b_last() const;
  double normalizer() const; // 1 / sqrt(ABMN)
  bool balanced() const;     // max(AM, BN) <= 4 min(AM, BN)
  void validate() const;
};

inline constexpr double enumeration_budget = 1e8;

// Coefficients on a contiguous index range.
struct RangeCoeffs {
  std::size_t first = 1;
  std::vector<cplx> values;

  cplx at(std::size_t i) const {
    return i >= first && i < first + values.size() ? values[i - first] : cplx{};
  }
  std::size_t last() const { return first + values.size() - 1; }

  static RangeCoeffs ones(std::size_t first, std::size_t last);
  static RangeCoeffs unit_disk(std::size_t first, std::size_t last,
                               std::uint64_t seed);
};

enum class CongruenceSign { plus, minus };

// (1/sqrt(ABMN)) sum over a m = +-b n (mod q), a m != b n of
// alpha_a beta_b W(m/M) W(n/N), solving the congruence for n.
cplx offdiag_bruteforce(const DyadicBox &box, const RangeCoeffs &alpha,
                        const RangeCoeffs &beta, CongruenceSign sign);
// Same sum solving for m instead; an independent enumeration.
cplx offdiag_bruteforce_by_m(const DyadicBox &box, const RangeCoeffs &alpha,
                             const RangeCoeffs &beta, CongruenceSign sign);

// Integral over x of W(b x / M) W(+-(a b x - q r) / (b N)), adaptive
// Gauss-Kronrod on the support split at the bump kinks. Zero when the
// supports do not meet.
double m1_integral(const DyadicBox &box, std::uint64_t a, std::uint64_t b,
                   long long r, CongruenceSign sign);

// r with possibly nonzero integrand for the reduced pair (a, b), r != 0.
struct RRange {
  long long lo = 0, hi = -1;
};
RRange m1_r_range(const DyadicBox &box, std::uint64_t a, std::uint64_t b,
                  CongruenceSign sign);

// (1/sqrt(ABMN)) sum over index pairs (da, db) with gcd(a, b) = 1 and r != 0
// of alpha_{da} beta_{db} m1_integral(a, b, r). extra_r widens the r range
// on both sides; the added terms vanish identically.
cplx secondary_main_m1(const DyadicBox &box, const RangeCoeffs &alpha,
                       const RangeCoeffs &beta, CongruenceSign sign,
                       long long extra_r = 0);

// (2/sqrt(ABMN)) sum alpha_a beta_b sum_m W(m/M) (N/q) mass(W).
cplx secondary_main_m2(const DyadicBox &box, const RangeCoeffs &alpha,
                       const RangeCoeffs &beta);

/// sum over r, g (nonzero, in the given ranges) and coprime a in
/// [a_first, a_last], b in [b_first, b_last] of alpha_a beta_b e(-q r g a^{-1} / b),
/// a^{-1} the inverse of a mod b.
struct BilinearPhaseSum {
  std::uint64_t q = 0;
  long long r_min = 1, r_max = 1;
  long long g_min = 1, g_max = 1;
  RangeCoeffs alpha, beta;

  cplx value;
  double trivial_bound = 0.0;
  double ratio = 0.0;
  std::uint64_t terms = 0;
};

inline constexpr std::uint64_t phase_sum_budget = 10'000'000;

std::uint64_t phase_sum_terms(const BilinearPhaseSum &spec);
// Fills value, trivial_bound, ratio, terms. Throws std::length_error over
// phase_sum_budget.
BilinearPhaseSum kloosterman_fraction_sum(BilinearPhaseSum spec);

struct ExponentFit {
  std::vector<double> scales;   // A = B
  std::vector<double> ratios;
  double delta = 0.0;           // ratio ~ C (AB)^{-delta}
  double log_constant = 0.0;
};
// Unit coefficients on [A, 2A) x [A, 2A), r = g = 1, A = 2^e for e in
// exponents; least-squares slope of log ratio against log(AB).
ExponentFit fit_cancellation_exponent(std::uint64_t q,
                                      const std::vector<int> &exponents);

enum class RegimeFilter { all, balanced, unbalanced };
RegimeFilter parse_regime(const std::string &s);

struct SweepConfig {
  std::uint64_t q = 101;
  std::vector<DyadicBox> boxes; // q is taken from the config
  std::uint64_t seed = 0;
  bool unit_coefficients = false;
  RegimeFilter regime = RegimeFilter::all;
};

struct SweepRow {
  DyadicBox box;
  bool balanced = false;
  cplx S, m1_plus, m1_minus, m2;
  double klo_ratio = 0.0;
  std::uint64_t klo_terms = 0;
  std::uint64_t seed = 0;
};

inline constexpr const char *sweep_header =
    "q,A,B,M,N,regime,S_re,S_im,M1p_re,M1p_im,M1m_re,M1m_im,M2_re,M2_im,"
    "klo_ratio,seed";

// r and g extents for the phase sum attached to a box:
// R = max(1, floor((AM + BN)/q)), G = max(1, ceil((AM + BN)/(MN))), then
// shrunk (G first) until the term count fits phase_sum_budget.
void phase_ranges(const DyadicBox &box, long long &R, long long &G);

// A, B in {1, 2, 4} and M, N in {64, 256, 1024}; 81 boxes with q unset.
std::vector<DyadicBox> standard_grid();
std::vector<SweepRow> cancellation_sweep(const SweepConfig &config);
std::string sweep_csv(const std::vector<SweepRow> &rows);
void write_sweep_csv(const std::filesystem::path &path,
                     const std::vector<SweepRow> &rows);

} // namespace lml::offdiag
