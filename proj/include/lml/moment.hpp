#pragma once

#include "lml/arithmetic.hpp"
#include "lml/characters.hpp"
#include "lml/special.hpp"

#include <cstdint>
#include <map>
#include <string>
#include <utility>

namespace lml::moment {

inline constexpr const char *library_version = "1.0.0";

/// Comparison of an empirical family average against its predicted value.
struct MomentReport {
  std::uint64_t q = 0;
  double kappa = 0.0;
  special::ShiftPair shift;
  cplx empirical;
  cplx predicted;
  double abs_dev = 0.0;
  double rel_dev = 0.0;
  double wallclock = 0.0; // seconds; kept out of the JSON so reports diff cleanly
  std::string method;
  std::uint64_t seed = 0;

  void set_values(cplx empirical_value, cplx predicted_value);
  // Keys in fixed order, doubles with 17 significant digits.
  std::string to_json() const;
};

// How L(1/2+alpha, chi) L(1/2+beta, conj chi) is obtained for the family.
enum class PairMethod { afe, hurwitz, automatic };

std::string to_string(PairMethod method);

struct MomentOptions {
  PairMethod method = PairMethod::automatic;
  unsigned workers = 1;
  std::uint64_t max_products = chars::AfeKernel::default_max_products;
};

/// Per-modulus state reused across coefficient vectors: the character table,
/// pair values per shift, and congruence buckets per shift. Pair values do
/// not depend on the coefficients, so sweeps over coefficient vectors cost
/// one family transform each.
class MomentContext {
public:
  explicit MomentContext(chars::CharacterTable table, MomentOptions options = {});

  const chars::CharacterTable &table() const { return table_; }
  std::uint64_t q() const { return table_.q(); }
  const MomentOptions &options() const { return options_; }

  // Pair values for spec.shift; `used` receives the method actually run.
  const chars::FamilyValues &pair_values(const special::WeightSpec &spec,
                                         PairMethod *used = nullptr);

  struct CongruenceBuckets {
    std::vector<cplx> by_ratio; // index m * n^{-1} mod q, for q not dividing mn
    cplx total;                 // sum over by_ratio
    cplx both_divisible;        // q | m and q | n
    cplx one_divisible;         // exactly one of m, n divisible by q
  };
  // Truncated AFE weights bucketed by m n^{-1} mod q (inverse table, no
  // characters).
  const CongruenceBuckets &congruence_buckets(const special::WeightSpec &spec);

private:
  using Key = std::pair<std::pair<double, double>, std::pair<double, double>>;
  static Key key_of(const special::WeightSpec &spec);

  chars::CharacterTable table_;
  MomentOptions options_;
  std::map<Key, chars::FamilyValues> pairs_;
  std::map<Key, PairMethod> pair_methods_;
  std::map<Key, CongruenceBuckets> buckets_;
};

// (1/phi+) sum over even primitive chi of L(1/2+a, chi) L(1/2+b, conj chi)
// |A(chi)|^2.
cplx empirical_moment(MomentContext &ctx, const arith::CoefficientVector &coeffs,
                      const special::WeightSpec &spec);
cplx empirical_moment(std::uint64_t q, const arith::CoefficientVector &coeffs,
                      const special::WeightSpec &spec,
                      const MomentOptions &options = {});

inline constexpr std::uint64_t congruence_max_q = 400;

// Same average expanded through the even-family orthogonality relation into
// congruence conditions a m = +-b n (mod q), truncated exactly like the AFE.
// include_multiples keeps terms with q | am or q | bn in the congruence sum,
// which the character side cannot see; it exists as a negative control.
cplx congruence_moment(MomentContext &ctx, const arith::CoefficientVector &coeffs,
                       const special::WeightSpec &spec,
                       bool include_multiples = false);
cplx congruence_moment(std::uint64_t q, const arith::CoefficientVector &coeffs,
                       const special::WeightSpec &spec,
                       bool include_multiples = false);

// (Gamma((1/2-a)/2) Gamma((1/2-b)/2)) / (Gamma((1/2+a)/2) Gamma((1/2+b)/2)).
cplx gamma_ratio(cplx alpha, cplx beta);

// Sums over d, a, b with gcd(a, b) = 1 and da, db in the support:
//   first:  alpha_{da} conj(alpha_{db}) / (d a^{1+beta} b^{1+alpha})
//   second: alpha_{da} conj(alpha_{db}) / (d a^{1-alpha} b^{1-beta})
std::pair<cplx, cplx> coprime_double_sums(const arith::CoefficientVector &coeffs,
                                          cplx alpha, cplx beta);

// zeta(1+a+b) S1 + (q/pi)^{-(a+b)} gamma_ratio zeta(1-a-b) S2.
// Requires |alpha + beta| >= 1e-4 / log q.
cplx twisted_main_term(std::uint64_t q, const special::ShiftPair &shift,
                       const arith::CoefficientVector &coeffs);

struct CentralLimit {
  cplx value;
  double last_change = 0.0; // |last two diagonal entries of the Neville table|
};
// Limit of twisted_main_term as alpha = beta = s -> 0 by polynomial
// extrapolation through s_j = 2^{-j} 0.1 / log q, j = 0..6. Throws
// std::runtime_error when successive estimates stop contracting.
CentralLimit central_main_term(std::uint64_t q,
                               const arith::CoefficientVector &coeffs);

// Unit-coefficient central limit: log(q/pi) + 2 gamma + psi(1/4).
double central_unit_limit(std::uint64_t q);

// Diagonal contribution: sum_{d,a,b coprime} alpha_{da} conj(alpha_{db}) /
// (d a^{1+beta} b^{1+alpha}) times the contour integral
//   (1/2 pi i) int X_+(s) (q / pi a b)^s zeta(1 + a + b + 2s) ds / s
// on Re s = spec.contour_sigma.
cplx diagonal_term(std::uint64_t q, const arith::CoefficientVector &coeffs,
                   const special::WeightSpec &spec);
// The same quantity by enumerating the pairs a m = b n directly with V_+.
cplx diagonal_term_direct(std::uint64_t q, const arith::CoefficientVector &coeffs,
                          const special::WeightSpec &spec);

// (1/phi+) sum over the even family of |L(1/2, chi)|^3.
double third_moment(const chars::CharacterTable &table, unsigned workers = 1);
std::vector<double> third_moment_terms(const chars::CharacterTable &table,
                                       unsigned workers = 1);

struct UniformityInstance {
  MomentReport report;
  double ratio = 0.0; // sum / (q (log q)^{9/4})
  std::size_t poly_length = 0;
};
// sum over the even family of |L(s, chi)|^2 |sum_{a<=x} d_{1/2}(a) chi(a)
// a^{-s-iv}|^2 with s = 1/2 + A/log q + i t and x = floor(q^{1/2+1/300}).
UniformityInstance twisted_uniformity_instance(const chars::CharacterTable &table,
                                               double v, double t,
                                               double A = 1.0,
                                               unsigned workers = 1);

} // namespace lml::moment
