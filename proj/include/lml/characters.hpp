#pragma once

#include "lml/arithmetic.hpp"
#include "lml/fft.hpp"
#include "lml/special.hpp"

#include <complex>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace lml::chars {

/// Dirichlet characters modulo a prime q.
///
/// chi_j(g^k) = e(j k / (q-1)) for the least primitive root g. chi_j is even
/// iff j is even; the even primitive family is j = 2, 4, ..., q-3.
class CharacterTable {
public:
  explicit CharacterTable(const arith::PrimeModulus &modulus);
  // Rebuilds from a stored dlog table, verifying it against the generator.
  CharacterTable(const arith::PrimeModulus &modulus,
                 std::vector<std::uint32_t> dlog);

  static CharacterTable build(std::uint64_t q);

  std::uint64_t q() const { return modulus_.q(); }
  std::uint64_t generator() const { return modulus_.generator(); }
  const arith::PrimeModulus &modulus() const { return modulus_; }
  std::uint64_t order() const { return modulus_.q() - 1; }

  // k with g^k = n (mod q); n must be coprime to q.
  std::uint32_t dlog(std::uint64_t n) const;
  // Entry r holds dlog(r) for r in [1, q-1]; entry 0 is unused.
  std::span<const std::uint32_t> dlog_table() const { return dlog_; }

  static bool is_even(std::uint64_t j) { return j % 2 == 0; }
  std::vector<std::uint64_t> even_primitive_indices() const;
  std::uint64_t conjugate_index(std::uint64_t j) const {
    return j == 0 ? 0 : order() - j;
  }

  // chi_j(n), zero when q | n.
  cplx chi(std::uint64_t j, std::uint64_t n) const;

  // DFT over the folded half-length group used by the family engine.
  const Dft &half_dft() const { return *half_dft_; }

  // Binary cache: "LML1", u64 q, u64 g, (q-1) u32 dlog entries for
  // n = 1..q-1, then u64 FNV-1a of all preceding bytes. Little-endian.
  void save(const std::filesystem::path &path) const;
  static CharacterTable load(const std::filesystem::path &path);
  // Loads <dir>/chartable_<q>.bin when present and valid, else builds and
  // stores it. An empty dir disables caching.
  static CharacterTable load_or_build(std::uint64_t q,
                                      const std::filesystem::path &dir);

private:
  arith::PrimeModulus modulus_;
  std::vector<std::uint32_t> dlog_;
  std::shared_ptr<const Dft> half_dft_;
};

std::uint64_t fnv1a64(std::span<const unsigned char> bytes);

enum class FamilyTag { twisted_sum, l_pair, dirichlet_poly, abs_l_cubed, l_value };

std::string to_string(FamilyTag tag);

/// One complex value per even primitive character j = 2, 4, ..., q-3.
class FamilyValues {
public:
  FamilyValues(std::uint64_t q, std::vector<cplx> values, FamilyTag tag);

  std::uint64_t q() const { return q_; }
  FamilyTag tag() const { return tag_; }
  std::size_t size() const { return values_.size(); }
  std::span<const cplx> values() const { return values_; }
  static std::uint64_t index_at(std::size_t pos) { return 2 * (pos + 1); }
  // Value at character index j (even, 2 <= j <= q-3).
  cplx at(std::uint64_t j) const;

private:
  std::uint64_t q_;
  std::vector<cplx> values_;
  FamilyTag tag_;
};

// CSV with header `j,value_re,value_im`.
void write_family_csv(const std::filesystem::path &path,
                      const FamilyValues &values);
FamilyValues read_family_csv(const std::filesystem::path &path, std::uint64_t q,
                             FamilyTag tag);

// Sum over even primitive chi of chi(m) conj chi(n), by direct enumeration.
cplx orthogonality_direct(const CharacterTable &table, std::uint64_t m,
                          std::uint64_t n);
// (1/2) phi(q) [q | m-n] + (1/2) phi(q) [q | m+n] - 1.
long long orthogonality_closed_form(std::uint64_t q, std::uint64_t m,
                                    std::uint64_t n);
// Direct value, after checking it rounds to the closed form. Throws
// std::invalid_argument when q | mn and std::logic_error on disagreement.
cplx orthogonality_sum(const CharacterTable &table, std::uint64_t m,
                       std::uint64_t n);

// Even-family values of sum_k buckets[k] e(j k / (q-1)), buckets indexed by
// discrete logarithm.
std::vector<cplx> family_from_buckets(const CharacterTable &table,
                                      std::span<const cplx> buckets);

// For every even primitive j, sum_n c_n chi_j(n), where coeffs[i] = c_{i+1}.
FamilyValues family_twisted_sums(const CharacterTable &table,
                                 std::span<const cplx> coeffs);
// Same result by per-character summation; the oracle for the fast path.
FamilyValues family_twisted_sums_naive(const CharacterTable &table,
                                       std::span<const cplx> coeffs);

/// Truncated approximate-functional-equation kernel.
///
/// Writing N = mn, the two AFE terms share the factor m^{beta-alpha}:
///   m^{-1/2-a} n^{-1/2-b} V_+ + (q/pi)^{-(a+b)} m^{-1/2+b} n^{-1/2+a} V_-
///   = m^{b-a} [N^{-1/2-b} V_+(pi N/q) + (q/pi)^{-(a+b)} N^{-1/2+a} V_-(pi N/q)].
/// The kernel stores the bracket for N <= max_product(), where
/// pi N / q <= x_cut and x_cut is the decay cutoff of both V at the spec's
/// truncation_eps.
class AfeKernel {
public:
  static constexpr std::uint64_t default_max_products = std::uint64_t{1} << 26;

  AfeKernel(std::uint64_t q, const special::WeightSpec &spec,
            std::uint64_t max_products = default_max_products);

  std::uint64_t q() const { return q_; }
  const special::WeightSpec &spec() const { return spec_; }
  double x_cut() const { return x_cut_; }
  std::uint64_t max_product() const { return y_; }
  cplx second_term_factor() const { return second_factor_; }

  cplx product_weight(std::uint64_t N) const { return bracket_[N]; }
  cplx m_factor(std::uint64_t m) const;
  // Full pair weight (both terms).
  cplx pair_weight(std::uint64_t m, std::uint64_t n) const {
    return m_factor(m) * bracket_[m * n];
  }

  // Product count needed for q under spec, without building the kernel.
  static std::uint64_t required_products(std::uint64_t q,
                                         const special::WeightSpec &spec);

private:
  std::uint64_t q_;
  special::WeightSpec spec_;
  double x_cut_ = 0.0;
  std::uint64_t y_ = 0;
  cplx second_factor_;
  std::vector<cplx> bracket_; // index N, entry 0 unused
};

// L(1/2+alpha, chi) L(1/2+beta, conj chi) for the even family through the
// truncated AFE: pair weights bucketed by dlog m - dlog n, one DFT.
FamilyValues afe_pair_values(const CharacterTable &table,
                             const AfeKernel &kernel, unsigned workers = 1);
FamilyValues afe_pair_values(const CharacterTable &table,
                             const special::WeightSpec &spec,
                             unsigned workers = 1);

// L(s, chi_j) = q^{-s} sum_a chi_j(a) zeta(s, a/q), one character at a time.
cplx l_value_oracle(const CharacterTable &table, std::uint64_t j, cplx s);

// L(s, chi) for the whole even family: Hurwitz values bucketed by dlog and
// transformed at once.
FamilyValues family_l_values(const CharacterTable &table, cplx s,
                             unsigned workers = 1);

// L(1/2+alpha, chi) L(1/2+beta, conj chi) from family_l_values.
FamilyValues hurwitz_pair_values(const CharacterTable &table,
                                 const special::ShiftPair &shift,
                                 unsigned workers = 1);

// A(chi) = sum_a alpha_a chi(a) / sqrt(a) for the even family.
FamilyValues dirichlet_poly_values(const CharacterTable &table,
                                   const arith::CoefficientVector &coeffs);

} // namespace lml::chars
