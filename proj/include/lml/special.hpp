#pragma once

#include <complex>
#include <cstdint>
#include <string>
#include <vector>

namespace lml {

using cplx = std::complex<double>;

inline constexpr double euler_gamma = 0.57721566490153286060651209008240243;

namespace special {

// log Gamma(s) for s off the nonpositive integers. The imaginary part is
// not tied to the principal branch; only exp(log_gamma) is meaningful.
cplx log_gamma(cplx s);

// Gamma(s); throws std::domain_error at nonpositive integers.
cplx complex_gamma(cplx s);

cplx digamma(cplx s);

struct HurwitzOptions {
  int shift_terms = 30;    // N terms summed before Euler-Maclaurin
  int bernoulli_terms = 12; // corrections B_2 .. B_{2J}
};

// zeta(s, a) for 0 < a <= 1, s != 1, via Euler-Maclaurin. The shift grows
// with |Im s| so the Bernoulli tail keeps converging.
cplx hurwitz_zeta(cplx s, double a, const HurwitzOptions &opt = {});

cplx riemann_zeta(cplx s);

/// Complex shifts (alpha, beta) of the central point.
struct ShiftPair {
  cplx alpha;
  cplx beta;
  double logq = 0.0;

  // Validates |Re| <= 10/log q and |Im| <= 10 log q.
  static ShiftPair make(cplx alpha, cplx beta, std::uint64_t q);
  // alpha = beta = 1/log q.
  static ShiftPair inverse_log(std::uint64_t q);
  static ShiftPair central(std::uint64_t q) { return make(0.0, 0.0, q); }

  // (alpha, beta) -> (conj beta, conj alpha).
  ShiftPair conjugate_swap() const { return {std::conj(beta), std::conj(alpha), logq}; }
  // max(1, |Im alpha|, |Im beta|)
  double height() const;
};

enum class GMode { gaussian, pinned };
enum class Sign { plus, minus };

std::string to_string(GMode mode);

struct WeightSpec {
  GMode g_mode = GMode::gaussian;
  ShiftPair shift;
  double contour_sigma = 1.0;
  double contour_cut = 12.0;
  int quad_points = 32; // Gauss-Legendre nodes per unit length in Im s
  double truncation_eps = 1e-12;

  static WeightSpec gaussian(const ShiftPair &shift) {
    WeightSpec w;
    w.shift = shift;
    return w;
  }
  // Throws std::invalid_argument for inconsistent settings.
  void validate() const;
};

// G(s): e^{s^2}, or ((c^2 - s^2)/c^2) e^{s^2} with c = (alpha+beta)/2.
cplx g_function(cplx s, const WeightSpec &spec);

// X_+(s) = G(s) Gamma((1/2+alpha+s)/2) Gamma((1/2+beta+s)/2)
//          / (Gamma((1/2+alpha)/2) Gamma((1/2+beta)/2)),
// X_-(s) the same with -alpha, -beta in the numerator arguments.
cplx x_factor(cplx s, Sign sign, const WeightSpec &spec);

/// Nodes and weights for int f(t) dt on [-cut, cut], unit panels of
/// Gauss-Legendre rules.
struct LineQuadrature {
  std::vector<double> t;
  std::vector<double> w;

  LineQuadrature(double cut, int nodes_per_unit);
};

// Gauss-Legendre nodes/weights on [-1, 1].
void gauss_legendre(int n, std::vector<double> &x, std::vector<double> &w);

/// V_±(x) = (1/2 pi i) int_{(sigma)} X_±(s) x^{-s} ds/s by quadrature.
class VWeight {
public:
  VWeight(const WeightSpec &spec, Sign sign);

  cplx operator()(double x) const;
  // x V'(x)
  cplx log_derivative(double x) const;
  // Smallest X with a guaranteed |V(x)| <= eps for all x >= X, from
  // |V(x)| <= x^{-sigma} (1/2pi) int |X(sigma+it)| / |sigma+it| dt
  // minimised over sigma.
  double decay_cutoff(double eps) const;

  Sign sign() const { return sign_; }
  const WeightSpec &spec() const { return spec_; }

private:
  WeightSpec spec_;
  Sign sign_;
  std::vector<cplx> nodes_;   // s_k
  std::vector<cplx> factors_; // w_k X(s_k) / (2 pi s_k)
  // Line left of s = 0 used for x < 1, where the right line loses
  // everything to cancellation. Empty when a pole blocks the shift.
  std::vector<cplx> left_nodes_, left_factors_;
  cplx residue_{};
};

cplx v_weight(double x, Sign sign, const WeightSpec &spec);

/// Cubic Hermite interpolation of V on a geometric grid with ratio
/// 1 + 2^-7 covering [x_lo, x_hi].
class VInterpolator {
public:
  VInterpolator(const VWeight &v, double x_lo, double x_hi);

  // Evaluation by log x. Outside the grid the value is V at the nearest end
  // on the left and 0 on the right.
  cplx at_log(double log_x) const;
  cplx operator()(double x) const;

  double x_lo() const;
  double x_hi() const;
  std::size_t grid_size() const { return values_.size(); }

private:
  double u0_, h_;
  std::vector<cplx> values_;
  std::vector<cplx> slopes_; // dV/du scaled by h
};

} // namespace special
} // namespace lml
