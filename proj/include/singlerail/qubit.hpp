// qubit.hpp
// Imperfect single-rail optical qubits: the (alpha, beta, E) value type, its
// 2x2 density-matrix form on span{|0>,|1>}, the generalized efficiency figure
// of merit, and the convexity machinery (mixtures and the closed-form second
// derivative along a mixing path).

#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <stdexcept>

namespace singlerail {

using cdouble = std::complex<double>;

inline constexpr double norm_tolerance = 1e-12;
// |beta|^2 * E below this collapses to the canonical vacuum (1, 0, 0).
inline constexpr double vacuum_threshold = 1e-14;
// Slack allowed on rho00*rho11 - |rho01|^2 for ingested matrices; tomography-style
// inputs carry noise at this scale.
inline constexpr double psd_tolerance = 1e-10;
// Equality tolerance for generalized-efficiency comparisons.
inline constexpr double efficiency_equal_tolerance = 1e-12;

class invalid_state_error : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Mixed state E|psi><psi| + (1-E)|0><0| with |psi> = alpha|0> + beta|1>.
// Canonical form: unit amplitudes, the first nonzero amplitude real and
// nonnegative, and the vacuum stored as exactly (1, 0, 0).
struct SingleRailQubit {
  cdouble alpha{1.0, 0.0};
  cdouble beta{0.0, 0.0};
  double efficiency{0.0};

  bool is_vacuum() const { return std::norm(beta) * efficiency < vacuum_threshold; }
  bool is_pure() const { return efficiency == 1.0 && std::norm(beta) > 0.0; }
};

// Normalizes amplitudes, fixes the global phase, and collapses near-vacuum
// values to the canonical vacuum. Throws invalid_state_error on a zero
// amplitude vector or an efficiency outside [0, 1].
inline SingleRailQubit canonicalize(cdouble alpha_raw, cdouble beta_raw,
                                    double efficiency_raw) {
  const double n2 = std::norm(alpha_raw) + std::norm(beta_raw);
  if (!(n2 > 0.0) || !std::isfinite(n2)) {
    throw invalid_state_error("single-rail amplitudes must not both vanish");
  }
  if (!(efficiency_raw >= -norm_tolerance && efficiency_raw <= 1.0 + norm_tolerance)) {
    throw invalid_state_error("efficiency must lie in [0, 1]");
  }
  const double e = std::clamp(efficiency_raw, 0.0, 1.0);
  const double inv = 1.0 / std::sqrt(n2);
  cdouble a = alpha_raw * inv;
  cdouble b = beta_raw * inv;
  if (std::norm(b) * e < vacuum_threshold) {
    return SingleRailQubit{};
  }
  // Global phase: make the first amplitude of non-negligible magnitude real
  // nonnegative. An |alpha| below the floor keeps its (physically irrelevant)
  // residual phase rather than polluting beta with it.
  constexpr double amp_floor = 1e-13;
  if (std::abs(a) >= amp_floor) {
    const cdouble phase = std::conj(a) / std::abs(a);
    b *= phase;
    a = std::abs(a);
  } else {
    const cdouble phase = std::conj(b) / std::abs(b);
    a *= phase;
    b = std::abs(b);
  }
  const double renorm = 1.0 / std::sqrt(std::norm(a) + std::norm(b));
  return SingleRailQubit{a * renorm, b * renorm, e};
}

// Hermitian 2x2 density matrix on the zero/one-photon subspace.
struct DensityMatrix2 {
  cdouble rho00{1.0, 0.0};
  cdouble rho01{0.0, 0.0};
  cdouble rho10{0.0, 0.0};
  cdouble rho11{0.0, 0.0};
};

inline double max_entry_distance(const DensityMatrix2& a, const DensityMatrix2& b) {
  return std::max({std::abs(a.rho00 - b.rho00), std::abs(a.rho01 - b.rho01),
                   std::abs(a.rho10 - b.rho10), std::abs(a.rho11 - b.rho11)});
}

// Throws invalid_state_error unless d is Hermitian, unit trace, and positive
// semidefinite within the stated tolerances.
inline void validate_density_matrix(const DensityMatrix2& d) {
  if (std::abs(d.rho00.imag()) > norm_tolerance ||
      std::abs(d.rho11.imag()) > norm_tolerance ||
      std::abs(d.rho10 - std::conj(d.rho01)) > norm_tolerance) {
    throw invalid_state_error("density matrix must be Hermitian");
  }
  const double r00 = d.rho00.real();
  const double r11 = d.rho11.real();
  if (std::abs(r00 + r11 - 1.0) > norm_tolerance) {
    throw invalid_state_error("density matrix must have unit trace");
  }
  if (r00 < -norm_tolerance || r11 < -norm_tolerance ||
      r00 * r11 - std::norm(d.rho01) < -psd_tolerance) {
    throw invalid_state_error("density matrix must be positive semidefinite");
  }
}

inline DensityMatrix2 to_density_matrix(const SingleRailQubit& q) {
  const double b2 = std::norm(q.beta);
  const cdouble off = q.efficiency * std::conj(q.alpha) * q.beta;
  return DensityMatrix2{cdouble{1.0 - q.efficiency * b2, 0.0}, off, std::conj(off),
                        cdouble{q.efficiency * b2, 0.0}};
}

// Inverts the density-matrix form back to canonical (alpha, beta, E).
// Validates d first; PSD slack within tolerance is absorbed by shrinking the
// off-diagonal onto the physical boundary.
inline SingleRailQubit from_density_matrix(const DensityMatrix2& d) {
  validate_density_matrix(d);
  const double r11 = std::max(0.0, d.rho11.real());
  if (r11 < vacuum_threshold) {
    return SingleRailQubit{};
  }
  const double r00 = std::max(0.0, d.rho00.real());
  cdouble off = d.rho01;
  double off2 = std::norm(off);
  const double psd_bound = r00 * r11;
  if (off2 > psd_bound) {
    off *= std::sqrt(psd_bound / std::max(off2, 1e-300));
    off2 = psd_bound;
  }
  const double beta2 = r11 * r11 / (r11 * r11 + off2);
  const double e = r11 / beta2;
  const double alpha_mag = std::sqrt(std::max(0.0, 1.0 - beta2));
  const cdouble beta = alpha_mag > 0.0 ? off / (e * alpha_mag) : cdouble{std::sqrt(beta2), 0.0};
  return canonicalize(cdouble{alpha_mag, 0.0}, beta, std::min(e, 1.0));
}

// Generalized efficiency: rho11 / (1 - |rho01|^2 / rho11), with the vacuum
// mapped to 0. Equals |beta|^2 E / (1 - |alpha|^2 E) on (alpha, beta, E)
// states. Off-diagonal weight beyond the PSD bound (allowed slack on noisy
// inputs) is clamped so the result stays in [0, 1].
inline double generalized_efficiency(const DensityMatrix2& d) {
  const double r11 = d.rho11.real();
  if (r11 < vacuum_threshold) {
    return 0.0;
  }
  const double r00 = std::max(0.0, d.rho00.real());
  const double off2 = std::min(std::norm(d.rho01), r00 * r11);
  return r11 / (1.0 - off2 / r11);
}

inline double generalized_efficiency(const SingleRailQubit& q) {
  return generalized_efficiency(to_density_matrix(q));
}

// Entrywise convex combination p*d1 + (1-p)*d2.
inline DensityMatrix2 mix(const DensityMatrix2& d1, const DensityMatrix2& d2, double p) {
  if (!(p >= 0.0 && p <= 1.0)) {
    throw std::domain_error("mixing weight must lie in [0, 1]");
  }
  const double q = 1.0 - p;
  return DensityMatrix2{p * d1.rho00 + q * d2.rho00, p * d1.rho01 + q * d2.rho01,
                        p * d1.rho10 + q * d2.rho10, p * d1.rho11 + q * d2.rho11};
}

// Closed-form second derivative of f(p) = generalized_efficiency(mix(d1, d2, p)).
// Requires both endpoints non-vacuum; the vacuum endpoint case is linear and
// handled separately by callers. Nonnegative for valid inputs, which is what
// makes the generalized efficiency convex.
inline double efficiency_second_derivative(const DensityMatrix2& d1,
                                           const DensityMatrix2& d2, double p) {
  if (d1.rho11.real() < vacuum_threshold || d2.rho11.real() < vacuum_threshold) {
    throw std::domain_error(
        "second-derivative form requires non-vacuum endpoints; mixtures with the "
        "vacuum are linear in the mixing weight");
  }
  const DensityMatrix2 d = mix(d1, d2, p);
  const double r11 = d.rho11.real();
  const cdouble r10 = d.rho10;
  const cdouble r01 = d.rho01;
  const double delta_r11 = d1.rho11.real() - d2.rho11.real();
  const cdouble delta_r10 = d1.rho10 - d2.rho10;
  const double den = r11 - std::norm(r10);
  const double quad = 2.0 * r11 * r11 * std::norm(delta_r10) / (den * den);
  const double cross = delta_r11 * std::norm(r10) - r11 * 2.0 * (r01 * delta_r10).real();
  return quad + 2.0 * cross * cross / (den * den * den);
}

}  // namespace singlerail
