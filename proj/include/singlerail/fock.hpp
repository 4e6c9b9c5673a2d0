// fock.hpp
// Truncated Fock-space brute-force simulator used to validate the closed
// forms independently: multimode photon-number states, beam-splitter
// unitaries, quadrature-eigenstate projection, windowed Monte Carlo
// acceptance, generalized-measurement (POVM) mixtures, and the reduction of a
// beam-splitter line to a single equivalent splitter.

#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "singlerail/conversion.hpp"
#include "singlerail/qubit.hpp"

namespace singlerail::fock {

class truncation_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Amplitude past the per-mode truncation larger than this flags an overflow;
// anything smaller is discarded as leakage noise.
inline constexpr double truncation_leak_tolerance = 1e-12;

// Quadrature-eigenstate overlap <Q_phi|n> under the [Q,P] = i/2 convention:
// (2/pi)^{1/4} (2^n n!)^{-1/2} H_n(sqrt(2) Q) e^{-Q^2} e^{i n phi} with H_n the
// physicists' Hermite polynomial.
inline cdouble fock_wavefunction(int n, double Q, double phi) {
  if (n < 0) {
    throw std::domain_error("photon number must be nonnegative");
  }
  constexpr double quartic = 0.89324384173800233;  // (2/pi)^(1/4)
  const double x = std::numbers::sqrt2 * Q;
  double h_prev = 0.0;
  double h = 1.0;
  double scale = quartic;
  for (int k = 1; k <= n; ++k) {
    const double h_next = 2.0 * x * h - 2.0 * (k - 1) * h_prev;
    h_prev = h;
    h = h_next;
    scale /= std::sqrt(2.0 * k);
  }
  return scale * h * std::exp(-Q * Q) * std::polar(1.0, n * phi);
}

// Projection row <Q_phi|n> for n = 0..truncation.
inline std::vector<cdouble> quadrature_bra(int truncation, double Q, double phi) {
  std::vector<cdouble> bra(truncation + 1);
  for (int n = 0; n <= truncation; ++n) {
    bra[n] = fock_wavefunction(n, Q, phi);
  }
  return bra;
}

// Multimode photon-number state, truncated at `truncation` photons per mode.
// Mixed states are stored as a weighted ensemble of pure branches; each branch
// holds a dense amplitude vector indexed mode-0-fastest.
struct FockState {
  struct Branch {
    double weight{1.0};
    std::vector<cdouble> amplitudes;
  };

  int modes{1};
  int truncation{1};
  std::vector<Branch> ensemble;

  int dim() const { return truncation + 1; }

  std::size_t total_dim() const {
    std::size_t d = 1;
    for (int m = 0; m < modes; ++m) {
      d *= static_cast<std::size_t>(dim());
    }
    return d;
  }

  std::size_t stride(int mode) const {
    std::size_t s = 1;
    for (int m = 0; m < mode; ++m) {
      s *= static_cast<std::size_t>(dim());
    }
    return s;
  }

  cdouble amplitude(std::size_t branch, std::span<const int> occupation) const {
    std::size_t idx = 0;
    std::size_t s = 1;
    for (int m = 0; m < modes; ++m) {
      idx += static_cast<std::size_t>(occupation[m]) * s;
      s *= static_cast<std::size_t>(dim());
    }
    return ensemble[branch].amplitudes[idx];
  }

  // Sum of weight * squared norm over the ensemble.
  double total_norm() const {
    double total = 0.0;
    for (const Branch& b : ensemble) {
      double n2 = 0.0;
      for (const cdouble& a : b.amplitudes) {
        n2 += std::norm(a);
      }
      total += b.weight * n2;
    }
    return total;
  }

  static FockState vacuum(int modes, int truncation) {
    FockState s = blank(modes, truncation);
    s.ensemble.push_back(Branch{1.0, std::vector<cdouble>(s.total_dim())});
    s.ensemble[0].amplitudes[0] = 1.0;
    return s;
  }

  // The single-rail state in one mode, vacuum elsewhere, as a two-branch
  // ensemble (qubit part with weight E, vacuum part with weight 1-E).
  static FockState from_qubit(const SingleRailQubit& q, int modes, int truncation,
                              int mode) {
    FockState s = blank(modes, truncation);
    if (mode < 0 || mode >= modes) {
      throw std::out_of_range("qubit mode out of range");
    }
    if (q.efficiency > 0.0) {
      Branch pure{q.efficiency, std::vector<cdouble>(s.total_dim())};
      pure.amplitudes[0] = q.alpha;
      pure.amplitudes[s.stride(mode)] = q.beta;
      s.ensemble.push_back(std::move(pure));
    }
    if (q.efficiency < 1.0) {
      Branch vac{1.0 - q.efficiency, std::vector<cdouble>(s.total_dim())};
      vac.amplitudes[0] = 1.0;
      s.ensemble.push_back(std::move(vac));
    }
    return s;
  }

 private:
  static FockState blank(int modes, int truncation) {
    if (modes < 1 || truncation < 1) {
      throw std::domain_error("need at least one mode and truncation >= 1");
    }
    FockState s;
    s.modes = modes;
    s.truncation = truncation;
    if (s.total_dim() > (1u << 24)) {
      throw std::domain_error("truncated state space too large");
    }
    return s;
  }
};

namespace detail {

inline double factorial(int n) {
  static const std::array<double, 35> table = [] {
    std::array<double, 35> f{};
    f[0] = 1.0;
    for (std::size_t i = 1; i < f.size(); ++i) {
      f[i] = f[i - 1] * static_cast<double>(i);
    }
    return f;
  }();
  return table[static_cast<std::size_t>(n)];
}

inline double binomial(int n, int k) {
  return factorial(n) / (factorial(k) * factorial(n - k));
}

// Amplitude of |k, s-k> in the image of |na, nb> under the splitter
// a_dag -> r a_dag + t b_dag, b_dag -> t a_dag - r b_dag.
inline double splitter_block_coefficient(int na, int nb, int k, double t, double r) {
  const int s = na + nb;
  double sum = 0.0;
  for (int j = std::max(0, k - nb); j <= std::min(na, k); ++j) {
    const int i = k - j;
    sum += binomial(na, j) * std::pow(r, j) * std::pow(t, na - j) * binomial(nb, i) *
           std::pow(t, i) * std::pow(-r, nb - i);
  }
  return sum * std::sqrt(factorial(k) * factorial(s - k) / (factorial(na) * factorial(nb)));
}

}  // namespace detail

// Applies the two-port splitter between the given modes. Photon number is
// conserved per block, so amplitudes can spill past the per-mode truncation;
// spills above truncation_leak_tolerance raise truncation_error.
inline FockState apply_beam_splitter(const FockState& s, int mode_a, int mode_b,
                                     double t) {
  if (mode_a == mode_b || mode_a < 0 || mode_b < 0 || mode_a >= s.modes ||
      mode_b >= s.modes) {
    throw std::out_of_range("beam splitter needs two distinct valid modes");
  }
  if (!(t >= 0.0 && t <= 1.0)) {
    throw std::domain_error("amplitude transmissivity must lie in [0, 1]");
  }
  const double r = std::sqrt(std::max(0.0, 1.0 - t * t));
  const int dim = s.dim();
  const std::size_t stride_a = s.stride(mode_a);
  const std::size_t stride_b = s.stride(mode_b);
  FockState out = s;
  for (std::size_t bi = 0; bi < s.ensemble.size(); ++bi) {
    const auto& amp = s.ensemble[bi].amplitudes;
    auto& res = out.ensemble[bi].amplitudes;
    std::fill(res.begin(), res.end(), cdouble{0.0, 0.0});
    for (std::size_t idx = 0; idx < amp.size(); ++idx) {
      const cdouble c = amp[idx];
      if (c == cdouble{0.0, 0.0}) {
        continue;
      }
      const int na = static_cast<int>((idx / stride_a) % static_cast<std::size_t>(dim));
      const int nb = static_cast<int>((idx / stride_b) % static_cast<std::size_t>(dim));
      const std::size_t base = idx - static_cast<std::size_t>(na) * stride_a -
                               static_cast<std::size_t>(nb) * stride_b;
      const int total = na + nb;
      for (int k = 0; k <= total; ++k) {
        const double coeff = detail::splitter_block_coefficient(na, nb, k, t, r);
        if (k > s.truncation || total - k > s.truncation) {
          if (std::abs(c) * std::abs(coeff) > truncation_leak_tolerance) {
            throw truncation_error("beam splitter pushed amplitude past the truncation");
          }
          continue;
        }
        res[base + static_cast<std::size_t>(k) * stride_a +
            static_cast<std::size_t>(total - k) * stride_b] += c * coeff;
      }
    }
  }
  return out;
}

// Contracts one mode against a projection row (unnormalized), removing the
// mode from the state. bra[n] multiplies the amplitude of occupation n.
inline FockState project_mode(const FockState& s, int mode, std::span<const cdouble> bra) {
  if (mode < 0 || mode >= s.modes || s.modes < 2) {
    throw std::out_of_range("projection mode out of range");
  }
  if (bra.size() != static_cast<std::size_t>(s.dim())) {
    throw std::invalid_argument("projection row size must match the mode dimension");
  }
  const std::size_t stride = s.stride(mode);
  const std::size_t dim = static_cast<std::size_t>(s.dim());
  FockState out;
  out.modes = s.modes - 1;
  out.truncation = s.truncation;
  for (const auto& branch : s.ensemble) {
    FockState::Branch res{branch.weight, std::vector<cdouble>(out.total_dim())};
    for (std::size_t idx = 0; idx < branch.amplitudes.size(); ++idx) {
      const cdouble c = branch.amplitudes[idx];
      if (c == cdouble{0.0, 0.0}) {
        continue;
      }
      const std::size_t n = (idx / stride) % dim;
      const std::size_t low = idx % stride;
      const std::size_t high = idx / (stride * dim);
      res.amplitudes[low + high * stride] += bra[n] * c;
    }
    out.ensemble.push_back(std::move(res));
  }
  return out;
}

// 2x2 unnormalized matrix of a single-mode state confined to the zero/one
// photon subspace, plus its trace. Throws if weight leaks above |1>.
inline std::pair<DensityMatrix2, double> single_rail_matrix(const FockState& s) {
  if (s.modes != 1) {
    throw std::invalid_argument("expected a single remaining mode");
  }
  double k00 = 0.0;
  double k11 = 0.0;
  cdouble k01{0.0, 0.0};
  double leak = 0.0;
  for (const auto& branch : s.ensemble) {
    const auto& a = branch.amplitudes;
    k00 += branch.weight * std::norm(a[0]);
    k11 += branch.weight * std::norm(a[1]);
    // rho01 convention E alpha^* beta, matching the analytic matrix form.
    k01 += branch.weight * std::conj(a[0]) * a[1];
    for (std::size_t n = 2; n < a.size(); ++n) {
      leak += branch.weight * std::norm(a[n]);
    }
  }
  const double trace = k00 + k11;
  if (leak > 1e-10 * std::max(trace, 1e-30)) {
    throw invalid_state_error("state leaks outside the single-rail subspace");
  }
  return {DensityMatrix2{cdouble{k00, 0.0}, k01, std::conj(k01), cdouble{k11, 0.0}}, trace};
}

// Brute-forced conditional conversion: input qubit and vacuum through a
// splitter of transmissivity t, reflected mode projected onto the quadrature
// outcome. Returns the normalized kept-mode matrix and the outcome density.
inline std::pair<DensityMatrix2, double> conditional_output(const SingleRailQubit& q,
                                                            double t, double Q, double phi,
                                                            int truncation = 4) {
  FockState state = FockState::from_qubit(q, 2, truncation, 0);
  state = apply_beam_splitter(state, 0, 1, t);
  const auto bra = quadrature_bra(truncation, Q, phi);
  const auto [k, weight] = single_rail_matrix(project_mode(state, 0, bra));
  if (weight <= 1e-300) {
    throw zero_probability_error("the requested measurement outcome has zero weight");
  }
  return {DensityMatrix2{k.rho00 / weight, k.rho01 / weight, k.rho10 / weight,
                         k.rho11 / weight},
          weight};
}

// Traces out one mode: each pure branch becomes an ensemble over the traced
// occupation (unnormalized branch amplitudes keep the parent weight, so the
// total norm is preserved).
inline FockState trace_out_mode(const FockState& s, int mode) {
  if (mode < 0 || mode >= s.modes || s.modes < 2) {
    throw std::out_of_range("trace mode out of range");
  }
  const std::size_t stride = s.stride(mode);
  const std::size_t dim = static_cast<std::size_t>(s.dim());
  FockState out;
  out.modes = s.modes - 1;
  out.truncation = s.truncation;
  for (const auto& branch : s.ensemble) {
    for (std::size_t n = 0; n < dim; ++n) {
      FockState::Branch res{branch.weight, std::vector<cdouble>(out.total_dim())};
      double n2 = 0.0;
      for (std::size_t low = 0; low < stride; ++low) {
        for (std::size_t high = 0; high * stride * dim < branch.amplitudes.size();
             ++high) {
          const cdouble c = branch.amplitudes[low + n * stride + high * stride * dim];
          res.amplitudes[low + high * stride] = c;
          n2 += std::norm(c);
        }
      }
      if (n2 > 0.0) {
        out.ensemble.push_back(std::move(res));
      }
    }
  }
  if (out.ensemble.empty()) {
    out.ensemble.push_back(
        FockState::Branch{0.0, std::vector<cdouble>(out.total_dim())});
  }
  return out;
}

// Phase rotation e^{i chi n} on one mode.
inline FockState apply_mode_phase(const FockState& s, int mode, double chi) {
  if (mode < 0 || mode >= s.modes) {
    throw std::out_of_range("phase mode out of range");
  }
  const std::size_t stride = s.stride(mode);
  const std::size_t dim = static_cast<std::size_t>(s.dim());
  FockState out = s;
  for (auto& branch : out.ensemble) {
    for (std::size_t idx = 0; idx < branch.amplitudes.size(); ++idx) {
      const auto n = static_cast<double>((idx / stride) % dim);
      branch.amplitudes[idx] *= std::polar(1.0, chi * n);
    }
  }
  return out;
}

// Brute-forced deterministic attenuation: splitter of transmissivity tau with
// the reflected port traced out. Returns the normalized kept-mode matrix and
// the (unit) trace.
inline std::pair<DensityMatrix2, double> attenuation_output(const SingleRailQubit& q,
                                                            double tau,
                                                            int truncation = 4) {
  FockState state = FockState::from_qubit(q, 2, truncation, 0);
  state = apply_beam_splitter(state, 0, 1, tau);
  const auto [k, weight] = single_rail_matrix(trace_out_mode(state, 0));
  if (weight <= 1e-300) {
    throw zero_probability_error("attenuated state lost all weight");
  }
  return {DensityMatrix2{k.rho00 / weight, k.rho01 / weight, k.rho10 / weight,
                         k.rho11 / weight},
          weight};
}

// Probability density of quadrature outcome Q at phase phi on one mode of a
// normalized state.
inline double homodyne_density(const FockState& s, int mode, double Q, double phi) {
  const auto bra = quadrature_bra(s.truncation, Q, phi);
  if (s.modes == 1) {
    double density = 0.0;
    for (const auto& branch : s.ensemble) {
      cdouble overlap{0.0, 0.0};
      for (std::size_t n = 0; n < branch.amplitudes.size(); ++n) {
        overlap += bra[n] * branch.amplitudes[n];
      }
      density += branch.weight * std::norm(overlap);
    }
    return density;
  }
  return project_mode(s, mode, bra).total_norm();
}

struct MonteCarloOptions {
  int grid_points = 1 << 14;
  double grid_min = -8.0;
  double grid_max = 8.0;
};

struct MonteCarloResult {
  std::size_t samples{0};
  std::size_t acceptances{0};
  double acceptance_rate{0.0};
  double rate_stderr{0.0};
  std::uint64_t seed{0};
  std::optional<DensityMatrix2> conditioned;
  // Standard errors of the mean for (rho00, Re rho01, Im rho01, rho11).
  std::array<double, 4> entry_stderr{};
};

// Samples homodyne outcomes on the reflected mode by inverse-CDF lookup on a
// fixed grid, accepts outcomes within the window around q_center, and averages
// the conditioned kept-mode state over accepted samples. Deterministic for a
// fixed seed.
inline MonteCarloResult monte_carlo_conversion(const SingleRailQubit& q, double t,
                                               double q_center, double phi, double window,
                                               std::size_t samples, std::uint64_t seed,
                                               int truncation = 4,
                                               const MonteCarloOptions& opts = {}) {
  if (!(window > 0.0) || samples < 1) {
    throw std::domain_error("need a positive window and at least one sample");
  }
  FockState state = FockState::from_qubit(q, 2, truncation, 0);
  state = apply_beam_splitter(state, 0, 1, t);

  const int n = opts.grid_points;
  const double h = (opts.grid_max - opts.grid_min) / (n - 1);
  std::vector<double> density(n);
  for (int i = 0; i < n; ++i) {
    density[i] = homodyne_density(state, 0, opts.grid_min + i * h, phi);
  }
  std::vector<double> cdf(n);
  cdf[0] = 0.0;
  for (int i = 1; i < n; ++i) {
    cdf[i] = cdf[i - 1] + 0.5 * (density[i - 1] + density[i]) * h;
  }
  const double total = cdf[n - 1];

  std::mt19937_64 rng(seed);
  const auto uniform = [&rng]() {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
  };

  MonteCarloResult result;
  result.samples = samples;
  result.seed = seed;
  std::array<double, 4> mean{};
  std::array<double, 4> m2{};
  for (std::size_t i = 0; i < samples; ++i) {
    const double u = uniform() * total;
    const auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
    const std::size_t hi = std::min<std::size_t>(
        std::max<std::size_t>(1, static_cast<std::size_t>(it - cdf.begin())), n - 1);
    const double cell = cdf[hi] - cdf[hi - 1];
    const double frac = cell > 0.0 ? (u - cdf[hi - 1]) / cell : 0.5;
    const double x = opts.grid_min + (hi - 1 + frac) * h;
    if (std::abs(x - q_center) > window) {
      continue;
    }
    ++result.acceptances;
    const auto bra = quadrature_bra(truncation, x, phi);
    const auto [k, w] = single_rail_matrix(project_mode(state, 0, bra));
    if (w <= 1e-300) {
      continue;
    }
    const std::array<double, 4> entry{k.rho00.real() / w, k.rho01.real() / w,
                                      k.rho01.imag() / w, k.rho11.real() / w};
    for (int e = 0; e < 4; ++e) {
      const double delta = entry[e] - mean[e];
      mean[e] += delta / static_cast<double>(result.acceptances);
      m2[e] += delta * (entry[e] - mean[e]);
    }
  }
  result.acceptance_rate =
      static_cast<double>(result.acceptances) / static_cast<double>(samples);
  result.rate_stderr = std::sqrt(result.acceptance_rate * (1.0 - result.acceptance_rate) /
                                 static_cast<double>(samples));
  if (result.acceptances > 0) {
    result.conditioned = DensityMatrix2{cdouble{mean[0], 0.0},
                                        cdouble{mean[1], mean[2]},
                                        cdouble{mean[1], -mean[2]},
                                        cdouble{mean[3], 0.0}};
    for (int e = 0; e < 4; ++e) {
      result.entry_stderr[e] = std::sqrt(
          m2[e] / static_cast<double>(result.acceptances) /
          static_cast<double>(std::max<std::size_t>(1, result.acceptances - 1)));
    }
  }
  return result;
}

// Positive operator on the measured mode, row-major (truncation+1)^2 entries.
struct PovmElement {
  std::vector<cdouble> matrix;
  int dim{0};
  std::string label;
};

struct PovmBranchMixture {
  DensityMatrix2 mixture;
  double weight{0.0};
  std::vector<double> branch_efficiencies;
};

// Decomposes a PSD element into projective branches (its spectral form, which
// for a positive operator is also its singular value decomposition), runs each
// branch through the splitter-and-project pipeline, and returns the weighted
// statistical mixture plus the per-branch generalized efficiencies.
inline PovmBranchMixture povm_mixture_output(const SingleRailQubit& q, double t,
                                             const PovmElement& element) {
  if (element.dim < 2 ||
      element.matrix.size() != static_cast<std::size_t>(element.dim) *
                                   static_cast<std::size_t>(element.dim)) {
    throw invalid_state_error("measurement element must be a square matrix on n >= 2 levels");
  }
  const int dim = element.dim;
  Eigen::MatrixXcd m(dim, dim);
  for (int i = 0; i < dim; ++i) {
    for (int j = 0; j < dim; ++j) {
      m(i, j) = element.matrix[static_cast<std::size_t>(i) * dim + j];
    }
  }
  if ((m - m.adjoint()).cwiseAbs().maxCoeff() > 1e-10) {
    throw invalid_state_error("measurement element must be Hermitian");
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(m);
  const auto values = solver.eigenvalues();
  if (values.minCoeff() < -1e-10 || values.maxCoeff() > 1.0 + 1e-10) {
    throw invalid_state_error("measurement element must be PSD and bounded by identity");
  }

  FockState state = FockState::from_qubit(q, 2, dim - 1, 0);
  state = apply_beam_splitter(state, 0, 1, t);

  PovmBranchMixture out;
  double k00 = 0.0;
  double k11 = 0.0;
  cdouble k01{0.0, 0.0};
  for (int i = 0; i < dim; ++i) {
    const double p = values(i);
    if (p < 1e-12) {
      continue;  // numerically null branch
    }
    std::vector<cdouble> bra(dim);
    for (int n = 0; n < dim; ++n) {
      bra[n] = std::conj(solver.eigenvectors()(n, i));
    }
    const auto [k, w] = single_rail_matrix(project_mode(state, 0, bra));
    k00 += p * k.rho00.real();
    k11 += p * k.rho11.real();
    k01 += p * k.rho01;
    out.weight += p * w;
    if (w > 1e-14) {
      out.branch_efficiencies.push_back(generalized_efficiency(
          DensityMatrix2{k.rho00 / w, k.rho01 / w, k.rho10 / w, k.rho11 / w}));
    }
  }
  if (out.weight <= 1e-300) {
    throw zero_probability_error("measurement element never fires on this state");
  }
  out.mixture = DensityMatrix2{cdouble{k00 / out.weight, 0.0}, k01 / out.weight,
                               std::conj(k01) / out.weight, cdouble{k11 / out.weight, 0.0}};
  return out;
}

struct LineBeamSplitter {
  int mode_a;
  int mode_b;
  double t;
};

struct MeasuredMode {
  int mode;
  HomodyneSetting setting;
};

struct NetworkReduction {
  double residual{0.0};
  SingleRailQubit observed;
  double weight{0.0};
  double equivalent_t{0.0};
  HomodyneSetting equivalent_setting;
};

// Simulates a line of beam splitters on (qubit, vacuum, ...) with homodyne
// conditioning on every mode but mode 0, then checks that the observed output
// is reproduced by a single equivalent splitter-plus-homodyne stage solved
// from the transfer relations.
inline NetworkReduction network_reduction_check(const SingleRailQubit& q,
                                                std::span<const LineBeamSplitter> line,
                                                std::span<const MeasuredMode> measured,
                                                int truncation = 4) {
  int max_mode = 0;
  for (const auto& bs : line) {
    max_mode = std::max({max_mode, bs.mode_a, bs.mode_b});
  }
  for (const auto& mm : measured) {
    max_mode = std::max(max_mode, mm.mode);
  }
  const int modes = max_mode + 1;
  if (measured.size() != static_cast<std::size_t>(modes - 1)) {
    throw std::invalid_argument("every mode except the output mode 0 must be measured");
  }

  FockState state = FockState::from_qubit(q, modes, truncation, 0);
  for (const auto& bs : line) {
    state = apply_beam_splitter(state, bs.mode_a, bs.mode_b, bs.t);
  }
  std::vector<MeasuredMode> order(measured.begin(), measured.end());
  std::sort(order.begin(), order.end(),
            [](const MeasuredMode& a, const MeasuredMode& b) { return a.mode > b.mode; });
  for (const auto& mm : order) {
    if (mm.mode <= 0 || mm.mode >= modes) {
      throw std::out_of_range("measured mode out of range");
    }
    state = project_mode(state, mm.mode,
                         quadrature_bra(truncation, mm.setting.Q, mm.setting.phi));
  }
  const auto [k, weight] = single_rail_matrix(state);
  if (weight <= 1e-300) {
    throw zero_probability_error("the conditioned network outcome has zero weight");
  }
  const DensityMatrix2 observed_dm{k.rho00 / weight, k.rho01 / weight, k.rho10 / weight,
                                   k.rho11 / weight};

  NetworkReduction result;
  result.weight = weight;
  result.observed = from_density_matrix(observed_dm);

  DensityMatrix2 equivalent_dm;
  if (result.observed.is_vacuum()) {
    result.equivalent_t = 0.0;
    equivalent_dm = to_density_matrix(SingleRailQubit{});
  } else {
    double t_eq;
    if (q.is_pure() && result.observed.is_pure()) {
      t_eq = 0.70710678118654752440;  // any t in (0, 1) works for a pure pair
    } else {
      t_eq = singlerail::detail::transmissivity_for_target(q, result.observed);
    }
    if (t_eq >= 1.0 - 1e-12) {
      result.equivalent_t = 1.0;
      equivalent_dm = to_density_matrix(q);
    } else {
      const auto stage = singlerail::detail::conditional_stage_for(q, result.observed, t_eq);
      result.equivalent_t = stage.bs.t;
      result.equivalent_setting = stage.setting;
      equivalent_dm =
          to_density_matrix(project_output(q, stage.bs, stage.setting).output);
    }
  }
  result.residual = max_entry_distance(equivalent_dm, observed_dm);
  return result;
}

}  // namespace singlerail::fock
