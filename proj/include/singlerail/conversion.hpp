// conversion.hpp
// Closed-form single-rail qubit conversion: a beam splitter mixes the input
// with vacuum, the reflected mode is projected onto a homodyne quadrature
// outcome, and the kept mode carries the converted qubit. Includes the
// feasibility classification of requested conversions and constructive plan
// synthesis (optionally preceded by a deterministic attenuation stage).

#pragma once

#include <cmath>
#include <numbers>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "singlerail/qubit.hpp"

namespace singlerail {

class zero_probability_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class no_solution_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Lossless two-port splitter with real nonnegative amplitude transmissivity t
// and reflectivity r = sqrt(1 - t^2). Any output phase is carried by the
// homodyne local-oscillator phase instead.
struct BeamSplitter {
  double t;
  double r;

  explicit BeamSplitter(double transmissivity) : t(transmissivity) {
    if (!(t >= 0.0 && t <= 1.0)) {
      throw std::domain_error("amplitude transmissivity must lie in [0, 1]");
    }
    r = std::sqrt(std::max(0.0, 1.0 - t * t));
  }
};

// Quadrature outcome Q at local-oscillator phase phi, convention [Q,P] = i/2.
struct HomodyneSetting {
  double Q{0.0};
  double phi{0.0};

  HomodyneSetting() = default;
  HomodyneSetting(double outcome, double phase) : Q(outcome) {
    phi = std::fmod(phase, 2.0 * std::numbers::pi);
    if (phi < 0.0) {
      phi += 2.0 * std::numbers::pi;
    }
  }
};

// Overlaps of the measured projection with |0> and |1>.
struct ProjectionCoefficients {
  cdouble theta0{0.0, 0.0};
  cdouble theta1{0.0, 0.0};
};

inline ProjectionCoefficients homodyne_coefficients(const HomodyneSetting& s) {
  // (2/pi)^(1/4)
  constexpr double quartic = 0.89324384173800233;
  const double envelope = quartic * std::exp(-s.Q * s.Q);
  return ProjectionCoefficients{cdouble{envelope, 0.0},
                                2.0 * s.Q * envelope * std::polar(1.0, s.phi)};
}

struct ConversionOutcome {
  SingleRailQubit output;
  // Probability density of the accepted homodyne outcome (probability for a
  // discrete projector); equal to unnormalized_trace under the quadrature
  // normalization baked into the coefficients.
  double success_weight{0.0};
  double unnormalized_trace{0.0};
};

// Projects the reflected mode of (input x vacuum) after the beam splitter onto
// the given coefficients and returns the canonical kept-mode qubit plus the
// outcome weight. Throws zero_probability_error for an impossible outcome.
inline ConversionOutcome project_output(const SingleRailQubit& q, const BeamSplitter& bs,
                                        const ProjectionCoefficients& coeffs) {
  if (std::norm(coeffs.theta0) + std::norm(coeffs.theta1) <= 0.0) {
    throw std::invalid_argument("projection coefficients must not both vanish");
  }
  const cdouble kept0 = q.alpha * coeffs.theta0 + q.beta * bs.r * coeffs.theta1;
  const cdouble kept1 = q.beta * bs.t * coeffs.theta0;
  const double kept_norm = std::norm(kept0) + std::norm(kept1);
  const double trace =
      q.efficiency * kept_norm + (1.0 - q.efficiency) * std::norm(coeffs.theta0);
  if (trace <= 1e-300) {
    throw zero_probability_error("the requested measurement outcome has zero weight");
  }
  SingleRailQubit out;  // vacuum unless the qubit part survives
  if (kept_norm > 0.0) {
    out = canonicalize(kept0, kept1, q.efficiency * kept_norm / trace);
  }
  return ConversionOutcome{out, trace, trace};
}

inline ConversionOutcome project_output(const SingleRailQubit& q, const BeamSplitter& bs,
                                        const HomodyneSetting& setting) {
  return project_output(q, bs, homodyne_coefficients(setting));
}

// Residual of the transfer relation t|beta|sqrt(E(1-E')) = |beta'|sqrt(E'(1-E))
// linking input and output. Identically zero (to rounding) on every
// project_output result.
inline double transfer_relation_check(const SingleRailQubit& q,
                                      const SingleRailQubit& q_out, double t) {
  const double lhs = t * std::abs(q.beta) *
                     std::sqrt(std::max(0.0, q.efficiency * (1.0 - q_out.efficiency)));
  const double rhs = std::abs(q_out.beta) *
                     std::sqrt(std::max(0.0, q_out.efficiency * (1.0 - q.efficiency)));
  return std::abs(lhs - rhs);
}

// Success weight |theta0|^2 (1-E)/(1-E'), valid for E' < 1; equals the
// unnormalized trace of the projected state. For E' = 1 use the trace itself.
// Assumes the generic projected form: a vacuum-collapsed output (t = 0)
// carries the conventional E' = 0 and falls outside this relation.
inline double success_density(const SingleRailQubit& q, const SingleRailQubit& q_out,
                              cdouble theta0) {
  if (q_out.efficiency >= 1.0) {
    throw std::domain_error(
        "success density in closed form needs E' < 1; use the projected trace for "
        "pure outputs");
  }
  return std::norm(theta0) * (1.0 - q.efficiency) / (1.0 - q_out.efficiency);
}

enum class Feasibility {
  feasible_strict,           // generalized efficiency strictly decreases
  feasible_equal_pure,       // both states pure: any splitter works
  feasible_equal_phase,      // same E and |beta|: phase shift at most
  feasible_via_attenuation,  // pure input, mixed target: attenuate first
  infeasible,
};

inline const char* to_string(Feasibility f) {
  switch (f) {
    case Feasibility::feasible_strict: return "FEASIBLE_STRICT";
    case Feasibility::feasible_equal_pure: return "FEASIBLE_EQUAL_PURE";
    case Feasibility::feasible_equal_phase: return "FEASIBLE_EQUAL_PHASE";
    case Feasibility::feasible_via_attenuation: return "FEASIBLE_VIA_ATTENUATION";
    case Feasibility::infeasible: return "INFEASIBLE";
  }
  return "INFEASIBLE";
}

struct FeasibilityVerdict {
  Feasibility verdict{Feasibility::infeasible};
  std::string reason;
  double efficiency_in{0.0};
  double efficiency_out{0.0};

  bool feasible() const { return verdict != Feasibility::infeasible; }
};

// Classifies a requested conversion by comparing generalized efficiencies.
// Equal efficiencies are convertible only between pure states or when the
// change is a bare phase shift; a strict decrease is always realizable, via a
// preliminary attenuation stage when the input is pure and the target mixed.
inline FeasibilityVerdict classify_feasibility(const SingleRailQubit& q,
                                               const SingleRailQubit& target) {
  const double e_in = generalized_efficiency(q);
  const double e_out = generalized_efficiency(target);
  FeasibilityVerdict v;
  v.efficiency_in = e_in;
  v.efficiency_out = e_out;
  if (e_out > e_in + efficiency_equal_tolerance) {
    v.verdict = Feasibility::infeasible;
    v.reason = "generalized efficiency would increase";
    return v;
  }
  if (std::abs(e_out - e_in) <= efficiency_equal_tolerance) {
    if (e_in >= 1.0 - efficiency_equal_tolerance) {
      v.verdict = Feasibility::feasible_equal_pure;
      v.reason = "pure-to-pure conversion";
      return v;
    }
    if (std::abs(q.efficiency - target.efficiency) <= efficiency_equal_tolerance &&
        std::abs(std::abs(q.beta) - std::abs(target.beta)) <= 1e-9) {
      v.verdict = Feasibility::feasible_equal_phase;
      v.reason = "phase shift only";
      return v;
    }
    v.verdict = Feasibility::infeasible;
    v.reason = "equal generalized efficiency outside the pure-pair and phase-shift cases";
    return v;
  }
  // Strict decrease. The vacuum target is reached deterministically with t = 0;
  // other mixed targets from a pure input need the attenuation stage first.
  if (target.is_vacuum()) {
    v.verdict = Feasibility::feasible_strict;
    v.reason = "vacuum target, realized with a fully reflecting splitter";
    return v;
  }
  if (e_in >= 1.0 - efficiency_equal_tolerance && target.efficiency < 1.0) {
    v.verdict = Feasibility::feasible_via_attenuation;
    v.reason = "pure input must be attenuated before the conditional stage";
    return v;
  }
  v.verdict = Feasibility::feasible_strict;
  v.reason = "generalized efficiency decreases";
  return v;
}

class infeasible_error : public std::runtime_error {
 public:
  explicit infeasible_error(FeasibilityVerdict v)
      : std::runtime_error("conversion infeasible: " + v.reason), verdict_(std::move(v)) {}

  const FeasibilityVerdict& verdict() const { return verdict_; }

 private:
  FeasibilityVerdict verdict_;
};

// Deterministic loss: a splitter of amplitude transmissivity tau with the
// reflected port traced out. Scales the generalized efficiency by tau^2.
inline SingleRailQubit apply_attenuation(const SingleRailQubit& q, double tau) {
  if (!(tau > 0.0 && tau <= 1.0)) {
    throw std::domain_error("attenuation transmissivity must lie in (0, 1]");
  }
  const double b2 = std::norm(q.beta);
  const cdouble off = tau * q.efficiency * std::conj(q.alpha) * q.beta;
  const DensityMatrix2 d{cdouble{1.0 - tau * tau * q.efficiency * b2, 0.0}, off,
                         std::conj(off), cdouble{tau * tau * q.efficiency * b2, 0.0}};
  return from_density_matrix(d);
}

// Bare phase e^{i chi} on the one-photon amplitude; a global phase (hence a
// no-op in canonical form) when alpha = 0.
inline SingleRailQubit apply_phase_shift(const SingleRailQubit& q, double chi) {
  if (q.is_vacuum()) {
    return q;
  }
  return canonicalize(q.alpha, q.beta * std::polar(1.0, chi), q.efficiency);
}

struct AttenuationStage {
  double tau;
};

struct ConditionalStage {
  BeamSplitter bs;
  HomodyneSetting setting;
};

struct PhaseShiftStage {
  double chi;
};

using PlanStage = std::variant<AttenuationStage, ConditionalStage, PhaseShiftStage>;

struct ConversionPlan {
  std::vector<PlanStage> stages;
  SingleRailQubit predicted_output;
  double predicted_success_density{1.0};
};

struct PlanExecution {
  SingleRailQubit output;
  double success_density{1.0};
};

// Runs the stages analytically. Attenuation and phase stages are
// deterministic; a conditional stage multiplies in its outcome density. A
// fully reflecting conditional stage (t = 0) yields the vacuum for every
// outcome, so it conditions on nothing and counts as deterministic.
inline PlanExecution execute_stages(const SingleRailQubit& q,
                                    std::span<const PlanStage> stages) {
  PlanExecution exec{q, 1.0};
  for (const PlanStage& stage : stages) {
    if (const auto* att = std::get_if<AttenuationStage>(&stage)) {
      exec.output = apply_attenuation(exec.output, att->tau);
    } else if (const auto* ph = std::get_if<PhaseShiftStage>(&stage)) {
      exec.output = apply_phase_shift(exec.output, ph->chi);
    } else {
      const auto& cond = std::get<ConditionalStage>(stage);
      const auto outcome = project_output(exec.output, cond.bs, cond.setting);
      exec.output = outcome.output;
      if (cond.bs.t > 0.0) {
        exec.success_density *= outcome.success_weight;
      }
    }
  }
  return exec;
}

inline PlanExecution execute_plan(const SingleRailQubit& q, const ConversionPlan& plan) {
  return execute_stages(q, plan.stages);
}

struct PlanOptions {
  // Splitter used for pure-to-pure conversions, where any t in (0, 1) works.
  double case1_t = 0.70710678118654752440;
  // Fraction of the gap between the target efficiency and 1 kept by the
  // attenuation stage: the intermediate lands at e' + mid * (1 - e').
  double attenuation_mid = 0.5;
};

namespace detail {

// Transmissivity solving the transfer relation for a strict or phase-equal
// conversion; requires E < 1.
inline double transmissivity_for_target(const SingleRailQubit& q,
                                        const SingleRailQubit& target) {
  const double num = target.efficiency * (1.0 - q.efficiency);
  const double den = q.efficiency * (1.0 - target.efficiency);
  const double t = (std::abs(target.beta) / std::abs(q.beta)) * std::sqrt(num / den);
  return std::min(t, 1.0);
}

// Ratio theta1/theta0 = 2Q e^{i phi} making the kept mode proportional to the
// target amplitudes; requires r > 0 and beta, beta' != 0.
inline cdouble homodyne_ratio_for_target(const SingleRailQubit& q,
                                         const SingleRailQubit& target,
                                         const BeamSplitter& bs) {
  return (target.alpha * q.beta * bs.t - q.alpha * target.beta) /
         (q.beta * target.beta * bs.r);
}

inline HomodyneSetting setting_from_ratio(cdouble ratio) {
  const double mag = std::abs(ratio);
  if (mag == 0.0) {
    return HomodyneSetting{0.0, 0.0};
  }
  return HomodyneSetting{mag / 2.0, std::arg(ratio)};
}

inline ConditionalStage conditional_stage_for(const SingleRailQubit& q,
                                              const SingleRailQubit& target, double t) {
  BeamSplitter bs(t);
  return ConditionalStage{bs, setting_from_ratio(homodyne_ratio_for_target(q, target, bs))};
}

}  // namespace detail

// Builds the stage list realizing a feasible conversion: a single conditional
// stage in general, t = 0 for the vacuum target, a bare phase stage for
// phase-equal pairs, and attenuation followed by a conditional stage when the
// input is pure and the target mixed. Throws infeasible_error otherwise.
inline ConversionPlan synthesize_plan(const SingleRailQubit& q,
                                      const SingleRailQubit& target,
                                      const PlanOptions& options = {}) {
  const FeasibilityVerdict verdict = classify_feasibility(q, target);
  if (!verdict.feasible()) {
    throw infeasible_error(verdict);
  }
  if (!(options.case1_t > 0.0 && options.case1_t < 1.0)) {
    throw std::domain_error("pure-pair transmissivity must lie in (0, 1)");
  }
  if (!(options.attenuation_mid > 0.0 && options.attenuation_mid < 1.0)) {
    throw std::domain_error("attenuation midpoint fraction must lie in (0, 1)");
  }

  ConversionPlan plan;
  if (target.is_vacuum()) {
    // Fully reflecting splitter: the kept mode is the vacuum for every
    // homodyne outcome, so no post-selection happens at all.
    plan.stages.push_back(ConditionalStage{BeamSplitter(0.0), HomodyneSetting{}});
  } else {
    switch (verdict.verdict) {
      case Feasibility::feasible_equal_phase: {
        const double chi = std::arg(target.beta) - std::arg(q.beta);
        if (std::abs(target.beta - q.beta) <= norm_tolerance) {
          // Identical states: pass-through splitter.
          plan.stages.push_back(ConditionalStage{BeamSplitter(1.0), HomodyneSetting{}});
        } else {
          plan.stages.push_back(PhaseShiftStage{chi});
        }
        break;
      }
      case Feasibility::feasible_equal_pure: {
        plan.stages.push_back(detail::conditional_stage_for(q, target, options.case1_t));
        break;
      }
      case Feasibility::feasible_via_attenuation: {
        const double e_target = verdict.efficiency_out;
        const double e_mid = e_target + options.attenuation_mid * (1.0 - e_target);
        const double tau = std::sqrt(e_mid / verdict.efficiency_in);
        plan.stages.push_back(AttenuationStage{tau});
        const SingleRailQubit damped = apply_attenuation(q, tau);
        plan.stages.push_back(
            detail::conditional_stage_for(damped, target,
                                          detail::transmissivity_for_target(damped, target)));
        break;
      }
      default: {
        plan.stages.push_back(detail::conditional_stage_for(
            q, target, detail::transmissivity_for_target(q, target)));
        break;
      }
    }
  }
  for (const PlanStage& stage : plan.stages) {
    if (const auto* cond = std::get_if<ConditionalStage>(&stage)) {
      // Close enough to the equal-efficiency boundary the solved quadrature
      // runs so far into the tail that its weight underflows.
      if (homodyne_coefficients(cond->setting).theta0.real() <= 0.0) {
        throw zero_probability_error(
            "the conversion needs a quadrature outcome too deep in the tail to "
            "carry any weight");
      }
    }
  }
  const PlanExecution exec = execute_stages(q, plan.stages);
  plan.predicted_output = exec.output;
  plan.predicted_success_density = exec.success_density;
  return plan;
}

}  // namespace singlerail
