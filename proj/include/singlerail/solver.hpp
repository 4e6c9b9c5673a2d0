// solver.hpp
// Parameter search on top of the closed forms: the splitter transmissivity and
// homodyne setting realizing a feasible target, optimization over an
// unconstrained output efficiency, and sweep tables for the CLI.

#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "singlerail/conversion.hpp"
#include "singlerail/qubit.hpp"

namespace singlerail::solver {

// Transmissivity solving the transfer relation for the target. The vacuum
// target needs t = 0; a pure pair leaves t free and gets `case1_t`; otherwise
// the input must be mixed (attenuate a pure input first).
inline double solve_transmissivity(const SingleRailQubit& q, const SingleRailQubit& target,
                                   double case1_t = 0.70710678118654752440) {
  if (target.is_vacuum()) {
    return 0.0;
  }
  if (q.is_pure() && target.is_pure()) {
    return case1_t;
  }
  if (q.efficiency >= 1.0) {
    throw std::domain_error(
        "a mixed target needs a mixed input; attenuate the pure input first");
  }
  if (q.is_vacuum()) {
    throw std::domain_error("only the vacuum is reachable from the vacuum");
  }
  return detail::transmissivity_for_target(q, target);
}

// Homodyne setting (Q >= 0 canonical) solving the projection identity at the
// given transmissivity. Throws no_solution_error when t = 1 leaves no freedom
// and the target differs from the input.
inline HomodyneSetting solve_homodyne_setting(const SingleRailQubit& q,
                                              const SingleRailQubit& target, double t) {
  if (std::abs(q.beta) == 0.0 || std::abs(target.beta) == 0.0) {
    return HomodyneSetting{0.0, 0.0};  // vacuum on either side: any setting
  }
  const BeamSplitter bs(t);
  if (bs.r == 0.0) {
    if (std::abs(target.alpha * q.beta * bs.t - q.alpha * target.beta) <= norm_tolerance) {
      return HomodyneSetting{0.0, 0.0};
    }
    throw no_solution_error(
        "a pass-through splitter cannot change the qubit amplitudes");
  }
  return detail::setting_from_ratio(detail::homodyne_ratio_for_target(q, target, bs));
}

struct OptimizeResult {
  double output_efficiency{0.0};
  ConversionPlan plan;
};

namespace detail_opt {

inline double plan_density(const SingleRailQubit& q, cdouble alpha, cdouble beta,
                           double e_out, const PlanOptions& options) {
  try {
    return synthesize_plan(q, canonicalize(alpha, beta, e_out), options)
        .predicted_success_density;
  } catch (const infeasible_error&) {
    return -1.0;
  } catch (const zero_probability_error&) {
    return 0.0;
  }
}

}  // namespace detail_opt

// Maximizes the success density over the free output efficiency of a target
// with fixed pure part. A 64-point pre-scan brackets the optimum (guarding
// against multimodальity) and golden-section search refines it to 1e-8.
inline OptimizeResult optimize_over_output_efficiency(const SingleRailQubit& q,
                                                      cdouble target_alpha,
                                                      cdouble target_beta,
                                                      const PlanOptions& options = {}) {
  const double n2 = std::norm(target_alpha) + std::norm(target_beta);
  if (!(n2 > 0.0) || std::norm(target_beta) / n2 < 1e-12) {
    throw std::invalid_argument("the target pure part must have a one-photon component");
  }
  const double ge = generalized_efficiency(q);
  if (ge <= efficiency_equal_tolerance) {
    FeasibilityVerdict v;
    v.verdict = Feasibility::infeasible;
    v.reason = "vacuum input admits no output efficiency above zero";
    v.efficiency_in = ge;
    throw infeasible_error(v);
  }
  const double b2 = std::norm(target_beta) / n2;
  const double e_sup = ge / (b2 + (1.0 - b2) * ge);
  // Keep strictly inside the feasible interval: the equal-efficiency boundary
  // is reachable only in the special cases handled separately below.
  const double hi = std::min(e_sup * (1.0 - 1e-9), 1.0 - 1e-12);

  const auto objective = [&](double e_out) {
    return detail_opt::plan_density(q, target_alpha, target_beta, e_out, options);
  };

  constexpr int scan_points = 64;
  int best = 1;
  double best_val = -1.0;
  std::vector<double> grid(scan_points + 1);
  for (int i = 1; i <= scan_points; ++i) {
    grid[i] = hi * static_cast<double>(i) / scan_points;
    const double val = objective(grid[i]);
    if (val > best_val) {
      best_val = val;
      best = i;
    }
  }
  double lo_bracket = grid[std::max(1, best - 1)];
  double hi_bracket = best < scan_points ? grid[best + 1] : hi;

  constexpr double golden = 0.61803398874989485;
  double a = lo_bracket;
  double b = hi_bracket;
  double x1 = b - golden * (b - a);
  double x2 = a + golden * (b - a);
  double f1 = objective(x1);
  double f2 = objective(x2);
  while (b - a > 1e-8) {
    if (f1 > f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - golden * (b - a);
      f1 = objective(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + golden * (b - a);
      f2 = objective(x2);
    }
  }
  double e_star = 0.5 * (a + b);
  double density = objective(e_star);
  if (density < best_val) {
    e_star = grid[best];
    density = best_val;
  }
  // A pure input can reach the pure target exactly; take it if it wins.
  if (ge >= 1.0 - efficiency_equal_tolerance) {
    const double pure_density = objective(1.0);
    if (pure_density > density) {
      e_star = 1.0;
    }
  }
  OptimizeResult result;
  result.output_efficiency = e_star;
  result.plan = synthesize_plan(q, canonicalize(target_alpha, target_beta, e_star), options);
  return result;
}

enum class SweepAxis { quadrature, transmissivity, output_efficiency };

inline const char* to_string(SweepAxis axis) {
  switch (axis) {
    case SweepAxis::quadrature: return "Q";
    case SweepAxis::transmissivity: return "t";
    case SweepAxis::output_efficiency: return "E_out";
  }
  return "?";
}

struct SweepPoint {
  double param{0.0};
  SingleRailQubit output;
  double gen_efficiency{0.0};
  double success_density{0.0};
};

struct SweepResult {
  std::string axis;
  std::vector<SweepPoint> points;
};

struct SweepOptions {
  double t = 0.70710678118654752440;
  double Q = 0.0;
  double phi = 0.0;
  // Pure part of the target for the output-efficiency axis; defaults to the
  // input's own pure part.
  std::optional<std::pair<cdouble, cdouble>> target_pure;
  PlanOptions plan;
};

// Tabulates the conversion along one parameter axis. Infeasible
// output-efficiency points are skipped rather than reported.
inline SweepResult sweep(const SingleRailQubit& q, SweepAxis axis, double min, double max,
                         int steps, const SweepOptions& options = {}) {
  if (steps < 2) {
    throw std::invalid_argument("a sweep needs at least two steps");
  }
  SweepResult result;
  result.axis = to_string(axis);
  result.points.reserve(static_cast<std::size_t>(steps));
  for (int i = 0; i < steps; ++i) {
    const double param = min + (max - min) * static_cast<double>(i) / (steps - 1);
    SweepPoint point;
    point.param = param;
    switch (axis) {
      case SweepAxis::quadrature: {
        const auto outcome = project_output(q, BeamSplitter(options.t),
                                            HomodyneSetting{param, options.phi});
        point.output = outcome.output;
        point.success_density = outcome.success_weight;
        break;
      }
      case SweepAxis::transmissivity: {
        const auto outcome = project_output(q, BeamSplitter(param),
                                            HomodyneSetting{options.Q, options.phi});
        point.output = outcome.output;
        point.success_density = outcome.success_weight;
        break;
      }
      case SweepAxis::output_efficiency: {
        cdouble a = q.alpha;
        cdouble b = q.beta;
        if (options.target_pure) {
          a = options.target_pure->first;
          b = options.target_pure->second;
        }
        SingleRailQubit target;
        try {
          target = canonicalize(a, b, param);
        } catch (const invalid_state_error&) {
          throw std::domain_error("output efficiency sweep range must stay in [0, 1]");
        }
        if (!classify_feasibility(q, target).feasible()) {
          continue;
        }
        const auto plan = synthesize_plan(q, target, options.plan);
        point.output = plan.predicted_output;
        point.success_density = plan.predicted_success_density;
        break;
      }
    }
    point.gen_efficiency = generalized_efficiency(point.output);
    result.points.push_back(point);
  }
  return result;
}

}  // namespace singlerail::solver
