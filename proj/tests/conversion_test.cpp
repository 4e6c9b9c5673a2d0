#include "singlerail/conversion.hpp"

#include <cmath>
#include <numbers>
#include <random>

#include "gtest/gtest.h"
#include "test_util.hpp"

using namespace singlerail;
using singlerail::testing::inv_sqrt2;
using singlerail::testing::qubit_distance;
using singlerail::testing::random_bulk_qubit;
using singlerail::testing::random_qubit;

namespace {

constexpr double pi = std::numbers::pi;

// Residual of the projection identity beta'(alpha theta0 + beta r theta1)
// = alpha' beta t theta0 for a computed outcome.
double projection_identity_residual(const SingleRailQubit& q, const BeamSplitter& bs,
                                    const ProjectionCoefficients& c,
                                    const SingleRailQubit& out) {
  const cdouble kept0 = q.alpha * c.theta0 + q.beta * bs.r * c.theta1;
  return std::abs(out.beta * kept0 - out.alpha * q.beta * bs.t * c.theta0);
}

TEST(HomodyneCoefficients, KnownValues) {
  const auto zero = homodyne_coefficients(HomodyneSetting{0.0, 1.234});
  EXPECT_NEAR(zero.theta0.real(), 0.8932438417380023, 1e-15);
  EXPECT_NEAR(std::abs(zero.theta1), 0.0, 1e-15);

  const auto c = homodyne_coefficients(HomodyneSetting{0.5, 0.0});
  EXPECT_NEAR(c.theta0.real(), 0.6956590034192662, 1e-14);
  EXPECT_NEAR(c.theta1.real(), 0.6956590034192662, 1e-14);
  EXPECT_NEAR(c.theta1.imag(), 0.0, 1e-15);
}

TEST(HomodyneCoefficients, RatioProperty) {
  std::mt19937_64 rng(8001);
  std::uniform_real_distribution<double> qdist(-4.0, 4.0);
  std::uniform_real_distribution<double> pdist(0.0, 2.0 * pi);
  for (int i = 0; i < 1000; ++i) {
    const HomodyneSetting s{qdist(rng), pdist(rng)};
    const auto c = homodyne_coefficients(s);
    EXPECT_GT(c.theta0.real(), 0.0);
    const cdouble ratio = c.theta1 / c.theta0;
    EXPECT_LT(std::abs(ratio - 2.0 * s.Q * std::polar(1.0, s.phi)), 1e-12);
  }
}

TEST(ProjectOutput, StandardExample) {
  const auto q = canonicalize(0.0, 1.0, 0.8);
  const auto outcome = project_output(q, BeamSplitter(inv_sqrt2), HomodyneSetting{0.5, 0.0});
  EXPECT_NEAR(outcome.output.alpha.real(), inv_sqrt2, 1e-12);
  EXPECT_NEAR(outcome.output.beta.real(), inv_sqrt2, 1e-12);
  EXPECT_NEAR(outcome.output.efficiency, 0.8, 1e-12);
  EXPECT_NEAR(outcome.success_weight, 0.4839414490382867, 1e-13);
  EXPECT_DOUBLE_EQ(outcome.success_weight, outcome.unnormalized_trace);
}

TEST(ProjectOutput, VacuumIsInvariant) {
  const SingleRailQubit vac{};
  const auto outcome = project_output(vac, BeamSplitter(0.3), HomodyneSetting{1.1, 2.2});
  EXPECT_TRUE(outcome.output.is_vacuum());
  const auto c = homodyne_coefficients(HomodyneSetting{1.1, 2.2});
  EXPECT_NEAR(outcome.success_weight, std::norm(c.theta0), 1e-15);
}

TEST(ProjectOutput, ZeroProbabilityOutcome) {
  // Pure input, fully reflecting splitter, and a quadrature whose projection
  // annihilates the kept amplitude: the trace vanishes identically.
  const auto q = canonicalize(1.0, 1.0, 1.0);
  EXPECT_THROW(project_output(q, BeamSplitter(0.0), HomodyneSetting{-0.5, 0.0}),
               zero_probability_error);
  EXPECT_THROW(project_output(q, BeamSplitter(0.5), ProjectionCoefficients{}),
               std::invalid_argument);
}

TEST(ProjectOutput, IdentityAndTransferResiduals) {
  std::mt19937_64 rng(8002);
  std::uniform_real_distribution<double> tdist(0.0, 1.0);
  std::uniform_real_distribution<double> qdist(-3.5, 3.5);
  std::uniform_real_distribution<double> pdist(0.0, 2.0 * pi);
  for (int i = 0; i < 2000; ++i) {
    const auto q = random_qubit(rng, 0.0, 0.97);
    const BeamSplitter bs(tdist(rng));
    const HomodyneSetting s{qdist(rng), pdist(rng)};
    const auto c = homodyne_coefficients(s);
    const auto outcome = project_output(q, bs, c);
    EXPECT_LT(projection_identity_residual(q, bs, c, outcome.output), 1e-12);
    EXPECT_LT(transfer_relation_check(q, outcome.output, bs.t), 1e-10);
    if (outcome.output.efficiency < 1.0) {
      EXPECT_NEAR(success_density(q, outcome.output, c.theta0),
                  outcome.unnormalized_trace, 1e-10);
    }
  }
}

TEST(ProjectOutput, MonotoneGeneralizedEfficiency) {
  std::mt19937_64 rng(8003);
  std::uniform_real_distribution<double> tdist(0.0, 1.0);
  std::uniform_real_distribution<double> qdist(-4.0, 4.0);
  std::uniform_real_distribution<double> pdist(0.0, 2.0 * pi);
  for (int i = 0; i < 2000; ++i) {
    const auto q = random_qubit(rng);
    const auto outcome = project_output(q, BeamSplitter(tdist(rng)),
                                        HomodyneSetting{qdist(rng), pdist(rng)});
    EXPECT_LE(generalized_efficiency(outcome.output),
              generalized_efficiency(q) + 1e-12);
  }
}

TEST(TransferRelation, EdgeCases) {
  const auto q = canonicalize(0.0, 1.0, 0.8);
  const auto out = project_output(q, BeamSplitter(inv_sqrt2), HomodyneSetting{0.5, 0.0});
  EXPECT_LT(transfer_relation_check(q, out.output, inv_sqrt2), 1e-12);

  const auto pure_in = canonicalize(0.6, 0.8, 1.0);
  const auto pure_out = canonicalize(0.8, 0.6, 1.0);
  EXPECT_EQ(transfer_relation_check(pure_in, pure_out, 0.37), 0.0);

  EXPECT_EQ(transfer_relation_check(q, SingleRailQubit{}, 0.0), 0.0);
}

TEST(SuccessDensity, KnownValuesAndDegenerateBranch) {
  const auto q = canonicalize(0.0, 1.0, 0.8);
  const auto out = canonicalize(1.0, 1.0, 0.8);
  const cdouble theta0{0.6956590034192662, 0.0};
  EXPECT_NEAR(success_density(q, out, theta0), 0.4839414490382867, 1e-13);
  EXPECT_NEAR(success_density(q, q, theta0), std::norm(theta0), 1e-15);
  EXPECT_EQ(success_density(q, out, cdouble{0.0, 0.0}), 0.0);
  EXPECT_THROW(success_density(q, canonicalize(0.0, 1.0, 1.0), theta0), std::domain_error);
}

TEST(ClassifyFeasibility, KnownVerdicts) {
  const auto photon = canonicalize(0.0, 1.0, 0.8);
  const auto up = canonicalize(1.0, 1.0, 0.9);
  const auto v1 = classify_feasibility(photon, up);
  EXPECT_EQ(v1.verdict, Feasibility::infeasible);
  EXPECT_EQ(v1.reason, "generalized efficiency would increase");
  EXPECT_NEAR(v1.efficiency_out, 0.45 / 0.55, 1e-12);

  const auto down = canonicalize(1.0, 1.0, 0.85);
  const auto v2 = classify_feasibility(photon, down);
  EXPECT_EQ(v2.verdict, Feasibility::feasible_strict);
  EXPECT_NEAR(v2.efficiency_out, 0.425 / 0.575, 1e-12);

  const auto v3 = classify_feasibility(canonicalize(1.0, 1.0, 1.0), canonicalize(0.0, 1.0, 1.0));
  EXPECT_EQ(v3.verdict, Feasibility::feasible_equal_pure);

  const auto base = canonicalize(1.0, 1.0, 0.5);
  const auto shifted = canonicalize(inv_sqrt2, std::polar(inv_sqrt2, 0.9), 0.5);
  EXPECT_EQ(classify_feasibility(base, shifted).verdict, Feasibility::feasible_equal_phase);
}

TEST(ClassifyFeasibility, VacuumAndAttenuationRouting) {
  const SingleRailQubit vac{};
  EXPECT_EQ(classify_feasibility(vac, vac).verdict, Feasibility::feasible_equal_phase);
  EXPECT_EQ(classify_feasibility(vac, canonicalize(1.0, 1.0, 0.1)).verdict,
            Feasibility::infeasible);

  const auto pure = canonicalize(1.0, 1.0, 1.0);
  EXPECT_EQ(classify_feasibility(pure, vac).verdict, Feasibility::feasible_strict);
  EXPECT_EQ(classify_feasibility(pure, canonicalize(0.0, 1.0, 0.9)).verdict,
            Feasibility::feasible_via_attenuation);

  // Equal efficiency outside the two special cases is not convertible.
  const auto q = canonicalize(1.0, 1.0, 0.8);
  const double ge = generalized_efficiency(q);
  const double b2 = 0.3;
  const double e_equal = ge / (b2 + (1.0 - b2) * ge);
  const auto peer = canonicalize(std::sqrt(1.0 - b2), std::sqrt(b2), e_equal);
  EXPECT_NEAR(generalized_efficiency(peer), ge, 1e-12);
  EXPECT_EQ(classify_feasibility(q, peer).verdict, Feasibility::infeasible);
}

TEST(ApplyAttenuation, KnownValuesAndScaling) {
  const auto q = canonicalize(1.0, 1.0, 0.83);
  EXPECT_LT(qubit_distance(apply_attenuation(q, 1.0), q), 1e-14);

  const auto pure = canonicalize(1.0, 1.0, 1.0);
  const auto damped = apply_attenuation(pure, 0.9);
  EXPECT_NEAR(damped.alpha.real(), 0.7432941462471664, 1e-12);
  EXPECT_NEAR(damped.beta.real(), 0.6689647316224496, 1e-12);
  EXPECT_NEAR(damped.efficiency, 0.905, 1e-12);
  EXPECT_NEAR(generalized_efficiency(damped), 0.81, 1e-12);

  EXPECT_THROW(apply_attenuation(q, 0.0), std::domain_error);
  EXPECT_THROW(apply_attenuation(q, 1.1), std::domain_error);
}

TEST(ApplyAttenuation, ScalesGeneralizedEfficiencyByTauSquared) {
  std::mt19937_64 rng(8004);
  std::uniform_real_distribution<double> taud(0.1, 0.999);
  for (int i = 0; i < 2000; ++i) {
    const auto q = random_bulk_qubit(rng, 0.05, 1.0);
    const double tau = taud(rng);
    const double before = generalized_efficiency(q);
    const double after = generalized_efficiency(apply_attenuation(q, tau));
    EXPECT_NEAR(after, tau * tau * before, 1e-12);
    EXPECT_LT(after, before);
  }
}

TEST(SynthesizePlan, StandardPair) {
  const auto q = canonicalize(0.0, 1.0, 0.8);
  const auto target = canonicalize(1.0, 1.0, 0.85);
  const auto plan = synthesize_plan(q, target);
  ASSERT_EQ(plan.stages.size(), 1u);
  const auto& stage = std::get<ConditionalStage>(plan.stages[0]);
  EXPECT_NEAR(stage.bs.t, 0.8416254115301729, 1e-12);
  EXPECT_NEAR(stage.setting.Q, 0.7791937224739788, 1e-12);
  EXPECT_NEAR(stage.setting.phi, 0.0, 1e-12);
  EXPECT_LT(qubit_distance(plan.predicted_output, target), 1e-12);
  EXPECT_NEAR(plan.predicted_success_density, 0.3158793334541333, 1e-12);
}

TEST(SynthesizePlan, VacuumTarget) {
  const auto q = canonicalize(1.0, 1.0, 0.8);
  const auto plan = synthesize_plan(q, SingleRailQubit{});
  ASSERT_EQ(plan.stages.size(), 1u);
  EXPECT_EQ(std::get<ConditionalStage>(plan.stages[0]).bs.t, 0.0);
  EXPECT_TRUE(plan.predicted_output.is_vacuum());
  EXPECT_DOUBLE_EQ(plan.predicted_success_density, 1.0);
}

TEST(SynthesizePlan, PureInputRoutesThroughAttenuation) {
  const auto q = canonicalize(1.0, 1.0, 1.0);
  const auto target = canonicalize(0.0, 1.0, 0.9);
  const auto plan = synthesize_plan(q, target);
  ASSERT_EQ(plan.stages.size(), 2u);
  EXPECT_TRUE(std::holds_alternative<AttenuationStage>(plan.stages[0]));
  EXPECT_TRUE(std::holds_alternative<ConditionalStage>(plan.stages[1]));
  // Midpoint fraction 0.5 lands the intermediate at (1 + 0.9) / 2.
  EXPECT_NEAR(std::get<AttenuationStage>(plan.stages[0]).tau, std::sqrt(0.95), 1e-12);
  const auto exec = execute_plan(q, plan);
  EXPECT_LT(qubit_distance(exec.output, target), 1e-9);
  EXPECT_GT(exec.success_density, 0.0);
}

TEST(SynthesizePlan, EqualCases) {
  const auto q = canonicalize(1.0, 1.0, 0.5);
  const auto plan_id = synthesize_plan(q, q);
  ASSERT_EQ(plan_id.stages.size(), 1u);
  const auto& id_stage = std::get<ConditionalStage>(plan_id.stages[0]);
  EXPECT_DOUBLE_EQ(id_stage.bs.t, 1.0);
  EXPECT_DOUBLE_EQ(id_stage.setting.Q, 0.0);
  EXPECT_LT(qubit_distance(plan_id.predicted_output, q), 1e-12);

  const auto shifted = canonicalize(inv_sqrt2, std::polar(inv_sqrt2, 1.1), 0.5);
  const auto plan_ph = synthesize_plan(q, shifted);
  ASSERT_EQ(plan_ph.stages.size(), 1u);
  EXPECT_NEAR(std::get<PhaseShiftStage>(plan_ph.stages[0]).chi, 1.1, 1e-12);
  EXPECT_LT(qubit_distance(plan_ph.predicted_output, shifted), 1e-12);
  EXPECT_DOUBLE_EQ(plan_ph.predicted_success_density, 1.0);

  const auto pure_from = canonicalize(1.0, 1.0, 1.0);
  const auto pure_to = canonicalize(0.0, 1.0, 1.0);
  const auto plan_pp = synthesize_plan(pure_from, pure_to);
  ASSERT_EQ(plan_pp.stages.size(), 1u);
  const auto& pp = std::get<ConditionalStage>(plan_pp.stages[0]);
  EXPECT_NEAR(pp.bs.t, inv_sqrt2, 1e-15);
  EXPECT_NEAR(pp.setting.Q, inv_sqrt2, 1e-12);
  EXPECT_NEAR(pp.setting.phi, pi, 1e-12);
  EXPECT_LT(qubit_distance(plan_pp.predicted_output, pure_to), 1e-12);
}

TEST(SynthesizePlan, InfeasibleCarriesVerdict) {
  const auto q = canonicalize(0.0, 1.0, 0.8);
  const auto target = canonicalize(1.0, 1.0, 0.9);
  try {
    synthesize_plan(q, target);
    FAIL() << "expected infeasible_error";
  } catch (const infeasible_error& e) {
    EXPECT_EQ(e.verdict().verdict, Feasibility::infeasible);
    EXPECT_EQ(e.verdict().reason, "generalized efficiency would increase");
  }
}

TEST(SynthesizePlan, RandomFeasiblePairsRoundTrip) {
  std::mt19937_64 rng(8005);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_real_distribution<double> ph(0.0, 2.0 * pi);
  int built = 0;
  while (built < 300) {
    const auto q = random_bulk_qubit(rng, 0.1, 0.97);
    const double ge = generalized_efficiency(q);
    const double b2 = 0.1 + 0.8 * unit(rng);
    const double e_max = ge / (b2 + (1.0 - b2) * ge);
    const double e_target = e_max * (0.15 + 0.8 * unit(rng));
    const auto target = canonicalize(std::sqrt(1.0 - b2),
                                     std::sqrt(b2) * std::polar(1.0, ph(rng)), e_target);
    if (!classify_feasibility(q, target).feasible()) {
      continue;
    }
    const auto plan = synthesize_plan(q, target);
    const auto exec = execute_plan(q, plan);
    EXPECT_LT(qubit_distance(exec.output, target), 1e-9);
    EXPECT_GT(exec.success_density, 0.0);
    ++built;
  }
}

TEST(ImpossibilityWitness, EqualEfficiencyOutsideSpecialCases) {
  // Grid search never reproduces an equal-efficiency target that is neither a
  // pure pair nor a phase shift.
  const auto q = canonicalize(1.0, 1.0, 0.8);
  const double ge = generalized_efficiency(q);
  const double b2 = 0.3;
  const auto target =
      canonicalize(std::sqrt(1.0 - b2), std::sqrt(b2), ge / (b2 + (1.0 - b2) * ge));
  const auto target_dm = to_density_matrix(target);
  int hits = 0;
  for (int it = 0; it <= 24; ++it) {
    const BeamSplitter bs(it / 24.0);
    for (int iq = 0; iq <= 24; ++iq) {
      for (int ip = 0; ip < 16; ++ip) {
        const HomodyneSetting s{-5.0 + 10.0 * iq / 24.0, 2.0 * pi * ip / 16.0};
        const auto outcome = project_output(q, bs, s);
        if (outcome.success_weight > 0.0 &&
            max_entry_distance(to_density_matrix(outcome.output), target_dm) < 1e-9) {
          ++hits;
        }
      }
    }
  }
  EXPECT_EQ(hits, 0);
}

TEST(PhaseShift, BehavesAsRelativePhase) {
  const auto q = canonicalize(1.0, 1.0, 0.5);
  const auto shifted = apply_phase_shift(q, 0.9);
  EXPECT_NEAR(std::arg(shifted.beta), 0.9, 1e-12);
  EXPECT_NEAR(shifted.efficiency, 0.5, 1e-15);

  // alpha = 0: the phase is global, canonical form unchanged.
  const auto photon = canonicalize(0.0, 1.0, 0.7);
  EXPECT_LT(singlerail::testing::parameter_distance(apply_phase_shift(photon, 1.2), photon),
            1e-15);
}

}  // namespace
