// Walks through the library end to end: take an imperfect photon source,
// synthesize the splitter-plus-homodyne stage reaching a balanced qubit, run
// the plan analytically, and cross-check it against the truncated Fock-space
// simulator.

#include <cstdio>

#include "singlerail/singlerail.hpp"

using namespace singlerail;

int main() {
  const auto photon = canonicalize(0.0, 1.0, 0.8);
  const auto target = canonicalize(1.0, 1.0, 0.85);

  std::printf("input:  photon source, E = %.3f, generalized efficiency %.6f\n",
              photon.efficiency, generalized_efficiency(photon));
  std::printf("target: balanced qubit, E' = %.3f, generalized efficiency %.6f\n",
              target.efficiency, generalized_efficiency(target));

  const auto verdict = classify_feasibility(photon, target);
  std::printf("verdict: %s (%s)\n", to_string(verdict.verdict), verdict.reason.c_str());

  const auto plan = synthesize_plan(photon, target);
  for (const auto& stage : plan.stages) {
    if (const auto* cond = std::get_if<ConditionalStage>(&stage)) {
      std::printf("stage: splitter t = %.6f, homodyne Q = %.6f, phi = %.6f\n",
                  cond->bs.t, cond->setting.Q, cond->setting.phi);
    } else if (const auto* att = std::get_if<AttenuationStage>(&stage)) {
      std::printf("stage: attenuation tau = %.6f\n", att->tau);
    }
  }
  std::printf("predicted success density: %.6f\n", plan.predicted_success_density);

  const auto exec = execute_plan(photon, plan);
  std::printf("analytic output: alpha = %.6f, beta = %.6f, E' = %.6f\n",
              exec.output.alpha.real(), exec.output.beta.real(), exec.output.efficiency);

  const auto& stage = std::get<ConditionalStage>(plan.stages.front());
  const auto [dm, weight] =
      fock::conditional_output(photon, stage.bs.t, stage.setting.Q, stage.setting.phi);
  const double residual = max_entry_distance(dm, to_density_matrix(exec.output));
  std::printf("Fock-space check: weight %.6f, entrywise residual %.2e\n", weight, residual);
  return residual < 1e-10 ? 0 : 1;
}
