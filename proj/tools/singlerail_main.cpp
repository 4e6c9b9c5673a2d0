// singlerail: command-line front end for the single-rail qubit toolkit.
// Subcommands: efficiency, convert, plan, verify, sweep. JSON in, JSON or CSV
// out. Exit codes are a stable contract: 0 ok, 1 verification check failed,
// 2 parse/usage, 3 non-physical state, 4 infeasible conversion, 5 zero
// probability outcome, 6 truncation overflow.

#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "singlerail/singlerail.hpp"

namespace {

using nlohmann::json;
using namespace singlerail;

constexpr int exit_ok = 0;
constexpr int exit_check_failed = 1;
constexpr int exit_parse = 2;
constexpr int exit_nonphysical = 3;
constexpr int exit_infeasible = 4;
constexpr int exit_zero_probability = 5;
constexpr int exit_truncation = 6;

class input_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Accepts inline JSON (leading '{') or a file path.
json load_json(const std::string& arg) {
  if (!arg.empty() && arg.front() == '{') {
    return json::parse(arg);
  }
  std::ifstream in(arg);
  if (!in) {
    throw input_error("cannot read input file: " + arg);
  }
  return json::parse(in);
}

void print(const json& report) { std::cout << report.dump(2) << "\n"; }

double simpson(const std::function<double(double)>& f, double a, double b,
               int intervals) {
  const double h = (b - a) / intervals;
  double sum = f(a) + f(b);
  for (int i = 1; i < intervals; ++i) {
    sum += f(a + i * h) * (i % 2 == 1 ? 4.0 : 2.0);
  }
  return sum * h / 3.0;
}

int cmd_efficiency(const std::string& state_arg) {
  const auto parsed = io::state_from_json(load_json(state_arg));
  print(json{{"E", io::round12(parsed.qubit.efficiency)},
             {"gen_efficiency", io::round12(generalized_efficiency(parsed.matrix))},
             {"density_matrix", io::density_to_json(parsed.matrix)}});
  return exit_ok;
}

int cmd_convert(const std::string& state_arg, double t, double quadrature, double phi) {
  const auto q = io::state_from_json(load_json(state_arg)).qubit;
  const BeamSplitter bs(t);
  const HomodyneSetting setting{quadrature, phi};
  const auto coeffs = homodyne_coefficients(setting);
  const auto outcome = project_output(q, bs, coeffs);

  const cdouble kept0 = q.alpha * coeffs.theta0 + q.beta * bs.r * coeffs.theta1;
  const double identity_residual =
      std::abs(outcome.output.beta * kept0 -
               outcome.output.alpha * q.beta * bs.t * coeffs.theta0);
  json residuals{{"projection_identity", io::round12(identity_residual)},
                 {"transfer_relation",
                  io::round12(transfer_relation_check(q, outcome.output, bs.t))}};
  if (outcome.output.efficiency < 1.0) {
    residuals["success_density_consistency"] = io::round12(std::abs(
        success_density(q, outcome.output, coeffs.theta0) - outcome.unnormalized_trace));
  } else {
    residuals["success_density_consistency"] = nullptr;
  }
  print(json{{"output", io::qubit_to_json(outcome.output)},
             {"success_density", io::round12(outcome.success_weight)},
             {"residuals", residuals}});
  return exit_ok;
}

int cmd_plan(const std::string& from_arg, const std::string& to_arg,
             double attenuation_mid, double case1_t) {
  const auto q = io::state_from_json(load_json(from_arg)).qubit;
  const auto target = io::state_from_json(load_json(to_arg)).qubit;
  const auto verdict = classify_feasibility(q, target);
  json report{{"verdict", to_string(verdict.verdict)},
              {"reason", verdict.reason},
              {"efficiency_in", io::round12(verdict.efficiency_in)},
              {"efficiency_out", io::round12(verdict.efficiency_out)}};
  if (!verdict.feasible()) {
    report["plan"] = nullptr;
    print(report);
    return exit_infeasible;
  }
  PlanOptions options;
  options.attenuation_mid = attenuation_mid;
  options.case1_t = case1_t;
  report["plan"] = io::plan_to_json(q, synthesize_plan(q, target, options));
  print(report);
  return exit_ok;
}

int cmd_verify(const std::string& plan_arg, int truncation, long samples, double window,
               std::uint64_t seed) {
  const auto file = io::plan_from_json(load_json(plan_arg));
  double tolerance = 1e-10;
  if (const char* env = std::getenv("SINGLERAIL_TOLERANCE")) {
    tolerance = std::stod(env);
  }

  json checks = json::array();
  bool all_pass = true;
  const auto add_check = [&](const std::string& name, const json& analytic,
                             const json& oracle, double residual, double tol) {
    const bool pass = residual <= tol;
    all_pass = all_pass && pass;
    checks.push_back(json{{"name", name},
                          {"analytic", analytic},
                          {"oracle", oracle},
                          {"residual", io::round12(residual)},
                          {"pass", pass}});
  };

  SingleRailQubit current = file.input;
  std::optional<std::pair<SingleRailQubit, ConditionalStage>> last_conditional;
  int index = 0;
  for (const PlanStage& stage : file.plan.stages) {
    const std::string prefix = "stage " + std::to_string(++index) + " ";
    if (const auto* att = std::get_if<AttenuationStage>(&stage)) {
      const auto analytic = apply_attenuation(current, att->tau);
      const auto [dm, weight] = fock::attenuation_output(current, att->tau, truncation);
      const auto analytic_dm = to_density_matrix(analytic);
      add_check(prefix + "attenuation output", io::density_to_json(analytic_dm),
                io::density_to_json(dm), max_entry_distance(analytic_dm, dm), tolerance);
      add_check(prefix + "attenuation weight", 1.0, io::round12(weight),
                std::abs(weight - 1.0), tolerance);
      current = analytic;
    } else if (const auto* ph = std::get_if<PhaseShiftStage>(&stage)) {
      const auto analytic = apply_phase_shift(current, ph->chi);
      auto state = fock::FockState::from_qubit(current, 1, truncation, 0);
      state = fock::apply_mode_phase(state, 0, ph->chi);
      const auto [k, weight] = fock::single_rail_matrix(state);
      const DensityMatrix2 dm{k.rho00 / weight, k.rho01 / weight, k.rho10 / weight,
                              k.rho11 / weight};
      const auto analytic_dm = to_density_matrix(analytic);
      add_check(prefix + "phase shift output", io::density_to_json(analytic_dm),
                io::density_to_json(dm), max_entry_distance(analytic_dm, dm), tolerance);
      current = analytic;
    } else {
      const auto& cond = std::get<ConditionalStage>(stage);
      const auto coeffs = homodyne_coefficients(cond.setting);
      const auto outcome = project_output(current, cond.bs, coeffs);
      const auto [dm, weight] = fock::conditional_output(
          current, cond.bs.t, cond.setting.Q, cond.setting.phi, truncation);
      const auto analytic_dm = to_density_matrix(outcome.output);
      add_check(prefix + "conditional output", io::density_to_json(analytic_dm),
                io::density_to_json(dm), max_entry_distance(analytic_dm, dm), tolerance);
      add_check(prefix + "outcome weight", io::round12(outcome.unnormalized_trace),
                io::round12(weight), std::abs(outcome.unnormalized_trace - weight),
                tolerance);

      const cdouble lhs =
          outcome.output.beta *
          (current.alpha * coeffs.theta0 + current.beta * cond.bs.r * coeffs.theta1);
      const cdouble rhs = outcome.output.alpha * current.beta * cond.bs.t * coeffs.theta0;
      add_check(prefix + "projection identity", io::complex_to_json(lhs),
                io::complex_to_json(rhs), std::abs(lhs - rhs), 1e-12);

      const double transfer_lhs =
          cond.bs.t * std::abs(current.beta) *
          std::sqrt(std::max(0.0, current.efficiency * (1.0 - outcome.output.efficiency)));
      const double transfer_rhs =
          std::abs(outcome.output.beta) *
          std::sqrt(std::max(0.0, outcome.output.efficiency * (1.0 - current.efficiency)));
      add_check(prefix + "transfer relation", io::round12(transfer_lhs),
                io::round12(transfer_rhs), std::abs(transfer_lhs - transfer_rhs), 1e-10);

      // The closed form assumes the generic projected output; a vacuum
      // output collapses to the conventional E' = 0 and falls outside it.
      if (outcome.output.efficiency < 1.0 &&
          (!outcome.output.is_vacuum() || current.is_vacuum())) {
        const double closed = success_density(current, outcome.output, coeffs.theta0);
        add_check(prefix + "success density closed form", io::round12(closed),
                  io::round12(outcome.unnormalized_trace),
                  std::abs(closed - outcome.unnormalized_trace), 1e-10);
      }
      last_conditional = std::make_pair(current, cond);
      current = outcome.output;
    }
  }

  const auto executed = execute_stages(file.input, file.plan.stages);
  const auto predicted_dm = to_density_matrix(file.plan.predicted_output);
  const auto executed_dm = to_density_matrix(executed.output);
  add_check("predicted output", io::qubit_to_json(file.plan.predicted_output),
            io::qubit_to_json(executed.output),
            max_entry_distance(predicted_dm, executed_dm), 1e-9);
  add_check("predicted success density", io::round12(file.plan.predicted_success_density),
            io::round12(executed.success_density),
            std::abs(file.plan.predicted_success_density - executed.success_density), 1e-9);

  json mc = nullptr;
  if (samples > 0 && last_conditional.has_value()) {
    const auto& [stage_input, cond] = *last_conditional;
    const auto result = fock::monte_carlo_conversion(
        stage_input, cond.bs.t, cond.setting.Q, cond.setting.phi, window,
        static_cast<std::size_t>(samples), seed, truncation);

    auto state = fock::FockState::from_qubit(stage_input, 2, truncation, 0);
    state = fock::apply_beam_splitter(state, 0, 1, cond.bs.t);
    const double integral = simpson(
        [&](double x) { return fock::homodyne_density(state, 0, x, cond.setting.phi); },
        cond.setting.Q - window, cond.setting.Q + window, 200);
    const bool rate_pass =
        std::abs(result.acceptance_rate - integral) <= 3.0 * result.rate_stderr + 1e-12;
    all_pass = all_pass && rate_pass;

    json conditioned_pass = nullptr;
    if (result.conditioned.has_value()) {
      const auto analytic =
          to_density_matrix(project_output(stage_input, cond.bs, cond.setting).output);
      const double bias = 10.0 * window * window;
      const std::array<double, 4> diffs{
          std::abs(result.conditioned->rho00.real() - analytic.rho00.real()),
          std::abs(result.conditioned->rho01.real() - analytic.rho01.real()),
          std::abs(result.conditioned->rho01.imag() - analytic.rho01.imag()),
          std::abs(result.conditioned->rho11.real() - analytic.rho11.real())};
      bool ok = true;
      for (int e = 0; e < 4; ++e) {
        ok = ok && diffs[e] <= bias + 3.0 * result.entry_stderr[e];
      }
      conditioned_pass = ok;
      all_pass = all_pass && ok;
    }
    mc = json{{"samples", result.samples},
              {"acceptances", result.acceptances},
              {"rate", io::round12(result.acceptance_rate)},
              {"stderr", io::round12(result.rate_stderr)},
              {"seed", result.seed},
              {"window", io::round12(window)},
              {"window_integral", io::round12(integral)},
              {"rate_pass", rate_pass},
              {"conditioned_pass", conditioned_pass}};
  }

  print(json{{"tolerance", tolerance},
             {"checks", checks},
             {"monte_carlo", mc},
             {"pass", all_pass}});
  return all_pass ? exit_ok : exit_check_failed;
}

int cmd_sweep(const std::string& state_arg, const std::string& axis_name, double min,
              double max, int steps, const std::string& out_path, double t, double quadrature,
              double phi, const std::string& target_arg) {
  const auto q = io::state_from_json(load_json(state_arg)).qubit;
  solver::SweepOptions options;
  options.t = t;
  options.Q = quadrature;
  options.phi = phi;
  if (!target_arg.empty()) {
    const auto target = io::state_from_json(load_json(target_arg)).qubit;
    options.target_pure = std::pair<cdouble, cdouble>{target.alpha, target.beta};
  }
  solver::SweepAxis axis;
  if (axis_name == "Q") {
    axis = solver::SweepAxis::quadrature;
  } else if (axis_name == "t") {
    axis = solver::SweepAxis::transmissivity;
  } else if (axis_name == "Eprime") {
    axis = solver::SweepAxis::output_efficiency;
  } else {
    throw input_error("unknown sweep axis (expected Q, t, or Eprime): " + axis_name);
  }
  const auto result = solver::sweep(q, axis, min, max, steps, options);
  std::ofstream out(out_path);
  if (!out) {
    throw input_error("cannot write output file: " + out_path);
  }
  out << io::sweep_to_csv(result);
  print(json{{"axis", result.axis},
             {"rows", result.points.size()},
             {"out", out_path}});
  return exit_ok;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"imperfect single-rail optical qubit conversion toolkit"};
  app.require_subcommand(1);

  std::string state_arg;
  std::string from_arg;
  std::string to_arg;
  std::string plan_arg;
  std::string axis_name = "Q";
  std::string out_path;
  std::string target_arg;
  double bs_t = 0.70710678118654752440;
  double quadrature = 0.0;
  double phi = 0.0;
  double attenuation_mid = 0.5;
  double case1_t = 0.70710678118654752440;
  double sweep_min = 0.0;
  double sweep_max = 1.0;
  int steps = 50;
  int truncation = 4;
  long samples = 100000;
  double window = 0.01;
  std::uint64_t seed = 12345;

  auto* efficiency = app.add_subcommand(
      "efficiency", "generalized efficiency and density matrix of a state");
  efficiency->add_option("state", state_arg, "state JSON (file path or inline)")
      ->required();

  auto* convert = app.add_subcommand(
      "convert", "apply one splitter-plus-homodyne stage to a state");
  convert->add_option("state", state_arg, "state JSON (file path or inline)")->required();
  convert->add_option("--bs-t", bs_t, "amplitude transmissivity in [0, 1]")->required();
  convert->add_option("--Q", quadrature, "homodyne outcome");
  convert->add_option("--phi", phi, "local-oscillator phase in radians");

  auto* plan = app.add_subcommand(
      "plan", "classify a requested conversion and synthesize the stage list");
  plan->add_option("--from", from_arg, "input state JSON")->required();
  plan->add_option("--to", to_arg, "target state JSON")->required();
  plan->add_option("--attenuation-mid", attenuation_mid,
                   "fraction of the efficiency gap kept by the attenuation stage, in (0, 1)");
  plan->add_option("--case1-t", case1_t,
                   "transmissivity used for pure-to-pure conversions, in (0, 1)");

  auto* verify = app.add_subcommand(
      "verify", "check a plan against the truncated Fock-space simulator");
  verify->add_option("plan", plan_arg, "plan JSON (file path or inline)")->required();
  verify->add_option("--truncation", truncation, "max photons per mode")
      ->check(CLI::Range(1, 16));
  verify->add_option("--samples", samples, "Monte Carlo samples (0 skips the MC section)");
  verify->add_option("--window", window, "acceptance half-width around the plan outcome");
  verify->add_option("--seed", seed, "Monte Carlo seed");

  auto* sweep = app.add_subcommand("sweep", "tabulate a conversion along one axis to CSV");
  sweep->add_option("state", state_arg, "state JSON (file path or inline)")->required();
  sweep->add_option("--axis", axis_name, "Q, t, or Eprime")->required();
  sweep->add_option("--min", sweep_min, "axis start")->required();
  sweep->add_option("--max", sweep_max, "axis end")->required();
  sweep->add_option("--steps", steps, "number of points (>= 2)");
  sweep->add_option("--out", out_path, "CSV output path")->required();
  sweep->add_option("--bs-t", bs_t, "fixed transmissivity for the Q axis");
  sweep->add_option("--Q", quadrature, "fixed homodyne outcome for the t axis");
  sweep->add_option("--phi", phi, "fixed local-oscillator phase");
  sweep->add_option("--target", target_arg,
                    "state JSON providing the target pure part for the Eprime axis");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return exit_parse;
  }

  try {
    if (efficiency->parsed()) {
      return cmd_efficiency(state_arg);
    }
    if (convert->parsed()) {
      return cmd_convert(state_arg, bs_t, quadrature, phi);
    }
    if (plan->parsed()) {
      return cmd_plan(from_arg, to_arg, attenuation_mid, case1_t);
    }
    if (verify->parsed()) {
      return cmd_verify(plan_arg, truncation, samples, window, seed);
    }
    if (sweep->parsed()) {
      return cmd_sweep(state_arg, axis_name, sweep_min, sweep_max, steps, out_path, bs_t,
                       quadrature, phi, target_arg);
    }
  } catch (const infeasible_error& e) {
    std::cerr << e.what() << "\n";
    return exit_infeasible;
  } catch (const no_solution_error& e) {
    std::cerr << e.what() << "\n";
    return exit_infeasible;
  } catch (const zero_probability_error& e) {
    std::cerr << e.what() << "\n";
    return exit_zero_probability;
  } catch (const fock::truncation_error& e) {
    std::cerr << e.what() << "\n";
    return exit_truncation;
  } catch (const invalid_state_error& e) {
    std::cerr << e.what() << "\n";
    return exit_nonphysical;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "input does not match the expected schema: " << e.what() << "\n";
    return exit_parse;
  } catch (const input_error& e) {
    std::cerr << e.what() << "\n";
    return exit_parse;
  } catch (const std::exception& e) {
    std::cerr << e.what() << "\n";
    return exit_parse;
  }
  return exit_parse;
}
