// json_io.hpp
// JSON and CSV wire formats: single-rail states, density matrices, conversion
// plans, and sweep tables. These schemas are the contract for the CLI.

#pragma once

#include <cmath>
#include <cstdio>
#include <string>
#include <variant>

#include "json.hpp"
#include "singlerail/conversion.hpp"
#include "singlerail/qubit.hpp"
#include "singlerail/solver.hpp"

namespace singlerail::io {

using nlohmann::json;

// Numeric output is fixed at 12 significant digits; residual tolerances live
// at 1e-9..1e-12 so nothing meaningful is lost.
inline double round12(double v) {
  if (v == 0.0) {
    return 0.0;  // normalizes -0.0 as well
  }
  if (!std::isfinite(v)) {
    return v;
  }
  const double scale = std::pow(10.0, 11 - std::floor(std::log10(std::abs(v))));
  return std::round(v * scale) / scale;
}

inline json complex_to_json(cdouble z) {
  return json::array({round12(z.real()), round12(z.imag())});
}

inline cdouble complex_from_json(const json& j) {
  if (!j.is_array() || j.size() != 2) {
    throw json::type_error::create(302, "complex value must be an [re, im] pair", &j);
  }
  return cdouble{j.at(0).get<double>(), j.at(1).get<double>()};
}

inline json qubit_to_json(const SingleRailQubit& q) {
  return json{{"alpha", complex_to_json(q.alpha)},
              {"beta", complex_to_json(q.beta)},
              {"efficiency", round12(q.efficiency)}};
}

inline SingleRailQubit qubit_from_json(const json& j) {
  return canonicalize(complex_from_json(j.at("alpha")), complex_from_json(j.at("beta")),
                      j.at("efficiency").get<double>());
}

inline json density_to_json(const DensityMatrix2& d) {
  return json{{"rho",
               json::array({json::array({complex_to_json(d.rho00), complex_to_json(d.rho01)}),
                            json::array({complex_to_json(d.rho10), complex_to_json(d.rho11)})})}};
}

inline DensityMatrix2 density_from_json(const json& j) {
  const json& rho = j.at("rho");
  if (!rho.is_array() || rho.size() != 2 || rho.at(0).size() != 2 || rho.at(1).size() != 2) {
    throw json::type_error::create(302, "rho must be a row-major 2x2 matrix", &j);
  }
  return DensityMatrix2{
      complex_from_json(rho.at(0).at(0)), complex_from_json(rho.at(0).at(1)),
      complex_from_json(rho.at(1).at(0)), complex_from_json(rho.at(1).at(1))};
}

// A state file holds either qubit parameters or a density matrix.
struct ParsedState {
  SingleRailQubit qubit;
  DensityMatrix2 matrix;
  bool from_matrix{false};
};

inline ParsedState state_from_json(const json& j) {
  ParsedState s;
  if (j.contains("rho")) {
    s.matrix = density_from_json(j);
    validate_density_matrix(s.matrix);
    s.qubit = from_density_matrix(s.matrix);
    s.from_matrix = true;
  } else {
    s.qubit = qubit_from_json(j);
    s.matrix = to_density_matrix(s.qubit);
  }
  return s;
}

inline json stages_to_json(const std::vector<PlanStage>& stages) {
  json out = json::array();
  for (const PlanStage& stage : stages) {
    if (const auto* att = std::get_if<AttenuationStage>(&stage)) {
      out.push_back(json{{"attenuation", round12(att->tau)}});
    } else if (const auto* ph = std::get_if<PhaseShiftStage>(&stage)) {
      out.push_back(json{{"phase_shift", round12(ph->chi)}});
    } else {
      const auto& cond = std::get<ConditionalStage>(stage);
      out.push_back(json{{"beam_splitter_t", round12(cond.bs.t)},
                         {"homodyne", json{{"Q", round12(cond.setting.Q)},
                                           {"phi", round12(cond.setting.phi)}}}});
    }
  }
  return out;
}

// Plan files carry the input state so verification is self-contained.
inline json plan_to_json(const SingleRailQubit& input, const ConversionPlan& plan) {
  return json{{"input", qubit_to_json(input)},
              {"stages", stages_to_json(plan.stages)},
              {"predicted_output", qubit_to_json(plan.predicted_output)},
              {"predicted_success_density", round12(plan.predicted_success_density)}};
}

struct PlanFile {
  SingleRailQubit input;
  ConversionPlan plan;
};

inline PlanFile plan_from_json(const json& j) {
  PlanFile file;
  file.input = qubit_from_json(j.at("input"));
  for (const json& stage : j.at("stages")) {
    if (stage.contains("attenuation")) {
      file.plan.stages.push_back(AttenuationStage{stage.at("attenuation").get<double>()});
    } else if (stage.contains("phase_shift")) {
      file.plan.stages.push_back(PhaseShiftStage{stage.at("phase_shift").get<double>()});
    } else {
      const json& h = stage.at("homodyne");
      file.plan.stages.push_back(
          ConditionalStage{BeamSplitter(stage.at("beam_splitter_t").get<double>()),
                           HomodyneSetting{h.at("Q").get<double>(), h.at("phi").get<double>()}});
    }
  }
  file.plan.predicted_output = qubit_from_json(j.at("predicted_output"));
  file.plan.predicted_success_density = j.at("predicted_success_density").get<double>();
  return file;
}

inline std::string format12(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

inline std::string sweep_to_csv(const solver::SweepResult& result) {
  std::string out = "param,alpha_re,alpha_im,beta_re,beta_im,E,gen_eff,success_density\n";
  for (const auto& p : result.points) {
    out += format12(p.param) + ',' + format12(p.output.alpha.real()) + ',' +
           format12(p.output.alpha.imag()) + ',' + format12(p.output.beta.real()) + ',' +
           format12(p.output.beta.imag()) + ',' + format12(p.output.efficiency) + ',' +
           format12(p.gen_efficiency) + ',' + format12(p.success_density) + '\n';
  }
  return out;
}

}  // namespace singlerail::io
