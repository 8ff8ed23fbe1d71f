#pragma once

#include <stdexcept>
#include <string>

#include "evcharge/engine.hpp"

namespace evcharge::config {

class ScenarioError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Everything one simulation needs, loadable from a JSON file (comments
// allowed). Unknown keys are rejected; omitted fields take the documented
// defaults.
struct Scenario {
  battery::CellParams cell;
  battery::PackConfig pack;
  dab::DabParams dab;
  dab::LossParams loss;
  control::PidGains gains_cc;
  control::PidGains gains_cv;
  strategy::CcCvConfig cccv;
  strategy::MsccConfig mscc;
  strategy::ReflexConfig reflex;
  engine::SimConfig sim;

  static Scenario defaults();

  engine::Inputs inputs() const;  // aggregates the cell into pack parameters
  void validate() const;          // throws ScenarioError naming the field
};

Scenario scenario_from_json(const std::string& text,
                            const std::string& origin = "<string>");
Scenario load_scenario(const std::string& path);

}  // namespace evcharge::config
