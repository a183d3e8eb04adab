// Copyright 2026 The catsim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef CATSIM_SCENARIOS_HPP
#define CATSIM_SCENARIOS_HPP

#include <iosfwd>
#include <string>
#include <vector>

#include "catsim/models.hpp"

namespace catsim {

/// Parsed scenario configuration: flat `key = value` pairs grouped in
/// [model], [params], [scan], [run] and [output] sections. Unknown sections
/// or keys are rejected at parse time; cross-field constraints are checked
/// by validate().
struct ScenarioConfig {
  // [model]
  ModelRung rung = ModelRung::OneMode;
  double alpha_sq = 2.0;
  int n_a = 0;  // 0 = derive from the truncation rule
  int n_b = 4;
  double detuning = 0.0;    // MHz
  double rate_scale = 1.0;  // multiplies every rate, divides times

  // [params]
  SystemParams params;

  // [scan]
  std::string type = "evolve";
  std::vector<double> alpha_sq_list;
  double horizon = 0.0;  // us (bitflip)
  int samples = 80;
  bool shrink_truncation = false;
  std::vector<double> delta_list;  // MHz (kappa2_cal)
  std::string state = "coherent";  // wigner / evolve initial state
  double extent = 3.0;
  int resolution = 61;
  double t_max = 10.0;  // us (evolve)

  // [run]
  int jobs = 0;

  // [output]
  std::string output_path = "out.csv";

  /// Raw key/value echo in file order, for the manifest.
  std::vector<std::pair<std::string, std::string>> echo;

  static ScenarioConfig parse_file(const std::string& path);
  static ScenarioConfig parse_text(const std::string& text);

  /// `--set key=value` override of a [params] field.
  void apply_param_override(const std::string& key, const std::string& value);

  /// Checks the assembled configuration against the module preconditions
  /// (before any compute). Throws std::invalid_argument.
  void validate() const;

  ModelSpec model_spec() const;
};

/// Executes the configured scenario, writing the output CSV and a manifest
/// JSON (`<output>.manifest.json`). Returns the paths written. Throws
/// std::invalid_argument for validation problems and NumericError for
/// numerical failures; the CLI maps those to exit codes 2 and 3.
std::vector<std::string> run_scenario(const ScenarioConfig& config, std::ostream& log);

// ---------------------------------------------------------------------------
// Built-in acceptance scenarios. Each one pins its thresholds in code and
// reports a single pass/fail verdict with the measured numbers.

struct CriterionResult {
  int id = 0;
  std::string name;
  bool passed = false;
  std::string detail;
  double seconds = 0.0;
};

/// Names, in id order (1-based ids).
const std::vector<std::string>& criterion_names();

/// Runs one built-in criterion; `jobs` caps the internal fan-out.
CriterionResult run_criterion(int id, int jobs = 0);

/// Resolves a name to an id; throws std::invalid_argument for unknown names.
int criterion_id(const std::string& name);

}  // namespace catsim

#endif  // CATSIM_SCENARIOS_HPP
