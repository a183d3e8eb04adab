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

#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "catsim/scenarios.hpp"
#include "catsim/version.hpp"

extern char** environ;

namespace {

constexpr int kExitValidation = 2;
constexpr int kExitNumerical = 3;

// CATSIM_SET_<key>=<value> environment overrides mirror --set.
std::vector<std::pair<std::string, std::string>> env_overrides() {
  std::vector<std::pair<std::string, std::string>> out;
  const std::string prefix = "CATSIM_SET_";
  for (char** e = environ; e && *e; ++e) {
    std::string entry(*e);
    if (entry.rfind(prefix, 0) != 0) continue;
    auto eq = entry.find('=');
    if (eq == std::string::npos || eq <= prefix.size()) continue;
    out.emplace_back(entry.substr(prefix.size(), eq - prefix.size()), entry.substr(eq + 1));
  }
  return out;
}

std::pair<std::string, std::string> split_set(const std::string& kv) {
  auto eq = kv.find('=');
  if (eq == std::string::npos || eq == 0 || eq + 1 >= kv.size())
    throw std::invalid_argument("--set expects key=value, got '" + kv + "'");
  return {kv.substr(0, eq), kv.substr(eq + 1)};
}

int run_builtin(const std::string& name, int jobs) {
  int id = 0;
  try {
    id = catsim::criterion_id(name);
  } catch (const std::invalid_argument&) {
    id = std::atoi(name.c_str());
    if (id < 1 || id > static_cast<int>(catsim::criterion_names().size())) throw;
  }
  catsim::CriterionResult res = catsim::run_criterion(id, jobs);
  std::printf("[%s] %d. %s (%.2f s)\n%s", res.passed ? "PASS" : "FAIL", res.id,
              res.name.c_str(), res.seconds, res.detail.c_str());
  return res.passed ? 0 : kExitNumerical;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"catsim: dissipative cat-qubit simulator and analysis toolkit"};
  app.set_version_flag("--version", std::string(catsim::kVersion));
  app.require_subcommand(1);

  std::string config_path, builtin;
  std::vector<std::string> sets;
  int jobs = 0;

  CLI::App* run = app.add_subcommand("run", "run a scenario from a config file");
  run->add_option("config", config_path, "scenario config file");
  run->add_option("--builtin", builtin,
                  "run a named built-in scenario instead of a config file");
  run->add_option("--set", sets, "override a parameter, key=value (repeatable)");
  run->add_option("--jobs", jobs, "cap for concurrent workers (0 = hardware)");

  CLI::App* params = app.add_subcommand("params", "inspect the parameter registry");
  CLI::App* params_show = params->add_subcommand("show", "print the registry");
  params_show->add_option("--set", sets, "override a parameter, key=value (repeatable)");

  CLI::App* validate = app.add_subcommand("validate", "parse and validate a config file");
  validate->add_option("config", config_path, "scenario config file")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) {
      if (!builtin.empty()) return run_builtin(builtin, jobs);
      if (config_path.empty())
        throw std::invalid_argument("run: need a config file or --builtin NAME");
      catsim::ScenarioConfig cfg = catsim::ScenarioConfig::parse_file(config_path);
      for (const auto& [k, v] : env_overrides()) cfg.apply_param_override(k, v);
      for (const auto& kv : sets) {
        auto [k, v] = split_set(kv);
        cfg.apply_param_override(k, v);
      }
      if (jobs > 0) cfg.jobs = jobs;
      std::vector<std::string> outputs = catsim::run_scenario(cfg, std::cout);
      for (const auto& path : outputs) std::cout << "wrote " << path << "\n";
      return 0;
    }
    if (params->parsed()) {
      catsim::SystemParams p;
      for (const auto& [k, v] : env_overrides()) p.set_field(k, std::stod(v));
      for (const auto& kv : sets) {
        auto [k, v] = split_set(kv);
        p.set_field(k, std::stod(v));
      }
      p.validate();
      for (const auto& [key, value] : p.fields())
        std::printf("%s = %.17g\n", key.c_str(), value);
      std::printf("# derived: kappa2 = %.17g MHz\n",
                  catsim::kappa2_effective(p.g2, p.kappa_b));
      return 0;
    }
    if (validate->parsed()) {
      catsim::ScenarioConfig cfg = catsim::ScenarioConfig::parse_file(config_path);
      cfg.validate();
      std::cout << "ok: " << config_path << "\n";
      return 0;
    }
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const catsim::NumericError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumerical;
  }
  return 0;
}
