// Copyright 2026 The ITCG Authors
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

#ifndef ITCG_CLI_CONFIG_HPP
#define ITCG_CLI_CONFIG_HPP

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "itcg/extremal.hpp"
#include "itcg/guidance.hpp"
#include "itcg/mlp.hpp"
#include "itcg/simulator.hpp"

namespace itcg::cli {

struct SweepSection {
    double sigma_max_deg = 60.0;
    SweepGrid grid;
    PropagationConfig propagation;
    double min_success_ratio = 0.95;
    bool per_seed_files = false;
};

struct DatasetSection {
    int stride = 8;
};

struct GuidanceSection {
    double t_ref = 2.5;
    double handover_t_go = kDefaultHandoverTgo;
    double a_max = 100.0;
    std::vector<double> pn_gains{3.0, 4.0, 5.0};
    std::vector<double> pn_hold_fractions{0.85, 0.9, 0.95, 1.0};
};

struct ScenarioSection {
    double r0 = 10000.0;
    double sigma0_deg = 30.0;
    double speed = 250.0;
    double t_f = 60.0;
    double dt_guidance = 0.01;
    double dt_integrate = 0.001;
    double capture_radius = 0.5;
    double timeout = 5.0;
};

struct PipelineConfig {
    SweepSection sweep;
    DatasetSection dataset;
    TrainConfig train;
    GuidanceSection guidance;
    ScenarioSection scenario;

    double sigma_max() const;
    ScalingParams scaling() const;
    /// The scenario with the FOV limit and command bound filled in.
    Scenario make_scenario() const;
    /// Throws ConfigError naming the first inconsistent key.
    void validate() const;
};

/// Parses TOML text. Unknown sections or keys, wrong value types and parse
/// errors raise ConfigError with the dotted key path ("sweep.n_alpha").
PipelineConfig parse_config(const std::string& toml_text);
/// Throws ConfigError (key "<file>") when the file cannot be read.
PipelineConfig load_config(const std::string& path);

/// Every resolved value, for manifests.
nlohmann::json to_json(const PipelineConfig& cfg);

}  // namespace itcg::cli

#endif  // ITCG_CLI_CONFIG_HPP
