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

#ifndef ITCG_CLI_COMMANDS_HPP
#define ITCG_CLI_COMMANDS_HPP

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace itcg::cli {

enum ExitCode : int {
    kOk = 0,
    kFailure = 1,  // anything not covered below
    kConfigError = 2,
    kMissingUpstream = 3,
    kAuditFailure = 4,  // also a sweep below its success-ratio threshold
};

struct CliOptions {
    std::string config_path;  // empty: built-in defaults
    std::string out_dir = "run";
    int threads = 0;  // 0: hardware concurrency
    std::optional<std::uint64_t> seed;  // overrides train.seed
    bool plots = true;
};

inline const std::vector<std::string> kCommands{"sweep", "dataset", "train", "simulate", "compare", "audit", "report"};

/// Runs one subcommand and maps errors to exit codes; messages go to log.
int run_command(const std::string& name, const CliOptions& opt, std::ostream& log);

// Artifact locations under the output root.
inline constexpr const char* kSweepCsv = "sweep/trajectories.csv";
inline constexpr const char* kSweepReport = "sweep/report.json";
inline constexpr const char* kDatasetCsv = "dataset/dataset.csv";
inline constexpr const char* kDatasetMeta = "dataset/dataset.meta.json";
inline constexpr const char* kModelJson = "model/model.json";
inline constexpr const char* kTrainReport = "model/train_report.json";
inline constexpr const char* kAuditJson = "audit/audit.json";

}  // namespace itcg::cli

#endif  // ITCG_CLI_COMMANDS_HPP
