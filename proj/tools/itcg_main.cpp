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

// itcg: sweep -> dataset -> train -> simulate / compare -> audit -> report.

#include <iostream>

#include <CLI11.hpp>

#include "cli/commands.hpp"
#include "itcg/version.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Impact-time-control guidance with a field-of-view limit"};
    app.set_version_flag("--version", itcg::kVersion);
    itcg::cli::CliOptions opt;
    std::uint64_t seed = 0;
    bool no_plots = false;
    app.add_option("--config", opt.config_path, "TOML config; built-in defaults when omitted");
    app.add_option("--out", opt.out_dir, "output root")->capture_default_str();
    app.add_option("--threads", opt.threads, "worker cap, 0 = all cores")->check(CLI::NonNegativeNumber);
    auto* seed_opt = app.add_option("--seed", seed, "override train.seed");
    app.add_flag("--no-plots", no_plots, "skip SVG output");
    app.require_subcommand(1, 1);
    for (const auto& name : itcg::cli::kCommands) app.add_subcommand(name);
    app.fallthrough();
    CLI11_PARSE(app, argc, argv);
    if (seed_opt->count()) opt.seed = seed;
    opt.plots = !no_plots;
    return itcg::cli::run_command(app.get_subcommands().front()->get_name(), opt, std::cout);
}
