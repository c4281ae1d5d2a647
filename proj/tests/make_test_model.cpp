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

// Trains the small network shared by the guidance and simulator tests.
//
//   make_test_model <out.json> <sigma_max_deg> <stride> <epochs>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <numbers>
#include <string>
#include <thread>

#include "itcg/dataset.hpp"
#include "itcg/extremal.hpp"
#include "itcg/mlp.hpp"

int main(int argc, char** argv) {
    if (argc != 5) {
        std::fprintf(stderr, "usage: %s <out.json> <sigma_max_deg> <stride> <epochs>\n", argv[0]);
        return 2;
    }
    const std::string out = argv[1];
    const double sigma_max = std::atof(argv[2]) * std::numbers::pi / 180.0;
    const int stride = std::atoi(argv[3]);
    itcg::TrainConfig tc;
    tc.epochs = std::atoi(argv[4]);

    const auto t0 = std::chrono::steady_clock::now();
    const auto sw = itcg::sweep(itcg::SweepGrid{}, sigma_max, itcg::PropagationConfig{},
                                static_cast<int>(std::thread::hardware_concurrency()));
    const auto ds = itcg::build(sw, stride);
    const auto res = itcg::train(ds, tc);
    std::filesystem::create_directories(std::filesystem::path(out).parent_path());
    itcg::save(res.model, out);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("%s: %zu samples, held-out rmse %.3e, %.1f s\n", out.c_str(), ds.samples.size(),
                res.report.final_val_rmse, secs);
    return 0;
}
