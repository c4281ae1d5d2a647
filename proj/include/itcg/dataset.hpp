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

// Supervised samples (r, sigma, t_go) -> u cut from extremal trajectories.
// Samples with negative lead angle are folded onto sigma >= 0 with the
// command negated, using the odd symmetry of the optimal feedback map.

#ifndef ITCG_DATASET_HPP
#define ITCG_DATASET_HPP

#include <cstddef>
#include <string>
#include <vector>

#include <json.hpp>

#include "itcg/extremal.hpp"

namespace itcg {

struct Sample {
    double r = 0.0;
    double sigma = 0.0;  // rad, in [0, sigma_max]
    double t_go = 0.0;   // equals tau
    double u = 0.0;
};

/// Affine map of [min, max] onto [-1, 1].
struct Channel {
    double min = -1.0;
    double max = 1.0;

    double normalize(double x) const { return 2.0 * (x - min) / (max - min) - 1.0; }
    double denormalize(double y) const { return min + 0.5 * (y + 1.0) * (max - min); }
};

struct NormStats {
    Channel r;
    Channel sigma;
    Channel t_go;
    Channel u;
};

/// Extent of the values, or [-m, m] with m = max(max |v|, 1e-6) when the
/// values are (nearly) all equal.
Channel fit_channel(const std::vector<double>& values);

struct DatasetSource {
    double alpha = 0.0;
    double beta = 0.0;
    std::size_t first = 0;  // index of its first sample
    std::size_t count = 0;
};

struct DatasetMeta {
    double sigma_max = 0.0;
    double eps = 0.0;
    double T_bar = 0.0;
    int stride = 1;
    std::string grid;  // free-form description of the generating sweep
    std::string generator_version;
    std::vector<DatasetSource> sources;
};

struct Dataset {
    std::vector<Sample> samples;
    NormStats norm;
    DatasetMeta meta;
};

struct PolarSample {
    double tau = 0.0;
    double r = 0.0;
    double sigma = 0.0;  // signed
};

/// Throws ZeroRange for a point at the origin.
std::vector<PolarSample> polar_of_trajectory(const ExtremalTrajectory& traj);

/// Every stride-th recorded point (counting from the first) with
/// tau >= 2 tau0, folded onto sigma >= 0. Throws std::invalid_argument for
/// stride < 1.
std::vector<Sample> extract_samples(const ExtremalTrajectory& traj, int stride);

/// Concatenates the samples in input order. Repeated (alpha, beta) seeds are
/// taken once. Throws EmptySweep when nothing usable is given.
Dataset build(const std::vector<const ExtremalTrajectory*>& trajs, int stride, double T_bar,
              const std::string& grid_description = "");
Dataset build(const SweepResult& sweep, int stride);

/// dataset.csv -> dataset.meta.json
std::string sidecar_path(const std::string& csv_path);

/// Writes the CSV body and its JSON sidecar. Throws IoError.
void save(const Dataset& ds, const std::string& csv_path);
/// Throws IoError or Malformed (with the offending line).
Dataset load(const std::string& csv_path);

nlohmann::json to_json(const NormStats& n);
NormStats norm_from_json(const nlohmann::json& j);

}  // namespace itcg

#endif  // ITCG_DATASET_HPP
