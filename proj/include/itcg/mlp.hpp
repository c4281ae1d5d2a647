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

// The 3-20-20-1 tanh network that serves as the feedback law
// u = C(r, sigma, t_go), and its trainer.
//
// All parameters live in one flat vector (layer by layer, row-major
// weights followed by biases) so the optimizer and the gradient check
// work on a single array.

#ifndef ITCG_MLP_HPP
#define ITCG_MLP_HPP

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "itcg/dataset.hpp"

namespace itcg {

inline constexpr int kMlpFormatVersion = 1;

struct MlpModel {
    static constexpr int kIn = 3;
    static constexpr int kHidden = 20;
    static constexpr int kOut = 1;
    static constexpr int kParams = kHidden * kIn + kHidden + kHidden * kHidden + kHidden + kOut * kHidden + kOut;
    static constexpr std::array<int, 4> kLayers = {kIn, kHidden, kHidden, kOut};

    Eigen::Matrix<double, kParams, 1> theta = Eigen::Matrix<double, kParams, 1>::Zero();
    NormStats norm;
};

/// Offsets of each block inside MlpModel::theta.
struct MlpLayout {
    static constexpr int W1 = 0;
    static constexpr int b1 = W1 + MlpModel::kHidden * MlpModel::kIn;
    static constexpr int W2 = b1 + MlpModel::kHidden;
    static constexpr int b2 = W2 + MlpModel::kHidden * MlpModel::kHidden;
    static constexpr int W3 = b2 + MlpModel::kHidden;
    static constexpr int b3 = W3 + MlpModel::kHidden;
};

/// Weights uniform in +-sqrt(3 / fan_in), biases zero; deterministic in seed.
MlpModel init(std::uint64_t seed);
/// All parameters zero: the output is the (denormalized) output bias.
MlpModel init_zero();

/// Denormalized command at (r, sigma, t_go). Inputs outside the stored
/// extents are still evaluated; *stale (if given) reports whether any was.
double forward(const MlpModel& m, double r, double sigma, double t_go, bool* stale = nullptr);

/// Network output in normalized units for normalized inputs.
double forward_normalized(const MlpModel& m, const Eigen::Vector3d& x);

struct TrainConfig {
    std::uint64_t seed = 1;
    int epochs = 150;
    int batch_size = 256;
    double learning_rate = 3e-3;
    double lr_decay = 0.99;  // per epoch, floored at min_learning_rate
    double min_learning_rate = 1e-5;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double validation_fraction = 0.1;
    int patience = 50;  // epochs without validation improvement before stopping

    void validate() const;
};

struct TrainReport {
    std::vector<double> train_mse;  // per epoch, normalized units
    std::vector<double> val_mse;
    int best_epoch = 0;             // parameters of this epoch are returned
    double final_train_mse = 0.0;   // of the returned parameters
    double final_val_rmse = 0.0;    // held-out RMSE of the returned parameters
    std::size_t train_samples = 0;
    std::size_t val_samples = 0;
    double wall_seconds = 0.0;

    /// Equality of everything except wall time.
    bool same_numbers(const TrainReport& o) const;
};

struct TrainResult {
    MlpModel model;
    TrainReport report;
    std::vector<std::size_t> validation_indices;  // into ds.samples
};

/// Mini-batch Adam on the normalized mean-squared error with a seeded
/// 90/10 split and early stopping. Throws Diverged, or std::invalid_argument
/// for fewer than 10 samples.
TrainResult train(const Dataset& ds, const TrainConfig& cfg);

/// Squared error (y - t)^2 at one normalized sample and its gradient.
double loss_and_gradient(const MlpModel& m, const Eigen::Vector3d& x, double target,
                         Eigen::Matrix<double, MlpModel::kParams, 1>* grad);

/// max_i |g_i - fd_i| / max_i |g_i| between the backpropagated gradient of
/// the squared error and central differences (step 1e-6).
double gradient_check(const MlpModel& m, const Eigen::Vector3d& x, double target);

/// Throws IoError.
void save(const MlpModel& m, const std::string& path);
/// Throws IoError, Malformed or VersionMismatch.
MlpModel load_model(const std::string& path);

}  // namespace itcg

#endif  // ITCG_MLP_HPP
