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

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include <doctest.h>
#include <json.hpp>

#include "itcg/errors.hpp"
#include "itcg/mlp.hpp"
#include "itcg/text.hpp"

using namespace itcg;

namespace {

constexpr int H = MlpModel::kHidden;

// Straight loops over the flat parameter layout (row-major weights).
double reference_forward(const MlpModel& m, const double x[3]) {
    const auto& t = m.theta;
    double h1[H], h2[H];
    for (int i = 0; i < H; ++i) {
        double a = t[MlpLayout::b1 + i];
        for (int j = 0; j < 3; ++j) a += t[MlpLayout::W1 + i * 3 + j] * x[j];
        h1[i] = std::tanh(a);
    }
    for (int i = 0; i < H; ++i) {
        double a = t[MlpLayout::b2 + i];
        for (int j = 0; j < H; ++j) a += t[MlpLayout::W2 + i * H + j] * h1[j];
        h2[i] = std::tanh(a);
    }
    double y = t[MlpLayout::b3];
    for (int j = 0; j < H; ++j) y += t[MlpLayout::W3 + j] * h2[j];
    return y;
}

MlpModel random_model(std::mt19937_64& rng) {
    MlpModel m = init(rng());
    std::normal_distribution<double> n(0.0, 0.3);
    // Non-zero biases so every block of the gradient is exercised.
    for (int i = MlpLayout::b1; i < MlpLayout::W2; ++i) m.theta[i] = n(rng);
    for (int i = MlpLayout::b2; i < MlpLayout::W3; ++i) m.theta[i] = n(rng);
    m.theta[MlpLayout::b3] = n(rng);
    return m;
}

// Smooth synthetic target on the normalized cube.
Dataset synthetic(std::size_t n, unsigned seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> r(0.0, 3.0), s(0.0, 1.0), t(0.5, 4.0);
    Dataset ds;
    for (std::size_t i = 0; i < n; ++i) {
        const double a = r(rng), b = s(rng), c = t(rng);
        ds.samples.push_back({a, b, c, std::sin(a) * b + 0.3 * c});
    }
    ds.norm = {{0.0, 3.0}, {0.0, 1.0}, {0.0, 4.0}, {-1.0, 2.2}};
    return ds;
}

std::string scratch(const std::string& name) {
    const auto dir = std::filesystem::temp_directory_path() / "itcg_test_mlp";
    std::filesystem::create_directories(dir);
    return (dir / name).string();
}

}  // namespace

TEST_CASE("parameter layout") {
    CHECK(MlpModel::kParams == 3 * 20 + 20 + 20 * 20 + 20 + 20 + 1);
    CHECK(MlpLayout::b3 == MlpModel::kParams - 1);
}

TEST_CASE("forward matches a loop implementation") {
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> u(-1.5, 1.5);
    for (int k = 0; k < 50; ++k) {
        const MlpModel m = random_model(rng);
        for (int i = 0; i < 20; ++i) {
            const double x[3] = {u(rng), u(rng), u(rng)};
            CHECK(forward_normalized(m, {x[0], x[1], x[2]}) == doctest::Approx(reference_forward(m, x)).epsilon(1e-13));
        }
    }
}

TEST_CASE("forward is deterministic") {
    std::mt19937_64 rng(32);
    MlpModel m = random_model(rng);
    m.norm = {{0.0, 2.0}, {0.0, 1.0}, {0.0, 4.0}, {-3.0, 3.0}};
    const double a = forward(m, 0.7, 0.2, 2.5);
    for (int i = 0; i < 100; ++i) CHECK(forward(m, 0.7, 0.2, 2.5) == a);
    bool stale = true;
    forward(m, 0.7, 0.2, 2.5, &stale);
    CHECK_FALSE(stale);
    forward(m, 2.5, 0.2, 2.5, &stale);
    CHECK(stale);
}

TEST_CASE("initialization") {
    const MlpModel a = init(5), b = init(5), c = init(6);
    CHECK(a.theta == b.theta);
    CHECK(a.theta != c.theta);
    for (int i = 0; i < H * 3; ++i) CHECK(std::abs(a.theta[MlpLayout::W1 + i]) <= std::sqrt(1.0));
    for (int i = 0; i < H * H; ++i) CHECK(std::abs(a.theta[MlpLayout::W2 + i]) <= std::sqrt(3.0 / H));
    for (int i = 0; i < H; ++i) {
        CHECK(a.theta[MlpLayout::b1 + i] == 0.0);
        CHECK(a.theta[MlpLayout::b2 + i] == 0.0);
    }
    // A zero network returns the middle of the output extent.
    MlpModel z = init_zero();
    z.norm.u = {-1.0, 5.0};
    CHECK(forward(z, 0.3, 0.1, 1.0) == doctest::Approx(2.0));
}

TEST_CASE("backprop gradient matches finite differences") {
    std::mt19937_64 rng(33);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    double worst = 0.0;
    for (int k = 0; k < 100; ++k) {
        const MlpModel m = random_model(rng);
        const Eigen::Vector3d x{u(rng), u(rng), u(rng)};
        worst = std::max(worst, gradient_check(m, x, u(rng)));
    }
    CHECK(worst < 1e-6);

    // Independent check of the loss value and one gradient entry.
    const MlpModel m = random_model(rng);
    const Eigen::Vector3d x{0.1, -0.4, 0.8};
    const double xs[3] = {x[0], x[1], x[2]};
    Eigen::Matrix<double, MlpModel::kParams, 1> g;
    const double loss = loss_and_gradient(m, x, 0.25, &g);
    const double y = reference_forward(m, xs);
    CHECK(loss == doctest::Approx((y - 0.25) * (y - 0.25)).epsilon(1e-13));
    CHECK(g[MlpLayout::b3] == doctest::Approx(2.0 * (y - 0.25)).epsilon(1e-13));
}

TEST_CASE("training fits a smooth target and is reproducible") {
    const Dataset ds = synthetic(4000, 7);
    TrainConfig cfg;
    cfg.epochs = 60;
    cfg.seed = 3;
    const auto a = train(ds, cfg);
    const auto b = train(ds, cfg);
    CHECK(a.model.theta == b.model.theta);
    CHECK(a.report.same_numbers(b.report));
    CHECK(a.validation_indices == b.validation_indices);
    CHECK(a.report.val_samples == 400);
    CHECK(a.report.train_samples == 3600);
    CHECK(a.report.final_val_rmse < 2e-2);
    CHECK(a.report.final_val_rmse <= std::sqrt(a.report.val_mse.at(0)));
    // Held-out RMSE recomputed from the returned model.
    double se = 0.0;
    for (std::size_t i : a.validation_indices) {
        const auto& s = ds.samples[i];
        const double y = forward(a.model, s.r, s.sigma, s.t_go);
        const double e = ds.norm.u.normalize(y) - ds.norm.u.normalize(s.u);
        se += e * e;
    }
    CHECK(std::sqrt(se / a.validation_indices.size()) == doctest::Approx(a.report.final_val_rmse).epsilon(1e-9));

    cfg.seed = 4;
    CHECK(train(ds, cfg).model.theta != a.model.theta);
}

TEST_CASE("training rejects bad input") {
    TrainConfig cfg;
    cfg.epochs = 0;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg = {};
    cfg.validation_fraction = 0.0;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    CHECK_THROWS_AS(train(synthetic(9, 1), TrainConfig{}), std::invalid_argument);
    Dataset nan = synthetic(200, 2);
    nan.samples[10].u = std::nan("");
    CHECK_THROWS(train(nan, TrainConfig{}));
}

TEST_CASE("model files round trip and are validated") {
    std::mt19937_64 rng(34);
    MlpModel m = random_model(rng);
    m.norm = {{0.0, 2.0}, {0.0, 1.0}, {0.0, 4.0}, {-3.0, 3.0}};
    const auto path = scratch("m.json");
    save(m, path);
    const MlpModel back = load_model(path);
    CHECK(back.theta == m.theta);
    CHECK(back.norm.u.max == 3.0);
    CHECK(forward(back, 0.4, 0.3, 2.0) == forward(m, 0.4, 0.3, 2.0));

    auto j = nlohmann::json::parse(text::read_file(path));
    j["version"] = kMlpFormatVersion + 1;
    text::write_file(path, j.dump());
    CHECK_THROWS_AS(load_model(path), VersionMismatch);
    j["version"] = kMlpFormatVersion;
    j["weights"][1].erase(0);
    text::write_file(path, j.dump());
    CHECK_THROWS_AS(load_model(path), Malformed);
    text::write_file(path, "{not json");
    CHECK_THROWS_AS(load_model(path), Malformed);
    CHECK_THROWS_AS(load_model(scratch("missing.json")), IoError);
}

TEST_CASE("single-query latency") {
    std::mt19937_64 rng(35);
    MlpModel m = random_model(rng);
    m.norm = {{0.0, 2.0}, {0.0, 1.0}, {0.0, 4.0}, {-3.0, 3.0}};
    std::vector<double> ns;
    double sink = 0.0;
    for (int i = 0; i < 2000; ++i) {
        const auto t0 = std::chrono::steady_clock::now();
        sink += forward(m, 0.5 + 1e-4 * i, 0.3, 2.5);
        const auto t1 = std::chrono::steady_clock::now();
        ns.push_back(std::chrono::duration<double, std::nano>(t1 - t0).count());
    }
    std::nth_element(ns.begin(), ns.begin() + ns.size() / 2, ns.end());
    CHECK(std::isfinite(sink));
    CHECK(ns[ns.size() / 2] < 1e5);
}
