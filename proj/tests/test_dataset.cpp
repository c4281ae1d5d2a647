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

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <set>
#include <stdexcept>
#include <string>
#include <tuple>

#include <doctest.h>

#include "itcg/dataset.hpp"
#include "itcg/errors.hpp"
#include "itcg/text.hpp"

using namespace itcg;

namespace {

constexpr double kPi = std::numbers::pi;

const SweepResult& small_sweep() {
    static const SweepResult res = [] {
        SweepGrid g;
        g.n_alpha = 5;
        g.n_beta = 6;
        g.refine_depth = 3;
        return sweep(g, kPi / 4.0, PropagationConfig{}, 1);
    }();
    return res;
}

std::filesystem::path scratch(const std::string& name) {
    const auto dir = std::filesystem::temp_directory_path() / "itcg_test_dataset";
    std::filesystem::create_directories(dir);
    return dir / name;
}

// Image of a trajectory under y -> -y, theta -> -theta, u -> -u.
ExtremalTrajectory mirrored(const ExtremalTrajectory& t) {
    ExtremalTrajectory m = t;
    m.seed.beta = 2.0 * kPi - t.seed.beta;
    for (auto& p : m.points) {
        p.z.y = -p.z.y;
        p.z.theta = -p.z.theta;
        p.p.py = -p.p.py;
        p.p.ptheta = -p.p.ptheta;
        p.u.u = -p.u.u;
        p.sigma = -p.sigma;
    }
    return m;
}

}  // namespace

TEST_CASE("stored samples respect the FOV and the reachability bound") {
    const auto ds = build(small_sweep(), 4);
    REQUIRE(!ds.samples.empty());
    for (const auto& s : ds.samples) {
        CHECK(s.sigma >= 0.0);
        CHECK(s.sigma <= ds.meta.sigma_max + 1e-3);
        CHECK(s.t_go >= s.r - 1e-9);
    }
    CHECK(ds.meta.sigma_max == kPi / 4.0);
    CHECK(ds.meta.stride == 4);
}

TEST_CASE("folding makes a trajectory and its mirror image identical") {
    for (const auto* t : small_sweep().trajectories()) {
        const auto a = extract_samples(*t, 3);
        const auto b = extract_samples(mirrored(*t), 3);
        REQUIRE(a.size() == b.size());
        for (std::size_t i = 0; i < a.size(); ++i) {
            CHECK(a[i].r == b[i].r);
            CHECK(a[i].sigma == b[i].sigma);
            CHECK(a[i].t_go == b[i].t_go);
            CHECK(a[i].u == b[i].u);
        }
    }
}

TEST_CASE("stride picks every stride-th point past the terminal guard") {
    const auto& t = *small_sweep().trajectories().front();
    for (int stride : {1, 2, 7}) {
        const auto s = extract_samples(t, stride);
        std::size_t expect = 0;
        for (std::size_t i = 0; i < t.points.size(); i += static_cast<std::size_t>(stride)) {
            if (t.points[i].tau >= 2.0 * t.tau0) {
                CHECK(s.at(expect).t_go == t.points[i].tau);
                ++expect;
            }
        }
        CHECK(s.size() == expect);
    }
    CHECK_THROWS_AS(extract_samples(t, 0), std::invalid_argument);
}

TEST_CASE("normalization is a bijection on the stored extents") {
    const auto ds = build(small_sweep(), 2);
    double err = 0.0;
    for (const auto& s : ds.samples) {
        for (const auto& [ch, v] : {std::pair{ds.norm.r, s.r}, std::pair{ds.norm.sigma, s.sigma},
                                    std::pair{ds.norm.t_go, s.t_go}, std::pair{ds.norm.u, s.u}}) {
            const double y = ch.normalize(v);
            CHECK(y >= -1.0 - 1e-12);
            CHECK(y <= 1.0 + 1e-12);
            err = std::max(err, std::abs(ch.denormalize(y) - v));
        }
    }
    CHECK(err <= 1e-12);
}

TEST_CASE("fit_channel handles constant data") {
    const auto c = fit_channel({2.0, 2.0, 2.0});
    CHECK(c.min == -2.0);
    CHECK(c.max == 2.0);
    const auto z = fit_channel({0.0, 0.0});
    CHECK(z.max == 1e-6);
    const auto n = fit_channel({-1.0, 3.0, 0.5});
    CHECK(n.min == -1.0);
    CHECK(n.max == 3.0);
    CHECK(n.normalize(-1.0) == -1.0);
    CHECK(n.normalize(3.0) == 1.0);
}

TEST_CASE("provenance has no duplicate keys") {
    const auto& sw = small_sweep();
    auto trajs = sw.trajectories();
    const std::size_t unique = trajs.size();
    trajs.push_back(trajs.front());  // a repeated seed is taken once
    const auto ds = build(trajs, 5, sw.config.T_bar);
    CHECK(ds.meta.sources.size() == unique);
    std::set<std::tuple<double, double, double>> keys;
    std::size_t next = 0;
    for (const auto& src : ds.meta.sources) {
        CHECK(src.first == next);
        next += src.count;
        for (std::size_t i = src.first; i < src.first + src.count; ++i) {
            CHECK(keys.insert({src.alpha, src.beta, ds.samples[i].t_go}).second);
        }
    }
    CHECK(next == ds.samples.size());
}

TEST_CASE("build rejects empty input and mixed FOV") {
    CHECK_THROWS_AS(build(std::vector<const ExtremalTrajectory*>{}, 1, 4.0), EmptySweep);
    auto t = *small_sweep().trajectories().front();
    auto u = *small_sweep().trajectories().back();
    u.seed.sigma_max = kPi / 3.0;
    CHECK_THROWS_AS(build({&t, &u}, 1, 4.0), std::invalid_argument);
    CHECK_THROWS_AS(build({&t}, 0, 4.0), std::invalid_argument);
}

TEST_CASE("save and load round trip exactly") {
    const auto ds = build(small_sweep(), 6);
    const auto path = scratch("ds.csv").string();
    save(ds, path);
    CHECK(sidecar_path(path) == scratch("ds.meta.json").string());
    const auto back = load(path);
    REQUIRE(back.samples.size() == ds.samples.size());
    for (std::size_t i = 0; i < ds.samples.size(); ++i) {
        CHECK(back.samples[i].r == ds.samples[i].r);
        CHECK(back.samples[i].sigma == ds.samples[i].sigma);
        CHECK(back.samples[i].t_go == ds.samples[i].t_go);
        CHECK(back.samples[i].u == ds.samples[i].u);
    }
    CHECK(back.norm.u.min == ds.norm.u.min);
    CHECK(back.meta.sources.size() == ds.meta.sources.size());
    CHECK(back.meta.grid == ds.meta.grid);
    // Saving the loaded copy reproduces the bytes.
    const auto again = scratch("ds2.csv").string();
    save(back, again);
    CHECK(text::read_file(again) == text::read_file(path));
    CHECK(text::read_file(sidecar_path(again)) == text::read_file(sidecar_path(path)));
}

TEST_CASE("load reports the offending line") {
    const auto ds = build(small_sweep(), 50);
    const auto path = scratch("bad.csv").string();
    save(ds, path);
    std::string body = text::read_file(path);
    const auto third = body.find('\n', body.find('\n') + 1);
    body.insert(third + 1, "1,2,x,4\n");
    text::write_file(path, body);
    try {
        load(path);
        FAIL("expected Malformed");
    } catch (const Malformed& e) {
        CHECK(e.line() == 3);  // header, one sample, then the bad row
    }
    text::write_file(path, "r,sigma,tgo\n");
    CHECK_THROWS_AS(load(path), Malformed);
    std::filesystem::remove(sidecar_path(path));
    CHECK_THROWS_AS(load(path), Malformed);
    CHECK_THROWS_AS(load(scratch("none.csv").string()), Malformed);
}
