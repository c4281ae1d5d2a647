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
#include <cstdlib>
#include <filesystem>
#include <memory>
#include <numbers>
#include <stdexcept>
#include <string>

#include <doctest.h>

#include "itcg/errors.hpp"
#include "itcg/simulator.hpp"
#include "itcg/text.hpp"

using namespace itcg;

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kDeg = kPi / 180.0;

std::shared_ptr<const MlpModel> trained() {
    static const auto m = [] {
        const char* path = std::getenv("ITCG_TEST_MODEL");
        REQUIRE_MESSAGE(path != nullptr, "ITCG_TEST_MODEL is not set");
        return std::make_shared<const MlpModel>(load_model(path));
    }();
    return m;
}

class ConstantLaw : public GuidanceLaw {
public:
    explicit ConstantLaw(double a) : a_(a) {}
    std::string name() const override { return "const"; }
    double command(const GuidanceQuery&) override { return a_; }

private:
    double a_;
};

Scenario base45() {
    Scenario sc;
    sc.sigma_max = 45.0 * kDeg;
    sc.sigma0 = 30.0 * kDeg;
    sc.t_f = 50.0;
    return sc;
}

double trapezoid_effort(const SimResult& r) {
    double j = 0.0;
    for (std::size_t i = 1; i < r.history.size(); ++i) {
        const auto& p = r.history[i - 1];
        const auto& q = r.history[i];
        j += 0.5 * (q.t - p.t) * 0.5 * (p.a * p.a + q.a * q.a);
    }
    return j;
}

}  // namespace

TEST_CASE("scenario validation and poses") {
    Scenario sc;
    CHECK_NOTHROW(sc.validate());
    sc.t_f = 30.0;  // 30 s * 250 m/s < 10 km
    CHECK_THROWS_AS(sc.validate(), std::invalid_argument);
    sc = {};
    sc.dt_integrate = 0.02;
    CHECK_THROWS_AS(sc.validate(), std::invalid_argument);
    sc = {};
    sc.sigma_max = 2.0;
    CHECK_THROWS_AS(sc.validate(), std::invalid_argument);

    sc = {};
    sc.sigma0 = 0.4;
    const auto c = initial_pose(sc);
    CHECK(c.x == doctest::Approx(-sc.r0));
    CHECK(c.y == doctest::Approx(0.0));
    CHECK(c.theta == doctest::Approx(-0.4));
    const auto back = scenario_from_pose(c.x, c.y, c.theta, Scenario{});
    CHECK(back.r0 == doctest::Approx(sc.r0));
    CHECK(back.sigma0 == doctest::Approx(0.4));
}

TEST_CASE("straight flight at the target") {
    Scenario sc;
    sc.sigma0 = 0.0;
    sc.t_f = 45.0;
    ConstantLaw zero(0.0);
    const auto r = run(sc, zero);
    REQUIRE(r.intercepted);
    CHECK(r.impact_time == doctest::Approx((sc.r0 - sc.capture_radius) / sc.speed).epsilon(1e-9));
    CHECK(r.effort_J == 0.0);
    CHECK(r.sigma_peak == doctest::Approx(0.0));
    CHECK(r.miss_distance < 1e-6);
    CHECK(r.speed == sc.speed);
}

TEST_CASE("constant turn follows the circle") {
    Scenario sc;
    sc.sigma0 = 0.0;
    sc.t_f = 200.0;
    sc.timeout = 0.0;
    sc.sigma_max = kPi / 2.0;
    ConstantLaw turn(20.0);
    const auto r = run(sc, turn);
    const double R = sc.speed * sc.speed / 20.0;
    const double w = 20.0 / sc.speed;
    // Centre to the left of the initial heading (+x).
    const double cx = -sc.r0, cy = R;
    double worst = 0.0;
    for (const auto& h : r.history) {
        const double x = cx + R * std::sin(w * h.t);
        const double y = cy - R * std::cos(w * h.t);
        worst = std::max(worst, std::hypot(h.x - x, h.y - y));
        CHECK(h.theta == doctest::Approx(w * h.t).epsilon(1e-9));
    }
    CHECK(worst < 1e-6 * R);
    CHECK(r.effort_J == doctest::Approx(0.5 * 400.0 * r.history.back().t).epsilon(1e-9));
}

TEST_CASE("holding the lead angle gives the spiral arrival time") {
    // With sigma constant, dr/dt = -V cos(sigma0). Near the target the held
    // command cannot keep up with V^2 sin(sigma) / r, so the comparison stops
    // at 500 m.
    for (double s0 : {10.0 * kDeg, 30.0 * kDeg, -40.0 * kDeg}) {
        Scenario sc;
        sc.sigma0 = s0;
        sc.t_f = 80.0;
        sc.sigma_max = 50.0 * kDeg;
        PnHoldLaw hold(3.0, std::abs(s0), -1.0, 1e9);
        const auto r = run(sc, hold);
        double t_500 = -1.0, worst_sigma = 0.0;
        for (std::size_t i = 1; i < r.history.size(); ++i) {
            const auto& p = r.history[i - 1];
            const auto& q = r.history[i];
            if (p.r < 500.0) break;
            worst_sigma = std::max(worst_sigma, std::abs(p.sigma - s0));
            if (q.r < 500.0) t_500 = p.t + (p.r - 500.0) / (p.r - q.r) * (q.t - p.t);
        }
        REQUIRE(t_500 > 0.0);
        CHECK(t_500 == doctest::Approx((sc.r0 - 500.0) / (sc.speed * std::cos(s0))).epsilon(1e-4));
        CHECK(worst_sigma < 1e-3);  // zero-order hold over 10 ms cycles
    }
}

TEST_CASE("effort is the trapezoid of the stored commands") {
    Scenario sc;
    sc.sigma0 = 20.0 * kDeg;
    PnLaw pn(3.0, 100.0);
    const auto r = run(sc, pn);
    CHECK(r.effort_J == doctest::Approx(trapezoid_effort(r)).epsilon(1e-9));
    const auto nn = std::make_shared<const MlpModel>(*trained());
    NnLaw law(nn, 100.0);
    const auto s = run(base45(), law);
    CHECK(s.effort_J == doctest::Approx(trapezoid_effort(s)).epsilon(1e-9));
}

TEST_CASE("infeasible impact times are flagged, not flown") {
    Scenario sc;
    sc.sigma0 = 40.0 * kDeg;
    sc.t_f = 40.1;  // straight-line time is 40 s, turning costs more
    const auto mt = min_time(sc);
    CHECK(mt.lower_bound == doctest::Approx(40.0));
    CHECK(mt.estimate > 40.1);
    CHECK(mt.fov_feasible);
    CHECK(mt.max_time == doctest::Approx(40.0 / std::cos(sc.sigma_max)));
    PnLaw pn(3.0, 100.0);
    const auto r = run(sc, pn);
    CHECK(r.advisory == "InfeasibleScenario");
    CHECK_FALSE(r.intercepted);
    CHECK(r.history.empty());

    // Later than the slowest in-FOV path: flown, but flagged.
    sc.t_f = mt.max_time + 1.0;
    const auto late = run(sc, pn);
    CHECK(late.advisory == "FovInfeasible");
    CHECK_FALSE(late.history.empty());

    Scenario straight;
    straight.sigma0 = 0.0;
    CHECK(min_time(straight).estimate == min_time(straight).lower_bound);
}

TEST_CASE("mirrored start mirrors the engagement") {
    auto nn = trained();
    NnLaw law(nn, 100.0);
    PnLaw pn(3.0, 100.0);
    for (GuidanceLaw* l : {static_cast<GuidanceLaw*>(&law), static_cast<GuidanceLaw*>(&pn)}) {
        Scenario a = base45();
        Scenario b = a;
        b.sigma0 = -a.sigma0;
        const auto ra = run(a, *l);
        const auto rb = run(b, *l);
        REQUIRE(ra.history.size() == rb.history.size());
        CHECK(ra.impact_time == doctest::Approx(rb.impact_time).epsilon(1e-9));
        CHECK(ra.effort_J == doctest::Approx(rb.effort_J).epsilon(1e-9));
        double worst = 0.0;
        for (std::size_t i = 0; i < ra.history.size(); ++i) {
            const auto& p = ra.history[i];
            const auto& q = rb.history[i];
            worst = std::max({worst, std::abs(p.x - q.x), std::abs(p.y + q.y), std::abs(p.a + q.a)});
        }
        CHECK(worst < 1e-6);
    }
}

TEST_CASE("halving the integration step barely moves the result") {
    auto nn = trained();
    NnLaw law(nn, 100.0);
    PnLaw pn(3.0, 100.0);
    for (GuidanceLaw* l : {static_cast<GuidanceLaw*>(&law), static_cast<GuidanceLaw*>(&pn)}) {
        Scenario a = base45();
        Scenario b = a;
        b.dt_integrate = a.dt_integrate / 2.0;
        const auto ra = run(a, *l);
        const auto rb = run(b, *l);
        REQUIRE(ra.intercepted);
        REQUIRE(rb.intercepted);
        CHECK(std::abs(ra.impact_time - rb.impact_time) < 1e-4);
        CHECK(std::abs(ra.effort_J - rb.effort_J) < 1e-3 * ra.effort_J);
    }
}

TEST_CASE("network law stays inside the FOV across feasible starts") {
    auto nn = trained();
    NnLaw law(nn, 100.0);
    int flown = 0;
    for (double s0 : {0.0, 10.0, 20.0, 30.0, 40.0}) {
        for (double ratio : {1.05, 1.1, 1.2, 1.3, 1.5}) {
            Scenario sc = base45();
            sc.sigma0 = s0 * kDeg;
            const auto mt = min_time(sc);
            sc.t_f = ratio * mt.estimate;
            const auto r = run(sc, law);
            CAPTURE(s0);
            CAPTURE(ratio);
            // t_f = 1.5 t_min is past r0 / (V cos 45 deg) = 56.6 s: no
            // in-FOV path is that slow.
            if (sc.t_f > mt.max_time) {
                CHECK(r.advisory == "FovInfeasible");
                continue;
            }
            ++flown;
            CHECK(r.intercepted);
            CHECK(r.sigma_peak <= sc.sigma_max + 0.1 * kDeg);
            CHECK(std::abs(r.impact_time - sc.t_f) < 0.05);
        }
    }
    CHECK(flown >= 20);
}

TEST_CASE("timed PN baselines land on the impact time") {
    const Scenario sc = base45();
    const auto rows = timed_pn_baselines(sc, {3.0, 4.0});
    REQUIRE(!rows.empty());
    for (const auto& t : rows) {
        CHECK(t.row.intercepted);
        CHECK(std::abs(t.row.impact_error) <= 1e-3);
        CHECK(t.sigma_hold <= sc.sigma_max);
        CHECK(t.switch_t_go >= 0.0);
        CHECK(t.switch_t_go <= sc.t_f);
        // Re-running the law reproduces the row.
        PnHoldLaw law(t.N, t.sigma_hold, t.switch_t_go, sc.a_max);
        const auto r = run(sc, law);
        CHECK(r.effort_J == t.row.effort_J);
    }
}

TEST_CASE("matched reference starts at the scenario pose") {
    const Scenario sc = base45();
    const auto ref = matched_reference(sc);
    REQUIRE(ref.history.size() > 10);
    const auto c = initial_pose(sc);
    const auto& first = ref.history.front();
    CHECK(first.t == doctest::Approx(0.0));
    CHECK(std::hypot(first.x - c.x, first.y - c.y) < 1e-4 * sc.r0);
    CHECK(std::abs(first.sigma - sc.sigma0) < 1e-6);
    // The extremal stops a terminal offset short of the target.
    const auto& last = ref.history.back();
    CHECK(sc.t_f - last.t <= 2e-3 * sc.t_f);
    CHECK(std::hypot(last.x, last.y) <= sc.speed * (sc.t_f - last.t) * (1.0 + 1e-6));
    CHECK(ref.sigma_peak <= sc.sigma_max + 1e-9);
    // Effort from the stored commands.
    SimResult tmp;
    tmp.history = ref.history;
    CHECK(ref.effort_J == doctest::Approx(trapezoid_effort(tmp)).epsilon(1e-3));
}

TEST_CASE("comparison rows and files") {
    const Scenario sc = base45();
    PnLaw p3(3.0, 100.0), p4(4.0, 100.0);
    const auto rows = compare(sc, {&p3, &p4});
    REQUIRE(rows.size() == 2);
    CHECK(rows[0].law == "PN(N=3)");
    CHECK(rows[1].law == "PN(N=4)");
    CHECK(rows[0].impact_error == doctest::Approx(rows[0].impact_time - sc.t_f));
    CHECK_THROWS_AS(compare(sc, {}), std::invalid_argument);

    const auto dir = std::filesystem::temp_directory_path() / "itcg_test_sim";
    std::filesystem::create_directories(dir);
    write_comparison_csv(rows, (dir / "c.csv").string());
    const std::string csv = text::read_file((dir / "c.csv").string());
    CHECK(csv.rfind(std::string(kComparisonCsvHeader) + "\n", 0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 3);

    const auto r = run(sc, p3);
    write_history_csv(r, (dir / "h.csv").string());
    const std::string h = text::read_file((dir / "h.csv").string());
    CHECK(static_cast<std::size_t>(std::count(h.begin(), h.end(), '\n')) == r.history.size() + 1);
    const auto j = summary_json(sc, r);
    CHECK(j.at("law") == "PN(N=3)");
    CHECK(j.at("effort_J").get<double>() == r.effort_J);
}
