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

#include "itcg/extremal.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "itcg/errors.hpp"
#include "itcg/ode.hpp"
#include "itcg/text.hpp"

namespace itcg {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

using Solver = ode::DormandPrince<11>;
using State = Solver::State;

State pack(const AugmentedState& z, const Costate& p, const ControlTriple& u) {
    return {z.x, z.y, z.theta, z.xi, p.px, p.py, p.ptheta, p.pxi, u.u, u.omega, u.mu};
}

AugmentedState z_of(const State& y) { return {y[0], y[1], y[2], y[3]}; }
Costate p_of(const State& y) { return {y[4], y[5], y[6], y[7]}; }
ControlTriple u_of(const State& y) { return {y[8], y[9], y[10]}; }

// r sin(sigma); its sign change marks a collinearity crossing.
double lateral(const State& y) { return y[0] * std::sin(y[2]) - y[1] * std::cos(y[2]); }

ExtremalPoint make_point(double tau, const AugmentedState& z, const Costate& p, const ControlTriple& guess, Epsilon eps) {
    ExtremalPoint pt;
    pt.tau = tau;
    pt.z = z;
    pt.p = p;
    pt.u = newton_project(z, p, guess, eps);
    const PolarState pol = to_polar({z.x, z.y, z.theta});
    pt.r = pol.r;
    pt.sigma = pol.sigma;
    pt.du_dtau = ControlTriple::from(-flow_rates(z, p, pt.u, eps).du);
    return pt;
}

double residual_inf(const AugmentedState& z, const Costate& p, const ControlTriple& u, Epsilon eps) {
    return stationarity(z, p, u, eps).cwiseAbs().maxCoeff();
}

double hermite(double t0, double t1, double y0, double y1, double m0, double m1, double t) {
    const double h = t1 - t0;
    const double s = (t - t0) / h;
    const double s2 = s * s;
    const double s3 = s2 * s;
    return (2 * s3 - 3 * s2 + 1) * y0 + (s3 - 2 * s2 + s) * h * m0 + (-2 * s3 + 3 * s2) * y1 + (s3 - s2) * h * m1;
}

}  // namespace

void PropagationConfig::validate() const {
    if (!(T_bar > tau0 && tau0 > 0.0)) throw std::invalid_argument("need T_bar > tau0 > 0");
    if (!(rel_tol > 0.0 && rel_tol <= 1e-3 && abs_tol > 0.0 && abs_tol <= 1e-3)) {
        throw std::invalid_argument("tolerances must lie in (0, 1e-3]");
    }
    if (!(sample_dtau > 0.0)) throw std::invalid_argument("sample_dtau must be positive");
    if (reproject_every < 0) throw std::invalid_argument("reproject_every must be >= 0");
}

std::string to_string(Termination t) {
    switch (t) {
        case Termination::ReachedTbar: return "ReachedTbar";
        case Termination::Collinearity: return "Collinearity";
        case Termination::RangeBlowup: return "RangeBlowup";
    }
    return "?";
}

TerminalSeed seed_terminal(const SeedParams& seed) {
    TerminalSeed t;
    t.z = {0.0, 0.0, 0.0, -std::log(1.0 - std::cos(seed.sigma_max))};
    t.p = {seed.alpha * std::cos(seed.beta), seed.alpha * std::sin(seed.beta), 0.0, 0.0};
    t.u = {0.0, 0.0, 0.0};
    return t;
}

ExtremalPoint taylor_seed(const SeedParams& seed, double tau, Epsilon eps) {
    // Unconstrained expansion about the terminal point: the multiplier is
    // O(eps tau^3) there, so its influence enters far beyond these orders.
    const TerminalSeed t0 = seed_terminal(seed);
    const double c = t0.p.px;
    const double d = t0.p.py;
    const double t2 = tau * tau;
    const double t3 = t2 * tau;
    const double t4 = t3 * tau;
    const double t5 = t4 * tau;
    AugmentedState z;
    z.x = -tau + d * d * t5 / 40.0;
    z.y = d * t3 / 6.0 + c * d * t5 / 120.0;
    z.theta = -d * t2 / 2.0 - c * d * t4 / 24.0;
    z.xi = t0.z.xi + std::exp(t0.z.xi) * d * d * t4 / 18.0;
    const double u = d * tau + c * d * t3 / 6.0;
    const Costate p{c, d, u, 0.0};
    const double omega = -2.0 / 9.0 * std::exp(t0.z.xi) * d * d * t3;
    return make_point(tau, z, p, {u, omega, 0.0}, eps);
}

double collinearity_event(const AugmentedState& z) {
    return 1.0 - std::abs(lead_terms(z).cos_sigma);
}

ExtremalTrajectory propagate(const SeedParams& seed, const PropagationConfig& cfg) {
    cfg.validate();
    if (!(seed.alpha > 0.0) || !std::isfinite(seed.beta)) throw std::invalid_argument("alpha must be positive");
    make_fov(seed.sigma_max);
    const Epsilon eps = cfg.eps;

    ExtremalTrajectory traj;
    traj.seed = seed;
    traj.tau0 = cfg.tau0;
    traj.eps = eps.value();

    auto rhs = [eps](double, const State& y, State& dy) {
        const AugmentedState z = z_of(y);
        if (std::hypot(z.x, z.y) < kZeroRange) {
            dy.fill(kNaN);
            return;
        }
        const FlowRates f = flow_rates(z, p_of(y), u_of(y), eps);
        for (int i = 0; i < 4; ++i) {
            dy[i] = -f.dz[i];
            dy[4 + i] = -f.dp[i];
        }
        for (int i = 0; i < 3; ++i) dy[8 + i] = -f.du[i];
    };
    Solver solver(rhs, {cfg.rel_tol, cfg.abs_tol, 1e-14, 2'000'000});

    const ExtremalPoint first = taylor_seed(seed, cfg.tau0, eps);
    traj.points.push_back(first);
    traj.knots.push_back({first.tau, first.u.u, first.du_dtau.u});
    solver.reset(cfg.tau0, pack(first.z, first.p, first.u));

    const double tau_min = 2.0 * cfg.tau0;
    const double dt = cfg.sample_dtau;
    long next_k = static_cast<long>(std::floor(cfg.tau0 / dt)) + 1;
    double prev_lat = lateral(solver.y());
    int since_projection = 0;

    auto emit = [&](double tau, const State& y) {
        const AugmentedState z = z_of(y);
        const Costate p = p_of(y);
        const ControlTriple u = u_of(y);
        traj.max_projection_drift = std::max(traj.max_projection_drift, residual_inf(z, p, u, eps));
        traj.points.push_back(make_point(tau, z, p, u, eps));
    };

    while (solver.t() < cfg.T_bar) {
        try {
            solver.step(cfg.T_bar);
        } catch (const IntegrationFailure& e) {
            throw IntegrationFailure(e.what(), traj.points.back().tau);
        }
        const double t0 = solver.t_prev();
        const double t1 = solver.t();
        const State& y1 = solver.y();

        if (!std::all_of(y1.begin(), y1.end(), [](double v) { return std::isfinite(v); }) ||
            std::hypot(y1[0], y1[1]) < kZeroRange) {
            traj.termination = Termination::RangeBlowup;
            return traj;
        }

        // Collinearity: sign change of r sin(sigma) once the guard has passed.
        double t_event = std::numeric_limits<double>::infinity();
        const double lat = lateral(y1);
        if (t1 > tau_min && prev_lat != 0.0 && lat != 0.0 && (lat > 0.0) != (prev_lat > 0.0)) {
            double lo = std::max(t0, tau_min);
            double hi = t1;
            const bool lo_positive = lateral(solver.dense(lo)) > 0.0;
            while (hi - lo > 1e-10) {
                const double mid = 0.5 * (lo + hi);
                if ((lateral(solver.dense(mid)) > 0.0) == lo_positive) {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            t_event = lo;  // keep the pre-crossing sign of sigma
        }
        if (prev_lat == 0.0) prev_lat = lat;
        else if (lat != 0.0) prev_lat = lat;

        const double t_end = std::min(t1, t_event);
        if (t_end == t1) traj.knots.push_back({t1, y1[8], solver.dydt()[8]});
        while (static_cast<double>(next_k) * dt <= t_end + 1e-12) {
            const double tau = std::min(static_cast<double>(next_k) * dt, t_end);
            if (tau > traj.points.back().tau) emit(tau, solver.dense(tau));
            ++next_k;
        }
        if (t_event <= t1) {
            if (t_event > traj.points.back().tau + 1e-12) emit(t_event, solver.dense(t_event));
            const ExtremalPoint& last = traj.points.back();
            traj.knots.push_back({last.tau, last.u.u, last.du_dtau.u});
            traj.termination = Termination::Collinearity;
            return traj;
        }

        if (cfg.reproject_every > 0 && ++since_projection >= cfg.reproject_every && t1 < cfg.T_bar) {
            since_projection = 0;
            State y = y1;
            const AugmentedState z = z_of(y);
            const Costate p = p_of(y);
            const ControlTriple u = u_of(y);
            traj.max_projection_drift = std::max(traj.max_projection_drift, residual_inf(z, p, u, eps));
            const ControlTriple proj = newton_project(z, p, u, eps);
            y[8] = proj.u;
            y[9] = proj.omega;
            y[10] = proj.mu;
            solver.reset(t1, y);
        }
    }
    if (traj.points.back().tau < cfg.T_bar - 1e-12) emit(cfg.T_bar, solver.y());
    traj.termination = Termination::ReachedTbar;
    return traj;
}

ExtremalTrajectory reversed(const ExtremalTrajectory& traj) {
    ExtremalTrajectory out = traj;
    std::reverse(out.points.begin(), out.points.end());
    return out;
}

CartesianState replay_forward(const ExtremalTrajectory& traj) {
    if (traj.points.size() < 2) throw EmptyTrajectory("replay_forward needs at least two points");
    // Knots in increasing tau, starting with the exact terminal point.
    struct Knot {
        double tau, u, du;
    };
    std::vector<Knot> knots;
    knots.reserve(traj.points.size() + traj.knots.size() + 1);
    knots.push_back({0.0, 0.0, traj.seed.alpha * std::sin(traj.seed.beta)});
    // Points may be stored in either order; start from the deepest tau.
    const ExtremalPoint& deepest =
        traj.points.front().tau > traj.points.back().tau ? traj.points.front() : traj.points.back();
    // Union of the output grid and the integrator steps: the grid bounds the
    // spacing on smooth arcs, the steps resolve fast transitions.
    std::vector<Knot> raw;
    raw.reserve(traj.points.size() + traj.knots.size());
    for (const auto& p : traj.points) raw.push_back({p.tau, p.u.u, p.du_dtau.u});
    for (const auto& k : traj.knots) {
        if (k.tau <= deepest.tau) raw.push_back({k.tau, k.u, k.du_dtau});
    }
    std::sort(raw.begin(), raw.end(), [](const Knot& a, const Knot& b) { return a.tau < b.tau; });
    for (const auto& k : raw) {
        if (k.tau > knots.back().tau + 1e-13) knots.push_back(k);
    }

    double x = deepest.z.x, y = deepest.z.y, th = deepest.z.theta;
    constexpr int kSub = 8;
    for (std::size_t i = knots.size() - 1; i > 0; --i) {
        const Knot& a = knots[i - 1];
        const Knot& b = knots[i];
        auto u_at = [&](double tau) { return hermite(a.tau, b.tau, a.u, b.u, a.du, b.du, tau); };
        const double h = (b.tau - a.tau) / kSub;  // forward time step, tau decreases
        for (int k = 0; k < kSub; ++k) {
            const double tau = b.tau - k * h;
            const double u1 = u_at(tau);
            const double u2 = u_at(tau - 0.5 * h);
            const double u4 = u_at(tau - h);
            const double k1x = std::cos(th), k1y = std::sin(th), k1t = u1;
            const double th2 = th + 0.5 * h * k1t;
            const double k2x = std::cos(th2), k2y = std::sin(th2), k2t = u2;
            const double th3 = th + 0.5 * h * k2t;
            const double k3x = std::cos(th3), k3y = std::sin(th3), k3t = u2;
            const double th4 = th + h * k3t;
            const double k4x = std::cos(th4), k4y = std::sin(th4), k4t = u4;
            x += h / 6.0 * (k1x + 2 * k2x + 2 * k3x + k4x);
            y += h / 6.0 * (k1y + 2 * k2y + 2 * k3y + k4y);
            th += h / 6.0 * (k1t + 2 * k2t + 2 * k3t + k4t);
        }
    }
    return {x, y, th};
}

AuditReport audit(const ExtremalTrajectory& traj, Epsilon eps) {
    if (traj.points.empty()) throw EmptyTrajectory("audit needs points");
    AuditReport rep;
    const auto& p0 = traj.points.front();
    const double h0 = hamiltonian(p0.z, p0.p, p0.u, eps);
    double max_sigma = 0.0;
    for (const auto& p : traj.points) {
        rep.max_g_residual = std::max(rep.max_g_residual, residual_inf(p.z, p.p, p.u, eps));
        rep.hamiltonian_drift =
            std::max(rep.hamiltonian_drift, std::abs(hamiltonian(p.z, p.p, p.u, eps) - h0) / (1.0 + std::abs(h0)));
        max_sigma = std::max(max_sigma, std::abs(p.sigma));
    }
    rep.fov_margin = traj.seed.sigma_max - max_sigma;
    if (traj.points.size() >= 2) {
        const CartesianState end = replay_forward(traj);
        rep.replay_miss = std::hypot(end.x, end.y);
    }
    return rep;
}

double control_effort(const ExtremalTrajectory& traj, double tau_from, double tau_to) {
    if (traj.points.empty()) throw EmptyTrajectory("control_effort needs points");
    std::vector<std::pair<double, double>> pts;
    pts.reserve(traj.points.size() + 1);
    pts.emplace_back(0.0, 0.0);
    for (const auto& p : traj.points) pts.emplace_back(p.tau, p.u.u);
    double cost = 0.0;
    for (std::size_t i = 1; i < pts.size(); ++i) {
        double a = pts[i - 1].first, b = pts[i].first;
        const double lo = std::max(a, tau_from), hi = std::min(b, tau_to);
        if (hi <= lo) continue;
        const double ua = pts[i - 1].second, ub = pts[i].second;
        auto lerp = [&](double t) { return ua + (ub - ua) * (t - a) / (b - a); };
        const double u_lo = lerp(lo), u_hi = lerp(hi);
        cost += 0.25 * (hi - lo) * (u_lo * u_lo + u_hi * u_hi);
    }
    return cost;
}

ExtremalPoint sample_at(const ExtremalTrajectory& traj, double tau) {
    if (traj.points.empty()) throw EmptyTrajectory("sample_at needs points");
    const auto& pts = traj.points;
    if (tau <= pts.front().tau) return pts.front();
    if (tau >= pts.back().tau) return pts.back();
    const auto it = std::lower_bound(pts.begin(), pts.end(), tau,
                                     [](const ExtremalPoint& p, double t) { return p.tau < t; });
    const ExtremalPoint& b = *it;
    const ExtremalPoint& a = *(it - 1);
    const double w = (tau - a.tau) / (b.tau - a.tau);
    auto mix = [w](double x0, double x1) { return x0 + w * (x1 - x0); };
    ExtremalPoint out;
    out.tau = tau;
    out.z = AugmentedState::from(a.z.vec() + w * (b.z.vec() - a.z.vec()));
    out.p = Costate::from(a.p.vec() + w * (b.p.vec() - a.p.vec()));
    out.u = ControlTriple::from(a.u.vec() + w * (b.u.vec() - a.u.vec()));
    out.du_dtau = ControlTriple::from(a.du_dtau.vec() + w * (b.du_dtau.vec() - a.du_dtau.vec()));
    out.r = mix(a.r, b.r);
    out.sigma = mix(a.sigma, b.sigma);
    return out;
}

// Sweep ------------------------------------------------------------------------

std::vector<double> SweepGrid::alphas() const {
    validate();
    std::vector<double> out(static_cast<std::size_t>(n_alpha));
    if (n_alpha == 1) {
        out[0] = alpha_bar;
        return out;
    }
    const double lo = std::log(alpha_bar * alpha_min_ratio);
    const double hi = std::log(alpha_bar);
    for (int i = 0; i < n_alpha; ++i) {
        out[static_cast<std::size_t>(i)] = i == n_alpha - 1 ? alpha_bar : std::exp(lo + (hi - lo) * i / (n_alpha - 1));
    }
    return out;
}

std::vector<double> SweepGrid::betas() const {
    validate();
    std::vector<double> out(static_cast<std::size_t>(n_beta));
    if (n_beta == 1) {
        out[0] = kPi / 2.0;
        return out;
    }
    for (int i = 0; i < n_beta; ++i) out[static_cast<std::size_t>(i)] = kPi * i / (n_beta - 1);
    return out;
}

void SweepGrid::validate() const {
    if (n_alpha < 1 || n_beta < 1) throw std::invalid_argument("grid needs n_alpha, n_beta >= 1");
    if (!(alpha_bar > 0.0)) throw std::invalid_argument("alpha_bar must be positive");
    if (!(alpha_min_ratio > 0.0 && alpha_min_ratio <= 1.0)) throw std::invalid_argument("alpha_min_ratio in (0, 1]");
    if (!(refine_gap >= 0.0) || refine_depth < 0) {
        throw std::invalid_argument("refinement settings must be non-negative");
    }
}

std::size_t SweepResult::succeeded() const {
    return static_cast<std::size_t>(
        std::count_if(items.begin(), items.end(), [](const SweepItem& i) { return i.trajectory.has_value(); }));
}

double SweepResult::success_ratio() const {
    return items.empty() ? 0.0 : static_cast<double>(succeeded()) / static_cast<double>(items.size());
}

std::vector<const ExtremalTrajectory*> SweepResult::trajectories() const {
    std::vector<const ExtremalTrajectory*> out;
    for (const auto& i : items) {
        if (i.trajectory) out.push_back(&*i.trajectory);
    }
    return out;
}

double beta_gap(const ExtremalTrajectory& a, const ExtremalTrajectory& b) {
    if (a.points.empty() || b.points.empty()) throw EmptyTrajectory("beta_gap needs points");
    constexpr double kProbe = 0.25;
    const double end_a = a.points.back().tau, end_b = b.points.back().tau;
    const double span = std::min(end_a, end_b);
    double gap = std::abs(end_a - end_b) / std::max(end_a, end_b);
    const double sm = std::max(a.seed.sigma_max, b.seed.sigma_max);
    for (double tau = kProbe; tau <= span + 1e-12; tau += kProbe) {
        const ExtremalPoint pa = sample_at(a, tau), pb = sample_at(b, tau);
        gap = std::max({gap, std::abs(pa.r - pb.r) / tau, std::abs(pa.sigma - pb.sigma) / sm});
    }
    return gap;
}

namespace {

SweepItem propagate_item(double alpha, double beta, double sigma_max, const PropagationConfig& cfg) {
    SweepItem item;
    item.seed = {alpha, beta, sigma_max};
    try {
        item.trajectory = propagate(item.seed, cfg);
    } catch (const std::exception& e) {
        item.failure = e.what();
    }
    return item;
}

void bisect_betas(const SweepItem& lo, const SweepItem& hi, int depth, const SweepGrid& grid, const PropagationConfig& cfg,
                  std::vector<SweepItem>& out) {
    if (depth <= 0 || !lo.trajectory || !hi.trajectory) return;
    if (beta_gap(*lo.trajectory, *hi.trajectory) <= grid.refine_gap) return;
    SweepItem mid = propagate_item(lo.seed.alpha, 0.5 * (lo.seed.beta + hi.seed.beta), lo.seed.sigma_max, cfg);
    mid.refined = true;
    bisect_betas(lo, mid, depth - 1, grid, cfg, out);
    bisect_betas(mid, hi, depth - 1, grid, cfg, out);
    out.push_back(std::move(mid));
}

template <class F>
void parallel_for(std::size_t n, int threads, F&& body) {
    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
        for (std::size_t i = next.fetch_add(1); i < n; i = next.fetch_add(1)) body(i);
    };
    const int k = std::max(1, threads);
    if (k == 1) {
        worker();
        return;
    }
    std::vector<std::thread> pool;
    for (int t = 0; t < k; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
}

}  // namespace

SweepResult sweep(const SweepGrid& grid, double sigma_max, const PropagationConfig& cfg, int threads) {
    grid.validate();
    cfg.validate();
    make_fov(sigma_max);
    const auto alphas = grid.alphas();
    const auto betas = grid.betas();

    // Each alpha row is independent; rows are assembled by index afterwards.
    std::vector<std::vector<SweepItem>> rows(alphas.size());
    std::vector<SweepItem> base(alphas.size() * betas.size());
    parallel_for(base.size(), threads, [&](std::size_t i) {
        base[i] = propagate_item(alphas[i / betas.size()], betas[i % betas.size()], sigma_max, cfg);
    });
    const bool refine = grid.refine_gap > 0.0 && grid.refine_depth > 0;
    parallel_for(alphas.size(), threads, [&](std::size_t ia) {
        std::vector<SweepItem>& row = rows[ia];
        const std::size_t off = ia * betas.size();
        for (std::size_t ib = 0; ib < betas.size(); ++ib) row.push_back(std::move(base[off + ib]));
        if (refine) {
            std::vector<SweepItem> extra;
            for (std::size_t ib = 0; ib + 1 < betas.size(); ++ib) {
                bisect_betas(row[ib], row[ib + 1], grid.refine_depth, grid, cfg, extra);
            }
            for (auto& e : extra) row.push_back(std::move(e));
            std::stable_sort(row.begin(), row.end(),
                             [](const SweepItem& a, const SweepItem& b) { return a.seed.beta < b.seed.beta; });
        }
        for (std::size_t ib = 0; ib < row.size(); ++ib) {
            row[ib].alpha_index = ia;
            row[ib].beta_index = ib;
        }
    });

    SweepResult result;
    result.grid = grid;
    result.config = cfg;
    result.sigma_max = sigma_max;
    for (auto& row : rows) {
        for (auto& item : row) result.items.push_back(std::move(item));
    }
    return result;
}

// Matching -----------------------------------------------------------------------

namespace {

struct ShotResult {
    bool ok = false;
    double dr = 0.0;
    double ds = 0.0;
};

// Target at tau = 1. The lead-angle mismatch is measured either in |sigma|
// or in xi: next to the boundary sigma saturates while xi still resolves
// the state. Mirror images share the cost, so only |sigma| matters.
struct ShotTarget {
    double rho = 0.0;
    double abs_sigma = 0.0;
    double xi = 0.0;
    bool use_xi = false;
};

ShotResult shoot(double log_alpha, double beta, const ShotTarget& target, double sigma_max,
                 const PropagationConfig& cfg) {
    try {
        const ExtremalTrajectory t = propagate({std::exp(log_alpha), beta, sigma_max}, cfg);
        if (t.termination != Termination::ReachedTbar) return {};
        const ExtremalPoint& end = t.points.back();
        const double ds = target.use_xi ? end.z.xi - target.xi : std::abs(end.sigma) - target.abs_sigma;
        return {true, end.r - target.rho, ds};
    } catch (const std::exception&) {
        return {};
    }
}

struct Candidate {
    double la, beta, res;
};

// Damped Newton on (log alpha, beta) with a central-difference Jacobian.
std::optional<Candidate> refine(Candidate c, const ShotTarget& target, double sigma_max, const PropagationConfig& cfg) {
    double la = c.la, beta = c.beta;
    ShotResult f = shoot(la, beta, target, sigma_max, cfg);
    if (!f.ok) return std::nullopt;
    double res = std::hypot(f.dr, f.ds);
    for (int it = 0; it < 60 && res > 1e-10; ++it) {
        constexpr double h = 1e-6;
        const ShotResult fa1 = shoot(la + h, beta, target, sigma_max, cfg);
        const ShotResult fa0 = shoot(la - h, beta, target, sigma_max, cfg);
        const ShotResult fb1 = shoot(la, beta + h, target, sigma_max, cfg);
        const ShotResult fb0 = shoot(la, beta - h, target, sigma_max, cfg);
        if (!(fa1.ok && fa0.ok && fb1.ok && fb0.ok)) break;
        Eigen::Matrix2d j;
        j << (fa1.dr - fa0.dr) / (2 * h), (fb1.dr - fb0.dr) / (2 * h),
             (fa1.ds - fa0.ds) / (2 * h), (fb1.ds - fb0.ds) / (2 * h);
        const Eigen::Vector2d step = j.fullPivLu().solve(Eigen::Vector2d(f.dr, f.ds));
        double lambda = 1.0;
        bool improved = false;
        for (int k = 0; k < 30; ++k, lambda *= 0.5) {
            const double la_n = la - lambda * step[0];
            const double b_n = beta - lambda * step[1];
            const ShotResult fn = shoot(la_n, b_n, target, sigma_max, cfg);
            if (fn.ok && std::hypot(fn.dr, fn.ds) < res) {
                la = la_n;
                beta = b_n;
                f = fn;
                res = std::hypot(fn.dr, fn.ds);
                improved = true;
                break;
            }
        }
        if (!improved) break;
    }
    if (res > 1e-8) return std::nullopt;
    return Candidate{la, beta, res};
}

}  // namespace

MatchedExtremal match_extremal(double rho, double sigma, double sigma_max, const PropagationConfig& cfg) {
    ShotTarget target;
    target.rho = rho;
    target.abs_sigma = std::abs(sigma);
    target.xi = xi_from_sigma(target.abs_sigma, make_fov(sigma_max));

    PropagationConfig scan_cfg = cfg;
    scan_cfg.T_bar = 1.0;
    scan_cfg.rel_tol = 1e-8;
    scan_cfg.abs_tol = 1e-10;
    scan_cfg.sample_dtau = 0.25;
    PropagationConfig fine_cfg = cfg;
    fine_cfg.T_bar = 1.0;
    fine_cfg.sample_dtau = std::min(cfg.sample_dtau, 1e-3);

    // Coarse scan records both mismatch forms from one propagation each.
    struct Scan {
        double la, beta, dr, dsig, dxi;
    };
    std::vector<Scan> scans;
    constexpr int kNa = 36, kNb = 48;
    const double la_lo = std::log(1e-2), la_hi = std::log(3e3);
    for (int i = 0; i < kNa; ++i) {
        for (int j = 0; j < kNb; ++j) {
            const double la = la_lo + (la_hi - la_lo) * i / (kNa - 1);
            const double beta = kPi * (j + 0.5) / kNb;
            try {
                const ExtremalTrajectory t = propagate({std::exp(la), beta, sigma_max}, scan_cfg);
                if (t.termination != Termination::ReachedTbar) continue;
                const ExtremalPoint& end = t.points.back();
                scans.push_back({la, beta, end.r - rho, std::abs(end.sigma) - target.abs_sigma, end.z.xi - target.xi});
            } catch (const std::exception&) {
            }
        }
    }

    std::optional<MatchedExtremal> best;
    double best_scan = std::numeric_limits<double>::infinity();
    for (const bool use_xi : {false, true}) {
        ShotTarget t = target;
        t.use_xi = use_xi;
        std::vector<Candidate> cands;
        for (const Scan& s : scans) cands.push_back({s.la, s.beta, std::hypot(s.dr, use_xi ? s.dxi : s.dsig)});
        std::sort(cands.begin(), cands.end(), [](const Candidate& a, const Candidate& b) { return a.res < b.res; });
        if (cands.size() > 6) cands.resize(6);
        if (!cands.empty()) best_scan = std::min(best_scan, cands.front().res);
        for (const Candidate& c : cands) {
            const std::optional<Candidate> r = refine(c, t, sigma_max, fine_cfg);
            if (!r) continue;
            MatchedExtremal m;
            m.seed = {std::exp(r->la), r->beta, sigma_max};
            m.trajectory = propagate(m.seed, fine_cfg);
            m.effort = control_effort(m.trajectory, 0.0, 1.0);
            m.residual = r->res;
            if (!best || m.effort < best->effort) best = std::move(m);
        }
    }
    if (!best) throw NoConvergence("no extremal found through the requested state", best_scan);
    return *best;
}

// Export -----------------------------------------------------------------------------

namespace {

void append_point(std::string& out, const ExtremalPoint& p) {
    using text::format_double;
    const double v[] = {p.tau, p.z.x, p.z.y, p.z.theta, p.z.xi, p.p.px, p.p.py, p.p.ptheta, p.p.pxi,
                        p.u.u, p.u.omega, p.u.mu, p.r, p.sigma};
    for (std::size_t i = 0; i < std::size(v); ++i) {
        if (i) out += ',';
        out += format_double(v[i]);
    }
    out += '\n';
}

}  // namespace

void write_trajectory_csv(const ExtremalTrajectory& traj, const std::string& path) {
    std::string out = std::string(kTrajectoryCsvHeader) + "\n";
    for (const auto& p : traj.points) append_point(out, p);
    text::write_file(path, out);
}

void write_sweep_csv(const SweepResult& sweep, const std::string& path) {
    // Written per trajectory: the default sweep is well over a gigabyte.
    std::ofstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot write " + path);
    std::string out = std::string("alpha,beta,") + kTrajectoryCsvHeader + "\n";
    for (const auto& item : sweep.items) {
        if (!item.trajectory) continue;
        const std::string prefix =
            text::format_double(item.seed.alpha) + "," + text::format_double(item.seed.beta) + ",";
        for (const auto& p : item.trajectory->points) {
            out += prefix;
            append_point(out, p);
        }
        f.write(out.data(), static_cast<std::streamsize>(out.size()));
        out.clear();
    }
    f.write(out.data(), static_cast<std::streamsize>(out.size()));
    if (!f) throw IoError("write failed: " + path);
}

std::vector<ExtremalTrajectory> read_sweep_csv(const std::string& path,
                                               double sigma_max,
                                               const PropagationConfig& cfg) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    std::string line;
    std::size_t lineno = 0;
    if (!std::getline(in, line)) throw Malformed("empty sweep file", 1);
    ++lineno;
    if (text::trim(line) != std::string("alpha,beta,") + kTrajectoryCsvHeader) {
        throw Malformed("unexpected sweep header", 1);
    }
    std::vector<ExtremalTrajectory> out;
    while (std::getline(in, line)) {
        ++lineno;
        if (text::trim(line).empty()) continue;
        const auto fields = text::split(text::trim(line), ',');
        if (fields.size() != 16) throw Malformed("expected 16 fields", lineno);
        double v[16];
        for (std::size_t i = 0; i < 16; ++i) {
            const auto d = text::parse_double(fields[i]);
            if (!d) throw Malformed("bad number", lineno);
            v[i] = *d;
        }
        if (out.empty() || out.back().seed.alpha != v[0] || out.back().seed.beta != v[1]) {
            ExtremalTrajectory t;
            t.seed = {v[0], v[1], sigma_max};
            t.tau0 = cfg.tau0;
            t.eps = cfg.eps.value();
            out.push_back(std::move(t));
        }
        ExtremalPoint p;
        p.tau = v[2];
        p.z = {v[3], v[4], v[5], v[6]};
        p.p = {v[7], v[8], v[9], v[10]};
        p.u = {v[11], v[12], v[13]};
        p.r = v[14];
        p.sigma = v[15];
        p.du_dtau = ControlTriple::from(-flow_rates(p.z, p.p, p.u, cfg.eps).du);
        auto& pts = out.back().points;
        if (!pts.empty() && !(p.tau > pts.back().tau)) throw Malformed("tau not increasing", lineno);
        pts.push_back(p);
    }
    return out;
}

nlohmann::json sweep_report(const SweepResult& sweep) {
    nlohmann::json j;
    j["sigma_max"] = sweep.sigma_max;
    j["grid"] = {{"alpha_bar", sweep.grid.alpha_bar},
                 {"n_alpha", sweep.grid.n_alpha},
                 {"n_beta", sweep.grid.n_beta},
                 {"alpha_min_ratio", sweep.grid.alpha_min_ratio},
                 {"refine_gap", sweep.grid.refine_gap},
                 {"refine_depth", sweep.grid.refine_depth}};
    j["config"] = {{"eps", sweep.config.eps.value()},
                   {"T_bar", sweep.config.T_bar},
                   {"tau0", sweep.config.tau0},
                   {"rel_tol", sweep.config.rel_tol},
                   {"abs_tol", sweep.config.abs_tol},
                   {"sample_dtau", sweep.config.sample_dtau},
                   {"reproject_every", sweep.config.reproject_every}};
    j["succeeded"] = sweep.succeeded();
    j["total"] = sweep.items.size();
    j["success_ratio"] = sweep.success_ratio();
    nlohmann::json seeds = nlohmann::json::array();
    const Epsilon eps = sweep.config.eps;
    for (const auto& item : sweep.items) {
        nlohmann::json s;
        s["alpha_index"] = item.alpha_index;
        s["beta_index"] = item.beta_index;
        s["alpha"] = item.seed.alpha;
        s["beta"] = item.seed.beta;
        s["refined"] = item.refined;
        if (item.trajectory) {
            const AuditReport a = audit(*item.trajectory, eps);
            s["termination"] = to_string(item.trajectory->termination);
            s["tau_end"] = item.trajectory->points.back().tau;
            s["points"] = item.trajectory->points.size();
            s["max_g_residual"] = a.max_g_residual;
            s["hamiltonian_drift"] = a.hamiltonian_drift;
            s["replay_miss"] = a.replay_miss;
            s["fov_margin"] = a.fov_margin;
            s["max_projection_drift"] = item.trajectory->max_projection_drift;
        } else {
            s["termination"] = "Failed";
            s["failure"] = item.failure;
        }
        seeds.push_back(std::move(s));
    }
    j["seeds"] = std::move(seeds);
    return j;
}

}  // namespace itcg
