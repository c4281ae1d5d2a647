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

// Extremal generation by backward propagation of the parameterized system.
//
// With tau = t_f - t, every extremal ends at the target with theta = 0,
// sigma = 0 and transversal costates p_theta = p_xi = 0, so it is fixed by
// (alpha, beta) = polar coordinates of the terminal (p_x, p_y). Propagating
//   dZ/dtau = -f(Z, U),  dP/dtau = dH/dZ,  dU/dtau = -dU/dt
// from the terminal point enumerates extremals without any boundary-value
// solve. Propagation stops at T_bar or when the velocity becomes collinear
// with the LOS again, since such extremals cannot be optimal.

#ifndef ITCG_EXTREMAL_HPP
#define ITCG_EXTREMAL_HPP

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "itcg/geometry.hpp"
#include "itcg/pmp.hpp"

namespace itcg {

struct SeedParams {
    double alpha = 1.0;      // terminal costate magnitude
    double beta = 0.0;       // terminal costate angle, rad
    double sigma_max = 1.0;  // FOV half-angle, rad
};

struct PropagationConfig {
    Epsilon eps;
    double T_bar = 4.0;
    double tau0 = 1e-3;
    double rel_tol = 1e-10;
    double abs_tol = 1e-12;
    double sample_dtau = 0.005;
    int reproject_every = 20;  // accepted steps; 0 disables periodic re-projection

    /// Throws std::invalid_argument on inconsistent values.
    void validate() const;
};

enum class Termination { ReachedTbar, Collinearity, RangeBlowup };

std::string to_string(Termination t);

struct ExtremalPoint {
    double tau = 0.0;
    AugmentedState z;
    Costate p;
    ControlTriple u;
    double r = 0.0;
    double sigma = 0.0;
    ControlTriple du_dtau;  // derivative of the control triple in tau
};

/// Turn rate and its tau-derivative at one accepted integrator step.
struct ControlKnot {
    double tau = 0.0;
    double u = 0.0;
    double du_dtau = 0.0;
};

struct ExtremalTrajectory {
    SeedParams seed;
    double tau0 = 0.0;
    double eps = Epsilon::kDefault;
    std::vector<ExtremalPoint> points;
    Termination termination = Termination::ReachedTbar;
    /// Largest stationarity residual of the integrated (not yet projected) controls.
    double max_projection_drift = 0.0;
    /// Integrator-resolution control record used by replay_forward; may be
    /// empty (e.g. trajectories read back from CSV), then points are used.
    std::vector<ControlKnot> knots;
};

struct TerminalSeed {
    AugmentedState z;
    Costate p;
    ControlTriple u;
};

/// Exact terminal triple: Z = (0, 0, 0, -log(1 - cos sigma_max)),
/// P = (alpha cos beta, alpha sin beta, 0, 0), U = 0.
TerminalSeed seed_terminal(const SeedParams& seed);

/// Series expansion of the extremal at a small tau, with U projected onto g = 0.
ExtremalPoint taylor_seed(const SeedParams& seed, double tau, Epsilon eps);

/// 1 - |cos sigma|. Throws ZeroRange.
double collinearity_event(const AugmentedState& z);

/// Throws IntegrationFailure (with the last good tau) or std::invalid_argument.
ExtremalTrajectory propagate(const SeedParams& seed, const PropagationConfig& cfg);

/// Points in forward-time order (deepest tau first), for replay and export.
ExtremalTrajectory reversed(const ExtremalTrajectory& traj);

/// Integrates the unit-speed kinematics forward in time from the deepest
/// recorded point, driven by the Hermite-interpolated recorded turn rate
/// (control knots when present, otherwise the samples),
/// and returns the state at tau = 0.
CartesianState replay_forward(const ExtremalTrajectory& traj);

struct AuditReport {
    double max_g_residual = 0.0;
    double hamiltonian_drift = 0.0;  // max |H - H0| / (1 + |H0|)
    double replay_miss = 0.0;
    double fov_margin = 0.0;         // sigma_max - max |sigma|
};

AuditReport audit(const ExtremalTrajectory& traj, Epsilon eps);

/// 1/2 int u^2 dtau over [tau_from, tau_to] by trapezoid on the samples.
double control_effort(const ExtremalTrajectory& traj, double tau_from, double tau_to);

/// Linear interpolation of the recorded sample at tau (clamped to the range).
ExtremalPoint sample_at(const ExtremalTrajectory& traj, double tau);

struct SweepGrid {
    double alpha_bar = 10.0;
    int n_alpha = 50;
    int n_beta = 50;
    double alpha_min_ratio = 1e-3;  // smallest alpha = alpha_bar * ratio
    // Extremals that graze the FOV boundary and leave again come from thin
    // beta bands that a uniform grid misses. Neighbouring betas whose
    // trajectories are further apart than refine_gap (see beta_gap) get a
    // bisected beta inserted between them, up to refine_depth levels.
    // 0 disables.
    double refine_gap = 0.05;
    int refine_depth = 40;

    /// Logarithmically spaced alphas ending at alpha_bar.
    std::vector<double> alphas() const;
    /// Uniform betas on [0, pi]; a single beta is pi/2.
    std::vector<double> betas() const;
    void validate() const;
};

struct SweepItem {
    std::size_t alpha_index = 0;
    std::size_t beta_index = 0;
    SeedParams seed;
    std::optional<ExtremalTrajectory> trajectory;
    std::string failure;
    bool refined = false;  // inserted by beta refinement rather than the base grid
};

struct SweepResult {
    SweepGrid grid;
    PropagationConfig config;
    double sigma_max = 0.0;
    /// Ordered by (alpha index, beta index); beta indices count base and
    /// refined betas together in increasing beta.
    std::vector<SweepItem> items;

    std::size_t succeeded() const;
    double success_ratio() const;
    std::vector<const ExtremalTrajectory*> trajectories() const;
};

/// Largest normalized distance between two trajectories, compared every
/// 0.25 in tau over their common span: max of |d(r/tau)|, |d sigma|/sigma_max
/// and the difference of their end taus over the longer one.
double beta_gap(const ExtremalTrajectory& a, const ExtremalTrajectory& b);

/// Propagates every grid seed; per-seed failures are recorded, not thrown.
SweepResult sweep(const SweepGrid& grid, double sigma_max, const PropagationConfig& cfg, int threads = 1);

/// Extremal passing through normalized range rho and lead angle sigma at
/// tau = 1, found by a coarse scan over (log alpha, beta) and Newton shooting.
struct MatchedExtremal {
    SeedParams seed;
    ExtremalTrajectory trajectory;
    double effort = 0.0;  // 1/2 int_0^1 u^2 dtau
    double residual = 0.0;
};

/// Throws NoConvergence when no extremal through the state is found.
MatchedExtremal match_extremal(double rho, double sigma, double sigma_max, const PropagationConfig& cfg);

// Export ---------------------------------------------------------------------

inline constexpr const char* kTrajectoryCsvHeader = "tau,x,y,theta,xi,px,py,ptheta,pxi,u,omega,mu,r,sigma";

void write_trajectory_csv(const ExtremalTrajectory& traj, const std::string& path);
/// One file with leading alpha,beta columns for all successful seeds.
void write_sweep_csv(const SweepResult& sweep, const std::string& path);
/// Reads a concatenated sweep CSV back into trajectories (du_dtau is recomputed).
std::vector<ExtremalTrajectory> read_sweep_csv(const std::string& path,
                                               double sigma_max,
                                               const PropagationConfig& cfg);
nlohmann::json sweep_report(const SweepResult& sweep);

}  // namespace itcg

#endif  // ITCG_EXTREMAL_HPP
