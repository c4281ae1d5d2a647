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

#include "commands.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <iomanip>
#include <limits>
#include <memory>
#include <numbers>
#include <ostream>
#include <random>
#include <sstream>
#include <thread>

#include "config.hpp"
#include "itcg/dataset.hpp"
#include "itcg/errors.hpp"
#include "itcg/extremal.hpp"
#include "itcg/guidance.hpp"
#include "itcg/mlp.hpp"
#include "itcg/pmp.hpp"
#include "itcg/simulator.hpp"
#include "itcg/text.hpp"
#include "itcg/version.hpp"
#include "manifest.hpp"
#include "svg.hpp"

namespace itcg::cli {

namespace fs = std::filesystem;

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

class AuditFailed : public Error {
public:
    using Error::Error;
};

struct Context {
    PipelineConfig cfg;
    CliOptions opt;
    std::ostream* log;
    std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();

    std::string path(const std::string& rel) const { return (fs::path(opt.out_dir) / rel).string(); }
    void mkdir(const std::string& stage) const { fs::create_directories(fs::path(opt.out_dir) / stage); }
    int threads() const {
        if (opt.threads > 0) return opt.threads;
        return std::max(1, static_cast<int>(std::thread::hardware_concurrency()));
    }
    RunManifest manifest(const std::string& command) const {
        RunManifest m;
        m.command = command;
        m.tool_version = kVersion;
        m.config = to_json(cfg);
        m.seeds = {cfg.train.seed};
        return m;
    }
    void finish(const std::string& stage, RunManifest& m) const {
        m.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        write_manifest(opt.out_dir, stage, m);
    }
};

std::string producer(const std::string& stage) { return stage == "model" ? "train" : stage; }

// Loads an upstream manifest, checks its outputs against their digests and
// that the named config sections still match. Returns the manifest.
RunManifest require_stage(const Context& c, const std::string& stage, const std::vector<std::string>& sections) {
    RunManifest m = read_manifest(c.opt.out_dir, stage);
    const auto bad = verify_outputs(c.opt.out_dir, m);
    if (!bad.empty()) throw MissingArtifact(stage + " artifact changed or missing since it was written: " + bad.front() + "; rerun '" +
                              producer(stage) + "'");
    const auto stale = verify_inputs(c.opt.out_dir, m);
    if (!stale.empty()) throw MissingArtifact(stage + " is stale: its input " + stale.front() + " has changed; rerun '" + producer(stage) + "'");
    const nlohmann::json now = to_json(c.cfg);
    for (const auto& s : sections) {
        if (m.config.value(s, nlohmann::json()) != now.at(s)) {
            throw ConfigError(s, "differs from the configuration that produced " + stage + "; rerun '" + producer(stage) + "'");
        }
    }
    return m;
}

void write_json(const std::string& path, const nlohmann::json& j) { text::write_file(path, j.dump(2) + "\n"); }

std::shared_ptr<const MlpModel> load_trained(const Context& c) {
    require_stage(c, "model", {"sweep", "dataset"});
    return std::make_shared<const MlpModel>(load_model(c.path(kModelJson)));
}

// --- plots ---------------------------------------------------------------

struct Curve {
    std::string name;
    const std::vector<HistoryRow>* rows;
    bool dashed;
};

void write_plots(const Context& c, const std::string& stage, const std::vector<Curve>& curves, RunManifest& m) {
    if (!c.opt.plots) return;
    Plot traj{"Pursuer Trajectories", "x, km", "y, km", {}, true};
    Plot lead{"Lead Angle Profiles", "t, s", "sigma, deg", {}, false};
    Plot ctrl{"Control Profiles", "t, s", "a, m/s^2", {}, false};
    for (const auto& cv : curves) {
        Series a{cv.name, {}, {}, cv.dashed}, b = a, d = a;
        for (const auto& h : *cv.rows) {
            a.x.push_back(h.x / 1000.0);
            a.y.push_back(h.y / 1000.0);
            b.x.push_back(h.t);
            b.y.push_back(h.sigma / kDeg);
            d.x.push_back(h.t);
            d.y.push_back(h.a);
        }
        traj.series.push_back(std::move(a));
        lead.series.push_back(std::move(b));
        ctrl.series.push_back(std::move(d));
    }
    const double sm = c.cfg.sweep.sigma_max_deg;
    double t_end = 0.0;
    for (const auto& cv : curves) {
        if (!cv.rows->empty()) t_end = std::max(t_end, cv.rows->back().t);
    }
    lead.series.push_back({"FOV limit", {0.0, t_end}, {sm, sm}, true});
    lead.series.push_back({"", {0.0, t_end}, {-sm, -sm}, true});
    const std::pair<const char*, const Plot*> files[] = {
        {"trajectories.svg", &traj}, {"lead_angle.svg", &lead}, {"control.svg", &ctrl}};
    for (const auto& [name, plot] : files) {
        const std::string rel = stage + "/" + name;
        text::write_file(c.path(rel), render_svg(*plot));
        m.add_output(c.opt.out_dir, rel);
    }
}

// --- commands ------------------------------------------------------------

int cmd_sweep(Context& c) {
    const auto& s = c.cfg.sweep;
    *c.log << "sweep: " << s.grid.n_alpha << "x" << s.grid.n_beta << " seeds, sigma_max " << s.sigma_max_deg
           << " deg, " << c.threads() << " threads\n";
    const SweepResult res = sweep(s.grid, c.cfg.sigma_max(), s.propagation, c.threads());
    c.mkdir("sweep");
    RunManifest m = c.manifest("sweep");
    write_sweep_csv(res, c.path(kSweepCsv));
    m.add_output(c.opt.out_dir, kSweepCsv);
    write_json(c.path(kSweepReport), sweep_report(res));
    m.add_output(c.opt.out_dir, kSweepReport);
    if (s.per_seed_files) {
        c.mkdir("sweep/seeds");
        for (const auto& item : res.items) {
            if (!item.trajectory) continue;
            std::ostringstream name;
            name << "sweep/seeds/a" << std::setw(3) << std::setfill('0') << item.alpha_index << "_b" << std::setw(4)
                 << item.beta_index << ".csv";
            write_trajectory_csv(*item.trajectory, c.path(name.str()));
            m.add_output(c.opt.out_dir, name.str());
        }
    }
    c.finish("sweep", m);
    *c.log << "sweep: " << res.succeeded() << "/" << res.items.size() << " seeds succeeded (ratio "
           << res.success_ratio() << ")\n";
    if (res.success_ratio() < s.min_success_ratio) {
        *c.log << "sweep: success ratio below sweep.min_success_ratio = " << s.min_success_ratio << "\n";
        return kAuditFailure;
    }
    return kOk;
}

int cmd_dataset(Context& c) {
    require_stage(c, "sweep", {"sweep"});
    const auto& s = c.cfg.sweep;
    const auto trajs = read_sweep_csv(c.path(kSweepCsv), c.cfg.sigma_max(), s.propagation);
    std::vector<const ExtremalTrajectory*> ptrs;
    for (const auto& t : trajs) ptrs.push_back(&t);
    std::ostringstream grid;
    grid << s.grid.n_alpha << "x" << s.grid.n_beta << " alpha_bar=" << text::format_double(s.grid.alpha_bar)
         << " refine_gap=" << text::format_double(s.grid.refine_gap) << " trajectories=" << trajs.size();
    const Dataset ds = build(ptrs, c.cfg.dataset.stride, s.propagation.T_bar, grid.str());
    c.mkdir("dataset");
    RunManifest m = c.manifest("dataset");
    m.add_input(c.opt.out_dir, kSweepCsv);
    save(ds, c.path(kDatasetCsv));
    m.add_output(c.opt.out_dir, kDatasetCsv);
    m.add_output(c.opt.out_dir, kDatasetMeta);
    c.finish("dataset", m);
    *c.log << "dataset: " << ds.samples.size() << " samples from " << trajs.size() << " trajectories\n";
    return kOk;
}

int cmd_train(Context& c) {
    require_stage(c, "dataset", {"sweep", "dataset"});
    const Dataset ds = load(c.path(kDatasetCsv));
    *c.log << "train: " << ds.samples.size() << " samples, " << c.cfg.train.epochs << " epochs max, seed "
           << c.cfg.train.seed << "\n";
    const TrainResult tr = train(ds, c.cfg.train);
    c.mkdir("model");
    RunManifest m = c.manifest("train");
    m.add_input(c.opt.out_dir, kDatasetCsv);
    save(tr.model, c.path(kModelJson));
    m.add_output(c.opt.out_dir, kModelJson);
    // Wall time lives in the manifest so that the report is reproducible byte for byte.
    const auto& r = tr.report;
    write_json(c.path(kTrainReport), {{"train_mse", r.train_mse},
                                      {"val_mse", r.val_mse},
                                      {"best_epoch", r.best_epoch},
                                      {"final_train_mse", r.final_train_mse},
                                      {"final_val_rmse", r.final_val_rmse},
                                      {"train_samples", r.train_samples},
                                      {"val_samples", r.val_samples}});
    m.add_output(c.opt.out_dir, kTrainReport);
    c.finish("model", m);
    *c.log << "train: best epoch " << r.best_epoch << ", held-out RMSE " << r.final_val_rmse << "\n";
    return kOk;
}

int cmd_simulate(Context& c) {
    const auto model = load_trained(c);
    const Scenario sc = c.cfg.make_scenario();
    NnLaw law(model, sc.a_max, c.cfg.scaling(), c.cfg.guidance.handover_t_go);
    const SimResult res = run(sc, law);
    c.mkdir("simulate");
    RunManifest m = c.manifest("simulate");
    m.add_input(c.opt.out_dir, kModelJson);
    write_history_csv(res, c.path("simulate/history.csv"));
    m.add_output(c.opt.out_dir, "simulate/history.csv");

    nlohmann::json summary = summary_json(sc, res);
    const MinTime mt = min_time(sc);
    summary["min_time"] = {{"lower_bound", mt.lower_bound}, {"estimate", mt.estimate}, {"fov_feasible", mt.fov_feasible},
                           {"max_time", mt.max_time}};
    std::vector<Curve> curves{{"NN", &res.history, false}};
    ExtremalReference ref;
    try {
        ref = matched_reference(sc, c.cfg.sweep.propagation);
        summary["reference"] = {{"effort_J", ref.effort_J},
                                {"sigma_peak", ref.sigma_peak},
                                {"alpha", ref.seed.alpha},
                                {"beta", ref.seed.beta},
                                {"effort_ratio", res.effort_J / ref.effort_J}};
        SimResult as_run;
        as_run.history = ref.history;
        write_history_csv(as_run, c.path("simulate/reference.csv"));
        m.add_output(c.opt.out_dir, "simulate/reference.csv");
        curves.push_back({"optimal", &ref.history, true});
    } catch (const Error& e) {
        summary["reference"] = nullptr;
        *c.log << "simulate: no matched extremal reference (" << e.what() << ")\n";
    }
    write_json(c.path("simulate/summary.json"), summary);
    m.add_output(c.opt.out_dir, "simulate/summary.json");
    write_plots(c, "simulate", curves, m);
    c.finish("simulate", m);
    if (!res.advisory.empty()) *c.log << "simulate: " << res.advisory << "\n";
    *c.log << "simulate: intercepted " << (res.intercepted ? "yes" : "no") << ", impact " << res.impact_time
           << " s (error " << res.impact_time - sc.t_f << " s), J " << res.effort_J << ", sigma peak "
           << res.sigma_peak / kDeg << " deg\n";
    return kOk;
}

int cmd_compare(Context& c) {
    const auto model = load_trained(c);
    const Scenario sc = c.cfg.make_scenario();
    const auto& g = c.cfg.guidance;
    NnLaw nn(model, sc.a_max, c.cfg.scaling(), g.handover_t_go);
    std::vector<std::unique_ptr<PnLaw>> pns;
    std::vector<GuidanceLaw*> laws{&nn};
    for (double N : g.pn_gains) {
        pns.push_back(std::make_unique<PnLaw>(N, sc.a_max));
        laws.push_back(pns.back().get());
    }
    std::vector<ComparisonRow> rows = compare(sc, laws);
    const auto timed = timed_pn_baselines(sc, g.pn_gains, g.pn_hold_fractions);
    for (const auto& t : timed) rows.push_back(t.row);

    c.mkdir("compare");
    RunManifest m = c.manifest("compare");
    m.add_input(c.opt.out_dir, kModelJson);
    write_comparison_csv(rows, c.path("compare/comparison.csv"));
    m.add_output(c.opt.out_dir, "compare/comparison.csv");

    // Plot the NN, the cheapest time-feasible PN and the optimum.
    const SimResult nn_run = run(sc, nn);
    std::vector<Curve> curves{{"NN", &nn_run.history, false}};
    SimResult pn_run;
    if (!timed.empty()) {
        const auto best = std::min_element(timed.begin(), timed.end(), [](const TimedPnRow& a, const TimedPnRow& b) {
            return a.row.effort_J < b.row.effort_J;
        });
        PnHoldLaw law(best->N, best->sigma_hold, best->switch_t_go, sc.a_max);
        pn_run = run(sc, law);
        curves.push_back({best->row.law, &pn_run.history, false});
    }
    ExtremalReference ref;
    nlohmann::json summary{{"rows", rows.size()}, {"timed_pn_rows", timed.size()}};
    try {
        ref = matched_reference(sc, c.cfg.sweep.propagation);
        curves.push_back({"optimal", &ref.history, true});
        summary["reference_effort_J"] = ref.effort_J;
    } catch (const Error& e) {
        summary["reference_effort_J"] = nullptr;
    }
    write_json(c.path("compare/summary.json"), summary);
    m.add_output(c.opt.out_dir, "compare/summary.json");
    write_plots(c, "compare", curves, m);
    c.finish("compare", m);
    for (const auto& r : rows) {
        *c.log << "compare: " << std::left << std::setw(28) << r.law << " impact " << r.impact_time << " s, J "
               << r.effort_J << ", sigma peak " << r.sigma_peak / kDeg << " deg\n";
    }
    return kOk;
}

// --- audit ---------------------------------------------------------------

struct Check {
    std::string name;
    bool pass;
    double value;
    double threshold;
    std::string detail;
};

void audit_pmp(std::vector<Check>& out, double sigma_max, Epsilon eps) {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    double worst_det = 0.0, min_det = std::numeric_limits<double>::infinity(), worst_fd = 0.0;
    for (int i = 0; i < 1000; ++i) {
        AugmentedState z{2.0 * U(rng), 2.0 * U(rng), std::numbers::pi * U(rng), 3.0 * U(rng)};
        if (std::hypot(z.x, z.y) < 0.05) continue;
        const LeadTerms lt = lead_terms(z);
        const double closed = std::exp(-2.0 * z.xi) + eps.value() * lt.sin_sigma * lt.sin_sigma;
        const double det = jacobian_gu(z, eps).determinant();
        worst_det = std::max(worst_det, std::abs(det - closed) / closed);
        min_det = std::min(min_det, det);
        if (i % 10 == 0) {
            // Costate rates against central differences of the Hamiltonian.
            const Costate p{U(rng), U(rng), U(rng), U(rng)};
            const ControlTriple u{U(rng), U(rng), U(rng)};
            const Costate pd = costate_rhs(z, p, u);
            const Eigen::Vector4d a{pd.px, pd.py, pd.ptheta, pd.pxi};
            Eigen::Vector4d fd;
            for (int k = 0; k < 4; ++k) {
                const double h = 1e-6;
                Eigen::Vector4d zp = z.vec(), zm = z.vec();
                zp[k] += h;
                zm[k] -= h;
                const AugmentedState sp{zp[0], zp[1], zp[2], zp[3]}, sm{zm[0], zm[1], zm[2], zm[3]};
                fd[k] = -(hamiltonian(sp, p, u, eps) - hamiltonian(sm, p, u, eps)) / (2.0 * h);
            }
            worst_fd = std::max(worst_fd, (a - fd).cwiseAbs().maxCoeff() / std::max(1.0, fd.cwiseAbs().maxCoeff()));
        }
    }
    (void)sigma_max;
    out.push_back({"pmp.jacobian_determinant", worst_det < 1e-12 && min_det > 0.0, worst_det, 1e-12,
                   "relative error of det(dg/du) against exp(-2 xi) + eps sin^2 sigma"});
    out.push_back({"pmp.costate_rates", worst_fd < 1e-6, worst_fd, 1e-6, "costate_rhs against -dH/dz by central differences"});
}

void audit_sweep(std::vector<Check>& out, const Context& c) {
    const auto rep = nlohmann::json::parse(text::read_file(c.path(kSweepReport)));
    const double ratio = rep.at("success_ratio");
    out.push_back({"sweep.success_ratio", ratio >= c.cfg.sweep.min_success_ratio, ratio, c.cfg.sweep.min_success_ratio,
                   "fraction of seeds that propagated"});
    double g = 0, h = 0, miss = 0, margin = std::numeric_limits<double>::infinity();
    for (const auto& s : rep.at("seeds")) {
        if (!s.contains("max_g_residual")) continue;
        g = std::max(g, s.at("max_g_residual").get<double>());
        h = std::max(h, s.at("hamiltonian_drift").get<double>());
        miss = std::max(miss, s.at("replay_miss").get<double>());
        margin = std::min(margin, s.at("fov_margin").get<double>());
    }
    out.push_back({"sweep.max_g_residual", g < 1e-8, g, 1e-8, "stationarity residual"});
    out.push_back({"sweep.hamiltonian_drift", h < 1e-8, h, 1e-8, "relative Hamiltonian drift"});
    out.push_back({"sweep.replay_miss", miss < 1e-6, miss, 1e-6, "forward replay terminal miss, normalized"});
    out.push_back({"sweep.fov_margin", margin >= -1e-3, margin, -1e-3, "sigma_max - max |sigma|, rad"});
}

void audit_dataset(std::vector<Check>& out, const Context& c) {
    const Dataset ds = load(c.path(kDatasetCsv));
    const double sm = ds.meta.sigma_max, tb = ds.meta.T_bar;
    std::size_t outside = 0;
    double worst_rt = 0.0;
    for (const auto& s : ds.samples) {
        if (!(s.sigma >= 0.0 && s.sigma <= sm && s.t_go >= 0.0 && s.t_go <= tb)) ++outside;
        for (const auto* ch : {&ds.norm.r, &ds.norm.sigma, &ds.norm.t_go}) {
            const double v = ch == &ds.norm.r ? s.r : ch == &ds.norm.sigma ? s.sigma : s.t_go;
            worst_rt = std::max(worst_rt, std::abs(ch->denormalize(ch->normalize(v)) - v) / std::max(1.0, std::abs(v)));
        }
    }
    out.push_back({"dataset.extents", outside == 0, static_cast<double>(outside), 0.0,
                   "samples with sigma outside [0, sigma_max] or t_go outside [0, T_bar]"});
    out.push_back({"dataset.normalization_round_trip", worst_rt < 1e-12, worst_rt, 1e-12, "denormalize(normalize(x)) - x"});
}

void audit_model(std::vector<Check>& out, const Context& c) {
    const MlpModel m = load_model(c.path(kModelJson));
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    double worst = 0.0;
    for (int i = 0; i < 20; ++i) worst = std::max(worst, gradient_check(m, {U(rng), U(rng), U(rng)}, U(rng)));
    out.push_back({"model.gradient_check", worst < 1e-6, worst, 1e-6, "backprop against central differences"});
    const auto rep = nlohmann::json::parse(text::read_file(c.path(kTrainReport)));
    const double rmse = rep.at("final_val_rmse");
    out.push_back({"model.heldout_rmse", rmse < 1e-2, rmse, 1e-2, "normalized held-out RMSE"});

    // Guidance-layer sign fold and scaling on the trained model.
    auto model = std::make_shared<const MlpModel>(m);
    const ScalingParams sp = c.cfg.scaling();
    const double sm = c.cfg.sigma_max();
    double fold = 0.0, scale = 0.0;
    std::uniform_real_distribution<double> P(0.0, 1.0);
    for (int i = 0; i < 200; ++i) {
        const double t_go = 5.0 + 60.0 * P(rng), V = 250.0;
        const double r = V * t_go * (0.5 + 0.49 * P(rng)), sigma = sm * P(rng), lam = 0.5 + 1.5 * P(rng);
        const double a = nn_command(*model, {r, sigma, t_go, V}, 1e9, sp);
        fold = std::max(fold, std::abs(a + nn_command(*model, {r, -sigma, t_go, V}, 1e9, sp)));
        const double b = nn_command(*model, {lam * r, sigma, lam * t_go, V}, 1e9, sp);
        scale = std::max(scale, std::abs(b * lam - a) / std::max(1e-12, std::abs(a)));
    }
    out.push_back({"guidance.sign_fold", fold == 0.0, fold, 0.0, "command(sigma) + command(-sigma)"});
    out.push_back({"guidance.scaling", scale < 1e-12, scale, 1e-12, "lambda * command(lambda r, lambda t_go) vs command"});
}

int cmd_audit(Context& c) {
    std::vector<Check> checks;
    nlohmann::json digests = nlohmann::json::object();
    bool have_sweep = false;
    for (const std::string stage : {"sweep", "dataset", "model", "simulate", "compare"}) {
        if (!fs::exists(fs::path(c.opt.out_dir) / stage / kManifestName)) continue;
        const RunManifest m = read_manifest(c.opt.out_dir, stage);
        auto bad = verify_outputs(c.opt.out_dir, m);
        const auto stale = verify_inputs(c.opt.out_dir, m);
        checks.push_back({"digests." + stage, bad.empty() && stale.empty(), static_cast<double>(bad.size() + stale.size()), 0.0,
                          !bad.empty() ? "changed: " + bad.front()
                          : !stale.empty() ? "stale input: " + stale.front()
                                           : "outputs and inputs match"});
        if (!stale.empty()) bad.push_back(stale.front());
        if (stage == "sweep") have_sweep = bad.empty();
        digests[stage] = bad.empty();
    }
    if (!digests.contains("sweep")) throw MissingArtifact("no sweep manifest under " + c.opt.out_dir + "; run 'sweep' first");

    audit_pmp(checks, c.cfg.sigma_max(), c.cfg.sweep.propagation.eps);
    if (have_sweep) audit_sweep(checks, c);
    if (digests.value("dataset", false)) audit_dataset(checks, c);
    if (digests.value("model", false)) audit_model(checks, c);

    bool pass = true;
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& k : checks) {
        pass = pass && k.pass;
        arr.push_back({{"name", k.name}, {"pass", k.pass}, {"value", k.value}, {"threshold", k.threshold}, {"detail", k.detail}});
        *c.log << (k.pass ? "PASS " : "FAIL ") << k.name << " = " << k.value << " (" << k.detail << ")\n";
    }
    c.mkdir("audit");
    RunManifest m = c.manifest("audit");
    write_json(c.path(kAuditJson), {{"pass", pass}, {"checks", arr}});
    m.add_output(c.opt.out_dir, kAuditJson);
    c.finish("audit", m);
    return pass ? kOk : kAuditFailure;
}

// --- report --------------------------------------------------------------

int cmd_report(Context& c) {
    nlohmann::json rep;
    std::ostringstream md;
    md << "# ITCG run report\n\n";
    RunManifest m = c.manifest("report");
    auto have = [&](const char* rel) { return fs::exists(c.path(rel)); };
    if (!have(kSweepReport)) throw MissingArtifact("no sweep report under " + c.opt.out_dir + "; run 'sweep' first");

    const auto sw = nlohmann::json::parse(text::read_file(c.path(kSweepReport)));
    m.add_input(c.opt.out_dir, kSweepReport);
    rep["sweep"] = {{"succeeded", sw.at("succeeded")}, {"total", sw.at("total")}, {"success_ratio", sw.at("success_ratio")}};
    md << "## Sweep\n\n" << sw.at("succeeded") << " of " << sw.at("total") << " seeds propagated (ratio "
       << sw.at("success_ratio") << ").\n\n";
    if (have(kTrainReport)) {
        const auto tr = nlohmann::json::parse(text::read_file(c.path(kTrainReport)));
        m.add_input(c.opt.out_dir, kTrainReport);
        rep["train"] = {{"best_epoch", tr.at("best_epoch")}, {"final_val_rmse", tr.at("final_val_rmse")},
                        {"train_samples", tr.at("train_samples")}, {"val_samples", tr.at("val_samples")}};
        md << "## Training\n\nBest epoch " << tr.at("best_epoch") << ", held-out normalized RMSE "
           << tr.at("final_val_rmse") << ".\n\n";
    }
    if (have("simulate/summary.json")) {
        const auto s = nlohmann::json::parse(text::read_file(c.path("simulate/summary.json")));
        m.add_input(c.opt.out_dir, "simulate/summary.json");
        rep["simulate"] = s;
        md << "## Simulation\n\n| quantity | value |\n|---|---|\n";
        md << "| desired impact time, s | " << s["scenario"]["t_f"] << " |\n";
        md << "| actual impact time, s | " << s["impact_time"] << " |\n";
        md << "| sigma peak, deg | " << s["sigma_peak"].get<double>() / kDeg << " |\n";
        md << "| J, m^2/s^3 | " << s["effort_J"] << " |\n";
        if (!s["reference"].is_null()) md << "| optimal J, m^2/s^3 | " << s["reference"]["effort_J"] << " |\n";
        md << "\nPlots: simulate/trajectories.svg, simulate/lead_angle.svg, simulate/control.svg\n\n";
    }
    if (have("compare/comparison.csv")) {
        m.add_input(c.opt.out_dir, "compare/comparison.csv");
        md << "## Comparison\n\n```\n" << text::read_file(c.path("compare/comparison.csv")) << "```\n\n";
    }
    if (have(kAuditJson)) {
        const auto a = nlohmann::json::parse(text::read_file(c.path(kAuditJson)));
        m.add_input(c.opt.out_dir, kAuditJson);
        rep["audit_pass"] = a.at("pass");
        md << "## Audit\n\n" << (a.at("pass").get<bool>() ? "All checks passed." : "Some checks failed.") << "\n";
    }
    c.mkdir("report");
    write_json(c.path("report/report.json"), rep);
    text::write_file(c.path("report/report.md"), md.str());
    m.add_output(c.opt.out_dir, "report/report.json");
    m.add_output(c.opt.out_dir, "report/report.md");
    c.finish("report", m);
    *c.log << "report: " << c.path("report/report.md") << "\n";
    return kOk;
}

}  // namespace

int run_command(const std::string& name, const CliOptions& opt, std::ostream& log) {
    try {
        Context c{opt.config_path.empty() ? PipelineConfig{} : load_config(opt.config_path), opt, &log};
        if (opt.seed) c.cfg.train.seed = *opt.seed;
        c.cfg.validate();
        if (name == "sweep") return cmd_sweep(c);
        if (name == "dataset") return cmd_dataset(c);
        if (name == "train") return cmd_train(c);
        if (name == "simulate") return cmd_simulate(c);
        if (name == "compare") return cmd_compare(c);
        if (name == "audit") return cmd_audit(c);
        if (name == "report") return cmd_report(c);
        log << "unknown command: " << name << "\n";
        return kFailure;
    } catch (const ConfigError& e) {
        log << "error: " << e.what() << "\n";
        return kConfigError;
    } catch (const MissingArtifact& e) {
        log << "error: " << e.what() << "\n";
        return kMissingUpstream;
    } catch (const std::exception& e) {
        log << "error: " << e.what() << "\n";
        return kFailure;
    }
}

}  // namespace itcg::cli
