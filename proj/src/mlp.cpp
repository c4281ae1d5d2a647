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

#include "itcg/mlp.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

#include <json.hpp>

#include "itcg/errors.hpp"
#include "itcg/text.hpp"

namespace itcg {

namespace {

constexpr int H = MlpModel::kHidden;
using Params = Eigen::Matrix<double, MlpModel::kParams, 1>;
using W1Map = Eigen::Map<const Eigen::Matrix<double, H, 3, Eigen::RowMajor>>;
using W2Map = Eigen::Map<const Eigen::Matrix<double, H, H, Eigen::RowMajor>>;
using W3Map = Eigen::Map<const Eigen::Matrix<double, 1, H, Eigen::RowMajor>>;
using VecMap = Eigen::Map<const Eigen::Matrix<double, H, 1>>;

struct View {
    W1Map W1;
    VecMap b1;
    W2Map W2;
    VecMap b2;
    W3Map W3;
    double b3;

    explicit View(const Params& t)
        : W1(t.data() + MlpLayout::W1),
          b1(t.data() + MlpLayout::b1),
          W2(t.data() + MlpLayout::W2),
          b2(t.data() + MlpLayout::b2),
          W3(t.data() + MlpLayout::W3),
          b3(t[MlpLayout::b3]) {}
};

// splitmix64-seeded mt19937_64 with a portable uniform draw, so weights and
// shuffles do not depend on the standard library's distributions.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}
    double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }
    std::size_t below(std::size_t n) { return static_cast<std::size_t>(gen_() % n); }

    template <class T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[below(i)]);
    }

private:
    std::mt19937_64 gen_;
};

Eigen::Vector3d normalize_input(const NormStats& n, double r, double sigma, double t_go) {
    return {n.r.normalize(r), n.sigma.normalize(sigma), n.t_go.normalize(t_go)};
}

// Mean squared error over columns of X, evaluated in chunks.
double mse(const Params& theta, const Eigen::Matrix3Xd& X, const Eigen::RowVectorXd& T,
           const std::vector<std::size_t>& idx) {
    if (idx.empty()) return 0.0;
    const View v(theta);
    constexpr std::size_t kChunk = 4096;
    double sum = 0.0;
    Eigen::Matrix3Xd xb;
    for (std::size_t s = 0; s < idx.size(); s += kChunk) {
        const std::size_t n = std::min(kChunk, idx.size() - s);
        xb.resize(3, static_cast<Eigen::Index>(n));
        Eigen::RowVectorXd tb(static_cast<Eigen::Index>(n));
        for (std::size_t k = 0; k < n; ++k) {
            xb.col(static_cast<Eigen::Index>(k)) = X.col(static_cast<Eigen::Index>(idx[s + k]));
            tb[static_cast<Eigen::Index>(k)] = T[static_cast<Eigen::Index>(idx[s + k])];
        }
        const Eigen::MatrixXd h1 = ((v.W1 * xb).colwise() + v.b1).array().tanh();
        const Eigen::MatrixXd h2 = ((v.W2 * h1).colwise() + v.b2).array().tanh();
        const Eigen::RowVectorXd y = (v.W3 * h2).array() + v.b3;
        sum += (y - tb).squaredNorm();
    }
    return sum / static_cast<double>(idx.size());
}

// Mean squared error of one batch and its gradient.
double batch_gradient(const Params& theta, const Eigen::Matrix3Xd& xb, const Eigen::RowVectorXd& tb, Params& g) {
    const View v(theta);
    const double inv_b = 1.0 / static_cast<double>(xb.cols());
    const Eigen::MatrixXd h1 = ((v.W1 * xb).colwise() + v.b1).array().tanh();
    const Eigen::MatrixXd h2 = ((v.W2 * h1).colwise() + v.b2).array().tanh();
    const Eigen::RowVectorXd y = (v.W3 * h2).array() + v.b3;
    const Eigen::RowVectorXd e = y - tb;
    const Eigen::RowVectorXd dy = 2.0 * inv_b * e;

    Eigen::Map<Eigen::Matrix<double, 1, H, Eigen::RowMajor>>(g.data() + MlpLayout::W3) = dy * h2.transpose();
    g[MlpLayout::b3] = dy.sum();
    const Eigen::MatrixXd dz2 = (v.W3.transpose() * dy).array() * (1.0 - h2.array().square());
    Eigen::Map<Eigen::Matrix<double, H, H, Eigen::RowMajor>>(g.data() + MlpLayout::W2) = dz2 * h1.transpose();
    Eigen::Map<Eigen::Matrix<double, H, 1>>(g.data() + MlpLayout::b2) = dz2.rowwise().sum();
    const Eigen::MatrixXd dz1 = (v.W2.transpose() * dz2).array() * (1.0 - h1.array().square());
    Eigen::Map<Eigen::Matrix<double, H, 3, Eigen::RowMajor>>(g.data() + MlpLayout::W1) = dz1 * xb.transpose();
    Eigen::Map<Eigen::Matrix<double, H, 1>>(g.data() + MlpLayout::b1) = dz1.rowwise().sum();
    return e.squaredNorm() * inv_b;
}

}  // namespace

MlpModel init(std::uint64_t seed) {
    MlpModel m;
    Rng rng(seed);
    auto fill = [&](int offset, int count, int fan_in) {
        const double a = std::sqrt(3.0 / fan_in);
        for (int i = 0; i < count; ++i) m.theta[offset + i] = a * (2.0 * rng.uniform() - 1.0);
    };
    fill(MlpLayout::W1, H * 3, 3);
    fill(MlpLayout::W2, H * H, H);
    fill(MlpLayout::W3, H, H);
    return m;
}

MlpModel init_zero() { return MlpModel{}; }

double forward_normalized(const MlpModel& m, const Eigen::Vector3d& x) {
    const View v(m.theta);
    const Eigen::Matrix<double, H, 1> h1 = (v.W1 * x + v.b1).array().tanh();
    const Eigen::Matrix<double, H, 1> h2 = (v.W2 * h1 + v.b2).array().tanh();
    return v.W3.dot(h2) + v.b3;
}

double forward(const MlpModel& m, double r, double sigma, double t_go, bool* stale) {
    const Eigen::Vector3d x = normalize_input(m.norm, r, sigma, t_go);
    if (stale) *stale = (x.array().abs() > 1.0 + 1e-12).any();
    return m.norm.u.denormalize(forward_normalized(m, x));
}

void TrainConfig::validate() const {
    if (!(validation_fraction > 0.0 && validation_fraction <= 0.5)) {
        throw std::invalid_argument("validation_fraction must lie in (0, 0.5]");
    }
    if (epochs < 1 || batch_size < 1 || patience < 1) throw std::invalid_argument("epochs, batch_size, patience >= 1");
    if (!(learning_rate > 0.0) || !(lr_decay > 0.0 && lr_decay <= 1.0) || !(min_learning_rate >= 0.0)) {
        throw std::invalid_argument("bad learning-rate schedule");
    }
    if (!(beta1 >= 0.0 && beta1 < 1.0 && beta2 >= 0.0 && beta2 < 1.0)) throw std::invalid_argument("bad moment decay");
}

bool TrainReport::same_numbers(const TrainReport& o) const {
    return train_mse == o.train_mse && val_mse == o.val_mse && best_epoch == o.best_epoch &&
           final_train_mse == o.final_train_mse && final_val_rmse == o.final_val_rmse &&
           train_samples == o.train_samples && val_samples == o.val_samples;
}

TrainResult train(const Dataset& ds, const TrainConfig& cfg) {
    cfg.validate();
    const std::size_t n = ds.samples.size();
    if (n < 10) throw std::invalid_argument("training needs at least 10 samples");
    const auto start = std::chrono::steady_clock::now();

    Eigen::Matrix3Xd X(3, static_cast<Eigen::Index>(n));
    Eigen::RowVectorXd T(static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) {
        const Sample& s = ds.samples[i];
        X.col(static_cast<Eigen::Index>(i)) = normalize_input(ds.norm, s.r, s.sigma, s.t_go);
        T[static_cast<Eigen::Index>(i)] = ds.norm.u.normalize(s.u);
    }

    Rng rng(cfg.seed);
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    rng.shuffle(order);
    const std::size_t n_val = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(cfg.validation_fraction * n)));
    std::vector<std::size_t> val(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_val));
    std::vector<std::size_t> trn(order.begin() + static_cast<std::ptrdiff_t>(n_val), order.end());
    std::sort(val.begin(), val.end());
    std::sort(trn.begin(), trn.end());

    TrainResult out;
    out.model = init(rng.below(std::numeric_limits<std::size_t>::max()));
    out.model.norm = ds.norm;
    out.validation_indices = val;
    TrainReport& rep = out.report;
    rep.train_samples = trn.size();
    rep.val_samples = val.size();

    Params theta = out.model.theta;
    Params best = theta;
    double best_val = std::numeric_limits<double>::infinity();
    Params m1 = Params::Zero(), m2 = Params::Zero(), g;
    long step = 0;
    int stall = 0;
    const std::size_t bs = static_cast<std::size_t>(cfg.batch_size);
    Eigen::Matrix3Xd xb;
    Eigen::RowVectorXd tb;

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        const double lr = std::max(cfg.learning_rate * std::pow(cfg.lr_decay, epoch), cfg.min_learning_rate);
        rng.shuffle(trn);
        double sum = 0.0;
        for (std::size_t s = 0; s < trn.size(); s += bs) {
            const std::size_t b = std::min(bs, trn.size() - s);
            xb.resize(3, static_cast<Eigen::Index>(b));
            tb.resize(static_cast<Eigen::Index>(b));
            for (std::size_t k = 0; k < b; ++k) {
                xb.col(static_cast<Eigen::Index>(k)) = X.col(static_cast<Eigen::Index>(trn[s + k]));
                tb[static_cast<Eigen::Index>(k)] = T[static_cast<Eigen::Index>(trn[s + k])];
            }
            const double loss = batch_gradient(theta, xb, tb, g);
            if (!std::isfinite(loss) || !g.allFinite()) throw Diverged("training loss is not finite", epoch);
            sum += loss * static_cast<double>(b);
            ++step;
            m1 = cfg.beta1 * m1 + (1.0 - cfg.beta1) * g;
            m2 = cfg.beta2 * m2 + (1.0 - cfg.beta2) * g.cwiseAbs2();
            const double c1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(step));
            const double c2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(step));
            theta.array() -= lr * (m1.array() / c1) / ((m2.array() / c2).sqrt() + 1e-12);
        }
        const double train_mse = sum / static_cast<double>(trn.size());
        const double val_mse = mse(theta, X, T, val);
        if (!std::isfinite(train_mse) || !std::isfinite(val_mse)) throw Diverged("training loss is not finite", epoch);
        rep.train_mse.push_back(train_mse);
        rep.val_mse.push_back(val_mse);
        if (val_mse < best_val) {
            best_val = val_mse;
            best = theta;
            rep.best_epoch = epoch;
            stall = 0;
        } else if (++stall >= cfg.patience) {
            break;
        }
    }

    out.model.theta = best;
    rep.final_train_mse = mse(best, X, T, trn);
    rep.final_val_rmse = std::sqrt(mse(best, X, T, val));
    rep.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return out;
}

double loss_and_gradient(const MlpModel& m, const Eigen::Vector3d& x, double target, Params* grad) {
    Eigen::Matrix3Xd xb(3, 1);
    xb.col(0) = x;
    Eigen::RowVectorXd tb(1);
    tb[0] = target;
    Params g;
    const double loss = batch_gradient(m.theta, xb, tb, g);
    if (grad) *grad = g;
    return loss;
}

double gradient_check(const MlpModel& m, const Eigen::Vector3d& x, double target) {
    Params g;
    loss_and_gradient(m, x, target, &g);
    constexpr double h = 1e-6;
    MlpModel p = m;
    double worst = 0.0;
    for (int i = 0; i < MlpModel::kParams; ++i) {
        const double keep = p.theta[i];
        p.theta[i] = keep + h;
        const double fp = loss_and_gradient(p, x, target, nullptr);
        p.theta[i] = keep - h;
        const double fm = loss_and_gradient(p, x, target, nullptr);
        p.theta[i] = keep;
        worst = std::max(worst, std::abs(g[i] - (fp - fm) / (2.0 * h)));
    }
    const double scale = g.cwiseAbs().maxCoeff();
    return scale > 0.0 ? worst / scale : worst;
}

void save(const MlpModel& m, const std::string& path) {
    nlohmann::json j;
    j["format"] = "itcg-mlp";
    j["version"] = kMlpFormatVersion;
    j["layers"] = MlpModel::kLayers;
    j["activation"] = "tanh";
    auto block = [&](int off, int count) {
        return std::vector<double>(m.theta.data() + off, m.theta.data() + off + count);
    };
    j["weights"] = {block(MlpLayout::W1, H * 3), block(MlpLayout::W2, H * H), block(MlpLayout::W3, H)};
    j["biases"] = {block(MlpLayout::b1, H), block(MlpLayout::b2, H), block(MlpLayout::b3, 1)};
    j["norm"] = to_json(m.norm);
    text::write_file(path, j.dump(1) + "\n");
}

MlpModel load_model(const std::string& path) {
    const std::string content = text::read_file(path);
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(content);
    } catch (const nlohmann::json::exception& e) {
        throw Malformed("model file is not valid JSON: " + std::string(e.what()));
    }
    MlpModel m;
    try {
        if (j.at("format").get<std::string>() != "itcg-mlp") throw Malformed("not a model file");
        const int version = j.at("version").get<int>();
        if (version != kMlpFormatVersion) {
            throw VersionMismatch("model format version " + std::to_string(version) + ", expected " +
                                  std::to_string(kMlpFormatVersion));
        }
        if (j.at("layers").get<std::vector<int>>() != std::vector<int>(MlpModel::kLayers.begin(), MlpModel::kLayers.end())) {
            throw Malformed("unsupported layer sizes");
        }
        if (j.at("activation").get<std::string>() != "tanh") throw Malformed("unsupported activation");
        auto take = [&](const nlohmann::json& arr, int off, int count) {
            const auto v = arr.get<std::vector<double>>();
            if (static_cast<int>(v.size()) != count) throw Malformed("parameter block has the wrong size");
            for (int i = 0; i < count; ++i) m.theta[off + i] = v[static_cast<std::size_t>(i)];
        };
        const auto& w = j.at("weights");
        const auto& b = j.at("biases");
        if (w.size() != 3 || b.size() != 3) throw Malformed("expected three layers of parameters");
        take(w.at(0), MlpLayout::W1, H * 3);
        take(w.at(1), MlpLayout::W2, H * H);
        take(w.at(2), MlpLayout::W3, H);
        take(b.at(0), MlpLayout::b1, H);
        take(b.at(1), MlpLayout::b2, H);
        take(b.at(2), MlpLayout::b3, 1);
        m.norm = norm_from_json(j.at("norm"));
    } catch (const nlohmann::json::exception& e) {
        throw Malformed("bad model file: " + std::string(e.what()));
    }
    if (!m.theta.allFinite()) throw Malformed("non-finite model parameter");
    return m;
}

}  // namespace itcg
