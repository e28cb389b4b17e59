#include "sitn/flow.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include "sitn/errors.hpp"

namespace sitn {

namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic,
                             Eigen::RowMajor>;
using ConstMapMat = Eigen::Map<const RowMat>;
using MapMat = Eigen::Map<RowMat>;
using ConstMapVec = Eigen::Map<const Eigen::VectorXd>;
using MapVec = Eigen::Map<Eigen::VectorXd>;

constexpr std::size_t kTimeFeatures = 8;
constexpr double kTimeFrequencies[4] = {1.0, 2.0, 4.0, 8.0};

// Writes [sin(pi f t), cos(pi f t)] for f in {1, 2, 4, 8} into out[0..8).
void time_features(double t, double* out) {
    for (int f = 0; f < 4; ++f) {
        const double a = std::numbers::pi * kTimeFrequencies[f] * t;
        out[2 * f] = std::sin(a);
        out[2 * f + 1] = std::cos(a);
    }
}

struct LayerDims {
    std::size_t rows, cols;
};

std::array<LayerDims, 4> layer_dims(std::size_t dim, std::size_t width) {
    return {{{width, dim + kTimeFeatures},
             {width, width},
             {width, width},
             {dim, width}}};
}

}  // namespace

FlowModel FlowModel::init(std::size_t dim, std::uint64_t seed,
                          std::size_t width) {
    require(dim >= 1, errc::invalid_input, "flow: dimension must be positive");
    require(width >= 1, errc::invalid_input, "flow: width must be positive");
    FlowModel m;
    m.dim_ = dim;
    m.width_ = width;
    Rng rng(seed);
    for (const LayerDims& ld : layer_dims(dim, width)) {
        const double lim =
            std::sqrt(6.0 / static_cast<double>(ld.rows + ld.cols));
        std::vector<double> w(ld.rows * ld.cols);
        for (double& v : w) v = rng.uniform(-lim, lim);
        m.weights_.push_back(std::move(w));
        m.biases_.emplace_back(ld.rows, 0.0);
        m.shapes_.emplace_back(ld.rows, ld.cols);
    }
    return m;
}

FlowModel FlowModel::zero(std::size_t dim, std::size_t width) {
    require(dim >= 1, errc::invalid_input, "flow: dimension must be positive");
    require(width >= 1, errc::invalid_input, "flow: width must be positive");
    FlowModel m;
    m.dim_ = dim;
    m.width_ = width;
    for (const LayerDims& ld : layer_dims(dim, width)) {
        m.weights_.emplace_back(ld.rows * ld.cols, 0.0);
        m.biases_.emplace_back(ld.rows, 0.0);
        m.shapes_.emplace_back(ld.rows, ld.cols);
    }
    return m;
}

FlowModel FlowModel::from_weights(std::size_t dim, std::size_t width,
                                  std::vector<std::vector<double>> weights,
                                  std::vector<std::vector<double>> biases) {
    require(dim >= 1 && width >= 1, errc::bad_format,
            "flow: invalid stored dimensions");
    require(weights.size() == 4 && biases.size() == 4, errc::bad_format,
            "flow: expected 4 layers, got " + std::to_string(weights.size()));
    FlowModel m;
    m.dim_ = dim;
    m.width_ = width;
    const auto dims = layer_dims(dim, width);
    for (std::size_t l = 0; l < 4; ++l) {
        require(weights[l].size() == dims[l].rows * dims[l].cols,
                errc::bad_format,
                "flow: layer " + std::to_string(l) + " weight shape mismatch");
        require(biases[l].size() == dims[l].rows, errc::bad_format,
                "flow: layer " + std::to_string(l) + " bias shape mismatch");
        for (double v : weights[l]) {
            require(std::isfinite(v), errc::corrupt_data,
                    "flow: non-finite stored weight");
        }
        for (double v : biases[l]) {
            require(std::isfinite(v), errc::corrupt_data,
                    "flow: non-finite stored bias");
        }
        m.shapes_.emplace_back(dims[l].rows, dims[l].cols);
    }
    m.weights_ = std::move(weights);
    m.biases_ = std::move(biases);
    return m;
}

void FlowModel::velocity_batch(std::span<const double> xs, double t,
                               std::size_t n, std::span<double> out) const {
    require(dim_ > 0, errc::configuration, "flow: model is not initialised");
    require(xs.size() == n * dim_, errc::invalid_input,
            "flow: input size does not match n * dim");
    require(out.size() == n * dim_, errc::invalid_input,
            "flow: output size does not match n * dim");
    if (n == 0) return;

    const auto d = static_cast<Eigen::Index>(dim_);
    const auto ni = static_cast<Eigen::Index>(n);

    RowMat input(ni, d + static_cast<Eigen::Index>(kTimeFeatures));
    input.leftCols(d) = ConstMapMat(xs.data(), ni, d);
    double tf[kTimeFeatures];
    time_features(t, tf);
    for (std::size_t j = 0; j < kTimeFeatures; ++j) {
        input.col(d + static_cast<Eigen::Index>(j)).setConstant(tf[j]);
    }

    RowMat h = std::move(input);
    for (std::size_t l = 0; l < 3; ++l) {
        ConstMapMat w(weights_[l].data(),
                      static_cast<Eigen::Index>(shapes_[l].first),
                      static_cast<Eigen::Index>(shapes_[l].second));
        ConstMapVec b(biases_[l].data(),
                      static_cast<Eigen::Index>(shapes_[l].first));
        RowMat z = h * w.transpose();
        z.rowwise() += b.transpose();
        h = z.array().tanh().matrix();
    }
    ConstMapMat w3(weights_[3].data(),
                   static_cast<Eigen::Index>(shapes_[3].first),
                   static_cast<Eigen::Index>(shapes_[3].second));
    ConstMapVec b3(biases_[3].data(),
                   static_cast<Eigen::Index>(shapes_[3].first));
    MapMat o(out.data(), ni, d);
    o.noalias() = h * w3.transpose();
    o.rowwise() += b3.transpose();
}

void FlowModel::velocity(std::span<const double> x, double t,
                         std::span<double> out) const {
    velocity_batch(x, t, 1, out);
}

void TrainConfig::validate() const {
    require(batch >= 1, errc::configuration, "train: batch must be positive");
    require(std::isfinite(lr) && lr > 0.0, errc::configuration,
            "train: learning rate must be positive");
    require(std::isfinite(clip), errc::configuration,
            "train: clip must be finite");
    require(beta1 >= 0.0 && beta1 < 1.0 && beta2 >= 0.0 && beta2 < 1.0,
            errc::configuration, "train: betas must lie in [0, 1)");
    require(adam_eps > 0.0, errc::configuration,
            "train: adam_eps must be positive");
}

double flow_matching_loss(const FlowModel& model, std::span<const double> xs,
                          std::span<const double> zs,
                          std::span<const double> ts, std::size_t n) {
    const std::size_t d = model.dim();
    require(xs.size() == n * d && zs.size() == n * d && ts.size() == n,
            errc::invalid_input, "flow loss: inconsistent batch shapes");
    std::vector<double> xt(n * d), pred(n * d);
    for (std::size_t i = 0; i < n; ++i) {
        const double t = ts[i];
        for (std::size_t j = 0; j < d; ++j) {
            xt[i * d + j] = (1.0 - t) * zs[i * d + j] + t * xs[i * d + j];
        }
    }
    // The interpolation time varies per row, so evaluate row by row.
    for (std::size_t i = 0; i < n; ++i) {
        model.velocity({xt.data() + i * d, d}, ts[i],
                       {pred.data() + i * d, d});
    }
    double loss = 0.0;
    for (std::size_t i = 0; i < n * d; ++i) {
        const double diff = pred[i] - (xs[i] - zs[i]);
        loss += diff * diff;
    }
    return loss / static_cast<double>(n * d);
}

namespace {

// Training-time forward/backward with per-row interpolation times. The row
// times enter only through the 8 input features, so the batch is still one
// set of matrix products.
struct Workspace {
    RowMat input;        // n x (d+8)
    RowMat act1, act2, act3;  // n x width, post-tanh
    RowMat out;          // n x d
};

void forward_cached(const FlowModel& m,
                    const std::vector<std::vector<double>>& w,
                    const std::vector<std::vector<double>>& b,
                    std::span<const double> xs, std::span<const double> ts,
                    std::size_t n, Workspace& ws) {
    const auto d = static_cast<Eigen::Index>(m.dim());
    const auto width = static_cast<Eigen::Index>(m.width());
    const auto ni = static_cast<Eigen::Index>(n);

    ws.input.resize(ni, d + static_cast<Eigen::Index>(kTimeFeatures));
    ws.input.leftCols(d) = ConstMapMat(xs.data(), ni, d);
    for (Eigen::Index i = 0; i < ni; ++i) {
        double tf[kTimeFeatures];
        time_features(ts[static_cast<std::size_t>(i)], tf);
        for (std::size_t j = 0; j < kTimeFeatures; ++j) {
            ws.input(i, d + static_cast<Eigen::Index>(j)) = tf[j];
        }
    }

    const auto in_dim = d + static_cast<Eigen::Index>(kTimeFeatures);
    ConstMapMat w0(w[0].data(), width, in_dim);
    ConstMapMat w1(w[1].data(), width, width);
    ConstMapMat w2(w[2].data(), width, width);
    ConstMapMat w3(w[3].data(), d, width);
    ConstMapVec b0(b[0].data(), width);
    ConstMapVec b1(b[1].data(), width);
    ConstMapVec b2(b[2].data(), width);
    ConstMapVec b3(b[3].data(), d);

    ws.act1 = (ws.input * w0.transpose()).rowwise() + b0.transpose();
    ws.act1 = ws.act1.array().tanh().matrix();
    ws.act2 = (ws.act1 * w1.transpose()).rowwise() + b1.transpose();
    ws.act2 = ws.act2.array().tanh().matrix();
    ws.act3 = (ws.act2 * w2.transpose()).rowwise() + b2.transpose();
    ws.act3 = ws.act3.array().tanh().matrix();
    ws.out = (ws.act3 * w3.transpose()).rowwise() + b3.transpose();
}

}  // namespace

// Grants train_flow access to the raw parameter storage.
struct FlowTrainer {
    static std::vector<std::vector<double>>& weights(FlowModel& m) { return m.weights_; }
    static std::vector<std::vector<double>>& biases(FlowModel& m) { return m.biases_; }
};

TrainReport train_flow(FlowModel& model, const BatchSampler& sampler,
                       const TrainConfig& config, std::uint64_t seed) {
    config.validate();
    require(model.dim() > 0, errc::configuration,
            "train: model is not initialised");
    require(static_cast<bool>(sampler), errc::configuration,
            "train: no batch sampler");

    TrainReport report;
    if (config.steps == 0) return report;

    const std::size_t d = model.dim();
    const std::size_t n = config.batch;
    Rng rng(seed);

    auto& w = FlowTrainer::weights(model);
    auto& b = FlowTrainer::biases(model);
    std::vector<std::vector<double>> mw, vw, mb, vb, gw, gb;
    for (std::size_t l = 0; l < 4; ++l) {
        mw.emplace_back(w[l].size(), 0.0);
        vw.emplace_back(w[l].size(), 0.0);
        gw.emplace_back(w[l].size(), 0.0);
        mb.emplace_back(b[l].size(), 0.0);
        vb.emplace_back(b[l].size(), 0.0);
        gb.emplace_back(b[l].size(), 0.0);
    }

    std::vector<double> xs, zs(n * d), ts(n), xt(n * d);
    Workspace ws;
    report.losses.reserve(config.steps);

    const auto width = static_cast<Eigen::Index>(model.width());
    const auto di = static_cast<Eigen::Index>(d);
    const auto ni = static_cast<Eigen::Index>(n);

    for (std::size_t step = 1; step <= config.steps; ++step) {
        // Draw order per step: data batch, noise batch, interpolation times.
        sampler(n, rng, xs);
        require(xs.size() == n * d, errc::invalid_input,
                "train: sampler returned a wrong-sized batch");
        rng.fill_normal(zs.data(), zs.size());
        for (std::size_t i = 0; i < n; ++i) ts[i] = rng.uniform();
        for (std::size_t i = 0; i < n; ++i) {
            const double t = ts[i];
            for (std::size_t j = 0; j < d; ++j) {
                xt[i * d + j] = (1.0 - t) * zs[i * d + j] + t * xs[i * d + j];
            }
        }

        forward_cached(model, w, b, xt, ts, n, ws);

        // diff = prediction - (x - z); loss = mean of squared entries.
        RowMat g(ni, di);
        double loss = 0.0;
        for (Eigen::Index i = 0; i < ni; ++i) {
            for (Eigen::Index j = 0; j < di; ++j) {
                const std::size_t f = static_cast<std::size_t>(i) * d +
                                      static_cast<std::size_t>(j);
                const double diff = ws.out(i, j) - (xs[f] - zs[f]);
                loss += diff * diff;
                g(i, j) = diff;
            }
        }
        loss /= static_cast<double>(n * d);
        if (!std::isfinite(loss)) {
            raise(errc::training_diverged,
                  "train: non-finite loss at step " + std::to_string(step));
        }
        report.losses.push_back(loss);
        g *= 2.0 / static_cast<double>(n * d);

        ConstMapMat w1m(w[1].data(), width, width);
        ConstMapMat w2m(w[2].data(), width, width);
        ConstMapMat w3m(w[3].data(), di, width);

        MapMat gw3(gw[3].data(), di, width);
        MapVec gb3(gb[3].data(), di);
        gw3.noalias() = g.transpose() * ws.act3;
        gb3 = g.colwise().sum();

        RowMat gh = g * w3m;
        RowMat gz = (gh.array() * (1.0 - ws.act3.array().square())).matrix();
        MapMat gw2(gw[2].data(), width, width);
        MapVec gb2(gb[2].data(), width);
        gw2.noalias() = gz.transpose() * ws.act2;
        gb2 = gz.colwise().sum();

        gh = gz * w2m;
        gz = (gh.array() * (1.0 - ws.act2.array().square())).matrix();
        MapMat gw1(gw[1].data(), width, width);
        MapVec gb1(gb[1].data(), width);
        gw1.noalias() = gz.transpose() * ws.act1;
        gb1 = gz.colwise().sum();

        gh = gz * w1m;
        gz = (gh.array() * (1.0 - ws.act1.array().square())).matrix();
        MapMat gw0(gw[0].data(), width,
                   di + static_cast<Eigen::Index>(kTimeFeatures));
        MapVec gb0(gb[0].data(), width);
        gw0.noalias() = gz.transpose() * ws.input;
        gb0 = gz.colwise().sum();

        double grad_ss = 0.0;
        for (std::size_t l = 0; l < 4; ++l) {
            for (double v : gw[l]) grad_ss += v * v;
            for (double v : gb[l]) grad_ss += v * v;
        }
        const double gnorm = std::sqrt(grad_ss);
        if (!std::isfinite(gnorm)) {
            raise(errc::training_diverged,
                  "train: non-finite gradient at step " + std::to_string(step));
        }
        const double scale =
            config.clip > 0.0 ? std::min(1.0, config.clip / (gnorm + 1e-30))
                              : 1.0;

        const double k = static_cast<double>(step);
        const double corr = std::sqrt(1.0 - std::pow(config.beta2, k)) /
                            (1.0 - std::pow(config.beta1, k));
        const double lr_t =
            config.cosine_decay
                ? config.lr * 0.5 *
                      (1.0 + std::cos(std::numbers::pi *
                                      static_cast<double>(step - 1) /
                                      static_cast<double>(config.steps)))
                : config.lr;

        auto adam_update = [&](std::vector<double>& p,
                               const std::vector<double>& grad,
                               std::vector<double>& m1,
                               std::vector<double>& m2) {
            for (std::size_t i = 0; i < p.size(); ++i) {
                const double gi = grad[i] * scale;
                m1[i] = config.beta1 * m1[i] + (1.0 - config.beta1) * gi;
                m2[i] = config.beta2 * m2[i] + (1.0 - config.beta2) * gi * gi;
                p[i] -= lr_t * corr * m1[i] /
                        (std::sqrt(m2[i]) + config.adam_eps);
            }
        };
        for (std::size_t l = 0; l < 4; ++l) {
            adam_update(w[l], gw[l], mw[l], vw[l]);
            adam_update(b[l], gb[l], mb[l], vb[l]);
        }
    }

    const std::size_t tail = std::min<std::size_t>(100, report.losses.size());
    double acc = 0.0;
    for (std::size_t i = report.losses.size() - tail; i < report.losses.size();
         ++i) {
        acc += report.losses[i];
    }
    report.final_loss = acc / static_cast<double>(tail);
    return report;
}

std::vector<double> transport_batch(const FlowModel& model,
                                    std::span<const double> rows,
                                    std::size_t n, bool forward,
                                    const SolverConfig& config) {
    require(model.dim() > 0, errc::configuration,
            "flow: model is not initialised");
    require(rows.size() == n * model.dim(), errc::invalid_input,
            "flow: input size does not match n * dim");
    require(n >= 1, errc::invalid_input, "flow: empty batch");
    OdeRhs rhs = [&model, n](double t, std::span<const double> y,
                             std::span<double> dydt) {
        model.velocity_batch(y, t, n, dydt);
    };
    const double t0 = forward ? 0.0 : 1.0;
    const double t1 = forward ? 1.0 : 0.0;
    OdeResult res = integrate_ode(rhs, rows, t0, t1, config);
    return std::move(res.state);
}

std::vector<double> integrate_flow(const FlowModel& model,
                                   std::span<const double> x0, bool forward,
                                   const SolverConfig& config) {
    return transport_batch(model, x0, 1, forward, config);
}

std::vector<double> invert_batch(const FlowModel& model,
                                 std::span<const double> data, std::size_t n,
                                 const SolverConfig& config) {
    return transport_batch(model, data, n, false, config);
}

namespace {

// Divergence of the velocity field for each of the n rows in `xs`, by central
// differences with per-coordinate step 1e-4 * (1 + |x_i|). One batched
// velocity evaluation over all 2 * n * d perturbed points.
void divergence_batch(const FlowModel& model, std::span<const double> xs,
                      double t, std::size_t n, std::vector<double>& scratch,
                      std::vector<double>& scratch_out,
                      std::span<double> div_out) {
    const std::size_t d = model.dim();
    scratch.resize(2 * n * d * d);  // 2*n*d perturbed rows of d coordinates
    scratch_out.resize(2 * n * d * d);
    // Rows 2*(r*d+i) and 2*(r*d+i)+1 perturb coordinate i of row r up/down.
    for (std::size_t r = 0; r < n; ++r) {
        const double* x = xs.data() + r * d;
        for (std::size_t i = 0; i < d; ++i) {
            const double h = 1e-4 * (1.0 + std::abs(x[i]));
            double* up = scratch.data() + (2 * (r * d + i)) * d;
            double* dn = scratch.data() + (2 * (r * d + i) + 1) * d;
            for (std::size_t j = 0; j < d; ++j) {
                up[j] = x[j];
                dn[j] = x[j];
            }
            up[i] += h;
            dn[i] -= h;
        }
    }
    model.velocity_batch(scratch, t, 2 * n * d, scratch_out);
    for (std::size_t r = 0; r < n; ++r) {
        const double* x = xs.data() + r * d;
        double acc = 0.0;
        for (std::size_t i = 0; i < d; ++i) {
            const double h = 1e-4 * (1.0 + std::abs(x[i]));
            const double up = scratch_out[(2 * (r * d + i)) * d + i];
            const double dn = scratch_out[(2 * (r * d + i) + 1) * d + i];
            acc += (up - dn) / (2.0 * h);
        }
        div_out[r] = acc;
    }
}

}  // namespace

double divergence(const FlowModel& model, std::span<const double> x,
                  double t) {
    require(x.size() == model.dim(), errc::invalid_input,
            "flow: point size does not match dim");
    std::vector<double> scratch, scratch_out;
    double out = 0.0;
    divergence_batch(model, x, t, 1, scratch, scratch_out, {&out, 1});
    return out;
}

double standard_normal_log_density(std::span<const double> z) {
    double ss = 0.0;
    for (double v : z) ss += v * v;
    return -0.5 * static_cast<double>(z.size()) *
               std::log(2.0 * std::numbers::pi) -
           0.5 * ss;
}

std::vector<LikelihoodParts> log_likelihood_parts_batch(
    const FlowModel& model, std::span<const double> rows, std::size_t n,
    const SolverConfig& config) {
    const std::size_t d = model.dim();
    require(d > 0, errc::configuration, "flow: model is not initialised");
    require(d <= 64, errc::unsupported_dimension,
            "likelihood: exact divergence integration is limited to 64 "
            "dimensions, got " +
                std::to_string(d));
    require(rows.size() == n * d, errc::invalid_input,
            "likelihood: input size does not match n * dim");
    require(n >= 1, errc::invalid_input, "likelihood: empty batch");

    // Augmented state: n rows of (x_0..x_{d-1}, accumulated divergence).
    const std::size_t ad = d + 1;
    std::vector<double> y0(n * ad, 0.0);
    for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t j = 0; j < d; ++j) y0[r * ad + j] = rows[r * d + j];
    }

    std::vector<double> xbuf(n * d), vbuf(n * d), divbuf(n);
    std::vector<double> scratch, scratch_out;
    OdeRhs rhs = [&](double t, std::span<const double> y,
                     std::span<double> dydt) {
        for (std::size_t r = 0; r < n; ++r) {
            for (std::size_t j = 0; j < d; ++j) {
                xbuf[r * d + j] = y[r * ad + j];
            }
        }
        model.velocity_batch(xbuf, t, n, vbuf);
        divergence_batch(model, xbuf, t, n, scratch, scratch_out, divbuf);
        for (std::size_t r = 0; r < n; ++r) {
            for (std::size_t j = 0; j < d; ++j) {
                dydt[r * ad + j] = vbuf[r * d + j];
            }
            dydt[r * ad + d] = divbuf[r];
        }
    };

    OdeResult res = integrate_ode(rhs, y0, 1.0, 0.0, config);

    std::vector<LikelihoodParts> out(n);
    for (std::size_t r = 0; r < n; ++r) {
        LikelihoodParts& p = out[r];
        p.latent.assign(res.state.begin() + static_cast<std::ptrdiff_t>(r * ad),
                        res.state.begin() +
                            static_cast<std::ptrdiff_t>(r * ad + d));
        p.divergence_integral = res.state[r * ad + d];
        p.latent_log_prob = standard_normal_log_density(p.latent);
        p.log_likelihood = p.latent_log_prob + p.divergence_integral;
    }
    return out;
}

LikelihoodParts log_likelihood_parts(const FlowModel& model,
                                     std::span<const double> x,
                                     const SolverConfig& config) {
    require(x.size() == model.dim(), errc::invalid_input,
            "likelihood: point size does not match dim");
    return log_likelihood_parts_batch(model, x, 1, config)[0];
}

double log_likelihood(const FlowModel& model, std::span<const double> x,
                      const SolverConfig& config) {
    return log_likelihood_parts(model, x, config).log_likelihood;
}

}  // namespace sitn
