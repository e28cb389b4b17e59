#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <utility>
#include <vector>

#include "sitn/ode.hpp"
#include "sitn/rng.hpp"

namespace sitn {

/// Time-conditioned velocity field v(x, t): a fully-connected network
/// input (dim + 8 time features) -> width -> width -> width -> dim with tanh
/// hidden activations and a linear head. The 8 time features are
/// sin(pi t f), cos(pi t f) for f in {1, 2, 4, 8}.
///
/// The zero-initialised variant (`zero`) represents the identity transport
/// map: v == 0 everywhere, so integration leaves points untouched. That is
/// the exact-flow stand-in used when data are already standard normal.
class FlowModel {
public:
    FlowModel() = default;

    /// Glorot-uniform weights, zero biases, seeded and reproducible.
    static FlowModel init(std::size_t dim, std::uint64_t seed,
                          std::size_t width = 128);

    /// All-zero weights: the identity map under integration.
    static FlowModel zero(std::size_t dim, std::size_t width = 128);

    /// Builds a model from raw layer matrices (used by the loader).
    /// `weights[l]` is row-major (out_dim x in_dim), `biases[l]` length
    /// out_dim. Throws errc::bad_format on inconsistent shapes.
    static FlowModel from_weights(std::size_t dim, std::size_t width,
                                  std::vector<std::vector<double>> weights,
                                  std::vector<std::vector<double>> biases);

    /// Evaluates v(x, t); `out` must have length dim().
    void velocity(std::span<const double> x, double t,
                  std::span<double> out) const;

    /// Batched evaluation: `xs` is n rows of dim() values, `out` likewise.
    void velocity_batch(std::span<const double> xs, double t, std::size_t n,
                        std::span<double> out) const;

    std::size_t dim() const noexcept { return dim_; }
    std::size_t width() const noexcept { return width_; }
    std::size_t layer_count() const noexcept { return weights_.size(); }
    const std::vector<double>& layer_weights(std::size_t l) const { return weights_.at(l); }
    const std::vector<double>& layer_biases(std::size_t l) const { return biases_.at(l); }
    std::size_t layer_rows(std::size_t l) const { return shapes_.at(l).first; }
    std::size_t layer_cols(std::size_t l) const { return shapes_.at(l).second; }

private:
    friend struct FlowTrainer;

    std::size_t dim_ = 0;
    std::size_t width_ = 0;
    // Layer l: row-major (rows x cols) weight matrix + bias of length rows.
    std::vector<std::vector<double>> weights_;
    std::vector<std::vector<double>> biases_;
    std::vector<std::pair<std::size_t, std::size_t>> shapes_;
};

/// Fills `out` (n rows of `dim` values) with a batch of data samples.
using BatchSampler =
    std::function<void(std::size_t n, Rng& rng, std::vector<double>& out)>;

struct TrainConfig {
    std::size_t steps = 8000;
    std::size_t batch = 128;
    double lr = 1e-3;            // peak learning rate
    bool cosine_decay = true;    // cosine-anneal lr to zero over `steps`
    double clip = 1.0;           // global gradient-norm clip (<=0 disables)
    double beta1 = 0.9;
    double beta2 = 0.999;
    double adam_eps = 1e-8;

    void validate() const;
};

struct TrainReport {
    std::vector<double> losses;  // one per optimisation step
    double final_loss = 0.0;     // mean of the last 100 (or fewer) losses
};

/// Conditional-expectation regression loss for straight-line transport:
/// with z ~ N(0, I), x a data sample, t ~ U(0,1) and x_t = (1-t) z + t x,
/// the target velocity is x - z and the loss is the mean squared error over
/// the batch and coordinates. For standard-normal data the optimum is pi/2
/// per coordinate (the residual variance of x - z given x_t).
double flow_matching_loss(const FlowModel& model, std::span<const double> xs,
                          std::span<const double> zs,
                          std::span<const double> ts, std::size_t n);

/// Trains `model` in place by Adam on the flow-matching loss. Deterministic
/// given (model, sampler, config, seed): identical inputs give bit-identical
/// weights. steps == 0 is a no-op. A non-finite loss or gradient raises
/// errc::training_diverged naming the failing step.
TrainReport train_flow(FlowModel& model, const BatchSampler& sampler,
                       const TrainConfig& config, std::uint64_t seed);

/// Transports a point along dx/dt = v(x, t): forward integrates t 0 -> 1
/// (noise to data), backward integrates t 1 -> 0 (data to noise).
std::vector<double> integrate_flow(const FlowModel& model,
                                   std::span<const double> x0, bool forward,
                                   const SolverConfig& config);

/// Batched transport: all n rows are carried jointly as one ODE state (one
/// shared adaptive step sequence, error norm pooled over the batch). Much
/// faster than row-by-row integration and what the batch pipelines use.
std::vector<double> transport_batch(const FlowModel& model,
                                    std::span<const double> rows,
                                    std::size_t n, bool forward,
                                    const SolverConfig& config);

/// Batched inverse map: each row of `data` (n rows) is carried t 1 -> 0.
std::vector<double> invert_batch(const FlowModel& model,
                                 std::span<const double> data, std::size_t n,
                                 const SolverConfig& config);

/// Divergence of the velocity field at (x, t) by central differences with
/// per-coordinate step h_i = 1e-4 * (1 + |x_i|).
double divergence(const FlowModel& model, std::span<const double> x, double t);

struct LikelihoodParts {
    double log_likelihood = 0.0;      // log p_X(x) under the flow
    double latent_log_prob = 0.0;     // log N(z; 0, I) at the inverted point
    double divergence_integral = 0.0; // integral of div v along the path
    std::vector<double> latent;       // the inverted point z
};

/// Exact change-of-variables likelihood via the augmented backward ODE
/// d(x, l)/dt = (v(x, t), div v(x, t)) from t = 1 to t = 0:
/// log p_X(x) = log N(z; 0, I) + l(0). The divergence costs 2 * dim velocity
/// evaluations per stage, so dimensions above 64 are rejected with
/// errc::unsupported_dimension.
LikelihoodParts log_likelihood_parts(const FlowModel& model,
                                     std::span<const double> x,
                                     const SolverConfig& config);

double log_likelihood(const FlowModel& model, std::span<const double> x,
                      const SolverConfig& config);

/// Batched variant: all n rows share one augmented ODE solve (same pooling as
/// transport_batch), amortising the solver overhead across the batch.
std::vector<LikelihoodParts> log_likelihood_parts_batch(
    const FlowModel& model, std::span<const double> rows, std::size_t n,
    const SolverConfig& config);

/// log N(z; 0, I).
double standard_normal_log_density(std::span<const double> z);

}  // namespace sitn
