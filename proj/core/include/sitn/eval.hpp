#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "sitn/calibration.hpp"
#include "sitn/flow.hpp"
#include "sitn/synthetic.hpp"
#include "sitn/types.hpp"

namespace sitn {

/// Area under the ROC curve by the rank statistic: the probability that a
/// positive (label 1) outscores a negative (label 0), ties counted one half.
/// Throws errc::invalid_input on non-finite scores (+-infinity is allowed;
/// NaN is not) and when either class is empty.
double auroc(std::span<const double> scores, std::span<const int> labels);

struct BootstrapResult {
    double point = 0.0;  // AUROC on the full sample
    double lo = 0.0;     // percentile lower bound
    double hi = 0.0;     // percentile upper bound
    double level = 0.0;  // confidence level, e.g. 0.95
    std::size_t iterations = 0;
    std::uint64_t seed = 0;
};

/// Indices of one stratified (class-preserving) resample with replacement.
/// Exposed for tests; `bootstrap_auroc_ci` uses it internally.
std::vector<std::size_t> stratified_resample_indices(
    std::span<const int> labels, Rng& rng);

/// Percentile bootstrap confidence interval for the AUROC, resampling each
/// class with replacement. Each iteration draws from an independent RNG
/// stream derived from (seed, iteration), so the result is independent of
/// evaluation order: parallel and serial runs agree bitwise.
BootstrapResult bootstrap_auroc_ci(std::span<const double> scores,
                                   std::span<const int> labels,
                                   std::size_t iterations, double level,
                                   std::uint64_t seed, bool parallel = true);

/// One row of the false-positive-rate sweep.
struct FprPoint {
    double alpha = 0.0;      // nominal level
    double raw = 0.0;        // threshold m_hat >= 1 - alpha (uncalibrated)
    double calibrated = 0.0; // outer-ECDF rule at this alpha
    double tippett = 0.0;    // independence-assuming rule m_hat^k >= 1 - alpha
};

/// Measured false positive rates of the three decision rules on held-out
/// in-distribution combined scores, over alpha in {0.01, 0.02, ..., 0.50}.
std::vector<FprPoint> fpr_curve(const CalibrationModel& model,
                                std::span<const double> id_m_hats);

/// One scored sample as written to records.csv.
struct ScoreRecord {
    std::size_t id = 0;
    double s_ad = 0.0;
    double s_cv = 0.0;
    double q_ad = 0.0;
    double q_cv = 0.0;
    double s_sitn = 0.0;  // m_hat
    std::vector<std::pair<std::string, double>> extra;  // baseline columns
    int label = 0;  // 1 = out-of-distribution, 0 = in-distribution, -1 = n/a
};

enum class IdDataKind { white_noise, mixture };
enum class FlowKind { identity, trained };
enum class OodKind { variance_scaled, perturbation };

/// Full description of one benchmark run; parsed from JSON by
/// `load_experiment_config`.
struct ExperimentConfig {
    std::string name = "experiment";
    std::uint64_t seed = 0;

    // In-distribution data.
    IdDataKind id_kind = IdDataKind::white_noise;
    std::size_t dim = 0;
    MixtureSpec mixture;  // used when id_kind == mixture

    // Transport map. identity: data already standard normal. trained: fit a
    // velocity field on the in-distribution sampler first.
    FlowKind flow_kind = FlowKind::identity;
    TrainConfig train;

    // Out-of-distribution generator.
    OodKind ood_kind = OodKind::perturbation;
    PerturbKind perturb_kind = PerturbKind::mean_shift;
    double ood_strength = 0.0;  // perturbation strength, or the scale a

    // Sample sizes.
    std::size_t n_calibration = 0;
    std::size_t n_id_test = 0;
    std::size_t n_ood_test = 0;

    // Detector settings.
    double alpha = 0.05;
    double split_fraction = 0.5;
    std::vector<std::string> statistics{"ad", "cv"};

    // Extra scoring methods: any of "loglik", "typicality", "dose_kde",
    // "complexity", "waic", "kde_agg". Likelihood methods require a trained
    // flow and dim <= 64.
    std::vector<std::string> methods;
    std::size_t waic_ensemble = 3;
    std::size_t baseline_fit_cap = 1000;  // likelihood fit-set budget

    std::size_t bootstrap_iterations = 10000;
    SolverConfig solver;

    void validate() const;
};

struct MethodResult {
    std::string method;
    BootstrapResult auroc;
};

struct ExperimentResult {
    std::vector<ScoreRecord> records;
    std::vector<MethodResult> aurocs;
    std::vector<FprPoint> fpr;
    CalibrationModel model;
    double flagged_id_fraction = 0.0;   // calibrated rule on ID test rows
    double flagged_ood_fraction = 0.0;  // calibrated rule on OOD test rows
    double train_final_loss = 0.0;      // trained flows only
};

/// Runs the full benchmark: sample, (optionally) train, invert, calibrate,
/// score, evaluate. When `out_dir` is non-empty, writes records.csv,
/// auroc.csv, fpr_curve.csv and summary.txt there as they are computed.
/// Deterministic given the config.
ExperimentResult run_experiment(const ExperimentConfig& config,
                                const std::string& out_dir);

}  // namespace sitn
