#include "sitn/eval.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <numeric>
#include <string>

#include "parallel.hpp"
#include "sitn/baselines.hpp"
#include "sitn/errors.hpp"
#include "sitn/io.hpp"

namespace sitn {

double auroc(std::span<const double> scores, std::span<const int> labels) {
    require(scores.size() == labels.size(), errc::invalid_input,
            "auroc: scores and labels differ in length");
    require(!scores.empty(), errc::invalid_input, "auroc: empty input");
    std::size_t n_pos = 0, n_neg = 0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        require(!std::isnan(scores[i]), errc::invalid_input,
                "auroc: NaN score");
        require(labels[i] == 0 || labels[i] == 1, errc::invalid_input,
                "auroc: labels must be 0 or 1");
        if (labels[i] == 1) {
            ++n_pos;
        } else {
            ++n_neg;
        }
    }
    require(n_pos > 0 && n_neg > 0, errc::invalid_input,
            "auroc: both classes must be present");

    // Rank statistic with average ranks over ties: the probability that a
    // positive outscores a negative, ties counted one half.
    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return scores[a] < scores[b];
    });
    double rank_sum_pos = 0.0;
    std::size_t i = 0;
    while (i < order.size()) {
        std::size_t j = i;
        while (j < order.size() && scores[order[j]] == scores[order[i]]) ++j;
        // 1-based ranks i+1 .. j share the average rank.
        const double avg_rank = 0.5 * static_cast<double>(i + 1 + j);
        for (std::size_t t = i; t < j; ++t) {
            if (labels[order[t]] == 1) rank_sum_pos += avg_rank;
        }
        i = j;
    }
    const double np = static_cast<double>(n_pos);
    const double nn = static_cast<double>(n_neg);
    return (rank_sum_pos - np * (np + 1.0) / 2.0) / (np * nn);
}

std::vector<std::size_t> stratified_resample_indices(
    std::span<const int> labels, Rng& rng) {
    require(!labels.empty(), errc::invalid_input, "resample: empty labels");
    std::vector<std::size_t> neg, pos;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        require(labels[i] == 0 || labels[i] == 1, errc::invalid_input,
                "resample: labels must be 0 or 1");
        (labels[i] == 1 ? pos : neg).push_back(i);
    }
    // Class sizes are preserved; draw order is all negatives, then all
    // positives, so the randomness consumed is a pure function of the labels.
    std::vector<std::size_t> out;
    out.reserve(labels.size());
    for (std::size_t k = 0; k < neg.size(); ++k) {
        out.push_back(neg[static_cast<std::size_t>(
            rng.below(static_cast<std::uint64_t>(neg.size())))]);
    }
    for (std::size_t k = 0; k < pos.size(); ++k) {
        out.push_back(pos[static_cast<std::size_t>(
            rng.below(static_cast<std::uint64_t>(pos.size())))]);
    }
    return out;
}

BootstrapResult bootstrap_auroc_ci(std::span<const double> scores,
                                   std::span<const int> labels,
                                   std::size_t iterations, double level,
                                   std::uint64_t seed, bool parallel) {
    require(iterations >= 1, errc::configuration,
            "bootstrap: iterations must be positive");
    require(std::isfinite(level) && level > 0.0 && level < 1.0,
            errc::configuration, "bootstrap: level must lie in (0, 1)");

    BootstrapResult res;
    res.point = auroc(scores, labels);
    res.level = level;
    res.iterations = iterations;
    res.seed = seed;

    std::vector<double> draws(iterations);
    std::vector<double> rs(scores.size());
    std::vector<int> rl(labels.size());
    // Each iteration derives its own stream from (seed, iteration), so the
    // estimate is independent of execution order: parallel == serial bitwise.
    auto one = [&scores, &labels, seed, &draws](std::size_t it,
                                                std::vector<double>& rs_local,
                                                std::vector<int>& rl_local) {
        Rng rng(derive_seed(seed, it));
        const std::vector<std::size_t> idx =
            stratified_resample_indices(labels, rng);
        for (std::size_t j = 0; j < idx.size(); ++j) {
            rs_local[j] = scores[idx[j]];
            rl_local[j] = labels[idx[j]];
        }
        draws[it] = auroc(rs_local, rl_local);
    };
    if (parallel && detail::default_thread_count() > 1) {
        detail::parallel_for(iterations, [&](std::size_t it) {
            thread_local std::vector<double> rs_local;
            thread_local std::vector<int> rl_local;
            rs_local.resize(scores.size());
            rl_local.resize(labels.size());
            one(it, rs_local, rl_local);
        });
    } else {
        for (std::size_t it = 0; it < iterations; ++it) one(it, rs, rl);
    }

    Ecdf dist = Ecdf::fit(std::move(draws));
    const double tail = (1.0 - level) / 2.0;
    res.lo = dist.quantile(tail);
    res.hi = dist.quantile(1.0 - tail);
    return res;
}

std::vector<FprPoint> fpr_curve(const CalibrationModel& model,
                                std::span<const double> id_m_hats) {
    require(!id_m_hats.empty(), errc::invalid_input,
            "fpr curve: no held-out scores");
    const double n = static_cast<double>(id_m_hats.size());
    const auto k = static_cast<double>(model.k());
    std::vector<FprPoint> out;
    out.reserve(50);
    for (int step = 1; step <= 50; ++step) {
        FprPoint p;
        p.alpha = static_cast<double>(step) / 100.0;
        const double thresh = 1.0 - p.alpha;
        std::size_t raw = 0, cal = 0, tip = 0;
        for (double m : id_m_hats) {
            if (m >= thresh) ++raw;
            if (model.outer_quantile(m) >= thresh) ++cal;
            if (std::pow(std::clamp(m, 0.0, 1.0), k) >= thresh) ++tip;
        }
        p.raw = static_cast<double>(raw) / n;
        p.calibrated = static_cast<double>(cal) / n;
        p.tippett = static_cast<double>(tip) / n;
        out.push_back(p);
    }
    return out;
}

namespace {

constexpr const char* kKnownMethods[] = {"loglik",     "typicality",
                                         "dose_kde",   "complexity",
                                         "waic",       "kde_agg"};

bool is_known_method(const std::string& m) {
    for (const char* k : kKnownMethods) {
        if (m == k) return true;
    }
    return false;
}

bool needs_likelihood(const std::string& m) {
    return m == "loglik" || m == "typicality" || m == "dose_kde" ||
           m == "complexity" || m == "waic";
}

}  // namespace

void ExperimentConfig::validate() const {
    require(!name.empty(), errc::configuration, "experiment: empty name");
    require(dim >= 4, errc::configuration,
            "experiment: dimension must be at least 4 (spectral statistic)");
    require(statistics.size() == 2 && statistics[0] == "ad" &&
                statistics[1] == "cv",
            errc::configuration,
            "experiment: the records schema fixes the statistics to [ad, cv]");
    require(n_calibration >= 20, errc::configuration,
            "experiment: need at least 20 calibration samples");
    require(n_id_test >= 1 && n_ood_test >= 1, errc::configuration,
            "experiment: test sample counts must be positive");
    require(std::isfinite(alpha) && alpha > 0.0 && alpha <= 1.0,
            errc::configuration, "experiment: alpha must lie in (0, 1]");
    require(std::isfinite(split_fraction) && split_fraction > 0.0 &&
                split_fraction < 1.0,
            errc::configuration,
            "experiment: split fraction must lie in (0, 1)");
    require(bootstrap_iterations >= 1, errc::configuration,
            "experiment: bootstrap iterations must be positive");
    solver.validate();
    if (id_kind == IdDataKind::mixture) {
        mixture.validate();
        require(mixture.dim == dim, errc::configuration,
                "experiment: mixture dimension does not match dim");
    }
    if (flow_kind == FlowKind::trained) {
        train.validate();
        require(train.steps >= 1, errc::configuration,
                "experiment: a trained transport needs at least 1 step");
    }
    if (ood_kind == OodKind::variance_scaled) {
        require(std::isfinite(ood_strength) && ood_strength > 0.0,
                errc::configuration,
                "experiment: variance-scaled strength is the latent scale and "
                "must be positive");
    } else {
        require(std::isfinite(ood_strength), errc::configuration,
                "experiment: perturbation strength must be finite");
    }
    bool any_likelihood = false;
    for (const std::string& m : methods) {
        require(is_known_method(m), errc::configuration,
                "experiment: unknown method '" + m +
                    "' (known: loglik, typicality, dose_kde, complexity, "
                    "waic, kde_agg)");
        require(std::count(methods.begin(), methods.end(), m) == 1,
                errc::configuration,
                "experiment: duplicate method '" + m + "'");
        if (needs_likelihood(m)) any_likelihood = true;
    }
    if (any_likelihood) {
        require(flow_kind == FlowKind::trained, errc::configuration,
                "experiment: likelihood methods need a trained transport");
        require(dim <= 64, errc::configuration,
                "experiment: likelihood methods are limited to 64 dimensions");
        require(baseline_fit_cap >= 2, errc::configuration,
                "experiment: likelihood fit budget must be at least 2");
    }
    if (std::count(methods.begin(), methods.end(), std::string("waic")) > 0) {
        require(waic_ensemble >= 2, errc::configuration,
                "experiment: ensemble score needs at least 2 members");
    }
}

namespace {

// Derived-stream slots for the experiment master seed. Fixed numbers are part
// of the reproducibility contract: rerunning a config reproduces every byte.
enum SeedSlot : std::uint64_t {
    kSlotCalData = 1,
    kSlotIdTest = 2,
    kSlotOod = 3,
    kSlotFlowInit = 4,
    kSlotTrain = 5,
    kSlotCalibFit = 6,
    kSlotBootstrap = 7,
    kSlotBaselineData = 8,
    kSlotKdeAgg = 9,
    kSlotDose = 10,
    kSlotWaicInit = 200,
    kSlotWaicTrain = 300,
};

LatentMatrix sample_id(const ExperimentConfig& cfg, std::size_t n, Rng& rng) {
    if (cfg.id_kind == IdDataKind::white_noise) {
        return sample_white_noise(n, cfg.dim, rng);
    }
    return sample_mixture(cfg.mixture, n, rng);
}

BatchSampler id_batch_sampler(const ExperimentConfig& cfg) {
    if (cfg.id_kind == IdDataKind::white_noise) {
        const std::size_t dim = cfg.dim;
        return [dim](std::size_t n, Rng& rng, std::vector<double>& out) {
            out.resize(n * dim);
            rng.fill_normal(out.data(), out.size());
        };
    }
    const MixtureSpec spec = cfg.mixture;
    return [spec](std::size_t n, Rng& rng, std::vector<double>& out) {
        LatentMatrix m = sample_mixture(spec, n, rng);
        out = std::move(m.data);
    };
}

// Inverts in bounded chunks so the stage buffers of huge matrices stay within
// a few hundred megabytes. Chunk boundaries are a pure function of the sizes,
// so results are reproducible.
LatentMatrix invert_chunked(const FlowModel& flow, const LatentMatrix& data,
                            const SolverConfig& solver) {
    const std::size_t chunk_rows =
        std::max<std::size_t>(1, 4'000'000 / std::max<std::size_t>(1, data.dim));
    LatentMatrix out(data.count, data.dim);
    for (std::size_t lo = 0; lo < data.count; lo += chunk_rows) {
        const std::size_t hi = std::min(data.count, lo + chunk_rows);
        const std::size_t n = hi - lo;
        std::vector<double> z = invert_batch(
            flow, {data.data.data() + lo * data.dim, n * data.dim}, n, solver);
        std::copy(z.begin(), z.end(), out.data.begin() + lo * data.dim);
    }
    return out;
}

std::vector<LikelihoodParts> likelihood_chunked(const FlowModel& flow,
                                                const LatentMatrix& data,
                                                const SolverConfig& solver) {
    constexpr std::size_t kChunk = 256;
    std::vector<LikelihoodParts> out;
    out.reserve(data.count);
    for (std::size_t lo = 0; lo < data.count; lo += kChunk) {
        const std::size_t hi = std::min(data.count, lo + kChunk);
        const std::size_t n = hi - lo;
        std::vector<LikelihoodParts> part = log_likelihood_parts_batch(
            flow, {data.data.data() + lo * data.dim, n * data.dim}, n, solver);
        for (auto& p : part) out.push_back(std::move(p));
    }
    return out;
}

void write_summary(const std::string& path, const ExperimentConfig& cfg,
                   const ExperimentResult& res) {
    std::ofstream f(path, std::ios::trunc);
    require(f.good(), errc::io_failure, "cannot open " + path);
    f << "experiment: " << cfg.name << "\n";
    f << "seed: " << cfg.seed << "\n";
    f << "dim: " << cfg.dim << "\n";
    f << "samples: calibration=" << cfg.n_calibration
      << " id_test=" << cfg.n_id_test << " ood_test=" << cfg.n_ood_test
      << "\n";
    f << "alpha: " << format_double(cfg.alpha) << "\n";
    f << "gamma: " << format_double(res.model.gamma()) << "\n";
    f << "flagged fraction (id): " << format_double(res.flagged_id_fraction)
      << "\n";
    f << "flagged fraction (ood): " << format_double(res.flagged_ood_fraction)
      << "\n";
    if (cfg.flow_kind == FlowKind::trained) {
        f << "train final loss: " << format_double(res.train_final_loss)
          << "\n";
    }
    f << "\nmethod auroc [" << format_double(100.0 * 0.95)
      << "% bootstrap interval, " << cfg.bootstrap_iterations
      << " iterations]\n";
    for (const MethodResult& mr : res.aurocs) {
        f << "  " << mr.method << ": " << format_double(mr.auroc.point)
          << " [" << format_double(mr.auroc.lo) << ", "
          << format_double(mr.auroc.hi) << "]\n";
    }
    f.flush();
    require(f.good(), errc::io_failure, "failed writing " + path);
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& cfg,
                                const std::string& out_dir) {
    cfg.validate();
    const std::uint64_t seed = cfg.seed;
    ExperimentResult res;

    // 1. Transport map.
    FlowModel flow;
    if (cfg.flow_kind == FlowKind::identity) {
        flow = FlowModel::zero(cfg.dim);
    } else {
        flow = FlowModel::init(cfg.dim, derive_seed(seed, kSlotFlowInit));
        const TrainReport report = train_flow(
            flow, id_batch_sampler(cfg), cfg.train, derive_seed(seed, kSlotTrain));
        res.train_final_loss = report.final_loss;
    }
    const bool identity = cfg.flow_kind == FlowKind::identity;

    // 2. Data. The identity transport is the exact map, so its inversions are
    // skipped rather than integrated (the zero field moves nothing).
    Rng cal_rng(derive_seed(seed, kSlotCalData));
    Rng id_rng(derive_seed(seed, kSlotIdTest));
    Rng ood_rng(derive_seed(seed, kSlotOod));
    const LatentMatrix x_cal = sample_id(cfg, cfg.n_calibration, cal_rng);
    const LatentMatrix x_id = sample_id(cfg, cfg.n_id_test, id_rng);
    LatentMatrix x_ood;
    if (cfg.ood_kind == OodKind::variance_scaled) {
        if (identity) {
            x_ood = sample_white_noise(cfg.n_ood_test, cfg.dim, ood_rng);
            for (double& v : x_ood.data) v *= cfg.ood_strength;
        } else {
            x_ood = sample_variance_scaled_ood(flow, cfg.ood_strength,
                                               cfg.n_ood_test, ood_rng,
                                               cfg.solver);
        }
    } else {
        x_ood = sample_id(cfg, cfg.n_ood_test, ood_rng);
        perturb(x_ood, cfg.perturb_kind, cfg.ood_strength);
    }
    const LatentMatrix z_cal =
        identity ? x_cal : invert_chunked(flow, x_cal, cfg.solver);
    const LatentMatrix z_id =
        identity ? x_id : invert_chunked(flow, x_id, cfg.solver);
    const LatentMatrix z_ood =
        identity ? x_ood : invert_chunked(flow, x_ood, cfg.solver);

    // 3. Statistics and calibration.
    const StatTable s_cal = compute_statistics(z_cal, cfg.statistics);
    const StatTable s_id = compute_statistics(z_id, cfg.statistics);
    const StatTable s_ood = compute_statistics(z_ood, cfg.statistics);
    res.model = CalibrationModel::fit(s_cal, cfg.alpha, cfg.split_fraction,
                                      derive_seed(seed, kSlotCalibFit));

    const std::size_t n_test = cfg.n_id_test + cfg.n_ood_test;
    res.records.resize(n_test);
    std::vector<double> m_id(cfg.n_id_test), m_ood(cfg.n_ood_test);
    for (std::size_t i = 0; i < n_test; ++i) {
        const bool is_ood = i >= cfg.n_id_test;
        const StatTable& st = is_ood ? s_ood : s_id;
        const std::size_t r = is_ood ? i - cfg.n_id_test : i;
        const CombinedScore cs = res.model.combine(st.row(r));
        ScoreRecord& rec = res.records[i];
        rec.id = i;
        rec.s_ad = cs.stat_values[0];
        rec.s_cv = cs.stat_values[1];
        rec.q_ad = cs.quantiles[0];
        rec.q_cv = cs.quantiles[1];
        rec.s_sitn = cs.m_hat;
        rec.label = is_ood ? 1 : 0;
        (is_ood ? m_ood[r] : m_id[r]) = cs.m_hat;
    }

    // 4. Extra scoring methods.
    std::vector<std::pair<std::string, std::vector<double>>> method_scores;
    bool any_likelihood = false;
    for (const std::string& m : cfg.methods) {
        if (needs_likelihood(m)) any_likelihood = true;
    }

    if (std::count(cfg.methods.begin(), cfg.methods.end(),
                   std::string("kde_agg")) > 0) {
        const auto split = split_indices(s_cal.rows(), cfg.split_fraction,
                                         derive_seed(seed, kSlotCalibFit));
        StatTable c1;
        c1.names = s_cal.names;
        c1.values.reserve(split.first.size() * s_cal.cols());
        for (std::size_t i : split.first) {
            for (double v : s_cal.row(i)) c1.values.push_back(v);
        }
        const KdeAggregator agg =
            KdeAggregator::fit(c1, derive_seed(seed, kSlotKdeAgg));
        std::vector<double> scores(n_test);
        for (std::size_t i = 0; i < n_test; ++i) {
            const bool is_ood = i >= cfg.n_id_test;
            const StatTable& st = is_ood ? s_ood : s_id;
            scores[i] = agg.score(st.row(is_ood ? i - cfg.n_id_test : i));
        }
        method_scores.emplace_back("kde_agg", std::move(scores));
    }

    if (any_likelihood) {
        Rng fit_rng(derive_seed(seed, kSlotBaselineData));
        const LatentMatrix x_fit = sample_id(cfg, cfg.baseline_fit_cap, fit_rng);
        const std::vector<LikelihoodParts> parts_fit =
            likelihood_chunked(flow, x_fit, cfg.solver);
        const std::vector<LikelihoodParts> parts_id =
            likelihood_chunked(flow, x_id, cfg.solver);
        const std::vector<LikelihoodParts> parts_ood =
            likelihood_chunked(flow, x_ood, cfg.solver);
        auto test_part = [&](std::size_t i) -> const LikelihoodParts& {
            return i < cfg.n_id_test ? parts_id[i]
                                     : parts_ood[i - cfg.n_id_test];
        };
        auto test_row = [&](std::size_t i) -> std::span<const double> {
            return i < cfg.n_id_test ? x_id.row(i)
                                     : x_ood.row(i - cfg.n_id_test);
        };

        for (const std::string& m : cfg.methods) {
            if (m == "kde_agg") continue;
            std::vector<double> scores(n_test);
            if (m == "loglik") {
                for (std::size_t i = 0; i < n_test; ++i) {
                    scores[i] = score_loglik(test_part(i).log_likelihood);
                }
            } else if (m == "typicality") {
                std::vector<double> fit_ll;
                fit_ll.reserve(parts_fit.size());
                for (const auto& p : parts_fit) {
                    fit_ll.push_back(p.log_likelihood);
                }
                const double mean_nll = fit_mean_nll(fit_ll);
                for (std::size_t i = 0; i < n_test; ++i) {
                    scores[i] = score_typicality(test_part(i).log_likelihood,
                                                 mean_nll);
                }
            } else if (m == "dose_kde") {
                std::vector<StatVector> fit_sv;
                fit_sv.reserve(parts_fit.size());
                for (const auto& p : parts_fit) {
                    fit_sv.push_back({p.log_likelihood, p.latent_log_prob,
                                      p.divergence_integral});
                }
                const DoseModel dose =
                    DoseModel::fit(fit_sv, derive_seed(seed, kSlotDose));
                for (std::size_t i = 0; i < n_test; ++i) {
                    const LikelihoodParts& p = test_part(i);
                    scores[i] = dose.score({p.log_likelihood,
                                            p.latent_log_prob,
                                            p.divergence_integral});
                }
            } else if (m == "complexity") {
                const ComplexityModel cm =
                    fit_complexity(x_fit.data, x_fit.count, x_fit.dim);
                for (std::size_t i = 0; i < n_test; ++i) {
                    const double bpd =
                        complexity_bits_per_dim(test_row(i), cm);
                    scores[i] = score_complexity(test_part(i).log_likelihood,
                                                 cfg.dim, bpd);
                }
            } else if (m == "waic") {
                // Member 0 is the main transport; the rest are independently
                // initialised and trained replicas.
                std::vector<std::vector<double>> member_ll;
                member_ll.reserve(cfg.waic_ensemble);
                auto lls_for = [&](const FlowModel& member) {
                    std::vector<double> ll(n_test);
                    const auto pid =
                        likelihood_chunked(member, x_id, cfg.solver);
                    const auto pood =
                        likelihood_chunked(member, x_ood, cfg.solver);
                    for (std::size_t i = 0; i < cfg.n_id_test; ++i) {
                        ll[i] = pid[i].log_likelihood;
                    }
                    for (std::size_t i = 0; i < cfg.n_ood_test; ++i) {
                        ll[cfg.n_id_test + i] = pood[i].log_likelihood;
                    }
                    return ll;
                };
                {
                    std::vector<double> ll(n_test);
                    for (std::size_t i = 0; i < n_test; ++i) {
                        ll[i] = test_part(i).log_likelihood;
                    }
                    member_ll.push_back(std::move(ll));
                }
                for (std::size_t e = 1; e < cfg.waic_ensemble; ++e) {
                    FlowModel member = FlowModel::init(
                        cfg.dim, derive_seed(seed, kSlotWaicInit + e));
                    train_flow(member, id_batch_sampler(cfg), cfg.train,
                               derive_seed(seed, kSlotWaicTrain + e));
                    member_ll.push_back(lls_for(member));
                }
                std::vector<double> stack(cfg.waic_ensemble);
                for (std::size_t i = 0; i < n_test; ++i) {
                    for (std::size_t e = 0; e < cfg.waic_ensemble; ++e) {
                        stack[e] = member_ll[e][i];
                    }
                    scores[i] = score_waic(stack);
                }
            }
            method_scores.emplace_back(m, std::move(scores));
        }
    }

    for (std::size_t i = 0; i < n_test; ++i) {
        for (const auto& [name, scores] : method_scores) {
            res.records[i].extra.emplace_back(name, scores[i]);
        }
    }

    // 5. Discrimination and error rates.
    std::vector<double> all_scores(n_test);
    std::vector<int> labels(n_test, 0);
    for (std::size_t i = cfg.n_id_test; i < n_test; ++i) labels[i] = 1;

    const std::uint64_t boot_seed = derive_seed(seed, kSlotBootstrap);
    std::uint64_t method_index = 0;
    auto add_method = [&](const std::string& name,
                          const std::vector<double>& scores) {
        MethodResult mr;
        mr.method = name;
        mr.auroc = bootstrap_auroc_ci(scores, labels, cfg.bootstrap_iterations,
                                      0.95, derive_seed(boot_seed, method_index));
        ++method_index;
        res.aurocs.push_back(std::move(mr));
    };

    for (std::size_t i = 0; i < n_test; ++i) all_scores[i] = res.records[i].s_sitn;
    add_method("sitn", all_scores);
    for (std::size_t i = 0; i < n_test; ++i) all_scores[i] = res.records[i].q_ad;
    add_method("ad", all_scores);
    for (std::size_t i = 0; i < n_test; ++i) all_scores[i] = res.records[i].q_cv;
    add_method("cv", all_scores);
    for (const auto& [name, scores] : method_scores) add_method(name, scores);

    res.fpr = fpr_curve(res.model, m_id);

    std::size_t flagged_id = 0, flagged_ood = 0;
    for (double m : m_id) flagged_id += res.model.classify(m) ? 1 : 0;
    for (double m : m_ood) flagged_ood += res.model.classify(m) ? 1 : 0;
    res.flagged_id_fraction =
        static_cast<double>(flagged_id) / static_cast<double>(cfg.n_id_test);
    res.flagged_ood_fraction =
        static_cast<double>(flagged_ood) / static_cast<double>(cfg.n_ood_test);

    // 6. Artifacts.
    if (!out_dir.empty()) {
        std::filesystem::create_directories(out_dir);
        const std::filesystem::path dir(out_dir);
        write_score_csv((dir / "records.csv").string(), res.records);
        write_auroc_csv((dir / "auroc.csv").string(), res.aurocs);
        write_fpr_csv((dir / "fpr_curve.csv").string(), res.fpr);
        write_summary((dir / "summary.txt").string(), cfg, res);
    }
    return res;
}

}  // namespace sitn
