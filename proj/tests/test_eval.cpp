// Ranking metrics, bootstrap intervals, false-positive-rate sweeps, and the
// end-to-end experiment runner.

#include <doctest.h>

#include <sitn/calibration.hpp>
#include <sitn/errors.hpp>
#include <sitn/eval.hpp>
#include <sitn/rng.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <set>
#include <string>
#include <vector>

#include "test_util.hpp"

using namespace sitn;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in.good());
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

struct TempDir {
    std::filesystem::path path;
    explicit TempDir(const std::string& name)
        : path(std::filesystem::temp_directory_path() / name) {
        std::filesystem::remove_all(path);
        std::filesystem::create_directories(path);
    }
    ~TempDir() { std::filesystem::remove_all(path); }
};

}  // namespace

TEST_CASE("auroc: hand-checked values") {
    // Perfect separation.
    CHECK(auroc(std::vector<double>{1, 2, 3, 4},
                std::vector<int>{0, 0, 1, 1}) == 1.0);
    // Perfectly wrong.
    CHECK(auroc(std::vector<double>{4, 3, 2, 1},
                std::vector<int>{0, 0, 1, 1}) == 0.0);
    // All scores tied: chance.
    CHECK(auroc(std::vector<double>{5, 5, 5, 5},
                std::vector<int>{0, 1, 0, 1}) == 0.5);
    // One positive tied with one negative: that pair counts one half.
    CHECK(auroc(std::vector<double>{1, 2, 2, 3},
                std::vector<int>{0, 0, 1, 1}) == doctest::Approx(0.875));
    // Infinities rank as extremes.
    CHECK(auroc(std::vector<double>{-kInf, 0, kInf},
                std::vector<int>{0, 0, 1}) == 1.0);
}

TEST_CASE("auroc: matches the all-pairs oracle, with heavy ties") {
    Rng rng(3);
    for (int rep = 0; rep < 10; ++rep) {
        const std::size_t n = 151;
        std::vector<double> scores(n);
        std::vector<int> labels(n);
        for (std::size_t i = 0; i < n; ++i) {
            // Quantised scores force many ties.
            scores[i] = std::round(rng.normal() * 4.0) / 4.0;
            labels[i] = rng.below(3) == 0 ? 1 : 0;
            if (labels[i]) scores[i] += 0.25;
        }
        labels[0] = 0;  // both classes guaranteed
        labels[1] = 1;
        CHECK(auroc(scores, labels) ==
              doctest::Approx(oracle::auroc(scores, labels)).epsilon(1e-12));
    }
}

TEST_CASE("auroc: input validation") {
    CHECK_THROWS_AS(
        auroc(std::vector<double>{1, 2}, std::vector<int>{1, 1}), Error);
    CHECK_THROWS_AS(
        auroc(std::vector<double>{1, 2}, std::vector<int>{0, 0}), Error);
    CHECK_THROWS_AS(
        auroc(std::vector<double>{1, std::numeric_limits<double>::quiet_NaN()},
              std::vector<int>{0, 1}),
        Error);
    CHECK_THROWS_AS(
        auroc(std::vector<double>{1, 2, 3}, std::vector<int>{0, 1}), Error);
    CHECK_THROWS_AS(
        auroc(std::vector<double>{1, 2}, std::vector<int>{0, 2}), Error);
}

TEST_CASE("stratified resampling preserves the class split") {
    std::vector<int> labels;
    for (int i = 0; i < 30; ++i) labels.push_back(i < 12 ? 1 : 0);
    Rng rng(9);
    const std::vector<std::size_t> idx = stratified_resample_indices(labels, rng);
    CHECK(idx.size() == 30);
    std::size_t pos = 0;
    for (std::size_t i : idx) pos += labels[i] == 1 ? 1 : 0;
    CHECK(pos == 12);

    Rng rng2(9);
    CHECK(stratified_resample_indices(labels, rng2) == idx);
}

TEST_CASE("bootstrap: parallel equals serial bitwise, interval brackets") {
    Rng rng(14);
    const std::size_t n = 300;
    std::vector<double> scores(n);
    std::vector<int> labels(n);
    for (std::size_t i = 0; i < n; ++i) {
        labels[i] = i % 3 == 0 ? 1 : 0;
        scores[i] = rng.normal() + (labels[i] ? 1.2 : 0.0);
    }
    const BootstrapResult par = bootstrap_auroc_ci(scores, labels, 400, 0.9, 5, true);
    const BootstrapResult ser = bootstrap_auroc_ci(scores, labels, 400, 0.9, 5, false);
    CHECK(par.point == ser.point);
    CHECK(par.lo == ser.lo);
    CHECK(par.hi == ser.hi);

    CHECK(par.point == auroc(scores, labels));
    CHECK(par.lo <= par.point);
    CHECK(par.point <= par.hi);
    CHECK(par.lo < par.hi);
    CHECK(par.level == 0.9);
    CHECK(par.iterations == 400);

    // A wider level widens (or keeps) the interval.
    const BootstrapResult wide = bootstrap_auroc_ci(scores, labels, 400, 0.99, 5);
    CHECK(wide.lo <= par.lo);
    CHECK(wide.hi >= par.hi);
}

TEST_CASE("fpr curve: raw, calibrated, and independence-assuming rules") {
    // One statistic so the independence rule coincides with the raw one.
    Rng rng(23);
    StatTable table;
    table.names = {"ad"};
    table.values.resize(500);
    rng.fill_normal(table.values);
    const CalibrationModel model = CalibrationModel::fit(table, 0.05, 0.5, 2);

    std::vector<double> id_m;
    for (int i = 0; i < 400; ++i)
        id_m.push_back(model.combine(std::vector<double>{rng.normal()}).m_hat);

    const std::vector<FprPoint> curve = fpr_curve(model, id_m);
    REQUIRE(curve.size() == 50);
    for (std::size_t i = 0; i < 50; ++i) {
        const FprPoint& p = curve[i];
        CHECK(p.alpha == doctest::Approx(0.01 * static_cast<double>(i + 1)));
        CHECK(p.tippett == p.raw);  // k = 1
        if (i > 0) {
            CHECK(p.raw >= curve[i - 1].raw);
            CHECK(p.calibrated >= curve[i - 1].calibrated);
            CHECK(p.tippett >= curve[i - 1].tippett);
        }
        // The calibrated rule tracks its nominal level on held-out data.
        CHECK(std::abs(p.calibrated - p.alpha) < 0.06);
    }

    // Hand-check one raw entry: fraction of m_hat >= 1 - alpha.
    const double alpha10 = curve[9].alpha;
    double manual = 0.0;
    for (double m : id_m) manual += m >= 1.0 - alpha10 ? 1.0 : 0.0;
    manual /= static_cast<double>(id_m.size());
    CHECK(curve[9].raw == doctest::Approx(manual));
}

TEST_CASE("experiment config: validation catches structural mistakes") {
    ExperimentConfig cfg;
    cfg.dim = 16;
    cfg.n_calibration = 200;
    cfg.n_id_test = 50;
    cfg.n_ood_test = 50;
    cfg.ood_kind = OodKind::perturbation;
    cfg.perturb_kind = PerturbKind::mean_shift;
    cfg.ood_strength = 0.5;
    CHECK_NOTHROW(cfg.validate());

    auto expect_config_error = [](ExperimentConfig c) {
        try {
            c.validate();
            FAIL_CHECK("expected configuration error");
        } catch (const Error& e) {
            CHECK(e.code() == errc::configuration);
        }
    };

    ExperimentConfig c = cfg;
    c.dim = 3;  // below the spectral statistic's minimum
    expect_config_error(c);
    c = cfg;
    c.statistics = {"ad"};  // records schema is fixed
    expect_config_error(c);
    c = cfg;
    c.statistics = {"cv", "ad"};
    expect_config_error(c);
    c = cfg;
    c.n_calibration = 10;
    expect_config_error(c);
    c = cfg;
    c.alpha = 0.0;
    expect_config_error(c);
    c = cfg;
    c.split_fraction = 1.0;
    expect_config_error(c);
    c = cfg;
    c.methods = {"loglik"};  // likelihoods need a trained transport
    expect_config_error(c);
    c = cfg;
    c.methods = {"nope"};
    expect_config_error(c);
    c = cfg;
    c.methods = {"kde_agg", "kde_agg"};
    expect_config_error(c);
    c = cfg;
    c.flow_kind = FlowKind::trained;
    c.train.steps = 10;
    c.methods = {"waic"};
    c.waic_ensemble = 1;
    expect_config_error(c);
    c = cfg;
    c.flow_kind = FlowKind::trained;
    c.train.steps = 10;
    c.dim = 65;  // likelihood cap
    c.methods = {"loglik"};
    expect_config_error(c);
    c = cfg;
    c.ood_kind = OodKind::variance_scaled;
    c.ood_strength = 0.0;
    expect_config_error(c);
}

TEST_CASE("experiment: identity transport, shift corruption, deterministic artifacts") {
    ExperimentConfig cfg;
    cfg.name = "unit-identity-shift";
    cfg.seed = 31;
    cfg.dim = 16;
    cfg.n_calibration = 1000;
    cfg.n_id_test = 300;
    cfg.n_ood_test = 300;
    cfg.ood_kind = OodKind::perturbation;
    cfg.perturb_kind = PerturbKind::mean_shift;
    cfg.ood_strength = 0.6;
    cfg.alpha = 0.05;
    cfg.methods = {"kde_agg"};
    cfg.bootstrap_iterations = 200;

    TempDir dir_a("sitn_eval_a");
    TempDir dir_b("sitn_eval_b");
    const ExperimentResult a = run_experiment(cfg, dir_a.path.string());
    const ExperimentResult b = run_experiment(cfg, dir_b.path.string());

    // Same config, same bytes: the determinism contract.
    for (const char* f : {"records.csv", "auroc.csv", "fpr_curve.csv", "summary.txt"})
        CHECK(slurp(dir_a.path / f) == slurp(dir_b.path / f));

    REQUIRE(a.records.size() == 600);
    std::size_t positives = 0;
    for (const ScoreRecord& r : a.records) {
        CHECK((r.label == 0 || r.label == 1));
        positives += r.label == 1 ? 1 : 0;
        REQUIRE(r.extra.size() == 1);
        CHECK(r.extra[0].first == "kde_agg");
        CHECK(r.s_sitn == std::max(r.q_ad, r.q_cv));  // the combined score
    }
    CHECK(positives == 300);

    // Method table: the combined detector, its two constituents, the ablation.
    REQUIRE(a.aurocs.size() == 4);
    CHECK(a.aurocs[0].method == "sitn");
    CHECK(a.aurocs[1].method == "ad");
    CHECK(a.aurocs[2].method == "cv");
    CHECK(a.aurocs[3].method == "kde_agg");

    // A 0.6 shift at D = 16 is an easy marginal target: the marginal
    // statistic drives detection, the spectral one is near chance.
    CHECK(a.aurocs[1].auroc.point > 0.85);
    CHECK(a.aurocs[2].auroc.point < 0.65);
    CHECK(a.aurocs[0].auroc.point > 0.85);
    CHECK(a.flagged_id_fraction < 0.12);
    CHECK(a.flagged_ood_fraction > 0.5);
    CHECK(a.fpr.size() == 50);

    // The recomputed AUROC from the records equals the reported one.
    std::vector<double> s;
    std::vector<int> l;
    for (const ScoreRecord& r : a.records) {
        s.push_back(r.s_sitn);
        l.push_back(r.label);
    }
    CHECK(a.aurocs[0].auroc.point == doctest::Approx(auroc(s, l)).epsilon(1e-12));
}

TEST_CASE("experiment: variance-scaled transport ood at a = 1 is a true null") {
    ExperimentConfig cfg;
    cfg.name = "unit-null";
    cfg.seed = 7;
    cfg.dim = 12;
    cfg.n_calibration = 800;
    cfg.n_id_test = 400;
    cfg.n_ood_test = 400;
    cfg.ood_kind = OodKind::variance_scaled;
    cfg.ood_strength = 1.0;  // same distribution as the null
    cfg.bootstrap_iterations = 100;

    const ExperimentResult r = run_experiment(cfg, "");
    // Identical distributions: AUROC hovers at chance and the calibrated rule
    // flags about alpha on both arms.
    CHECK(r.aurocs[0].auroc.point > 0.4);
    CHECK(r.aurocs[0].auroc.point < 0.6);
    CHECK(r.flagged_id_fraction < 0.10);
    CHECK(r.flagged_ood_fraction < 0.10);
}
