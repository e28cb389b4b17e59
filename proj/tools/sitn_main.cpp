// sitn — command-line frontend for noise-space goodness-of-fit screening.
//
// Subcommands cover the full pipeline: train a transport map, invert data
// into latents, fit a split-calibration model, score/classify new samples,
// and run or re-analyse benchmark experiments.

#include <CLI11.hpp>

#include <sitn/baselines.hpp>
#include <sitn/calibration.hpp>
#include <sitn/errors.hpp>
#include <sitn/eval.hpp>
#include <sitn/flow.hpp>
#include <sitn/gof.hpp>
#include <sitn/io.hpp>
#include <sitn/rng.hpp>
#include <sitn/synthetic.hpp>
#include <sitn/types.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

namespace {

using namespace sitn;

std::vector<std::string> split_list(const std::string& csv) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : csv) {
        if (c == ',') {
            if (!cur.empty()) out.push_back(cur);
            cur.clear();
        } else if (c != ' ') {
            cur.push_back(c);
        }
    }
    if (!cur.empty()) out.push_back(cur);
    return out;
}

// Writes `body` to `path` via a temporary file and an atomic rename, so a
// crash mid-write never leaves a truncated artifact behind.
void atomic_write_text(const std::string& path, const std::string& body) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) raise(errc::io_failure, "cannot open '" + tmp + "' for writing");
        out << body;
        out.flush();
        if (!out) {
            std::remove(tmp.c_str());
            raise(errc::io_failure, "short write to '" + tmp + "'");
        }
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::remove(tmp.c_str());
        raise(errc::io_failure, "cannot rename '" + tmp + "' to '" + path + "'");
    }
}

// ---------------------------------------------------------------- train-flow

struct TrainFlowOpts {
    std::string data_path;
    std::string synthetic;   // "mixture2d" | "mixture32d" | "white"
    std::size_t dim = 0;     // only for --synthetic white
    std::string out_path;
    std::uint64_t seed = 0;
    std::size_t width = 128;
    TrainConfig train;
};

int cmd_train_flow(const TrainFlowOpts& o) {
    if (o.data_path.empty() == o.synthetic.empty())
        raise(errc::configuration, "exactly one of --data and --synthetic is required");

    std::size_t dim = 0;
    BatchSampler sampler;
    if (!o.data_path.empty()) {
        auto data = std::make_shared<LatentMatrix>(read_latents(o.data_path));
        dim = data->dim;
        // Sample training batches uniformly with replacement from the file rows.
        sampler = [data](std::size_t n, Rng& rng, std::vector<double>& out) {
            out.resize(n * data->dim);
            for (std::size_t r = 0; r < n; ++r) {
                const auto row = data->row(rng.below(data->count));
                std::copy(row.begin(), row.end(), out.begin() + r * data->dim);
            }
        };
    } else if (o.synthetic == "mixture2d" || o.synthetic == "mixture32d") {
        const MixtureSpec spec = o.synthetic == "mixture2d" ? MixtureSpec::planar_default()
                                                            : MixtureSpec::anisotropic32();
        dim = spec.dim;
        sampler = [spec](std::size_t n, Rng& rng, std::vector<double>& out) {
            out = sample_mixture(spec, n, rng).data;
        };
    } else if (o.synthetic == "white") {
        if (o.dim == 0) raise(errc::configuration, "--synthetic white requires --dim");
        dim = o.dim;
        sampler = [dim](std::size_t n, Rng& rng, std::vector<double>& out) {
            out.resize(n * dim);
            rng.fill_normal(out);
        };
    } else {
        raise(errc::configuration, "unknown synthetic target '" + o.synthetic +
                                       "' (expected mixture2d, mixture32d, or white)");
    }

    FlowModel model = FlowModel::init(dim, derive_seed(o.seed, 0), o.width);
    const TrainReport report = train_flow(model, sampler, o.train, derive_seed(o.seed, 1));
    save_flow(o.out_path, model);
    std::cout << "trained flow: dim=" << dim << " steps=" << o.train.steps
              << " final_loss=" << format_double(report.final_loss) << "\n"
              << "wrote " << o.out_path << "\n";
    return 0;
}

// -------------------------------------------------------------------- invert

struct InvertOpts {
    std::string model_path;
    std::string data_path;
    std::string out_path;
    SolverConfig solver;
};

int cmd_invert(const InvertOpts& o) {
    const FlowModel model = load_flow(o.model_path);
    LatentMatrix data = read_latents(o.data_path);
    if (data.dim != model.dim())
        raise(errc::invalid_input, "data dimension " + std::to_string(data.dim) +
                                       " does not match flow dimension " +
                                       std::to_string(model.dim()));
    data.data = invert_batch(model, data.data, data.count, o.solver);
    write_latents(o.out_path, data);
    std::cout << "inverted " << data.count << " rows of dimension " << data.dim
              << "\nwrote " << o.out_path << "\n";
    return 0;
}

// ----------------------------------------------------------------- calibrate

struct CalibrateOpts {
    std::string latents_path;
    std::string out_path;
    double alpha = 0.05;
    double split = 0.5;
    std::uint64_t seed = 0;
    std::string stats = "ad,cv";
};

int cmd_calibrate(const CalibrateOpts& o) {
    const LatentMatrix latents = read_latents(o.latents_path);
    const std::vector<std::string> names = split_list(o.stats);
    if (names.empty()) raise(errc::configuration, "--stats must name at least one statistic");
    const StatTable table = compute_statistics(latents, names);
    const CalibrationModel model = CalibrationModel::fit(table, o.alpha, o.split, o.seed);
    save_calibration(o.out_path, model);
    std::cout << "calibrated on " << latents.count << " samples (dim " << latents.dim
              << "), statistics [" << o.stats << "], alpha "
              << format_double(o.alpha) << ", threshold gamma "
              << format_double(model.gamma()) << "\nwrote " << o.out_path << "\n";
    return 0;
}

// --------------------------------------------------------------------- score

struct ScoreOpts {
    std::string latents_path;
    std::string calibration_path;
    std::string out_path;
};

int cmd_score(const ScoreOpts& o) {
    const CalibrationModel model = load_calibration(o.calibration_path);
    if (model.stat_names() != std::vector<std::string>{"ad", "cv"})
        raise(errc::configuration,
              "score requires a calibration model over statistics [ad, cv]");
    const LatentMatrix latents = read_latents(o.latents_path);
    const StatTable table = compute_statistics(latents, model.stat_names());
    std::vector<ScoreRecord> records(latents.count);
    for (std::size_t i = 0; i < latents.count; ++i) {
        const CombinedScore cs = model.combine(table.row(i));
        ScoreRecord& rec = records[i];
        rec.id = i;
        rec.s_ad = cs.stat_values[0];
        rec.s_cv = cs.stat_values[1];
        rec.q_ad = cs.quantiles[0];
        rec.q_cv = cs.quantiles[1];
        rec.s_sitn = cs.m_hat;
        rec.label = -1;
    }
    write_score_csv(o.out_path, records);
    std::cout << "scored " << latents.count << " samples\nwrote " << o.out_path << "\n";
    return 0;
}

// ------------------------------------------------------------------ classify

struct ClassifyOpts {
    std::string latents_path;
    std::string calibration_path;
    std::string out_path;
    double alpha = -1.0;  // <0: use the model's calibrated level
};

int cmd_classify(const ClassifyOpts& o) {
    const CalibrationModel model = load_calibration(o.calibration_path);
    const LatentMatrix latents = read_latents(o.latents_path);
    const StatTable table = compute_statistics(latents, model.stat_names());
    std::string body = "id,m_hat,outer_quantile,flagged\n";
    std::size_t flagged = 0;
    for (std::size_t i = 0; i < latents.count; ++i) {
        const CombinedScore cs = model.combine(table.row(i));
        const bool hit = model.classify(cs.m_hat, o.alpha);
        flagged += hit ? 1 : 0;
        body += std::to_string(i);
        body += ',';
        body += format_double(cs.m_hat);
        body += ',';
        body += format_double(model.outer()(cs.m_hat));
        body += ',';
        body += hit ? '1' : '0';
        body += '\n';
    }
    if (!o.out_path.empty()) atomic_write_text(o.out_path, body);
    const double fraction =
        latents.count == 0 ? 0.0 : static_cast<double>(flagged) / static_cast<double>(latents.count);
    std::cout << "flagged " << flagged << " of " << latents.count << " samples (fraction "
              << format_double(fraction) << ")\n";
    if (!o.out_path.empty()) std::cout << "wrote " << o.out_path << "\n";
    return 0;
}

// ------------------------------------------------------------------ evaluate

struct EvaluateOpts {
    std::string config_path;
    std::string out_dir;
};

int cmd_evaluate(const EvaluateOpts& o) {
    const ExperimentConfig config = load_experiment_config(o.config_path);
    const ExperimentResult result = run_experiment(config, o.out_dir);
    std::cout << "experiment '" << config.name << "' complete\n";
    for (const MethodResult& m : result.aurocs) {
        std::cout << "  auroc[" << m.method << "] = " << format_double(m.auroc.point)
                  << "  (" << format_double(m.auroc.lo) << ", " << format_double(m.auroc.hi)
                  << ")\n";
    }
    std::cout << "  flagged id fraction  = " << format_double(result.flagged_id_fraction)
              << "\n  flagged ood fraction = " << format_double(result.flagged_ood_fraction)
              << "\nartifacts in " << o.out_dir << "\n";
    return 0;
}

// -------------------------------------------------------------------- report

struct ReportOpts {
    std::string records_path;
    std::string out_dir;
    std::size_t iterations = 10000;
    std::uint64_t seed = 0;
};

int cmd_report(const ReportOpts& o) {
    const std::vector<ScoreRecord> records = read_score_csv(o.records_path);
    const std::vector<std::string> extra_names = [&] {
        std::vector<std::string> names;
        if (!records.empty())
            for (const auto& [name, value] : records.front().extra) names.push_back(name);
        return names;
    }();

    std::vector<int> labels;
    std::vector<std::size_t> keep;
    for (std::size_t i = 0; i < records.size(); ++i) {
        if (records[i].label >= 0) {
            keep.push_back(i);
            labels.push_back(records[i].label);
        }
    }
    if (keep.empty())
        raise(errc::insufficient_data, "records file has no labelled rows to analyse");

    struct Column {
        std::string name;
        std::vector<double> scores;
    };
    std::vector<Column> columns;
    columns.push_back({"sitn", {}});
    columns.push_back({"ad", {}});
    columns.push_back({"cv", {}});
    for (const std::string& name : extra_names) columns.push_back({name, {}});
    for (std::size_t idx : keep) {
        const ScoreRecord& rec = records[idx];
        columns[0].scores.push_back(rec.s_sitn);
        columns[1].scores.push_back(rec.q_ad);
        columns[2].scores.push_back(rec.q_cv);
        for (std::size_t j = 0; j < extra_names.size(); ++j)
            columns[3 + j].scores.push_back(rec.extra[j].second);
    }

    std::vector<MethodResult> rows;
    for (std::size_t c = 0; c < columns.size(); ++c) {
        MethodResult mr;
        mr.method = columns[c].name;
        mr.auroc = bootstrap_auroc_ci(columns[c].scores, labels, o.iterations, 0.95,
                                      derive_seed(o.seed, c));
        rows.push_back(std::move(mr));
    }

    std::filesystem::create_directories(o.out_dir);
    const std::string out = (std::filesystem::path(o.out_dir) / "auroc.csv").string();
    write_auroc_csv(out, rows);
    for (const MethodResult& m : rows)
        std::cout << "auroc[" << m.method << "] = " << format_double(m.auroc.point) << "  ("
                  << format_double(m.auroc.lo) << ", " << format_double(m.auroc.hi) << ")\n";
    std::cout << "wrote " << out << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"noise-space goodness-of-fit screening toolkit"};
    app.require_subcommand(1);

    TrainFlowOpts train_opts;
    CLI::App* train = app.add_subcommand("train-flow", "Train a transport map");
    train->add_option("--data", train_opts.data_path, "training data (latent-format file)");
    train->add_option("--synthetic", train_opts.synthetic,
                      "built-in target: mixture2d, mixture32d, or white");
    train->add_option("--dim", train_opts.dim, "dimension for --synthetic white");
    train->add_option("--out", train_opts.out_path, "output flow file")->required();
    train->add_option("--seed", train_opts.seed, "random seed (default 0)");
    train->add_option("--width", train_opts.width, "hidden width (default 128)");
    train->add_option("--steps", train_opts.train.steps, "training steps (default 8000)");
    train->add_option("--batch", train_opts.train.batch, "batch size (default 128)");
    train->add_option("--lr", train_opts.train.lr, "learning rate (default 1e-3)");
    train->add_option("--clip", train_opts.train.clip, "gradient-norm clip (default 1)");
    train->add_flag_function(
        "--no-cosine", [&](std::int64_t) { train_opts.train.cosine_decay = false; },
        "disable cosine learning-rate decay");

    InvertOpts invert_opts;
    CLI::App* invert = app.add_subcommand("invert", "Map data rows to latents through a flow");
    invert->add_option("--model", invert_opts.model_path, "flow file")->required();
    invert->add_option("--data", invert_opts.data_path, "input data (latent-format file)")
        ->required();
    invert->add_option("--out", invert_opts.out_path, "output latents file")->required();
    std::string method = "dopri45";
    invert->add_option("--method", method, "ode method: dopri45 or rk4");
    invert->add_option("--atol", invert_opts.solver.atol, "absolute tolerance (default 1e-5)");
    invert->add_option("--rtol", invert_opts.solver.rtol, "relative tolerance (default 1e-5)");
    invert->add_option("--max-steps", invert_opts.solver.max_steps,
                       "maximum accepted steps (default 100000)");
    invert->add_option("--fixed-steps", invert_opts.solver.fixed_steps,
                       "step count for rk4 (default 100)");

    CalibrateOpts cal_opts;
    CLI::App* calibrate = app.add_subcommand("calibrate", "Fit a split-calibration model");
    calibrate->add_option("--latents", cal_opts.latents_path, "in-distribution latents file")
        ->required();
    calibrate->add_option("--out", cal_opts.out_path, "output model file (json)")->required();
    calibrate->add_option("--alpha", cal_opts.alpha, "target false-positive rate (default 0.05)");
    calibrate->add_option("--split", cal_opts.split, "fraction for the inner split (default 0.5)");
    calibrate->add_option("--seed", cal_opts.seed, "split shuffle seed (default 0)");
    calibrate->add_option("--stats", cal_opts.stats,
                          "comma-separated statistics (default ad,cv; also ks)");

    ScoreOpts score_opts;
    CLI::App* score = app.add_subcommand("score", "Score latents against a calibration model");
    score->add_option("--latents", score_opts.latents_path, "latents file")->required();
    score->add_option("--calibration", score_opts.calibration_path, "calibration model (json)")
        ->required();
    score->add_option("--out", score_opts.out_path, "output records csv")->required();

    ClassifyOpts classify_opts;
    CLI::App* classify =
        app.add_subcommand("classify", "Flag latents that fail the goodness-of-fit test");
    classify->add_option("--latents", classify_opts.latents_path, "latents file")->required();
    classify
        ->add_option("--calibration", classify_opts.calibration_path, "calibration model (json)")
        ->required();
    classify->add_option("--out", classify_opts.out_path, "optional decisions csv");
    classify->add_option("--alpha", classify_opts.alpha,
                         "override the calibrated false-positive level");

    EvaluateOpts eval_opts;
    CLI::App* evaluate = app.add_subcommand("evaluate", "Run a benchmark experiment");
    evaluate->add_option("--config", eval_opts.config_path, "experiment config (json)")
        ->required();
    evaluate->add_option("--out-dir", eval_opts.out_dir, "output directory")->required();

    ReportOpts report_opts;
    CLI::App* report = app.add_subcommand("report", "Recompute metrics from a records csv");
    report->add_option("--records", report_opts.records_path, "records csv")->required();
    report->add_option("--out-dir", report_opts.out_dir, "output directory")->required();
    report->add_option("--iterations", report_opts.iterations,
                       "bootstrap iterations (default 10000)");
    report->add_option("--seed", report_opts.seed, "bootstrap seed (default 0)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;  // help/version exit 0; usage errors exit 2
    }

    try {
        if (train->parsed()) return cmd_train_flow(train_opts);
        if (invert->parsed()) {
            if (method == "rk4")
                invert_opts.solver.method = OdeMethod::rk4;
            else if (method == "dopri45")
                invert_opts.solver.method = OdeMethod::dopri45;
            else
                raise(errc::configuration, "unknown ode method '" + method + "'");
            return cmd_invert(invert_opts);
        }
        if (calibrate->parsed()) return cmd_calibrate(cal_opts);
        if (score->parsed()) return cmd_score(score_opts);
        if (classify->parsed()) return cmd_classify(classify_opts);
        if (evaluate->parsed()) return cmd_evaluate(eval_opts);
        if (report->parsed()) return cmd_report(report_opts);
    } catch (const sitn::Error& e) {
        std::cerr << "error [" << sitn::errc_name(e.code()) << "]: " << e.what() << "\n";
        return sitn::errc_exit_code(e.code());
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
