// Experiment CLI: dataset generation, single fits, equivalence checks,
// Monte Carlo sweeps, and plotting.
//
// Exit codes: 0 ok, 2 config error, 3 solver failure in single-fit mode.

#include <cstdio>
#include <exception>
#include <fstream>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"

#include "interp/datagen.hpp"
#include "interp/equivalence.hpp"
#include "interp/errors.hpp"
#include "interp/experiments.hpp"
#include "interp/metrics.hpp"
#include "interp/rng.hpp"
#include "interp/solvers.hpp"

namespace {

using interp::Matrix;
using nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitSolver = 3;

std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

struct GenArgs {
    std::string model = "gmm";
    std::size_t k = 4;
    std::size_t p = 1000;
    std::size_t n = 50;
    double mu = 0.2;
    bool mu_absolute = false;
    bool balanced = false;
    std::uint64_t seed = 1;
    std::string out = "dataset.csv";
    std::vector<double> bilevel;  // n,m,q,r
};

int run_gen(const GenArgs& args) {
    interp::Dataset ds;
    const double mu_norm =
        args.mu_absolute ? args.mu : args.mu * std::sqrt(static_cast<double>(args.p));
    if (args.model == "gmm") {
        const auto spec = interp::GmmSpec::orthogonal(args.k, args.p, mu_norm);
        ds = args.balanced ? interp::sample_gmm_balanced(spec, args.n, args.seed)
                           : interp::sample_gmm(spec, args.n, args.seed);
    } else if (args.model == "mlm") {
        interp::MlmSpec spec;
        if (!args.bilevel.empty()) {
            if (args.bilevel.size() != 4) {
                throw interp::ConfigError("--bilevel expects n,m,q,r");
            }
            interp::BilevelParams params;
            params.n = static_cast<std::size_t>(args.bilevel[0]);
            params.m = args.bilevel[1];
            params.q = args.bilevel[2];
            params.r = args.bilevel[3];
            spec = interp::bilevel_mlm_spec(params, args.k);
        } else {
            spec = interp::MlmSpec::isotropic(args.k, args.p, mu_norm);
        }
        ds = interp::sample_mlm(spec, args.n, args.seed);
    } else if (args.model == "nc") {
        if (args.n % args.k != 0) throw interp::ConfigError("nc model needs k | n");
        ds = interp::neural_collapse_features(args.k, args.n / args.k, args.p, args.mu);
        ds.seed = args.seed;
    } else {
        throw interp::ConfigError("unknown model: " + args.model);
    }
    interp::write_dataset_csv(args.out, ds);
    std::cout << "wrote " << args.out << " (p=" << ds.x.rows() << ", n=" << ds.x.cols()
              << ", k=" << ds.onehot.rows() << ")\n";
    return kExitOk;
}

void write_classifier(const interp::LinearClassifier& clf, const std::string& prefix,
                      double tol, std::uint64_t seed) {
    const std::string wpath = prefix + ".weights.csv";
    std::ofstream out(wpath);
    if (!out) throw interp::IoError("cannot open " + wpath);
    const Matrix& w = clf.kind == interp::ClassifierKind::OvO ? clf.pairwise_weights
                                                              : clf.weights;
    for (std::size_t r = 0; r < w.rows(); ++r) {
        for (std::size_t c = 0; c < w.cols(); ++c) {
            if (c > 0) out << ',';
            out << format_double(w(r, c));
        }
        out << '\n';
    }

    json sidecar;
    sidecar["kind"] = interp::to_string(clf.kind);
    sidecar["tol"] = tol;
    sidecar["iterations"] = clf.info.iterations;
    sidecar["duality_gap"] = clf.info.duality_gap;
    sidecar["kkt_residual"] = clf.info.kkt_residual;
    sidecar["rank_deficient"] = clf.info.rank_deficient;
    sidecar["seed"] = seed;
    if (clf.kind == interp::ClassifierKind::OvO) {
        json pairs = json::array();
        for (const auto& [a, b] : clf.pairs) pairs.push_back({a, b});
        sidecar["pairs"] = pairs;
    }
    std::ofstream meta(prefix + ".json");
    if (!meta) throw interp::IoError("cannot open " + prefix + ".json");
    meta << sidecar.dump(2) << '\n';
}

int run_fit(const std::string& data, const std::string& kind_name, double tol,
            const std::string& out_prefix) {
    const interp::Dataset ds = interp::read_dataset_csv(data);
    const auto kind = interp::classifier_kind_from_string(kind_name);
    interp::SvmOptions opts;
    opts.tol = tol;
    interp::LinearClassifier clf;
    switch (kind) {
        case interp::ClassifierKind::MNI:
            clf = interp::fit_mni(ds.x, ds.onehot);
            break;
        case interp::ClassifierKind::MulticlassSVM:
            clf = interp::fit_multiclass_svm(ds.x, ds.onehot, opts).first;
            break;
        case interp::ClassifierKind::SimplexOvA:
            clf = interp::fit_ova_svm(ds.x, ds.onehot,
                                      interp::simplex_margins(ds.onehot.rows()), opts);
            break;
        case interp::ClassifierKind::OvA:
            clf = interp::fit_ova_svm(ds.x, ds.onehot, interp::Margins{1.0, -1.0}, opts);
            break;
        case interp::ClassifierKind::OvO:
            clf = interp::fit_ovo_svm(ds.x, ds.onehot, opts);
            break;
    }
    write_classifier(clf, out_prefix, tol, ds.seed);
    std::cout << "fit " << interp::to_string(clf.kind) << ": iterations=" << clf.info.iterations
              << " duality_gap=" << clf.info.duality_gap
              << " kkt_residual=" << clf.info.kkt_residual << '\n';
    std::cout << "wrote " << out_prefix << ".weights.csv and " << out_prefix << ".json\n";
    return kExitOk;
}

int run_check(const std::string& data, double tol, bool dump_full, const std::string& dump_path) {
    const interp::Dataset ds = interp::read_dataset_csv(data);
    const interp::DetConReport det = interp::check_det_condition(ds.x, ds.onehot);
    const interp::EquivalenceReport eq = interp::certify_equivalence(ds.x, ds.onehot, tol);

    if (dump_full) {
        std::ofstream out(dump_path);
        if (!out) throw interp::IoError("cannot open " + dump_path);
        out << "class,sample,value\n";
        for (std::size_t c = 0; c < det.values.rows(); ++c) {
            for (std::size_t i = 0; i < det.values.cols(); ++i) {
                out << c << ',' << i << ',' << format_double(det.values(c, i)) << '\n';
            }
        }
        std::cout << "wrote " << dump_path << '\n';
    }

    json summary;
    summary["det_con"] = det.verdict;
    summary["det_con_min"] = det.min_value;
    summary["argmin_class"] = det.argmin_class;
    summary["argmin_sample"] = det.argmin_sample;
    summary["marginal_count"] = det.marginal_count;
    summary["svm_equals_mni"] = eq.svm_equals_mni;
    summary["weight_gap"] = eq.max_weight_gap;
    summary["decision_agreement"] = eq.decision_agreement;
    summary["svm_iterations"] = eq.svm_info.iterations;
    summary["svm_kkt_residual"] = eq.svm_info.kkt_residual;
    std::cout << summary.dump(2) << '\n';
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"multiclass interpolation lab"};
    app.require_subcommand(1);

    GenArgs gen_args;
    CLI::App* gen = app.add_subcommand("gen", "generate a dataset CSV");
    gen->add_option("--model", gen_args.model, "gmm|mlm|nc");
    gen->add_option("--k", gen_args.k, "class count");
    gen->add_option("--p", gen_args.p, "feature dimension");
    gen->add_option("--n", gen_args.n, "sample count");
    gen->add_option("--mu", gen_args.mu, "mean scale: ||mu|| = mu*sqrt(p) (alpha for nc)");
    gen->add_flag("--mu-absolute", gen_args.mu_absolute, "treat --mu as the absolute norm");
    gen->add_flag("--balanced", gen_args.balanced, "exactly balanced class counts (gmm)");
    gen->add_option("--seed", gen_args.seed, "base seed");
    gen->add_option("--out", gen_args.out, "output CSV path");
    gen->add_option("--bilevel", gen_args.bilevel, "bi-level MLM params n,m,q,r")->expected(4);

    std::string fit_data, fit_kind = "svm", fit_out = "classifier";
    double fit_tol = 1e-8;
    CLI::App* fit = app.add_subcommand("fit", "fit one classifier on a dataset CSV");
    fit->add_option("--data", fit_data, "dataset CSV from `gen`")->required();
    fit->add_option("--kind", fit_kind, "mni|svm|simplex-ova|ova|ovo");
    fit->add_option("--tol", fit_tol, "solver KKT tolerance");
    fit->add_option("--out", fit_out, "output prefix for weights CSV + JSON sidecar");

    std::string check_data, check_dump = "detcon.csv";
    double check_tol = 1e-5;
    bool dump_full = false;
    CLI::App* check = app.add_subcommand("check", "det-con + SVM=MNI equivalence on a dataset");
    check->add_option("--data", check_data, "dataset CSV from `gen`")->required();
    check->add_option("--tol", check_tol, "equivalence tolerance");
    check->add_flag("--dump-full", dump_full, "write one CSV row per (class, sample)");
    check->add_option("--dump-path", check_dump, "path for --dump-full output");

    std::string sweep_config, sweep_preset, sweep_out;
    bool paper_scale = false;
    bool emit_config = false;
    std::size_t sweep_threads = 0;
    CLI::App* sweep = app.add_subcommand("sweep", "run a Monte Carlo sweep");
    sweep->add_option("--config", sweep_config, "JSON config file");
    sweep->add_option("--preset", sweep_preset,
                      "gmm-fraction|mlm-fraction|gmm-benign|gmm-fraction-vs-p");
    sweep->add_flag("--paper-scale", paper_scale, "100 trials per point instead of 20");
    sweep->add_flag("--emit-config", emit_config, "print the resolved config and exit");
    sweep->add_option("--out", sweep_out, "override the output CSV path");
    sweep->add_option("--threads", sweep_threads, "worker threads (caps INTERP_LAB_THREADS)");

    std::uint64_t barplot_seed = 1;
    std::string barplot_out = "barplot.csv";
    CLI::App* barplot = app.add_subcommand("barplot", "simplex inner-product reproduction");
    barplot->add_option("--seed", barplot_seed, "seed");
    barplot->add_option("--out", barplot_out, "output CSV path");

    std::string plot_csv_path, plot_x, plot_y, plot_group, plot_out = "plot.svg";
    CLI::App* plot = app.add_subcommand("plot", "render a CSV as an SVG line plot");
    plot->add_option("--csv", plot_csv_path, "input CSV")->required();
    plot->add_option("--x", plot_x, "x column")->required();
    plot->add_option("--y", plot_y, "y column")->required();
    plot->add_option("--group", plot_group, "group column (optional)");
    plot->add_option("--out", plot_out, "output SVG path");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& err) {
        const int code = app.exit(err);
        return code == 0 ? kExitOk : kExitConfig;
    }

    try {
        if (gen->parsed()) return run_gen(gen_args);
        if (fit->parsed()) return run_fit(fit_data, fit_kind, fit_tol, fit_out);
        if (check->parsed()) return run_check(check_data, check_tol, dump_full, check_dump);
        if (sweep->parsed()) {
            interp::SweepConfig cfg;
            if (!sweep_preset.empty()) {
                cfg = interp::preset_config(sweep_preset, paper_scale);
            } else if (!sweep_config.empty()) {
                cfg = interp::SweepConfig::from_json_file(sweep_config);
                if (paper_scale) cfg.trials = 100;
            } else {
                throw interp::ConfigError("sweep needs --config or --preset");
            }
            if (!sweep_out.empty()) cfg.output = sweep_out;
            if (sweep_threads > 0) cfg.threads = sweep_threads;
            if (emit_config) {
                std::cout << cfg.to_json() << '\n';
                return kExitOk;
            }
            const interp::SweepResult res = interp::run_sweep(cfg);
            std::cout << "wrote " << res.csv_path.string() << " (" << res.rows_written
                      << " rows, " << res.rows_skipped << " resumed)\n";
            std::cout << "summary: " << res.summary_path.string() << '\n';
            return kExitOk;
        }
        if (barplot->parsed()) {
            const auto path = interp::repro_barplot(barplot_seed, barplot_out);
            std::cout << "wrote " << path.string() << '\n';
            return kExitOk;
        }
        if (plot->parsed()) {
            const auto path = interp::plot_csv(plot_csv_path,
                                               {plot_x, plot_y, plot_group}, plot_out);
            std::cout << "wrote " << path.string() << '\n';
            return kExitOk;
        }
    } catch (const interp::ConfigError& err) {
        std::cerr << "config error: " << err.what() << '\n';
        return kExitConfig;
    } catch (const interp::InvalidRegimeError& err) {
        std::cerr << "config error: " << err.what() << '\n';
        return kExitConfig;
    } catch (const interp::NotSeparableError& err) {
        std::cerr << "solver failure: " << err.what() << '\n';
        return kExitSolver;
    } catch (const interp::UnconvergedError& err) {
        std::cerr << "solver failure: " << err.what() << " (gap " << err.gap << ")\n";
        return kExitSolver;
    } catch (const std::exception& err) {
        std::cerr << "error: " << err.what() << '\n';
        return kExitConfig;
    }
    return kExitOk;
}
