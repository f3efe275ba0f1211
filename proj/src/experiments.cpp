#include "interp/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <condition_variable>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include "json.hpp"

#include "interp/equivalence.hpp"
#include "interp/errors.hpp"
#include "interp/rng.hpp"
#include "interp/solvers.hpp"

namespace interp {

namespace {

using nlohmann::json;

std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace

SweepConfig SweepConfig::from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& err) {
        throw ConfigError(std::string("config is not valid JSON: ") + err.what());
    }
    SweepConfig cfg;
    try {
        cfg.experiment = j.value("experiment", cfg.experiment);
        cfg.model = j.value("model", cfg.model);
        cfg.n_values = j.value("n", cfg.n_values);
        cfg.p_values = j.value("p", cfg.p_values);
        cfg.k_values = j.value("k", cfg.k_values);
        cfg.mu_values = j.value("mu", cfg.mu_values);
        cfg.mu_absolute = j.value("mu_absolute", cfg.mu_absolute);
        cfg.trials = j.value("trials", cfg.trials);
        cfg.base_seed = j.value("base_seed", cfg.base_seed);
        cfg.n_test = j.value("n_test", cfg.n_test);
        cfg.interp_tol = j.value("interp_tol", cfg.interp_tol);
        cfg.solver_tol = j.value("solver_tol", cfg.solver_tol);
        cfg.output = j.value("output", cfg.output);
        cfg.threads = j.value("threads", cfg.threads);
        if (j.contains("constants")) {
            const json& c = j["constants"];
            cfg.constants.c1 = c.value("c1", cfg.constants.c1);
            cfg.constants.c2 = c.value("c2", cfg.constants.c2);
            cfg.constants.c3 = c.value("c3", cfg.constants.c3);
            cfg.constants.c4 = c.value("c4", cfg.constants.c4);
        }
    } catch (const json::exception& err) {
        throw ConfigError(std::string("bad config value: ") + err.what());
    }
    cfg.validate();
    return cfg;
}

SweepConfig SweepConfig::from_json_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path.string());
    std::stringstream buffer;
    buffer << in.rdbuf();
    return from_json(buffer.str());
}

std::string SweepConfig::to_json() const {
    json j;
    j["experiment"] = experiment;
    j["model"] = model;
    j["n"] = n_values;
    j["p"] = p_values;
    j["k"] = k_values;
    j["mu"] = mu_values;
    j["mu_absolute"] = mu_absolute;
    j["trials"] = trials;
    j["base_seed"] = base_seed;
    j["n_test"] = n_test;
    j["interp_tol"] = interp_tol;
    j["solver_tol"] = solver_tol;
    j["constants"] = {{"c1", constants.c1}, {"c2", constants.c2},
                      {"c3", constants.c3}, {"c4", constants.c4}};
    j["output"] = output;
    j["threads"] = threads;
    return j.dump(2);
}

void SweepConfig::validate() const {
    if (model != "gmm" && model != "mlm" && model != "nc") {
        throw ConfigError("model must be one of gmm|mlm|nc, got " + model);
    }
    if (experiment != "fraction" && experiment != "benign") {
        throw ConfigError("experiment must be fraction|benign, got " + experiment);
    }
    if (n_values.empty() || p_values.empty() || k_values.empty() || mu_values.empty()) {
        throw ConfigError("grid must be non-empty in n, p, k, mu");
    }
    if (trials < 1) throw ConfigError("trials must be at least 1");
    for (std::size_t k : k_values) {
        if (k < 2) throw ConfigError("k must be at least 2");
        if (k > kMaxClassColumns) {
            throw ConfigError("k exceeds the sweep schema limit of " +
                              std::to_string(kMaxClassColumns));
        }
        for (std::size_t p : p_values) {
            if (p < k) throw ConfigError("grid contains p < k");
        }
        if (model == "nc") {
            for (std::size_t n : n_values) {
                if (n % k != 0) throw ConfigError("nc model needs k | n at every grid point");
            }
        }
    }
    if (output.empty()) throw ConfigError("output path must be set");
}

SweepConfig preset_config(const std::string& name, bool paper_scale) {
    SweepConfig cfg;
    cfg.trials = paper_scale ? 100 : 20;
    if (name == "gmm-fraction") {
        cfg.model = "gmm";
        cfg.experiment = "fraction";
        cfg.k_values = {4, 7};
        cfg.mu_values = {0.2, 0.3, 0.4};
        cfg.p_values = {1000};
        cfg.n_values = {10, 20, 30, 40, 50, 70, 100};
        cfg.output = "gmm_fraction.csv";
    } else if (name == "mlm-fraction") {
        cfg.model = "mlm";
        cfg.experiment = "fraction";
        cfg.k_values = {3, 4, 5, 6};
        cfg.mu_values = {1.0};  // ||mu||^2 = p
        cfg.p_values = {1000};
        cfg.n_values = {10, 20, 30, 40, 60, 80, 100};
        cfg.output = "mlm_fraction.csv";
    } else if (name == "gmm-benign") {
        cfg.model = "gmm";
        cfg.experiment = "benign";
        cfg.k_values = {4};
        cfg.n_values = {40};
        cfg.p_values = {50, 100, 200, 400, 800, 1200};
        cfg.mu_values = {0.2, 0.3, 0.4};
        cfg.n_test = 10000;
        cfg.output = "gmm_benign.csv";
    } else if (name == "gmm-fraction-vs-p") {
        cfg.model = "gmm";
        cfg.experiment = "fraction";
        cfg.k_values = {4};
        cfg.n_values = {50};
        cfg.p_values = {200, 400, 600, 800, 1000};
        cfg.mu_values = {0.2};
        cfg.output = "gmm_fraction_vs_p.csv";
    } else {
        throw ConfigError("unknown preset: " + name);
    }
    return cfg;
}

std::vector<GridPoint> sweep_grid(const SweepConfig& config) {
    std::vector<GridPoint> grid;
    std::size_t index = 0;
    for (std::size_t k : config.k_values) {
        for (std::size_t n : config.n_values) {
            for (std::size_t p : config.p_values) {
                for (double mu : config.mu_values) {
                    GridPoint pt;
                    pt.index = index++;
                    pt.k = k;
                    pt.n = n;
                    pt.p = p;
                    pt.mu = mu;
                    pt.mu_norm = config.mu_absolute || config.model == "nc"
                                     ? mu
                                     : mu * std::sqrt(static_cast<double>(p));
                    grid.push_back(pt);
                }
            }
        }
    }
    return grid;
}

TrialRecord run_trial(const SweepConfig& config, const GridPoint& point, std::size_t trial) {
    const auto started = std::chrono::steady_clock::now();
    TrialRecord rec;
    rec.point_index = point.index;
    rec.trial = trial;
    rec.k = point.k;
    rec.n = point.n;
    rec.p = point.p;
    rec.mu_norm = point.mu_norm;
    rec.seed = derive_stream(config.base_seed, point.index, trial);

    const double kk = static_cast<double>(point.k);
    const double nn = static_cast<double>(point.n);
    const double pp = static_cast<double>(point.p);
    rec.rescale_gmm = std::pow(kk, 1.5) * std::pow(nn, 1.5) * point.mu_norm / pp;
    rec.rescale_mlm = kk * kk * nn * std::log(kk * nn) / pp;

    Dataset ds;
    const GenerativeModel* model_ptr = nullptr;
    GenerativeModel model;
    if (config.model == "gmm") {
        GmmSpec spec = GmmSpec::orthogonal(point.k, point.p, point.mu_norm);
        ds = sample_gmm(spec, point.n, rec.seed);
        model = spec;
        model_ptr = &model;
        rec.bound_rate = gmm_bound_rate(point.n, point.p, point.k, point.mu_norm,
                                        config.constants);
    } else if (config.model == "mlm") {
        MlmSpec spec = MlmSpec::isotropic(point.k, point.p, point.mu_norm);
        ds = sample_mlm(spec, point.n, rec.seed);
        model = spec;
        model_ptr = &model;
    } else {
        ds = neural_collapse_features(point.k, point.n / point.k, point.p, point.mu_norm);
    }

    const DetConReport det = check_det_condition(ds.x, ds.onehot);
    rec.det_con = det.verdict;
    rec.marginal = det.marginal_count;
    rec.det_con_min = det.min_value;

    const LinearClassifier mni = fit_mni(ds.x, ds.onehot);
    const LinearClassifier mni_z = fit_mni_targets(ds.x, simplex_targets(ds.onehot));

    SvmOptions opts;
    opts.tol = config.solver_tol;
    try {
        auto [svm, duals] = fit_multiclass_svm(ds.x, ds.onehot, opts);
        (void)duals;
        rec.duality_gap = svm.info.duality_gap;
        rec.kkt_residual = svm.info.kkt_residual;
        rec.iterations = svm.info.iterations;
        if (const auto* mlm = std::get_if<MlmSpec>(&model); mlm != nullptr && model_ptr != nullptr) {
            rec.pairwise_bound = mlm_pairwise_bound(svm, *mlm);
        }

        rec.interp_fraction =
            interpolation_fraction(svm.weights, ds.x, ds.onehot, config.interp_tol).fraction;
        rec.weight_gap = 0.0;
        for (std::size_t i = 0; i < svm.weights.data().size(); ++i) {
            const double d = svm.weights.data()[i] - mni_z.weights.data()[i];
            rec.weight_gap += d * d;
        }
        rec.weight_gap = std::sqrt(rec.weight_gap);
        rec.svm_equals_mni =
            rec.weight_gap <= config.interp_tol * (1.0 + frobenius_norm(svm.weights));

        if (model_ptr != nullptr) {
            const std::uint64_t test_seed = derive_stream(rec.seed, 0x7e57u);
            const ErrorEstimate err_svm = mc_error(svm, *model_ptr, config.n_test, test_seed);
            const ErrorEstimate err_mni = mc_error(mni, *model_ptr, config.n_test, test_seed);
            rec.err_svm = err_svm.total;
            rec.err_mni = err_mni.total;
            rec.se_err = err_svm.se_total;
            for (std::size_t c = 0; c < point.k && c < kMaxClassColumns; ++c) {
                rec.err_class[c] = err_svm.per_class[c];
            }
            rec.has_errors = true;
            rec.decision_agreement = true;
            // Shared test stream: agreement is equality of totals per point.
            const std::vector<int> pred_a = predict_batch(svm, ds.x);
            const std::vector<int> pred_b = predict_batch(mni, ds.x);
            for (std::size_t i = 0; i < ds.x.cols(); ++i) {
                if (pred_a[i] != pred_b[i]) rec.decision_agreement = false;
            }
        } else {
            const std::vector<int> pred_a = predict_batch(svm, ds.x);
            const std::vector<int> pred_b = predict_batch(mni, ds.x);
            rec.decision_agreement = std::equal(pred_a.begin(), pred_a.end(), pred_b.begin());
        }
    } catch (const NotSeparableError& err) {
        rec.solver_error = err.what();
    } catch (const UnconvergedError& err) {
        rec.solver_error = err.what();
    }

    rec.wall_ms = std::chrono::duration<double, std::milli>(
                      std::chrono::steady_clock::now() - started)
                      .count();
    return rec;
}

namespace {

constexpr const char* kCsvHeader =
    "point,trial,k,n,p,mu_norm,seed,det_con,marginal,det_con_min,interp_fraction,"
    "svm_equals_mni,weight_gap,decision_agreement,err_svm,err_mni,"
    "err_class_1,err_class_2,err_class_3,err_class_4,err_class_5,err_class_6,"
    "err_class_7,err_class_8,se_err,bound_rate,pairwise_bound,duality_gap,kkt_residual,"
    "iterations,rescale_gmm,rescale_mlm,solver_error";

std::string record_to_csv(const TrialRecord& r, const SweepConfig& config) {
    std::ostringstream out;
    out << r.point_index << ',' << r.trial << ',' << r.k << ',' << r.n << ',' << r.p << ','
        << format_double(r.mu_norm) << ',' << r.seed << ',' << (r.det_con ? 1 : 0) << ','
        << r.marginal << ',' << format_double(r.det_con_min) << ',';
    const bool solver_ok = r.solver_error.empty();
    auto opt = [&](double v, bool present) {
        if (present) out << format_double(v);
        out << ',';
    };
    opt(r.interp_fraction, solver_ok);
    out << (solver_ok ? (r.svm_equals_mni ? "1" : "0") : "") << ',';
    opt(r.weight_gap, solver_ok);
    out << (solver_ok ? (r.decision_agreement ? "1" : "0") : "") << ',';
    opt(r.err_svm, r.has_errors);
    opt(r.err_mni, r.has_errors);
    for (std::size_t c = 0; c < kMaxClassColumns; ++c) {
        opt(r.err_class[c], r.has_errors && c < r.k);
    }
    opt(r.se_err, r.has_errors);
    opt(r.bound_rate, config.model == "gmm");
    opt(r.pairwise_bound, config.model == "mlm" && solver_ok);
    opt(r.duality_gap, solver_ok);
    opt(r.kkt_residual, solver_ok);
    if (solver_ok) out << r.iterations;
    out << ',';
    out << format_double(r.rescale_gmm) << ',' << format_double(r.rescale_mlm) << ',';
    std::string sanitized = r.solver_error;
    std::replace(sanitized.begin(), sanitized.end(), ',', ';');
    out << sanitized;
    return out.str();
}

std::set<std::pair<std::size_t, std::size_t>> completed_pairs(
    const std::filesystem::path& path) {
    std::set<std::pair<std::size_t, std::size_t>> done;
    std::ifstream in(path);
    if (!in) return done;
    std::string line;
    std::getline(in, line);  // header
    while (std::getline(in, line)) {
        std::size_t point = 0, trial = 0;
        if (std::sscanf(line.c_str(), "%zu,%zu,", &point, &trial) == 2) {
            done.insert({point, trial});
        }
    }
    return done;
}

std::size_t resolve_threads(const SweepConfig& config) {
    if (config.threads > 0) return config.threads;
    if (const char* env = std::getenv("INTERP_LAB_THREADS")) {
        const long parsed = std::strtol(env, nullptr, 10);
        if (parsed > 0) return static_cast<std::size_t>(parsed);
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? hw : 1;
}

}  // namespace

SweepResult run_sweep(const SweepConfig& config) {
    config.validate();
    const std::vector<GridPoint> grid = sweep_grid(config);
    const std::filesystem::path csv_path = config.output;
    const auto done = completed_pairs(csv_path);

    struct Job {
        std::size_t grid_index;
        std::size_t trial;
    };
    std::vector<Job> jobs;
    SweepResult result;
    result.csv_path = csv_path;
    for (const GridPoint& pt : grid) {
        for (std::size_t t = 0; t < config.trials; ++t) {
            if (done.count({pt.index, t}) > 0) {
                ++result.rows_skipped;
            } else {
                jobs.push_back({pt.index, t});
            }
        }
    }

    const bool fresh = done.empty();
    std::ofstream out;
    if (fresh) {
        out.open(csv_path, std::ios::trunc);
        if (!out) throw IoError("run_sweep: cannot open " + csv_path.string());
        out << kCsvHeader << '\n';
        out.flush();
    } else {
        out.open(csv_path, std::ios::app);
        if (!out) throw IoError("run_sweep: cannot open " + csv_path.string());
    }

    std::vector<TrialRecord> records(jobs.size());
    std::vector<char> ready(jobs.size(), 0);
    std::mutex mutex;
    std::condition_variable cv;
    std::size_t next_job = 0;

    const std::size_t n_threads = std::min(resolve_threads(config), std::max<std::size_t>(jobs.size(), 1));
    std::vector<std::thread> workers;
    workers.reserve(n_threads);
    for (std::size_t w = 0; w < n_threads; ++w) {
        workers.emplace_back([&]() {
            while (true) {
                std::size_t mine;
                {
                    std::lock_guard<std::mutex> lock(mutex);
                    if (next_job >= jobs.size()) return;
                    mine = next_job++;
                }
                TrialRecord rec = run_trial(config, grid[jobs[mine].grid_index], jobs[mine].trial);
                {
                    std::lock_guard<std::mutex> lock(mutex);
                    records[mine] = std::move(rec);
                    ready[mine] = 1;
                }
                cv.notify_all();
            }
        });
    }

    // Single writer: emit rows in job order as they complete (crash-safe append).
    double wall_total = 0.0;
    for (std::size_t idx = 0; idx < jobs.size(); ++idx) {
        std::unique_lock<std::mutex> lock(mutex);
        cv.wait(lock, [&]() { return ready[idx] != 0; });
        const TrialRecord& rec = records[idx];
        lock.unlock();
        out << record_to_csv(rec, config) << '\n';
        out.flush();
        wall_total += rec.wall_ms;
        ++result.rows_written;
    }
    for (std::thread& t : workers) t.join();
    out.close();

    // Per-point summary (means/stds over trials present in this run).
    json summary;
    summary["config"] = json::parse(config.to_json());
    summary["rows_written"] = result.rows_written;
    summary["rows_skipped"] = result.rows_skipped;
    summary["wall_ms_total"] = wall_total;
    json points = json::array();
    for (const GridPoint& pt : grid) {
        std::vector<double> fractions;
        std::vector<double> errors;
        for (std::size_t idx = 0; idx < jobs.size(); ++idx) {
            if (jobs[idx].grid_index != pt.index) continue;
            const TrialRecord& rec = records[idx];
            if (rec.solver_error.empty()) fractions.push_back(rec.interp_fraction);
            if (rec.has_errors) errors.push_back(rec.err_svm);
        }
        auto mean_std = [](const std::vector<double>& v) {
            if (v.empty()) return std::pair<double, double>{0.0, 0.0};
            double mean = 0.0;
            for (double x : v) mean += x;
            mean /= static_cast<double>(v.size());
            double var = 0.0;
            for (double x : v) var += (x - mean) * (x - mean);
            var /= static_cast<double>(v.size());
            return std::pair<double, double>{mean, std::sqrt(var)};
        };
        const auto [f_mean, f_std] = mean_std(fractions);
        const auto [e_mean, e_std] = mean_std(errors);
        json entry;
        entry["point"] = pt.index;
        entry["k"] = pt.k;
        entry["n"] = pt.n;
        entry["p"] = pt.p;
        entry["mu_norm"] = pt.mu_norm;
        entry["fraction_mean"] = f_mean;
        entry["fraction_std"] = f_std;
        entry["error_mean"] = e_mean;
        entry["error_std"] = e_std;
        entry["trials"] = fractions.size();
        points.push_back(entry);
    }
    summary["points"] = points;
    result.summary_path = csv_path;
    result.summary_path += ".summary.json";
    std::ofstream sum(result.summary_path);
    if (!sum) throw IoError("run_sweep: cannot open " + result.summary_path.string());
    sum << summary.dump(2) << '\n';
    return result;
}

std::filesystem::path repro_barplot(std::uint64_t seed, const std::filesystem::path& out_path) {
    const std::size_t k = 4;
    const std::size_t n = 50;
    const std::size_t p = 1000;
    const double mu_norm = 0.2 * std::sqrt(static_cast<double>(p));
    const GmmSpec spec = GmmSpec::orthogonal(k, p, mu_norm);
    const Dataset ds = sample_gmm(spec, n, seed);
    auto [svm, duals] = fit_multiclass_svm(ds.x, ds.onehot);
    (void)duals;

    // Two held-in samples per class, first occurrences in column order.
    std::vector<std::size_t> picks;
    for (std::size_t c = 0; c < k; ++c) {
        std::size_t found = 0;
        for (std::size_t i = 0; i < n && found < 2; ++i) {
            if (ds.labels[i] == static_cast<int>(c)) {
                picks.push_back(i);
                ++found;
            }
        }
        if (found < 2) {
            throw InvalidRegimeError("repro_barplot: seed produced a class with <2 samples");
        }
    }

    std::ofstream out(out_path);
    if (!out) throw IoError("repro_barplot: cannot open " + out_path.string());
    out << "sample,sample_class,score_class,value\n";
    for (const std::size_t i : picks) {
        const Vector scores = matvec(svm.weights, ds.x.col(i));
        for (std::size_t c = 0; c < k; ++c) {
            out << i << ',' << ds.labels[i] << ',' << c << ',' << format_double(scores[c])
                << '\n';
        }
    }
    if (!out) throw IoError("repro_barplot: short write to " + out_path.string());
    return out_path;
}

namespace {

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};

CsvTable read_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("plot_csv: cannot open " + path.string());
    CsvTable table;
    std::string line;
    auto split = [](const std::string& text) {
        std::vector<std::string> cells;
        std::string cell;
        std::stringstream ss(text);
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        if (!text.empty() && text.back() == ',') cells.emplace_back();
        return cells;
    };
    if (!std::getline(in, line)) throw IoError("plot_csv: empty file " + path.string());
    table.header = split(line);
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        table.rows.push_back(split(line));
    }
    return table;
}

std::size_t column_index(const CsvTable& table, const std::string& name) {
    for (std::size_t i = 0; i < table.header.size(); ++i) {
        if (table.header[i] == name) return i;
    }
    throw MissingColumnError("plot_csv: column not found: " + name);
}

struct Series {
    std::vector<double> x;
    std::vector<double> mean;
    std::vector<double> lo;
    std::vector<double> hi;
};

constexpr std::array<const char*, 6> kPalette = {"#1f77b4", "#d62728", "#2ca02c",
                                                 "#9467bd", "#ff7f0e", "#17becf"};

}  // namespace

std::filesystem::path plot_csv(const std::filesystem::path& csv, const PlotSpec& spec,
                               const std::filesystem::path& out_svg) {
    const CsvTable table = read_csv(csv);
    const std::size_t xi = column_index(table, spec.x);
    const std::size_t yi = column_index(table, spec.y);
    const bool grouped = !spec.group.empty();
    const std::size_t gi = grouped ? column_index(table, spec.group) : 0;

    // group label -> x value -> samples
    std::map<std::string, std::map<double, std::vector<double>>> buckets;
    for (const auto& row : table.rows) {
        if (xi >= row.size() || yi >= row.size()) continue;
        if (row[xi].empty() || row[yi].empty()) continue;
        const std::string label = grouped && gi < row.size() ? row[gi] : "";
        try {
            buckets[label][std::stod(row[xi])].push_back(std::stod(row[yi]));
        } catch (const std::exception&) {
            continue;  // non-numeric cell
        }
    }
    if (buckets.empty()) throw IoError("plot_csv: no numeric rows for the requested columns");

    std::vector<std::pair<std::string, Series>> series;
    double x_min = std::numeric_limits<double>::infinity();
    double x_max = -x_min;
    double y_min = std::numeric_limits<double>::infinity();
    double y_max = -y_min;
    for (const auto& [label, points] : buckets) {
        Series s;
        for (const auto& [x, values] : points) {
            double mean = 0.0;
            for (double v : values) mean += v;
            mean /= static_cast<double>(values.size());
            double var = 0.0;
            for (double v : values) var += (v - mean) * (v - mean);
            var /= static_cast<double>(values.size());
            const double sd = std::sqrt(var);
            s.x.push_back(x);
            s.mean.push_back(mean);
            s.lo.push_back(mean - sd);
            s.hi.push_back(mean + sd);
            x_min = std::min(x_min, x);
            x_max = std::max(x_max, x);
            y_min = std::min(y_min, mean - sd);
            y_max = std::max(y_max, mean + sd);
        }
        series.emplace_back(label, std::move(s));
    }
    if (x_min == x_max) {
        x_min -= 1.0;
        x_max += 1.0;
    }
    if (y_min == y_max) {
        y_min -= 1.0;
        y_max += 1.0;
    }
    const double y_pad = 0.05 * (y_max - y_min);
    y_min -= y_pad;
    y_max += y_pad;

    const double width = 720.0, height = 480.0;
    const double ml = 70.0, mr = 20.0, mt = 20.0, mb = 50.0;
    auto sx = [&](double x) { return ml + (x - x_min) / (x_max - x_min) * (width - ml - mr); };
    auto sy = [&](double y) {
        return height - mb - (y - y_min) / (y_max - y_min) * (height - mt - mb);
    };

    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
        << height << "\" viewBox=\"0 0 " << width << " " << height << "\">\n";
    svg << "<rect width=\"" << width << "\" height=\"" << height << "\" fill=\"white\"/>\n";
    svg << "<line x1=\"" << ml << "\" y1=\"" << height - mb << "\" x2=\"" << width - mr
        << "\" y2=\"" << height - mb << "\" stroke=\"black\"/>\n";
    svg << "<line x1=\"" << ml << "\" y1=\"" << mt << "\" x2=\"" << ml << "\" y2=\""
        << height - mb << "\" stroke=\"black\"/>\n";
    char label[64];
    for (int tick = 0; tick <= 4; ++tick) {
        const double fx = x_min + (x_max - x_min) * tick / 4.0;
        const double fy = y_min + (y_max - y_min) * tick / 4.0;
        std::snprintf(label, sizeof label, "%.4g", fx);
        svg << "<text x=\"" << sx(fx) << "\" y=\"" << height - mb + 18
            << "\" font-size=\"11\" text-anchor=\"middle\">" << label << "</text>\n";
        std::snprintf(label, sizeof label, "%.4g", fy);
        svg << "<text x=\"" << ml - 8 << "\" y=\"" << sy(fy) + 4
            << "\" font-size=\"11\" text-anchor=\"end\">" << label << "</text>\n";
    }
    svg << "<text x=\"" << (ml + width - mr) / 2 << "\" y=\"" << height - 12
        << "\" font-size=\"13\" text-anchor=\"middle\">" << spec.x << "</text>\n";
    svg << "<text x=\"16\" y=\"" << (mt + height - mb) / 2
        << "\" font-size=\"13\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
        << (mt + height - mb) / 2 << ")\">" << spec.y << "</text>\n";

    std::size_t color_idx = 0;
    double legend_y = mt + 14.0;
    for (const auto& [label_text, s] : series) {
        const char* color = kPalette[color_idx % kPalette.size()];
        ++color_idx;
        if (s.x.size() > 1) {
            svg << "<polygon fill=\"" << color << "\" fill-opacity=\"0.15\" stroke=\"none\" points=\"";
            for (std::size_t i = 0; i < s.x.size(); ++i) {
                svg << sx(s.x[i]) << ',' << sy(s.hi[i]) << ' ';
            }
            for (std::size_t i = s.x.size(); i-- > 0;) {
                svg << sx(s.x[i]) << ',' << sy(s.lo[i]) << ' ';
            }
            svg << "\"/>\n";
        }
        svg << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.8\" points=\"";
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            svg << sx(s.x[i]) << ',' << sy(s.mean[i]) << ' ';
        }
        svg << "\"/>\n";
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            svg << "<circle cx=\"" << sx(s.x[i]) << "\" cy=\"" << sy(s.mean[i])
                << "\" r=\"2.5\" fill=\"" << color << "\"/>\n";
        }
        if (!label_text.empty() || series.size() > 1) {
            svg << "<text x=\"" << width - mr - 8 << "\" y=\"" << legend_y
                << "\" font-size=\"12\" text-anchor=\"end\" fill=\"" << color << "\">"
                << (label_text.empty() ? "series" : label_text) << "</text>\n";
            legend_y += 16.0;
        }
    }
    svg << "</svg>\n";

    std::ofstream out(out_svg);
    if (!out) throw IoError("plot_csv: cannot open " + out_svg.string());
    out << svg.str();
    if (!out) throw IoError("plot_csv: short write to " + out_svg.string());
    return out_svg;
}

}  // namespace interp
