#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "interp/datagen.hpp"
#include "interp/metrics.hpp"

namespace interp {

struct SweepConfig {
    std::string experiment = "fraction";  // fraction | benign
    std::string model = "gmm";            // gmm | mlm | nc
    std::vector<std::size_t> n_values{50};
    std::vector<std::size_t> p_values{1000};
    std::vector<std::size_t> k_values{4};
    // ||mu|| = mu * sqrt(p) unless mu_absolute; for the nc model mu is alpha.
    std::vector<double> mu_values{0.2};
    bool mu_absolute = false;
    std::size_t trials = 20;
    std::uint64_t base_seed = 1;
    std::size_t n_test = 2000;
    double interp_tol = 1e-5;
    double solver_tol = 1e-8;
    GmmBoundConstants constants;
    std::string output = "sweep.csv";
    std::size_t threads = 0;  // 0 = INTERP_LAB_THREADS env or hardware default

    static SweepConfig from_json(const std::string& text);
    static SweepConfig from_json_file(const std::filesystem::path& path);
    std::string to_json() const;
    void validate() const;  // throws ConfigError
};

// Built-in sweep configurations for the standard experiment grids:
//   gmm-fraction   support fraction vs n, k in {4,7}, mu in {0.2,0.3,0.4}
//   mlm-fraction   support fraction vs n, k in {3..6}, isotropic, ||mu||^2 = p
//   gmm-benign     total error and fraction vs p, k = 4, n = 40
//   gmm-fraction-vs-p   fraction vs p at the 4-class bar-plot operating point
// `paper_scale` lifts trials from the desk default 20 to 100.
SweepConfig preset_config(const std::string& name, bool paper_scale = false);

struct GridPoint {
    std::size_t index = 0;
    std::size_t k = 0;
    std::size_t n = 0;
    std::size_t p = 0;
    double mu = 0.0;       // raw grid value
    double mu_norm = 0.0;  // resolved ||mu|| (or alpha for nc)
};

inline constexpr std::size_t kMaxClassColumns = 8;

struct TrialRecord {
    std::size_t point_index = 0;
    std::size_t trial = 0;
    std::size_t k = 0, n = 0, p = 0;
    double mu_norm = 0.0;
    std::uint64_t seed = 0;
    bool det_con = false;
    std::size_t marginal = 0;
    double det_con_min = 0.0;
    double interp_fraction = 0.0;
    bool svm_equals_mni = false;
    double weight_gap = 0.0;
    bool decision_agreement = false;
    double err_svm = 0.0;
    double err_mni = 0.0;
    std::array<double, kMaxClassColumns> err_class{};  // SVM per-class error
    double se_err = 0.0;
    double bound_rate = 0.0;
    double pairwise_bound = 0.0;  // MLM rows only
    double duality_gap = 0.0;
    double kkt_residual = 0.0;
    std::size_t iterations = 0;
    double rescale_gmm = 0.0;  // k^1.5 n^1.5 ||mu|| / p
    double rescale_mlm = 0.0;  // k^2 n log(kn) / p
    bool has_errors = false;   // error columns populated
    std::string solver_error;  // empty when the fit succeeded
    double wall_ms = 0.0;      // reported in the summary JSON, not the CSV
};

std::vector<GridPoint> sweep_grid(const SweepConfig& config);
TrialRecord run_trial(const SweepConfig& config, const GridPoint& point, std::size_t trial);

struct SweepResult {
    std::filesystem::path csv_path;
    std::filesystem::path summary_path;
    std::size_t rows_written = 0;
    std::size_t rows_skipped = 0;  // already present from a previous partial run
};

// Runs the grid in a worker pool (trials are independent derived streams),
// appends rows ordered by (point, trial), and skips pairs already present in
// the output CSV. The CSV is a pure function of the config.
SweepResult run_sweep(const SweepConfig& config);

// Inner products w_c^T x_i of the multiclass SVM at the 4-class operating
// point (n = 50, p = 1000, ||mu|| = 0.2 sqrt(p)) for two held-in samples per
// class; 32 rows of (sample, sample_class, score_class, value).
std::filesystem::path repro_barplot(std::uint64_t seed, const std::filesystem::path& out);

struct PlotSpec {
    std::string x;
    std::string y;
    std::string group;  // empty -> single series
};

// Line plot with per-group mean +/- std bands; pure function of the CSV.
std::filesystem::path plot_csv(const std::filesystem::path& csv, const PlotSpec& spec,
                               const std::filesystem::path& out_svg);

}  // namespace interp
