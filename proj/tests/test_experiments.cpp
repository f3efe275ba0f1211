#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "interp/errors.hpp"
#include "interp/experiments.hpp"

using namespace interp;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& path) {
    std::ifstream in(path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::vector<std::string> lines_of(const std::string& text) {
    std::vector<std::string> lines;
    std::stringstream ss(text);
    std::string line;
    while (std::getline(ss, line)) lines.push_back(line);
    return lines;
}

SweepConfig tiny_config(const fs::path& out) {
    SweepConfig cfg;
    cfg.model = "gmm";
    cfg.experiment = "fraction";
    cfg.k_values = {3};
    cfg.n_values = {10};
    cfg.p_values = {60, 120};
    cfg.mu_values = {0.3};
    cfg.trials = 2;
    cfg.base_seed = 9;
    cfg.n_test = 200;
    cfg.output = out.string();
    cfg.threads = 2;
    return cfg;
}

}  // namespace

TEST_CASE("config json round trip and validation") {
    SweepConfig cfg = tiny_config("roundtrip.csv");
    const std::string text = cfg.to_json();
    const SweepConfig back = SweepConfig::from_json(text);
    CHECK(back.model == cfg.model);
    CHECK(back.p_values == cfg.p_values);
    CHECK(back.trials == cfg.trials);
    CHECK(back.base_seed == cfg.base_seed);

    CHECK_THROWS_AS(SweepConfig::from_json("{not json"), ConfigError);
    CHECK_THROWS_AS(SweepConfig::from_json("{\"model\":\"bogus\"}"), ConfigError);
    SweepConfig bad = cfg;
    bad.trials = 0;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    SweepConfig bad2 = cfg;
    bad2.k_values = {12};
    CHECK_THROWS_AS(bad2.validate(), ConfigError);
}

TEST_CASE("sweep grid enumerates the cartesian product in order") {
    const SweepConfig cfg = tiny_config("grid.csv");
    const auto grid = sweep_grid(cfg);
    REQUIRE(grid.size() == 2);
    CHECK(grid[0].p == 60);
    CHECK(grid[1].p == 120);
    CHECK(grid[0].index == 0);
    CHECK(grid[1].index == 1);
    CHECK(grid[0].mu_norm == doctest::Approx(0.3 * std::sqrt(60.0)));
}

TEST_CASE("run_sweep is reproducible byte for byte") {
    const fs::path dir = fs::temp_directory_path();
    const fs::path out1 = dir / "interp_sweep_a.csv";
    const fs::path out2 = dir / "interp_sweep_b.csv";
    fs::remove(out1);
    fs::remove(out2);

    SweepConfig cfg1 = tiny_config(out1);
    SweepConfig cfg2 = tiny_config(out2);
    const SweepResult r1 = run_sweep(cfg1);
    const SweepResult r2 = run_sweep(cfg2);
    CHECK(r1.rows_written == 4);  // 2 points x 2 trials
    CHECK(slurp(out1) == slurp(out2));

    // Header carries the stable superset schema.
    const auto all_lines = lines_of(slurp(out1));
    REQUIRE(all_lines.size() == 5);
    CHECK(all_lines[0].rfind("point,trial,k,n,p,mu_norm,seed,det_con", 0) == 0);

    fs::remove(out1);
    fs::remove(out2);
    fs::remove(r1.summary_path);
    fs::remove(r2.summary_path);
}

TEST_CASE("run_sweep resumes a partial csv without redoing finished trials") {
    const fs::path dir = fs::temp_directory_path();
    const fs::path full_path = dir / "interp_sweep_full.csv";
    const fs::path partial_path = dir / "interp_sweep_partial.csv";
    fs::remove(full_path);
    fs::remove(partial_path);

    SweepConfig cfg_full = tiny_config(full_path);
    run_sweep(cfg_full);
    const auto full_lines = lines_of(slurp(full_path));

    // Seed the partial file with the header and the first two rows.
    {
        std::ofstream out(partial_path);
        out << full_lines[0] << '\n' << full_lines[1] << '\n' << full_lines[2] << '\n';
    }
    SweepConfig cfg_partial = tiny_config(partial_path);
    const SweepResult res = run_sweep(cfg_partial);
    CHECK(res.rows_skipped == 2);
    CHECK(res.rows_written == 2);

    auto sorted = [](std::vector<std::string> v) {
        std::sort(v.begin(), v.end());
        return v;
    };
    CHECK(sorted(lines_of(slurp(partial_path))) == sorted(full_lines));

    fs::remove(full_path);
    fs::remove(partial_path);
    fs::remove(fs::path(full_path.string() + ".summary.json"));
    fs::remove(fs::path(partial_path.string() + ".summary.json"));
}

TEST_CASE("single point single trial writes exactly one data row") {
    const fs::path out = fs::temp_directory_path() / "interp_sweep_single.csv";
    fs::remove(out);
    SweepConfig cfg = tiny_config(out);
    cfg.p_values = {80};
    cfg.trials = 1;
    const SweepResult res = run_sweep(cfg);
    CHECK(res.rows_written == 1);
    const auto all_lines = lines_of(slurp(out));
    REQUIRE(all_lines.size() == 2);
    fs::remove(out);
    fs::remove(res.summary_path);
}

TEST_CASE("barplot emits 32 deterministic rows") {
    const fs::path dir = fs::temp_directory_path();
    const fs::path out1 = dir / "interp_barplot_1.csv";
    const fs::path out2 = dir / "interp_barplot_2.csv";
    repro_barplot(31, out1);
    repro_barplot(31, out2);
    const std::string a = slurp(out1);
    CHECK(a == slurp(out2));  // identical bytes for the same seed
    const auto all_lines = lines_of(a);
    REQUIRE(all_lines.size() == 33);  // header + 8 samples x 4 classes
    CHECK(all_lines[0] == "sample,sample_class,score_class,value");
    fs::remove(out1);
    fs::remove(out2);
}

TEST_CASE("plot_csv") {
    const fs::path dir = fs::temp_directory_path();
    const fs::path csv = dir / "interp_plot_input.csv";
    SUBCASE("two rows yield a two-point polyline") {
        {
            std::ofstream out(csv);
            out << "x,y\n1,2\n3,4\n";
        }
        const fs::path svg = dir / "interp_plot.svg";
        plot_csv(csv, {"x", "y", ""}, svg);
        const std::string body = slurp(svg);
        CHECK(body.find("<polyline") != std::string::npos);
        CHECK(body.find("<svg") != std::string::npos);
        fs::remove(svg);
    }
    SUBCASE("grouped series and bands") {
        {
            std::ofstream out(csv);
            out << "x,y,g\n1,2,a\n1,3,a\n2,4,a\n2,5,a\n1,0,b\n2,1,b\n";
        }
        const fs::path svg = dir / "interp_plot_group.svg";
        plot_csv(csv, {"x", "y", "g"}, svg);
        const std::string body = slurp(svg);
        CHECK(body.find("<polygon") != std::string::npos);  // std band
        CHECK(body.find(">a</text>") != std::string::npos);
        CHECK(body.find(">b</text>") != std::string::npos);
        fs::remove(svg);
    }
    SUBCASE("missing column raises") {
        {
            std::ofstream out(csv);
            out << "x,y\n1,2\n";
        }
        CHECK_THROWS_AS(plot_csv(csv, {"x", "nope", ""}, dir / "never.svg"),
                        MissingColumnError);
    }
    fs::remove(csv);
}

TEST_CASE("presets resolve and validate") {
    for (const char* name :
         {"gmm-fraction", "mlm-fraction", "gmm-benign", "gmm-fraction-vs-p"}) {
        const SweepConfig cfg = preset_config(name);
        CHECK(cfg.trials == 20);
        CHECK_NOTHROW(cfg.validate());
        const SweepConfig paper = preset_config(name, true);
        CHECK(paper.trials == 100);
    }
    CHECK_THROWS_AS(preset_config("nope"), ConfigError);
}
