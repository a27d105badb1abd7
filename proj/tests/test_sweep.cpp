#include "omest/errors.hpp"
#include "omest/sweep.hpp"
#include "omest/validation.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace omest;
namespace fs = std::filesystem;

namespace {

std::string write_temp(const std::string& text) {
    static int counter = 0;
    const auto path =
        (fs::temp_directory_path() / ("omest_cfg_" + std::to_string(counter++) + ".cfg")).string();
    std::ofstream out(path);
    out << text;
    return path;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

TEST_CASE("log_spaced endpoints and monotonicity") {
    auto g = log_spaced(1e8, 3.8e9, 60);
    REQUIRE(g.size() == 60);
    CHECK(g.front() == doctest::Approx(1e8).epsilon(1e-12));
    CHECK(g.back() == doctest::Approx(3.8e9).epsilon(1e-12));
    for (size_t i = 0; i + 1 < g.size(); ++i) CHECK(g[i] < g[i + 1]);
    // log spacing: constant ratio
    CHECK(g[1] / g[0] == doctest::Approx(g[2] / g[1]).epsilon(1e-12));
}

TEST_CASE("reference parameters") {
    auto p = reference_params();
    CHECK(p.omega_m == 1.1e7);
    CHECK(p.kappa == 1e5);
    CHECK(p.g1 == 200.0);
    CHECK(p.g2 == 1.1e-5);
    CHECK(p.Delta_0 == p.omega_m);
    CHECK(p.Gamma_m == 32.0);
    CHECK(p.mass == 4.8e-14);
    CHECK_NOTHROW(p.validate());
}

TEST_CASE("config validation rejects malformed inputs") {
    SweepConfig cfg = figure_preset("fig1a");
    CHECK_NOTHROW(cfg.validate());

    SweepConfig bad_grid = cfg;
    bad_grid.drive_grid = {1e8, 1e8, 2e8};  // not strictly increasing
    CHECK_THROWS_AS(bad_grid.validate(), ConfigError);

    SweepConfig no_temp = cfg;
    no_temp.temperatures.clear();
    CHECK_THROWS_AS(no_temp.validate(), ConfigError);

    SweepConfig no_fmt = cfg;
    no_fmt.formats.clear();
    CHECK_THROWS_AS(no_fmt.validate(), ConfigError);

    SweepConfig bad_fmt = cfg;
    bad_fmt.formats = {"csv", "xlsx"};
    CHECK_THROWS_AS(bad_fmt.validate(), ConfigError);
}

TEST_CASE("config file parsing") {
    const auto path = write_temp(
        "# comment line\n"
        "drive_min = 1e8\n"
        "drive_max = 1e9   # inline comment\n"
        "drive_points = 5\n"
        "temperatures = 0, 0.08\n"
        "variants = linear, quadratic\n"
        "g1 = 150\n"
        "runs = 10\n"
        "out_dir = /tmp/omest_out_test\n"
        "formats = csv, json\n"
        "tol_gradient_fd = 2e-5\n");
    auto cfg = parse_config_file(path);
    CHECK(cfg.drive_grid.size() == 5);
    CHECK(cfg.drive_grid.front() == doctest::Approx(1e8));
    CHECK(cfg.drive_grid.back() == doctest::Approx(1e9));
    CHECK(cfg.temperatures == std::vector<double>{0.0, 0.08});
    REQUIRE(cfg.variants.size() == 2);
    CHECK(cfg.variants[0] == ModelVariant::linear);
    CHECK(cfg.runs == 10);
    CHECK(cfg.base.g1 == 150.0);
    CHECK(cfg.base.omega_m == 1.1e7);  // unset keys fall back to the reference set
    CHECK(cfg.tol.gradient_fd == 2e-5);
    CHECK(cfg.tol.lyapunov_residual == 1e-10);
    std::remove(path.c_str());

    const auto bad = write_temp("omega_m 1e7\n");
    CHECK_THROWS_AS(parse_config_file(bad), ConfigError);
    std::remove(bad.c_str());

    const auto unknown = write_temp("frequency = 1e7\n");
    CHECK_THROWS_AS(parse_config_file(unknown), ConfigError);
    std::remove(unknown.c_str());

    CHECK_THROWS_AS(parse_config_file("/nonexistent/path.cfg"), ConfigError);
}

TEST_CASE("figure presets") {
    auto fig1a = figure_preset("fig1a");
    CHECK(fig1a.preset_name == "fig1a");
    CHECK(fig1a.drive_grid.size() == 60);
    CHECK(fig1a.temperatures == std::vector<double>{0.0, 1e-3, 8e-2});
    CHECK(fig1a.variants.size() == 2);

    auto fig1b = figure_preset("fig1b");
    CHECK(fig1b.temperatures.size() == 3);
    CHECK(fig1b.variants == std::vector<ModelVariant>{ModelVariant::quadratic});

    auto fig4a = figure_preset("fig4a");
    CHECK(fig4a.temperatures == std::vector<double>{0.0});
    auto fig4b = figure_preset("fig4b");
    CHECK(fig4b.temperatures == std::vector<double>{8e-2});

    for (const char* n : {"fig2a", "fig2b", "fig3a", "fig3b", "fig3c", "fig3d", "fig5a", "fig5b"})
        CHECK_NOTHROW(figure_preset(n));
    CHECK_THROWS_AS(figure_preset("fig9z"), ConfigError);
}

TEST_CASE("evaluate_point fills the record") {
    PhysicalParams p = reference_params();
    p.drive = 1e9;
    p.temperature = 8e-2;
    auto rec = evaluate_point(p, 1);
    CHECK(rec.ok);
    CHECK(rec.failure.empty());
    CHECK(rec.drive == 1e9);
    CHECK(rec.temperature == 8e-2);
    CHECK(rec.alpha2 > 0.0);
    CHECK(rec.log10_alpha2 == doctest::Approx(std::log10(rec.alpha2)).epsilon(1e-12));
    CHECK(rec.I11 > 0.0);
    CHECK(rec.I11 == doctest::Approx(rec.avg_I11 + rec.var_I11).epsilon(1e-9));
    CHECK(rec.rel_g1_qfi > 0.0);
    CHECK(rec.rel_g2_qfi > rec.rel_g1_qfi);  // quadratic coupling is harder
    for (int q = 0; q < 4; ++q) CHECK(rec.J11[q] <= rec.I11 * (1.0 + 1e-9));
}

TEST_CASE("run_sweep covers the full grid without silent gaps") {
    SweepConfig cfg = figure_preset("fig1a");
    cfg.drive_grid = log_spaced(1e8, 3.8e9, 6);  // keep the test quick
    auto records = run_sweep(cfg);
    CHECK(records.size() == cfg.variants.size() * cfg.temperatures.size() * cfg.drive_grid.size());
    for (const auto& r : records) {
        CHECK(r.ok);
        CHECK(r.x0 <= 0.0);
    }
    // |alpha|^2 increases with drive within each (variant, T) slice
    for (size_t i = 0; i + 1 < records.size(); ++i)
        if (records[i].variant == records[i + 1].variant &&
            records[i].temperature == records[i + 1].temperature)
            CHECK(records[i].alpha2 < records[i + 1].alpha2);
}

TEST_CASE("csv output is deterministic and complete") {
    SweepConfig cfg = figure_preset("fig1b");
    cfg.drive_grid = log_spaced(1e8, 1e9, 4);
    auto records = run_sweep(cfg);
    const auto csv1 = records_to_csv(records);
    const auto csv2 = records_to_csv(run_sweep(cfg));
    CHECK(csv1 == csv2);  // byte identical across runs

    std::stringstream ss(csv1);
    std::string header;
    std::getline(ss, header);
    CHECK(header.rfind("variant,temperature,drive", 0) == 0);
    const auto cols = 1 + std::count(header.begin(), header.end(), ',');
    int lines = 0;
    std::string line;
    while (std::getline(ss, line)) {
        ++lines;
        CHECK(1 + std::count(line.begin(), line.end(), ',') == cols);
    }
    CHECK(lines == static_cast<int>(records.size()));
}

TEST_CASE("meta json carries the reproducibility payload") {
    SweepConfig cfg = figure_preset("fig1b");
    const auto json = config_to_json(cfg);
    CHECK(json.find("\"schema_version\"") != std::string::npos);
    CHECK(json.find("\"preset\"") != std::string::npos);
    CHECK(json.find("fig1b") != std::string::npos);
    CHECK(json.find("\"tolerances\"") != std::string::npos);
    CHECK(json.find("\"csv_columns\"") != std::string::npos);
    CHECK(json.find("\"hbar\"") != std::string::npos);
}

TEST_CASE("emit writes the expected files") {
    SweepConfig cfg = figure_preset("fig1a");
    cfg.drive_grid = log_spaced(1e8, 1e9, 4);
    cfg.formats = {"csv", "json", "svg"};
    const auto dir = fs::temp_directory_path() / "omest_emit_test";
    fs::remove_all(dir);
    cfg.out_dir = dir.string();
    auto records = run_sweep(cfg);
    emit(records, cfg);
    CHECK(fs::exists(dir / "records.csv"));
    CHECK(fs::exists(dir / "meta.json"));
    CHECK(fs::exists(dir / "fig1a.svg"));

    const auto svg = slurp(dir / "fig1a.svg");
    CHECK(svg.find("<svg") != std::string::npos);
    CHECK(svg.find("</svg>") != std::string::npos);
    // six curves: three temperatures x two variants
    int paths = 0;
    for (size_t pos = 0; (pos = svg.find("<path d=", pos)) != std::string::npos; ++pos) ++paths;
    CHECK(paths == 6);
    fs::remove_all(dir);
}

TEST_CASE("emit honours the format selection") {
    SweepConfig cfg = figure_preset("fig1b");
    cfg.drive_grid = log_spaced(1e8, 1e9, 3);
    cfg.formats = {"csv"};
    const auto dir = fs::temp_directory_path() / "omest_emit_csv_only";
    fs::remove_all(dir);
    cfg.out_dir = dir.string();
    emit(run_sweep(cfg), cfg);
    CHECK(fs::exists(dir / "records.csv"));
    CHECK_FALSE(fs::exists(dir / "meta.json"));
    CHECK_FALSE(fs::exists(dir / "fig1b.svg"));
    fs::remove_all(dir);
}

TEST_CASE("find_crossover interpolates sign changes") {
    std::vector<double> x{0.0, 1.0, 2.0, 3.0};
    std::vector<double> a{1.0, 0.5, 0.25, 0.1};
    std::vector<double> b{0.2, 0.3, 0.5, 0.9};
    auto c = find_crossover(x, a, b);
    REQUIRE(c.has_value());
    CHECK(*c > 1.0);
    CHECK(*c < 2.0);
    std::vector<double> never{0.0, 0.0, 0.0, 0.0};
    CHECK_FALSE(find_crossover(x, a, never).has_value());
}
