#include "omest/constants.hpp"
#include "omest/errors.hpp"
#include "omest/estimation.hpp"
#include "omest/sweep.hpp"
#include "omest/validation.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <cstdio>
#include <iostream>

namespace {

// Exit codes: 0 success, 1 validation failure, 2 configuration error,
// 3 model error (multistable / unstable operating point).
constexpr int kExitOk = 0;
constexpr int kExitValidationFailure = 1;
constexpr int kExitConfigError = 2;
constexpr int kExitModelError = 3;

nlohmann::ordered_json matrix_json(const Eigen::MatrixXd& m) {
    nlohmann::ordered_json rows = nlohmann::ordered_json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        nlohmann::ordered_json row = nlohmann::ordered_json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(row);
    }
    return rows;
}

nlohmann::ordered_json bounds_json(const omest::ErrorBounds& b) {
    nlohmann::ordered_json j;
    j["relative_error_g1"] = b.relative[0];
    j["relative_error_g2"] = b.relative[1];
    if (b.covariance_bound) j["covariance_bound"] = matrix_json(*b.covariance_bound);
    return j;
}

nlohmann::ordered_json qfim_json(const omest::QfimResult& q) {
    nlohmann::ordered_json j;
    j["I"] = matrix_json(q.I);
    j["averages_term"] = matrix_json(q.averages_term);
    j["variances_term"] = matrix_json(q.variances_term);
    j["I_dimensionless"] = matrix_json(q.I_dimensionless);
    return j;
}

int run_point(const omest::PhysicalParams& params, int runs, bool pick_smallest) {
    const omest::EstimationReport rep =
        omest::estimate(params, runs, {.select_smallest_x0 = pick_smallest});

    nlohmann::ordered_json j;
    j["schema_version"] = omest::constants::schema_version;
    auto& op = j["operating_point"];
    op["R0"] = {rep.op.R0(0), rep.op.R0(1), rep.op.R0(2), rep.op.R0(3)};
    op["Delta_eff"] = rep.op.Delta_eff;
    op["omega_eff"] = rep.op.omega_eff;
    op["g_eff"] = rep.op.g_eff;
    op["photon_number"] = rep.op.photon_number;
    op["n_bar_m"] = rep.op.n_bar;
    op["gaussianity_warning"] = rep.gaussianity_warning;
    j["covariance"] = matrix_json(rep.sigma_bar);
    j["qfim"]["global"] = qfim_json(rep.global);
    j["qfim"]["light"] = qfim_json(rep.light);
    j["qfim"]["mechanics"] = qfim_json(rep.mechanics);
    for (int k = 0; k < 4; ++k) {
        const char* name = omest::to_string(static_cast<omest::QuadratureIndex>(k));
        j["quadrature_fi"][name] = matrix_json(rep.quadrature_J[k]);
        j["bounds"]["measurement"][name] = bounds_json(rep.bound_quadrature[k]);
    }
    j["bounds"]["global"] = bounds_json(rep.bound_global);
    j["bounds"]["light"] = bounds_json(rep.bound_light);
    j["bounds"]["mechanics"] = bounds_json(rep.bound_mechanics);
    j["runs"] = runs;
    std::cout << j.dump(2) << "\n";
    return kExitOk;
}

int run_validate(const omest::Tolerances& tol) {
    const auto results = omest::run_validation(tol);
    bool all = true;
    for (const auto& r : results) {
        std::printf("%s %-32s checks=%d failures=%d worst=%.3e%s%s\n",
                    r.passed ? "PASS" : "FAIL", r.name.c_str(), r.checks, r.failures,
                    r.worst, r.detail.empty() ? "" : " :: ", r.detail.c_str());
        all = all && r.passed;
    }
    std::printf("%s validation (%zu suites)\n", all ? "PASS" : "FAIL", results.size());
    return all ? kExitOk : kExitValidationFailure;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Gaussian steady states and coupling-strength estimation bounds "
                 "for driven-dissipative optomechanics"};
    app.require_subcommand(1);

    std::string config_path;
    auto* sweep_cmd = app.add_subcommand("sweep", "evaluate a drive/temperature sweep");
    sweep_cmd->add_option("--config", config_path, "flat key = value config file")
        ->required();

    double e_val = 1e8, t_val = 0.0;
    std::string variant = "quadratic";
    int runs = 1;
    bool pick_smallest = false;
    auto* point_cmd = app.add_subcommand("point", "full estimation report at one point");
    point_cmd->add_option("--E", e_val, "drive amplitude, 1/s")->required();
    point_cmd->add_option("--T", t_val, "temperature, K")->required();
    point_cmd->add_option("--variant", variant, "linear|quadratic");
    point_cmd->add_option("--runs", runs, "experimental runs M");
    point_cmd->add_flag("--select-smallest-x0", pick_smallest,
                        "under multistability pick the smallest-|x0| stable root");

    std::string preset, out_dir;
    auto* figure_cmd = app.add_subcommand("figure", "reproduce one figure preset");
    figure_cmd->add_option("preset", preset, "fig1a..fig5b")->required();
    figure_cmd->add_option("--out", out_dir, "output directory");

    std::string tol_path;
    auto* validate_cmd = app.add_subcommand("validate", "run the invariant suites");
    validate_cmd->add_option("--tol-overrides", tol_path, "tolerance override file");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitConfigError;
    }

    try {
        if (sweep_cmd->parsed()) {
            const omest::SweepConfig cfg = omest::parse_config_file(config_path);
            omest::emit(omest::run_sweep(cfg), cfg);
            return kExitOk;
        }
        if (point_cmd->parsed()) {
            omest::PhysicalParams p = omest::reference_params();
            p.drive = e_val;
            p.temperature = t_val;
            p.variant = omest::variant_from_string(variant);
            return run_point(p, runs, pick_smallest);
        }
        if (figure_cmd->parsed()) {
            omest::SweepConfig cfg = omest::figure_preset(preset);
            cfg.formats = {"csv", "json", "svg"};
            if (!out_dir.empty()) cfg.out_dir = out_dir;
            else cfg.out_dir = preset;
            omest::emit(omest::run_sweep(cfg), cfg);
            return kExitOk;
        }
        omest::Tolerances tol;
        if (!tol_path.empty()) tol = omest::parse_tolerance_overrides(tol_path);
        return run_validate(tol);
    } catch (const omest::MultistableError& e) {
        std::cerr << "model error: " << e.what() << "\n";
        return kExitModelError;
    } catch (const omest::UnstableError& e) {
        std::cerr << "model error: " << e.what() << "\n";
        return kExitModelError;
    } catch (const omest::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfigError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidationFailure;
    }
}
