#pragma once

#include "omest/estimation.hpp"
#include "omest/model.hpp"

#include <array>
#include <string>
#include <vector>

namespace omest {

/// Thresholds used by the validation suites; overridable from a config file.
struct Tolerances {
    double lyapunov_residual = 1e-10;
    double steady_consistency = 1e-9;
    double physicality = 1e-9;
    double gradient_fd = 1e-5;
    double fi_dominance = 1e-9;
    double local_monotonicity = 1e-9;
    double lyapunov_oracle = 1e-10;
    double variant_agreement = 1e-12;
};

struct SweepConfig {
    PhysicalParams base;
    std::vector<double> drive_grid;        // strictly increasing, 1/s
    std::vector<double> temperatures;      // K
    std::vector<ModelVariant> variants;
    int runs = 1;
    std::string out_dir = "out";
    std::vector<std::string> formats = {"csv", "json"};
    Tolerances tol;
    std::string preset_name;  // set by figure_preset, empty otherwise

    void validate() const;  // throws ConfigError
};

/// One fully evaluated grid point. Failed points keep their coordinates and
/// carry a failure string instead of being dropped.
struct SweepRecord {
    ModelVariant variant = ModelVariant::quadratic;
    double temperature = 0.0;
    double drive = 0.0;
    bool ok = false;
    std::string failure;
    bool gaussianity_warning = false;

    double alpha2 = 0.0, log10_alpha2 = 0.0;
    double x0 = 0.0, Delta_eff = 0.0, omega_eff = 0.0, g_eff = 0.0, n_bar_m = 0.0;
    double I11 = 0.0, I22 = 0.0, I12 = 0.0;
    double avg_I11 = 0.0, avg_I22 = 0.0, var_I11 = 0.0, var_I22 = 0.0;
    double light_I11 = 0.0, light_I22 = 0.0, mech_I11 = 0.0, mech_I22 = 0.0;
    std::array<double, 4> J11{}, J22{};  // per quadrature (Q, P, Xb, Pb)
    double rel_g1_qfi = 0.0, rel_g2_qfi = 0.0;
    double rel_g1_light = 0.0, rel_g2_light = 0.0;
    double rel_g1_mech = 0.0, rel_g2_mech = 0.0;
    std::array<double, 4> rel_g1_J{}, rel_g2_J{};
};

SweepRecord evaluate_point(const PhysicalParams& params, int runs);

std::vector<SweepRecord> run_sweep(const SweepConfig& config);

/// Exact configuration reproducing the data behind one published figure
/// panel. Known names: fig1a fig1b fig2a fig2b fig3a fig3b fig3c fig3d
/// fig4a fig4b fig5a fig5b.
SweepConfig figure_preset(const std::string& name);

/// Reference parameter set used by the figure presets.
PhysicalParams reference_params();

std::vector<double> log_spaced(double lo, double hi, int n);

SweepConfig parse_config_file(const std::string& path);
Tolerances parse_tolerance_overrides(const std::string& path);

/// Writes records.csv / meta.json / <preset>.svg into config.out_dir.
void emit(const std::vector<SweepRecord>& records, const SweepConfig& config);

std::string records_to_csv(const std::vector<SweepRecord>& records);
std::string config_to_json(const SweepConfig& config);

}  // namespace omest
