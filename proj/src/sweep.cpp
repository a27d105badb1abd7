#include "omest/sweep.hpp"

#include "omest/errors.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

namespace omest {

void SweepConfig::validate() const {
    base.validate();
    if (drive_grid.empty()) throw ConfigError("drive_grid must be nonempty");
    if (std::adjacent_find(drive_grid.begin(), drive_grid.end(),
                           [](double a, double b) { return a >= b; }) != drive_grid.end())
        throw ConfigError("drive_grid must be strictly increasing");
    if (temperatures.empty()) throw ConfigError("temperatures must be nonempty");
    if (variants.empty()) throw ConfigError("variants must be nonempty");
    if (runs < 1) throw ConfigError("runs must be >= 1");
    if (formats.empty()) throw ConfigError("formats must be nonempty");
    for (const auto& f : formats)
        if (f != "csv" && f != "json" && f != "svg")
            throw ConfigError("unknown output format: " + f);
}

std::vector<double> log_spaced(double lo, double hi, int n) {
    if (n < 1 || lo <= 0 || hi <= lo) throw ConfigError("log_spaced: bad range");
    std::vector<double> out(n);
    if (n == 1) {
        out[0] = lo;
        return out;
    }
    const double llo = std::log10(lo), lhi = std::log10(hi);
    for (int i = 0; i < n; ++i)
        out[i] = std::pow(10.0, llo + (lhi - llo) * i / (n - 1));
    out.front() = lo;
    out.back() = hi;
    return out;
}

PhysicalParams reference_params() {
    PhysicalParams p;
    p.omega_m = 1.1e7;
    p.mass = 4.8e-14;
    p.Gamma_m = 32.0;
    p.Delta_0 = p.omega_m;
    p.kappa = 1e5;
    p.g1 = 2e2;
    p.g2 = 1.1e-5;  // 2 g1^2 / omega_0 for the reference cavity
    p.drive = 1e8;
    p.temperature = 0.0;
    p.variant = ModelVariant::quadratic;
    return p;
}

SweepRecord evaluate_point(const PhysicalParams& params, int runs) {
    SweepRecord r;
    r.variant = params.variant;
    r.temperature = params.temperature;
    r.drive = params.drive;
    try {
        const EstimationReport rep = estimate(params, runs);
        r.ok = true;
        r.gaussianity_warning = rep.gaussianity_warning;
        r.alpha2 = rep.op.photon_number;
        r.log10_alpha2 = std::log10(r.alpha2);
        r.x0 = rep.op.x0();
        r.Delta_eff = rep.op.Delta_eff;
        r.omega_eff = rep.op.omega_eff;
        r.g_eff = rep.op.g_eff;
        r.n_bar_m = rep.op.n_bar;
        r.I11 = rep.global.I(0, 0);
        r.I22 = rep.global.I(1, 1);
        r.I12 = rep.global.I(0, 1);
        r.avg_I11 = rep.global.averages_term(0, 0);
        r.avg_I22 = rep.global.averages_term(1, 1);
        r.var_I11 = rep.global.variances_term(0, 0);
        r.var_I22 = rep.global.variances_term(1, 1);
        r.light_I11 = rep.light.I(0, 0);
        r.light_I22 = rep.light.I(1, 1);
        r.mech_I11 = rep.mechanics.I(0, 0);
        r.mech_I22 = rep.mechanics.I(1, 1);
        for (int k = 0; k < 4; ++k) {
            r.J11[k] = rep.quadrature_J[k](0, 0);
            r.J22[k] = rep.quadrature_J[k](1, 1);
            r.rel_g1_J[k] = rep.bound_quadrature[k].relative[0];
            r.rel_g2_J[k] = rep.bound_quadrature[k].relative[1];
        }
        r.rel_g1_qfi = rep.bound_global.relative[0];
        r.rel_g2_qfi = rep.bound_global.relative[1];
        r.rel_g1_light = rep.bound_light.relative[0];
        r.rel_g2_light = rep.bound_light.relative[1];
        r.rel_g1_mech = rep.bound_mechanics.relative[0];
        r.rel_g2_mech = rep.bound_mechanics.relative[1];
    } catch (const MultistableError& e) {
        r.failure = std::string("multistable: ") + e.what();
    } catch (const UnstableError& e) {
        r.failure = std::string("unstable: ") + e.what();
    }
    return r;
}

std::vector<SweepRecord> run_sweep(const SweepConfig& config) {
    config.validate();
    std::vector<SweepRecord> records;
    records.reserve(config.variants.size() * config.temperatures.size() *
                    config.drive_grid.size());
    for (ModelVariant v : config.variants)
        for (double t : config.temperatures)
            for (double e : config.drive_grid) {
                PhysicalParams p = config.base;
                p.variant = v;
                p.temperature = t;
                p.drive = e;
                records.push_back(evaluate_point(p, config.runs));
            }
    return records;
}

SweepConfig figure_preset(const std::string& name) {
    SweepConfig cfg;
    cfg.base = reference_params();
    cfg.drive_grid = log_spaced(1e8, 3.8e9, 60);
    cfg.variants = {ModelVariant::quadratic};
    cfg.preset_name = name;

    const double t0 = 0.0, t_low = 1e-3, t_high = 8e-2;
    if (name == "fig1a") {
        cfg.temperatures = {t0, t_low, t_high};
        cfg.variants = {ModelVariant::linear, ModelVariant::quadratic};
    } else if (name == "fig1b") {
        cfg.temperatures = {t0, t_low, t_high};
    } else if (name == "fig2a" || name == "fig2b") {
        cfg.temperatures = {t0, t_high};
    } else if (name == "fig3a" || name == "fig3b") {
        cfg.temperatures = {t_high};
    } else if (name == "fig3c" || name == "fig3d") {
        cfg.temperatures = {t0};
    } else if (name == "fig4a" || name == "fig5a") {
        cfg.temperatures = {t0};
    } else if (name == "fig4b" || name == "fig5b") {
        cfg.temperatures = {t_high};
    } else {
        throw ConfigError("unknown figure preset: " + name);
    }
    return cfg;
}

namespace {

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::string item;
    std::stringstream ss(s);
    while (std::getline(ss, item, ',')) {
        const auto b = item.find_first_not_of(" \t");
        if (b == std::string::npos) continue;
        const auto e = item.find_last_not_of(" \t");
        out.push_back(item.substr(b, e - b + 1));
    }
    return out;
}

std::map<std::string, std::string> parse_key_values(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    std::map<std::string, std::string> kv;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const auto b = line.find_first_not_of(" \t\r");
        if (b == std::string::npos) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError(path + ":" + std::to_string(lineno) + ": expected key = value");
        auto trim = [](std::string s) {
            const auto x = s.find_first_not_of(" \t\r");
            if (x == std::string::npos) return std::string();
            const auto y = s.find_last_not_of(" \t\r");
            return s.substr(x, y - x + 1);
        };
        kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
    }
    return kv;
}

double to_double(const std::string& key, const std::string& val) {
    try {
        size_t pos = 0;
        const double d = std::stod(val, &pos);
        if (pos != val.size()) throw std::invalid_argument("trailing");
        return d;
    } catch (const std::exception&) {
        throw ConfigError("bad numeric value for " + key + ": " + val);
    }
}

void apply_tolerance_key(Tolerances& tol, const std::string& key, double v) {
    if (key == "tol_lyapunov_residual") tol.lyapunov_residual = v;
    else if (key == "tol_steady_consistency") tol.steady_consistency = v;
    else if (key == "tol_physicality") tol.physicality = v;
    else if (key == "tol_gradient_fd") tol.gradient_fd = v;
    else if (key == "tol_fi_dominance") tol.fi_dominance = v;
    else if (key == "tol_local_monotonicity") tol.local_monotonicity = v;
    else if (key == "tol_lyapunov_oracle") tol.lyapunov_oracle = v;
    else if (key == "tol_variant_agreement") tol.variant_agreement = v;
    else throw ConfigError("unknown tolerance key: " + key);
}

}  // namespace

SweepConfig parse_config_file(const std::string& path) {
    const auto kv = parse_key_values(path);
    SweepConfig cfg;
    cfg.base = reference_params();
    double drive_min = 1e8, drive_max = 3.8e9;
    int drive_points = 60;
    cfg.temperatures = {0.0};

    for (const auto& [key, val] : kv) {
        if (key == "omega_m") cfg.base.omega_m = to_double(key, val);
        else if (key == "mass") cfg.base.mass = to_double(key, val);
        else if (key == "Gamma_m") cfg.base.Gamma_m = to_double(key, val);
        else if (key == "Delta_0") cfg.base.Delta_0 = to_double(key, val);
        else if (key == "kappa") cfg.base.kappa = to_double(key, val);
        else if (key == "g1") cfg.base.g1 = to_double(key, val);
        else if (key == "g2") cfg.base.g2 = to_double(key, val);
        else if (key == "drive_min") drive_min = to_double(key, val);
        else if (key == "drive_max") drive_max = to_double(key, val);
        else if (key == "drive_points") drive_points = static_cast<int>(to_double(key, val));
        else if (key == "temperatures") {
            cfg.temperatures.clear();
            for (const auto& t : split_list(val)) cfg.temperatures.push_back(to_double(key, t));
        } else if (key == "variants") {
            cfg.variants.clear();
            for (const auto& v : split_list(val)) cfg.variants.push_back(variant_from_string(v));
        } else if (key == "runs") cfg.runs = static_cast<int>(to_double(key, val));
        else if (key == "out_dir") cfg.out_dir = val;
        else if (key == "formats") cfg.formats = split_list(val);
        else if (key.rfind("tol_", 0) == 0) apply_tolerance_key(cfg.tol, key, to_double(key, val));
        else throw ConfigError("unknown config key: " + key);
    }
    cfg.drive_grid = log_spaced(drive_min, drive_max, drive_points);
    if (cfg.variants.empty()) cfg.variants = {ModelVariant::quadratic};
    cfg.validate();
    return cfg;
}

Tolerances parse_tolerance_overrides(const std::string& path) {
    Tolerances tol;
    for (const auto& [key, val] : parse_key_values(path))
        apply_tolerance_key(tol, key, to_double(key, val));
    return tol;
}

}  // namespace omest
