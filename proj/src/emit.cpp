#include "omest/sweep.hpp"

#include "omest/constants.hpp"
#include "omest/errors.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>

namespace omest {

namespace {

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

const std::vector<std::string> kCsvColumns = {
    "variant", "temperature", "drive", "ok", "failure", "gaussianity_warning",
    "alpha2", "log10_alpha2", "x0", "Delta_eff", "omega_eff", "g_eff", "n_bar_m",
    "I11", "I22", "I12",
    "avg_I11", "avg_I22", "var_I11", "var_I22",
    "light_I11", "light_I22", "mech_I11", "mech_I22",
    "J_Q_11", "J_Q_22", "J_P_11", "J_P_22",
    "J_Xb_11", "J_Xb_22", "J_Pb_11", "J_Pb_22",
    "rel_g1_qfi", "rel_g2_qfi",
    "rel_g1_light", "rel_g2_light", "rel_g1_mech", "rel_g2_mech",
    "rel_g1_Q", "rel_g2_Q", "rel_g1_P", "rel_g2_P",
    "rel_g1_Xb", "rel_g2_Xb", "rel_g1_Pb", "rel_g2_Pb",
};

}  // namespace

std::string records_to_csv(const std::vector<SweepRecord>& records) {
    std::string out;
    for (size_t i = 0; i < kCsvColumns.size(); ++i) {
        if (i) out += ",";
        out += kCsvColumns[i];
    }
    out += "\n";
    for (const auto& r : records) {
        std::vector<std::string> cells = {
            to_string(r.variant), fmt(r.temperature), fmt(r.drive),
            r.ok ? "1" : "0", r.failure.empty() ? "" : "\"" + r.failure + "\"",
            r.gaussianity_warning ? "1" : "0",
            fmt(r.alpha2), fmt(r.log10_alpha2), fmt(r.x0), fmt(r.Delta_eff),
            fmt(r.omega_eff), fmt(r.g_eff), fmt(r.n_bar_m),
            fmt(r.I11), fmt(r.I22), fmt(r.I12),
            fmt(r.avg_I11), fmt(r.avg_I22), fmt(r.var_I11), fmt(r.var_I22),
            fmt(r.light_I11), fmt(r.light_I22), fmt(r.mech_I11), fmt(r.mech_I22),
            fmt(r.J11[0]), fmt(r.J22[0]), fmt(r.J11[1]), fmt(r.J22[1]),
            fmt(r.J11[2]), fmt(r.J22[2]), fmt(r.J11[3]), fmt(r.J22[3]),
            fmt(r.rel_g1_qfi), fmt(r.rel_g2_qfi),
            fmt(r.rel_g1_light), fmt(r.rel_g2_light),
            fmt(r.rel_g1_mech), fmt(r.rel_g2_mech),
            fmt(r.rel_g1_J[0]), fmt(r.rel_g2_J[0]), fmt(r.rel_g1_J[1]), fmt(r.rel_g2_J[1]),
            fmt(r.rel_g1_J[2]), fmt(r.rel_g2_J[2]), fmt(r.rel_g1_J[3]), fmt(r.rel_g2_J[3]),
        };
        for (size_t i = 0; i < cells.size(); ++i) {
            if (i) out += ",";
            out += cells[i];
        }
        out += "\n";
    }
    return out;
}

std::string config_to_json(const SweepConfig& config) {
    nlohmann::ordered_json j;
    j["schema_version"] = constants::schema_version;
    j["constants"]["hbar"] = constants::hbar;
    j["constants"]["k_boltzmann"] = constants::k_boltzmann;
    j["preset"] = config.preset_name;
    auto& p = j["params"];
    p["omega_m"] = config.base.omega_m;
    p["mass"] = config.base.mass;
    p["Gamma_m"] = config.base.Gamma_m;
    p["Delta_0"] = config.base.Delta_0;
    p["kappa"] = config.base.kappa;
    p["g1"] = config.base.g1;
    p["g2"] = config.base.g2;
    j["drive_grid"] = config.drive_grid;
    j["temperatures"] = config.temperatures;
    std::vector<std::string> vs;
    for (auto v : config.variants) vs.emplace_back(to_string(v));
    j["variants"] = vs;
    j["runs"] = config.runs;
    j["out_dir"] = config.out_dir;
    j["formats"] = config.formats;
    auto& t = j["tolerances"];
    t["lyapunov_residual"] = config.tol.lyapunov_residual;
    t["steady_consistency"] = config.tol.steady_consistency;
    t["physicality"] = config.tol.physicality;
    t["gradient_fd"] = config.tol.gradient_fd;
    t["fi_dominance"] = config.tol.fi_dominance;
    t["local_monotonicity"] = config.tol.local_monotonicity;
    t["lyapunov_oracle"] = config.tol.lyapunov_oracle;
    t["variant_agreement"] = config.tol.variant_agreement;
    j["csv_columns"] = kCsvColumns;
    return j.dump(2) + "\n";
}

namespace {

struct Curve {
    std::string label;
    std::string color;
    std::string dash;  // empty = solid
    std::vector<std::pair<double, double>> points;  // (alpha2, value)
};

using FieldFn = std::function<double(const SweepRecord&)>;

Curve make_curve(const std::vector<SweepRecord>& records, ModelVariant v, double temp,
                 const FieldFn& field, std::string label, std::string color,
                 std::string dash) {
    Curve c{std::move(label), std::move(color), std::move(dash), {}};
    for (const auto& r : records) {
        if (!r.ok || r.variant != v || r.temperature != temp) continue;
        const double y = field(r);
        if (std::isfinite(y) && y > 0.0) c.points.emplace_back(r.alpha2, y);
    }
    return c;
}

std::string temp_label(double t) {
    if (t == 0.0) return "T=0";
    char buf[32];
    std::snprintf(buf, sizeof(buf), "T=%g mK", t * 1e3);
    return buf;
}

const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"};

std::vector<Curve> preset_curves(const std::string& preset,
                                 const std::vector<SweepRecord>& records,
                                 const SweepConfig& cfg) {
    std::vector<Curve> curves;
    const double wm2 = cfg.base.omega_m * cfg.base.omega_m;
    auto add_by_temp = [&](const FieldFn& f, const std::string& what) {
        int i = 0;
        for (double t : cfg.temperatures)
            for (ModelVariant v : cfg.variants) {
                std::string label = what + " " + temp_label(t);
                if (cfg.variants.size() > 1) label += std::string(" (") + to_string(v) + ")";
                curves.push_back(make_curve(records, v, t, f, label,
                                            kColors[i % 6], i % 2 ? "6,3" : ""));
                ++i;
            }
    };
    auto rel1 = [](const SweepRecord& r) { return r.rel_g1_qfi; };
    auto rel2 = [](const SweepRecord& r) { return r.rel_g2_qfi; };

    if (preset == "fig1a") {
        add_by_temp(rel1, "dg1/g1");
    } else if (preset == "fig1b") {
        add_by_temp(rel2, "dg2/g2");
    } else if (preset == "fig2a" || preset == "fig2b") {
        const bool g1 = preset == "fig2a";
        int i = 0;
        for (double t : cfg.temperatures) {
            auto add = [&](const FieldFn& f, const std::string& what) {
                curves.push_back(make_curve(records, cfg.variants[0], t, f,
                                            what + " " + temp_label(t), kColors[i % 6],
                                            i % 2 ? "6,3" : ""));
                ++i;
            };
            add(g1 ? rel1 : rel2, "global");
            add([g1](const SweepRecord& r) { return g1 ? r.rel_g1_light : r.rel_g2_light; },
                "light");
            add([g1](const SweepRecord& r) { return g1 ? r.rel_g1_mech : r.rel_g2_mech; },
                "mechanics");
        }
    } else if (preset.rfind("fig3", 0) == 0) {
        const bool g1 = preset == "fig3a" || preset == "fig3c";
        const double t = cfg.temperatures[0];
        curves.push_back(make_curve(records, cfg.variants[0], t, g1 ? rel1 : rel2,
                                    "QFI bound", "#000000", ""));
        static const char* qn[4] = {"Q", "P", "Xb", "Pb"};
        for (int k = 0; k < 4; ++k)
            curves.push_back(make_curve(
                records, cfg.variants[0], t,
                [g1, k](const SweepRecord& r) { return g1 ? r.rel_g1_J[k] : r.rel_g2_J[k]; },
                std::string("measure ") + qn[k], kColors[k], k % 2 ? "6,3" : ""));
    } else if (preset.rfind("fig4", 0) == 0 || preset.rfind("fig5", 0) == 0) {
        const bool g1 = preset.rfind("fig4", 0) == 0;
        const double t = cfg.temperatures[0];
        auto scale = [wm2](double v) { return wm2 * v; };
        curves.push_back(make_curve(records, cfg.variants[0], t,
                                    [g1, scale](const SweepRecord& r) {
                                        return scale(g1 ? r.I11 : r.I22);
                                    },
                                    "QFI (dimensionless)", "#000000", ""));
        curves.push_back(make_curve(records, cfg.variants[0], t,
                                    [g1, scale](const SweepRecord& r) {
                                        return scale(g1 ? r.avg_I11 : r.avg_I22);
                                    },
                                    "averages", kColors[0], ""));
        curves.push_back(make_curve(records, cfg.variants[0], t,
                                    [g1, scale](const SweepRecord& r) {
                                        return scale(g1 ? r.var_I11 : r.var_I22);
                                    },
                                    "variances", kColors[3], "6,3"));
    } else {
        throw ConfigError("no SVG layout for preset: " + preset);
    }
    return curves;
}

std::string render_svg(const std::vector<Curve>& curves, const std::string& title) {
    const double width = 760, height = 500;
    const double ml = 70, mr = 190, mt = 40, mb = 55;
    const double pw = width - ml - mr, ph = height - mt - mb;

    double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
    for (const auto& c : curves)
        for (auto [x, y] : c.points) {
            xmin = std::min(xmin, std::log10(x));
            xmax = std::max(xmax, std::log10(x));
            ymin = std::min(ymin, std::log10(y));
            ymax = std::max(ymax, std::log10(y));
        }
    if (xmin > xmax) { xmin = 0; xmax = 1; ymin = 0; ymax = 1; }
    if (ymax - ymin < 1e-12) { ymin -= 0.5; ymax += 0.5; }

    auto px = [&](double lx) { return ml + (lx - xmin) / (xmax - xmin) * pw; };
    auto py = [&](double ly) { return mt + (ymax - ly) / (ymax - ymin) * ph; };

    std::string s;
    char buf[512];
    s += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"760\" height=\"500\" "
         "viewBox=\"0 0 760 500\">\n";
    s += "<rect width=\"760\" height=\"500\" fill=\"white\"/>\n";
    std::snprintf(buf, sizeof(buf),
                  "<text x=\"%.1f\" y=\"24\" font-size=\"15\" font-family=\"sans-serif\">%s</text>\n",
                  ml, title.c_str());
    s += buf;
    // axes
    std::snprintf(buf, sizeof(buf),
                  "<rect x=\"%.1f\" y=\"%.1f\" width=\"%.1f\" height=\"%.1f\" fill=\"none\" "
                  "stroke=\"black\"/>\n", ml, mt, pw, ph);
    s += buf;
    // decade ticks
    for (int d = static_cast<int>(std::ceil(xmin)); d <= static_cast<int>(std::floor(xmax)); ++d) {
        std::snprintf(buf, sizeof(buf),
                      "<line x1=\"%.1f\" y1=\"%.1f\" x2=\"%.1f\" y2=\"%.1f\" stroke=\"#ccc\"/>"
                      "<text x=\"%.1f\" y=\"%.1f\" font-size=\"11\" text-anchor=\"middle\" "
                      "font-family=\"sans-serif\">1e%d</text>\n",
                      px(d), mt, px(d), mt + ph, px(d), mt + ph + 16, d);
        s += buf;
    }
    for (int d = static_cast<int>(std::ceil(ymin)); d <= static_cast<int>(std::floor(ymax)); ++d) {
        std::snprintf(buf, sizeof(buf),
                      "<line x1=\"%.1f\" y1=\"%.1f\" x2=\"%.1f\" y2=\"%.1f\" stroke=\"#ccc\"/>"
                      "<text x=\"%.1f\" y=\"%.1f\" font-size=\"11\" text-anchor=\"end\" "
                      "font-family=\"sans-serif\">1e%d</text>\n",
                      ml, py(d), ml + pw, py(d), ml - 6, py(d) + 4, d);
        s += buf;
    }
    std::snprintf(buf, sizeof(buf),
                  "<text x=\"%.1f\" y=\"%.1f\" font-size=\"13\" text-anchor=\"middle\" "
                  "font-family=\"sans-serif\">intracavity photon number |alpha|^2</text>\n",
                  ml + pw / 2, height - 12.0);
    s += buf;

    // curves + legend
    int li = 0;
    for (const auto& c : curves) {
        std::string path;
        for (size_t i = 0; i < c.points.size(); ++i) {
            std::snprintf(buf, sizeof(buf), "%c%.2f %.2f", i ? 'L' : 'M',
                          px(std::log10(c.points[i].first)),
                          py(std::log10(c.points[i].second)));
            path += buf;
        }
        std::snprintf(buf, sizeof(buf),
                      "<path d=\"%s\" fill=\"none\" stroke=\"%s\" stroke-width=\"1.6\"%s%s%s/>\n",
                      path.c_str(), c.color.c_str(),
                      c.dash.empty() ? "" : " stroke-dasharray=\"", c.dash.c_str(),
                      c.dash.empty() ? "" : "\"");
        s += buf;
        const double lx = ml + pw + 12, ly = mt + 14 + 20.0 * li;
        std::snprintf(buf, sizeof(buf),
                      "<line x1=\"%.1f\" y1=\"%.1f\" x2=\"%.1f\" y2=\"%.1f\" stroke=\"%s\" "
                      "stroke-width=\"1.6\"%s%s%s/>"
                      "<text x=\"%.1f\" y=\"%.1f\" font-size=\"11\" "
                      "font-family=\"sans-serif\">%s</text>\n",
                      lx, ly, lx + 24, ly, c.color.c_str(),
                      c.dash.empty() ? "" : " stroke-dasharray=\"", c.dash.c_str(),
                      c.dash.empty() ? "" : "\"", lx + 30, ly + 4, c.label.c_str());
        s += buf;
        ++li;
    }
    s += "</svg>\n";
    return s;
}

void write_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open output file: " + path.string());
    out << content;
    if (!out) throw std::runtime_error("write failed: " + path.string());
}

}  // namespace

void emit(const std::vector<SweepRecord>& records, const SweepConfig& config) {
    if (records.empty()) throw ConfigError("emit: no records");
    config.validate();
    std::filesystem::create_directories(config.out_dir);
    const std::filesystem::path dir(config.out_dir);

    auto has = [&](const char* f) {
        return std::find(config.formats.begin(), config.formats.end(), f) !=
               config.formats.end();
    };
    if (has("csv")) write_file(dir / "records.csv", records_to_csv(records));
    if (has("json")) write_file(dir / "meta.json", config_to_json(config));
    if (has("svg")) {
        if (config.preset_name.empty())
            throw ConfigError("emit: svg output requires a figure preset");
        const auto curves = preset_curves(config.preset_name, records, config);
        write_file(dir / (config.preset_name + ".svg"),
                   render_svg(curves, config.preset_name));
    }
}

}  // namespace omest
