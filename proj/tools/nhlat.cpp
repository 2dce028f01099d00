// nhlat: command-line front end for spectra, saddles, dynamics, fits and figure reproduction

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "nhlat/analysis.hpp"
#include "nhlat/asymptotics.hpp"
#include "nhlat/dynamics.hpp"
#include "nhlat/errors.hpp"
#include "nhlat/figures.hpp"
#include "nhlat/io.hpp"
#include "nhlat/spectral.hpp"

using namespace nhlat;

namespace {

const std::vector<std::string> kCommands = {"spectrum", "winding", "gbz", "saddles", "evolve", "worldline", "fit",
                                            "reproduce"};

cplx parse_complex(std::string s) {
    std::erase_if(s, [](char c) { return std::isspace(static_cast<unsigned char>(c)); });
    const auto number = [&](const std::string& text) {
        std::size_t used = 0;
        double x = 0;
        try {
            x = std::stod(text, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used != text.size() || text.empty()) throw ConfigError("cannot parse complex number '" + s + "'");
        return x;
    };
    if (s.empty()) throw ConfigError("empty complex number");
    if (s.back() != 'i' && s.back() != 'j') return {number(s), 0.0};
    const std::string body = s.substr(0, s.size() - 1);
    std::size_t split = std::string::npos;
    for (std::size_t i = body.size(); i-- > 1;)
        if ((body[i] == '+' || body[i] == '-') && body[i - 1] != 'e' && body[i - 1] != 'E') {
            split = i;
            break;
        }
    const auto imag = [&](const std::string& t) { return t == "" || t == "+" ? 1.0 : t == "-" ? -1.0 : number(t); };
    if (split == std::string::npos) return {0.0, imag(body)};
    return {number(body.substr(0, split)), imag(body.substr(split))};
}

struct ModelFlags {
    std::optional<std::string> kind;
    std::optional<double> t0, t1, tp, gamma, phi;
};

struct Common {
    std::string config;
    std::string out;
    ModelFlags flags;
    std::optional<json> config_model;
};

ModelSpec resolve_model(const Common& c) {
    ModelSpec spec;
    if (c.config_model) spec = model_spec_from_json(*c.config_model);
    else if (!c.flags.kind) throw ConfigError("no model given; use --config or --model");
    if (c.flags.kind) spec.kind = *c.flags.kind;
    if (c.flags.t0) spec.params.t0 = *c.flags.t0;
    if (c.flags.t1) spec.params.t1 = *c.flags.t1;
    if (c.flags.tp) spec.params.tp = *c.flags.tp;
    if (c.flags.gamma) spec.params.gamma = *c.flags.gamma;
    if (c.flags.phi) spec.params.phi = *c.flags.phi;
    return model_spec_from_json(to_json(spec));
}

void emit(const Common& c, const std::string& file, const std::string& text) {
    if (c.out.empty()) {
        std::cout << text;
        return;
    }
    std::filesystem::create_directories(c.out);
    write_text_file((std::filesystem::path(c.out) / file).string(), text);
}

GreensSeries read_series_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open '" + path + "'");
    GreensSeries s;
    std::string line;
    bool header = false;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (line[0] == '#') {
            s.meta.note = line.substr(1);
            continue;
        }
        if (!header) {
            header = true;
            if (line.rfind("t,", 0) == 0) continue;
        }
        std::stringstream ss(line);
        std::string a, b, c;
        if (!std::getline(ss, a, ',') || !std::getline(ss, b, ',') || !std::getline(ss, c, ','))
            throw ConfigError("malformed series row '" + line + "'");
        try {
            s.times.push_back(std::stod(a));
            s.values.emplace_back(std::stod(b), std::stod(c));
        } catch (const std::exception&) {
            throw ConfigError("malformed series row '" + line + "'");
        }
    }
    return s;
}

// Turns a run-config document into a subcommand and option tokens placed ahead of the user's own flags.
std::vector<std::string> expand_config(std::vector<std::string> args, Common& common) {
    std::optional<std::string> path;
    for (std::size_t i = 0; i < args.size(); ++i) {
        if (args[i] == "--config" && i + 1 < args.size()) path = args[i + 1];
        else if (args[i].rfind("--config=", 0) == 0) path = args[i].substr(9);
    }
    if (!path) return args;
    const json doc = read_json_file(*path);
    if (!doc.is_object()) throw ConfigError("config must be a JSON object");

    std::optional<std::string> command;
    std::vector<std::string> extra;
    if (doc.contains("model") && doc["model"].is_string()) {
        common.config_model = doc;
    } else {
        for (const auto& [key, value] : doc.items()) {
            if (key == "model") common.config_model = value;
            else if (key == "command") command = value.get<std::string>();
            else if (key == "figure") extra.insert(extra.begin(), value.get<std::string>());
            else if (key == "options") {
                if (!value.is_object()) throw ConfigError("'options' must be an object");
                for (const auto& [name, v] : value.items()) {
                    extra.push_back("--" + name);
                    const auto token = [](const json& x) {
                        return x.is_string() ? x.get<std::string>() : x.dump();
                    };
                    if (v.is_array())
                        for (const auto& x : v) extra.push_back(token(x));
                    else if (!v.is_boolean()) extra.push_back(token(v));
                    else if (!v.get<bool>()) extra.pop_back();
                }
            } else throw ConfigError("unknown config key '" + key + "'");
        }
    }

    std::vector<std::string> out{args.front()};
    std::optional<std::string> given;
    std::vector<std::string> rest;
    for (std::size_t i = 1; i < args.size(); ++i) {
        if (!given && std::find(kCommands.begin(), kCommands.end(), args[i]) != kCommands.end()) given = args[i];
        else rest.push_back(args[i]);
    }
    if (!given && !command) throw ConfigError("no command given on the command line or in the config");
    out.push_back(given ? *given : *command);
    out.insert(out.end(), extra.begin(), extra.end());
    out.insert(out.end(), rest.begin(), rest.end());
    return out;
}

void add_common(CLI::App* sub, Common& c, bool model) {
    sub->add_option("--config", c.config, "JSON model or run config");
    sub->add_option("--out", c.out, "output directory (default: stdout)");
    if (!model) return;
    sub->add_option("--model", c.flags.kind, "ladder_trivial | ladder_flux");
    sub->add_option("--t0", c.flags.t0, "intracell hopping");
    sub->add_option("--t1", c.flags.t1, "intercell hopping");
    sub->add_option("--tp", c.flags.tp, "same-sublattice hopping");
    sub->add_option("--gamma", c.flags.gamma, "loss on sublattice B");
    sub->add_option("--phi", c.flags.phi, "Peierls phase");
}

void diagnostic(const std::string& name, const std::string& kind, const std::string& message) {
    std::cerr << json{{"error", name}, {"kind", kind}, {"message", message}}.dump() << '\n';
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Dissipative ladder dynamics: spectra, saddles, Green's functions and fits"};
    app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    app.require_subcommand(1);
    Common common;

    int L = 150, n_k = 512, x0 = 75, orbital = 0, band = kAllBands, per_decade = 128;
    std::string boundary = "PBC", grid = "log", method = "eig", eb = "0", input, kind = "power", figure;
    double tol = 1e-2, t_max = 1000.0, dt = 0.1, v = 0.0, prefactor = 0.0, rk_tol = 1e-12;
    std::vector<double> window, scan;
    bool peaks = false, raw = false;
    std::optional<double> period_v;

    auto* spectrum = app.add_subcommand("spectrum", "PBC bands and OBC eigenvalues as CSV");
    add_common(spectrum, common, true);
    spectrum->add_option("--L", L, "unit cells")->capture_default_str();
    spectrum->add_option("--Nk", n_k, "momentum samples")->capture_default_str();
    spectrum->add_option("--boundary", boundary, "PBC | OBC | both")->capture_default_str();

    auto* winding = app.add_subcommand("winding", "point-gap winding number");
    add_common(winding, common, true);
    winding->add_option("--Eb", eb, "reference energy, e.g. 0.1-0.2i")->capture_default_str();
    winding->add_option("--Nk", n_k, "momentum samples")->capture_default_str();
    winding->add_option("--scan", scan, "re_lo re_hi im_lo im_hi n: CSV scan over a grid")->expected(5);

    auto* gbz = app.add_subcommand("gbz", "characteristic roots at OBC eigenvalues");
    add_common(gbz, common, true);
    gbz->add_option("--L", L, "unit cells")->capture_default_str();
    gbz->add_option("--tol", tol, "outlier tolerance on |mid_ratio - 1|")->capture_default_str();

    auto* saddles = app.add_subcommand("saddles", "saddle points with order and parity as CSV");
    add_common(saddles, common, true);
    saddles->add_option("--band", band, "band index, -1 for all")->capture_default_str();
    saddles->add_option("--v", v, "real-space drift of the moving frame")->capture_default_str();

    auto* evolve = app.add_subcommand("evolve", "local Green's function as CSV");
    add_common(evolve, common, true);
    evolve->add_option("--L", L, "unit cells")->capture_default_str();
    evolve->add_option("--boundary", boundary, "PBC | OBC")->capture_default_str();
    evolve->add_option("--x0", x0, "initial cell")->capture_default_str();
    evolve->add_option("--orbital", orbital, "initial orbital")->capture_default_str();
    evolve->add_option("--tmax", t_max, "final time")->capture_default_str();
    evolve->add_option("--grid", grid, "log | linear")->capture_default_str();
    evolve->add_option("--dt", dt, "linear grid step")->capture_default_str();
    evolve->add_option("--per-decade", per_decade, "log grid density")->capture_default_str();
    evolve->add_option("--method", method, "eig | rk | momentum")->capture_default_str();
    evolve->add_option("--tol", rk_tol, "Runge-Kutta tolerance")->capture_default_str();

    auto* wline = app.add_subcommand("worldline", "world-line Green's function as CSV");
    add_common(wline, common, true);
    wline->add_option("--L", L, "unit cells")->capture_default_str();
    wline->add_option("--x0", x0, "initial cell")->capture_default_str();
    wline->add_option("--orbital", orbital, "orbital")->capture_default_str();
    wline->add_option("--v", v, "real-space drift")->required();
    wline->add_option("--tmax", t_max, "final time")->capture_default_str();
    wline->add_option("--method", method, "eig | rk | momentum")->capture_default_str();

    auto* fit = app.add_subcommand("fit", "power-law or exponential fit of a series CSV");
    add_common(fit, common, false);
    fit->add_option("--input", input, "series CSV (t, re_G, im_G, abs_G)")->required();
    fit->add_option("--kind", kind, "power | exponential")->capture_default_str();
    fit->add_option("--window", window, "t_lo t_hi")->expected(2)->required();
    fit->add_option("--prefactor-exponent", prefactor, "known t^p prefactor removed before an exponential fit");
    fit->add_flag("--peaks", peaks, "power law through envelope peaks");
    fit->add_flag("--raw", raw, "exponential fit through all samples instead of envelope peaks");
    fit->add_option("--period-v", period_v, "also detect the recurrence period for this velocity");
    fit->add_option("--L", L, "unit cells, for the period")->capture_default_str();

    auto* repro = app.add_subcommand("reproduce", "reproduce a figure preset");
    add_common(repro, common, false);
    repro->add_option("figure", figure, "fig1b ... fig5b")->required();

    std::vector<std::string> args(argv, argv + argc);
    try {
        args = expand_config(args, common);
        std::vector<const char*> raw_args;
        for (const auto& a : args) raw_args.push_back(a.c_str());
        try {
            app.parse(static_cast<int>(raw_args.size()), raw_args.data());
        } catch (const CLI::ParseError& e) {
            const int code = app.exit(e);
            return code == 0 ? 0 : 2;
        }

        if (*repro) {
            const FigureReport r = reproduce(figure, common.out.empty() ? std::nullopt : std::optional(common.out));
            std::cout << r.to_json().dump(2) << '\n';
            return 0;
        }
        if (*fit) {
            const GreensSeries s = read_series_csv(input);
            const std::array<double, 2> w{window[0], window[1]};
            json report;
            if (kind == "power") {
                report = peaks ? to_json(fit_power_law(envelope_peaks(s, {w[0], w[1], std::nullopt, 1.2}), w))
                               : to_json(fit_power_law(s, w));
            } else if (kind == "exponential") {
                ExponentialFitOptions eo;
                eo.envelope = !raw;
                eo.prefactor_exponent = prefactor;
                report = to_json(fit_exponential(s, w, eo));
            } else {
                throw ConfigError("unknown fit kind '" + kind + "'");
            }
            if (period_v) {
                PeakOptions po;
                po.t_lo = w[0];
                po.t_hi = w[1];
                const json p = to_json(detect_period(s, *period_v, L, po));
                for (const auto& [k, val] : p.items()) report[k] = val;
            }
            emit(common, "fit.json", report.dump(2) + "\n");
            return 0;
        }

        const ModelSpec spec = resolve_model(common);
        const LatticeModel model = spec.build();
        std::ostringstream os;
        if (*spectrum) {
            if (boundary != "both" && boundary != "PBC" && boundary != "OBC")
                throw ConfigError("--boundary must be PBC, OBC or both");
            if (boundary != "OBC") write_spectrum_csv(os, pbc_bands(model, n_k));
            if (boundary != "PBC") {
                std::ostringstream obc;
                write_spectrum_csv(obc, obc_spectrum(model, L), Boundary::Open);
                std::string text = obc.str();
                if (boundary == "both") text = text.substr(text.find('\n') + 1);
                os << text;
            }
            emit(common, "spectrum.csv", os.str());
        } else if (*winding) {
            if (!scan.empty()) {
                const int n = static_cast<int>(scan[4]);
                if (n < 1 || n > 1000) throw ConfigError("--scan grid size must be in [1, 1000]");
                std::vector<WindingResult> rows;
                for (int i = 0; i < n; ++i)
                    for (int j = 0; j < n; ++j) {
                        const double fx = n == 1 ? 0.5 : static_cast<double>(i) / (n - 1);
                        const double fy = n == 1 ? 0.5 : static_cast<double>(j) / (n - 1);
                        const cplx e(scan[0] + fx * (scan[1] - scan[0]), scan[2] + fy * (scan[3] - scan[2]));
                        try {
                            rows.push_back(winding_number(model, e, n_k));
                        } catch (const OnSpectrum&) {
                        }
                    }
                write_winding_csv(os, rows);
                emit(common, "winding.csv", os.str());
            } else {
                emit(common, "winding.json", to_json(winding_number(model, parse_complex(eb), n_k)).dump(2) + "\n");
            }
        } else if (*gbz) {
            write_gbz_csv(os, gbz_check(model, L, tol));
            emit(common, "gbz.csv", os.str());
        } else if (*saddles) {
            write_saddles_csv(os, v == 0.0 ? saddle_points(model, band) : drift_saddle_points(model, band, v));
            emit(common, "saddles.csv", os.str());
        } else if (*evolve) {
            EvolutionPlan plan;
            plan.method = method_from_string(method);
            plan.tolerance = rk_tol;
            std::vector<double> times;
            if (grid == "log") times = log_time_grid(t_max, per_decade);
            else if (grid == "linear") times = linear_time_grid(t_max, dt);
            else throw ConfigError("--grid must be log or linear");
            write_series_csv(os, local_green(model, L, boundary_from_string(boundary), x0, orbital, times, plan));
            emit(common, "evolve.csv", os.str());
        } else if (*wline) {
            EvolutionPlan plan;
            plan.method = method_from_string(method);
            write_series_csv(os, worldline_green(model, L, x0, v, t_max, orbital, plan));
            emit(common, "worldline.csv", os.str());
        }
        return 0;
    } catch (const Error& e) {
        diagnostic(e.name(), e.kind() == ErrorKind::Validation ? "validation" : "numerical", e.what());
        return e.kind() == ErrorKind::Validation ? 2 : 3;
    } catch (const json::exception& e) {
        diagnostic("ConfigError", "validation", e.what());
        return 2;
    } catch (const std::exception& e) {
        diagnostic("InternalError", "numerical", e.what());
        return 3;
    }
}
