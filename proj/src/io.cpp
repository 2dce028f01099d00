#include "nhlat/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "nhlat/errors.hpp"

namespace nhlat {

LatticeModel ModelSpec::build() const {
    if (kind == "ladder_trivial") return make_ladder_trivial(params);
    if (kind == "ladder_flux") return make_ladder_flux(params);
    throw ConfigError("unknown model kind '" + kind + "'");
}

ModelSpec model_spec_from_json(const json& doc) {
    if (!doc.is_object()) throw ConfigError("model description must be a JSON object");
    ModelSpec spec;
    bool has_kind = false;
    for (const auto& [key, value] : doc.items()) {
        if (key == "model") {
            if (!value.is_string()) throw ConfigError("'model' must be a string");
            spec.kind = value.get<std::string>();
            has_kind = true;
            continue;
        }
        double* slot = key == "t0"      ? &spec.params.t0
                       : key == "t1"    ? &spec.params.t1
                       : key == "tp"    ? &spec.params.tp
                       : key == "gamma" ? &spec.params.gamma
                       : key == "phi"   ? &spec.params.phi
                                        : nullptr;
        if (!slot) throw ConfigError("unknown model key '" + key + "'");
        if (!value.is_number()) throw ConfigError("'" + key + "' must be a number");
        *slot = value.get<double>();
        if (!std::isfinite(*slot)) throw ConfigError("'" + key + "' must be finite");
    }
    if (!has_kind) throw ConfigError("missing 'model' key");
    if (spec.kind != "ladder_trivial" && spec.kind != "ladder_flux")
        throw ConfigError("unknown model kind '" + spec.kind + "'");
    return spec;
}

json to_json(const ModelSpec& spec) {
    return {{"model", spec.kind},          {"t0", spec.params.t0},       {"t1", spec.params.t1},
            {"tp", spec.params.tp},        {"gamma", spec.params.gamma}, {"phi", spec.params.phi}};
}

json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open '" + path + "'");
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError("'" + path + "' is not valid JSON: " + e.what());
    }
}

std::string format_double(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

void write_series_csv(std::ostream& os, const GreensSeries& series) {
    os << "# " << to_json(series.meta).dump() << '\n';
    os << "t,re_G,im_G,abs_G\n";
    for (std::size_t i = 0; i < series.times.size(); ++i) {
        const cplx g = series.values[i];
        os << format_double(series.times[i]) << ',' << format_double(g.real()) << ',' << format_double(g.imag())
           << ',' << format_double(std::abs(g)) << '\n';
    }
}

void write_spectrum_csv(std::ostream& os, const BandSet& bands) {
    os << "re_E,im_E,k_or_index,band,boundary\n";
    for (std::size_t n = 0; n < bands.bands.size(); ++n)
        for (std::size_t j = 0; j < bands.k_grid.size(); ++j)
            os << format_double(bands.bands[n][j].real()) << ',' << format_double(bands.bands[n][j].imag()) << ','
               << format_double(bands.k_grid[j]) << ',' << n << ",PBC\n";
}

void write_spectrum_csv(std::ostream& os, const std::vector<cplx>& values, Boundary boundary) {
    os << "re_E,im_E,k_or_index,band,boundary\n";
    for (std::size_t i = 0; i < values.size(); ++i)
        os << format_double(values[i].real()) << ',' << format_double(values[i].imag()) << ',' << i << ",-1,"
           << to_string(boundary) << '\n';
}

void write_winding_csv(std::ostream& os, const std::vector<WindingResult>& rows) {
    os << "re_Eb,im_Eb,W\n";
    for (const auto& r : rows)
        os << format_double(r.E_b.real()) << ',' << format_double(r.E_b.imag()) << ',' << r.W << '\n';
}

void write_saddles_csv(std::ostream& os, const std::vector<SaddlePoint>& saddles) {
    os << "band,re_beta,im_beta,order,re_E,im_E,on_unit_circle,parity\n";
    for (const auto& s : saddles)
        os << s.band << ',' << format_double(s.beta_s.real()) << ',' << format_double(s.beta_s.imag()) << ','
           << s.order << ',' << format_double(s.E_s.real()) << ',' << format_double(s.E_s.imag()) << ','
           << (s.on_unit_circle ? 1 : 0) << ',' << to_string(s.parity) << '\n';
}

void write_gbz_csv(std::ostream& os, const std::vector<GBZPoint>& points) {
    os << "re_E,im_E,abs_beta_M,abs_beta_M1,mid_ratio,outlier\n";
    for (const auto& p : points) {
        const std::size_t m = p.betas.size() / 2;
        const double lo = m > 0 ? std::abs(p.betas[m - 1]) : 0.0;
        const double hi = m < p.betas.size() ? std::abs(p.betas[m]) : 0.0;
        os << format_double(p.E.real()) << ',' << format_double(p.E.imag()) << ',' << format_double(lo) << ','
           << format_double(hi) << ',' << format_double(p.mid_ratio) << ',' << (p.outlier ? 1 : 0) << '\n';
    }
}

namespace {

json complex_json(cplx z) { return json::array({z.real(), z.imag()}); }

// JSON has no representation for non-finite numbers.
json number(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

} // namespace

json to_json(const GreensMeta& meta) {
    json j = {{"L", meta.L},
              {"boundary", to_string(meta.boundary)},
              {"x0", meta.x0},
              {"orbital", meta.orbital},
              {"kind", meta.kind == GreenKind::Local ? "local" : "worldline"},
              {"method", to_string(meta.method)}};
    j["v"] = meta.v ? json(*meta.v) : json(nullptr);
    if (!meta.note.empty()) j["note"] = meta.note;
    return j;
}

json to_json(const FitReport& fit) {
    return {{"kind", to_string(fit.kind)},
            {fit.kind == FitKind::Power ? "exponent" : "rate", number(fit.value)},
            {"stderr", number(fit.std_error)},
            {"intercept", number(fit.intercept)},
            {"window", json::array({fit.window[0], fit.window[1]})},
            {"r2", number(fit.r2)},
            {"n_points", fit.n_points}};
}

json to_json(const PeriodReport& period) {
    json peaks = json::array();
    for (const auto& p : period.peaks) peaks.push_back(json::array({p.t, p.value}));
    return {{"T_measured", period.T},         {"T_std", period.T_std},        {"T_theory", period.T_theory},
            {"deviation", period.deviation},  {"peaks", peaks}};
}

json to_json(const SaddlePoint& s) {
    return {{"band", s.band},
            {"beta", complex_json(s.beta_s)},
            {"order", s.order},
            {"multiplicity", s.multiplicity},
            {"E", complex_json(s.E_s)},
            {"lead_deriv", complex_json(s.lead_deriv)},
            {"on_unit_circle", s.on_unit_circle},
            {"parity", to_string(s.parity)},
            {"drift", s.drift},
            {"crossings", s.crossings}};
}

json to_json(const AsymptoticPrediction& p) {
    json saddles = json::array();
    for (const auto& s : p.saddles) saddles.push_back(to_json(s));
    return {{"exponent", p.exponent},
            {"prefactor", complex_json(p.prefactor)},
            {"E_s", complex_json(p.E_s)},
            {"validity_from", number(p.validity_from)},
            {"saddles", saddles}};
}

json to_json(const WindingResult& w) {
    return {{"E_b", complex_json(w.E_b)}, {"W", w.W}, {"N_k", w.N_k}, {"phase_residual", w.phase_residual}};
}

namespace {

std::string escape_xml(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        case '&': out += "&amp;"; break;
        case '"': out += "&quot;"; break;
        default: out += c;
        }
    }
    return out;
}

std::string fmt(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", x);
    return buf;
}

std::string tick_label(double v, bool log) {
    char buf[32];
    if (log) std::snprintf(buf, sizeof buf, "1e%d", static_cast<int>(std::lround(v)));
    else std::snprintf(buf, sizeof buf, "%.3g", v);
    return buf;
}

} // namespace

void write_svg(std::ostream& os, const Plot& plot) {
    constexpr double W = 640, H = 440, ml = 70, mr = 20, mt = 36, mb = 52;
    auto tx = [&](double v) { return plot.log_x ? std::log10(v) : v; };
    auto ty = [&](double v) { return plot.log_y ? std::log10(v) : v; };
    auto usable = [&](double x, double y) {
        return std::isfinite(x) && std::isfinite(y) && (!plot.log_x || x > 0) && (!plot.log_y || y > 0);
    };

    double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
    for (const auto& c : plot.curves)
        for (std::size_t i = 0; i < c.x.size() && i < c.y.size(); ++i) {
            if (!usable(c.x[i], c.y[i])) continue;
            x0 = std::min(x0, tx(c.x[i]));
            x1 = std::max(x1, tx(c.x[i]));
            y0 = std::min(y0, ty(c.y[i]));
            y1 = std::max(y1, ty(c.y[i]));
        }
    if (!(x1 > x0)) { x0 = 0; x1 = 1; }
    if (!(y1 > y0)) { y0 -= 0.5; y1 += 0.5; }
    if (plot.log_x) { x0 = std::floor(x0); x1 = std::ceil(x1); }
    if (plot.log_y) { y0 = std::floor(y0); y1 = std::ceil(y1); }

    auto px = [&](double v) { return ml + (tx(v) - x0) / (x1 - x0) * (W - ml - mr); };
    auto py = [&](double v) { return H - mb - (ty(v) - y0) / (y1 - y0) * (H - mt - mb); };
    auto gx = [&](double u) { return ml + (u - x0) / (x1 - x0) * (W - ml - mr); };
    auto gy = [&](double u) { return H - mb - (u - y0) / (y1 - y0) * (H - mt - mb); };

    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\" viewBox=\"0 0 " << W
       << ' ' << H << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    os << "<text x=\"" << W / 2 << "\" y=\"20\" text-anchor=\"middle\">" << escape_xml(plot.title) << "</text>\n";
    os << "<rect x=\"" << ml << "\" y=\"" << mt << "\" width=\"" << W - ml - mr << "\" height=\"" << H - mt - mb
       << "\" fill=\"none\" stroke=\"black\"/>\n";

    auto ticks = [](double a, double b, bool log) {
        std::vector<double> t;
        if (log) {
            const double step = std::max(1.0, std::ceil((b - a) / 8));
            for (double u = a; u <= b + 1e-9; u += step) t.push_back(u);
        } else {
            for (int i = 0; i <= 5; ++i) t.push_back(a + (b - a) * i / 5);
        }
        return t;
    };
    for (double u : ticks(x0, x1, plot.log_x))
        os << "<line x1=\"" << fmt(gx(u)) << "\" y1=\"" << H - mb << "\" x2=\"" << fmt(gx(u)) << "\" y2=\""
           << H - mb + 5 << "\" stroke=\"black\"/><text x=\"" << fmt(gx(u)) << "\" y=\"" << H - mb + 18
           << "\" text-anchor=\"middle\">" << tick_label(u, plot.log_x) << "</text>\n";
    for (double u : ticks(y0, y1, plot.log_y))
        os << "<line x1=\"" << ml - 5 << "\" y1=\"" << fmt(gy(u)) << "\" x2=\"" << ml << "\" y2=\"" << fmt(gy(u))
           << "\" stroke=\"black\"/><text x=\"" << ml - 8 << "\" y=\"" << fmt(gy(u) + 4)
           << "\" text-anchor=\"end\">" << tick_label(u, plot.log_y) << "</text>\n";
    os << "<text x=\"" << (ml + W - mr) / 2 << "\" y=\"" << H - 12 << "\" text-anchor=\"middle\">"
       << escape_xml(plot.x_label) << "</text>\n";
    os << "<text x=\"16\" y=\"" << (mt + H - mb) / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
       << (mt + H - mb) / 2 << ")\">" << escape_xml(plot.y_label) << "</text>\n";

    double ly = mt + 16;
    for (const auto& c : plot.curves) {
        if (c.markers) {
            for (std::size_t i = 0; i < c.x.size() && i < c.y.size(); ++i)
                if (usable(c.x[i], c.y[i]))
                    os << "<circle cx=\"" << fmt(px(c.x[i])) << "\" cy=\"" << fmt(py(c.y[i]))
                       << "\" r=\"3\" fill=\"" << c.color << "\"/>\n";
        } else {
            os << "<polyline fill=\"none\" stroke=\"" << c.color << "\" stroke-width=\"1.2\"";
            if (c.dashed) os << " stroke-dasharray=\"6 4\"";
            os << " points=\"";
            for (std::size_t i = 0; i < c.x.size() && i < c.y.size(); ++i)
                if (usable(c.x[i], c.y[i])) os << fmt(px(c.x[i])) << ',' << fmt(py(c.y[i])) << ' ';
            os << "\"/>\n";
        }
        if (!c.label.empty()) {
            os << "<line x1=\"" << W - mr - 150 << "\" y1=\"" << ly - 4 << "\" x2=\"" << W - mr - 125 << "\" y2=\""
               << ly - 4 << "\" stroke=\"" << c.color << "\"" << (c.dashed ? " stroke-dasharray=\"6 4\"" : "")
               << "/><text x=\"" << W - mr - 120 << "\" y=\"" << ly << "\">" << escape_xml(c.label) << "</text>\n";
            ly += 16;
        }
    }
    os << "</svg>\n";
}

void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write '" + path + "'");
    out << text;
}

} // namespace nhlat
