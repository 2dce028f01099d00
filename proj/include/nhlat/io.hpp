// io.hpp: JSON model configs, CSV and JSON emitters, minimal SVG plots

#pragma once

#include <json.hpp>
#include <ostream>
#include <string>
#include <vector>

#include "nhlat/analysis.hpp"
#include "nhlat/asymptotics.hpp"
#include "nhlat/dynamics.hpp"
#include "nhlat/model.hpp"
#include "nhlat/spectral.hpp"

namespace nhlat {

using json = nlohmann::json;

struct ModelSpec {
    std::string kind = "ladder_trivial"; // ladder_trivial | ladder_flux
    LadderParams params;

    LatticeModel build() const;
};

// {"model": "ladder_trivial"|"ladder_flux", "t0", "t1", "tp", "gamma", "phi"}; unknown keys are rejected.
ModelSpec model_spec_from_json(const json& doc);
json to_json(const ModelSpec& spec);
json read_json_file(const std::string& path);

// Shortest round-trip text is not needed; every float is printed with 17 significant digits.
std::string format_double(double x);

void write_series_csv(std::ostream& os, const GreensSeries& series);
void write_spectrum_csv(std::ostream& os, const BandSet& bands);
void write_spectrum_csv(std::ostream& os, const std::vector<cplx>& values, Boundary boundary);
void write_winding_csv(std::ostream& os, const std::vector<WindingResult>& rows);
void write_saddles_csv(std::ostream& os, const std::vector<SaddlePoint>& saddles);
void write_gbz_csv(std::ostream& os, const std::vector<GBZPoint>& points);

json to_json(const GreensMeta& meta);
json to_json(const FitReport& fit);
json to_json(const PeriodReport& period);
json to_json(const SaddlePoint& saddle);
json to_json(const AsymptoticPrediction& prediction);
json to_json(const WindingResult& w);

struct PlotCurve {
    std::string label;
    std::vector<double> x, y;
    std::string color = "#1f4e9c";
    bool dashed = false;
    bool markers = false;
};

struct Plot {
    std::string title;
    std::string x_label = "t";
    std::string y_label;
    bool log_x = true;
    bool log_y = true;
    std::vector<PlotCurve> curves;
};

void write_svg(std::ostream& os, const Plot& plot);
void write_text_file(const std::string& path, const std::string& text);

} // namespace nhlat
