// figures.hpp: parameter presets and reproduction runners shared by the CLI and the acceptance binary

#pragma once

#include <optional>
#include <string>
#include <vector>

#include "nhlat/io.hpp"

namespace nhlat {

struct FigurePreset {
    std::string id;
    ModelSpec model;
    int cells = 150;
    int x0 = 75;
    std::string summary;
};

const std::vector<FigurePreset>& figure_presets();
const FigurePreset& figure_preset(const std::string& id);

struct Check {
    std::string name;
    double value = 0.0;
    double lo = 0.0, hi = 0.0;
    bool pass = false;
};

struct FigureReport {
    std::string id;
    std::vector<Check> checks;
    json data = json::object();
    std::vector<std::string> files;

    bool pass() const;
    const Check& check(const std::string& name) const;
    json to_json() const;
};

// Runs a preset; when out_dir is given, writes CSVs, an SVG and <id>_report.json there.
FigureReport reproduce(const std::string& id, const std::optional<std::string>& out_dir = {});

// Gap-closing k0 and its group velocity for the first tracked gap closing of a model.
struct GapVelocity {
    double k0 = 0.0;
    int band = 0;  // index in the continuity-tracked BandSet
    int sheet = 0; // BandFunction sheet carrying that band at k0
    double v_g = 0.0;
};
GapVelocity gap_velocity(const LatticeModel& model);

} // namespace nhlat
