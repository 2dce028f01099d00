#include <doctest.h>

#include <sys/wait.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "nhlat/figures.hpp"

using namespace nhlat;

namespace {

constexpr double kPi = 3.14159265358979323846;

struct Run {
    int status = -1;
    std::string out;
};

// Runs the CLI with stderr discarded unless `keep_err` is set, in which case it replaces stdout.
Run run(const std::string& args, bool keep_err = false) {
    const std::string cmd =
        std::string("\"") + NHLAT_CLI + "\" " + args + (keep_err ? " 2>&1 >/dev/null" : " 2>/dev/null");
    Run r;
    FILE* p = popen(cmd.c_str(), "r");
    REQUIRE(p != nullptr);
    char buf[4096];
    std::size_t n = 0;
    while ((n = fread(buf, 1, sizeof buf, p)) > 0) r.out.append(buf, n);
    const int raw = pclose(p);
    r.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
    return r;
}

std::filesystem::path scratch(const std::string& name) {
    const auto dir = std::filesystem::temp_directory_path() / "nhlat_cli_test";
    std::filesystem::create_directories(dir);
    return dir / name;
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

const std::string kFlux = "--model ladder_flux --t0 0.5 --t1 0.5 --tp 0.3 --gamma 0.8 --phi 1.5707963267948966";

} // namespace

TEST_CASE("repeated runs produce byte-identical CSV") {
    for (const std::string& args : {"spectrum " + kFlux + " --L 40 --boundary both",
                                    "evolve " + kFlux + " --L 30 --x0 15 --tmax 50 --per-decade 16",
                                    "saddles " + kFlux}) {
        const Run a = run(args), b = run(args);
        CHECK(a.status == 0);
        CHECK_FALSE(a.out.empty());
        CHECK(a.out == b.out);
    }
}

TEST_CASE("presets carry the figure-caption parameters") {
    struct Row {
        const char* id;
        const char* kind;
        LadderParams p;
    };
    const LadderParams trivial_a{0.5, 0.5, 0.0, 0.8, 0.0}, trivial_b{1.0, 0.5, 0.0, 0.8, 0.0};
    const LadderParams flux_a{0.5, 0.5, 0.3, 0.8, kPi / 2}, flux_b{1.0, 0.5, 0.7, 0.8, kPi / 2};
    const Row table[] = {
        {"fig1b", "ladder_trivial", trivial_a}, {"fig1c", "ladder_trivial", trivial_b},
        {"fig1d", "ladder_trivial", trivial_a}, {"fig1e", "ladder_trivial", trivial_b},
        {"fig4a", "ladder_flux", flux_a},       {"fig4b", "ladder_flux", flux_b},
        {"fig4c", "ladder_flux", flux_a},       {"fig4d", "ladder_flux", flux_b},
        {"fig4e", "ladder_flux", flux_a},       {"fig4f", "ladder_flux", flux_b},
        {"fig5a", "ladder_flux", flux_a},       {"fig5b", "ladder_flux", flux_b},
    };
    CHECK(figure_presets().size() == std::size(table));
    for (const Row& r : table) {
        CAPTURE(r.id);
        const FigurePreset& p = figure_preset(r.id);
        CHECK(p.model.kind == r.kind);
        CHECK(p.model.params.t0 == r.p.t0);
        CHECK(p.model.params.t1 == r.p.t1);
        CHECK(p.model.params.tp == r.p.tp);
        CHECK(p.model.params.gamma == r.p.gamma);
        if (std::string(r.kind) == "ladder_flux") CHECK(p.model.params.phi == r.p.phi);
        CHECK(p.cells == 150);
        CHECK(p.x0 == 75);
    }
}

TEST_CASE("exit codes") {
    CHECK(run("").status == 2);
    CHECK(run("spectrum --model ladder_trivial --bogus 1").status == 2);
    CHECK(run("reproduce fig9z").status == 2);
    CHECK(run("spectrum --model ladder_trivial --gamma -0.5").status == 2);

    const auto bad = scratch("bad.json");
    std::ofstream(bad) << R"({"model": "ladder_trivial", "t0": 0.5, "colour": "red"})";
    const Run r = run("spectrum --config " + bad.string(), true);
    CHECK(r.status == 2);
    const json diag = json::parse(r.out);
    CHECK(diag["kind"] == "validation");
    CHECK(diag["error"] == "ConfigError");

    // E_b = 0 is the gap-closing energy of this model, so the winding number is undefined.
    const Run on = run("winding --model ladder_trivial --t0 0.5 --t1 0.5 --gamma 0.8 --Eb 0+0i --Nk 4096", true);
    CHECK(on.status == 3);
    CHECK(json::parse(on.out)["kind"] == "numerical");
}

TEST_CASE("winding of the trivial ladder vanishes at E_b = 0 away from gap closing") {
    const Run r = run("winding --model ladder_trivial --t0 1.2 --t1 0.5 --gamma 0.8 --Eb 0+0i --Nk 4096");
    REQUIRE(r.status == 0);
    CHECK(json::parse(r.out)["W"] == 0);
}

TEST_CASE("config files drive the same computation as inline flags") {
    const auto model = scratch("model.json");
    std::ofstream(model) << R"({"model": "ladder_flux", "t0": 0.5, "t1": 0.5, "tp": 0.3, "gamma": 0.8, "phi": 1.5707963267948966})";
    const auto runcfg = scratch("run.json");
    std::ofstream(runcfg) << R"({"model": {"model": "ladder_flux", "t0": 0.5, "t1": 0.5, "tp": 0.3, "gamma": 0.8,
        "phi": 1.5707963267948966}, "command": "spectrum", "options": {"L": 40, "boundary": "OBC"}})";
    const Run inline_flags = run("spectrum " + kFlux + " --L 40 --boundary OBC");
    CHECK(inline_flags.status == 0);
    CHECK(run("spectrum --config " + model.string() + " --L 40 --boundary OBC").out == inline_flags.out);
    CHECK(run("--config " + runcfg.string()).out == inline_flags.out);
}

TEST_CASE("evolve and fit round trip through a CSV file") {
    const auto dir = scratch("evolve");
    std::filesystem::remove_all(dir);
    const Run e = run("evolve --model ladder_trivial --t0 0.5 --t1 0.5 --gamma 0.8 --L 150 --x0 75 --tmax 1000 --out " +
                      dir.string());
    REQUIRE(e.status == 0);
    std::filesystem::path csv;
    for (const auto& f : std::filesystem::directory_iterator(dir))
        if (f.path().extension() == ".csv") csv = f.path();
    REQUIRE_FALSE(csv.empty());
    CHECK(slurp(csv).rfind("# {", 0) == 0);
    const Run f = run("fit --input " + csv.string() + " --kind power --window 50 500");
    REQUIRE(f.status == 0);
    const json j = json::parse(f.out);
    CHECK(std::abs(j["exponent"].get<double>() + 0.5) < 0.05);
}

TEST_CASE("reproduce writes a report, data and a plot") {
    const auto dir = scratch("fig4a");
    std::filesystem::remove_all(dir);
    const Run r = run("reproduce fig4a --out " + dir.string());
    REQUIRE(r.status == 0);
    const json report = json::parse(slurp(dir / "fig4a_report.json"));
    CHECK(report["figure"] == "fig4a");
    CHECK(report["pass"] == true);
    CHECK(std::filesystem::exists(dir / "fig4a.svg"));
}
