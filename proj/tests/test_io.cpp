#include <doctest.h>

#include <cmath>
#include <sstream>

#include "nhlat/errors.hpp"
#include "nhlat/io.hpp"

using namespace nhlat;

TEST_CASE("model spec parsing") {
    const auto spec = model_spec_from_json(json::parse(
        R"({"model": "ladder_flux", "t0": 0.5, "t1": 0.5, "tp": 0.3, "gamma": 0.8, "phi": 1.5707963267948966})"));
    CHECK(spec.kind == "ladder_flux");
    CHECK(spec.params.tp == 0.3);
    CHECK(spec.params.phi == 1.5707963267948966);
    CHECK(spec.build().orbitals() == 2);

    // Omitted parameters keep their defaults.
    const auto trivial = model_spec_from_json(json::parse(R"({"model": "ladder_trivial", "t0": 1.0})"));
    CHECK(trivial.params.t0 == 1.0);
    CHECK(trivial.params.tp == 0.0);
}

TEST_CASE("model spec rejects malformed documents") {
    CHECK_THROWS_AS(model_spec_from_json(json::parse(R"({"model": "ladder_trivial", "tq": 1})")), ConfigError);
    CHECK_THROWS_AS(model_spec_from_json(json::parse(R"({"t0": 1})")), ConfigError);
    CHECK_THROWS_AS(model_spec_from_json(json::parse(R"({"model": "hexagon"})")), ConfigError);
    CHECK_THROWS_AS(model_spec_from_json(json::parse(R"({"model": "ladder_trivial", "t0": "big"})")), ConfigError);
    CHECK_THROWS_AS(model_spec_from_json(json::parse(R"([1, 2])")), ConfigError);
    CHECK_THROWS_AS(model_spec_from_json(json::parse(R"({"model": "ladder_trivial", "gamma": -1})")).build(), DomainError);
}

TEST_CASE("model spec round-trips through JSON") {
    ModelSpec s;
    s.kind = "ladder_flux";
    s.params = {0.1, 1.0 / 3.0, std::sqrt(2.0), 0.7, 2.0943951023931953};
    const auto back = model_spec_from_json(json::parse(to_json(s).dump()));
    CHECK(back.kind == s.kind);
    CHECK(back.params.t1 == s.params.t1);
    CHECK(back.params.tp == s.params.tp);
    CHECK(back.params.phi == s.params.phi);
}

TEST_CASE("doubles print with 17 significant digits and round-trip") {
    for (double x : {1.0 / 3.0, -0.0462070984151028, 1e-300, 6.02214076e23, 0.1}) {
        const std::string s = format_double(x);
        CHECK(std::stod(s) == x);
    }
    CHECK(format_double(0.5) == "0.5");
}

TEST_CASE("series CSV has a JSON meta header and fixed columns") {
    GreensSeries g;
    g.times = {0.0, 0.5};
    g.values = {1.0, cplx(0.25, -0.5)};
    g.meta.L = 150;
    g.meta.x0 = 75;
    std::ostringstream os;
    write_series_csv(os, g);
    std::istringstream is(os.str());
    std::string header, columns, row0, row1;
    std::getline(is, header);
    std::getline(is, columns);
    std::getline(is, row0);
    std::getline(is, row1);
    REQUIRE(header.rfind("# ", 0) == 0);
    const json meta = json::parse(header.substr(2));
    CHECK(meta["L"] == 150);
    CHECK(meta["x0"] == 75);
    CHECK(columns == "t,re_G,im_G,abs_G");
    CHECK(row0 == "0,1,0,1");
    std::istringstream r(row1);
    std::string cell;
    std::vector<double> cells;
    while (std::getline(r, cell, ',')) cells.push_back(std::stod(cell));
    REQUIRE(cells.size() == 4);
    CHECK(cells[3] == std::abs(cplx(0.25, -0.5)));
}

TEST_CASE("saddle CSV columns") {
    SaddlePoint s;
    s.band = 1;
    s.beta_s = cplx(-0.5, 0.25);
    s.E_s = cplx(0.1, -0.2);
    s.parity = Parity::Nonzero;
    std::ostringstream os;
    write_saddles_csv(os, {s});
    std::istringstream is(os.str());
    std::string line;
    std::getline(is, line);
    CHECK(line == "band,re_beta,im_beta,order,re_E,im_E,on_unit_circle,parity");
    std::getline(is, line);
    CHECK(line == "1,-0.5,0.25,2,0.10000000000000001,-0.20000000000000001,0,nonzero");
}

TEST_CASE("fit report JSON keys") {
    FitReport f;
    f.kind = FitKind::Exponential;
    f.value = -0.046;
    f.window = {10.0, 90.0};
    const json j = to_json(f);
    CHECK(j.contains("rate"));
    CHECK(j.contains("stderr"));
    CHECK(j["window"][1] == 90.0);
    f.kind = FitKind::Power;
    CHECK(to_json(f).contains("exponent"));
}

TEST_CASE("SVG output is a well-formed document with every curve") {
    Plot p;
    p.title = "a < b & c";
    p.curves = {{"one", {1.0, 10.0, 100.0}, {1.0, 0.3, 0.1}}, {"two", {1.0, 100.0}, {0.5, 0.05}, "#000000", true}};
    std::ostringstream os;
    write_svg(os, p);
    const std::string s = os.str();
    CHECK(s.rfind("<svg", 0) == 0);
    CHECK(s.find("</svg>") != std::string::npos);
    CHECK(s.find("a &lt; b &amp; c") != std::string::npos);
    std::size_t polylines = 0;
    for (std::size_t at = s.find("<polyline"); at != std::string::npos; at = s.find("<polyline", at + 1)) ++polylines;
    CHECK(polylines == 2);
}
