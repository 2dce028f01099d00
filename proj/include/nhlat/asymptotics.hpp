// asymptotics.hpp: saddle points of band functions, their order, steepest paths through
// them, dominant-saddle selection by ascent-path parity, and leading-order predictions
// for local and world-line Green's functions.

#pragma once

#include <optional>
#include <vector>

#include "nhlat/band_function.hpp"
#include "nhlat/model.hpp"

namespace nhlat {

inline constexpr int kAllBands = -1;
inline constexpr int kMaxSaddleOrder = 8;

// Whether the ascent paths of a saddle meet |beta| = 1 an odd number of times, i.e.
// whether its thimble enters the deformed integration contour.
enum class Parity { Zero, Nonzero, Unknown };
const char* to_string(Parity p);

struct OrderInfo {
    int order = 0;
    cplx lead_deriv;           // E^{(n)}(beta_s)
    double radius = 0.0;       // Cauchy contour radius used
    std::vector<cplx> taylor;  // c_p = E^{(p)}(beta_s) / p!, p = 0..kMaxSaddleOrder + 1
};

struct SaddlePoint {
    int band = 0;          // sheet index
    cplx beta_s;
    int order = 2;
    int multiplicity = 1;  // multiplicity as a root of the saddle equation
    cplx E_s;
    cplx lead_deriv;
    bool on_unit_circle = false;
    Parity parity = Parity::Unknown;
    double drift = 0.0;    // v of f = E + v k; 0 for plain band saddles
    double radius = 0.0;
    std::vector<cplx> taylor;
    cplx root;             // square-root branch at beta_s
    int crossings = 0;     // total |beta| = 1 crossings of the ascent paths
};

struct SaddleOptions {
    bool classify_parity = true;
    std::optional<double> radius; // override the automatic Cauchy radius
};

std::vector<SaddlePoint> saddle_points(const LatticeModel& model, int band = kAllBands,
                                       const SaddleOptions& options = {});
// Saddles of f(k) = E(k) + v k, with v the real-space drift of the moving frame.
std::vector<SaddlePoint> drift_saddle_points(const LatticeModel& model, int band, double v,
                                             const SaddleOptions& options = {});

OrderInfo saddle_order(const BandFunction& f, cplx beta_s, std::optional<double> radius = {});
OrderInfo saddle_order(const BandFunction& f, const BandFunction::Germ& at, double radius);

enum class PathDirection { Ascent, Descent };
enum class PathEnd { LeftAnnulus, Saturated, LengthCap };

struct SteepestPath {
    double start_angle = 0.0;
    std::vector<cplx> beta;
    std::vector<cplx> value;
    int crossings = 0; // sign changes of |beta| - 1, the saddle itself counting as inside
    PathEnd end = PathEnd::LengthCap;
};

// One path per steepest direction leaving the saddle (n of each kind at order n).
std::vector<SteepestPath> trace_constant_ReE_path(const BandFunction& f, const SaddlePoint& s,
                                                   PathDirection direction);

struct DominantSaddles {
    std::vector<SaddlePoint> saddles; // all tied at the maximal Im E_s
    bool multiple = false;
    const SaddlePoint& primary() const { return saddles.front(); }
};

DominantSaddles dominant_saddle(const LatticeModel& model, int band = kAllBands);
DominantSaddles select_dominant(const std::vector<SaddlePoint>& saddles);

struct AsymptoticTerm {
    cplx prefactor;
    cplx energy;
    int order = 2;
};

// G(t) ~ sum_terms prefactor t^{-1/n} e^{-i energy t}
struct AsymptoticPrediction {
    double exponent = -0.5;
    cplx prefactor;
    cplx E_s;
    double validity_from = 0.0;
    std::vector<AsymptoticTerm> terms;
    std::vector<SaddlePoint> saddles;

    cplx evaluate(double t) const;
};

AsymptoticPrediction predict_local_green(const LatticeModel& model, int orbital = 0, int band = kAllBands);

DominantSaddles worldline_saddle(const LatticeModel& model, int band, double v);
AsymptoticPrediction predict_worldline_green(const LatticeModel& model, int band, double v, int orbital = 0);

} // namespace nhlat
