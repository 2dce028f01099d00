// asymptotics.cpp: saddle search, order classification, steepest paths and predictions

#include "nhlat/asymptotics.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>

#include "nhlat/errors.hpp"

namespace nhlat {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr int kCauchyNodes = 64;

// c_p of func about z0 on a circle of radius r, p = 0..pmax.
std::vector<cplx> cauchy_taylor(const std::function<cplx(cplx)>& func, cplx z0, double r, int pmax,
                                double* local_scale = nullptr) {
    std::vector<cplx> samples(kCauchyNodes);
    const cplx centre = func(z0);
    double scale = 0.0;
    for (int j = 0; j < kCauchyNodes; ++j) {
        const double theta = 2.0 * kPi * j / kCauchyNodes;
        samples[static_cast<std::size_t>(j)] = func(z0 + std::polar(r, theta)) - centre;
        scale = std::max(scale, std::abs(samples[static_cast<std::size_t>(j)]));
    }
    std::vector<cplx> c(static_cast<std::size_t>(pmax) + 1);
    c[0] = centre;
    for (int p = 1; p <= pmax; ++p) {
        cplx acc{};
        for (int j = 0; j < kCauchyNodes; ++j)
            acc += samples[static_cast<std::size_t>(j)] * std::polar(1.0, -2.0 * kPi * p * j / kCauchyNodes);
        c[static_cast<std::size_t>(p)] = acc / (static_cast<double>(kCauchyNodes) * std::pow(r, p));
    }
    if (local_scale) *local_scale = scale;
    return c;
}

double factorial(int n) { return std::tgamma(n + 1.0); }

double auto_radius(const BandFunction& f, cplx beta_s, const std::vector<cplx>& others) {
    double d = std::abs(beta_s);
    for (const auto& b : f.branch_points()) d = std::min(d, std::abs(b - beta_s));
    for (const auto& o : others)
        if (std::abs(o - beta_s) > 1e-8) d = std::min(d, std::abs(o - beta_s));
    return std::max(0.1 * d, 1e-3);
}

int order_from_taylor(const std::vector<cplx>& c, double r, double scale) {
    for (int p = 2; p <= kMaxSaddleOrder; ++p)
        if (std::abs(c[static_cast<std::size_t>(p)]) * std::pow(r, p) > 1e-6 * scale) return p;
    return 0;
}

std::vector<cplx> critical_candidates(const BandFunction& f, std::vector<int>* multiplicity) {
    const LaurentPoly p = f.critical_polynomial().trimmed(1e-15);
    std::vector<cplx> out;
    if (p.is_zero() || p.max_power() == p.min_power()) return out;
    for (const auto& c : polynomial_roots(p.cleared(), 1e-4)) {
        if (std::abs(c.value) < 1e-12) continue;
        out.push_back(c.value);
        if (multiplicity) multiplicity->push_back(c.multiplicity);
    }
    return out;
}

// Newton on f' using f''; only meaningful for simple saddles.
BandFunction::Germ polish(const BandFunction& f, BandFunction::Germ g) {
    BandFunction::Germ best = g;
    double best_res = std::abs(f.derivative(g));
    for (int it = 0; it < 30 && best_res > 0.0; ++it) {
        const cplx dd = f.second_derivative(g);
        if (std::abs(dd) < 1e-10 * f.scale()) break;
        const cplx step = f.derivative(g) / dd;
        if (!std::isfinite(std::abs(step)) || std::abs(step) > 1e-2 * std::abs(g.beta)) break;
        f.advance(g, g.beta - step);
        const double res = std::abs(f.derivative(g));
        if (res < best_res) {
            best_res = res;
            best = g;
        }
        if (std::abs(step) < 1e-16 * std::abs(g.beta)) break;
    }
    return best;
}

int sheet_of(const BandFunction& f, const BandFunction::Germ& g) {
    if (f.sheet_count() == 1) return 0;
    const cplx principal = f.germ(g.beta, 0).root;
    return std::abs(g.root - principal) <= std::abs(g.root + principal) ? 0 : 1;
}

double unit_circle_ceiling(const LatticeModel& model) {
    double top = -std::numeric_limits<double>::infinity();
    constexpr int kSamples = 1024;
    for (int j = 0; j < kSamples; ++j) {
        Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(bloch_at_momentum(model, 2.0 * kPi * j / kSamples).entries, false);
        top = std::max(top, es.eigenvalues().imag().maxCoeff());
    }
    return top;
}

std::vector<SaddlePoint> find_saddles(const LatticeModel& model, int band, double drift, const SaddleOptions& options) {
    const int q = model.orbitals();
    if (band != kAllBands && (band < 0 || band >= q)) throw DomainError("band index out of range");
    const BandFunction base(model, 0, drift);
    std::vector<int> mult;
    const std::vector<cplx> candidates = critical_candidates(base, &mult);
    for (const auto& c : candidates)
        for (const auto& b : base.branch_points())
            if (std::abs(c - b) < 1e-8)
                throw BranchPointCollision("saddle candidate coincides with a square-root branch point");

    std::vector<SaddlePoint> out;
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        for (int s = 0; s < q; ++s) {
            const BandFunction f(model, s, drift);
            BandFunction::Germ g = f.germ(candidates[i]);
            if (std::abs(f.derivative(g)) > 1e-6 * f.scale()) continue;
            if (mult[i] == 1) g = polish(f, g);
            const int sheet = sheet_of(f, g);
            if (band != kAllBands && sheet != band) continue;
            bool dup = false;
            for (const auto& o : out)
                if (o.band == sheet && std::abs(o.beta_s - g.beta) < 1e-8) dup = true;
            if (dup) continue;

            const BandFunction fs(model, sheet, drift);
            const double r = options.radius ? *options.radius : auto_radius(fs, g.beta, candidates);
            const OrderInfo info = saddle_order(fs, g, r);
            SaddlePoint sp;
            sp.band = sheet;
            sp.beta_s = g.beta;
            sp.order = info.order;
            sp.multiplicity = mult[i];
            sp.E_s = fs.value(g);
            sp.lead_deriv = info.lead_deriv;
            sp.on_unit_circle = std::abs(std::abs(g.beta) - 1.0) < 1e-8;
            sp.drift = drift;
            sp.radius = info.radius;
            sp.taylor = info.taylor;
            sp.root = g.root;
            out.push_back(std::move(sp));
        }
    }
    std::sort(out.begin(), out.end(), [](const SaddlePoint& a, const SaddlePoint& b) {
        if (a.beta_s.real() != b.beta_s.real()) return a.beta_s.real() < b.beta_s.real();
        if (a.beta_s.imag() != b.beta_s.imag()) return a.beta_s.imag() < b.beta_s.imag();
        return a.band < b.band;
    });

    if (options.classify_parity) {
        for (auto& sp : out) {
            const BandFunction f(model, sp.band, drift);
            try {
                int total = 0;
                for (const auto& path : trace_constant_ReE_path(f, sp, PathDirection::Ascent)) total += path.crossings;
                sp.crossings = total;
                // A saddle on |beta| = 1 lies on the integration contour itself, which
                // passes through it; it contributes regardless of the crossing count.
                sp.parity = (total % 2 || sp.on_unit_circle) ? Parity::Nonzero : Parity::Zero;
            } catch (const StallError&) {
                sp.parity = Parity::Unknown;
            }
        }
    }
    return out;
}

BandFunction::Germ anchor(const BandFunction& f, const SaddlePoint& s) {
    BandFunction::Germ g = f.germ(s.beta_s);
    g.root = s.root;
    return g;
}

// Steepest-descent ray angles for f ~ f_s + c z^n under exp(-i f t).
std::vector<double> descent_angles(cplx c, int n) {
    std::vector<double> out;
    for (int m = 0; m < n; ++m) out.push_back((-0.5 * kPi - std::arg(c) + 2.0 * kPi * m) / n);
    return out;
}

double angular_distance(double a, double b) { return std::abs(std::remainder(a - b, 2.0 * kPi)); }

double closest_angle(const std::vector<double>& rays, double target) {
    double best = rays.front();
    for (double r : rays)
        if (angular_distance(r, target) < angular_distance(best, target)) best = r;
    return best;
}

// Integral of exp(-i (f - f_s) t) through an order-n saddle, entering against and leaving
// along `tangent`, without the t^{-1/n} factor.
cplx saddle_integral(cplx c, int n, double tangent) {
    const std::vector<double> rays = descent_angles(c, n);
    const double out = closest_angle(rays, tangent);
    const double in = closest_angle(rays, tangent + kPi);
    return (std::polar(1.0, out) - std::polar(1.0, in)) * std::tgamma(1.0 / n) /
           (n * std::pow(std::abs(c), 1.0 / n));
}

double validity(cplx c_n, cplx c_next, cplx log_deriv, int n) {
    const double a = std::abs(c_n);
    const double x = std::max(std::abs(c_next) / std::pow(a, (n + 1.0) / n), std::abs(log_deriv) / std::pow(a, 1.0 / n));
    return std::pow(x / 0.1, n);
}

AsymptoticPrediction assemble(std::vector<AsymptoticTerm> terms, std::vector<SaddlePoint> saddles, double valid_from) {
    AsymptoticPrediction p;
    int n = 0;
    for (const auto& t : terms) n = std::max(n, t.order);
    p.exponent = -1.0 / n;
    p.prefactor = terms.front().prefactor;
    p.E_s = terms.front().energy;
    p.validity_from = valid_from;
    p.terms = std::move(terms);
    p.saddles = std::move(saddles);
    return p;
}

} // namespace

const char* to_string(Parity p) {
    switch (p) {
    case Parity::Zero: return "zero";
    case Parity::Nonzero: return "nonzero";
    default: return "unknown";
    }
}

OrderInfo saddle_order(const BandFunction& f, const BandFunction::Germ& at, double radius) {
    OrderInfo info;
    info.radius = radius;
    double scale = 0.0;
    info.taylor = cauchy_taylor([&](cplx z) { return f.value_near(at, z); }, at.beta, radius, kMaxSaddleOrder + 1, &scale);
    info.order = order_from_taylor(info.taylor, radius, scale);
    if (info.order == 0) throw OrderUndetermined("no derivative of order <= 8 exceeds the threshold");
    info.lead_deriv = info.taylor[static_cast<std::size_t>(info.order)] * factorial(info.order);
    return info;
}

OrderInfo saddle_order(const BandFunction& f, cplx beta_s, std::optional<double> radius) {
    const BandFunction::Germ g = f.germ(beta_s);
    double r = 0.0;
    if (radius) {
        r = *radius;
    } else {
        r = auto_radius(f, beta_s, critical_candidates(f, nullptr));
    }
    return saddle_order(f, g, r);
}

std::vector<SaddlePoint> saddle_points(const LatticeModel& model, int band, const SaddleOptions& options) {
    return find_saddles(model, band, 0.0, options);
}

std::vector<SaddlePoint> drift_saddle_points(const LatticeModel& model, int band, double v, const SaddleOptions& options) {
    return find_saddles(model, band, v, options);
}

std::vector<SteepestPath> trace_constant_ReE_path(const BandFunction& f, const SaddlePoint& s, PathDirection direction) {
    const double sign = direction == PathDirection::Ascent ? 1.0 : -1.0;
    const int n = s.order;
    const cplx c = s.taylor.size() > static_cast<std::size_t>(n) ? s.taylor[static_cast<std::size_t>(n)]
                                                                  : s.lead_deriv / factorial(n);
    const double base = direction == PathDirection::Ascent ? 0.5 * kPi : -0.5 * kPi;
    const BandFunction::Germ start = anchor(f, s);
    const cplx f_s = f.value(start);
    const double scale = f.scale();
    const double ceiling = unit_circle_ceiling(f.model()) + 0.05 * scale;
    const double floor_im = f_s.imag() - 20.0 * scale;
    const double re_tol = 1e-8 * scale;
    const double eps = std::min((n == 2 ? 1e-4 : 1e-2) * std::abs(s.beta_s), 0.5 * std::max(s.radius, 1e-3));

    // Side of |beta| = 1 with a small hysteresis band, so that paths running along the
    // circle do not register spurious crossings.
    constexpr double kBand = 1e-9;
    auto side_of = [](cplx b, bool previous) {
        const double d = std::abs(b) - 1.0;
        if (d > kBand) return false;
        if (d < -kBand) return true;
        return previous;
    };
    auto project = [&](BandFunction::Germ& g) {
        for (int it = 0; it < 8; ++it) {
            const double dre = f.value(g).real() - f_s.real();
            if (std::abs(dre) < 1e-13 * scale) break;
            const cplx d = f.derivative(g);
            f.advance(g, g.beta - dre * std::conj(d) / std::norm(d));
        }
    };
    auto velocity = [&](const BandFunction::Germ& g) {
        const cplx d = f.derivative(g);
        return sign * cplx(0.0, 1.0) * std::conj(d) / std::abs(d);
    };

    std::vector<SteepestPath> paths;
    for (int m = 0; m < n; ++m) {
        SteepestPath path;
        path.start_angle = (base - std::arg(c) + 2.0 * kPi * m) / n;
        path.beta.push_back(s.beta_s);
        path.value.push_back(f_s);
        BandFunction::Germ g = start;
        f.advance(g, s.beta_s + std::polar(eps, path.start_angle));
        project(g);
        bool side = side_of(s.beta_s, true);
        auto record = [&](const BandFunction::Germ& at) {
            path.beta.push_back(at.beta);
            path.value.push_back(f.value(at));
            const bool now = side_of(at.beta, side);
            if (now != side) ++path.crossings;
            side = now;
        };
        record(g);

        double h = eps;
        double arc = 0.0;
        for (int step = 0;; ++step) {
            const double im = path.value.back().imag();
            const double rad = std::abs(g.beta);
            if (rad < 1e-3 || rad > 1e3) {
                path.end = PathEnd::LeftAnnulus;
                break;
            }
            if ((direction == PathDirection::Ascent && im > ceiling) ||
                (direction == PathDirection::Descent && im < floor_im)) {
                path.end = PathEnd::Saturated;
                break;
            }
            if (step > 200000 || arc > 1e4) {
                path.end = PathEnd::LengthCap;
                break;
            }
            if (std::abs(f.derivative(g)) < 1e-14 * scale)
                throw StallError("steepest path ran into a stationary point (Stokes configuration)");

            const double h_max = 0.05 * rad;
            h = std::min(h, h_max);
            bool accepted = false;
            while (!accepted) {
                if (h < 1e-13 * std::max(rad, 1.0)) {
                    // The flow converging onto a point where f' is small means the path ends on
                    // another saddle, possibly via a branch point onto the other sheet.
                    if (std::abs(f.derivative(g)) < 1e-6 * scale)
                        throw StallError("steepest path ran into a stationary point (Stokes configuration)");
                    throw StallError("step control collapsed while tracing a steepest path");
                }
                const cplx k1 = velocity(g);
                BandFunction::Germ mid = g;
                f.advance(mid, g.beta + h * k1);
                const cplx k2 = velocity(mid);
                BandFunction::Germ next = g;
                f.advance(next, g.beta + 0.5 * h * (k1 + k2));
                const bool root_jump = std::abs(next.root - g.root) > 0.5 * std::abs(g.root) + 1e-300 && g.root != cplx{};
                const double drift_re = std::abs(f.value(next).real() - f_s.real());
                if (root_jump && h < 1e-8 * std::max(rad, 1.0)) {
                    // At a square-root branch point the path continues onto the other
                    // sheet: in the local coordinate u = sqrt(beta - b) it passes u -> -u.
                    BandFunction::Germ flipped = g;
                    flipped.root = -flipped.root;
                    if (sign * (f.value(flipped).imag() - im) > 0.0) {
                        g = flipped;
                        accepted = true;
                        continue;
                    }
                }
                if (root_jump || drift_re > re_tol) {
                    h *= 0.5;
                    continue;
                }
                project(next);
                const double next_im = f.value(next).imag();
                if (sign * (next_im - im) <= 0.0) {
                    h *= 0.5;
                    continue;
                }
                arc += std::abs(next.beta - g.beta);
                g = next;
                accepted = true;
            }
            record(g);
            h = std::min(1.5 * h, h_max);
        }
        paths.push_back(std::move(path));
    }
    return paths;
}

DominantSaddles select_dominant(const std::vector<SaddlePoint>& saddles) {
    DominantSaddles out;
    double best = -std::numeric_limits<double>::infinity();
    for (const auto& s : saddles)
        if (s.parity == Parity::Nonzero) best = std::max(best, s.E_s.imag());
    if (!std::isfinite(best)) throw NoContributingSaddle("no saddle has an odd ascent-path crossing count");
    for (const auto& s : saddles)
        if (s.parity == Parity::Nonzero && std::abs(s.E_s.imag() - best) < 1e-6) out.saddles.push_back(s);
    out.multiple = out.saddles.size() > 1;
    return out;
}

DominantSaddles dominant_saddle(const LatticeModel& model, int band) {
    return select_dominant(saddle_points(model, band));
}

cplx AsymptoticPrediction::evaluate(double t) const {
    cplx acc{};
    for (const auto& term : terms)
        acc += term.prefactor * std::pow(t, -1.0 / term.order) * std::exp(cplx(0.0, -1.0) * term.energy * t);
    return acc;
}

AsymptoticPrediction predict_local_green(const LatticeModel& model, int orbital, int band) {
    if (orbital < 0 || orbital >= model.orbitals()) throw DomainError("orbital index out of range");
    const DominantSaddles dom = dominant_saddle(model, band);
    std::vector<AsymptoticTerm> terms;
    double valid_from = 0.0;
    for (const auto& s : dom.saddles) {
        const BandFunction f(model, s.band);
        const BandFunction::Germ g = anchor(f, s);
        const cplx w = f.weight(g, orbital, orbital);
        if (std::abs(w) < 1e-12) throw VanishingResidue("g^{aa} vanishes at the dominant saddle");
        const int n = s.order;
        const cplx c = s.taylor[static_cast<std::size_t>(n)];
        const cplx amp = w / (cplx(0.0, 2.0 * kPi) * s.beta_s) * saddle_integral(c, n, std::arg(cplx(0.0, 1.0) * s.beta_s));
        terms.push_back({amp, s.E_s, n});

        // Relative size of the first correction: next Taylor term and the slope of g / beta.
        const std::vector<cplx> gt = cauchy_taylor(
            [&](cplx z) {
                BandFunction::Germ h = g;
                f.advance(h, z);
                return f.weight(h, orbital, orbital) / z;
            },
            s.beta_s, s.radius, 1);
        valid_from = std::max(valid_from, validity(c, s.taylor[static_cast<std::size_t>(n + 1)], gt[1] / gt[0], n));
    }
    return assemble(std::move(terms), dom.saddles, valid_from);
}

DominantSaddles worldline_saddle(const LatticeModel& model, int band, double v) {
    return select_dominant(drift_saddle_points(model, band, v));
}

AsymptoticPrediction predict_worldline_green(const LatticeModel& model, int band, double v, int orbital) {
    if (orbital < 0 || orbital >= model.orbitals()) throw DomainError("orbital index out of range");
    const DominantSaddles dom = worldline_saddle(model, band, v);
    std::vector<AsymptoticTerm> terms;
    double valid_from = 0.0;
    for (const auto& s : dom.saddles) {
        const BandFunction f(model, s.band, v);
        BandFunction::Germ g = anchor(f, s);
        double arg = std::arg(s.beta_s);
        if (arg <= 0.0) arg += 2.0 * kPi;
        g.arg = arg;
        const cplx k_s(arg, -std::log(std::abs(s.beta_s)));
        const cplx w = f.weight(g, orbital, orbital);
        if (std::abs(w) < 1e-12) throw VanishingResidue("g^{aa} vanishes at the world-line saddle");

        // Taylor data in the momentum variable, beta = e^{ik}.
        const double r_k = s.radius / std::abs(s.beta_s);
        const auto in_k = [&](cplx k) { return std::exp(cplx(0.0, 1.0) * k); };
        const std::vector<cplx> fk = cauchy_taylor([&](cplx k) { return f.value_near(g, in_k(k)); }, k_s, r_k, s.order + 1);
        const std::vector<cplx> gk = cauchy_taylor(
            [&](cplx k) {
                BandFunction::Germ h = g;
                f.advance(h, in_k(k));
                return f.weight(h, orbital, orbital);
            },
            k_s, r_k, 1);
        const int n = s.order;
        const cplx c = fk[static_cast<std::size_t>(n)];
        const cplx amp = w / (2.0 * kPi) * saddle_integral(c, n, 0.0);
        terms.push_back({amp, fk[0], n});
        valid_from = std::max(valid_from, validity(c, fk[static_cast<std::size_t>(n + 1)], gk[1] / gk[0], n));
    }
    return assemble(std::move(terms), dom.saddles, valid_from);
}

} // namespace nhlat
