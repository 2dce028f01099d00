// dynamics.cpp: eigendecomposition, Runge-Kutta and momentum-space propagation

#include "nhlat/dynamics.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "nhlat/errors.hpp"
#include "nhlat/parallel.hpp"
#include "nhlat/spectral.hpp"

namespace nhlat {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
const cplx kMinusI(0.0, -1.0);

void check_times(const std::vector<double>& times) {
    if (times.empty()) throw DomainError("time list is empty");
    if (times.front() != 0.0) throw DomainError("time list must start at t = 0");
    for (std::size_t j = 1; j < times.size(); ++j)
        if (!(times[j] > times[j - 1])) throw DomainError("time list must be strictly increasing");
}

// Dormand-Prince 5(4) with FSAL, stepping exactly onto every output time.
template <class Emit>
void dormand_prince(const Eigen::SparseMatrix<cplx>& H, Eigen::VectorXcd y, const std::vector<double>& times,
                    double tol, Emit&& emit) {
    static constexpr double a21 = 1.0 / 5;
    static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
    static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
    static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                            a65 = -5103.0 / 18656;
    static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784, b6 = 11.0 / 84;
    static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                            e6 = 22.0 / 525, e7 = -1.0 / 40;

    auto rhs = [&](const Eigen::VectorXcd& v) -> Eigen::VectorXcd { return kMinusI * (H * v); };

    double t = 0.0;
    double h = 1e-2;
    Eigen::VectorXcd k1 = rhs(y);
    std::size_t out = 0;
    while (out < times.size() && times[out] <= t) emit(out++, y);
    while (out < times.size()) {
        const double target = times[out];
        const bool clamped = t + h >= target;
        const double step = clamped ? target - t : h;
        const Eigen::VectorXcd k2 = rhs(y + step * (a21 * k1));
        const Eigen::VectorXcd k3 = rhs(y + step * (a31 * k1 + a32 * k2));
        const Eigen::VectorXcd k4 = rhs(y + step * (a41 * k1 + a42 * k2 + a43 * k3));
        const Eigen::VectorXcd k5 = rhs(y + step * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4));
        const Eigen::VectorXcd k6 = rhs(y + step * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5));
        const Eigen::VectorXcd y_new = y + step * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
        const Eigen::VectorXcd k7 = rhs(y_new);
        const Eigen::VectorXcd err = step * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
        const double ref = std::max({y.cwiseAbs().maxCoeff(), y_new.cwiseAbs().maxCoeff(), 1e-300});
        const double ratio = err.cwiseAbs().maxCoeff() / (tol * ref);
        const double factor = ratio > 0.0 ? 0.9 * std::pow(ratio, -0.2) : 5.0;
        if (ratio <= 1.0) {
            y = y_new;
            k1 = k7;
            t = clamped ? target : t + step;
            if (!clamped) h = step * std::clamp(factor, 0.2, 5.0);
            while (out < times.size() && times[out] <= t) emit(out++, y);
        } else {
            h = step * std::clamp(factor, 0.1, 0.9);
            if (h < 1e-14 * std::max(1.0, t)) throw StallError("Runge-Kutta step size underflow");
        }
    }
}

std::string condition_note(const Biorthogonal& e) {
    std::ostringstream os;
    os.precision(3);
    if (e.condition > kExceptionalCondition)
        os << "eigenvector condition number " << e.condition << " exceeds 1e8";
    else
        os << "defective eigenvalue pair";
    os << "; evolved with adaptive Runge-Kutta";
    return os.str();
}

} // namespace

const char* to_string(Method m) {
    switch (m) {
    case Method::Eigen: return "eig";
    case Method::RungeKutta: return "rk";
    default: return "momentum";
    }
}

Method method_from_string(const std::string& s) {
    if (s == "eig") return Method::Eigen;
    if (s == "rk") return Method::RungeKutta;
    if (s == "momentum") return Method::Momentum;
    throw ConfigError("unknown evolution method '" + s + "' (expected eig, rk or momentum)");
}

std::vector<double> GreensSeries::magnitudes() const {
    std::vector<double> out(values.size());
    for (std::size_t j = 0; j < values.size(); ++j) out[j] = std::abs(values[j]);
    return out;
}

Propagator::Propagator(const LatticeModel& model, int cells, Boundary boundary, const EvolutionPlan& plan)
    : model_(model), cells_(cells), boundary_(boundary), plan_(plan), method_(plan.method),
      dim_(model.orbitals() * cells) {
    if (!(plan.tolerance > 0.0)) throw DomainError("tolerance must be positive");
    sparse_ = real_space_sparse(model, cells, boundary);
    if (method_ == Method::Momentum) {
        if (boundary != Boundary::Periodic) throw DomainError("the momentum method requires PBC");
        blocks_.resize(static_cast<std::size_t>(cells));
        parallel_for(blocks_.size(), [&](std::size_t j) {
            MomentumBlock& b = blocks_[j];
            b.bloch = bloch_at_momentum(model_, kTwoPi * static_cast<double>(j) / cells_).entries;
            const Biorthogonal e = biorthogonal_eig(b.bloch, false);
            b.exceptional = e.exceptional();
            b.values = e.values;
            b.right = e.right;
            b.left = e.left;
        });
    } else if (method_ == Method::Eigen) {
        const Biorthogonal e = biorthogonal_eig(Eigen::MatrixXcd(sparse_), false);
        if (e.exceptional()) {
            method_ = Method::RungeKutta;
            note_ = condition_note(e);
        } else {
            eigenvalues_ = e.values;
            right_ = e.right;
            left_ = e.left;
        }
    }
}

Eigen::MatrixXcd Propagator::bloch_propagator(std::size_t j, double t) const {
    const MomentumBlock& b = blocks_[j];
    if (b.exceptional) return (kMinusI * t * b.bloch).exp();
    const Eigen::VectorXcd phase = (kMinusI * t * b.values.array()).exp();
    return b.right * phase.asDiagonal() * b.left;
}

std::vector<Eigen::VectorXcd> Propagator::evolve(const Eigen::VectorXcd& initial, const std::vector<double>& times) const {
    if (initial.size() != dim_) throw DomainError("initial state has the wrong dimension");
    check_times(times);
    std::vector<Eigen::VectorXcd> out(times.size());
    switch (method_) {
    case Method::Eigen: {
        const Eigen::VectorXcd c = left_ * initial;
        parallel_for(times.size(), [&](std::size_t j) {
            const Eigen::VectorXcd phase = (kMinusI * times[j] * eigenvalues_.array()).exp();
            out[j] = right_ * (phase.array() * c.array()).matrix();
        });
        break;
    }
    case Method::Momentum: {
        const int q = model_.orbitals();
        const auto L = static_cast<std::size_t>(cells_);
        std::vector<Eigen::VectorXcd> hat(L, Eigen::VectorXcd::Zero(q));
        for (std::size_t j = 0; j < L; ++j)
            for (int y = 0; y < cells_; ++y)
                hat[j] += std::polar(1.0, kTwoPi * static_cast<double>(j) * y / cells_) * initial.segment(q * y, q);
        parallel_for(times.size(), [&](std::size_t i) {
            Eigen::VectorXcd psi = Eigen::VectorXcd::Zero(dim_);
            for (std::size_t j = 0; j < L; ++j) {
                const Eigen::VectorXcd u = bloch_propagator(j, times[i]) * hat[j];
                for (int x = 0; x < cells_; ++x)
                    psi.segment(q * x, q) += std::polar(1.0, -kTwoPi * static_cast<double>(j) * x / cells_) * u;
            }
            out[i] = psi / static_cast<double>(cells_);
        });
        break;
    }
    case Method::RungeKutta:
        dormand_prince(sparse_, initial, times, plan_.tolerance,
                       [&](std::size_t j, const Eigen::VectorXcd& y) { out[j] = y; });
        break;
    }
    return out;
}

std::vector<cplx> Propagator::track(int col, const std::vector<double>& times,
                                    const std::function<int(std::size_t)>& row_at) const {
    if (col < 0 || col >= dim_) throw DomainError("initial site out of range");
    check_times(times);
    std::vector<cplx> out(times.size());
    switch (method_) {
    case Method::Eigen: {
        const Eigen::VectorXcd c = left_.col(col);
        parallel_for(times.size(), [&](std::size_t j) {
            const int row = row_at(j);
            cplx acc{};
            for (int n = 0; n < dim_; ++n) acc += right_(row, n) * c(n) * std::exp(kMinusI * eigenvalues_(n) * times[j]);
            out[j] = acc;
        });
        break;
    }
    case Method::Momentum: {
        const int q = model_.orbitals();
        const int x0 = col / q;
        const int a = col % q;
        parallel_for(times.size(), [&](std::size_t i) {
            const int row = row_at(i);
            const int x = row / q;
            const int b = row % q;
            cplx acc{};
            for (std::size_t j = 0; j < blocks_.size(); ++j) {
                const MomentumBlock& blk = blocks_[j];
                cplx u{};
                if (blk.exceptional) {
                    u = bloch_propagator(j, times[i])(b, a);
                } else {
                    for (int n = 0; n < q; ++n)
                        u += blk.right(b, n) * blk.left(n, a) * std::exp(kMinusI * blk.values(n) * times[i]);
                }
                acc += std::polar(1.0, -kTwoPi * static_cast<double>(j) * (x - x0) / cells_) * u;
            }
            out[i] = acc / static_cast<double>(cells_);
        });
        break;
    }
    case Method::RungeKutta: {
        Eigen::VectorXcd initial = Eigen::VectorXcd::Zero(dim_);
        initial(col) = 1.0;
        dormand_prince(sparse_, initial, times, plan_.tolerance,
                       [&](std::size_t j, const Eigen::VectorXcd& y) { out[j] = y(row_at(j)); });
        break;
    }
    }
    return out;
}

Trajectory evolve_state(const LatticeModel& model, int cells, Boundary boundary, const Eigen::VectorXcd& initial,
                        const std::vector<double>& times, const EvolutionPlan& plan) {
    if (std::abs(initial.norm() - 1.0) > 1e-10) throw DomainError("initial state must have unit norm");
    const Propagator p(model, cells, boundary, plan);
    Trajectory t;
    t.times = times;
    t.states = p.evolve(initial, times);
    t.method = p.method();
    t.note = p.note();
    return t;
}

GreensSeries local_green(const LatticeModel& model, int cells, Boundary boundary, int x0, int orbital,
                         const std::vector<double>& times, const EvolutionPlan& plan) {
    if (x0 < 0 || x0 >= cells) throw DomainError("x0 must lie in [0, L)");
    if (orbital < 0 || orbital >= model.orbitals()) throw DomainError("orbital index out of range");
    const Propagator p(model, cells, boundary, plan);
    const int site = model.orbitals() * x0 + orbital;
    GreensSeries s;
    s.times = times;
    s.values = p.track(site, times, [site](std::size_t) { return site; });
    s.meta = {cells, boundary, x0, orbital, GreenKind::Local, std::nullopt, p.method(), p.note()};
    return s;
}

GreensSeries worldline_green(const LatticeModel& model, int cells, int x0, double v, double t_max, int orbital,
                             const EvolutionPlan& plan) {
    if (v == 0.0 || !std::isfinite(v)) throw ZeroVelocity("world-line velocity must be nonzero");
    if (x0 < 0 || x0 >= cells) throw DomainError("x0 must lie in [0, L)");
    if (orbital < 0 || orbital >= model.orbitals()) throw DomainError("orbital index out of range");
    const double speed = std::abs(v);
    const int direction = v > 0 ? 1 : -1;
    const auto steps = static_cast<std::size_t>(std::floor(t_max * speed + 1e-9));
    std::vector<double> times(steps + 1);
    for (std::size_t j = 0; j <= steps; ++j) times[j] = static_cast<double>(j) / speed;

    const Propagator p(model, cells, Boundary::Periodic, plan);
    const int q = model.orbitals();
    const int site = q * x0 + orbital;
    GreensSeries s;
    s.times = times;
    s.values = p.track(site, times, [&](std::size_t j) {
        const long m = ((x0 + direction * static_cast<long>(j)) % cells + cells) % cells;
        return q * static_cast<int>(m) + orbital;
    });
    s.meta = {cells, Boundary::Periodic, x0, orbital, GreenKind::Worldline, v, p.method(), p.note()};
    return s;
}

double crossover_time(const LatticeModel& model, int cells, int n_k) {
    BandOptions opts;
    opts.refine = false;
    const BandSet bs = pbc_bands(model, n_k, opts);
    double fastest = 0.0;
    for (int n = 0; n < bs.band_count(); ++n) {
        double vmax = -std::numeric_limits<double>::infinity();
        double vmin = std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < bs.size(); ++j) {
            const double v = bs.slope(n, j).real();
            vmax = std::max(vmax, v);
            vmin = std::min(vmin, v);
        }
        fastest = std::max(fastest, std::max(vmax, 0.0) + std::abs(std::min(vmin, 0.0)));
    }
    if (fastest <= 0.0) return std::numeric_limits<double>::infinity();
    return cells / fastest;
}

GreensSeries quadrature_green(const LatticeModel& model, int x0, int orbital, const std::vector<double>& times, int n_k) {
    if (orbital < 0 || orbital >= model.orbitals()) throw DomainError("orbital index out of range");
    if (n_k < 1) throw DomainError("N_k must be positive");
    check_times(times);
    const auto nk = static_cast<std::size_t>(n_k);
    std::vector<Eigen::VectorXcd> energies(nk);
    std::vector<Eigen::VectorXcd> weights(nk);
    parallel_for(nk, [&](std::size_t j) {
        const Biorthogonal e = biorthogonal_eig(bloch_at_momentum(model, kTwoPi * static_cast<double>(j) / n_k).entries);
        energies[j] = e.values;
        weights[j] = (e.right.row(orbital).transpose().array() * e.left.col(orbital).array()).matrix();
    });
    GreensSeries s;
    s.times = times;
    s.values.resize(times.size());
    parallel_for(times.size(), [&](std::size_t i) {
        cplx acc{};
        for (std::size_t j = 0; j < nk; ++j)
            acc += (weights[j].array() * (kMinusI * times[i] * energies[j].array()).exp()).sum();
        s.values[i] = acc / static_cast<double>(n_k);
    });
    s.meta = {0, Boundary::Periodic, x0, orbital, GreenKind::Local, std::nullopt, Method::Momentum, "k-quadrature"};
    return s;
}

std::vector<double> log_time_grid(double t_max, int per_decade, double t_min) {
    if (!(t_max > t_min) || !(t_min > 0.0) || per_decade < 1) throw DomainError("invalid log time grid");
    std::vector<double> out{0.0};
    const double decades = std::log10(t_max / t_min);
    const auto n = static_cast<int>(std::ceil(decades * per_decade));
    for (int i = 0; i <= n; ++i) out.push_back(t_min * std::pow(10.0, decades * i / n));
    return out;
}

std::vector<double> linear_time_grid(double t_max, double dt) {
    if (!(dt > 0.0) || !(t_max >= 0.0)) throw DomainError("invalid linear time grid");
    const auto n = static_cast<std::size_t>(std::llround(t_max / dt));
    std::vector<double> out(n + 1);
    for (std::size_t j = 0; j <= n; ++j) out[j] = dt * static_cast<double>(j);
    return out;
}

} // namespace nhlat
