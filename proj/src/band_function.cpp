// band_function.cpp: sheet-continued band energies for q <= 2

#include "nhlat/band_function.hpp"

#include <cmath>

#include "nhlat/errors.hpp"

namespace nhlat {

namespace {

double max_coeff(const LaurentPoly& p) {
    double m = 0.0;
    for (const auto& c : p.coeffs()) m = std::max(m, std::abs(c));
    return m;
}

} // namespace

BandFunction::BandFunction(const LatticeModel& model, int sheet, double drift)
    : model_(model), sheet_(sheet), drift_(drift), scale_(0.0) {
    const int q = model_.orbitals();
    if (q > 2) throw Unsupported("analytic band functions are implemented for q <= 2");
    if (sheet < 0 || sheet >= q) throw DomainError("sheet index out of range");
    for (int l = -model_.range(); l <= model_.range(); ++l)
        scale_ += model_.block(l).cwiseAbs().rowwise().sum().maxCoeff();

    if (q == 1) {
        a_ = model_.laurent_entry(0, 0);
    } else {
        const LaurentPoly& h00 = model_.laurent_entry(0, 0);
        const LaurentPoly& h01 = model_.laurent_entry(0, 1);
        const LaurentPoly& h10 = model_.laurent_entry(1, 0);
        const LaurentPoly& h11 = model_.laurent_entry(1, 1);
        a_ = (h00 + h11) * cplx(0.5);
        const LaurentPoly half_diff = (h00 - h11) * cplx(0.5);
        D_ = half_diff * half_diff + h01 * h10;
        dD_ = D_.derivative();
        ddD_ = dD_.derivative();
        if (!D_.is_zero() && D_.max_power() > D_.min_power()) {
            const LaurentPoly trimmed = D_.trimmed(1e-15);
            for (const auto& r : polynomial_roots_flat(trimmed.cleared(), 1e-8))
                if (r != cplx{}) branch_points_.push_back(r);
        }
    }
    da_ = a_.derivative();
    if (max_coeff(da_) < 1e-13 * scale_) da_ = LaurentPoly();
    dda_ = da_.derivative();
    symmetric_ = q == 2 && da_.is_zero() && drift_ == 0.0;
}

BandFunction::Germ BandFunction::germ(cplx beta) const { return germ(beta, sheet_); }

BandFunction::Germ BandFunction::germ(cplx beta, int sheet) const {
    if (beta == cplx{}) throw DomainError("beta = 0 is a singular point of the band function");
    cplx root{};
    if (model_.orbitals() == 2) {
        root = std::sqrt(D_(beta));
        if (sheet == 1) root = -root;
    }
    return {beta, root, std::arg(beta)};
}

void BandFunction::advance(Germ& g, cplx beta) const {
    if (beta == cplx{}) throw DomainError("beta = 0 is a singular point of the band function");
    if (model_.orbitals() == 2) {
        const cplx r = std::sqrt(D_(beta));
        g.root = std::abs(r - g.root) <= std::abs(r + g.root) ? r : -r;
    }
    g.arg += std::arg(beta / g.beta);
    g.beta = beta;
}

cplx BandFunction::value(const Germ& g) const {
    cplx e = a_(g.beta) + g.root;
    if (drift_ != 0.0) e += cplx(drift_ * g.arg, -drift_ * std::log(std::abs(g.beta)));
    return e;
}

cplx BandFunction::derivative(const Germ& g) const {
    cplx d = da_(g.beta);
    if (model_.orbitals() == 2) {
        const cplx dD = dD_(g.beta);
        if (dD != cplx{}) d += dD / (2.0 * g.root);
    }
    if (drift_ != 0.0) d -= cplx(0.0, drift_) / g.beta;
    return d;
}

cplx BandFunction::second_derivative(const Germ& g) const {
    cplx d = dda_(g.beta);
    if (model_.orbitals() == 2) {
        const cplx dD = dD_(g.beta);
        d += ddD_(g.beta) / (2.0 * g.root) - dD * dD / (4.0 * g.root * g.root * g.root);
    }
    if (drift_ != 0.0) d += cplx(0.0, drift_) / (g.beta * g.beta);
    return d;
}

cplx BandFunction::weight(const Germ& g, int a, int b) const {
    if (model_.orbitals() == 1) return 1.0;
    // Spectral projector (h - E_other) / (E - E_other) with E - E_other = 2 root.
    const cplx other = a_(g.beta) - g.root;
    cplx num = model_.laurent_entry(a, b)(g.beta);
    if (a == b) num -= other;
    return num / (2.0 * g.root);
}

cplx BandFunction::value_near(const Germ& anchor, cplx beta) const {
    Germ g = anchor;
    advance(g, beta);
    return value(g);
}

LaurentPoly BandFunction::critical_polynomial() const {
    const LaurentPoly beta = LaurentPoly::monomial(1, 1.0);
    const LaurentPoly drift_term = LaurentPoly::constant(cplx(0.0, drift_));
    if (model_.orbitals() == 1) return beta * da_ - drift_term;
    if (symmetric_) return dD_;
    const LaurentPoly lin = beta * da_ - drift_term;
    return LaurentPoly::constant(4.0) * D_ * lin * lin - beta * beta * dD_ * dD_;
}

} // namespace nhlat
