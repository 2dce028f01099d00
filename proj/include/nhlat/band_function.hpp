// band_function.hpp: analytic band energies E_n(beta) of one- and two-orbital models,
// optionally in a moving frame f(beta) = E(beta) - i v log(beta) (that is E(k) + v k with
// beta = e^{ik}).
//
// For q = 2 the bands are E = a +/- sqrt(D) with a = tr h / 2 and D = a^2 - det h. A Germ
// pins one branch of the square root (and of arg beta) and is carried along paths by
// continuity, so values stay on one sheet of the Riemann surface.

#pragma once

#include <vector>

#include "nhlat/model.hpp"

namespace nhlat {

class BandFunction {
public:
    struct Germ {
        cplx beta;
        cplx root;  // signed square root of D at beta (0 for q = 1)
        double arg; // continuous arg(beta)
    };

    // sheet 0 takes +sqrt(D), sheet 1 takes -sqrt(D), principal square root.
    BandFunction(const LatticeModel& model, int sheet, double drift = 0.0);

    const LatticeModel& model() const { return model_; }
    int sheet() const { return sheet_; }
    int sheet_count() const { return model_.orbitals(); }
    double drift() const { return drift_; }
    double scale() const { return scale_; }

    Germ germ(cplx beta) const;
    Germ germ(cplx beta, int sheet) const;
    // Moves the germ to `beta` by continuity; `beta` must be close to g.beta.
    void advance(Germ& g, cplx beta) const;

    cplx value(const Germ& g) const;
    cplx derivative(const Germ& g) const;
    cplx second_derivative(const Germ& g) const;
    // g^{ab} = R_a L_b on the germ's branch.
    cplx weight(const Germ& g, int a, int b) const;

    // Value at beta continued from an anchor germ, without mutating it.
    cplx value_near(const Germ& anchor, cplx beta) const;

    const std::vector<cplx>& branch_points() const { return branch_points_; }

    // Polynomial whose roots contain every zero of f' on every sheet.
    LaurentPoly critical_polynomial() const;
    bool trivially_symmetric() const { return symmetric_; }

private:
    LatticeModel model_;
    int sheet_;
    double drift_;
    double scale_;
    LaurentPoly a_, da_, dda_, D_, dD_, ddD_;
    std::vector<cplx> branch_points_;
    bool symmetric_ = false; // a' == 0 and no drift: f' = 0 on both sheets at once
};

} // namespace nhlat
