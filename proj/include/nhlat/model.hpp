// model.hpp: dissipative 1D tight-binding models, Bloch matrices and real-space Hamiltonians
//
// Conventions
//   * Hopping block T_l holds amplitudes t_l^{ab} of the term c^dag_{x+l,a} c_{x,b}:
//     a rightward hop by l cells contributes beta^l to h(beta)_{ab} = sum_l t_l^{ab} beta^l.
//   * Real-space index of (cell x, orbital a) is q*x + a; for the ladders A = 0, B = 1.
//   * Ladder flux model: the A chain carries t_p e^{+i phi} on c^dag_{n+1,A} c_{n,A} and the
//     B chain carries t_p e^{-i phi} on c^dag_{n+1,B} c_{n,B}, which gives
//     h_z(beta) = i t_p sin(phi) (beta - 1/beta) + i gamma / 2.
//   * With this convention a Bloch mode of momentum k propagates in real space with velocity
//     -dRe E/dk.

#pragma once

#include <Eigen/Dense>
#include <Eigen/SparseCore>
#include <complex>
#include <string>
#include <vector>

#include "nhlat/laurent.hpp"

namespace nhlat {

enum class Boundary { Open, Periodic };

const char* to_string(Boundary b);
Boundary boundary_from_string(const std::string& s);

struct LadderParams {
    double t0 = 0.0;    // intracell A-B
    double t1 = 0.0;    // intercell A-B
    double tp = 0.0;    // same-sublattice hopping
    double gamma = 0.0; // loss on sublattice B
    double phi = 0.0;   // Peierls phase

    bool operator==(const LadderParams&) const = default;
};

class LatticeModel {
public:
    // blocks[l + range] is the q x q hopping block for offset l in [-range, range].
    LatticeModel(int orbitals, int range, std::vector<Eigen::MatrixXcd> blocks, std::string notes = {});

    int orbitals() const { return q_; }
    int range() const { return range_; }
    const Eigen::MatrixXcd& block(int offset) const;
    cplx hopping(int offset, int a, int b) const { return block(offset)(a, b); }
    const std::string& notes() const { return notes_; }

    // h(beta)_{ab} as Laurent polynomials, row-major q x q.
    const std::vector<LaurentPoly>& laurent_entries() const { return entries_; }
    const LaurentPoly& laurent_entry(int a, int b) const { return entries_[static_cast<std::size_t>(a * q_ + b)]; }

    bool same_hoppings(const LatticeModel& other, double tol = 0.0) const;

private:
    int q_;
    int range_;
    std::vector<Eigen::MatrixXcd> blocks_;
    std::vector<LaurentPoly> entries_;
    std::string notes_;
};

struct BlochMatrix {
    cplx beta;
    Eigen::MatrixXcd entries;
};

LatticeModel make_ladder_trivial(const LadderParams& params);
LatticeModel make_ladder_flux(const LadderParams& params);

BlochMatrix bloch(const LatticeModel& model, cplx beta);
// dh/dbeta
Eigen::MatrixXcd bloch_derivative(const LatticeModel& model, cplx beta);
inline BlochMatrix bloch_at_momentum(const LatticeModel& model, double k) {
    return bloch(model, std::polar(1.0, k));
}

Eigen::MatrixXcd real_space_hamiltonian(const LatticeModel& model, int cells, Boundary boundary);
Eigen::SparseMatrix<cplx> real_space_sparse(const LatticeModel& model, int cells, Boundary boundary);

} // namespace nhlat
