// spectral.hpp: PBC bands with biorthogonal eigendata, OBC spectra, point-gap winding,
// gap-closing momenta, group velocities and GBZ diagnostics.

#pragma once

#include <Eigen/Dense>
#include <vector>

#include "nhlat/model.hpp"

namespace nhlat {

// Right eigenvectors in the columns of `right`, left covectors in the rows of `left`,
// with left * right = I.
struct Biorthogonal {
    Eigen::VectorXcd values;
    Eigen::MatrixXcd right;
    Eigen::MatrixXcd left;
    double condition = 1.0; // ||R||_1 ||R^-1||_1
    bool defective = false; // a coalescing eigenvalue pair with parallel eigenvectors

    bool exceptional() const;
};

inline constexpr double kExceptionalCondition = 1e8;

// Round-off splits an exact exceptional point by ~sqrt(eps), which leaves the condition number
// just under 1e8; such pairs are caught by eigenvalue coalescence plus eigenvector parallelism.
inline constexpr double kCoalescence = 1e-6;
inline constexpr double kParallelSine = 1e-4;

// Throws ExceptionalPoint if `strict` is set and the decomposition is exceptional: condition
// number beyond kExceptionalCondition, or a defective pair.
Biorthogonal biorthogonal_eig(const Eigen::MatrixXcd& m, bool strict = true);

struct BandSet {
    LatticeModel model;
    std::vector<double> k_grid;             // k_j = 2 pi (j + 1) / N_k, in (0, 2 pi]
    std::vector<std::vector<cplx>> bands;   // bands[n][j]
    std::vector<Eigen::MatrixXcd> right;    // right[j].col(n) = R_n(k_j)
    std::vector<Eigen::MatrixXcd> left;     // left[j].row(n) = L_n(k_j)

    int band_count() const { return static_cast<int>(bands.size()); }
    std::size_t size() const { return k_grid.size(); }
    // g_n^{ab}(k_j) = R_{n,a} L_{n,b}
    cplx weight(int n, std::size_t j, int a, int b) const { return right[j](a, n) * left[j](n, b); }
    // dE_n/dk at k_j from the Hellmann-Feynman formula L_n h'(k) R_n.
    cplx slope(int n, std::size_t j) const;
    double max_step(int n) const;
    double diameter(int n) const;
};

struct BandOptions {
    bool refine = true;       // double N_k until steps are below step_fraction * diameter
    double step_fraction = 0.05;
    int max_points = 1 << 16;
};

BandSet pbc_bands(const LatticeModel& model, int n_k, const BandOptions& options = {});

std::vector<cplx> obc_spectrum(const LatticeModel& model, int cells);

struct WindingResult {
    cplx E_b;
    int W = 0;
    int N_k = 0;
    double phase_residual = 0.0;
};

WindingResult winding_number(const LatticeModel& model, cplx E_b, int n_k);

struct GapClosing {
    double k0;
    int band;
    cplx E;
};

inline constexpr double kGapTolerance = 1e-8;

std::vector<GapClosing> gap_closing_points(const LatticeModel& model, int n_k = 4096);

// d Re E_n / dk at k0, by Richardson-extrapolated centered differences.
double group_velocity(const BandSet& bands, int band, double k0);

struct CharRoots {
    std::vector<cplx> betas; // sorted by |beta|, with multiplicity
    bool deflated = false;   // leading coefficient was negligible and dropped
};

// det[h(beta) - E] as a Laurent polynomial in beta.
LaurentPoly char_poly(const LatticeModel& model, cplx E);
CharRoots char_poly_roots(const LatticeModel& model, cplx E);

struct GBZPoint {
    cplx E;
    std::vector<cplx> betas;
    double mid_ratio = 1.0; // |beta_{M+1}| / |beta_M|
    bool outlier = false;
};

std::vector<GBZPoint> gbz_check(const LatticeModel& model, int cells, double tol);

double hausdorff_distance(const std::vector<cplx>& a, const std::vector<cplx>& b);
std::vector<cplx> flatten(const BandSet& bands);

} // namespace nhlat
