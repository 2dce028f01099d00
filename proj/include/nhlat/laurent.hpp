// laurent.hpp: Laurent polynomials in the Bloch factor beta, with polynomial root finding

#pragma once

#include <complex>
#include <span>
#include <vector>

namespace nhlat {

using cplx = std::complex<double>;

// sum_{p = lo}^{lo + n - 1} c_p beta^p. The zero polynomial has no coefficients.
class LaurentPoly {
public:
    LaurentPoly() = default;
    LaurentPoly(int min_power, std::vector<cplx> coeffs);

    static LaurentPoly constant(cplx c) { return LaurentPoly(0, {c}); }
    static LaurentPoly monomial(int power, cplx c) { return LaurentPoly(power, {c}); }

    bool is_zero() const { return coeffs_.empty(); }
    int min_power() const { return min_power_; }
    int max_power() const { return min_power_ + static_cast<int>(coeffs_.size()) - 1; }
    cplx coeff(int power) const;
    const std::vector<cplx>& coeffs() const { return coeffs_; }

    cplx operator()(cplx beta) const;
    LaurentPoly derivative() const;

    // Drops leading and trailing coefficients with |c| <= tol * max|c|.
    LaurentPoly trimmed(double rel_tol) const;

    // Ascending coefficients of beta^{-min_power} * P(beta), an ordinary polynomial.
    std::vector<cplx> cleared() const { return coeffs_; }

    LaurentPoly& operator+=(const LaurentPoly& o);
    LaurentPoly& operator-=(const LaurentPoly& o);
    LaurentPoly& operator*=(cplx s);

    friend LaurentPoly operator+(LaurentPoly a, const LaurentPoly& b) { return a += b; }
    friend LaurentPoly operator-(LaurentPoly a, const LaurentPoly& b) { return a -= b; }
    friend LaurentPoly operator*(LaurentPoly a, cplx s) { return a *= s; }
    friend LaurentPoly operator*(cplx s, LaurentPoly a) { return a *= s; }
    friend LaurentPoly operator*(const LaurentPoly& a, const LaurentPoly& b);

private:
    void normalize();

    int min_power_ = 0;
    std::vector<cplx> coeffs_;
};

struct RootCluster {
    cplx value;
    int multiplicity = 1;
};

// Roots of sum_i c_i z^i (ascending coefficients) via companion-matrix eigenvalues,
// polished with Newton. Roots closer than cluster_tol * max(1, |z|) are merged and
// re-polished as a multiple root.
std::vector<RootCluster> polynomial_roots(std::span<const cplx> ascending,
                                          double cluster_tol = 1e-4);

// All roots with multiplicity expanded; no clustering unless cluster_tol > 0.
std::vector<cplx> polynomial_roots_flat(std::span<const cplx> ascending, double cluster_tol = 0.0);

cplx evaluate_polynomial(std::span<const cplx> ascending, cplx z);

} // namespace nhlat
