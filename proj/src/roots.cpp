// roots.cpp: polynomial roots via companion matrix + Newton polishing

#include "nhlat/laurent.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

#include "nhlat/errors.hpp"

namespace nhlat {

cplx evaluate_polynomial(std::span<const cplx> a, cplx z) {
    cplx acc{};
    for (auto it = a.rbegin(); it != a.rend(); ++it) acc = acc * z + *it;
    return acc;
}

namespace {

std::vector<cplx> differentiate(std::span<const cplx> a) {
    std::vector<cplx> d;
    for (std::size_t i = 1; i < a.size(); ++i) d.push_back(a[i] * static_cast<double>(i));
    return d;
}

// Newton on p with derivative dp; keeps the best iterate by |p|.
cplx polish(std::span<const cplx> p, std::span<const cplx> dp, cplx z) {
    cplx best = z;
    double best_val = std::abs(evaluate_polynomial(p, z));
    for (int it = 0; it < 60 && best_val > 0.0; ++it) {
        const cplx d = evaluate_polynomial(dp, z);
        if (d == cplx{}) break;
        const cplx step = evaluate_polynomial(p, z) / d;
        z -= step;
        const double val = std::abs(evaluate_polynomial(p, z));
        if (val < best_val) {
            best_val = val;
            best = z;
        }
        if (std::abs(step) <= 1e-16 * std::max(1.0, std::abs(z))) break;
    }
    return best;
}

} // namespace

std::vector<RootCluster> polynomial_roots(std::span<const cplx> ascending, double cluster_tol) {
    std::vector<cplx> a(ascending.begin(), ascending.end());
    while (!a.empty() && a.back() == cplx{}) a.pop_back();
    if (a.empty()) throw DomainError("roots of the zero polynomial are undefined");

    int zero_roots = 0;
    while (a.size() > 1 && a.front() == cplx{}) {
        a.erase(a.begin());
        ++zero_roots;
    }

    std::vector<cplx> raw;
    const int degree = static_cast<int>(a.size()) - 1;
    if (degree == 1) {
        raw.push_back(-a[0] / a[1]);
    } else if (degree > 1) {
        Eigen::MatrixXcd companion = Eigen::MatrixXcd::Zero(degree, degree);
        for (int i = 1; i < degree; ++i) companion(i, i - 1) = 1.0;
        for (int i = 0; i < degree; ++i) companion(i, degree - 1) = -a[static_cast<std::size_t>(i)] / a.back();
        Eigen::ComplexEigenSolver<Eigen::MatrixXcd> solver(companion, false);
        if (solver.info() != Eigen::Success) throw EigensolverFailure("companion matrix eigensolver did not converge");
        for (int i = 0; i < degree; ++i) raw.push_back(solver.eigenvalues()(i));
    }

    std::vector<RootCluster> clusters;
    std::vector<std::vector<cplx>> members;
    for (const cplx& r : raw) {
        bool merged = false;
        for (std::size_t c = 0; c < clusters.size(); ++c) {
            if (std::abs(r - clusters[c].value) < cluster_tol * std::max(1.0, std::abs(r))) {
                members[c].push_back(r);
                cplx sum{};
                for (const auto& m : members[c]) sum += m;
                clusters[c].value = sum / static_cast<double>(members[c].size());
                clusters[c].multiplicity += 1;
                merged = true;
                break;
            }
        }
        if (!merged) {
            clusters.push_back({r, 1});
            members.push_back({r});
        }
    }

    // A root of multiplicity m is a simple root of the (m-1)-th derivative.
    for (auto& c : clusters) {
        std::vector<cplx> p = a;
        for (int k = 1; k < c.multiplicity; ++k) p = differentiate(p);
        const std::vector<cplx> dp = differentiate(p);
        c.value = polish(p, dp, c.value);
    }
    if (zero_roots > 0) clusters.push_back({cplx{}, zero_roots});
    return clusters;
}

std::vector<cplx> polynomial_roots_flat(std::span<const cplx> ascending, double cluster_tol) {
    std::vector<cplx> out;
    for (const auto& c : polynomial_roots(ascending, cluster_tol))
        for (int i = 0; i < c.multiplicity; ++i) out.push_back(c.value);
    return out;
}

} // namespace nhlat
