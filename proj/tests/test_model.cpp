#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "nhlat/errors.hpp"
#include "nhlat/model.hpp"
#include "nhlat/spectral.hpp"

using namespace nhlat;

namespace {

constexpr double kPi = 3.14159265358979323846;
const cplx I(0.0, 1.0);

double max_abs(const Eigen::MatrixXcd& m) { return m.cwiseAbs().maxCoeff(); }

Eigen::MatrixXcd mat(cplx a, cplx b, cplx c, cplx d) {
    Eigen::MatrixXcd m(2, 2);
    m << a, b, c, d;
    return m;
}

// Ascending by (Re, Im), for multiset comparison.
std::vector<cplx> sorted(std::vector<cplx> v) {
    std::sort(v.begin(), v.end(), [](cplx a, cplx b) {
        return a.real() != b.real() ? a.real() < b.real() : a.imag() < b.imag();
    });
    return v;
}

double multiset_distance(const std::vector<cplx>& a, const std::vector<cplx>& b) {
    // Greedy matching is adequate: the sets agree to round-off when they agree at all.
    std::vector<bool> used(b.size(), false);
    double worst = 0.0;
    for (cplx x : a) {
        double best = 1e300;
        std::size_t at = 0;
        for (std::size_t j = 0; j < b.size(); ++j)
            if (!used[j] && std::abs(x - b[j]) < best) {
                best = std::abs(x - b[j]);
                at = j;
            }
        used[at] = true;
        worst = std::max(worst, best);
    }
    return worst;
}

} // namespace

TEST_CASE("trivial ladder Bloch matrices at simple points") {
    const auto a = make_ladder_trivial({0.5, 0.5, 0.0, 0.8, 0.0});
    CHECK(max_abs(bloch(a, 1.0).entries - mat(0, 1.5, 1.5, -0.8 * I)) < 1e-14);

    const auto b = make_ladder_trivial({1.0, 0.5, 0.0, 0.8, 0.0});
    CHECK(max_abs(bloch(b, -1.0).entries - mat(0, 0, 0, -0.8 * I)) < 1e-14);
    CHECK(max_abs(bloch(b, 2.0).entries - mat(0, 2.25, 2.25, -0.8 * I)) < 1e-14);
}

TEST_CASE("Hermitian at gamma = 0 on the unit circle") {
    const auto m = make_ladder_trivial({0.5, 0.5, 0.0, 0.0, 0.0});
    std::mt19937 rng(11);
    std::uniform_real_distribution<double> k(0.0, 2 * kPi);
    for (int i = 0; i < 20; ++i) {
        const Eigen::MatrixXcd h = bloch_at_momentum(m, k(rng)).entries;
        CHECK(max_abs(h - h.adjoint()) < 1e-14);
    }
}

TEST_CASE("flux ladder block at beta = e^{2 pi i/3}") {
    const auto m = make_ladder_flux({0.5, 0.5, 0.3, 0.8, kPi / 2});
    const cplx beta = std::polar(1.0, 2 * kPi / 3);
    // h_x = 0.5 + 0.5 * (2 cos 2pi/3) = 0, h_0 = -0.4i, h_z = 0.3 i (i sqrt 3) + 0.4 i
    const cplx h0(0.0, -0.4), hz(-0.3 * std::sqrt(3.0), 0.4);
    CHECK(max_abs(bloch(m, beta).entries - mat(h0 + hz, 0, 0, h0 - hz)) < 1e-12);
}

TEST_CASE("flux ladder at phi = 0 has beta-independent h_z") {
    const auto m = make_ladder_flux({0.5, 0.5, 0.3, 0.8, 0.0});
    for (cplx beta : {cplx(1.0), cplx(2.0, 0.5), std::polar(0.7, 1.1)}) {
        const Eigen::MatrixXcd h = bloch(m, beta).entries;
        const cplx hz = (h(0, 0) - h(1, 1)) / 2.0;
        CHECK(std::abs(hz - cplx(0.0, 0.4)) < 1e-14);
    }
}

TEST_CASE("flux ladder with tp = 0 reduces to the trivial ladder") {
    const LadderParams p{0.7, 0.4, 0.0, 0.3, 1.2};
    CHECK(make_ladder_flux(p).same_hoppings(make_ladder_trivial(p)));
}

TEST_CASE("parameter validation") {
    CHECK_THROWS_AS(make_ladder_trivial({0.5, 0.5, 0.0, -0.1, 0.0}), DomainError);
    CHECK_THROWS_AS(make_ladder_flux({0.5, 0.5, 0.3, -0.1, 0.0}), DomainError);
    CHECK_THROWS_AS(make_ladder_trivial({0.5, 0.5, 0.3, 0.8, 0.0}), DomainError);
    CHECK_THROWS_AS(bloch(make_ladder_trivial({0.5, 0.5, 0.0, 0.8, 0.0}), 0.0), DomainError);

    std::vector<Eigen::MatrixXcd> gain(3, Eigen::MatrixXcd::Zero(1, 1));
    gain[0](0, 0) = gain[2](0, 0) = 1.0;
    gain[1](0, 0) = cplx(0.0, 0.2);
    CHECK_THROWS_AS(LatticeModel(1, 1, gain), DomainError);
    CHECK_THROWS_AS(LatticeModel(1, 1, std::vector<Eigen::MatrixXcd>(3, Eigen::MatrixXcd::Zero(1, 1))), DomainError);
}

TEST_CASE("real-space size and boundary checks") {
    const auto m = make_ladder_trivial({0.5, 0.5, 0.0, 0.8, 0.0});
    CHECK_THROWS_AS(real_space_hamiltonian(m, 2, Boundary::Periodic), SizeError);
    CHECK_NOTHROW(real_space_hamiltonian(m, 3, Boundary::Periodic));
    CHECK(boundary_from_string("OBC") == Boundary::Open);
    CHECK(boundary_from_string("pbc") == Boundary::Periodic);
    CHECK_THROWS_AS(boundary_from_string("twisted"), ConfigError);
}

TEST_CASE("Laurent consistency on random unit-circle points") {
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> u(-1.0, 1.0), k(0.0, 2 * kPi);
    for (int trial = 0; trial < 10; ++trial) {
        const LadderParams p{u(rng), u(rng), u(rng), 1.0 + u(rng), 3.0 * u(rng)};
        const auto m = make_ladder_flux(p);
        for (int s = 0; s < 10; ++s) {
            const cplx beta = std::polar(1.0, k(rng));
            Eigen::MatrixXcd direct = Eigen::MatrixXcd::Zero(2, 2);
            for (int l = -1; l <= 1; ++l) direct += m.block(l) * std::pow(beta, l);
            CHECK(max_abs(bloch(m, beta).entries - direct) < 1e-12);
        }
    }
}

TEST_CASE("dissipativity on the unit circle") {
    std::mt19937 rng(3);
    std::uniform_real_distribution<double> u(-1.0, 1.0), k(0.0, 2 * kPi);
    for (int trial = 0; trial < 10; ++trial) {
        const auto m = make_ladder_flux({u(rng), u(rng), u(rng), 1.0 + u(rng), 3.0 * u(rng)});
        for (int s = 0; s < 20; ++s) {
            Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(bloch_at_momentum(m, k(rng)).entries);
            for (int n = 0; n < 2; ++n) CHECK(es.eigenvalues()(n).imag() <= 1e-10);
        }
    }
}

TEST_CASE("PBC real-space spectrum equals the union of Bloch spectra") {
    for (const LadderParams& p : {LadderParams{0.5, 0.5, 0.0, 0.8, 0.0}, LadderParams{0.5, 0.5, 0.3, 0.8, kPi / 2}}) {
        const auto m = make_ladder_flux(p);
        const int L = 150;
        Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(real_space_hamiltonian(m, L, Boundary::Periodic), false);
        std::vector<cplx> real_space(es.eigenvalues().data(), es.eigenvalues().data() + 2 * L), oracle;
        for (int j = 0; j < L; ++j) {
            const Eigen::MatrixXcd h = bloch_at_momentum(m, 2 * kPi * j / L).entries;
            // Closed-form 2x2 eigenvalues: a +- sqrt(a^2 - det).
            const cplx a = h.trace() / 2.0, d = std::sqrt(a * a - h.determinant());
            oracle.push_back(a + d);
            oracle.push_back(a - d);
        }
        CHECK(multiset_distance(sorted(real_space), sorted(oracle)) < 1e-9);
    }
}

TEST_CASE("gamma = 0 real-space matrices are Hermitian with real spectrum") {
    const auto m = make_ladder_trivial({0.5, 0.5, 0.0, 0.0, 0.0});
    for (Boundary b : {Boundary::Open, Boundary::Periodic}) {
        const Eigen::MatrixXcd h = real_space_hamiltonian(m, 40, b);
        CHECK(max_abs(h - h.adjoint()) < 1e-15);
        Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(h, false);
        CHECK(es.eigenvalues().imag().cwiseAbs().maxCoeff() < 1e-9);
    }
}

TEST_CASE("sparse and dense real-space matrices agree") {
    const auto m = make_ladder_flux({0.5, 0.5, 0.3, 0.8, kPi / 2});
    for (Boundary b : {Boundary::Open, Boundary::Periodic}) {
        const Eigen::MatrixXcd dense = real_space_hamiltonian(m, 20, b);
        const Eigen::MatrixXcd sparse = Eigen::MatrixXcd(real_space_sparse(m, 20, b));
        CHECK(max_abs(dense - sparse) == 0.0);
    }
}

TEST_CASE("flux ladder OBC eigenstates pile up at one edge") {
    const auto m = make_ladder_flux({0.5, 0.5, 0.3, 0.8, kPi / 2});
    const int L = 150;
    const Biorthogonal bo = biorthogonal_eig(real_space_hamiltonian(m, L, Boundary::Open), false);
    double left = 0.0, total = 0.0;
    for (int n = 0; n < 2 * L; ++n) {
        const Eigen::VectorXcd r = bo.right.col(n);
        const double norm = r.squaredNorm();
        left += r.head(L).squaredNorm() / norm;
        total += 1.0;
    }
    const double fraction = left / total;
    CHECK(std::max(fraction, 1.0 - fraction) > 0.9);
}
