#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "nhlat/errors.hpp"
#include "nhlat/spectral.hpp"

using namespace nhlat;

namespace {

constexpr double kPi = 3.14159265358979323846;

const LadderParams kTrivialA{0.5, 0.5, 0.0, 0.8, 0.0};
const LadderParams kTrivialB{1.0, 0.5, 0.0, 0.8, 0.0};
const LadderParams kFluxA{0.5, 0.5, 0.3, 0.8, kPi / 2};
const LadderParams kFluxB{1.0, 0.5, 0.7, 0.8, kPi / 2};

// Independent winding oracle: direct 2x2 determinant phase accumulation on 2^16 points.
int brute_winding(const LatticeModel& m, cplx eb) {
    const int n = 1 << 16;
    double acc = 0.0;
    cplx prev;
    for (int j = 0; j <= n; ++j) {
        const Eigen::MatrixXcd h = bloch_at_momentum(m, 2 * kPi * j / n).entries;
        const cplx d = (h(0, 0) - eb) * (h(1, 1) - eb) - h(0, 1) * h(1, 0);
        if (j > 0) acc += std::arg(d / prev);
        prev = d;
    }
    return static_cast<int>(std::lround(acc / (2 * kPi)));
}

cplx centroid(const std::vector<cplx>& v) {
    cplx c{};
    for (cplx e : v) c += e;
    return c / static_cast<double>(v.size());
}

} // namespace

TEST_CASE("biorthogonality and completeness at every k") {
    for (const auto& p : {kTrivialA, kTrivialB, kFluxA, kFluxB}) {
        const BandSet bs = pbc_bands(make_ladder_flux(p), 256);
        for (std::size_t j = 0; j < bs.k_grid.size(); ++j) {
            const Eigen::MatrixXcd lr = bs.left[j] * bs.right[j];
            CHECK((lr - Eigen::MatrixXcd::Identity(2, 2)).cwiseAbs().maxCoeff() < 1e-10);
            for (int a = 0; a < 2; ++a)
                for (int b = 0; b < 2; ++b) {
                    const cplx sum = bs.weight(0, j, a, b) + bs.weight(1, j, a, b);
                    CHECK(std::abs(sum - (a == b ? 1.0 : 0.0)) < 1e-10);
                }
        }
    }
}

TEST_CASE("bands are dissipative and continuous") {
    for (const auto& p : {kTrivialA, kTrivialB, kFluxA, kFluxB}) {
        const BandSet bs = pbc_bands(make_ladder_flux(p), 256);
        for (int n = 0; n < bs.band_count(); ++n) CHECK(bs.max_step(n) <= 0.05 * bs.diameter(n) + 1e-12);
        for (const auto& band : bs.bands)
            for (cplx e : band) CHECK(e.imag() <= 1e-10);
    }
}

TEST_CASE("k grid covers (0, 2 pi]") {
    const BandSet bs = pbc_bands(make_ladder_trivial(kTrivialA), 64, {false, 0.05, 64});
    CHECK(bs.k_grid.size() == 64);
    CHECK(bs.k_grid.front() > 0.0);
    CHECK(std::abs(bs.k_grid.back() - 2 * kPi) < 1e-14);
    CHECK_THROWS_AS(pbc_bands(make_ladder_trivial(kTrivialA), 32), DomainError);
}

TEST_CASE("gamma = 0 bands are real") {
    const BandSet bs = pbc_bands(make_ladder_trivial({0.5, 0.5, 0.0, 0.0, 0.0}), 128);
    for (const auto& band : bs.bands)
        for (cplx e : band) CHECK(std::abs(e.imag()) < 1e-12);
}

TEST_CASE("trivial ladder gap closes at cos k = -t0 / (2 t1) with E = 0") {
    const auto g = gap_closing_points(make_ladder_trivial(kTrivialA));
    REQUIRE(g.size() == 2);
    CHECK(g[0].k0 == doctest::Approx(2 * kPi / 3).epsilon(1e-10));
    CHECK(g[1].k0 == doctest::Approx(4 * kPi / 3).epsilon(1e-10));
    for (const auto& c : g) CHECK(std::abs(c.E) < 1e-8);

    const auto single = gap_closing_points(make_ladder_trivial(kTrivialB));
    REQUIRE(single.size() == 1);
    CHECK(single[0].k0 == doctest::Approx(kPi).epsilon(1e-8));

    CHECK(gap_closing_points(make_ladder_trivial({1.2, 0.5, 0.0, 0.8, 0.0})).empty());
}

TEST_CASE("flux PBC bands form closed loops with winding -1 around their centroids") {
    for (const auto& p : {kFluxA, kFluxB}) {
        const auto m = make_ladder_flux(p);
        const BandSet bs = pbc_bands(m, 512);
        // The two bands may exchange over a full turn, so closure holds for the pair as a set.
        const cplx s0 = bs.bands[0].front(), s1 = bs.bands[1].front();
        const cplx e0 = bs.bands[0].back(), e1 = bs.bands[1].back();
        const double tol = 0.05 * std::min(bs.diameter(0), bs.diameter(1));
        CHECK(std::min(std::max(std::abs(e0 - s0), std::abs(e1 - s1)),
                       std::max(std::abs(e0 - s1), std::abs(e1 - s0))) < tol);
        for (int n = 0; n < bs.band_count(); ++n) {
            const auto& band = bs.bands[static_cast<std::size_t>(n)];
            const cplx c = centroid(band);
            const WindingResult w = winding_number(m, c, 4096);
            CHECK(w.W == brute_winding(m, c));
            CHECK(w.W == -1);
            CHECK(std::abs(w.phase_residual) < kPi / 4);
        }
    }
}

TEST_CASE("winding is stable under grid doubling") {
    std::mt19937 rng(5);
    std::uniform_real_distribution<double> re(-1.5, 1.5), im(-1.0, 0.2);
    for (const auto& p : {kFluxA, kFluxB}) {
        const auto m = make_ladder_flux(p);
        int tested = 0;
        for (int i = 0; i < 20; ++i) {
            const cplx eb(re(rng), im(rng));
            try {
                const int w1 = winding_number(m, eb, 1024).W;
                CHECK(winding_number(m, eb, 2048).W == w1);
                ++tested;
            } catch (const OnSpectrum&) {
            }
        }
        CHECK(tested > 10);
    }
}

TEST_CASE("trivial ladder winding vanishes on a 20 x 20 grid") {
    for (const auto& p : {kTrivialA, kTrivialB}) {
        const auto m = make_ladder_trivial(p);
        int tested = 0;
        for (int i = 0; i < 20; ++i)
            for (int j = 0; j < 20; ++j) {
                const cplx eb(-2.0 + 4.0 * i / 19, -1.5 + 2.0 * j / 19);
                try {
                    CHECK(winding_number(m, eb, 1024).W == 0);
                    ++tested;
                } catch (const OnSpectrum&) {
                }
            }
        CHECK(tested > 350);
    }
}

TEST_CASE("winding far from the spectrum is zero and on-spectrum energies are refused") {
    const auto m = make_ladder_flux(kFluxA);
    CHECK(winding_number(m, cplx(1e3, 0.0), 512).W == 0);
    CHECK(winding_number(m, cplx(0.0, 1e3), 512).W == 0);
    const BandSet bs = pbc_bands(m, 512, {false, 0.05, 512});
    CHECK_THROWS_AS(winding_number(m, bs.bands[0][17], 512), OnSpectrum);
    CHECK_THROWS_AS(winding_number(make_ladder_trivial(kTrivialA), 0.0, 4096), OnSpectrum);
}

TEST_CASE("group velocities at the gap-closing momenta") {
    const auto a = make_ladder_flux(kFluxA);
    const BandSet ba = pbc_bands(a, 1024);
    for (const auto& g : gap_closing_points(a))
        CHECK(std::abs(group_velocity(ba, g.band, g.k0)) == doctest::Approx(0.3).epsilon(1e-6));

    const auto b = make_ladder_flux(kFluxB);
    const BandSet bb = pbc_bands(b, 1024);
    const auto gb = gap_closing_points(b);
    REQUIRE(gb.size() == 1);
    CHECK(gb[0].k0 == doctest::Approx(kPi).epsilon(1e-8));
    CHECK(std::abs(group_velocity(bb, gb[0].band, gb[0].k0)) == doctest::Approx(1.4).epsilon(1e-6));
}

TEST_CASE("Hermitian group velocity matches the analytic slope") {
    // gamma = 0: E = +-|t0 + 2 t1 cos k|, so dE/dk = -+2 t1 sin k sign(h_x).
    const LadderParams p{0.5, 0.5, 0.0, 0.0, 0.0};
    const BandSet bs = pbc_bands(make_ladder_trivial(p), 512);
    for (double k : {0.3, 1.0, 1.7, 2.9, 4.0, 5.5}) {
        const double hx = p.t0 + 2 * p.t1 * std::cos(k);
        const double upper = -2 * p.t1 * std::sin(k) * (hx > 0 ? 1.0 : -1.0);
        const double v0 = group_velocity(bs, 0, k), v1 = group_velocity(bs, 1, k);
        CHECK(std::min(std::abs(v0 - upper), std::abs(v1 - upper)) < 1e-6);
        CHECK(std::abs(v0 + v1) < 1e-6);
    }
}

TEST_CASE("trivial characteristic roots come in (beta, 1/beta) pairs") {
    const auto m = make_ladder_trivial(kTrivialA);
    std::mt19937 rng(9);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int i = 0; i < 20; ++i) {
        const cplx e(u(rng), u(rng));
        const auto roots = char_poly_roots(m, e).betas;
        REQUIRE(roots.size() == 4);
        for (cplx b : roots) {
            double best = 1e300;
            for (cplx c : roots) best = std::min(best, std::abs(c - 1.0 / b));
            CHECK(best < 1e-9);
        }
    }
}

TEST_CASE("characteristic roots are sorted and satisfy det[h - E] = 0") {
    const auto m = make_ladder_flux(kFluxA);
    const cplx e(0.2, -0.3);
    const auto roots = char_poly_roots(m, e).betas;
    REQUIRE(roots.size() == 4);
    for (std::size_t i = 1; i < roots.size(); ++i) CHECK(std::abs(roots[i - 1]) <= std::abs(roots[i]));
    for (cplx b : roots) {
        const Eigen::MatrixXcd h = bloch(m, b).entries - e * Eigen::MatrixXcd::Identity(2, 2);
        CHECK(std::abs(h.determinant()) < 1e-9);
    }
}

TEST_CASE("beta-independent model has a degenerate leading coefficient") {
    CHECK_THROWS_AS(char_poly_roots(make_ladder_trivial({0.5, 0.0, 0.0, 0.8, 0.0}), 0.1), DegenerateLeadingCoefficient);
}

TEST_CASE("trivial OBC eigenvalues sit on the unit-circle GBZ") {
    const auto pts = gbz_check(make_ladder_trivial(kTrivialA), 150, 1e-2);
    int good = 0;
    for (const auto& p : pts) {
        const double bm = std::abs(p.betas[1]);
        if (std::abs(p.mid_ratio - 1.0) < 1e-2 && std::abs(bm - 1.0) < 1e-2) ++good;
    }
    CHECK(good >= 0.95 * static_cast<double>(pts.size()));

    // Finite-size tail does not grow with L; both medians may already sit at round-off.
    const auto median_gap = [](const std::vector<GBZPoint>& v) {
        std::vector<double> d;
        for (const auto& p : v) d.push_back(std::abs(p.mid_ratio - 1.0));
        std::nth_element(d.begin(), d.begin() + static_cast<long>(d.size() / 2), d.end());
        return d[d.size() / 2];
    };
    const auto pts300 = gbz_check(make_ladder_trivial(kTrivialA), 300, 1e-2);
    CHECK(median_gap(pts300) <= std::max(median_gap(pts), 1e-12));
    int good300 = 0;
    for (const auto& p : pts300)
        if (std::abs(p.mid_ratio - 1.0) < 1e-2 && std::abs(std::abs(p.betas[1]) - 1.0) < 1e-2) ++good300;
    CHECK(good300 >= 0.95 * static_cast<double>(pts300.size()));
}

TEST_CASE("trivial OBC eigenvalue has |beta_M| = |beta_M+1| = 1") {
    const auto obc = obc_spectrum(make_ladder_trivial(kTrivialA), 150);
    const cplx e = obc[obc.size() / 3];
    const auto r = char_poly_roots(make_ladder_trivial(kTrivialA), e).betas;
    CHECK(std::abs(std::abs(r[1]) - 1.0) < 1e-3);
    CHECK(std::abs(std::abs(r[2]) - 1.0) < 1e-3);
}

TEST_CASE("flux ladder GBZ is off the unit circle") {
    const auto m = make_ladder_flux(kFluxA);
    const auto pts = gbz_check(m, 150, 1e-2);
    int matched = 0, off = 0;
    for (const auto& p : pts) {
        if (std::abs(p.mid_ratio - 1.0) < 1e-2) ++matched;
        if (std::abs(std::abs(p.betas[1]) - 1.0) > 0.05) ++off;
    }
    CHECK(matched >= 0.9 * static_cast<double>(pts.size()));
    CHECK(off >= 0.9 * static_cast<double>(pts.size()));

    // Interior eigenvalue at L = 300 as the oracle for skin localization.
    auto obc = obc_spectrum(m, 300);
    std::sort(obc.begin(), obc.end(), [](cplx a, cplx b) { return a.real() < b.real(); });
    const cplx e = obc[obc.size() / 4];
    const auto r = char_poly_roots(m, e).betas;
    CHECK(std::abs(r[2]) / std::abs(r[1]) == doctest::Approx(1.0).epsilon(1e-2));
    CHECK(std::abs(std::abs(r[1]) - 1.0) > 0.05);
}

TEST_CASE("Hermitian GBZ is the unit circle") {
    for (const auto& p : gbz_check(make_ladder_trivial({0.5, 0.5, 0.0, 0.0, 0.0}), 100, 1e-2)) {
        CHECK(std::abs(std::abs(p.betas[1]) - 1.0) < 1e-2);
        CHECK(std::abs(std::abs(p.betas[2]) - 1.0) < 1e-2);
    }
}

TEST_CASE("trivial OBC and PBC spectra converge as L grows") {
    const auto m = make_ladder_trivial(kTrivialA);
    const auto pbc = flatten(pbc_bands(m, 4096));
    double prev = 1e300;
    for (int L : {50, 100, 200}) {
        const double d = hausdorff_distance(obc_spectrum(m, L), pbc);
        CHECK(d < prev);
        prev = d;
    }
}

TEST_CASE("gamma = 0 OBC spectrum is real") {
    for (cplx e : obc_spectrum(make_ladder_trivial({0.5, 0.5, 0.0, 0.0, 0.0}), 60)) CHECK(std::abs(e.imag()) < 1e-9);
}

TEST_CASE("exceptional point on the grid is detected") {
    // t0 + 2 t1 cos k = gamma / 2 at k = pi / 2, which is on any grid with 4 | N_k.
    CHECK_THROWS_AS(pbc_bands(make_ladder_trivial({0.4, 0.5, 0.0, 0.8, 0.0}), 64, {false, 0.05, 64}), ExceptionalPoint);
    Eigen::MatrixXcd jordan(2, 2);
    jordan << 1.0, 1.0, 0.0, 1.0;
    CHECK_THROWS_AS(biorthogonal_eig(jordan), ExceptionalPoint);
}
