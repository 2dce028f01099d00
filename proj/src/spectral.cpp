// spectral.cpp: band tracking, spectra, winding numbers and GBZ diagnostics

#include "nhlat/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <sstream>

#include "nhlat/errors.hpp"
#include "nhlat/parallel.hpp"

namespace nhlat {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double one_norm(const Eigen::MatrixXcd& m) { return m.cwiseAbs().colwise().sum().maxCoeff(); }

Eigen::MatrixXcd dh_dk(const LatticeModel& model, double k) {
    const int q = model.orbitals();
    Eigen::MatrixXcd d = Eigen::MatrixXcd::Zero(q, q);
    for (int l = -model.range(); l <= model.range(); ++l)
        if (l != 0) d += model.block(l) * (cplx(0.0, l) * std::polar(1.0, l * k));
    return d;
}

// Permutation of `next` that best continues `prev`, minimizing the summed distance.
std::vector<int> match(const std::vector<cplx>& prev, const std::vector<cplx>& next) {
    const int q = static_cast<int>(prev.size());
    std::vector<int> perm(static_cast<std::size_t>(q));
    std::iota(perm.begin(), perm.end(), 0);
    if (q <= 6) {
        std::vector<int> best = perm;
        double best_cost = std::numeric_limits<double>::infinity();
        do {
            double cost = 0.0;
            for (int n = 0; n < q; ++n) cost += std::abs(prev[n] - next[perm[n]]);
            if (cost < best_cost) {
                best_cost = cost;
                best = perm;
            }
        } while (std::next_permutation(perm.begin(), perm.end()));
        return best;
    }
    std::vector<bool> used(static_cast<std::size_t>(q), false);
    for (int n = 0; n < q; ++n) {
        int pick = -1;
        for (int m = 0; m < q; ++m)
            if (!used[m] && (pick < 0 || std::abs(prev[n] - next[m]) < std::abs(prev[n] - next[pick]))) pick = m;
        used[pick] = true;
        perm[n] = pick;
    }
    return perm;
}

BandSet compute_bands(const LatticeModel& model, int n_k) {
    const int q = model.orbitals();
    const auto nk = static_cast<std::size_t>(n_k);
    std::vector<Biorthogonal> eig(nk);
    std::vector<double> k(nk);
    for (std::size_t j = 0; j < nk; ++j) k[j] = kTwoPi * static_cast<double>(j + 1) / n_k;
    parallel_for(nk, [&](std::size_t j) {
        try {
            eig[j] = biorthogonal_eig(bloch_at_momentum(model, k[j]).entries);
        } catch (const ExceptionalPoint&) {
            std::ostringstream os;
            os.precision(17);
            os << "non-diagonalizable Bloch matrix at k = " << k[j];
            throw ExceptionalPoint(os.str());
        }
    });

    BandSet out{model, k, std::vector<std::vector<cplx>>(static_cast<std::size_t>(q)), {}, {}};
    out.right.resize(nk);
    out.left.resize(nk);
    std::vector<cplx> prev;
    for (std::size_t j = 0; j < nk; ++j) {
        std::vector<cplx> vals(eig[j].values.data(), eig[j].values.data() + q);
        std::vector<int> perm(static_cast<std::size_t>(q));
        if (j == 0) {
            std::iota(perm.begin(), perm.end(), 0);
            std::sort(perm.begin(), perm.end(), [&](int a, int b) {
                if (vals[a].imag() != vals[b].imag()) return vals[a].imag() > vals[b].imag();
                return vals[a].real() > vals[b].real();
            });
        } else {
            perm = match(prev, vals);
        }
        out.right[j].resize(q, q);
        out.left[j].resize(q, q);
        prev.assign(static_cast<std::size_t>(q), cplx{});
        for (int n = 0; n < q; ++n) {
            out.bands[n].push_back(vals[perm[n]]);
            out.right[j].col(n) = eig[j].right.col(perm[n]);
            out.left[j].row(n) = eig[j].left.row(perm[n]);
            prev[n] = vals[perm[n]];
        }
    }
    return out;
}

bool well_resolved(const BandSet& bs, double fraction) {
    for (int n = 0; n < bs.band_count(); ++n)
        if (bs.max_step(n) > fraction * bs.diameter(n) + 1e-12) return false;
    return true;
}

} // namespace

Biorthogonal biorthogonal_eig(const Eigen::MatrixXcd& m, bool strict) {
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(m, true);
    if (es.info() != Eigen::Success) throw EigensolverFailure("eigensolver did not converge");
    Biorthogonal out;
    out.values = es.eigenvalues();
    out.right = es.eigenvectors();
    Eigen::PartialPivLU<Eigen::MatrixXcd> lu(out.right);
    out.left = lu.inverse();
    out.condition = one_norm(out.right) * one_norm(out.left);
    if (!std::isfinite(out.condition)) out.condition = std::numeric_limits<double>::infinity();

    const double scale = std::max(m.cwiseAbs().maxCoeff(), std::numeric_limits<double>::min());
    const Eigen::Index n = out.values.size();
    for (Eigen::Index i = 0; i < n && !out.defective; ++i)
        for (Eigen::Index j = i + 1; j < n; ++j) {
            if (std::abs(out.values(i) - out.values(j)) > kCoalescence * scale) continue;
            const double c = std::abs(out.right.col(i).dot(out.right.col(j))) /
                             (out.right.col(i).norm() * out.right.col(j).norm());
            if (std::sqrt(std::max(0.0, 1.0 - c * c)) < kParallelSine) {
                out.defective = true;
                break;
            }
        }
    if (strict && out.condition > kExceptionalCondition)
        throw ExceptionalPoint("eigenvector matrix condition number exceeds 1e8");
    if (strict && out.defective) throw ExceptionalPoint("coalescing eigenvalues with parallel eigenvectors");
    return out;
}

bool Biorthogonal::exceptional() const { return defective || condition > kExceptionalCondition; }

cplx BandSet::slope(int n, std::size_t j) const {
    const Eigen::MatrixXcd d = dh_dk(model, k_grid[j]);
    return (left[j].row(n) * d * right[j].col(n))(0, 0);
}

double BandSet::max_step(int n) const {
    double m = 0.0;
    const auto& b = bands[static_cast<std::size_t>(n)];
    for (std::size_t j = 1; j < b.size(); ++j) m = std::max(m, std::abs(b[j] - b[j - 1]));
    return m;
}

double BandSet::diameter(int n) const {
    // Double sweep: farthest point from an arbitrary start, then farthest from that.
    const auto& b = bands[static_cast<std::size_t>(n)];
    if (b.empty()) return 0.0;
    auto farthest = [&](cplx from) {
        cplx best = from;
        for (const auto& e : b)
            if (std::abs(e - from) > std::abs(best - from)) best = e;
        return best;
    };
    const cplx p = farthest(b.front());
    const cplx r = farthest(p);
    return std::abs(r - p);
}

BandSet pbc_bands(const LatticeModel& model, int n_k, const BandOptions& options) {
    if (n_k < 64) throw DomainError("N_k must be at least 64");
    for (int n = n_k;; n *= 2) {
        BandSet bs = compute_bands(model, n);
        if (!options.refine || 2 * n > options.max_points || well_resolved(bs, options.step_fraction)) return bs;
    }
}

namespace {

std::vector<cplx> sorted_eigenvalues(const Eigen::MatrixXcd& h) {
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(h, false);
    if (es.info() != Eigen::Success) throw EigensolverFailure("OBC eigensolver did not converge");
    std::vector<cplx> out(es.eigenvalues().data(), es.eigenvalues().data() + es.eigenvalues().size());
    std::sort(out.begin(), out.end(), [](cplx a, cplx b) {
        return a.real() != b.real() ? a.real() < b.real() : a.imag() < b.imag();
    });
    return out;
}

// h(beta) -> h(rho beta): under OBC this is the similarity diag(rho^x), so the spectrum is unchanged.
LatticeModel rescaled(const LatticeModel& model, double rho) {
    std::vector<Eigen::MatrixXcd> blocks;
    for (int l = -model.range(); l <= model.range(); ++l) blocks.push_back(model.block(l) * std::pow(rho, l));
    return LatticeModel(model.orbitals(), model.range(), std::move(blocks), model.notes());
}

// Median over the spectrum of |beta_M beta_M+1|^{1/2} in log scale: the typical GBZ radius.
double gbz_radius(const LatticeModel& model, const std::vector<cplx>& spectrum) {
    const auto M = static_cast<std::size_t>(model.orbitals() * model.range());
    std::vector<double> logs(spectrum.size(), 0.0);
    parallel_for(spectrum.size(), [&](std::size_t i) {
        try {
            const auto b = char_poly_roots(model, spectrum[i]).betas;
            if (b.size() > M) logs[i] = 0.5 * std::log(std::abs(b[M - 1]) * std::abs(b[M]));
        } catch (const Error&) {
        }
    });
    std::nth_element(logs.begin(), logs.begin() + static_cast<long>(logs.size() / 2), logs.end());
    return std::exp(logs[logs.size() / 2]);
}

} // namespace

std::vector<cplx> obc_spectrum(const LatticeModel& model, int cells) {
    // Skin modes make the OBC matrix so non-normal that eigenvalues computed directly drift by
    // O(1) at L ~ 300. Rescaling the GBZ onto |beta| = 1 restores a well-conditioned problem.
    std::vector<cplx> values = sorted_eigenvalues(real_space_hamiltonian(model, cells, Boundary::Open));
    double rho = 1.0;
    for (int pass = 0; pass < 3; ++pass) {
        const double r = gbz_radius(rescaled(model, rho), values);
        if (std::abs(std::log(r)) < 1e-3) break;
        rho *= r;
        values = sorted_eigenvalues(real_space_hamiltonian(rescaled(model, rho), cells, Boundary::Open));
    }
    return values;
}

WindingResult winding_number(const LatticeModel& model, cplx E_b, int n_k) {
    if (n_k < 8) throw DomainError("N_k must be at least 8");
    const int q = model.orbitals();
    constexpr int kMaxPoints = 1 << 20;
    for (int n = n_k; n <= kMaxPoints; n *= 2) {
        std::vector<cplx> det(static_cast<std::size_t>(n) + 1);
        std::vector<double> closest(static_cast<std::size_t>(n));
        parallel_for(static_cast<std::size_t>(n), [&](std::size_t j) {
            const Eigen::MatrixXcd h = bloch_at_momentum(model, kTwoPi * static_cast<double>(j) / n).entries;
            det[j] = (h - E_b * Eigen::MatrixXcd::Identity(q, q)).determinant();
            Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(h, false);
            closest[j] = (es.eigenvalues().array() - E_b).abs().minCoeff();
        });
        det[static_cast<std::size_t>(n)] = det[0];
        for (std::size_t j = 0; j < closest.size(); ++j)
            if (closest[j] < 1e-6 || std::abs(det[j]) < 1e-10) {
                std::ostringstream os;
                os.precision(17);
                os << "reference energy " << E_b.real() << (E_b.imag() < 0 ? "" : "+") << E_b.imag()
                   << "i lies on the PBC spectrum";
                throw OnSpectrum(os.str());
            }
        double total = 0.0;
        bool resolved = true;
        for (std::size_t j = 0; j < static_cast<std::size_t>(n); ++j) {
            const double step = std::arg(det[j + 1] / det[j]);
            if (std::abs(step) > 0.5 * std::numbers::pi) {
                resolved = false;
                break;
            }
            total += step;
        }
        if (!resolved) continue;
        WindingResult r;
        r.E_b = E_b;
        r.N_k = n;
        r.W = static_cast<int>(std::lround(total / kTwoPi));
        r.phase_residual = total - kTwoPi * r.W;
        if (std::abs(r.phase_residual) >= std::numbers::pi / 4)
            throw OnSpectrum("accumulated phase is not close to a multiple of 2 pi");
        return r;
    }
    throw OnSpectrum("phase of det[h - E_b] could not be resolved; E_b is too close to the spectrum");
}

namespace {

struct LocalEigen {
    cplx E;
    cplx slope;
    double separation; // distance to the nearest other eigenvalue
    double rival;      // distance from the reference to the second-closest eigenvalue
};

LocalEigen nearest_eigen(const LatticeModel& model, double k, cplx reference) {
    const Biorthogonal e = biorthogonal_eig(bloch_at_momentum(model, k).entries, false);
    const int q = static_cast<int>(e.values.size());
    int pick = 0;
    for (int n = 1; n < q; ++n)
        if (std::abs(e.values(n) - reference) < std::abs(e.values(pick) - reference)) pick = n;
    LocalEigen out{e.values(pick), {}, std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity()};
    for (int n = 0; n < q; ++n)
        if (n != pick) {
            out.separation = std::min(out.separation, std::abs(e.values(n) - e.values(pick)));
            out.rival = std::min(out.rival, std::abs(e.values(n) - reference));
        }
    out.slope = (e.left.row(pick) * dh_dk(model, k) * e.right.col(pick))(0, 0);
    return out;
}

double wrap_angle(double k) {
    k = std::fmod(k, kTwoPi);
    if (k <= 0.0) k += kTwoPi;
    return k;
}

std::size_t nearest_index(const BandSet& bs, double k0) {
    const double k = wrap_angle(k0);
    const double n = static_cast<double>(bs.size());
    long j = std::lround(k * n / kTwoPi) - 1;
    j = ((j % static_cast<long>(bs.size())) + static_cast<long>(bs.size())) % static_cast<long>(bs.size());
    return static_cast<std::size_t>(j);
}

} // namespace

namespace {

// At a flat maximum, d Im E/dk ~ c (k - k*)^m drowns in round-off over a window of
// width ~eps^{1/m}, which limits bisection. Fitting the slope on a wider stencil and
// reading the shift off the subleading coefficient, -c_{m-1} / (m c_m), is well conditioned.
double refine_maximum(const LatticeModel& model, double k, cplx E) {
    constexpr int kHalf = 8, kDegree = 7;
    constexpr double kWidth = 1.6e-2;
    for (int pass = 0; pass < 3; ++pass) {
        Eigen::MatrixXd A(2 * kHalf + 1, kDegree + 1);
        Eigen::VectorXd y(2 * kHalf + 1);
        for (int j = -kHalf; j <= kHalf; ++j) {
            const double x = static_cast<double>(j) / kHalf;
            for (int d = 0; d <= kDegree; ++d) A(j + kHalf, d) = std::pow(x, d);
            y(j + kHalf) = nearest_eigen(model, k + kWidth * x, E).slope.imag();
        }
        const Eigen::VectorXd c = A.colPivHouseholderQr().solve(y);
        const double scale = c.tail(kDegree).cwiseAbs().maxCoeff();
        if (!(scale > 0.0)) return k;
        int m = 1;
        while (m < kDegree && std::abs(c(m)) < 1e-3 * scale) ++m;
        const double shift = -kWidth * c(m - 1) / (m * c(m));
        if (!(std::abs(shift) < 0.1 * kWidth)) return k;
        k += shift;
        if (std::abs(shift) < 1e-15) break;
    }
    return k;
}

} // namespace

std::vector<GapClosing> gap_closing_points(const LatticeModel& model, int n_k) {
    const BandSet bs = pbc_bands(model, n_k);
    const std::size_t nk = bs.size();
    std::vector<GapClosing> out;
    for (int n = 0; n < bs.band_count(); ++n) {
        const auto& b = bs.bands[static_cast<std::size_t>(n)];
        for (std::size_t j = 0; j < nk; ++j) {
            const double here = b[j].imag();
            const double left = b[(j + nk - 1) % nk].imag();
            const double right = b[(j + 1) % nk].imag();
            if (!(here >= left && here > right) || here < -1e-3) continue;

            // Bisection on the sign of d Im E / dk between the neighbouring samples.
            double lo = bs.k_grid[j] - kTwoPi / static_cast<double>(nk);
            double hi = bs.k_grid[j] + kTwoPi / static_cast<double>(nk);
            cplx ref = b[j];
            LocalEigen best = nearest_eigen(model, bs.k_grid[j], ref);
            double best_k = bs.k_grid[j];
            const LocalEigen at_lo = nearest_eigen(model, lo, ref);
            const LocalEigen at_hi = nearest_eigen(model, hi, ref);
            if (at_lo.slope.imag() > 0.0 && at_hi.slope.imag() < 0.0) {
                for (int it = 0; it < 100 && hi - lo > 1e-15; ++it) {
                    const double mid = 0.5 * (lo + hi);
                    const LocalEigen e = nearest_eigen(model, mid, ref);
                    ref = e.E;
                    if (e.slope.imag() > 0.0) lo = mid; else hi = mid;
                    if (e.E.imag() >= best.E.imag()) {
                        best = e;
                        best_k = mid;
                    }
                }
            }
            if (std::abs(best.E.imag()) >= kGapTolerance) continue;
            best_k = refine_maximum(model, best_k, best.E);
            best = nearest_eigen(model, best_k, best.E);
            const double k0 = wrap_angle(best_k);
            bool duplicate = false;
            for (const auto& g : out)
                if (std::abs(std::remainder(g.k0 - k0, kTwoPi)) < 1e-7 && std::abs(g.E - best.E) < 1e-7)
                    duplicate = true;
            if (!duplicate) out.push_back({k0, n, best.E});
        }
    }
    std::sort(out.begin(), out.end(), [](const GapClosing& a, const GapClosing& b) {
        return a.k0 != b.k0 ? a.k0 < b.k0 : a.band < b.band;
    });
    return out;
}

double group_velocity(const BandSet& bs, int band, double k0) {
    if (band < 0 || band >= bs.band_count()) throw DomainError("band index out of range");
    const std::size_t j = nearest_index(bs, k0);
    const LocalEigen centre = nearest_eigen(bs.model, k0, bs.bands[static_cast<std::size_t>(band)][j]);
    const double scale = std::max(1.0, std::abs(centre.E));
    if (centre.separation < 1e-8 * scale)
        throw BandDiscontinuity("bands are degenerate at k0; the group velocity is ambiguous");
    const double h = std::min(1e-3, 0.25 * kTwoPi / static_cast<double>(bs.size()));
    auto sample = [&](double k) {
        const LocalEigen e = nearest_eigen(bs.model, k, centre.E);
        if (e.rival < 2.0 * std::abs(e.E - centre.E))
            throw BandDiscontinuity("continuity tracking is ambiguous near k0");
        return e.E;
    };
    auto diff = [&](double step) { return (sample(k0 + step) - sample(k0 - step)).real() / (2.0 * step); };
    const double d1 = diff(h);
    const double d2 = diff(0.5 * h);
    return (4.0 * d2 - d1) / 3.0;
}

namespace {

LaurentPoly laurent_det(std::vector<LaurentPoly> m, int q) {
    if (q == 1) return m[0];
    if (q == 2) return m[0] * m[3] - m[1] * m[2];
    LaurentPoly acc;
    for (int col = 0; col < q; ++col) {
        std::vector<LaurentPoly> minor;
        for (int r = 1; r < q; ++r)
            for (int c = 0; c < q; ++c)
                if (c != col) minor.push_back(m[static_cast<std::size_t>(r * q + c)]);
        LaurentPoly term = m[static_cast<std::size_t>(col)] * laurent_det(std::move(minor), q - 1);
        if (col % 2 == 0) acc += term; else acc -= term;
    }
    return acc;
}

} // namespace

LaurentPoly char_poly(const LatticeModel& model, cplx E) {
    const int q = model.orbitals();
    if (q > 8) throw Unsupported("characteristic polynomial implemented for q <= 8");
    std::vector<LaurentPoly> m = model.laurent_entries();
    for (int a = 0; a < q; ++a) m[static_cast<std::size_t>(a * q + a)] -= LaurentPoly::constant(E);
    return laurent_det(std::move(m), q);
}

CharRoots char_poly_roots(const LatticeModel& model, cplx E) {
    const int q = model.orbitals();
    const int M = q * model.range();
    const Eigen::MatrixXcd& top = model.block(model.range());
    const double top_scale = std::max(top.cwiseAbs().maxCoeff(), 1e-300);
    if (std::abs(top.determinant()) <= 1e-14 * std::pow(top_scale, q))
        throw DegenerateLeadingCoefficient("det T_N vanishes: beta^M det[h - E] has degree below 2M for every E");

    const LaurentPoly f = char_poly(model, E);
    std::vector<cplx> c(static_cast<std::size_t>(2 * M + 1));
    for (int p = -M; p <= M; ++p) c[static_cast<std::size_t>(p + M)] = f.coeff(p);
    double scale = 0.0;
    for (const auto& x : c) scale = std::max(scale, std::abs(x));

    CharRoots out;
    while (c.size() > 1 && std::abs(c.back()) < 1e-12 * scale) {
        c.pop_back();
        out.deflated = true;
    }
    out.betas = polynomial_roots_flat(c);
    std::sort(out.betas.begin(), out.betas.end(), [](cplx a, cplx b) {
        return std::abs(a) != std::abs(b) ? std::abs(a) < std::abs(b) : std::arg(a) < std::arg(b);
    });
    return out;
}

std::vector<GBZPoint> gbz_check(const LatticeModel& model, int cells, double tol) {
    const std::vector<cplx> spectrum = obc_spectrum(model, cells);
    const int M = model.orbitals() * model.range();
    std::vector<GBZPoint> out(spectrum.size());
    parallel_for(spectrum.size(), [&](std::size_t i) {
        GBZPoint p;
        p.E = spectrum[i];
        p.betas = char_poly_roots(model, p.E).betas;
        if (static_cast<int>(p.betas.size()) > M) {
            const double inner = std::abs(p.betas[static_cast<std::size_t>(M - 1)]);
            const double outer = std::abs(p.betas[static_cast<std::size_t>(M)]);
            p.mid_ratio = inner > 0.0 ? outer / inner : std::numeric_limits<double>::infinity();
        }
        p.outlier = std::abs(p.mid_ratio - 1.0) > tol;
        out[i] = std::move(p);
    });
    return out;
}

double hausdorff_distance(const std::vector<cplx>& a, const std::vector<cplx>& b) {
    auto directed = [](const std::vector<cplx>& from, const std::vector<cplx>& to) {
        double worst = 0.0;
        for (const auto& x : from) {
            double d = std::numeric_limits<double>::infinity();
            for (const auto& y : to) d = std::min(d, std::abs(x - y));
            worst = std::max(worst, d);
        }
        return worst;
    };
    return std::max(directed(a, b), directed(b, a));
}

std::vector<cplx> flatten(const BandSet& bands) {
    std::vector<cplx> out;
    for (const auto& b : bands.bands) out.insert(out.end(), b.begin(), b.end());
    return out;
}

} // namespace nhlat
