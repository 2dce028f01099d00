// model.cpp: lattice model construction and Hamiltonian assembly

#include "nhlat/model.hpp"

#include <cmath>

#include "nhlat/errors.hpp"

namespace nhlat {

const char* to_string(Boundary b) { return b == Boundary::Open ? "OBC" : "PBC"; }

Boundary boundary_from_string(const std::string& s) {
    if (s == "OBC" || s == "obc" || s == "open") return Boundary::Open;
    if (s == "PBC" || s == "pbc" || s == "periodic") return Boundary::Periodic;
    throw ConfigError("unknown boundary '" + s + "' (expected OBC or PBC)");
}

LatticeModel::LatticeModel(int orbitals, int range, std::vector<Eigen::MatrixXcd> blocks, std::string notes)
    : q_(orbitals), range_(range), blocks_(std::move(blocks)), notes_(std::move(notes)) {
    if (q_ < 1) throw DomainError("orbital count must be positive");
    if (range_ < 1) throw DomainError("hopping range must be positive");
    if (blocks_.size() != static_cast<std::size_t>(2 * range_ + 1))
        throw DomainError("expected 2N+1 hopping blocks");
    bool any = false;
    for (const auto& b : blocks_) {
        if (b.rows() != q_ || b.cols() != q_) throw DomainError("hopping block has wrong shape");
        any = any || b.cwiseAbs().maxCoeff() > 0.0;
    }
    if (!any) throw DomainError("model has no nonzero hopping");

    // Dissipative: the Hermitian "imaginary part" (H0 - H0^dag)/(2i) of the on-site block is <= 0.
    const Eigen::MatrixXcd& onsite = block(0);
    const Eigen::MatrixXcd im_part = (onsite - onsite.adjoint()) / cplx(0.0, 2.0);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(im_part, Eigen::EigenvaluesOnly);
    if (es.eigenvalues().maxCoeff() > 1e-12)
        throw DomainError("on-site block has gain (positive anti-Hermitian part); only loss is modeled");

    entries_.resize(static_cast<std::size_t>(q_ * q_));
    for (int a = 0; a < q_; ++a)
        for (int b = 0; b < q_; ++b) {
            std::vector<cplx> c;
            for (int l = -range_; l <= range_; ++l) c.push_back(block(l)(a, b));
            entries_[static_cast<std::size_t>(a * q_ + b)] = LaurentPoly(-range_, std::move(c));
        }
}

const Eigen::MatrixXcd& LatticeModel::block(int offset) const {
    if (offset < -range_ || offset > range_) throw DomainError("hopping offset out of range");
    return blocks_[static_cast<std::size_t>(offset + range_)];
}

bool LatticeModel::same_hoppings(const LatticeModel& other, double tol) const {
    if (q_ != other.q_ || range_ != other.range_) return false;
    for (int l = -range_; l <= range_; ++l)
        if ((block(l) - other.block(l)).cwiseAbs().maxCoeff() > tol) return false;
    return true;
}

namespace {

void check_loss(const LadderParams& p) {
    if (!(p.gamma >= 0.0)) throw DomainError("gamma must be >= 0 (gain is not modeled)");
}

std::vector<Eigen::MatrixXcd> ladder_blocks(const LadderParams& p) {
    std::vector<Eigen::MatrixXcd> blocks(3, Eigen::MatrixXcd::Zero(2, 2));
    auto& minus = blocks[0];
    auto& onsite = blocks[1];
    auto& plus = blocks[2];
    onsite(0, 1) = p.t0;
    onsite(1, 0) = p.t0;
    onsite(1, 1) = cplx(0.0, -p.gamma);
    // t1 c^dag_{n+1,A} c_{n,B} + t1 c^dag_{n-1,A} c_{n,B} + h.c.
    plus(0, 1) = p.t1;
    minus(0, 1) = p.t1;
    plus(1, 0) = p.t1;
    minus(1, 0) = p.t1;
    return blocks;
}

} // namespace

LatticeModel make_ladder_trivial(const LadderParams& params) {
    check_loss(params);
    if (params.tp != 0.0) throw DomainError("trivial ladder requires tp = 0");
    return LatticeModel(2, 1, ladder_blocks(params), "ladder_trivial");
}

LatticeModel make_ladder_flux(const LadderParams& params) {
    check_loss(params);
    auto blocks = ladder_blocks(params);
    const cplx forward = std::polar(params.tp, params.phi);
    blocks[2](0, 0) = forward;            // c^dag_{n+1,A} c_{n,A}
    blocks[0](0, 0) = std::conj(forward); // c^dag_{n,A} c_{n+1,A}
    blocks[2](1, 1) = std::conj(forward); // c^dag_{n+1,B} c_{n,B}
    blocks[0](1, 1) = forward;
    return LatticeModel(2, 1, std::move(blocks), "ladder_flux");
}

BlochMatrix bloch(const LatticeModel& model, cplx beta) {
    if (beta == cplx{}) throw DomainError("beta = 0: h(beta) contains beta^-1");
    const int q = model.orbitals();
    Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(q, q);
    for (int l = -model.range(); l <= model.range(); ++l) h += model.block(l) * std::pow(beta, l);
    return {beta, std::move(h)};
}

Eigen::MatrixXcd bloch_derivative(const LatticeModel& model, cplx beta) {
    if (beta == cplx{}) throw DomainError("beta = 0: h(beta) contains beta^-1");
    const int q = model.orbitals();
    Eigen::MatrixXcd d = Eigen::MatrixXcd::Zero(q, q);
    for (int l = -model.range(); l <= model.range(); ++l)
        if (l != 0) d += model.block(l) * (static_cast<double>(l) * std::pow(beta, l - 1));
    return d;
}

namespace {

template <class Emit>
void for_each_real_space_entry(const LatticeModel& model, int cells, Boundary boundary, Emit&& emit) {
    if (cells <= 2 * model.range())
        throw SizeError("need L > 2N cells (L = " + std::to_string(cells) + ", N = " + std::to_string(model.range()) + ")");
    const int q = model.orbitals();
    for (int x = 0; x < cells; ++x)
        for (int l = -model.range(); l <= model.range(); ++l) {
            int y = x + l;
            if (boundary == Boundary::Periodic) {
                y = ((y % cells) + cells) % cells;
            } else if (y < 0 || y >= cells) {
                continue;
            }
            const Eigen::MatrixXcd& t = model.block(l);
            for (int a = 0; a < q; ++a)
                for (int b = 0; b < q; ++b)
                    if (t(a, b) != cplx{}) emit(q * y + a, q * x + b, t(a, b));
        }
}

} // namespace

Eigen::MatrixXcd real_space_hamiltonian(const LatticeModel& model, int cells, Boundary boundary) {
    const int dim = model.orbitals() * std::max(cells, 0);
    Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(dim, dim);
    for_each_real_space_entry(model, cells, boundary, [&](int r, int c, cplx v) { h(r, c) += v; });
    return h;
}

Eigen::SparseMatrix<cplx> real_space_sparse(const LatticeModel& model, int cells, Boundary boundary) {
    std::vector<Eigen::Triplet<cplx>> trip;
    for_each_real_space_entry(model, cells, boundary, [&](int r, int c, cplx v) { trip.emplace_back(r, c, v); });
    const int dim = model.orbitals() * cells;
    Eigen::SparseMatrix<cplx> h(dim, dim);
    h.setFromTriplets(trip.begin(), trip.end());
    h.makeCompressed();
    return h;
}

} // namespace nhlat
