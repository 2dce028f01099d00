// dynamics.hpp: exact real-time evolution of lattice states and Green's functions.
//
// Three interchangeable methods evaluate e^{-iHt}:
//   Eigen      biorthogonal eigendecomposition of the dense qL x qL Hamiltonian
//   RungeKutta adaptive Dormand-Prince 5(4) on the sparse Hamiltonian
//   Momentum   PBC only: q x q Bloch exponentials per discrete k, then inverse transform

#pragma once

#include <Eigen/Dense>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "nhlat/model.hpp"

namespace nhlat {

enum class Method { Eigen, RungeKutta, Momentum };
const char* to_string(Method m);
Method method_from_string(const std::string& s);

struct EvolutionPlan {
    Method method = Method::Eigen;
    double tolerance = 1e-12;
};

enum class GreenKind { Local, Worldline };

struct GreensMeta {
    int L = 0;
    Boundary boundary = Boundary::Periodic;
    int x0 = 0;
    int orbital = 0;
    GreenKind kind = GreenKind::Local;
    std::optional<double> v;
    Method method = Method::Eigen;
    std::string note;
};

struct GreensSeries {
    std::vector<double> times;
    std::vector<cplx> values;
    GreensMeta meta;

    std::vector<double> magnitudes() const;
};

struct Trajectory {
    std::vector<double> times;
    std::vector<Eigen::VectorXcd> states;
    Method method = Method::Eigen;
    std::string note;
};

// e^{-iHt} for one lattice, set up once and queried many times.
class Propagator {
public:
    Propagator(const LatticeModel& model, int cells, Boundary boundary, const EvolutionPlan& plan = {});

    Method method() const { return method_; }
    const std::string& note() const { return note_; }
    int dimension() const { return dim_; }

    std::vector<Eigen::VectorXcd> evolve(const Eigen::VectorXcd& initial, const std::vector<double>& times) const;

    // <row(j)| e^{-iH t_j} |col> for each t_j.
    std::vector<cplx> track(int col, const std::vector<double>& times,
                            const std::function<int(std::size_t)>& row_at) const;

private:
    struct MomentumBlock {
        Eigen::VectorXcd values;
        Eigen::MatrixXcd right, left;
        Eigen::MatrixXcd bloch;
        bool exceptional = false;
    };

    Eigen::MatrixXcd bloch_propagator(std::size_t j, double t) const;

    LatticeModel model_;
    int cells_;
    Boundary boundary_;
    EvolutionPlan plan_;
    Method method_;
    std::string note_;
    int dim_;
    Eigen::SparseMatrix<cplx> sparse_;
    Eigen::VectorXcd eigenvalues_;
    Eigen::MatrixXcd right_, left_;
    std::vector<MomentumBlock> blocks_;
};

Trajectory evolve_state(const LatticeModel& model, int cells, Boundary boundary, const Eigen::VectorXcd& initial,
                        const std::vector<double>& times, const EvolutionPlan& plan = {});

GreensSeries local_green(const LatticeModel& model, int cells, Boundary boundary, int x0, int orbital,
                         const std::vector<double>& times, const EvolutionPlan& plan = {});

// Amplitude along m = x0 + v t under PBC, sampled at t_j = j / |v| where m is an integer.
// v is the real-space drift; a Bloch mode with dRe E/dk = u travels at v = -u.
GreensSeries worldline_green(const LatticeModel& model, int cells, int x0, double v, double t_max, int orbital = 0,
                             const EvolutionPlan& plan = {});

// t_c = L / (max_k v + |min_k v|) for the fastest band, v = dRe E/dk on an N_k grid.
double crossover_time(const LatticeModel& model, int cells, int n_k = 2048);

// L -> infinity limit: trapezoidal k-quadrature of sum_n g_n^{aa}(k) e^{-i E_n(k) t}.
GreensSeries quadrature_green(const LatticeModel& model, int x0, int orbital, const std::vector<double>& times,
                              int n_k);

// {0} together with log-uniform samples from t_min to t_max.
std::vector<double> log_time_grid(double t_max, int per_decade = 128, double t_min = 0.1);
std::vector<double> linear_time_grid(double t_max, double dt);

} // namespace nhlat
