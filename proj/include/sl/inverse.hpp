#pragma once

#include <Eigen/Dense>

#include "sl/core.hpp"
#include "sl/forward.hpp"
#include "sl/spectrum.hpp"

namespace sl {

struct InverseOptions {
    int node_count = 256;     // contour quadrature nodes
    double cond_floor = 1e-13;
    double verify_tol = 1e-5;
    double tail_tol = 1e-9;   // tail differences beyond the cut must drop below this
    int cut_margin = 7;       // largest admissible cut is degree + cut_margin
    double cluster_tol = 1e-7;
    bool verify = true;
    OdeOptions ode{};
};

// Reference-problem solutions phi_tilde on (x-grid x contour nodes); the
// kernel D(x, la, mu) = int_0^x phi_tilde(t, la) phi_tilde(t, mu) dt is not
// stored but streamed through KernelStream (one node_count^2 matrix).
struct KernelTables {
    ContourGrid grid;
    std::vector<double> x_grid;
    Eigen::MatrixXcd phi;    // phi(i, j)   = phi_tilde(x_i, mu_j)
    Eigen::MatrixXcd phi_q;  // phi_q(i, j) = phi_tilde^[1](x_i, mu_j)
};

KernelTables build_kernel_tables(const PotentialSigma& sigma_tilde, const ContourGrid& grid,
                                 const OdeOptions& ode = {});

// Cumulative kernel matrix D(x_i, mu_j, mu_k), advanced one x-grid step at a
// time with a 4th-order (cubic) quadrature rule in t.
class KernelStream {
  public:
    explicit KernelStream(const KernelTables& tables);

    int x_index() const { return index_; }
    const Eigen::MatrixXcd& matrix() const { return d_; }
    // Moves to the next x-grid node and returns D there. The first position
    // (index 0, D == 0) is taken at construction.
    const Eigen::MatrixXcd& advance();

  private:
    const KernelTables* tables_;
    Eigen::MatrixXcd d_;
    int index_ = 0;
};

// D(x_i, *, *) computed from scratch; convenience for spot checks.
Eigen::MatrixXcd d_matrix(const KernelTables& tables, int x_index);

// Nystrom matrix of the integral operator
// (Q f)(la) = (1/2 pi i) oint D(x, la, mu) hat M_N(mu) f(mu) d mu.
Eigen::MatrixXcd build_Q(const Eigen::MatrixXcd& d_at_x, const WeylDiffSamples& mhat);

struct MainEquationSolve {
    int x_index = 0;
    Eigen::VectorXcd phi;               // phi(x_i, mu_j) at the nodes
    double condition_estimate = 0.0;    // reciprocal condition of I + Q
};

MainEquationSolve solve_main_equation(int x_index, const KernelTables& tables,
                                      const Eigen::MatrixXcd& d_at_x,
                                      const WeylDiffSamples& mhat, double cond_floor = 1e-13);

// sigma(x) = sigma_tilde(x) - (1/2 pi i) oint (2 phi_tilde phi - 1) hat M_N d mu
// on the x-grid; `solutions` holds phi(x_i, mu_j) row per grid node.
PotentialSigma reconstruct_sigma(const KernelTables& tables, const Eigen::MatrixXcd& solutions,
                                 const WeylDiffSamples& mhat, const PotentialSigma& sigma_tilde);

// phi^[1](pi, *) on the nodes: solve (I + Q(pi)) z = phi_tilde^[1](pi, *) - c1 phi_tilde(pi, *)
// with c1 = (1/2 pi i) oint phi_tilde(pi, mu) hat M_N(mu) phi(pi, mu) d mu,
// then subtract sigma_hat(pi) phi(pi, *).
Eigen::VectorXcd phi_quasi_at_pi(const KernelTables& tables, const Eigen::MatrixXcd& d_at_pi,
                                 const Eigen::VectorXcd& phi_at_pi, const WeylDiffSamples& mhat,
                                 cplx sigma_hat_pi, double cond_floor = 1e-13);

// Evaluators for the entire functions behind the boundary-polynomial
// reconstruction; kept separate so their zero/degree properties are testable.
struct PolynomialAssembly {
    const BoundaryPolynomials* tilde_polys = nullptr;
    const KernelTables* tables = nullptr;    // for phi_tilde(pi, *), phi_tilde^[1](pi, *)
    const WeylDiffSamples* mhat = nullptr;
    Eigen::VectorXcd phi_pi;                 // phi(pi, mu_j)
    Eigen::VectorXcd phi_q_pi;               // phi^[1](pi, mu_j)
    std::vector<cplx> head;                  // la_1 .. la_{N-1} (target, with repeats)
    std::vector<cplx> head_tilde;            // tilde la_1 .. la_{N-1}

    cplx Z(cplx la) const;
    cplx Y(cplx la) const;
    cplx product(cplx la) const;  // prod (la - la_k) / (la - tilde la_k)
};

struct PolynomialFit {
    BoundaryPolynomials polys;
    double residual_r1 = 0.0;
    double residual_r2 = 0.0;
};

// Fit monic degree-p g1 = product * Z and degree-<=p g2 = product * Y from
// samples on the circle |la| = 2 * contour radius.
PolynomialFit reconstruct_polynomials(const PolynomialAssembly& assembly);

// Z continued to the interior of the contour. The plain node quadrature of Z
// picks up the Cauchy-kernel residue at mu = la once la moves inside, so that
// residue is removed here; hat M_N itself continues as the head
// partial-fraction difference of the two data sets. Valid for la away from
// the contour nodes and from the head eigenvalues of either problem.
cplx z_interior(const PolynomialAssembly& assembly, const PotentialSigma& sigma_tilde,
                const SpectralData& target, const SpectralData& tilde_data, cplx la,
                const OdeOptions& ode = {});

// Full pipeline; `tilde_data` must be the spectral data of `tilde_problem`
// with at least as many entries as `target`.
ReconstructionResult invert_with_data(const Problem& tilde_problem, const SpectralData& tilde_data,
                                      const SpectralData& target, const InverseOptions& opts = {});

ReconstructionResult invert(const Problem& tilde_problem, const SpectralData& target,
                            const InverseOptions& opts = {});

}  // namespace sl
