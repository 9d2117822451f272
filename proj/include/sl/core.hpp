#pragma once

#include <span>
#include <vector>

#include "sl/common.hpp"

namespace sl {

// Antiderivative sigma of the distribution potential q = sigma', sampled on a
// uniform grid over [0, pi]. Values between nodes come from 4-point cubic
// (Lagrange) interpolation.
class PotentialSigma {
  public:
    PotentialSigma() = default;
    PotentialSigma(std::vector<double> grid, std::vector<cplx> values);

    static PotentialSigma zero(int n_points);
    template <typename F>
    static PotentialSigma sample(int n_points, F&& f) {
        std::vector<double> grid(n_points);
        std::vector<cplx> values(n_points);
        for (int i = 0; i < n_points; ++i) {
            grid[i] = kPi * static_cast<double>(i) / static_cast<double>(n_points - 1);
            values[i] = f(grid[i]);
        }
        return PotentialSigma(std::move(grid), std::move(values));
    }

    cplx operator()(double x) const;

    int size() const { return static_cast<int>(values_.size()); }
    double step() const { return step_; }
    const std::vector<double>& grid() const { return grid_; }
    const std::vector<cplx>& values() const { return values_; }

  private:
    std::vector<double> grid_;
    std::vector<cplx> values_;
    double step_ = 0.0;
};

// The pair (r1, r2) of the class R_p: both of degree p, r1 monic, relatively
// prime. Coefficients are stored lowest order first.
struct BoundaryPolynomials {
    int degree = 0;
    std::vector<cplx> c;  // r1: c[0] .. c[p], c[p] == 1
    std::vector<cplx> d;  // r2: d[0] .. d[p]

    void validate() const;
};

enum class Which { r1, r2 };

cplx eval_poly(const BoundaryPolynomials& polys, Which which, cplx la);

struct Problem {
    PotentialSigma sigma;
    BoundaryPolynomials polys;

    void validate() const;
};

// Eigenvalues with multiplicity clusters plus weight numbers. Entries are
// repeated per multiplicity; weights line up with indices, so a cluster
// starting at n with multiplicity m carries the Laurent coefficients
// alpha_{n}, .., alpha_{n+m-1} of the Weyl function at la_n.
struct SpectralData {
    struct Cluster {
        int start = 1;  // 1-based index n (a member of I)
        int multiplicity = 1;
    };

    std::vector<cplx> eigenvalues;
    std::vector<cplx> weights;
    std::vector<Cluster> clusters;
    int degree = 0;     // p
    int cut_index = 1;  // N of the contour split

    int count() const { return static_cast<int>(eigenvalues.size()); }
    cplx rho(int n) const { return sqrt_lambda(eigenvalues[n - 1]); }

    void validate(bool check_weights = true) const;
};

// Deterministic total order: by |rho|, ties by arg(rho) ascending.
bool eigenvalue_less(cplx la_a, cplx la_b);

// Sorts (eigenvalue, weight-block) clusters into the canonical numbering and
// rebuilds the index bookkeeping.
void sort_spectral_data(SpectralData& data);

// The circle Gamma_N of radius (N - p - 3/2)^2 with trapezoidal quadrature
// nodes and weights for closed contour integrals.
struct ContourGrid {
    int cut_index = 0;
    int degree = 0;
    double radius = 0.0;
    std::vector<cplx> nodes;
    std::vector<cplx> weights;

    int size() const { return static_cast<int>(nodes.size()); }
};

ContourGrid make_contour(int N, int p, int node_count);

// (1/2*pi*i) * sum_j w_j v_j  -- discretizes (1/2*pi*i) oint v(mu) dmu.
cplx contour_integral(std::span<const cplx> values, const ContourGrid& grid);

// hat M_N sampled at the contour nodes.
struct WeylDiffSamples {
    ContourGrid contour;
    std::vector<cplx> values;
    double delta1_norm = 0.0;

    void validate() const;
};

// Generalized Cauchy data (G, J, C_0..C_p, D_0..D_{p-1}). G and J are stored
// as samples on a uniform grid over [0, pi]; both are truncated trigonometric
// series with basis_size modes, so the samples determine the coefficients
// exactly through discrete orthogonality.
struct CauchyData {
    std::vector<cplx> g_samples;  // sine series, modes 1..basis_size
    std::vector<cplx> j_samples;  // cosine series, modes 0..basis_size
    std::vector<cplx> c_coeffs;   // C_0..C_p
    std::vector<cplx> d_coeffs;   // D_0..D_{p-1}
    int basis_size = 0;
    int degree = 0;
    double fit_residual = 0.0;

    void validate() const;
};

struct Diagnostics {
    std::vector<double> condition_estimates;  // per x-grid point
    double delta1 = 0.0;                      // max |hat M_N| on the contour
    double delta2_tail = 0.0;                 // truncated l2 tail difference
    double fit_residual_r1 = 0.0;
    double fit_residual_r2 = 0.0;
    double verify_lambda_residual = 0.0;
    double verify_alpha_residual = 0.0;
    int cut_index = 0;
};

struct ReconstructionResult {
    Problem problem;
    Diagnostics diagnostics;
};

}  // namespace sl
