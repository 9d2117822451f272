#pragma once

#include <utility>

#include "sl/forward.hpp"
#include "sl/inverse.hpp"
#include "sl/spectrum.hpp"

namespace sl {

// Fits the boundary-data representation
//   Delta_0 = rho^{2p} cos(rho pi) + rho^{2p} int_0^pi J(t) cos(rho t) dt + sum D_n rho^{2n}
//   Delta_1 = -rho^{2p+1} sin(rho pi) + rho^{2p+1} int_0^pi G(t) sin(rho t) dt + sum C_n rho^{2n}
// with J in cosine modes 0..K_F, G in sine modes 1..K_F, by least squares over
// the abscissas rho_k = k/2, k = 1..2(K_F+p+2). Throws FitResidualTooLarge
// when the scaled residual exceeds 1e-6.
CauchyData cauchy_from_problem(const Problem& problem, int basis_size = 64,
                               const OdeOptions& ode = {});

// Series coefficients recovered from the stored samples (exact through
// discrete orthogonality) plus closed-form mode integrals.
class CauchyEvaluator {
  public:
    explicit CauchyEvaluator(const CauchyData& cd);

    cplx delta0(cplx la) const;
    cplx delta1(cplx la) const;
    cplx weyl(cplx la) const { return -delta0(la) / delta1(la); }

    int degree() const { return degree_; }

  private:
    std::vector<cplx> g_coef_;  // sine modes 1..K_F
    std::vector<cplx> j_coef_;  // cosine modes 0..K_F
    std::vector<cplx> c_;
    std::vector<cplx> d_;
    int degree_ = 0;
};

std::pair<cplx, cplx> delta_from_cauchy(const CauchyData& cd, cplx la);  // (Delta_0, Delta_1)

// Zeros theta_{n, j} of Delta_j, numbered canonically, with repeats per
// multiplicity; asymptotics sqrt(theta_nj) ~ n - p - (j+1)/2.
std::vector<cplx> zeros_from_cauchy(const CauchyData& cd, int j, int n_max,
                                    const SpectrumOptions& opts = {});

// Full (theta_n, alpha_n) package from the Delta_1 zeros: head weights by
// contour moments of -Delta_0/Delta_1, tail weights by the simple-residue
// formula alpha_n = -Delta_0(theta_n)/Delta_1'(theta_n). Throws HeadEscaped
// when no admissible contour separates the head.
SpectralData spectral_from_cauchy(const CauchyData& cd, int n_max,
                                  const SpectrumOptions& opts = {});

// Reduction of the Cauchy inverse problem to the spectral one; when
// opts.verify is set, additionally re-extracts Cauchy data from the
// reconstruction and compares Delta_0/Delta_1 on held-out points.
ReconstructionResult invert_from_cauchy(const Problem& tilde_problem, const CauchyData& cd,
                                        int n_max, const InverseOptions& opts = {});

}  // namespace sl
