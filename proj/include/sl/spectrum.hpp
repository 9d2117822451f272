#pragma once

#include <functional>
#include <utility>
#include <vector>

#include "sl/core.hpp"
#include "sl/forward.hpp"

namespace sl {

using AnalyticFn = std::function<cplx(cplx)>;

struct SpectrumOptions {
    double cluster_tol = 1e-7;
    int weight_nodes = 64;
    int head_scan_offset = 4;  // head disk index = p + offset
    OdeOptions ode{};
};

// Number of zeros of f inside the circle, by the argument principle on the
// discretized contour. Throws ZeroOnContour if f nearly vanishes on a node
// and NonIntegerWinding if the quadrature does not settle near an integer.
int count_zeros(const AnalyticFn& f, cplx center, double radius);

// All zeros of f inside the disk, with multiplicities. Zeros closer than
// cluster_tol are reported as one multiple zero at the cluster centroid.
std::vector<std::pair<cplx, int>> zeros_in_disk(const AnalyticFn& f, cplx center, double radius,
                                                double cluster_tol = 1e-7);

// Eigenvalues of the problem (zeros of Delta_1) numbered by |rho_n| with the
// head located by contour subdivision and the tail by Newton refinement of
// the asymptotic seeds rho_n ~ n - p - 1. Weights are left empty.
// Zeros of an entire function numbered like eigenvalues: a head disk around
// the origin resolved by counting/clustering, then Newton tail refinement
// from the asymptotic seeds rho_n = n - degree - 1 + seed_shift. The head
// disk rho-radius sits midway between consecutive seeds. with_cut also
// selects the smallest admissible contour cut (only meaningful for
// eigenvalue-type numbering, seed_shift == 0).
SpectralData locate_zeros(const AnalyticFn& f, int degree, int n_max, double seed_shift,
                          bool with_cut, const SpectrumOptions& opts = {});

SpectralData locate_eigenvalues(const Problem& problem, int n_max,
                                const SpectrumOptions& opts = {});

// Weight numbers alpha_{n+k} = (1/2 pi i) oint_{c_n} (la - la_n)^k M(la) dla
// over small circles around each distinct eigenvalue. Simple eigenvalues are
// cross-checked against -Delta_0(la_n) / Delta_1'(la_n).
void weight_numbers(const Problem& problem, SpectralData& data, const SpectrumOptions& opts = {});

SpectralData compute_spectral_data(const Problem& problem, int n_max,
                                   const SpectrumOptions& opts = {});

// Finite partial-fraction head M_N(la) of the Weyl function.
cplx weyl_partial(const SpectralData& data, int N, cplx la);

// hat M_N = M_N - tilde M_N sampled on the contour. Both heads' poles must
// lie strictly inside; a pole within 1e-6 of the circle is rejected.
WeylDiffSamples weyl_diff_on_contour(const SpectralData& data, const SpectralData& tilde_data,
                                     const ContourGrid& grid);

}  // namespace sl
