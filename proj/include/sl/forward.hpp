#pragma once

#include <functional>
#include <vector>

#include "sl/core.hpp"

namespace sl {

// State of the regularized first-order system: y and the quasi-derivative
// y^[1] = y' - sigma(x) y.
struct QuasiState {
    cplx y{0.0};
    cplx y1{0.0};
};

enum class Direction { forward, backward };

struct Trajectory {
    cplx la;
    std::vector<QuasiState> states;  // one per x-grid node, in grid order
    QuasiState endpoint;             // state at the far end of the sweep
};

struct OdeOptions {
    double tol = 1e-11;
    double min_step = 1e-7;
    int max_steps = 30000;  // attempted steps per sweep before StepFailure
};

// Integrates y' = sigma y + y^[1], (y^[1])' = -sigma y^[1] - (sigma^2 + la) y
// across [0, pi] with states recorded at every sigma grid node. Backward runs
// interpret `init` at x = pi and fill the grid from the right.
Trajectory integrate(const PotentialSigma& sigma, cplx la, QuasiState init, Direction dir,
                     const OdeOptions& opts = {});

// Endpoint-only integration; adaptive steps are not clamped to the grid.
QuasiState integrate_endpoint(const PotentialSigma& sigma, cplx la, QuasiState init,
                              Direction dir, const OdeOptions& opts = {});

struct EndpointValues {
    cplx phi;     // phi(pi, la)
    cplx phi_q;   // phi^[1](pi, la)
    cplx s;       // S(pi, la)
    cplx s_q;     // S^[1](pi, la)
};

EndpointValues phi_S_at_pi(const PotentialSigma& sigma, cplx la, const OdeOptions& opts = {});

enum class WhichDelta { delta0, delta1 };

// Characteristic functions Delta_1 = r1 phi^[1](pi) + r2 phi(pi) and
// Delta_0 = r1 S^[1](pi) + r2 S(pi).
cplx delta(const Problem& problem, cplx la, WhichDelta which, const OdeOptions& opts = {});

// Weyl function M = -Delta_0 / Delta_1. Throws NearPole close to a zero of
// Delta_1, with the threshold scaled by max(1, |la|^{p+1}).
cplx weyl(const Problem& problem, cplx la, const OdeOptions& opts = {});

// psi(0, la) from backward integration of psi(pi) = r1(la), psi^[1](pi) = -r2(la).
cplx psi_at_zero(const Problem& problem, cplx la, const OdeOptions& opts = {});

// j-th derivative of an analytic f at la0 via the Cauchy integral formula,
// trapezoidal with node_count points on the circle of the given radius.
cplx analytic_derivative(const std::function<cplx(cplx)>& f, cplx la0, int order, double radius,
                         int node_count = 64);

}  // namespace sl
