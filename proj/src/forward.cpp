#include "sl/forward.hpp"

#include <algorithm>
#include <cmath>

namespace sl {

namespace {

struct Derivs {
    cplx dy;
    cplx dy1;
};

inline Derivs rhs(const PotentialSigma& sigma, cplx la, double x, const QuasiState& s) {
    cplx sg = sigma(x);
    return {sg * s.y + s.y1, -sg * s.y1 - (sg * sg + la) * s.y};
}

// Dormand-Prince 5(4) tableau.
constexpr double kC[7] = {0.0, 1.0 / 5, 3.0 / 10, 4.0 / 5, 8.0 / 9, 1.0, 1.0};
constexpr double kA[7][6] = {
    {},
    {1.0 / 5},
    {3.0 / 40, 9.0 / 40},
    {44.0 / 45, -56.0 / 15, 32.0 / 9},
    {19372.0 / 6561, -25360.0 / 2187, 64448.0 / 6561, -212.0 / 729},
    {9017.0 / 3168, -355.0 / 33, 46732.0 / 5247, 49.0 / 176, -5103.0 / 18656},
    {35.0 / 384, 0.0, 500.0 / 1113, 125.0 / 192, -2187.0 / 6784, 11.0 / 84},
};
constexpr double kB5[7] = {35.0 / 384,      0.0,        500.0 / 1113, 125.0 / 192,
                           -2187.0 / 6784,  11.0 / 84,  0.0};
constexpr double kB4[7] = {5179.0 / 57600,    0.0,          7571.0 / 16695, 393.0 / 640,
                           -92097.0 / 339200, 187.0 / 2100, 1.0 / 40};

// One attempted step of size h from (x, s); returns the 5th-order result and
// the embedded error estimate.
void dp_step(const PotentialSigma& sigma, cplx la, double x, const QuasiState& s, double h,
             QuasiState& out, double& err) {
    Derivs k[7];
    k[0] = rhs(sigma, la, x, s);
    for (int i = 1; i < 7; ++i) {
        QuasiState stage = s;
        for (int j = 0; j < i; ++j) {
            stage.y += h * kA[i][j] * k[j].dy;
            stage.y1 += h * kA[i][j] * k[j].dy1;
        }
        k[i] = rhs(sigma, la, x + kC[i] * h, stage);
    }
    out = s;
    cplx ey(0.0), ey1(0.0);
    for (int i = 0; i < 7; ++i) {
        out.y += h * kB5[i] * k[i].dy;
        out.y1 += h * kB5[i] * k[i].dy1;
        ey += h * (kB5[i] - kB4[i]) * k[i].dy;
        ey1 += h * (kB5[i] - kB4[i]) * k[i].dy1;
    }
    double scale = 1.0 + std::max(std::max(std::abs(s.y), std::abs(out.y)),
                                  std::max(std::abs(s.y1), std::abs(out.y1)));
    err = std::max(std::abs(ey), std::abs(ey1)) / scale;
}

// Integrates from a to b (either direction); calls `record` after each
// accepted step with the current position and state.
template <typename Record>
QuasiState sweep(const PotentialSigma& sigma, cplx la, QuasiState s, double a, double b,
                 const OdeOptions& opts, double cap, Record&& record) {
    double x = a;
    double dir = (b >= a) ? 1.0 : -1.0;
    double span = std::abs(b - a);
    double rho_mag = std::abs(sqrt_lambda(la));
    double h = std::min({cap, span, 0.1 / (1.0 + rho_mag)});
    int attempts = 0;
    while (std::abs(x - b) > 1e-14 * (1.0 + span)) {
        double remaining = std::abs(b - x);
        h = std::min({h, cap, remaining});
        // A step clamped by the distance left is a finishing sliver, not a
        // controller failure; only the controller driving h down is an error.
        if (h < opts.min_step && remaining > opts.min_step)
            throw Error(ErrorKind::StepFailure, "step size underflow in ODE integration");
        if (++attempts > opts.max_steps)
            throw Error(ErrorKind::StepFailure, "step budget exhausted in ODE integration");
        QuasiState next;
        double err;
        dp_step(sigma, la, x, s, dir * h, next, err);
        if (err <= opts.tol) {
            x += dir * h;
            s = next;
            record(x, s);
            double grow = (err > 0.0) ? 0.9 * std::pow(opts.tol / err, 0.2) : 5.0;
            h *= std::clamp(grow, 0.2, 5.0);
        } else {
            h *= std::max(0.2, 0.9 * std::pow(opts.tol / err, 0.2));
        }
    }
    return s;
}

}  // namespace

Trajectory integrate(const PotentialSigma& sigma, cplx la, QuasiState init, Direction dir,
                     const OdeOptions& opts) {
    const auto& grid = sigma.grid();
    const int n = sigma.size();
    Trajectory traj;
    traj.la = la;
    traj.states.resize(n);
    // States are recorded in sweep order: grid order when running forward,
    // reversed when running backward from pi.
    if (dir == Direction::forward) {
        traj.states[0] = init;
        QuasiState s = init;
        for (int i = 1; i < n; ++i) {
            s = sweep(sigma, la, s, grid[i - 1], grid[i], opts, grid[i] - grid[i - 1],
                      [](double, const QuasiState&) {});
            traj.states[i] = s;
        }
    } else {
        traj.states[0] = init;
        QuasiState s = init;
        for (int i = 1; i < n; ++i) {
            s = sweep(sigma, la, s, grid[n - i], grid[n - 1 - i], opts,
                      grid[n - i] - grid[n - 1 - i], [](double, const QuasiState&) {});
            traj.states[i] = s;
        }
    }
    traj.endpoint = traj.states.back();
    return traj;
}

QuasiState integrate_endpoint(const PotentialSigma& sigma, cplx la, QuasiState init,
                              Direction dir, const OdeOptions& opts) {
    double a = (dir == Direction::forward) ? 0.0 : kPi;
    double b = (dir == Direction::forward) ? kPi : 0.0;
    return sweep(sigma, la, init, a, b, opts, kPi, [](double, const QuasiState&) {});
}

EndpointValues phi_S_at_pi(const PotentialSigma& sigma, cplx la, const OdeOptions& opts) {
    QuasiState phi = integrate_endpoint(sigma, la, {1.0, 0.0}, Direction::forward, opts);
    QuasiState s = integrate_endpoint(sigma, la, {0.0, 1.0}, Direction::forward, opts);
    return {phi.y, phi.y1, s.y, s.y1};
}

cplx delta(const Problem& problem, cplx la, WhichDelta which, const OdeOptions& opts) {
    cplx r1 = eval_poly(problem.polys, Which::r1, la);
    cplx r2 = eval_poly(problem.polys, Which::r2, la);
    if (which == WhichDelta::delta1) {
        QuasiState phi = integrate_endpoint(problem.sigma, la, {1.0, 0.0}, Direction::forward, opts);
        return r1 * phi.y1 + r2 * phi.y;
    }
    QuasiState s = integrate_endpoint(problem.sigma, la, {0.0, 1.0}, Direction::forward, opts);
    return r1 * s.y1 + r2 * s.y;
}

cplx weyl(const Problem& problem, cplx la, const OdeOptions& opts) {
    cplx r1 = eval_poly(problem.polys, Which::r1, la);
    cplx r2 = eval_poly(problem.polys, Which::r2, la);
    EndpointValues e = phi_S_at_pi(problem.sigma, la, opts);
    cplx d1 = r1 * e.phi_q + r2 * e.phi;
    // Threshold sits above the attainable accuracy of Delta_1 (~1e-10 at
    // tol_ode = 1e-11) so genuine poles are flagged reliably.
    double scale = std::max(1.0, std::pow(std::abs(la), problem.polys.degree + 1));
    if (std::abs(d1) < 3e-9 * scale)
        throw Error(ErrorKind::NearPole, "la is too close to an eigenvalue");
    cplx d0 = r1 * e.s_q + r2 * e.s;
    return -d0 / d1;
}

cplx psi_at_zero(const Problem& problem, cplx la, const OdeOptions& opts) {
    cplx r1 = eval_poly(problem.polys, Which::r1, la);
    cplx r2 = eval_poly(problem.polys, Which::r2, la);
    QuasiState psi = integrate_endpoint(problem.sigma, la, {r1, -r2}, Direction::backward, opts);
    return psi.y;
}

cplx analytic_derivative(const std::function<cplx(cplx)>& f, cplx la0, int order, double radius,
                         int node_count) {
    // j!/(2 pi i) oint f(z)/(z - la0)^{j+1} dz = j!/(M r^j) sum f(z_m) e^{-i j theta_m}
    cplx acc(0.0);
    for (int m = 0; m < node_count; ++m) {
        double theta = 2.0 * kPi * static_cast<double>(m) / static_cast<double>(node_count);
        cplx z = la0 + std::polar(radius, theta);
        acc += f(z) * std::polar(1.0, -theta * static_cast<double>(order));
    }
    double fact = 1.0;
    for (int j = 2; j <= order; ++j) fact *= static_cast<double>(j);
    return acc * fact / (static_cast<double>(node_count) * std::pow(radius, order));
}

}  // namespace sl
