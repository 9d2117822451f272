#include "sl/inverse.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace sl {

namespace {

// Quadrature weights of the interval [x_i, x_{i+1}] on its 4-point cubic
// window; exact for cubics, composite error O(h^4).
void interval_weights(int i, int n, double h, int idx[4], double w[4]) {
    if (i == 0) {
        int id[4] = {0, 1, 2, 3};
        double ww[4] = {9.0, 19.0, -5.0, 1.0};
        std::copy(id, id + 4, idx);
        for (int k = 0; k < 4; ++k) w[k] = ww[k] * h / 24.0;
    } else if (i == n - 2) {
        int id[4] = {n - 4, n - 3, n - 2, n - 1};
        double ww[4] = {1.0, -5.0, 19.0, 9.0};
        std::copy(id, id + 4, idx);
        for (int k = 0; k < 4; ++k) w[k] = ww[k] * h / 24.0;
    } else {
        int id[4] = {i - 1, i, i + 1, i + 2};
        double ww[4] = {-1.0, 13.0, 13.0, -1.0};
        std::copy(id, id + 4, idx);
        for (int k = 0; k < 4; ++k) w[k] = ww[k] * h / 24.0;
    }
}

// Contours of radius R carry kernel entries of size e^{2 sqrt(R) x}; the
// main-equation matrix is then badly scaled and a double LU loses ~rcond
// digits. Below this reciprocal-condition threshold the solve is redone in
// extended precision, which restores ~8 extra digits at these matrix sizes.
constexpr double kPromoteRcond = 1e-6;

using lcplx = std::complex<long double>;
using MatrixXlc = Eigen::Matrix<lcplx, Eigen::Dynamic, Eigen::Dynamic>;
using VectorXlc = Eigen::Matrix<lcplx, Eigen::Dynamic, 1>;

Eigen::VectorXcd solve_extended(const Eigen::MatrixXcd& a, const Eigen::VectorXcd& b) {
    MatrixXlc al = a.cast<lcplx>();
    VectorXlc bl = b.cast<lcplx>();
    Eigen::PartialPivLU<MatrixXlc> lu(al);
    VectorXlc x = lu.solve(bl);
    x += lu.solve(bl - al * x);
    return x.cast<cplx>();
}

}  // namespace

KernelTables build_kernel_tables(const PotentialSigma& sigma_tilde, const ContourGrid& grid,
                                 const OdeOptions& ode) {
    KernelTables t;
    t.grid = grid;
    t.x_grid = sigma_tilde.grid();
    const int nx = static_cast<int>(t.x_grid.size());
    const int mq = grid.size();
    t.phi.resize(nx, mq);
    t.phi_q.resize(nx, mq);
    for (int j = 0; j < mq; ++j) {
        Trajectory traj = integrate(sigma_tilde, grid.nodes[j], {1.0, 0.0}, Direction::forward, ode);
        for (int i = 0; i < nx; ++i) {
            t.phi(i, j) = traj.states[i].y;
            t.phi_q(i, j) = traj.states[i].y1;
        }
    }
    return t;
}

KernelStream::KernelStream(const KernelTables& tables) : tables_(&tables) {
    if (tables.x_grid.size() < 4)
        throw Error(ErrorKind::InvalidArgument, "kernel stream needs at least 4 x-grid points");
    const int mq = tables.grid.size();
    d_ = Eigen::MatrixXcd::Zero(mq, mq);
}

const Eigen::MatrixXcd& KernelStream::advance() {
    const int n = static_cast<int>(tables_->x_grid.size());
    if (index_ + 1 >= n)
        throw Error(ErrorKind::InvalidArgument, "kernel stream advanced past the grid");
    double h = tables_->x_grid[1] - tables_->x_grid[0];
    int idx[4];
    double w[4];
    interval_weights(index_, n, h, idx, w);
    for (int k = 0; k < 4; ++k) {
        Eigen::VectorXcd v = tables_->phi.row(idx[k]).transpose();
        d_.noalias() += w[k] * (v * v.transpose());
    }
    ++index_;
    return d_;
}

Eigen::MatrixXcd d_matrix(const KernelTables& tables, int x_index) {
    KernelStream stream(tables);
    while (stream.x_index() < x_index) stream.advance();
    return stream.matrix();
}

Eigen::MatrixXcd build_Q(const Eigen::MatrixXcd& d_at_x, const WeylDiffSamples& mhat) {
    const ContourGrid& grid = mhat.contour;
    const int mq = grid.size();
    if (d_at_x.rows() != mq || d_at_x.cols() != mq)
        throw Error(ErrorKind::InvalidArgument, "kernel matrix does not match the contour");
    Eigen::VectorXcd m(mq);
    for (int k = 0; k < mq; ++k)
        m[k] = grid.nodes[k] * mhat.values[k] / static_cast<double>(mq);
    return d_at_x * m.asDiagonal();
}

MainEquationSolve solve_main_equation(int x_index, const KernelTables& tables,
                                      const Eigen::MatrixXcd& d_at_x,
                                      const WeylDiffSamples& mhat, double cond_floor) {
    Eigen::MatrixXcd a = build_Q(d_at_x, mhat);
    a.diagonal().array() += 1.0;
    Eigen::PartialPivLU<Eigen::MatrixXcd> lu(a);
    MainEquationSolve out;
    out.x_index = x_index;
    out.condition_estimate = lu.rcond();
    if (!(out.condition_estimate > cond_floor))
        throw Error(ErrorKind::IllConditioned,
                    "main equation matrix is numerically singular at x index " +
                        std::to_string(x_index));
    Eigen::VectorXcd rhs = tables.phi.row(x_index).transpose();
    if (out.condition_estimate < kPromoteRcond) {
        out.phi = solve_extended(a, rhs);
        return out;
    }
    out.phi = lu.solve(rhs);
    // One step of iterative refinement.
    Eigen::VectorXcd r = rhs - a * out.phi;
    out.phi += lu.solve(r);
    return out;
}

PotentialSigma reconstruct_sigma(const KernelTables& tables, const Eigen::MatrixXcd& solutions,
                                 const WeylDiffSamples& mhat, const PotentialSigma& sigma_tilde) {
    const int nx = static_cast<int>(tables.x_grid.size());
    const int mq = tables.grid.size();
    if (solutions.rows() != nx || solutions.cols() != mq)
        throw Error(ErrorKind::InvalidArgument, "solution table does not match the grids");
    std::vector<cplx> values(nx);
    for (int i = 0; i < nx; ++i) {
        cplx acc(0.0);
        for (int k = 0; k < mq; ++k) {
            cplx term = 2.0 * tables.phi(i, k) * solutions(i, k) - 1.0;
            acc += tables.grid.nodes[k] * term * mhat.values[k];
        }
        values[i] = sigma_tilde.values()[i] - acc / static_cast<double>(mq);
    }
    return PotentialSigma(tables.x_grid, std::move(values));
}

Eigen::VectorXcd phi_quasi_at_pi(const KernelTables& tables, const Eigen::MatrixXcd& d_at_pi,
                                 const Eigen::VectorXcd& phi_at_pi, const WeylDiffSamples& mhat,
                                 cplx sigma_hat_pi, double cond_floor) {
    const int nx = static_cast<int>(tables.x_grid.size());
    const int mq = tables.grid.size();
    // c1 = (1/2 pi i) oint phi_tilde(pi, mu) hat M_N(mu) phi(pi, mu) d mu.
    cplx c1(0.0);
    for (int k = 0; k < mq; ++k)
        c1 += tables.grid.nodes[k] * tables.phi(nx - 1, k) * mhat.values[k] * phi_at_pi[k];
    c1 /= static_cast<double>(mq);

    Eigen::MatrixXcd a = build_Q(d_at_pi, mhat);
    a.diagonal().array() += 1.0;
    Eigen::PartialPivLU<Eigen::MatrixXcd> lu(a);
    if (!(lu.rcond() > cond_floor))
        throw Error(ErrorKind::IllConditioned, "main equation matrix is singular at x = pi");
    Eigen::VectorXcd rhs =
        tables.phi_q.row(nx - 1).transpose() - c1 * tables.phi.row(nx - 1).transpose();
    if (lu.rcond() < kPromoteRcond)
        return solve_extended(a, rhs) - sigma_hat_pi * phi_at_pi;
    Eigen::VectorXcd z = lu.solve(rhs);
    z += lu.solve(rhs - a * z);
    return z - sigma_hat_pi * phi_at_pi;
}

cplx PolynomialAssembly::product(cplx la) const {
    cplx acc(1.0);
    for (std::size_t k = 0; k < head.size(); ++k)
        acc *= (la - head[k]) / (la - head_tilde[k]);
    return acc;
}

cplx PolynomialAssembly::Z(cplx la) const {
    const ContourGrid& grid = tables->grid;
    const int mq = grid.size();
    const int nx = static_cast<int>(tables->x_grid.size());
    cplx r1 = eval_poly(*tilde_polys, Which::r1, la);
    cplx r2 = eval_poly(*tilde_polys, Which::r2, la);
    cplx acc(0.0);
    for (int k = 0; k < mq; ++k) {
        cplx num = r1 * tables->phi_q(nx - 1, k) + r2 * tables->phi(nx - 1, k);
        acc += grid.nodes[k] * num / (la - grid.nodes[k]) * phi_pi[k] * mhat->values[k];
    }
    return r1 - acc / static_cast<double>(mq);
}

cplx PolynomialAssembly::Y(cplx la) const {
    const ContourGrid& grid = tables->grid;
    const int mq = grid.size();
    const int nx = static_cast<int>(tables->x_grid.size());
    cplx r1 = eval_poly(*tilde_polys, Which::r1, la);
    cplx r2 = eval_poly(*tilde_polys, Which::r2, la);
    cplx c2(0.0), acc(0.0);
    for (int k = 0; k < mq; ++k) {
        c2 += grid.nodes[k] * (tables->phi(nx - 1, k) * phi_pi[k] - 1.0) * mhat->values[k];
        cplx num = r1 * tables->phi_q(nx - 1, k) + r2 * tables->phi(nx - 1, k);
        acc += grid.nodes[k] * num / (la - grid.nodes[k]) * phi_q_pi[k] * mhat->values[k];
    }
    return r2 - r1 * c2 / static_cast<double>(mq) + acc / static_cast<double>(mq);
}

PolynomialFit reconstruct_polynomials(const PolynomialAssembly& assembly) {
    const int p = assembly.tilde_polys->degree;
    const double rr = 2.0 * assembly.tables->grid.radius;
    const int ns = 4 * (p + 1);
    Eigen::MatrixXcd v(ns, p + 1);
    Eigen::VectorXcd g1(ns), g2(ns);
    for (int s = 0; s < ns; ++s) {
        cplx la = std::polar(rr, 2.0 * kPi * (s + 0.5) / ns);
        cplx prod = assembly.product(la);
        g1[s] = prod * assembly.Z(la);
        g2[s] = prod * assembly.Y(la);
        cplx pw(1.0);
        for (int j = 0; j <= p; ++j) {
            v(s, j) = pw;
            pw *= la;
        }
    }
    Eigen::ColPivHouseholderQR<Eigen::MatrixXcd> qr(v);
    Eigen::VectorXcd c = qr.solve(g1);
    Eigen::VectorXcd d = qr.solve(g2);
    double scale = std::max(1.0, std::pow(rr, p));
    double res1 = (v * c - g1).cwiseAbs().maxCoeff();
    double res2 = (v * d - g2).cwiseAbs().maxCoeff();
    if (res1 > 1e-7 * scale || res2 > 1e-7 * scale)
        throw Error(ErrorKind::DegreeViolation,
                    "boundary polynomial samples are not degree-p polynomials "
                    "(residuals " +
                        std::to_string(res1) + ", " + std::to_string(res2) + ")");
    cplx lead = c[p];
    if (std::abs(lead - cplx(1.0)) > 1e-6)
        throw Error(ErrorKind::DegreeViolation, "reconstructed r1 is not monic");
    PolynomialFit fit;
    fit.residual_r1 = res1;
    fit.residual_r2 = res2;
    fit.polys.degree = p;
    fit.polys.c.resize(p + 1);
    fit.polys.d.resize(p + 1);
    for (int j = 0; j <= p; ++j) {
        fit.polys.c[j] = c[j] / lead;
        fit.polys.d[j] = d[j] / lead;
    }
    fit.polys.c[p] = 1.0;
    return fit;
}

cplx z_interior(const PolynomialAssembly& assembly, const PotentialSigma& sigma_tilde,
                const SpectralData& target, const SpectralData& tilde_data, cplx la,
                const OdeOptions& ode) {
    const KernelTables& tables = *assembly.tables;
    const ContourGrid& grid = tables.grid;
    const int mq = grid.size();
    const int nx = static_cast<int>(tables.x_grid.size());
    const int N = grid.cut_index;

    QuasiState end = integrate_endpoint(sigma_tilde, la, {1.0, 0.0}, Direction::forward, ode);
    cplx phit = end.y;     // phi_tilde(pi, la)
    cplx phit_q = end.y1;  // phi_tilde^[1](pi, la)

    // phi(pi, la) from the solved node values through the series relation;
    // the divided-difference kernel is entire, so this quadrature is clean
    // for any la off the nodes.
    cplx phi_la = phit;
    for (int k = 0; k < mq; ++k) {
        cplx mu = grid.nodes[k];
        cplx kern = (phit * tables.phi_q(nx - 1, k) - phit_q * tables.phi(nx - 1, k)) / (la - mu);
        phi_la -= mu * kern * assembly.mhat->values[k] * assembly.phi_pi[k] /
                  static_cast<double>(mq);
    }

    cplx mhat_la = weyl_partial(target, N, la) - weyl_partial(tilde_data, N, la);
    cplx r1 = eval_poly(*assembly.tilde_polys, Which::r1, la);
    cplx r2 = eval_poly(*assembly.tilde_polys, Which::r2, la);
    cplx residue = (r1 * phit_q + r2 * phit) * phi_la * mhat_la;
    return assembly.Z(la) - residue;
}

namespace {

bool admissible_cut(const SpectralData& data, int p, int cand) {
    double base = static_cast<double>(cand - p) - 1.5;
    if (cand < p + 2) return false;
    double R = base * base;
    for (int n = 1; n <= data.count(); ++n) {
        double a = std::abs(data.eigenvalues[n - 1]);
        if (std::abs(a - R) < 1e-6 * (1.0 + R)) return false;
        if ((n <= cand - 1) != (a < R)) return false;
    }
    for (const auto& cl : data.clusters)
        if (cl.multiplicity > 1 && cl.start + cl.multiplicity - 1 > cand - 1) return false;
    return true;
}

int select_cut(const SpectralData& target, const SpectralData& tilde_data, int p,
               const InverseOptions& opts, int count) {
    const int hi = std::min(p + opts.cut_margin, count);
    int base = -1;
    for (int cand = p + 2; cand <= hi; ++cand) {
        if (admissible_cut(target, p, cand) && admissible_cut(tilde_data, p, cand)) {
            base = cand;
            break;
        }
    }
    if (base < 0)
        throw Error(ErrorKind::HeadTooLarge, "no admissible contour for the given spectra");
    int cut = base;
    for (int n = base; n <= count; ++n) {
        cplx rho_hat = sqrt_lambda(target.eigenvalues[n - 1]) -
                       sqrt_lambda(tilde_data.eigenvalues[n - 1]);
        cplx alpha_hat = target.weights[n - 1] - tilde_data.weights[n - 1];
        if (std::abs(rho_hat) + std::abs(alpha_hat) > opts.tail_tol) {
            if (n + 1 > hi)
                throw Error(ErrorKind::HeadTooLarge,
                            "tail perturbation extends beyond the supported contour");
            cut = std::max(cut, n + 1);
        }
    }
    while (cut <= hi &&
           !(admissible_cut(target, p, cut) && admissible_cut(tilde_data, p, cut)))
        ++cut;
    if (cut > hi)
        throw Error(ErrorKind::HeadTooLarge, "no admissible enlarged contour");
    return cut;
}

}  // namespace

ReconstructionResult invert_with_data(const Problem& tilde_problem, const SpectralData& tilde_data,
                                      const SpectralData& target, const InverseOptions& opts) {
    tilde_problem.validate();
    tilde_data.validate();
    target.validate();
    const int p = tilde_problem.polys.degree;
    if (target.degree != p || tilde_data.degree != p)
        throw Error(ErrorKind::InvalidArgument, "degree mismatch between data and problem");
    const int count = std::min(target.count(), tilde_data.count());
    if (count < p + 2)
        throw Error(ErrorKind::InvalidArgument, "too few eigenvalues for the inversion");

    const int cut = select_cut(target, tilde_data, p, opts, count);
    ContourGrid grid = make_contour(cut, p, opts.node_count);
    WeylDiffSamples mhat = weyl_diff_on_contour(target, tilde_data, grid);

    KernelTables tables = build_kernel_tables(tilde_problem.sigma, grid, opts.ode);
    const int nx = static_cast<int>(tables.x_grid.size());
    const int mq = grid.size();

    Eigen::MatrixXcd solutions(nx, mq);
    Diagnostics diag;
    diag.cut_index = cut;
    diag.delta1 = mhat.delta1_norm;
    diag.condition_estimates.resize(nx);

    KernelStream stream(tables);
    Eigen::MatrixXcd d_at_pi;
    for (int i = 0; i < nx; ++i) {
        const Eigen::MatrixXcd& d = (i == 0) ? stream.matrix() : stream.advance();
        MainEquationSolve solve = solve_main_equation(i, tables, d, mhat, opts.cond_floor);
        solutions.row(i) = solve.phi.transpose();
        diag.condition_estimates[i] = solve.condition_estimate;
        if (i == nx - 1) d_at_pi = d;
    }

    PotentialSigma sigma = reconstruct_sigma(tables, solutions, mhat, tilde_problem.sigma);
    cplx sigma_hat_pi = sigma.values().back() - tilde_problem.sigma.values().back();
    Eigen::VectorXcd phi_pi = solutions.row(nx - 1).transpose();
    Eigen::VectorXcd phi_q_pi =
        phi_quasi_at_pi(tables, d_at_pi, phi_pi, mhat, sigma_hat_pi, opts.cond_floor);

    PolynomialAssembly assembly;
    assembly.tilde_polys = &tilde_problem.polys;
    assembly.tables = &tables;
    assembly.mhat = &mhat;
    assembly.phi_pi = phi_pi;
    assembly.phi_q_pi = phi_q_pi;
    for (int k = 1; k <= cut - 1; ++k) {
        assembly.head.push_back(target.eigenvalues[k - 1]);
        assembly.head_tilde.push_back(tilde_data.eigenvalues[k - 1]);
    }
    PolynomialFit fit = reconstruct_polynomials(assembly);
    diag.fit_residual_r1 = fit.residual_r1;
    diag.fit_residual_r2 = fit.residual_r2;

    double tail2 = 0.0;
    for (int n = cut; n <= count; ++n) {
        double d2 = std::abs(sqrt_lambda(target.eigenvalues[n - 1]) -
                             sqrt_lambda(tilde_data.eigenvalues[n - 1])) +
                    std::abs(target.weights[n - 1] - tilde_data.weights[n - 1]);
        tail2 += d2 * d2;
    }
    diag.delta2_tail = std::sqrt(tail2);

    ReconstructionResult result;
    result.problem = Problem{std::move(sigma), fit.polys};
    result.diagnostics = diag;

    if (opts.verify) try {
        SpectrumOptions sopts;
        sopts.cluster_tol = opts.cluster_tol;
        sopts.ode = opts.ode;
        // Cheap necessary condition first: the candidate's characteristic
        // function must nearly vanish at every target eigenvalue. A badly
        // wrong candidate is rejected here without the full zero search.
        const double pp = static_cast<double>(result.problem.polys.degree);
        for (int n = 1; n <= count; ++n) {
            cplx la = target.eigenvalues[n - 1];
            double rho = std::sqrt(std::abs(la));
            double scale = std::max(1.0, std::pow(rho, 2.0 * pp + 1.0));
            if (std::abs(delta(result.problem, la, WhichDelta::delta1, opts.ode)) >
                1e-3 * scale)
                throw Error(ErrorKind::VerificationFailure,
                            "candidate characteristic function does not vanish at a "
                            "target eigenvalue");
        }
        SpectralData rec = locate_eigenvalues(result.problem, count, sopts);
        double lam_res = 0.0;
        for (int n = 1; n <= count; ++n)
            lam_res = std::max(lam_res,
                               std::abs(rec.eigenvalues[n - 1] - target.eigenvalues[n - 1]));
        // Weight comparison through local moments of the reconstructed Weyl
        // function: robust when a multiple target eigenvalue splits slightly.
        double alpha_res = 0.0;
        for (const auto& cl : target.clusters) {
            cplx la0 = target.eigenvalues[cl.start - 1];
            double dist = std::numeric_limits<double>::infinity();
            for (const auto& other : target.clusters) {
                if (other.start == cl.start) continue;
                dist = std::min(dist, std::abs(la0 - target.eigenvalues[other.start - 1]));
            }
            double r = std::min(0.4 * dist, 0.5);
            const int mw = 64;
            std::vector<cplx> mv(mw), zc(mw);
            for (int j = 0; j < mw; ++j) {
                zc[j] = std::polar(r, 2.0 * kPi * j / mw);
                mv[j] = weyl(result.problem, la0 + zc[j], opts.ode);
            }
            for (int k = 0; k < cl.multiplicity; ++k) {
                cplx moment(0.0);
                for (int j = 0; j < mw; ++j) moment += mv[j] * std::pow(zc[j], k + 1);
                moment /= static_cast<double>(mw);
                cplx want = target.weights[cl.start - 1 + k];
                alpha_res = std::max(alpha_res,
                                     std::abs(moment - want) / std::max(1.0, std::abs(want)));
            }
        }
        result.diagnostics.verify_lambda_residual = lam_res;
        result.diagnostics.verify_alpha_residual = alpha_res;
        if (lam_res > opts.verify_tol || alpha_res > opts.verify_tol)
            throw Error(ErrorKind::VerificationFailure,
                        "reconstruction does not reproduce the target spectral data");
    } catch (const Error& e) {
        // A solver blow-up while probing the candidate reconstruction means
        // the candidate is not an acceptable solution.
        if (e.kind() == ErrorKind::VerificationFailure || e.kind() == ErrorKind::IllConditioned)
            throw;
        throw Error(ErrorKind::VerificationFailure,
                    std::string("verification solve failed: ") + e.what());
    }
    return result;
}

ReconstructionResult invert(const Problem& tilde_problem, const SpectralData& target,
                            const InverseOptions& opts) {
    SpectrumOptions sopts;
    sopts.cluster_tol = opts.cluster_tol;
    sopts.ode = opts.ode;
    SpectralData tilde_data = compute_spectral_data(tilde_problem, target.count(), sopts);
    return invert_with_data(tilde_problem, tilde_data, target, opts);
}

}  // namespace sl
