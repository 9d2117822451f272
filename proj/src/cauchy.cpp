#include "sl/cauchy.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>

namespace sl {

namespace {

// Auxiliary polynomial degree of the G/J bases. A pure trigonometric series
// for G converges like 1/k when G has nonzero boundary values (which happens
// for generic sigma); the polynomial part absorbs the boundary terms of
// repeated integration by parts, so the remaining series decays fast.
constexpr int kAuxDeg = 3;

cplx pow_int(cplx base, int n) {
    cplx v(1.0);
    for (int i = 0; i < n; ++i) v *= base;
    return v;
}

// T(u) = int_0^pi cos(u t) dt = sin(u pi)/u, with the series near u = 0.
cplx t_integral(cplx u) {
    if (std::abs(u) < 1e-3) {
        cplx z = (u * kPi) * (u * kPi);
        return kPi * (1.0 - z / 6.0 + z * z / 120.0 - z * z * z / 5040.0);
    }
    return std::sin(u * kPi) / u;
}

// int_0^pi cos(k t) cos(rho t) dt and int_0^pi sin(k t) sin(rho t) dt.
cplx cos_mode_integral(int k, cplx rho) {
    return 0.5 * (t_integral(cplx(k) - rho) + t_integral(cplx(k) + rho));
}

cplx sin_mode_integral(int k, cplx rho) {
    return 0.5 * (t_integral(cplx(k) - rho) - t_integral(cplx(k) + rho));
}

// Taylor series of int_0^pi t^j {cos, sin}(rho t) dt around rho = 0.
cplx poly_trig_series(int j, cplx rho, bool sine) {
    const int s = sine ? 1 : 0;
    cplx acc(0.0);
    cplx rho_pow = sine ? rho : cplx(1.0);
    double pi_pow = std::pow(kPi, j + 1 + s);
    double fact = 1.0;
    double sign = 1.0;
    for (int m = 0; m <= 8; ++m) {
        acc += sign * rho_pow * pi_pow / (fact * (2 * m + j + 1 + s));
        sign = -sign;
        rho_pow *= rho * rho;
        pi_pow *= kPi * kPi;
        fact *= (2.0 * m + s + 1.0) * (2.0 * m + s + 2.0);
    }
    return acc;
}

cplx poly_cos_integral(int j, cplx rho);

// int_0^pi t^j sin(rho t) dt by integration by parts.
cplx poly_sin_integral(int j, cplx rho) {
    if (std::abs(rho) < 1e-2) return poly_trig_series(j, rho, true);
    if (j == 0) return (1.0 - std::cos(rho * kPi)) / rho;
    return -std::pow(kPi, j) * std::cos(rho * kPi) / rho +
           static_cast<double>(j) / rho * poly_cos_integral(j - 1, rho);
}

// int_0^pi t^j cos(rho t) dt.
cplx poly_cos_integral(int j, cplx rho) {
    if (std::abs(rho) < 1e-2) return poly_trig_series(j, rho, false);
    if (j == 0) return std::sin(rho * kPi) / rho;
    return std::pow(kPi, j) * std::sin(rho * kPi) / rho -
           static_cast<double>(j) / rho * poly_sin_integral(j - 1, rho);
}

}  // namespace

CauchyData cauchy_from_problem(const Problem& problem, int basis_size, const OdeOptions& ode) {
    problem.validate();
    if (basis_size < 1) throw Error(ErrorKind::InvalidArgument, "basis size must be >= 1");
    const int p = problem.polys.degree;
    const int kf = basis_size;
    const int rows = 2 * (kf + p + 2);

    // Delta_1 unknowns: sine modes g_1..g_K, polynomial part a_0..a_3, C_0..C_p.
    // Delta_0 unknowns: cosine modes j_0..j_K, polynomial part b_1..b_3, D_0..D_{p-1}.
    const int ng = kf + kAuxDeg + 1;
    const int nj = kf + 1 + kAuxDeg;
    Eigen::MatrixXcd a1(rows, ng + p + 1), a0(rows, nj + p);
    Eigen::VectorXcd b1(rows), b0(rows);
    for (int r = 0; r < rows; ++r) {
        double rho = 0.5 * (r + 1);
        cplx la(rho * rho);
        EndpointValues e = phi_S_at_pi(problem.sigma, la, ode);
        cplx r1 = eval_poly(problem.polys, Which::r1, la);
        cplx r2 = eval_poly(problem.polys, Which::r2, la);
        cplx delta1 = r1 * e.phi_q + r2 * e.phi;
        cplx delta0 = r1 * e.s_q + r2 * e.s;

        double lead1 = std::pow(rho, 2 * p + 1);
        double w1 = 1.0 / std::max(1.0, lead1);
        b1[r] = w1 * (delta1 + lead1 * std::sin(rho * kPi));
        for (int k = 1; k <= kf; ++k)
            a1(r, k - 1) = w1 * lead1 * sin_mode_integral(k, cplx(rho));
        for (int j = 0; j <= kAuxDeg; ++j)
            a1(r, kf + j) = w1 * lead1 * poly_sin_integral(j, cplx(rho));
        for (int n = 0; n <= p; ++n) a1(r, ng + n) = w1 * std::pow(rho, 2 * n);

        double lead0 = std::pow(rho, 2 * p);
        double w0 = 1.0 / std::max(1.0, lead0);
        b0[r] = w0 * (delta0 - lead0 * std::cos(rho * kPi));
        for (int k = 0; k <= kf; ++k)
            a0(r, k) = w0 * lead0 * cos_mode_integral(k, cplx(rho));
        for (int j = 1; j <= kAuxDeg; ++j)
            a0(r, kf + j) = w0 * lead0 * poly_cos_integral(j, cplx(rho));
        for (int n = 0; n < p; ++n) a0(r, nj + n) = w0 * std::pow(rho, 2 * n);
    }

    Eigen::VectorXcd x1 = a1.colPivHouseholderQr().solve(b1);
    Eigen::VectorXcd x0 = a0.colPivHouseholderQr().solve(b0);
    double res1 = (a1 * x1 - b1).cwiseAbs().maxCoeff();
    double res0 = (a0 * x0 - b0).cwiseAbs().maxCoeff();
    double scale = 1.0 + std::max(b1.cwiseAbs().maxCoeff(), b0.cwiseAbs().maxCoeff());
    double residual = std::max(res1, res0);
    if (residual > 1e-6 * scale)
        throw Error(ErrorKind::FitResidualTooLarge,
                    "boundary-data representation fit residual " + std::to_string(residual) +
                        " exceeds tolerance; a larger basis may be needed");

    CauchyData cd;
    cd.degree = p;
    cd.basis_size = kf;
    cd.fit_residual = residual;
    cd.c_coeffs.assign(x1.data() + ng, x1.data() + ng + p + 1);
    cd.d_coeffs.assign(x0.data() + nj, x0.data() + nj + p);
    const int m = 2 * kf + 8;
    cd.g_samples.resize(m + 1);
    cd.j_samples.resize(m + 1);
    for (int i = 0; i <= m; ++i) {
        double t = kPi * i / m;
        cplx g(0.0), j(x0[0]);
        for (int k = 1; k <= kf; ++k) {
            g += x1[k - 1] * std::sin(k * t);
            j += x0[k] * std::cos(k * t);
        }
        double tp = 1.0;
        for (int d = 0; d <= kAuxDeg; ++d) {
            g += x1[kf + d] * tp;
            if (d >= 1) j += x0[kf + d] * tp;
            tp *= t;
        }
        cd.g_samples[i] = g;
        cd.j_samples[i] = j;
    }
    cd.validate();
    return cd;
}

CauchyEvaluator::CauchyEvaluator(const CauchyData& cd) {
    cd.validate();
    degree_ = cd.degree;
    c_ = cd.c_coeffs;
    d_ = cd.d_coeffs;
    const int kf = cd.basis_size;
    const int m = static_cast<int>(cd.g_samples.size()) - 1;
    const int ng = kf + kAuxDeg + 1;
    const int nj = kf + 1 + kAuxDeg;
    if (m < std::max(ng, nj))
        throw Error(ErrorKind::InvalidArgument,
                    "sample grid too coarse to recover the series coefficients");

    // Recover (series, polynomial part) from the samples by least squares;
    // exact whenever the samples lie in the basis span.
    Eigen::MatrixXcd ag(m + 1, ng), aj(m + 1, nj);
    Eigen::VectorXcd bg(m + 1), bj(m + 1);
    for (int i = 0; i <= m; ++i) {
        double t = kPi * i / m;
        for (int k = 1; k <= kf; ++k) {
            ag(i, k - 1) = std::sin(k * t);
            aj(i, k) = std::cos(k * t);
        }
        aj(i, 0) = 1.0;
        double tp = 1.0;
        for (int d = 0; d <= kAuxDeg; ++d) {
            ag(i, kf + d) = tp;
            if (d >= 1) aj(i, kf + d) = tp;
            tp *= t;
        }
        bg[i] = cd.g_samples[i];
        bj[i] = cd.j_samples[i];
    }
    Eigen::VectorXcd xg = ag.colPivHouseholderQr().solve(bg);
    Eigen::VectorXcd xj = aj.colPivHouseholderQr().solve(bj);
    g_coef_.assign(xg.data(), xg.data() + ng);
    j_coef_.assign(xj.data(), xj.data() + nj);
}

cplx CauchyEvaluator::delta0(cplx la) const {
    const int kf = static_cast<int>(j_coef_.size()) - 1 - kAuxDeg;
    cplx rho = sqrt_lambda(la);
    cplx acc = std::cos(rho * kPi);
    for (int k = 0; k <= kf; ++k) acc += j_coef_[k] * cos_mode_integral(k, rho);
    for (int d = 1; d <= kAuxDeg; ++d) acc += j_coef_[kf + d] * poly_cos_integral(d, rho);
    cplx out = pow_int(la, degree_) * acc;
    for (int n = 0; n < degree_; ++n) out += d_[n] * pow_int(la, n);
    return out;
}

cplx CauchyEvaluator::delta1(cplx la) const {
    const int kf = static_cast<int>(g_coef_.size()) - 1 - kAuxDeg;
    cplx rho = sqrt_lambda(la);
    cplx acc = -std::sin(rho * kPi);
    for (int k = 1; k <= kf; ++k) acc += g_coef_[k - 1] * sin_mode_integral(k, rho);
    for (int d = 0; d <= kAuxDeg; ++d) acc += g_coef_[kf + d] * poly_sin_integral(d, rho);
    cplx out = rho * pow_int(la, degree_) * acc;
    for (int n = 0; n <= degree_; ++n) out += c_[n] * pow_int(la, n);
    return out;
}

std::pair<cplx, cplx> delta_from_cauchy(const CauchyData& cd, cplx la) {
    CauchyEvaluator ev(cd);
    return {ev.delta0(la), ev.delta1(la)};
}

std::vector<cplx> zeros_from_cauchy(const CauchyData& cd, int j, int n_max,
                                    const SpectrumOptions& opts) {
    if (j != 0 && j != 1) throw Error(ErrorKind::InvalidArgument, "j must be 0 or 1");
    CauchyEvaluator ev(cd);
    AnalyticFn f = (j == 1) ? AnalyticFn([ev](cplx la) { return ev.delta1(la); })
                            : AnalyticFn([ev](cplx la) { return ev.delta0(la); });
    double shift = (j == 1) ? 0.0 : 0.5;
    SpectralData data = locate_zeros(f, ev.degree(), n_max, shift, /*with_cut=*/false, opts);
    return data.eigenvalues;
}

SpectralData spectral_from_cauchy(const CauchyData& cd, int n_max, const SpectrumOptions& opts) {
    CauchyEvaluator ev(cd);
    AnalyticFn d1 = [ev](cplx la) { return ev.delta1(la); };
    SpectralData data;
    try {
        data = locate_zeros(d1, ev.degree(), n_max, 0.0, /*with_cut=*/true, opts);
    } catch (const Error& e) {
        if (e.kind() == ErrorKind::HeadTooLarge)
            throw Error(ErrorKind::HeadEscaped, "a head zero escaped every admissible contour");
        throw;
    }

    data.weights.assign(data.count(), cplx(0.0));
    const int M = opts.weight_nodes;
    for (const auto& cl : data.clusters) {
        cplx la0 = data.eigenvalues[cl.start - 1];
        double dist = std::numeric_limits<double>::infinity();
        for (const auto& other : data.clusters) {
            if (other.start == cl.start) continue;
            dist = std::min(dist, std::abs(la0 - data.eigenvalues[other.start - 1]));
        }
        double r = std::min(0.4 * dist, 0.5);
        // Laurent moments of M = -Delta_0/Delta_1 around the cluster.
        std::vector<cplx> moments(cl.multiplicity, cplx(0.0));
        for (int s = 0; s < M; ++s) {
            cplx z = std::polar(r, 2.0 * kPi * s / M);
            cplx mv = -ev.delta0(la0 + z) / ev.delta1(la0 + z);
            cplx pw = z;
            for (int k = 0; k < cl.multiplicity; ++k) {
                moments[k] += mv * pw / static_cast<double>(M);
                pw *= z;
            }
        }
        if (cl.multiplicity == 1) {
            // Simple-residue form, cross-checked against the moment.
            cplx d1p = analytic_derivative(d1, la0, 1, r, 64);
            cplx ref = -ev.delta0(la0) / d1p;
            if (std::abs(ref - moments[0]) > 1e-7 * std::max(1.0, std::abs(ref)))
                throw Error(ErrorKind::CrossCheckFailure,
                            "residue weight disagrees with the contour moment");
            data.weights[cl.start - 1] = ref;
        } else {
            for (int k = 0; k < cl.multiplicity; ++k)
                data.weights[cl.start - 1 + k] = moments[k];
        }
    }
    data.validate();
    return data;
}

ReconstructionResult invert_from_cauchy(const Problem& tilde_problem, const CauchyData& cd,
                                        int n_max, const InverseOptions& opts) {
    tilde_problem.validate();
    cd.validate();
    if (cd.degree != tilde_problem.polys.degree)
        throw Error(ErrorKind::InvalidArgument, "degree mismatch between data and problem");
    SpectrumOptions sopts;
    sopts.cluster_tol = opts.cluster_tol;
    sopts.ode = opts.ode;
    SpectralData target = spectral_from_cauchy(cd, n_max, sopts);
    SpectralData tilde_data = compute_spectral_data(tilde_problem, target.count(), sopts);

    // Reduce to a finite-head perturbation: keep the differences up to a small
    // cut and make the tail match the reference data exactly. The discarded
    // tail differences are simple and square-summable; they are reinstated
    // below as a first-order correction.
    const int p = cd.degree;
    int fold = std::max({p + 2, target.cut_index, tilde_data.cut_index});
    const int fold_cap = std::min(p + 4, target.count());
    for (int n = fold; n < fold_cap; ++n) {
        double d = std::abs(target.rho(n) - tilde_data.rho(n)) +
                   std::abs(target.weights[n - 1] - tilde_data.weights[n - 1]);
        if (d > opts.tail_tol) fold = n + 1;
    }
    std::vector<cplx> tail_la, tail_alpha;
    for (int n = fold; n <= target.count(); ++n) {
        tail_la.push_back(target.eigenvalues[n - 1]);
        tail_alpha.push_back(target.weights[n - 1]);
        target.eigenvalues[n - 1] = tilde_data.eigenvalues[n - 1];
        target.weights[n - 1] = tilde_data.weights[n - 1];
    }
    ReconstructionResult result = invert_with_data(tilde_problem, tilde_data, target, opts);

    // Tail correction: the reconstruction formula's residues at the discarded
    // tail poles of the Weyl difference, with the unknown solution replaced by
    // the head-reconstructed one. The neglected remainder is quadratic in the
    // tail perturbation.
    if (!tail_la.empty()) {
        const int nx = tilde_problem.sigma.size();
        std::vector<cplx> corr(nx, cplx(0.0));
        auto accumulate = [&](cplx la, cplx alpha, double sign) {
            Trajectory ft = integrate(tilde_problem.sigma, la, {cplx(1.0), cplx(0.0)},
                                      Direction::forward, opts.ode);
            Trajectory fr = integrate(result.problem.sigma, la, {cplx(1.0), cplx(0.0)},
                                      Direction::forward, opts.ode);
            for (int i = 0; i < nx; ++i)
                corr[i] += sign * alpha * (2.0 * ft.states[i].y * fr.states[i].y - 1.0);
        };
        for (size_t k = 0; k < tail_la.size(); ++k) {
            int n = fold + static_cast<int>(k);
            accumulate(tail_la[k], tail_alpha[k], -1.0);
            accumulate(tilde_data.eigenvalues[n - 1], tilde_data.weights[n - 1], 1.0);
        }
        // Beyond the supplied range the same residues are summed with the
        // asymptotic solutions phi ~ cos(rho x); the neglected part of each
        // term is O(1/n) of an already square-summable difference.
        const int n_far = 192;
        if (target.count() < n_far) {
            CauchyData cd_t = cauchy_from_problem(tilde_problem, cd.basis_size, opts.ode);
            CauchyEvaluator evd(cd), evt(cd_t);
            AnalyticFn f1 = [&evd](cplx la) { return evd.delta1(la); };
            AnalyticFn f1t = [&evt](cplx la) { return evt.delta1(la); };
            SpectrumOptions zopts;
            zopts.cluster_tol = opts.cluster_tol;
            SpectralData far = locate_zeros(f1, p, n_far, 0.0, /*with_cut=*/false, zopts);
            SpectralData fart = locate_zeros(f1t, p, n_far, 0.0, /*with_cut=*/false, zopts);
            const auto& grid = tilde_problem.sigma.grid();
            for (int n = target.count() + 1; n <= n_far; ++n) {
                cplx la = far.eigenvalues[n - 1], la_t = fart.eigenvalues[n - 1];
                cplx rho_hat = sqrt_lambda(la) - sqrt_lambda(la_t);
                cplx alpha = -evd.delta0(la) / analytic_derivative(f1, la, 1, 0.4, 32);
                cplx alpha_t = -evt.delta0(la_t) / analytic_derivative(f1t, la_t, 1, 0.4, 32);
                cplx two_rho_t = 2.0 * sqrt_lambda(la_t);
                for (int i = 0; i < nx; ++i) {
                    cplx phase = two_rho_t * grid[i];
                    corr[i] -= (alpha - alpha_t) * std::cos(phase) -
                               2.0 * grid[i] * alpha_t * rho_hat * std::sin(phase);
                }
            }
        }
        std::vector<cplx> values = result.problem.sigma.values();
        for (int i = 0; i < nx; ++i) values[i] += corr[i];
        result.problem.sigma = PotentialSigma(tilde_problem.sigma.grid(), std::move(values));
    }

    if (opts.verify) {
        // The reconstruction's own boundary data must reproduce the input
        // representation away from the fit abscissas.
        CauchyData cd2 = cauchy_from_problem(result.problem, cd.basis_size, opts.ode);
        CauchyEvaluator ev(cd), ev2(cd2);
        double worst = 0.0;
        for (int k = 1; k <= 30; ++k) {
            double rho = 0.5 * k + 0.25;
            cplx la(rho * rho);
            worst = std::max(worst, std::abs(ev2.delta0(la) - ev.delta0(la)) /
                                        std::max(1.0, std::abs(ev.delta0(la))));
            worst = std::max(worst, std::abs(ev2.delta1(la) - ev.delta1(la)) /
                                        std::max(1.0, std::abs(ev.delta1(la))));
        }
        if (worst > 100.0 * opts.verify_tol)
            throw Error(ErrorKind::VerificationFailure,
                        "reconstruction does not reproduce the boundary data");
    }
    return result;
}

}  // namespace sl
