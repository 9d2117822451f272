#include "sl/spectrum.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>

namespace sl {

namespace {

constexpr int kMaxCount = 12;      // most zeros one disk is allowed to hold
constexpr int kMaxNodes = 4096;    // quadrature node cap per circle
constexpr int kBaseNodes = 128;

struct Moments {
    int count = 0;
    std::vector<cplx> s;      // shifted power sums s_j = sum (z_i - c)^j
    std::vector<double> err;  // achieved accuracy per moment (last doubling diff)
};

std::vector<cplx> sample_circle(const AnalyticFn& f, cplx c, double r, int M,
                                const std::vector<cplx>* prev) {
    std::vector<cplx> F(M);
    for (int m = 0; m < M; ++m) {
        if (prev && m % 2 == 0) {
            F[m] = (*prev)[m / 2];
        } else {
            F[m] = f(c + std::polar(r, 2.0 * kPi * m / M));
        }
    }
    double fmax = 0.0, fmin = std::numeric_limits<double>::infinity();
    for (const cplx& v : F) {
        fmax = std::max(fmax, std::abs(v));
        fmin = std::min(fmin, std::abs(v));
    }
    if (fmax == 0.0 || fmin < 1e-12 * fmax)
        throw Error(ErrorKind::ZeroOnContour, "function nearly vanishes on the search circle");
    return F;
}

// s_j = (1/2 pi i) oint (z-c)^j F'/F dz computed as (1/(i M)) sum (z_m-c)^j G_m/F_m
// where G = dF/dtheta comes from spectral (DFT) differentiation of the samples.
std::vector<cplx> circle_moments(const std::vector<cplx>& F, double r, int jmax) {
    const int M = static_cast<int>(F.size());
    std::vector<cplx> w(M);
    for (int t = 0; t < M; ++t) w[t] = std::polar(1.0, 2.0 * kPi * t / M);
    auto wat = [&](long long idx) { return w[static_cast<int>(((idx % M) + M) % M)]; };

    std::vector<cplx> G(M, cplx(0.0));
    for (int k = -(M / 2 - 1); k <= M / 2 - 1; ++k) {
        if (k == 0) continue;
        cplx fh(0.0);
        for (int m = 0; m < M; ++m) fh += F[m] * wat(-static_cast<long long>(k) * m);
        fh *= cplx(0.0, static_cast<double>(k)) / static_cast<double>(M);
        for (int m = 0; m < M; ++m) G[m] += fh * wat(static_cast<long long>(k) * m);
    }

    std::vector<cplx> s(jmax + 1, cplx(0.0));
    for (int m = 0; m < M; ++m) {
        cplx ratio = G[m] / F[m];
        cplx zc = std::polar(r, 2.0 * kPi * m / M);
        cplx pw(1.0);
        for (int j = 0; j <= jmax; ++j) {
            s[j] += pw * ratio;
            pw *= zc;
        }
    }
    for (cplx& v : s) v /= cplx(0.0, static_cast<double>(M));
    return s;
}

Moments converged_moments(const AnalyticFn& f, cplx c, double r, int jmax) {
    int M = kBaseNodes;
    std::vector<cplx> F = sample_circle(f, c, r, M, nullptr);
    std::vector<cplx> prev_s = circle_moments(F, r, jmax);
    Moments out;
    out.s.assign(jmax + 1, cplx(0.0));
    out.err.assign(jmax + 1, 0.0);
    while (true) {
        M *= 2;
        F = sample_circle(f, c, r, M, &F);
        std::vector<cplx> s = circle_moments(F, r, jmax);
        bool ok = true;
        for (int j = 0; j <= jmax; ++j) {
            out.err[j] = std::abs(s[j] - prev_s[j]);
            if (out.err[j] > 3e-12 * (1.0 + std::pow(r, j))) ok = false;
        }
        prev_s = std::move(s);
        if (ok || M >= kMaxNodes) break;
    }
    out.s = std::move(prev_s);
    double cnt = out.s[0].real();
    long rounded = std::lround(cnt);
    if (std::abs(out.s[0] - cplx(static_cast<double>(rounded))) > 0.1 || rounded < 0)
        throw Error(ErrorKind::NonIntegerWinding, "winding number did not settle near an integer");
    out.count = static_cast<int>(rounded);
    return out;
}

Moments moments_with_retry(const AnalyticFn& f, cplx c, double& r, int jmax) {
    for (int attempt = 0;; ++attempt) {
        try {
            return converged_moments(f, c, r, jmax);
        } catch (const Error& e) {
            if (e.kind() != ErrorKind::ZeroOnContour || attempt >= 5) throw;
            r *= 1.118;  // nudge the circle off the offending zero
        }
    }
}

// Newton's identities turn shifted power sums into the monic polynomial with
// those roots; the companion matrix then delivers approximate root positions.
std::vector<cplx> roots_from_power_sums(const std::vector<cplx>& p, int m) {
    std::vector<cplx> e(m + 1, cplx(0.0));
    e[0] = 1.0;
    for (int k = 1; k <= m; ++k) {
        cplx acc(0.0);
        for (int i = 1; i <= k; ++i) acc += ((i % 2) ? 1.0 : -1.0) * e[k - i] * p[i];
        e[k] = acc / static_cast<double>(k);
    }
    Eigen::MatrixXcd comp = Eigen::MatrixXcd::Zero(m, m);
    for (int i = 1; i < m; ++i) comp(i, i - 1) = 1.0;
    // poly(w) = sum_k (-1)^k e_k w^{m-k}; coefficient of w^j is (-1)^{m-j} e_{m-j}
    for (int j = 0; j < m; ++j) comp(j, m - 1) = -(((m - j) % 2) ? -1.0 : 1.0) * e[m - j];
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(comp, /*computeEigenvectors=*/false);
    std::vector<cplx> roots(m);
    for (int i = 0; i < m; ++i) roots[i] = es.eigenvalues()[i];
    return roots;
}

void explore(const AnalyticFn& f, cplx c, double r, double tol, int depth,
             std::vector<std::pair<cplx, int>>& out) {
    if (depth > 48)
        throw Error(ErrorKind::CountMismatch, "zero search subdivision did not converge");
    double rr = r;
    Moments mr = moments_with_retry(f, c, rr, kMaxCount);
    const int m = mr.count;
    if (m == 0) return;
    if (m > kMaxCount)
        throw Error(ErrorKind::CountMismatch, "too many zeros in one search disk");
    cplx mean_rel = mr.s[1] / static_cast<double>(m);
    cplx mean = c + mean_rel;

    if (m == 1) {
        double floor_r = std::max(1e-3 * (1.0 + std::abs(mean)), 8.0 * tol);
        if (rr > 2.0 * floor_r) {
            explore(f, mean, floor_r, tol, depth + 1, out);
        } else {
            out.emplace_back(mean, 1);
        }
        return;
    }

    cplx mu2 = mr.s[2] / static_cast<double>(m) - mean_rel * mean_rel;
    double spread = std::sqrt(std::abs(mu2));
    // Resolution floor of the spread on this circle, from the achieved moment
    // accuracy (cancellation in s2/m - (s1/m)^2).
    double mu2_noise = (mr.err[2] + 2.0 * std::abs(mean_rel) * mr.err[1]) / m + 1e-30;
    double noise = std::sqrt(mu2_noise);

    if (spread <= std::max(tol, 50.0 * noise)) {
        if ((spread <= tol && noise <= 0.25 * tol) || rr <= 16.0 * tol) {
            out.emplace_back(mean, m);
            return;
        }
        double next_r = std::max({32.0 * spread, 8.0 * noise, 16.0 * tol});
        explore(f, mean, std::min(next_r, 0.5 * rr), tol, depth + 1, out);
        return;
    }

    // Spread is resolvable: split the approximate roots into two groups along
    // the principal axis (direction arg(mu2)/2) at the largest projection gap.
    std::vector<cplx> roots = roots_from_power_sums(mr.s, m);
    for (cplx& z : roots) z += c;
    cplx axis = std::sqrt(mu2);
    if (std::abs(axis) == 0.0) axis = 1.0;
    axis /= std::abs(axis);
    std::sort(roots.begin(), roots.end(), [&](cplx a, cplx b) {
        return (std::conj(axis) * (a - mean)).real() < (std::conj(axis) * (b - mean)).real();
    });
    int cut = 1;
    double best_gap = -1.0;
    for (int i = 1; i < m; ++i) {
        double gap = (std::conj(axis) * (roots[i] - roots[i - 1])).real();
        if (gap > best_gap) {
            best_gap = gap;
            cut = i;
        }
    }
    auto group = [&](int lo, int hi, cplx& center, double& rad) {
        center = 0.0;
        for (int i = lo; i < hi; ++i) center += roots[i];
        center /= static_cast<double>(hi - lo);
        rad = 0.0;
        for (int i = lo; i < hi; ++i) rad = std::max(rad, std::abs(roots[i] - center));
    };
    cplx ca, cb;
    double sa, sb;
    group(0, cut, ca, sa);
    group(cut, m, cb, sb);
    double dcen = std::abs(ca - cb);
    double ra = std::clamp(2.0 * sa + 0.05 * dcen, std::max(4.0 * tol, 1e-9 * (1.0 + std::abs(ca))),
                           0.45 * dcen);
    double rb = std::clamp(2.0 * sb + 0.05 * dcen, std::max(4.0 * tol, 1e-9 * (1.0 + std::abs(cb))),
                           0.45 * dcen);
    for (int attempt = 0; attempt < 3; ++attempt) {
        std::vector<std::pair<cplx, int>> sub;
        explore(f, ca, ra, tol, depth + 1, sub);
        explore(f, cb, rb, tol, depth + 1, sub);
        int total = 0;
        for (const auto& [z, k] : sub) total += k;
        if (total == m) {
            out.insert(out.end(), sub.begin(), sub.end());
            return;
        }
        ra = std::min(1.8 * ra, 0.45 * dcen);
        rb = std::min(1.8 * rb, 0.45 * dcen);
    }
    // Splitting missed part of the set; recenter and shrink instead.
    explore(f, mean, 0.8 * rr, tol, depth + 1, out);
}

AnalyticFn delta1_fn(const Problem& problem, const OdeOptions& ode) {
    return [&problem, ode](cplx la) { return delta(problem, la, WhichDelta::delta1, ode); };
}

}  // namespace

int count_zeros(const AnalyticFn& f, cplx center, double radius) {
    if (!(radius > 0.0)) throw Error(ErrorKind::InvalidArgument, "radius must be positive");
    return converged_moments(f, center, radius, 0).count;
}

std::vector<std::pair<cplx, int>> zeros_in_disk(const AnalyticFn& f, cplx center, double radius,
                                                double cluster_tol) {
    if (!(radius > 0.0) || !(cluster_tol > 0.0))
        throw Error(ErrorKind::InvalidArgument, "radius and cluster_tol must be positive");
    std::vector<std::pair<cplx, int>> out;
    explore(f, center, radius, cluster_tol, 0, out);
    std::sort(out.begin(), out.end(),
              [](const auto& a, const auto& b) { return eigenvalue_less(a.first, b.first); });
    return out;
}

SpectralData locate_zeros(const AnalyticFn& f, int degree, int n_max, double seed_shift,
                          bool with_cut, const SpectrumOptions& opts) {
    if (n_max < 1) throw Error(ErrorKind::InvalidArgument, "n_max must be >= 1");
    const int p = degree;
    const double s = seed_shift;
    const AnalyticFn& d1 = f;

    // Head: all zeros inside the circle |la| = (n_head - p - 3/2)^2, which for
    // data close to a genuine spectrum holds exactly n_head - 1 of them.
    int n_head = std::max(p + opts.head_scan_offset, p + 2);
    std::vector<std::pair<cplx, int>> head;
    double r_head = 0.0;
    for (int attempt = 0;; ++attempt) {
        r_head = std::pow(n_head - p - 1.5 + s, 2);
        head.clear();
        bool ok = true;
        try {
            head = zeros_in_disk(d1, 0.0, r_head, opts.cluster_tol);
        } catch (const Error& e) {
            if (e.kind() != ErrorKind::ZeroOnContour && e.kind() != ErrorKind::NonIntegerWinding)
                throw;
            ok = false;
        }
        int total = 0;
        for (const auto& [z, k] : head) total += k;
        if (ok && total == n_head - 1) break;
        if (attempt >= 3)
            throw Error(ErrorKind::CountMismatch,
                        "head disk does not hold the expected number of eigenvalues");
        ++n_head;
    }

    // Tail: Newton refinement from the asymptotic seeds rho_n = n - p - 1.
    std::vector<cplx> tail;
    for (int n = n_head; n <= n_max; ++n) {
        double rho_seed = static_cast<double>(n - p - 1) + s;
        cplx la = rho_seed * rho_seed;
        bool done = false;
        double prev_step = std::numeric_limits<double>::infinity();
        for (int it = 0; it < 50; ++it) {
            cplx val = d1(la);
            cplx der = analytic_derivative(d1, la, 1, 0.5, 32);
            cplx step = val / der;
            la -= step;
            double mag = std::abs(step);
            // Converged, or stagnating at the forward solver's noise floor.
            if (mag < 1e-12 * (1.0 + std::abs(la)) ||
                (mag < 1e-9 * (1.0 + std::abs(la)) && mag > 0.25 * prev_step)) {
                done = true;
                break;
            }
            prev_step = mag;
        }
        cplx rho = sqrt_lambda(la);
        if (!done || std::abs(rho - cplx(rho_seed)) > 0.45)
            throw Error(ErrorKind::NewtonDivergence, "tail eigenvalue refinement diverged");
        if (std::abs(la) <= r_head)
            throw Error(ErrorKind::CountMismatch, "tail refinement fell back into the head disk");
        tail.push_back(la);
    }

    SpectralData data;
    data.degree = p;
    for (const auto& [z, k] : head) {
        SpectralData::Cluster cl;
        cl.start = data.count() + 1;
        cl.multiplicity = k;
        for (int i = 0; i < k; ++i) data.eigenvalues.push_back(z);
        data.clusters.push_back(cl);
    }
    for (cplx la : tail) {
        data.clusters.push_back({data.count() + 1, 1});
        data.eigenvalues.push_back(la);
    }
    if (data.count() > n_max) {
        // The head disk can only be shrunk so far; drop surplus entries from
        // the top as long as no multiplicity cluster is cut in half.
        while (data.count() > n_max) {
            if (data.clusters.back().multiplicity != 1)
                throw Error(ErrorKind::InvalidArgument,
                            "n_max would split a multiple eigenvalue cluster");
            data.clusters.pop_back();
            data.eigenvalues.pop_back();
        }
    }
    if (data.count() != n_max)
        throw Error(ErrorKind::CountMismatch, "eigenvalue count does not match n_max");
    sort_spectral_data(data);
    if (!with_cut) {
        data.cut_index = 0;
        return data;
    }

    // Smallest admissible contour cut: all of 1..N-1 strictly inside
    // |la| = (N - p - 3/2)^2, everything else strictly outside and simple.
    int N = 0;
    for (int cand = p + 2; cand <= n_max; ++cand) {
        double R = std::pow(cand - p - 1.5, 2);
        bool ok = true;
        for (int n = 1; n <= data.count() && ok; ++n) {
            double a = std::abs(data.eigenvalues[n - 1]);
            if (std::abs(a - R) < 1e-6 * (1.0 + R)) ok = false;
            if ((n <= cand - 1) != (a < R)) ok = false;
        }
        for (const auto& cl : data.clusters) {
            if (cl.multiplicity > 1 && cl.start + cl.multiplicity - 1 > cand - 1) ok = false;
        }
        if (ok) {
            N = cand;
            break;
        }
    }
    if (N == 0)
        throw Error(ErrorKind::HeadTooLarge,
                    "no admissible contour separates the head from a simple tail");
    data.cut_index = N;
    data.validate(/*check_weights=*/false);
    return data;
}

SpectralData locate_eigenvalues(const Problem& problem, int n_max, const SpectrumOptions& opts) {
    problem.validate();
    return locate_zeros(delta1_fn(problem, opts.ode), problem.polys.degree, n_max, 0.0,
                        /*with_cut=*/true, opts);
}

void weight_numbers(const Problem& problem, SpectralData& data, const SpectrumOptions& opts) {
    data.validate(/*check_weights=*/false);
    data.weights.assign(data.count(), cplx(0.0));
    AnalyticFn d1 = delta1_fn(problem, opts.ode);
    const int M = opts.weight_nodes;
    for (const auto& cl : data.clusters) {
        cplx la0 = data.eigenvalues[cl.start - 1];
        double dist = std::numeric_limits<double>::infinity();
        for (const auto& other : data.clusters) {
            if (other.start == cl.start) continue;
            dist = std::min(dist, std::abs(la0 - data.eigenvalues[other.start - 1]));
        }
        double r = std::min(0.4 * dist, 0.5);
        std::vector<cplx> mv(M);
        std::vector<cplx> zc(M);
        for (int j = 0; j < M; ++j) {
            zc[j] = std::polar(r, 2.0 * kPi * j / M);
            mv[j] = weyl(problem, la0 + zc[j], opts.ode);
        }
        for (int k = 0; k < cl.multiplicity; ++k) {
            cplx alpha(0.0);
            for (int j = 0; j < M; ++j) alpha += mv[j] * std::pow(zc[j], k + 1);
            alpha /= static_cast<double>(M);
            data.weights[cl.start - 1 + k] = alpha;
        }
        if (cl.multiplicity == 1) {
            cplx d0 = delta(problem, la0, WhichDelta::delta0, opts.ode);
            cplx d1p = analytic_derivative(d1, la0, 1, std::min(0.5, 0.45 * dist), 64);
            cplx ref = -d0 / d1p;
            cplx got = data.weights[cl.start - 1];
            if (std::abs(got - ref) > 1e-7 * std::max(1.0, std::abs(got)))
                throw Error(ErrorKind::CrossCheckFailure,
                            "weight number disagrees with the residue ratio");
        }
    }
    data.validate();
}

SpectralData compute_spectral_data(const Problem& problem, int n_max, const SpectrumOptions& opts) {
    SpectralData data = locate_eigenvalues(problem, n_max, opts);
    weight_numbers(problem, data, opts);
    return data;
}

cplx weyl_partial(const SpectralData& data, int N, cplx la) {
    cplx acc(0.0);
    for (const auto& cl : data.clusters) {
        if (cl.start >= N) continue;
        cplx la_n = data.eigenvalues[cl.start - 1];
        cplx inv = 1.0 / (la - la_n);
        cplx pw = inv;
        for (int k = 0; k < cl.multiplicity; ++k) {
            acc += data.weights[cl.start - 1 + k] * pw;
            pw *= inv;
        }
    }
    return acc;
}

WeylDiffSamples weyl_diff_on_contour(const SpectralData& data, const SpectralData& tilde_data,
                                     const ContourGrid& grid) {
    if (data.degree != tilde_data.degree || data.degree != grid.degree)
        throw Error(ErrorKind::InvalidArgument, "degree mismatch between spectra and contour");
    const int N = grid.cut_index;
    auto check_poles = [&](const SpectralData& d) {
        for (const auto& cl : d.clusters) {
            if (cl.start >= N) continue;
            double a = std::abs(d.eigenvalues[cl.start - 1]);
            if (a >= grid.radius || std::abs(a - grid.radius) < 1e-6)
                throw Error(ErrorKind::PoleOnContour,
                            "a head pole is on or outside the contour");
        }
    };
    check_poles(data);
    check_poles(tilde_data);
    WeylDiffSamples out;
    out.contour = grid;
    out.values.resize(grid.size());
    out.delta1_norm = 0.0;
    for (int j = 0; j < grid.size(); ++j) {
        out.values[j] = weyl_partial(data, N, grid.nodes[j]) -
                        weyl_partial(tilde_data, N, grid.nodes[j]);
        out.delta1_norm = std::max(out.delta1_norm, std::abs(out.values[j]));
    }
    out.validate();
    return out;
}

}  // namespace sl
