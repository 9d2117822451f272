#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "sl/cauchy.hpp"

using namespace sl;

namespace {

Problem model_p0(int nx = 129) {
    Problem pr;
    pr.sigma = PotentialSigma::zero(nx);
    pr.polys = {0, {cplx(1.0)}, {cplx(0.0)}};
    return pr;
}

Problem model_p1(int nx = 129) {
    Problem pr;
    pr.sigma = PotentialSigma::zero(nx);
    pr.polys = {1, {cplx(0.0), cplx(1.0)}, {cplx(0.0), cplx(0.0)}};
    return pr;
}

Problem generic_p0(int nx = 257) {
    Problem pr;
    pr.sigma = PotentialSigma::sample(nx, [](double x) { return 0.3 * std::sin(2.0 * x); });
    pr.polys = {0, {cplx(1.0)}, {cplx(0.0)}};
    return pr;
}

double max_abs(const std::vector<cplx>& v) {
    double m = 0.0;
    for (cplx z : v) m = std::max(m, std::abs(z));
    return m;
}

}  // namespace

TEST_CASE("model problems extract vanishing series and constants") {
    // sigma = 0, r1 = 1: Delta_0 = cos(rho pi), Delta_1 = -rho sin(rho pi),
    // so every series coefficient and constant must vanish.
    CauchyData cd0 = cauchy_from_problem(model_p0(), 8);
    CHECK(cd0.fit_residual < 1e-6);
    CHECK(max_abs(cd0.g_samples) < 1e-7);
    CHECK(max_abs(cd0.j_samples) < 1e-7);
    REQUIRE(cd0.c_coeffs.size() == 1);
    CHECK(std::abs(cd0.c_coeffs[0]) < 1e-7);
    CHECK(cd0.d_coeffs.empty());

    // sigma = 0, r1 = la: Delta_0 = rho^2 cos(rho pi), Delta_1 = -rho^3 sin(rho pi).
    CauchyData cd1 = cauchy_from_problem(model_p1(), 8);
    CHECK(max_abs(cd1.g_samples) < 1e-7);
    CHECK(max_abs(cd1.j_samples) < 1e-7);
    REQUIRE(cd1.c_coeffs.size() == 2);
    REQUIRE(cd1.d_coeffs.size() == 1);
    CHECK(std::abs(cd1.c_coeffs[0]) < 1e-7);
    CHECK(std::abs(cd1.c_coeffs[1]) < 1e-7);
    CHECK(std::abs(cd1.d_coeffs[0]) < 1e-7);
}

TEST_CASE("closed-form evaluation of handmade data") {
    CauchyData zero;
    zero.degree = 0;
    zero.basis_size = 1;
    zero.g_samples.assign(13, cplx(0.0));
    zero.j_samples.assign(13, cplx(0.0));
    zero.c_coeffs = {cplx(0.0)};

    for (cplx la : {cplx(2.3), cplx(1.0, 2.0), cplx(-0.7)}) {
        auto [d0, d1] = delta_from_cauchy(zero, la);
        cplx rho = sqrt_lambda(la);
        CHECK(std::abs(d0 - std::cos(rho * kPi)) < 1e-12);
        CHECK(std::abs(d1 + rho * std::sin(rho * kPi)) < 1e-12);
    }

    // J = cos t; at la = 0 the mode integral int_0^pi cos t dt vanishes,
    // so Delta_0 = 1 exactly.
    CauchyData withj = zero;
    for (int i = 0; i < 13; ++i) withj.j_samples[i] = std::cos(kPi * i / 12.0);
    auto [d0, d1] = delta_from_cauchy(withj, cplx(0.0));
    CHECK(std::abs(d0 - 1.0) < 1e-10);
    CHECK(std::abs(d1) < 1e-10);
}

TEST_CASE("extraction reproduces the characteristic functions at held-out points") {
    Problem pr = generic_p0();
    CauchyData cd = cauchy_from_problem(pr, 32);
    CHECK(cd.fit_residual < 1e-6);
    CauchyEvaluator ev(cd);

    // Fresh real abscissas strictly between the fit points.
    for (int j = 0; j < 50; ++j) {
        double rho = 0.25 + 0.5 * j;
        cplx la(rho * rho);
        cplx d0 = delta(pr, la, WhichDelta::delta0);
        cplx d1 = delta(pr, la, WhichDelta::delta1);
        CHECK(std::abs(ev.delta0(la) - d0) < 1e-6 * (1.0 + std::abs(d0)));
        CHECK(std::abs(ev.delta1(la) - d1) < 1e-6 * (1.0 + std::abs(d1)));
    }

    // Complex la on the contour.
    ContourGrid grid = make_contour(3, 0, 16);
    for (cplx la : grid.nodes) {
        cplx d0 = delta(pr, la, WhichDelta::delta0);
        cplx d1 = delta(pr, la, WhichDelta::delta1);
        CHECK(std::abs(ev.delta0(la) - d0) < 1e-6 * (1.0 + std::abs(d0)));
        CHECK(std::abs(ev.delta1(la) - d1) < 1e-6 * (1.0 + std::abs(d1)));
    }
}

TEST_CASE("zero lists and asymptotics for both characteristic functions") {
    CauchyData cd0 = cauchy_from_problem(model_p0(), 8);
    auto z1 = zeros_from_cauchy(cd0, 1, 12);
    REQUIRE(z1.size() == 12);
    for (int n = 1; n <= 12; ++n)
        CHECK(std::abs(z1[n - 1] - cplx((n - 1.0) * (n - 1.0))) < 1e-7 * (1.0 + n * n));
    auto z0 = zeros_from_cauchy(cd0, 0, 12);
    REQUIRE(z0.size() == 12);
    for (int n = 1; n <= 12; ++n)
        CHECK(std::abs(z0[n - 1] - cplx((n - 0.5) * (n - 0.5))) < 1e-7 * (1.0 + n * n));

    // Generic potential: the square roots drift from the seeds by a
    // square-summable sequence, so the l2 partial sums flatten.
    CauchyData cd = cauchy_from_problem(generic_p0(), 32);
    for (int j : {0, 1}) {
        auto zs = zeros_from_cauchy(cd, j, 30);
        double total = 0.0, late = 0.0;
        for (int n = 1; n <= 30; ++n) {
            double seed = n - 0.5 * (j + 1);
            double kappa = std::abs(sqrt_lambda(zs[n - 1]) - seed);
            CHECK(kappa < 0.5);
            total += kappa * kappa;
            if (n > 20) late += kappa * kappa;
        }
        CHECK(total < 1.0);
        CHECK(late < 0.25 * total + 1e-12);
    }
}

TEST_CASE("spectral data from boundary data matches the forward pipeline") {
    CauchyData cd0 = cauchy_from_problem(model_p0(), 8);
    SpectralData sp = spectral_from_cauchy(cd0, 10);
    SpectralData ref = compute_spectral_data(model_p0(), 10);
    REQUIRE(sp.count() == ref.count());
    for (int n = 1; n <= sp.count(); ++n) {
        CHECK(std::abs(sp.eigenvalues[n - 1] - ref.eigenvalues[n - 1]) < 1e-7 * (1.0 + n * n));
        CHECK(std::abs(sp.weights[n - 1] - ref.weights[n - 1]) <
              1e-7 * (1.0 + std::abs(ref.weights[n - 1])));
    }

    // Double eigenvalue at la = 0 with a simple Weyl pole. The representation
    // carries a ~1e-9 fit error, which splits the double zero by its square
    // root, so assert the stable quantities: locations near 0 and the zeroth
    // and first moments of the Weyl function around the group (1/pi and 0).
    CauchyData cd1 = cauchy_from_problem(model_p1(), 8);
    SpectralData sp1 = spectral_from_cauchy(cd1, 10);
    REQUIRE(sp1.count() == 10);
    cplx l1 = sp1.eigenvalues[0], l2 = sp1.eigenvalues[1];
    CHECK(std::abs(l1) < 1e-3);
    CHECK(std::abs(l2) < 1e-3);
    cplx total, first;
    if (sp1.clusters.front().multiplicity == 2) {
        total = sp1.weights[0];
        first = sp1.weights[1] + l1 * sp1.weights[0];
    } else {
        total = sp1.weights[0] + sp1.weights[1];
        first = l1 * sp1.weights[0] + l2 * sp1.weights[1];
    }
    CHECK(std::abs(total - cplx(1.0 / kPi)) < 1e-6);
    CHECK(std::abs(first) < 1e-6);
    for (int n = 3; n <= 10; ++n)
        CHECK(std::abs(sp1.eigenvalues[n - 1] - cplx((n - 2.0) * (n - 2.0))) <
              1e-6 * (1.0 + n * n));
}

TEST_CASE("perturbations of the data map to the spectral side linearly") {
    CauchyData base = cauchy_from_problem(model_p0(), 8);
    SpectralData sp0 = spectral_from_cauchy(base, 12);
    ContourGrid grid = make_contour(sp0.cut_index, 0, 64);

    auto measure = [&](const CauchyData& cd) {
        SpectralData sp = spectral_from_cauchy(cd, 12);
        WeylDiffSamples wd = weyl_diff_on_contour(sp, sp0, grid);
        double tail2 = 0.0;
        for (int n = sp0.cut_index; n <= 12; ++n) {
            double d = std::abs(sp.rho(n) - sp0.rho(n)) +
                       std::abs(sp.weights[n - 1] - sp0.weights[n - 1]);
            tail2 += d * d;
        }
        return std::pair{wd.delta1_norm, std::sqrt(tail2)};
    };

    // Constant term of the Delta_1 representation.
    auto perturb_c = [&](double t) {
        CauchyData cd = base;
        cd.c_coeffs[0] += t;
        return measure(cd);
    };
    auto [h1, t1] = perturb_c(1e-3);
    auto [h2, t2] = perturb_c(5e-4);
    CHECK(h1 / h2 == doctest::Approx(2.0).epsilon(0.25));
    CHECK(t1 / t2 == doctest::Approx(2.0).epsilon(0.25));

    // Single sine mode of G.
    auto perturb_g = [&](double t) {
        CauchyData cd = base;
        int m = static_cast<int>(cd.g_samples.size()) - 1;
        for (int i = 0; i <= m; ++i) cd.g_samples[i] += t * std::sin(2.0 * kPi * i / m);
        return measure(cd);
    };
    auto [g1, s1] = perturb_g(1e-3);
    auto [g2, s2] = perturb_g(5e-4);
    CHECK(g1 / g2 == doctest::Approx(2.0).epsilon(0.25));
    CHECK(s1 / s2 == doctest::Approx(2.0).epsilon(0.25));
}

TEST_CASE("round trips through the full reduction") {
    InverseOptions opts;
    opts.node_count = 128;

    // Self-extraction must reproduce the problem itself.
    Problem tilde = model_p0(257);
    CauchyData cd = cauchy_from_problem(tilde, 16);
    ReconstructionResult id = invert_from_cauchy(tilde, cd, 10, opts);
    for (int i = 0; i < tilde.sigma.size(); ++i)
        CHECK(std::abs(id.problem.sigma.values()[i]) < 1e-8);
    CHECK(std::abs(id.problem.polys.c[0] - 1.0) < 1e-8);
    CHECK(std::abs(id.problem.polys.d[0]) < 1e-8);

    // Data of a nearby problem recovers that problem's potential.
    Problem truth;
    truth.sigma =
        PotentialSigma::sample(257, [](double x) { return 0.05 * x * (kPi - x); });
    truth.polys = tilde.polys;
    CauchyData cd_near = cauchy_from_problem(truth, 32);
    ReconstructionResult near = invert_from_cauchy(tilde, cd_near, 12, opts);
    double worst = 0.0;
    for (int i = 0; i < truth.sigma.size(); ++i)
        worst = std::max(worst,
                         std::abs(near.problem.sigma.values()[i] - truth.sigma.values()[i]));
    CHECK(worst < 1e-3);

    // A large constant perturbation is inconsistent with any nearby problem
    // and must be rejected, not silently reconstructed.
    Problem tilde1 = model_p1(257);
    CauchyData cd_bad = cauchy_from_problem(tilde1, 16);
    cd_bad.d_coeffs[0] += 0.5;
    bool rejected = false;
    try {
        invert_from_cauchy(tilde1, cd_bad, 10, opts);
    } catch (const Error& e) {
        rejected = e.kind() == ErrorKind::IllConditioned ||
                   e.kind() == ErrorKind::VerificationFailure;
    }
    CHECK(rejected);
}

TEST_CASE("a basis too coarse for the potential is rejected") {
    // Interior kinks keep the series coefficients decaying slowly, so four
    // modes cannot meet the fit gate.
    Problem pr;
    pr.sigma =
        PotentialSigma::sample(257, [](double x) { return 0.3 * std::abs(std::sin(3.0 * x)); });
    pr.polys = {0, {cplx(1.0)}, {cplx(0.0)}};
    bool rejected = false;
    try {
        cauchy_from_problem(pr, 4);
    } catch (const Error& e) {
        rejected = e.kind() == ErrorKind::FitResidualTooLarge;
    }
    CHECK(rejected);
}
