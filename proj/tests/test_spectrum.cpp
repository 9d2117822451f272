#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "sl/spectrum.hpp"

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

}  // namespace

TEST_CASE("zero counting by the argument principle") {
    CHECK(count_zeros([](cplx z) { return z * z; }, cplx(0.1, 0.1), 1.0) == 2);
    CHECK(count_zeros([](cplx) { return cplx(1.0); }, cplx(0.0), 3.0) == 0);
    // Node of the circle lands on the zero at z = 1.
    CHECK_THROWS_AS(count_zeros([](cplx z) { return z - 1.0; }, cplx(0.0), 1.0), Error);

    Problem p0 = model_p0();
    auto d1 = [&](cplx la) { return delta(p0, la, WhichDelta::delta1); };
    CHECK(count_zeros(d1, cplx(0.0), 2.25) == 2);  // la = 0 and la = 1
}

TEST_CASE("zeros in a disk with multiplicities") {
    // (z - 0.5)^2 (z + 1 + i): a double and a simple zero.
    auto f = [](cplx z) { return (z - 0.5) * (z - 0.5) * (z + cplx(1.0, 1.0)); };
    auto zs = zeros_in_disk(f, cplx(0.0), 2.1);
    REQUIRE(zs.size() == 2);
    CHECK(std::abs(zs[0].first - cplx(0.5)) < 1e-8);
    CHECK(zs[0].second == 2);
    CHECK(std::abs(zs[1].first - cplx(-1.0, -1.0)) < 1e-8);
    CHECK(zs[1].second == 1);

    // A split pair well above cluster_tol is resolved as two simple zeros.
    auto g = [](cplx z) { return (z - cplx(0.5, 1e-3)) * (z - cplx(0.5, -1e-3)) * (z + 1.0); };
    auto gz = zeros_in_disk(g, cplx(0.0), 2.0);
    REQUIRE(gz.size() == 3);
    int simple_near_half = 0;
    for (const auto& [z, m] : gz)
        if (std::abs(z - cplx(0.5)) < 0.01) {
            CHECK(m == 1);
            ++simple_near_half;
        }
    CHECK(simple_near_half == 2);

    // A pair below cluster_tol collapses to one double zero at the centroid.
    auto h = [](cplx z) { return (z - cplx(0.5, 1e-9)) * (z - cplx(0.5, -1e-9)); };
    auto hz = zeros_in_disk(h, cplx(0.0), 1.5);
    REQUIRE(hz.size() == 1);
    CHECK(hz[0].second == 2);
    CHECK(std::abs(hz[0].first - cplx(0.5)) < 1e-7);
}

TEST_CASE("spectrum of the zero-potential p=0 model") {
    Problem p0 = model_p0();
    SpectralData data = compute_spectral_data(p0, 10);
    REQUIRE(data.count() == 10);
    for (int n = 1; n <= 10; ++n) {
        double want = static_cast<double>((n - 1) * (n - 1));
        CHECK(std::abs(data.eigenvalues[n - 1] - cplx(want)) < 1e-8);
    }
    for (const auto& cl : data.clusters) CHECK(cl.multiplicity == 1);
    CHECK(std::abs(data.weights[0] - cplx(1.0 / kPi)) < 1e-6 / kPi);
    for (int n = 2; n <= 10; ++n)
        CHECK(std::abs(data.weights[n - 1] - cplx(2.0 / kPi)) < 2e-6 / kPi);
    CHECK(data.cut_index == 2);

    // Asymptotics: |rho_n - (n-1)| tiny for n >= N.
    for (int n = data.cut_index; n <= 10; ++n)
        CHECK(std::abs(data.rho(n) - cplx(n - 1.0)) < 1e-8);
}

TEST_CASE("double eigenvalue of the p=1 model") {
    Problem p1 = model_p1();
    SpectralData data = compute_spectral_data(p1, 10);
    REQUIRE(data.count() == 10);
    CHECK(data.clusters[0].start == 1);
    CHECK(data.clusters[0].multiplicity == 2);
    CHECK(std::abs(data.eigenvalues[0]) < 1e-8);
    for (int n = 3; n <= 10; ++n) {
        double want = static_cast<double>((n - 2) * (n - 2));
        CHECK(std::abs(data.eigenvalues[n - 1] - cplx(want)) < 1e-8);
    }

    // Laurent-fit oracle for the double-pole weights: M(la) ~ a/(la)^2 + b/la + c + d la
    // on a small circle around 0; alpha_1 should match b, alpha_2 should match a.
    const double r = 0.3;
    const int M = 64;
    // Least squares via normal equations on the 4-term basis.
    cplx ata[4][4] = {};
    cplx atb[4] = {};
    for (int j = 0; j < M; ++j) {
        cplx z = std::polar(r, 2.0 * kPi * j / M);
        cplx basis[4] = {1.0 / (z * z), 1.0 / z, cplx(1.0), z};
        cplx mv = weyl(p1, z);
        for (int a = 0; a < 4; ++a) {
            for (int b = 0; b < 4; ++b) ata[a][b] += std::conj(basis[a]) * basis[b];
            atb[a] += std::conj(basis[a]) * mv;
        }
    }
    // Solve the 4x4 system by Gaussian elimination.
    cplx aug[4][5];
    for (int a = 0; a < 4; ++a) {
        for (int b = 0; b < 4; ++b) aug[a][b] = ata[a][b];
        aug[a][4] = atb[a];
    }
    for (int col = 0; col < 4; ++col) {
        int piv = col;
        for (int rr2 = col + 1; rr2 < 4; ++rr2)
            if (std::abs(aug[rr2][col]) > std::abs(aug[piv][col])) piv = rr2;
        std::swap(aug[piv], aug[col]);
        for (int rr2 = col + 1; rr2 < 4; ++rr2) {
            cplx fct = aug[rr2][col] / aug[col][col];
            for (int b = col; b < 5; ++b) aug[rr2][b] -= fct * aug[col][b];
        }
    }
    cplx coef[4];
    for (int a = 3; a >= 0; --a) {
        cplx acc = aug[a][4];
        for (int b = a + 1; b < 4; ++b) acc -= aug[a][b] * coef[b];
        coef[a] = acc / aug[a][a];
    }
    CHECK(std::abs(data.weights[0] - coef[1]) < 1e-6);  // alpha_1 = residue
    CHECK(std::abs(data.weights[1] - coef[0]) < 1e-6);  // alpha_2 = (la)^{-2} coefficient
    // For this model the second Laurent coefficient vanishes: M has a simple pole.
    CHECK(std::abs(data.weights[1]) < 1e-7);
}

TEST_CASE("residue-sum identity on the contour") {
    Problem p0 = model_p0();
    SpectralData data = compute_spectral_data(p0, 6);
    ContourGrid g = make_contour(3, 0, 128);  // radius 2.25 holds la = 0, 1
    std::vector<cplx> v(g.size());
    for (int j = 0; j < g.size(); ++j) v[j] = weyl(p0, g.nodes[j]);
    cplx direct = contour_integral(v, g);
    cplx via_weights = data.weights[0] + data.weights[1];
    CHECK(std::abs(direct - via_weights) < 1e-7);
    CHECK(std::abs(direct - cplx(3.0 / kPi)) < 1e-7);
}

TEST_CASE("weyl partial fraction head") {
    SpectralData data;
    data.degree = 0;
    data.cut_index = 3;
    data.eigenvalues = {cplx(0.0), cplx(0.0), cplx(4.0)};
    data.weights = {cplx(0.5), cplx(0.25), cplx(1.0)};
    data.clusters = {{1, 2}, {3, 1}};

    CHECK(weyl_partial(data, 1, cplx(1.0)) == cplx(0.0));  // empty head
    cplx got = weyl_partial(data, 3, cplx(2.0));
    CHECK(std::abs(got - cplx(0.5 / 2.0 + 0.25 / 4.0)) < 1e-15);
}

TEST_CASE("weyl difference on the contour") {
    SpectralData a;
    a.degree = 0;
    a.cut_index = 3;
    a.eigenvalues = {cplx(0.01), cplx(1.0), cplx(4.0)};
    a.weights = {cplx(1.0 / kPi), cplx(2.0 / kPi), cplx(2.0 / kPi)};
    a.clusters = {{1, 1}, {2, 1}, {3, 1}};
    SpectralData b = a;
    b.eigenvalues[0] = cplx(0.0);

    ContourGrid g = make_contour(3, 0, 64);
    WeylDiffSamples same = weyl_diff_on_contour(a, a, g);
    CHECK(same.delta1_norm == 0.0);

    WeylDiffSamples diff = weyl_diff_on_contour(a, b, g);
    for (int j = 0; j < g.size(); ++j) {
        cplx want = cplx(1.0 / kPi) / (g.nodes[j] - cplx(0.01)) -
                    cplx(1.0 / kPi) / (g.nodes[j] - cplx(0.0));
        CHECK(std::abs(diff.values[j] - want) < 1e-14);
    }

    SpectralData c = a;
    c.eigenvalues[1] = cplx(2.25 - 1e-7);  // pole within 1e-6 of the contour
    c.eigenvalues[2] = cplx(4.0);
    CHECK_THROWS_AS(weyl_diff_on_contour(c, b, g), Error);
}

TEST_CASE("characteristic combination r1 - psi(0) phi(pi) vanishes to the multiplicity") {
    // At an eigenvalue la_n of multiplicity m_n the function
    // F(la) = r1(la) - psi(0, la) phi(pi, la) has a zero of order >= m_n.
    auto check_problem = [](const Problem& pr, int n_max) {
        SpectralData data = locate_eigenvalues(pr, n_max);
        auto F = [&](cplx la) {
            EndpointValues e = phi_S_at_pi(pr.sigma, la);
            return eval_poly(pr.polys, Which::r1, la) - psi_at_zero(pr, la) * e.phi;
        };
        for (const auto& cl : data.clusters) {
            if (cl.start > 4) continue;  // head suffices
            cplx la_n = data.eigenvalues[cl.start - 1];
            double scale = std::max(1.0, std::pow(std::abs(la_n), pr.polys.degree + 1));
            for (int k = 0; k < cl.multiplicity; ++k) {
                cplx fk = (k == 0) ? F(la_n) : analytic_derivative(F, la_n, k, 0.4, 64);
                CHECK(std::abs(fk) < 1e-6 * scale);
            }
        }
    };
    check_problem(model_p0(), 5);
    check_problem(model_p1(), 5);
}
