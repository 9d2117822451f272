#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <random>

#include "sl/core.hpp"

using namespace sl;

namespace {

bool close(cplx a, cplx b, double tol) { return std::abs(a - b) <= tol; }

}  // namespace

TEST_CASE("sigma sampling and cubic interpolation") {
    auto sg = PotentialSigma::sample(257, [](double x) { return cplx(std::sin(2.0 * x), 0.1 * x); });
    CHECK(sg.size() == 257);
    CHECK(sg.grid().front() == 0.0);
    CHECK(sg.grid().back() == doctest::Approx(kPi));
    // Cubic interpolation of a smooth function: error O(h^4).
    double h = sg.step();
    for (double x : {0.013, 0.5, 1.7, 2.9, kPi - 0.01}) {
        cplx exact(std::sin(2.0 * x), 0.1 * x);
        CHECK(std::abs(sg(x) - exact) < 20.0 * h * h * h * h);
    }
    CHECK(PotentialSigma::zero(16)(1.234) == cplx(0.0));

    CHECK_THROWS_AS(PotentialSigma({0.0, 1.0, 2.0}, {cplx(0), cplx(0), cplx(0)}), Error);
    CHECK_THROWS_AS(PotentialSigma({0.0, 1.0, 2.0, 3.0}, {cplx(0), cplx(0), cplx(0), cplx(0)}),
                    Error);  // does not end at pi
}

TEST_CASE("boundary polynomial validation and evaluation") {
    BoundaryPolynomials p0{0, {cplx(1.0)}, {cplx(0.0)}};
    p0.validate();
    CHECK(eval_poly(p0, Which::r1, cplx(5.0)) == cplx(1.0));

    BoundaryPolynomials p1{1, {cplx(0.0), cplx(1.0)}, {cplx(0.0), cplx(0.0)}};
    p1.validate();
    CHECK(close(eval_poly(p1, Which::r1, cplx(2.0, 1.0)), cplx(2.0, 1.0), 0.0));

    BoundaryPolynomials p2{2, {cplx(3.0), cplx(0.0), cplx(1.0)}, {cplx(1.0), cplx(2.0), cplx(0.5)}};
    p2.validate();
    CHECK(eval_poly(p2, Which::r1, cplx(2.0)) == cplx(7.0));

    BoundaryPolynomials not_monic{1, {cplx(0.0), cplx(2.0)}, {cplx(1.0), cplx(0.0)}};
    CHECK_THROWS_AS(not_monic.validate(), Error);

    // r1 = la - 1, r2 = 2 la - 2 share the root 1.
    BoundaryPolynomials common{1, {cplx(-1.0), cplx(1.0)}, {cplx(-2.0), cplx(2.0)}};
    CHECK_THROWS_AS(common.validate(), Error);

    // Relatively prime pair passes.
    BoundaryPolynomials ok{1, {cplx(-1.0), cplx(1.0)}, {cplx(1.0), cplx(1.0)}};
    ok.validate();
}

TEST_CASE("contour construction and quadrature") {
    ContourGrid g = make_contour(3, 0, 64);
    CHECK(g.radius == doctest::Approx(2.25));
    CHECK(make_contour(2, 0, 64).radius == doctest::Approx(0.25));
    CHECK(make_contour(2, 2, 64).radius == doctest::Approx(2.25));
    CHECK_THROWS_AS(make_contour(0, 0, 64), Error);
    CHECK_THROWS_AS(make_contour(3, 0, 15), Error);
    CHECK_THROWS_AS(make_contour(3, 0, 33), Error);  // odd

    for (cplx z : g.nodes) CHECK(std::abs(z) == doctest::Approx(2.25));

    // mu^k integrates to [k == -1] exactly for the trapezoid rule.
    ContourGrid g32 = make_contour(3, 0, 32);
    for (int k = -3; k <= 3; ++k) {
        std::vector<cplx> v(g32.size());
        for (int j = 0; j < g32.size(); ++j) v[j] = std::pow(g32.nodes[j], k);
        cplx want = (k == -1) ? cplx(1.0) : cplx(0.0);
        CHECK(std::abs(contour_integral(v, g32) - want) < 1e-12);
    }

    // Residue of 1/(mu - a) for |a| < radius.
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    ContourGrid g128 = make_contour(3, 0, 128);
    for (int rep = 0; rep < 5; ++rep) {
        cplx a(unif(rng), unif(rng));
        std::vector<cplx> v(g128.size());
        for (int j = 0; j < g128.size(); ++j) v[j] = 1.0 / (g128.nodes[j] - a);
        CHECK(std::abs(contour_integral(v, g128) - cplx(1.0)) < 1e-10);
    }

    // Winding-number sanity: sum w_j / (2 pi i la_j) = 1.
    cplx winding(0.0);
    for (int j = 0; j < g.size(); ++j) winding += g.weights[j] / (cplx(0.0, 2.0 * kPi) * g.nodes[j]);
    CHECK(std::abs(winding - cplx(1.0)) < 1e-10);
}

TEST_CASE("spectral data ordering is a deterministic total order") {
    SpectralData data;
    data.degree = 0;
    data.cut_index = 3;
    // Double eigenvalue at 0.1, simple ones at 4.0 and 9.0 (scrambled input).
    data.eigenvalues = {cplx(9.0), cplx(0.1), cplx(0.1), cplx(4.0)};
    data.weights = {cplx(90.0), cplx(1.0), cplx(2.0), cplx(40.0)};
    data.clusters = {{1, 1}, {2, 2}, {4, 1}};
    sort_spectral_data(data);
    CHECK(data.eigenvalues[0] == cplx(0.1));
    CHECK(data.eigenvalues[1] == cplx(0.1));
    CHECK(data.eigenvalues[2] == cplx(4.0));
    CHECK(data.eigenvalues[3] == cplx(9.0));
    CHECK(data.weights[0] == cplx(1.0));
    CHECK(data.weights[1] == cplx(2.0));
    CHECK(data.weights[3] == cplx(90.0));
    CHECK(data.clusters[0].start == 1);
    CHECK(data.clusters[0].multiplicity == 2);
    data.validate();

    // Re-sorting a sorted copy is bit-for-bit stable.
    SpectralData copy = data;
    sort_spectral_data(copy);
    CHECK(copy.eigenvalues == data.eigenvalues);
    CHECK(copy.weights == data.weights);

    // Equal-modulus tie broken by arg(rho) ascending.
    CHECK(eigenvalue_less(cplx(1.0), cplx(-1.0)));     // rho = 1 before rho = i
    CHECK(eigenvalue_less(cplx(0.0, -1.0), cplx(0.0, 1.0)));

    SpectralData bad = data;
    bad.clusters[0].multiplicity = 3;
    CHECK_THROWS_AS(bad.validate(), Error);
}

TEST_CASE("sqrt branch of the spectral parameter") {
    CHECK(sqrt_lambda(cplx(4.0)) == cplx(2.0));
    CHECK(sqrt_lambda(cplx(-1.0)) == cplx(0.0, 1.0));
    CHECK(sqrt_lambda(cplx(0.0)) == cplx(0.0));
    cplx r = sqrt_lambda(cplx(-2.0, -3.0));
    CHECK(r.real() > 0.0);
    CHECK(close(r * r, cplx(-2.0, -3.0), 1e-14));
}
