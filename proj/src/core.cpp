#include "sl/core.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace sl {

const char* to_string(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::InvalidArgument: return "InvalidArgument";
        case ErrorKind::Io: return "Io";
        case ErrorKind::Parse: return "Parse";
        case ErrorKind::InvalidContour: return "InvalidContour";
        case ErrorKind::StepFailure: return "StepFailure";
        case ErrorKind::NearPole: return "NearPole";
        case ErrorKind::ZeroOnContour: return "ZeroOnContour";
        case ErrorKind::NonIntegerWinding: return "NonIntegerWinding";
        case ErrorKind::CountMismatch: return "CountMismatch";
        case ErrorKind::NewtonDivergence: return "NewtonDivergence";
        case ErrorKind::CrossCheckFailure: return "CrossCheckFailure";
        case ErrorKind::PoleOnContour: return "PoleOnContour";
        case ErrorKind::IllConditioned: return "IllConditioned";
        case ErrorKind::DegreeViolation: return "DegreeViolation";
        case ErrorKind::VerificationFailure: return "VerificationFailure";
        case ErrorKind::FitResidualTooLarge: return "FitResidualTooLarge";
        case ErrorKind::HeadEscaped: return "HeadEscaped";
        case ErrorKind::HeadTooLarge: return "HeadTooLarge";
    }
    return "Unknown";
}

PotentialSigma::PotentialSigma(std::vector<double> grid, std::vector<cplx> values)
    : grid_(std::move(grid)), values_(std::move(values)) {
    if (grid_.size() != values_.size() || grid_.size() < 4)
        throw Error(ErrorKind::InvalidArgument, "sigma grid needs at least 4 matching samples");
    if (grid_.front() != 0.0 || std::abs(grid_.back() - kPi) > 1e-12 * kPi)
        throw Error(ErrorKind::InvalidArgument, "sigma grid must span [0, pi]");
    step_ = grid_[1] - grid_[0];
    for (std::size_t i = 1; i < grid_.size(); ++i) {
        double h = grid_[i] - grid_[i - 1];
        if (h <= 0.0 || std::abs(h - step_) > 1e-12 * step_)
            throw Error(ErrorKind::InvalidArgument, "sigma grid must be uniform and increasing");
    }
    for (cplx v : values_)
        if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
            throw Error(ErrorKind::InvalidArgument, "sigma samples must be finite");
}

PotentialSigma PotentialSigma::zero(int n_points) {
    return sample(n_points, [](double) { return cplx(0.0); });
}

cplx PotentialSigma::operator()(double x) const {
    const int n = size();
    double u = x / step_;
    int i = static_cast<int>(std::floor(u));
    // Window of four nodes i-1 .. i+2, shifted at the ends.
    int j0 = std::clamp(i - 1, 0, n - 4);
    double t = u - static_cast<double>(j0);
    // Lagrange basis on nodes 0,1,2,3 in local coordinates.
    double l0 = -(t - 1.0) * (t - 2.0) * (t - 3.0) / 6.0;
    double l1 = t * (t - 2.0) * (t - 3.0) / 2.0;
    double l2 = -t * (t - 1.0) * (t - 3.0) / 2.0;
    double l3 = t * (t - 1.0) * (t - 2.0) / 6.0;
    return l0 * values_[j0] + l1 * values_[j0 + 1] + l2 * values_[j0 + 2] + l3 * values_[j0 + 3];
}

namespace {

std::vector<cplx> poly_roots_monic(const std::vector<cplx>& coeffs);

}  // namespace

void BoundaryPolynomials::validate() const {
    if (degree < 0) throw Error(ErrorKind::InvalidArgument, "degree must be non-negative");
    if (static_cast<int>(c.size()) != degree + 1 || static_cast<int>(d.size()) != degree + 1)
        throw Error(ErrorKind::InvalidArgument, "coefficient lists must have degree+1 entries");
    if (c.back() != cplx(1.0))
        throw Error(ErrorKind::InvalidArgument, "r1 must be monic (c_p == 1)");
    for (cplx v : c)
        if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
            throw Error(ErrorKind::InvalidArgument, "r1 coefficients must be finite");
    for (cplx v : d)
        if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
            throw Error(ErrorKind::InvalidArgument, "r2 coefficients must be finite");
    if (degree == 0) return;
    double c_scale = 1.0;
    for (cplx v : c) c_scale = std::max(c_scale, std::abs(v));
    bool d_zero = std::all_of(d.begin(), d.end(),
                              [&](cplx v) { return std::abs(v) <= 1e-9 * c_scale; });
    if (d_zero) return;  // r2 == 0 (or negligible): roots of r1 gain multiplicity instead
    // Relative primality: r2 must not vanish at any root of r1.
    double d_scale = 1.0;
    for (cplx v : d) d_scale = std::max(d_scale, std::abs(v));
    for (cplx z : poly_roots_monic(c)) {
        cplx r2 = d[degree];
        for (int k = degree - 1; k >= 0; --k) r2 = r2 * z + d[k];
        if (std::abs(r2) <= 1e-8 * d_scale)
            throw Error(ErrorKind::InvalidArgument, "r1 and r2 share a root");
    }
}

cplx eval_poly(const BoundaryPolynomials& polys, Which which, cplx la) {
    const std::vector<cplx>& a = (which == Which::r1) ? polys.c : polys.d;
    cplx v = a.back();
    for (int k = static_cast<int>(a.size()) - 2; k >= 0; --k) v = v * la + a[k];
    return v;
}

void Problem::validate() const {
    if (sigma.size() < 4) throw Error(ErrorKind::InvalidArgument, "problem has no sigma samples");
    polys.validate();
}

bool eigenvalue_less(cplx la_a, cplx la_b) {
    cplx ra = sqrt_lambda(la_a), rb = sqrt_lambda(la_b);
    double ma = std::abs(ra), mb = std::abs(rb);
    if (ma != mb) return ma < mb;
    return std::arg(ra) < std::arg(rb);
}

void sort_spectral_data(SpectralData& data) {
    struct Block {
        cplx la;
        int multiplicity = 1;
        std::vector<cplx> alphas;
    };
    const bool has_weights = data.weights.size() == data.eigenvalues.size();
    std::vector<Block> blocks;
    for (const auto& cl : data.clusters) {
        Block b;
        b.la = data.eigenvalues[cl.start - 1];
        b.multiplicity = cl.multiplicity;
        if (has_weights)
            for (int k = 0; k < cl.multiplicity; ++k)
                b.alphas.push_back(data.weights[cl.start - 1 + k]);
        blocks.push_back(std::move(b));
    }
    std::stable_sort(blocks.begin(), blocks.end(),
                     [](const Block& a, const Block& b) { return eigenvalue_less(a.la, b.la); });
    data.eigenvalues.clear();
    data.weights.clear();
    data.clusters.clear();
    int index = 1;
    for (const auto& b : blocks) {
        data.clusters.push_back({index, b.multiplicity});
        for (int k = 0; k < b.multiplicity; ++k) {
            data.eigenvalues.push_back(b.la);
            if (has_weights) data.weights.push_back(b.alphas[k]);
            ++index;
        }
    }
}

void SpectralData::validate(bool check_weights) const {
    if (check_weights && weights.size() != eigenvalues.size())
        throw Error(ErrorKind::InvalidArgument, "weights must match eigenvalues");
    int expected = 1;
    for (const auto& cl : clusters) {
        if (cl.start != expected || cl.multiplicity < 1)
            throw Error(ErrorKind::InvalidArgument, "clusters must partition the index range");
        for (int k = 1; k < cl.multiplicity; ++k) {
            if (eigenvalues[cl.start - 1 + k] != eigenvalues[cl.start - 1])
                throw Error(ErrorKind::InvalidArgument, "cluster entries must repeat la_n");
        }
        expected += cl.multiplicity;
    }
    if (expected != count() + 1)
        throw Error(ErrorKind::InvalidArgument, "clusters must cover all eigenvalues");
    for (const auto& cl : clusters) {
        if (cl.start >= cut_index && cl.multiplicity != 1)
            throw Error(ErrorKind::InvalidArgument, "multiplicities beyond the cut must be 1");
    }
    // kappa_n = rho_n - (n - p - 1) must stay bounded over the stored tail.
    for (int n = std::max(cut_index, degree + 2); n <= count(); ++n) {
        cplx kappa = rho(n) - cplx(n - degree - 1);
        if (!(std::abs(kappa) < 0.5))
            throw Error(ErrorKind::InvalidArgument, "tail numbering violates the asymptotics");
    }
}

ContourGrid make_contour(int N, int p, int node_count) {
    if (N < 1) throw Error(ErrorKind::InvalidContour, "cut index must be at least 1");
    if (node_count < 16 || node_count % 2 != 0)
        throw Error(ErrorKind::InvalidContour, "node count must be even and at least 16");
    double base = static_cast<double>(N) - static_cast<double>(p) - 1.5;
    double radius = base * base;
    if (radius <= 0.0) throw Error(ErrorKind::InvalidContour, "contour radius must be positive");
    ContourGrid grid;
    grid.cut_index = N;
    grid.degree = p;
    grid.radius = radius;
    grid.nodes.resize(node_count);
    grid.weights.resize(node_count);
    for (int j = 0; j < node_count; ++j) {
        double theta = 2.0 * kPi * static_cast<double>(j) / static_cast<double>(node_count);
        cplx node = std::polar(radius, theta);
        grid.nodes[j] = node;
        grid.weights[j] = cplx(0.0, 2.0 * kPi / static_cast<double>(node_count)) * node;
    }
    return grid;
}

cplx contour_integral(std::span<const cplx> values, const ContourGrid& grid) {
    if (values.size() != grid.nodes.size())
        throw Error(ErrorKind::InvalidArgument, "value count must match contour nodes");
    cplx acc(0.0);
    for (std::size_t j = 0; j < values.size(); ++j) acc += grid.nodes[j] * values[j];
    return acc / static_cast<double>(grid.size());
}

void WeylDiffSamples::validate() const {
    if (values.size() != contour.nodes.size())
        throw Error(ErrorKind::InvalidArgument, "samples must match contour nodes");
    double m = 0.0;
    for (cplx v : values) {
        if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
            throw Error(ErrorKind::InvalidArgument, "hat M_N samples must be finite");
        m = std::max(m, std::abs(v));
    }
    if (std::abs(m - delta1_norm) > 1e-12 * (1.0 + m))
        throw Error(ErrorKind::InvalidArgument, "delta1_norm inconsistent with samples");
}

void CauchyData::validate() const {
    if (degree < 0 || basis_size < 1)
        throw Error(ErrorKind::InvalidArgument, "cauchy data needs degree >= 0, basis >= 1");
    if (static_cast<int>(c_coeffs.size()) != degree + 1)
        throw Error(ErrorKind::InvalidArgument, "C constants must have p+1 entries");
    if (static_cast<int>(d_coeffs.size()) != degree)
        throw Error(ErrorKind::InvalidArgument, "D constants must have p entries");
    if (g_samples.size() != j_samples.size() || static_cast<int>(g_samples.size()) <= basis_size)
        throw Error(ErrorKind::InvalidArgument, "sample grids too coarse for the basis");
    for (const auto* vec : {&g_samples, &j_samples, &c_coeffs, &d_coeffs})
        for (cplx v : *vec)
            if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
                throw Error(ErrorKind::InvalidArgument, "cauchy data must be finite");
}

namespace {

// Durand-Kerner; only used for the low-degree relative-primality check.
std::vector<cplx> poly_roots_monic(const std::vector<cplx>& coeffs) {
    int deg = static_cast<int>(coeffs.size()) - 1;
    std::vector<cplx> roots(deg);
    double scale = 1.0;
    for (int k = 0; k < deg; ++k) scale = std::max(scale, std::abs(coeffs[k]));
    double r0 = 1.0 + scale;
    for (int k = 0; k < deg; ++k)
        roots[k] = std::polar(r0, 0.4 + 2.0 * kPi * static_cast<double>(k) / deg);
    for (int iter = 0; iter < 200; ++iter) {
        double shift = 0.0;
        for (int k = 0; k < deg; ++k) {
            cplx p = coeffs[deg];
            for (int j = deg - 1; j >= 0; --j) p = p * roots[k] + coeffs[j];
            cplx q(1.0);
            for (int j = 0; j < deg; ++j)
                if (j != k) q *= roots[k] - roots[j];
            cplx dz = p / q;
            roots[k] -= dz;
            shift = std::max(shift, std::abs(dz));
        }
        if (shift < 1e-13 * r0) break;
    }
    return roots;
}

}  // namespace

}  // namespace sl
