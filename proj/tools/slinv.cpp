// Command-line surface for the forward/inverse spectral pipeline.
#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "sl/cauchy.hpp"
#include "sl/io.hpp"

using namespace sl;

namespace {

int exit_code_for(const Error& e) {
    switch (e.kind()) {
        case ErrorKind::InvalidArgument:
        case ErrorKind::Parse:
            return 2;
        case ErrorKind::Io:
            return 3;
        case ErrorKind::VerificationFailure:
            return 5;
        default:
            return 4;
    }
}

struct Settings {
    int m_q = 256;        // contour quadrature nodes
    int n_x = 0;          // resample sigma onto this many grid points (0 = keep)
    int k_f = 64;         // series basis size for boundary-data extraction
    double cond_floor = 1e-13;
    double verify_tol = 1e-5;
    double tail_tol = 1e-9;
    double cluster_tol = 1e-7;
    double ode_tol = 1e-11;
    bool verify = true;
};

void apply_config_file(Settings& s, const std::string& path) {
    json j = read_json_file(path);
    try {
        if (j.contains("m_q")) s.m_q = j["m_q"].get<int>();
        if (j.contains("n_x")) s.n_x = j["n_x"].get<int>();
        if (j.contains("k_f")) s.k_f = j["k_f"].get<int>();
        if (j.contains("cond_floor")) s.cond_floor = j["cond_floor"].get<double>();
        if (j.contains("verify_tol")) s.verify_tol = j["verify_tol"].get<double>();
        if (j.contains("tail_tol")) s.tail_tol = j["tail_tol"].get<double>();
        if (j.contains("cluster_tol")) s.cluster_tol = j["cluster_tol"].get<double>();
        if (j.contains("ode_tol")) s.ode_tol = j["ode_tol"].get<double>();
        if (j.contains("verify")) s.verify = j["verify"].get<bool>();
    } catch (const std::exception& e) {
        throw Error(ErrorKind::Parse, std::string("config: ") + e.what());
    }
}

InverseOptions inverse_options(const Settings& s) {
    InverseOptions opts;
    opts.node_count = s.m_q;
    opts.cond_floor = s.cond_floor;
    opts.verify_tol = s.verify_tol;
    opts.tail_tol = s.tail_tol;
    opts.cluster_tol = s.cluster_tol;
    opts.verify = s.verify;
    opts.ode.tol = s.ode_tol;
    return opts;
}

SpectrumOptions spectrum_options(const Settings& s) {
    SpectrumOptions opts;
    opts.cluster_tol = s.cluster_tol;
    opts.ode.tol = s.ode_tol;
    return opts;
}

Problem load_problem(const std::string& path, const Settings& s) {
    Problem pr = problem_from_json(read_json_file(path));
    if (s.n_x > 1 && s.n_x != pr.sigma.size()) {
        const PotentialSigma& old = pr.sigma;
        pr.sigma = PotentialSigma::sample(s.n_x, [&](double x) { return old(x); });
    }
    return pr;
}

void print_spectral_summary(const SpectralData& data) {
    std::vector<int> mult(data.count(), 1);
    for (const auto& cl : data.clusters)
        for (int k = 0; k < cl.multiplicity; ++k) mult[cl.start - 1 + k] = cl.multiplicity;
    std::printf("%4s %23s %23s %23s %23s %4s\n", "n", "re(lambda)", "im(lambda)", "re(alpha)",
                "im(alpha)", "m");
    for (int n = 1; n <= data.count(); ++n)
        std::printf("%4d %23.15e %23.15e %23.15e %23.15e %4d\n", n,
                    data.eigenvalues[n - 1].real(), data.eigenvalues[n - 1].imag(),
                    data.weights[n - 1].real(), data.weights[n - 1].imag(), mult[n - 1]);
}

void write_reconstruction(const ReconstructionResult& result, const std::string& out,
                          const std::string& diag_out) {
    write_json_file(out, reconstruction_to_json(result));
    if (!diag_out.empty())
        write_text_file(diag_out,
                        diagnostics_csv(result.diagnostics, result.problem.sigma.grid()));
}

double sigma_sup_diff(const Problem& a, const Problem& b) {
    double sup = 0.0;
    for (int i = 0; i < a.sigma.size(); ++i) {
        double x = a.sigma.grid()[i];
        sup = std::max(sup, std::abs(a.sigma.values()[i] - b.sigma(x)));
    }
    return sup;
}

double poly_err(const std::vector<cplx>& a, const std::vector<cplx>& b) {
    double e = 0.0;
    for (size_t n = 0; n < a.size() && n < b.size(); ++n)
        e = std::max(e, std::abs(a[n] - b[n]));
    return e;
}

struct SweepRow {
    double scale = 0.0;
    bool ok = false;
    std::string status;
    double delta = 0.0, sigma_err = 0.0, c_err = 0.0, d_err = 0.0;
    double verify_lambda = 0.0, verify_alpha = 0.0;
};

SweepRow sweep_row(const Problem& tilde, const std::string& family, int index, double t,
                   int n_max, const Settings& s) {
    SweepRow row;
    row.scale = t;
    InverseOptions opts = inverse_options(s);
    try {
        ReconstructionResult result;
        if (family == "cauchy-constant") {
            CauchyData cd = cauchy_from_problem(tilde, s.k_f, opts.ode);
            if (index < 0 || index > cd.degree)
                throw Error(ErrorKind::InvalidArgument, "constant index out of range");
            cd.c_coeffs[index] += t;
            result = invert_from_cauchy(tilde, cd, n_max, opts);
        } else if (family == "split-cluster") {
            // Split the multiple eigenvalue into +/- sqrt(t) through a small
            // boundary-polynomial perturbation, so the forward solver supplies
            // consistent weights for the split targets. Only the head of the
            // perturbed spectrum is kept; the tail stays equal to the
            // reference so the head difference carries all of the change.
            Problem aux = tilde;
            if (index < 0 || index >= static_cast<int>(aux.polys.d.size()))
                throw Error(ErrorKind::InvalidArgument, "coefficient index out of range");
            aux.polys.d[index] += kPi * t;
            SpectralData tilde_data = compute_spectral_data(tilde, n_max, spectrum_options(s));
            SpectralData target = compute_spectral_data(aux, n_max, spectrum_options(s));
            int head = std::max({target.cut_index, tilde_data.cut_index,
                                 tilde.polys.degree + 4});
            for (int n = head; n < target.count(); ++n) {
                target.eigenvalues[n] = tilde_data.eigenvalues[n];
                target.weights[n] = tilde_data.weights[n];
            }
            result = invert(tilde, target, opts);
        } else {
            SpectralData target = compute_spectral_data(tilde, n_max, spectrum_options(s));
            if (index < 1 || index > target.count())
                throw Error(ErrorKind::InvalidArgument, "eigenvalue index out of range");
            if (family == "shift-eigenvalue")
                target.eigenvalues[index - 1] += t;
            else if (family == "scale-weight")
                target.weights[index - 1] *= 1.0 + t;
            else
                throw Error(ErrorKind::InvalidArgument, "unknown family " + family);
            result = invert(tilde, target, opts);
        }
        row.sigma_err = sigma_sup_diff(result.problem, tilde);
        row.c_err = poly_err(result.problem.polys.c, tilde.polys.c);
        row.d_err = poly_err(result.problem.polys.d, tilde.polys.d);
        row.delta = std::max(result.diagnostics.delta1, result.diagnostics.delta2_tail);
        row.verify_lambda = result.diagnostics.verify_lambda_residual;
        row.verify_alpha = result.diagnostics.verify_alpha_residual;
        row.ok = true;
        row.status = "ok";
    } catch (const Error& e) {
        row.status = to_string(e.kind());
    }
    return row;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Forward and inverse spectral problems with a distribution potential and "
                 "polynomial boundary dependence"};
    app.require_subcommand(1);
    app.fallthrough();  // global flags may follow the subcommand name

    Settings settings;
    std::string config_path;
    app.add_option("--config", config_path, "JSON config file (flags override it)");
    // Flags override the config file: capture which were given, apply later.
    int flag_m_q = -1, flag_n_x = -1, flag_k_f = -1;
    double flag_cond = -1.0, flag_vtol = -1.0, flag_ode = -1.0;
    bool no_verify = false;
    app.add_option("--m-q", flag_m_q, "contour quadrature nodes");
    app.add_option("--n-x", flag_n_x, "resample sigma onto this many grid points");
    app.add_option("--k-f", flag_k_f, "series basis size for boundary-data extraction");
    app.add_option("--cond-floor", flag_cond, "reciprocal-condition floor");
    app.add_option("--verify-tol", flag_vtol, "verification tolerance");
    app.add_option("--ode-tol", flag_ode, "ODE integration tolerance");
    app.add_flag("--no-verify", no_verify, "skip post-hoc verification");

    std::string in_file, data_file, out_file, diag_file = "";
    int n_max = 12;

    CLI::App* fwd = app.add_subcommand("forward", "compute spectral data of a problem");
    fwd->add_option("problem", in_file, "problem file")->required();
    fwd->add_option("--n-max", n_max, "number of eigenvalues")->check(CLI::PositiveNumber);
    fwd->add_option("--out", out_file, "spectral data output file");

    CLI::App* inv = app.add_subcommand("invert", "reconstruct a problem from spectral data");
    inv->add_option("tilde", in_file, "reference problem file")->required();
    inv->add_option("data", data_file, "target spectral data file")->required();
    inv->add_option("--out", out_file, "reconstruction output file")->required();
    inv->add_option("--diagnostics", diag_file, "diagnostics CSV output file");

    CLI::App* cauchy = app.add_subcommand("cauchy", "generalized boundary-data pipeline");
    cauchy->require_subcommand(1);
    cauchy->fallthrough();
    CLI::App* cext = cauchy->add_subcommand("extract", "extract boundary data from a problem");
    cext->add_option("problem", in_file, "problem file")->required();
    cext->add_option("--out", out_file, "boundary data output file")->required();
    CLI::App* cinv = cauchy->add_subcommand("invert", "reconstruct from boundary data");
    cinv->add_option("tilde", in_file, "reference problem file")->required();
    cinv->add_option("data", data_file, "boundary data file")->required();
    cinv->add_option("--n-max", n_max, "spectral range used in the reduction")
        ->check(CLI::PositiveNumber);
    cinv->add_option("--out", out_file, "reconstruction output file")->required();
    cinv->add_option("--diagnostics", diag_file, "diagnostics CSV output file");

    std::string family;
    int index = 1;
    std::vector<double> scales;
    std::string plot_file;
    CLI::App* sweep = app.add_subcommand("sweep", "perturbation/stability experiment");
    sweep->add_option("tilde", in_file, "reference problem file")->required();
    sweep->add_option("--family", family,
                      "shift-eigenvalue | scale-weight | split-cluster | cauchy-constant")
        ->required();
    sweep->add_option("--index", index, "eigenvalue/coefficient index");
    sweep->add_option("--scales", scales, "perturbation scales, in output order")
        ->required()
        ->delimiter(',');
    sweep->add_option("--n-max", n_max, "spectral range")->check(CLI::PositiveNumber);
    sweep->add_option("--out", out_file, "CSV output file")->required();
    sweep->add_option("--plot", plot_file, "log-log plot-data output file");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        if (!config_path.empty()) apply_config_file(settings, config_path);
        if (flag_m_q > 0) settings.m_q = flag_m_q;
        if (flag_n_x > 0) settings.n_x = flag_n_x;
        if (flag_k_f > 0) settings.k_f = flag_k_f;
        if (flag_cond > 0) settings.cond_floor = flag_cond;
        if (flag_vtol > 0) settings.verify_tol = flag_vtol;
        if (flag_ode > 0) settings.ode_tol = flag_ode;
        if (no_verify) settings.verify = false;

        if (fwd->parsed()) {
            Problem pr = load_problem(in_file, settings);
            SpectralData data = compute_spectral_data(pr, n_max, spectrum_options(settings));
            print_spectral_summary(data);
            if (!out_file.empty()) write_json_file(out_file, spectral_data_to_json(data));
        } else if (inv->parsed()) {
            Problem tilde = load_problem(in_file, settings);
            SpectralData target = spectral_data_from_json(read_json_file(data_file));
            ReconstructionResult result = invert(tilde, target, inverse_options(settings));
            write_reconstruction(result, out_file, diag_file);
            std::printf("verify residuals: lambda %.3e alpha %.3e\n",
                        result.diagnostics.verify_lambda_residual,
                        result.diagnostics.verify_alpha_residual);
        } else if (cext->parsed()) {
            Problem pr = load_problem(in_file, settings);
            CauchyData cd = cauchy_from_problem(pr, settings.k_f, OdeOptions{settings.ode_tol});
            write_json_file(out_file, cauchy_data_to_json(cd));
            std::printf("fit residual: %.3e\n", cd.fit_residual);
        } else if (cinv->parsed()) {
            Problem tilde = load_problem(in_file, settings);
            CauchyData cd = cauchy_data_from_json(read_json_file(data_file));
            ReconstructionResult result =
                invert_from_cauchy(tilde, cd, n_max, inverse_options(settings));
            write_reconstruction(result, out_file, diag_file);
        } else if (sweep->parsed()) {
            if (scales.empty()) throw Error(ErrorKind::InvalidArgument, "empty scales list");
            if (family != "shift-eigenvalue" && family != "scale-weight" &&
                family != "split-cluster" && family != "cauchy-constant")
                throw Error(ErrorKind::InvalidArgument, "unknown family " + family);
            Problem tilde = load_problem(in_file, settings);
            std::ostringstream csv, plot;
            csv << "scale,delta,sigma_sup,c_err,d_err,verify_lambda,verify_alpha,status\n";
            plot << "log10_delta,log10_sigma_sup,log10_c_err,log10_d_err\n";
            for (double t : scales) {
                SweepRow row = sweep_row(tilde, family, index, t, n_max, settings);
                csv << format_double(row.scale) << ',' << format_double(row.delta) << ','
                    << format_double(row.sigma_err) << ',' << format_double(row.c_err) << ','
                    << format_double(row.d_err) << ',' << format_double(row.verify_lambda)
                    << ',' << format_double(row.verify_alpha) << ',' << row.status << '\n';
                if (row.ok && row.delta > 0.0)
                    plot << format_double(std::log10(row.delta)) << ','
                         << format_double(std::log10(std::max(row.sigma_err, 1e-300))) << ','
                         << format_double(std::log10(std::max(row.c_err, 1e-300))) << ','
                         << format_double(std::log10(std::max(row.d_err, 1e-300))) << '\n';
                std::printf("scale %-12g %s\n", t, row.status.c_str());
            }
            write_text_file(out_file, csv.str());
            if (!plot_file.empty()) write_text_file(plot_file, plot.str());
        }
    } catch (const Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return exit_code_for(e);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: Internal: %s\n", e.what());
        return 4;
    }
    return 0;
}
