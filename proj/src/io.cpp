#include "sl/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace sl {

namespace {

json cvec_to_json(const std::vector<cplx>& v) {
    json re = json::array(), im = json::array();
    for (cplx z : v) {
        re.push_back(z.real());
        im.push_back(z.imag());
    }
    return json{{"re", std::move(re)}, {"im", std::move(im)}};
}

std::vector<cplx> cvec_from_json(const json& j) {
    const auto& re = j.at("re");
    const auto& im = j.at("im");
    if (!re.is_array() || !im.is_array() || re.size() != im.size())
        throw Error(ErrorKind::Parse, "re/im arrays must match");
    std::vector<cplx> v(re.size());
    for (size_t i = 0; i < v.size(); ++i)
        v[i] = cplx(re[i].get<double>(), im[i].get<double>());
    return v;
}

template <typename F>
auto guarded(const F& f) {
    try {
        return f();
    } catch (const Error&) {
        throw;
    } catch (const std::exception& e) {
        throw Error(ErrorKind::Parse, e.what());
    }
}

}  // namespace

json problem_to_json(const Problem& problem) {
    json j;
    j["type"] = "problem";
    j["sigma"] = {{"grid", problem.sigma.grid()}, {"values", cvec_to_json(problem.sigma.values())}};
    j["polynomials"] = {{"degree", problem.polys.degree},
                        {"c", cvec_to_json(problem.polys.c)},
                        {"d", cvec_to_json(problem.polys.d)}};
    return j;
}

Problem problem_from_json(const json& j) {
    return guarded([&] {
        Problem pr;
        pr.sigma = PotentialSigma(j.at("sigma").at("grid").get<std::vector<double>>(),
                                  cvec_from_json(j.at("sigma").at("values")));
        const auto& jp = j.at("polynomials");
        pr.polys = {jp.at("degree").get<int>(), cvec_from_json(jp.at("c")),
                    cvec_from_json(jp.at("d"))};
        pr.validate();
        return pr;
    });
}

json spectral_data_to_json(const SpectralData& data) {
    json clusters = json::array();
    for (const auto& cl : data.clusters)
        clusters.push_back({{"start", cl.start}, {"multiplicity", cl.multiplicity}});
    json j;
    j["type"] = "spectral_data";
    j["degree"] = data.degree;
    j["cut_index"] = data.cut_index;
    j["eigenvalues"] = cvec_to_json(data.eigenvalues);
    j["weights"] = cvec_to_json(data.weights);
    j["clusters"] = std::move(clusters);
    return j;
}

SpectralData spectral_data_from_json(const json& j) {
    return guarded([&] {
        SpectralData data;
        data.degree = j.at("degree").get<int>();
        data.cut_index = j.at("cut_index").get<int>();
        data.eigenvalues = cvec_from_json(j.at("eigenvalues"));
        data.weights = cvec_from_json(j.at("weights"));
        for (const auto& cl : j.at("clusters"))
            data.clusters.push_back(
                {cl.at("start").get<int>(), cl.at("multiplicity").get<int>()});
        data.validate();
        return data;
    });
}

json cauchy_data_to_json(const CauchyData& cd) {
    json j;
    j["type"] = "cauchy_data";
    j["degree"] = cd.degree;
    j["basis_size"] = cd.basis_size;
    j["fit_residual"] = cd.fit_residual;
    j["g_samples"] = cvec_to_json(cd.g_samples);
    j["j_samples"] = cvec_to_json(cd.j_samples);
    j["c_coeffs"] = cvec_to_json(cd.c_coeffs);
    j["d_coeffs"] = cvec_to_json(cd.d_coeffs);
    return j;
}

CauchyData cauchy_data_from_json(const json& j) {
    return guarded([&] {
        CauchyData cd;
        cd.degree = j.at("degree").get<int>();
        cd.basis_size = j.at("basis_size").get<int>();
        cd.fit_residual = j.at("fit_residual").get<double>();
        cd.g_samples = cvec_from_json(j.at("g_samples"));
        cd.j_samples = cvec_from_json(j.at("j_samples"));
        cd.c_coeffs = cvec_from_json(j.at("c_coeffs"));
        cd.d_coeffs = cvec_from_json(j.at("d_coeffs"));
        cd.validate();
        return cd;
    });
}

json diagnostics_to_json(const Diagnostics& diag) {
    json j;
    j["condition_estimates"] = diag.condition_estimates;
    j["delta1"] = diag.delta1;
    j["delta2_tail"] = diag.delta2_tail;
    j["fit_residual_r1"] = diag.fit_residual_r1;
    j["fit_residual_r2"] = diag.fit_residual_r2;
    j["verify_lambda_residual"] = diag.verify_lambda_residual;
    j["verify_alpha_residual"] = diag.verify_alpha_residual;
    j["cut_index"] = diag.cut_index;
    return j;
}

Diagnostics diagnostics_from_json(const json& j) {
    return guarded([&] {
        Diagnostics d;
        d.condition_estimates = j.at("condition_estimates").get<std::vector<double>>();
        d.delta1 = j.at("delta1").get<double>();
        d.delta2_tail = j.at("delta2_tail").get<double>();
        d.fit_residual_r1 = j.at("fit_residual_r1").get<double>();
        d.fit_residual_r2 = j.at("fit_residual_r2").get<double>();
        d.verify_lambda_residual = j.at("verify_lambda_residual").get<double>();
        d.verify_alpha_residual = j.at("verify_alpha_residual").get<double>();
        d.cut_index = j.at("cut_index").get<int>();
        return d;
    });
}

json reconstruction_to_json(const ReconstructionResult& result) {
    json j;
    j["type"] = "reconstruction";
    j["problem"] = problem_to_json(result.problem);
    j["diagnostics"] = diagnostics_to_json(result.diagnostics);
    return j;
}

ReconstructionResult reconstruction_from_json(const json& j) {
    return guarded([&] {
        ReconstructionResult r;
        r.problem = problem_from_json(j.at("problem"));
        r.diagnostics = diagnostics_from_json(j.at("diagnostics"));
        return r;
    });
}

json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::Io, "cannot open " + path);
    try {
        return json::parse(in);
    } catch (const std::exception& e) {
        throw Error(ErrorKind::Parse, path + ": " + e.what());
    }
}

void write_json_file(const std::string& path, const json& j) {
    write_text_file(path, j.dump(2) + "\n");
}

void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw Error(ErrorKind::Io, "cannot open " + path + " for writing");
    out << text;
    if (!out) throw Error(ErrorKind::Io, "write failed for " + path);
}

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string diagnostics_csv(const Diagnostics& diag, const std::vector<double>& x_grid) {
    std::ostringstream out;
    out << "x,condition_estimate\n";
    for (size_t i = 0; i < diag.condition_estimates.size(); ++i) {
        double x = i < x_grid.size() ? x_grid[i] : 0.0;
        out << format_double(x) << ',' << format_double(diag.condition_estimates[i]) << '\n';
    }
    out << "# delta1," << format_double(diag.delta1) << '\n';
    out << "# delta2_tail," << format_double(diag.delta2_tail) << '\n';
    out << "# fit_residual_r1," << format_double(diag.fit_residual_r1) << '\n';
    out << "# fit_residual_r2," << format_double(diag.fit_residual_r2) << '\n';
    out << "# verify_lambda_residual," << format_double(diag.verify_lambda_residual) << '\n';
    out << "# verify_alpha_residual," << format_double(diag.verify_alpha_residual) << '\n';
    out << "# cut_index," << diag.cut_index << '\n';
    return out.str();
}

}  // namespace sl
