// riccisol: verifies soliton candidates on pseudo-Riemannian backgrounds.
//
// Subcommands:
//   verify <scenario>     sample points, evaluate every enabled check, report
//   curvature <scenario>  dump the curvature of the scenario's metric at a point
//   list-families         show the built-in metric families and candidate kinds
//
// Exit codes: 0 all checks pass, 1 a check fails, 2 bad input.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ricci/scenario.hpp"

namespace {

/// Parses "u=0.3,v=-0.7,x1=0.4" against the chart; every coordinate must be
/// assigned exactly once.
ricci::Point parse_at(const std::string& text, const ricci::Chart& chart) {
    std::vector<bool> seen(chart.dimension(), false);
    ricci::Point p(chart.dimension(), 0.0);
    for (const auto& item : ricci::detail::split_list(text)) {
        std::size_t eq = item.find('=');
        if (eq == std::string::npos)
            throw ricci::ValidationError("--at entry '" + item + "' is not name=value");
        std::string name = ricci::detail::trim(item.substr(0, eq));
        auto idx = chart.index(name);
        if (!idx)
            throw ricci::ValidationError("--at names unknown coordinate '" + name + "'");
        if (seen[*idx])
            throw ricci::ValidationError("--at assigns '" + name + "' twice");
        seen[*idx] = true;
        p[*idx] = ricci::detail::to_double(item.substr(eq + 1), "--at " + name);
    }
    for (std::size_t i = 0; i < chart.dimension(); ++i)
        if (!seen[i])
            throw ricci::ValidationError("--at is missing coordinate '" + chart.name(i) + "'");
    return p;
}

void emit(const std::string& body, const std::string& out_path) {
    if (out_path.empty()) {
        std::fputs(body.c_str(), stdout);
        return;
    }
    std::ofstream out(out_path, std::ios::binary);
    if (!out) throw ricci::ValidationError("cannot write output file '" + out_path + "'");
    out << body;
}

int run_verify(const std::string& path, long samples, long long seed, double tol,
               const std::string& format, const std::string& out_path) {
    ricci::Scenario s = ricci::load_scenario(path);
    if (samples >= 0) s.set_count(static_cast<std::size_t>(samples));
    if (seed >= 0) s.set_seed(static_cast<std::uint64_t>(seed));
    if (tol > 0.0) s.set_tolerance(tol);
    ricci::Report r = ricci::run(s);
    emit(format == "text" ? ricci::render_text(r) : ricci::render_json(r), out_path);
    return r.overall_pass ? 0 : 1;
}

std::string index_name(const ricci::Chart& chart, std::size_t i) { return chart.name(i); }

int run_curvature(const std::string& path, const std::string& at) {
    ricci::Scenario s = ricci::load_scenario(path);
    const ricci::MetricSpec& M = s.metric();
    const ricci::Chart& chart = M.chart();
    ricci::Point p = parse_at(at, chart);
    ricci::PointFrame F = ricci::frame_at(M, p, 3);
    const std::size_t d = F.d;
    const double eps = 1e-13;

    std::printf("scenario: %s\n", s.name().c_str());
    std::printf("chart:   ");
    for (std::size_t i = 0; i < d; ++i) std::printf(" %s", chart.name(i).c_str());
    std::printf("\npoint:   ");
    for (std::size_t i = 0; i < d; ++i)
        std::printf(" %s=%.17g", chart.name(i).c_str(), p[i]);
    std::printf("\ndet g            = %.17g\n", F.det_g);
    std::printf("scalar curvature = %.17g\n", F.scalar);

    std::printf("\nChristoffel symbols (nonzero):\n");
    bool any = false;
    for (std::size_t k = 0; k < d; ++k)
        for (std::size_t i = 0; i < d; ++i)
            for (std::size_t j = i; j < d; ++j) {
                double v = F.gamma[F.i3(k, i, j)];
                if (std::abs(v) > eps) {
                    any = true;
                    std::printf("  Gamma^%s_{%s %s} = %.17g\n", index_name(chart, k).c_str(),
                                index_name(chart, i).c_str(), index_name(chart, j).c_str(), v);
                }
            }
    if (!any) std::printf("  (all zero)\n");

    std::printf("\nRiemann tensor R^l_{ijk} (nonzero, i < j):\n");
    any = false;
    for (std::size_t l = 0; l < d; ++l)
        for (std::size_t i = 0; i < d; ++i)
            for (std::size_t j = i + 1; j < d; ++j)
                for (std::size_t k = 0; k < d; ++k) {
                    double v = F.riemann[F.i4(l, i, j, k)];
                    if (std::abs(v) > eps) {
                        any = true;
                        std::printf("  R^%s_{%s %s %s} = %.17g\n", index_name(chart, l).c_str(),
                                    index_name(chart, i).c_str(), index_name(chart, j).c_str(),
                                    index_name(chart, k).c_str(), v);
                    }
                }
    if (!any) std::printf("  (all zero)\n");

    std::printf("\nRicci tensor (nonzero):\n");
    any = false;
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = i; j < d; ++j) {
            double v = F.ricci(i, j);
            if (std::abs(v) > eps) {
                any = true;
                std::printf("  Ric_{%s %s} = %.17g\n", index_name(chart, i).c_str(),
                            index_name(chart, j).c_str(), v);
            }
        }
    if (!any) std::printf("  (all zero)\n");
    return 0;
}

void run_list_families() {
    std::printf(
        "egorov         plane-fronted wave 2 du dv + f(u) sum_i dx_i^2\n"
        "               keys: n, f (expression in u), u_domain = lo, hi\n"
        "               candidates: particular [primitive], general (a, b, K,\n"
        "               c0, c, k, A.<row>), gradient, custom\n"
        "cahen_wallach  symmetric wave (sum_i k_i x_i^2) du^2 + 2 du dv + sum_i dx_i^2\n"
        "               keys: kappa = k1, ..., kn (nonzero), optional n\n"
        "               candidates: particular, general (a, b, c.<row>, d1, d2),\n"
        "               gradient (alpha, beta), custom\n"
        "epsilon        cahen_wallach with kappa_i = epsilon for every i\n"
        "               keys: n, epsilon (nonzero)\n"
        "               candidates: as cahen_wallach\n"
        "custom         explicit chart and metric components\n"
        "               keys: coords = name list, g.<i>.<j> (1-based, symmetric),\n"
        "               optional [params] section of named constants\n"
        "               candidates: custom only (X.<coord> fields or potential h)\n");
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"verification engine for Ricci soliton candidates"};
    app.require_subcommand(1);

    std::string verify_path, verify_format = "json", verify_out;
    long verify_samples = -1;
    long long verify_seed = -1;
    double verify_tol = 0.0;
    CLI::App* verify = app.add_subcommand("verify", "evaluate a scenario's checks");
    verify->add_option("scenario", verify_path, "scenario file")->required();
    verify->add_option("--samples", verify_samples, "override sample count");
    verify->add_option("--seed", verify_seed, "override sampler seed");
    verify->add_option("--tol", verify_tol, "override check tolerance");
    verify->add_option("--format", verify_format, "json or text")
        ->check(CLI::IsMember({"json", "text"}));
    verify->add_option("--out", verify_out, "write the report to a file");

    std::string curv_path, curv_at;
    CLI::App* curv = app.add_subcommand("curvature", "dump curvature at a point");
    curv->add_option("scenario", curv_path, "scenario file")->required();
    curv->add_option("--at", curv_at, "point as name=value pairs, comma separated")->required();

    CLI::App* fam = app.add_subcommand("list-families", "describe the built-in families");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (verify->parsed())
            return run_verify(verify_path, verify_samples, verify_seed, verify_tol, verify_format,
                              verify_out);
        if (curv->parsed()) return run_curvature(curv_path, curv_at);
        if (fam->parsed()) {
            run_list_families();
            return 0;
        }
    } catch (const ricci::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const ricci::ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const ricci::EvalError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 2;
}
