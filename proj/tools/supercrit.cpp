// supercrit: command-line front end.

#include <cstdio>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "supercrit/acceptance.hpp"
#include "supercrit/runner.hpp"

using namespace supercrit;
namespace fs = std::filesystem;

namespace {

std::vector<double> parse_list(const std::string& s) {
    std::vector<double> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            std::size_t used = 0;
            out.push_back(std::stod(item, &used));
            if (used != item.size()) throw std::invalid_argument(item);
        } catch (const std::exception&) {
            throw Error(ErrorKind::ConfigInvalid, "not a number: '" + item + "'");
        }
    }
    return out;
}

void emit(const json& j, const std::string& out) {
    if (out.empty() || out == "-") {
        std::cout << j.dump(2) << '\n';
        return;
    }
    write_json(out, j);
}

json constants_json(const SpectralConstants& sc) {
    json j = {{"dim", sc.dim()},
              {"exponent", sc.p()},
              {"fujita", sc.fujita.as_double()},
              {"sobolev", sc.sobolev.as_double()},
              {"joseph_lundgren", sc.joseph_lundgren.is_finite() ? json(sc.joseph_lundgren.value()) : json("inf")},
              {"jl_form_gap", sc.jl_form_gap},
              {"m", sc.m},
              {"critical", sc.critical},
              {"supercritical", sc.supercritical()}};
    if (sc.L) j["L"] = *sc.L;
    if (sc.roots) {
        j["lambda1"] = sc.roots->lambda1;
        j["lambda2"] = sc.roots->lambda2;
        j["repeated"] = sc.roots->repeated;
    }
    return j;
}

void cmd_constants(int dim, double p, const std::string& table, const std::string& out) {
    if (table.empty()) {
        emit(constants_json(SpectralConstants::compute({dim, p})), out);
        return;
    }
    const auto dots = table.find("..");
    if (dots == std::string::npos) throw Error(ErrorKind::ConfigInvalid, "--table expects N_MIN..N_MAX");
    ExperimentConfig c;
    c.kind = ExperimentKind::ConstantsTable;
    c.name = "constants";
    c.table_n_min = std::stoi(table.substr(0, dots));
    c.table_n_max = std::stoi(table.substr(dots + 2));
    json src = {{"experiment", "constants-table"},
                {"name", "constants"},
                {"constants_table", {{"n_min", c.table_n_min}, {"n_max", c.table_n_max}}}};
    c = parse_experiment(src);
    const auto m = run(c, out.empty() ? fs::path(".") : fs::path(out));
    std::cout << m.to_json().dump(2) << '\n';
    if (!m.passed()) throw Error(ErrorKind::NotConverged, "identity checks failed");
}

void cmd_steady(int dim, double p, double alpha, double rmax, const std::string& out) {
    GridSpec spec;
    spec.r_max = rmax;
    const GridPtr grid = make_grid(spec);
    const auto base = solve_ground_profile({dim, p}, grid);
    const RadialProfile phi = alpha == 1.0 ? base.phi : scale_family(base, alpha, grid);
    CsvWriter w(out, {"r", "phi"});
    for (std::size_t i = 0; i < phi.size(); ++i) w.row({phi.r(i), phi[i]});
    std::cout << json{{"a", base.tail->coefficient},
                      {"window", {base.tail->window.r_lo, base.tail->window.r_hi}},
                      {"ode_residual", base.ode_residual},
                      {"nodes", grid->size()}}
                     .dump()
              << '\n';
}

void cmd_linearize(int dim, double p, const std::string& which, double rmax, const std::string& out) {
    GridSpec spec;
    spec.r_max = rmax;
    const GridPtr grid = make_grid(spec);
    const auto sc = SpectralConstants::compute({dim, p});
    KernelElement z;
    if (which == "Z") z = kernel_from_steady(solve_ground_profile({dim, p}, grid));
    else if (which == "Zinf") z = singular_kernel(sc, grid, SingularWhich::First);
    else if (which == "Zinf2") z = singular_kernel(sc, grid, SingularWhich::Second);
    else throw Error(ErrorKind::ConfigInvalid, "--which must be Z, Zinf or Zinf2");
    CsvWriter w(out, {"r", z.profile.label()});
    for (std::size_t i = 0; i < z.size(); ++i) w.row({z.profile.r(i), z[i]});
}

int report(const std::vector<RunManifest>& ms) {
    bool ok = true;
    for (const auto& m : ms) {
        const std::string name = m.config.value("name", "experiment");
        std::printf("%s  %s  (%.2fs)\n", m.passed() ? "PASS" : "FAIL", name.c_str(), m.duration_seconds);
        for (const auto& c : m.checks)
            std::printf("      %-4s %s = %s\n", c.passed ? "ok" : "FAIL", c.name.c_str(), c.detail.c_str());
        if (!m.error.empty()) std::printf("      error: %s\n", m.error.c_str());
        ok = ok && m.passed();
    }
    return ok ? 0 : 1;
}

int cmd_run(const std::string& config, const std::string& out_dir, unsigned threads) {
    const auto configs = parse_config_document(load_json_file(config));
    const fs::path root = out_dir.empty() ? fs::path(configs.front().output_dir) : fs::path(out_dir);
    return report(run_batch(configs, root, threads));
}

int cmd_interp(int dim, const std::string& radii, int random_count, const std::string& out) {
    const auto s = interp_sweep(dim, parse_list(radii), random_count);
    emit(detail::interp_json(s), out);
    std::fprintf(stderr, "uniform C(%d) = %.17g over %zu cases\n", dim, s.constant, s.results.size());
    return 0;
}

int cmd_blowdown(int dim, double p, const std::string& in, const std::string& scales, const std::string& out) {
    const auto sc = SpectralConstants::compute({dim, p});
    const RadialProfile u = read_profile_csv(in);
    const GridPtr target = make_annulus_grid(0.5, 2.0, 400);
    CsvWriter w(out, {"R", "annulus_error", "ratio"});
    double prev = std::nan("");
    for (double R : parse_list(scales)) {
        const double err = annulus_error(rescale(u, R, sc, target), sc);
        w.row({R, err, err / prev});
        prev = err;
    }
    std::printf("limit: %s\n", to_string(classify_limit(u, sc)).c_str());
    return 0;
}

int cmd_sphere(int dim, double p, const std::string& preset, double amplitude) {
    const auto sc = SpectralConstants::compute({dim, p});
    SphereProfile f;
    if (preset == "cos") f = SphereProfile::cosine(sc, amplitude);
    else if (preset == "const") f = SphereProfile::constant(sc, amplitude * sc.amplitude());
    else throw Error(ErrorKind::ConfigInvalid, "--preset must be cos or const");
    std::printf("%s\n", format_double(sphere_identity(f)).c_str());
    return 0;
}

int cmd_verify(const std::string& filter, bool perturb) {
    acceptance::Options opt;
    if (perturb) opt.perturb_constant = 1e-3;
    const auto results = acceptance::run_acceptance(filter, opt);
    int failed = 0;
    for (const auto& r : results) failed += r.passed() ? 0 : 1;
    std::printf("%zu criteria, %d failed\n", results.size(), failed);
    if (results.empty()) std::fprintf(stderr, "no criterion matches filter '%s'\n", filter.c_str());
    return failed == 0 && !results.empty() ? 0 : 1;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Numerical experiments for supercritical radial heat flow"};
    app.set_version_flag("--version", std::string(kVersion));
    app.require_subcommand(1);

    int dim = 13;
    double p = 3.0, alpha = 1.0, rmax = 1e4, amplitude = 0.5;
    std::string out, table, which = "Z", config, out_dir, radii = "1,2,4,8", in, scales = "2,4,8,16",
                                 preset = "cos", filter;
    int random_count = 20;
    unsigned threads = default_threads();
    bool perturb = false;

    auto add_params = [&](CLI::App* sub) {
        sub->add_option("--dim", dim, "space dimension N")->check(CLI::Range(3, 100000));
        sub->add_option("--exponent", p, "nonlinearity exponent p");
    };

    auto* constants = app.add_subcommand("constants", "critical exponents and spectral constants");
    add_params(constants);
    constants->add_option("--table", table, "N_MIN..N_MAX: write constants.csv for p = p_c(N) + 1");
    constants->add_option("--out", out, "output file (JSON) or directory (--table)");

    auto* steady = app.add_subcommand("steady", "ground state profile");
    add_params(steady);
    steady->add_option("--alpha", alpha, "family member phi_alpha");
    steady->add_option("--rmax", rmax, "outer radius");
    steady->add_option("--out", out, "profile CSV")->required();

    auto* linearize = app.add_subcommand("linearize", "kernel elements");
    add_params(linearize);
    linearize->add_option("--which", which, "Z | Zinf | Zinf2");
    linearize->add_option("--rmax", rmax, "outer radius");
    linearize->add_option("--out", out, "kernel CSV")->required();

    auto* evolve = app.add_subcommand("evolve", "quasiconvergence / Liouville-diagnostics runs from a config");
    evolve->add_option("--config", config, "experiment JSON, batch JSON or manifest")->required()->check(CLI::ExistingFile);
    evolve->add_option("--out-dir", out_dir, "output root (default: config output_dir)");
    evolve->add_option("--threads", threads, "concurrent experiments (default from SUPERCRIT_THREADS)");

    auto* runcmd = app.add_subcommand("run", "any experiment kind from a config");
    runcmd->add_option("--config", config, "experiment JSON, batch JSON or manifest")->required()->check(CLI::ExistingFile);
    runcmd->add_option("--out-dir", out_dir, "output root (default: config output_dir)");
    runcmd->add_option("--threads", threads, "concurrent experiments (default from SUPERCRIT_THREADS)");

    auto* diag = app.add_subcommand("diag", "diagnostics");
    diag->require_subcommand(1);
    auto* interp = diag->add_subcommand("interp", "interpolation inequality over the manufactured family");
    interp->add_option("--dim", dim, "space dimension N")->check(CLI::Range(1, 100000));
    interp->add_option("--radii", radii, "comma-separated cylinder radii");
    interp->add_option("--random", random_count, "random polynomial cases per radius");
    interp->add_option("--out", out, "JSON output (default stdout)");

    auto* blowdown = app.add_subcommand("blowdown", "blow-down rescaling of a profile CSV");
    add_params(blowdown);
    blowdown->add_option("--in", in, "profile CSV (r, u)");
    blowdown->add_option("--scales", scales, "comma-separated R values");
    blowdown->add_option("--out", out, "CSV output");
    auto* sphere = blowdown->add_subcommand("sphere-identity", "evaluate the sphere identity");
    add_params(sphere);
    sphere->add_option("--preset", preset, "cos | const");
    sphere->add_option("--amplitude", amplitude, "amplitude in units of L");

    auto* verify = app.add_subcommand("verify", "run the acceptance suite");
    verify->add_option("--filter", filter, "criterion id or module name");
    verify->add_flag("--perturb-constant", perturb, "negative control: perturb L by 1e-3 in the identity checks");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*constants) cmd_constants(dim, p, table, out);
        else if (*steady) cmd_steady(dim, p, alpha, rmax, out);
        else if (*linearize) cmd_linearize(dim, p, which, rmax, out);
        else if (*evolve || *runcmd) return cmd_run(config, out_dir, threads);
        else if (*interp) return cmd_interp(dim, radii, random_count, out);
        else if (*sphere) return cmd_sphere(dim, p, preset, amplitude);
        else if (*blowdown) {
            if (in.empty() || out.empty()) throw Error(ErrorKind::ConfigInvalid, "blowdown needs --in and --out");
            return cmd_blowdown(dim, p, in, scales, out);
        } else if (*verify) return cmd_verify(filter, perturb);
    } catch (const Error& e) {
        std::fprintf(stderr, "error [%s]: %s\n", std::string(to_string(e.kind())).c_str(), e.what());
        return 2;
    }
    return 0;
}
