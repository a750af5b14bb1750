#pragma once

// Experiment configs (JSON), CSV/JSON output, run manifests, batches.

#include <atomic>
#include <charconv>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <future>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "json.hpp"
#include "supercrit/blowdown.hpp"
#include "supercrit/evolve.hpp"

namespace supercrit {

#ifndef SUPERCRIT_VERSION
#define SUPERCRIT_VERSION "0.0.0"
#endif

inline constexpr const char* kVersion = SUPERCRIT_VERSION;

using nlohmann::json;

// ---------------------------------------------------------------------------
// CSV

/// Shortest decimal that round-trips to the same double; "inf"/"-inf"/"nan" otherwise.
inline std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

class CsvWriter {
public:
    CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header) : path_(path), out_(path) {
        if (!out_) throw Error(ErrorKind::IoError, "cannot open " + path.string() + " for writing");
        row_strings(header);
    }

    void row(const std::vector<double>& values) {
        std::vector<std::string> s;
        s.reserve(values.size());
        for (double v : values) s.push_back(format_double(v));
        row_strings(s);
    }

    void row_strings(const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) out_ << (i ? "," : "") << cells[i];
        out_ << '\n';
        if (!out_) throw Error(ErrorKind::IoError, "write failed: " + path_.string());
    }

private:
    std::filesystem::path path_;
    std::ofstream out_;
};

/// Reads the first two columns (r, value) of a CSV written by this tool.
inline RadialProfile read_profile_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::IoError, "cannot read " + path.string());
    std::vector<double> r, v;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string a, b;
        std::getline(ss, a, ',');
        std::getline(ss, b, ',');
        double x = 0, y = 0;
        const auto ra = std::from_chars(a.data(), a.data() + a.size(), x);
        const auto rb = std::from_chars(b.data(), b.data() + b.size(), y);
        if (ra.ec != std::errc{} || rb.ec != std::errc{}) {
            if (lineno == 1) continue;  // header
            throw Error(ErrorKind::IoError, path.string() + ":" + std::to_string(lineno) + ": not numeric");
        }
        r.push_back(x);
        v.push_back(y);
    }
    auto grid = std::make_shared<const RadialGrid>(std::move(r), GridSpec{});
    return RadialProfile(grid, std::move(v), path.stem().string());
}

inline void write_json(const std::filesystem::path& path, const json& j) {
    std::ofstream out(path);
    if (!out) throw Error(ErrorKind::IoError, "cannot open " + path.string() + " for writing");
    out << j.dump(2) << '\n';
}

// ---------------------------------------------------------------------------
// Config

enum class ExperimentKind { ConstantsTable, Steady, Quasiconvergence, LiouvilleDiagnostics, Blowdown, Interp };

inline std::string to_string(ExperimentKind k) {
    switch (k) {
    case ExperimentKind::ConstantsTable: return "constants-table";
    case ExperimentKind::Steady: return "steady";
    case ExperimentKind::Quasiconvergence: return "quasiconvergence";
    case ExperimentKind::LiouvilleDiagnostics: return "liouville-diagnostics";
    case ExperimentKind::Blowdown: return "blowdown";
    case ExperimentKind::Interp: return "interp";
    }
    return "?";
}

struct EvolutionSettings {
    Scheme scheme = Scheme::ImplicitEuler;
    double dt = 1e-3;
    double dt_control = 1e-6;
    double t_max = 1e12;
    double convergence_eps = 1e-6;
    int store_every = 200;
    std::string far_field = "profile";  // "profile" | "asymptotic"
};

struct ExperimentConfig {
    std::string name = "experiment";
    ExperimentKind kind = ExperimentKind::Steady;
    ProblemParams params;
    GridSpec grid;
    EvolutionSettings evolution;
    InitialSpec initial = BlendPreset{};
    double bracket_alpha = 1.0;
    double bracket_beta = 2.0;
    int table_n_min = 11;
    int table_n_max = 20;
    double table_p_shift = 1.0;  // p = p_c(N) + shift
    std::vector<double> scales = {2, 4, 8, 16};
    std::vector<double> radii = {1, 2, 4, 8};
    int random_count = 20;
    std::string output_dir = "results";
    json source;  // the parsed document, echoed into the manifest
};

namespace detail {

class Reader {
public:
    Reader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) fail("", "must be an object");
    }

    [[noreturn]] void fail(const std::string& key, const std::string& msg) const {
        throw Error(ErrorKind::ConfigInvalid, field(key) + ": " + msg);
    }
    std::string field(const std::string& key) const {
        if (key.empty()) return path_.empty() ? "<root>" : path_;
        return path_.empty() ? key : path_ + "." + key;
    }
    bool has(const std::string& key) const { return j_.contains(key); }

    template <class T>
    T get(const std::string& key, T fallback) const {
        if (!j_.contains(key)) return fallback;
        try {
            return j_.at(key).get<T>();
        } catch (const json::exception&) {
            fail(key, "wrong type");
        }
    }
    double number(const std::string& key, double fallback) const {
        if (!j_.contains(key)) return fallback;
        if (!j_.at(key).is_number()) fail(key, "must be a number");
        return j_.at(key).get<double>();
    }
    int integer(const std::string& key, int fallback) const {
        if (!j_.contains(key)) return fallback;
        if (!j_.at(key).is_number_integer()) fail(key, "must be an integer");
        return j_.at(key).get<int>();
    }
    Reader child(const std::string& key) const { return Reader(j_.at(key), field(key)); }
    const json& raw() const { return j_; }

private:
    const json& j_;
    std::string path_;
};

inline void check(bool ok, const Reader& r, const std::string& key, const std::string& msg) {
    if (!ok) r.fail(key, msg);
}

} // namespace detail

inline ExperimentConfig parse_experiment(const json& j, const std::string& path = "") {
    using detail::check;
    const detail::Reader root(j, path);
    ExperimentConfig c;
    c.source = j;
    c.name = root.get<std::string>("name", c.name);
    check(!c.name.empty() && c.name.find_first_of("/\\") == std::string::npos, root, "name",
          "must be a non-empty plain directory name");

    const std::string kind = root.get<std::string>("experiment", "");
    if (kind == "constants-table") c.kind = ExperimentKind::ConstantsTable;
    else if (kind == "steady") c.kind = ExperimentKind::Steady;
    else if (kind == "quasiconvergence") c.kind = ExperimentKind::Quasiconvergence;
    else if (kind == "liouville-diagnostics") c.kind = ExperimentKind::LiouvilleDiagnostics;
    else if (kind == "blowdown") c.kind = ExperimentKind::Blowdown;
    else if (kind == "interp") c.kind = ExperimentKind::Interp;
    else root.fail("experiment", "unknown experiment '" + kind + "'");

    if (root.has("params")) {
        const auto p = root.child("params");
        c.params.dim = p.integer("dim", c.params.dim);
        c.params.exponent = p.number("exponent", c.params.exponent);
        check(c.params.dim >= 3, p, "dim", "must be >= 3");
        check(std::isfinite(c.params.exponent) && c.params.exponent > 1.0, p, "exponent", "must be > 1");
    }
    if (root.has("grid")) {
        const auto g = root.child("grid");
        c.grid.core_radius = g.number("core_radius", c.grid.core_radius);
        c.grid.core_cells = g.integer("core_cells", c.grid.core_cells);
        c.grid.r_max = g.number("r_max", c.grid.r_max);
        check(c.grid.core_radius > 0, g, "core_radius", "must be > 0");
        check(c.grid.core_cells >= 4, g, "core_cells", "must be >= 4");
        check(c.grid.r_max > c.grid.core_radius, g, "r_max", "must exceed core_radius");
    }
    if (root.has("evolution")) {
        const auto e = root.child("evolution");
        auto& s = c.evolution;
        const std::string scheme = e.get<std::string>("scheme", "implicit_euler");
        if (scheme == "implicit_euler") s.scheme = Scheme::ImplicitEuler;
        else if (scheme == "crank_nicolson") s.scheme = Scheme::CrankNicolson;
        else e.fail("scheme", "must be implicit_euler or crank_nicolson");
        s.dt = e.number("dt", s.dt);
        s.dt_control = e.number("dt_control", s.dt_control);
        s.t_max = e.number("t_max", s.t_max);
        s.convergence_eps = e.number("convergence_eps", s.convergence_eps);
        s.store_every = e.integer("store_every", s.store_every);
        s.far_field = e.get<std::string>("far_field", s.far_field);
        check(s.dt > 0, e, "dt", "must be > 0");
        check(s.dt_control >= 0, e, "dt_control", "must be >= 0");
        check(s.t_max > 0, e, "t_max", "must be > 0");
        check(s.convergence_eps >= 0, e, "convergence_eps", "must be >= 0");
        check(s.store_every >= 1, e, "store_every", "must be >= 1");
        check(s.far_field == "profile" || s.far_field == "asymptotic", e, "far_field",
              "must be profile or asymptotic");
    }
    if (root.has("bracket")) {
        const auto b = root.child("bracket");
        c.bracket_alpha = b.number("alpha", c.bracket_alpha);
        c.bracket_beta = b.number("beta", c.bracket_beta);
        check(c.bracket_alpha > 0, b, "alpha", "must be > 0");
        check(c.bracket_beta > c.bracket_alpha && std::isfinite(c.bracket_beta), b, "beta",
              "must be finite and > alpha");
    }
    if (root.has("initial")) {
        const auto u = root.child("initial");
        const std::string preset = u.get<std::string>("preset", "");
        if (preset == "steady") {
            c.initial = SteadyPreset{u.number("alpha", 1.0)};
        } else if (preset == "blend") {
            c.initial = BlendPreset{u.number("alpha", c.bracket_alpha), u.number("beta", c.bracket_beta),
                                    u.number("weight", 0.5)};
            const double w = std::get<BlendPreset>(c.initial).weight;
            check(w >= 0 && w <= 1, u, "weight", "must be in [0,1]");
        } else if (preset == "bump") {
            BumpPreset b{u.number("alpha", c.bracket_alpha), u.number("center", 2.0), u.number("width", 1.0),
                         u.number("height", 0.1), std::nullopt};
            if (u.has("cap")) b.cap = u.number("cap", c.bracket_beta);
            check(b.width > 0, u, "width", "must be > 0");
            c.initial = b;
        } else {
            u.fail("preset", "must be steady, blend or bump");
        }
    } else {
        c.initial = BlendPreset{c.bracket_alpha, c.bracket_beta, 0.5};
    }
    if (root.has("constants_table")) {
        const auto t = root.child("constants_table");
        c.table_n_min = t.integer("n_min", c.table_n_min);
        c.table_n_max = t.integer("n_max", c.table_n_max);
        c.table_p_shift = t.number("p_shift", c.table_p_shift);
        check(c.table_n_min >= 11, t, "n_min", "must be >= 11 (p_c finite)");
        check(c.table_n_max >= c.table_n_min, t, "n_max", "must be >= n_min");
        check(c.table_p_shift >= 0, t, "p_shift", "must be >= 0");
    }
    if (root.has("blowdown")) {
        const auto b = root.child("blowdown");
        c.scales = b.get<std::vector<double>>("scales", c.scales);
        for (double s : c.scales) check(s > 0, b, "scales", "entries must be > 0");
    }
    if (root.has("interp")) {
        const auto i = root.child("interp");
        c.radii = i.get<std::vector<double>>("radii", c.radii);
        c.random_count = i.integer("random_count", c.random_count);
        for (double r : c.radii) check(r > 0, i, "radii", "entries must be > 0");
        check(c.random_count >= 0, i, "random_count", "must be >= 0");
    }
    c.output_dir = root.get<std::string>("output_dir", c.output_dir);

    // module preconditions that depend on several fields
    const bool needs_supercritical = c.kind == ExperimentKind::Steady || c.kind == ExperimentKind::Quasiconvergence ||
                                     c.kind == ExperimentKind::LiouvilleDiagnostics ||
                                     c.kind == ExperimentKind::Blowdown;
    if (needs_supercritical) {
        const auto sc = SpectralConstants::compute(c.params);
        if (!sc.supercritical())
            throw Error(ErrorKind::ConfigInvalid, detail::Reader(j, path).field("params.exponent") +
                                                      ": must be >= p_c(N)=" + sc.joseph_lundgren.to_string());
    }
    return c;
}

/// A batch is {"experiments": [...]}; a manifest is recognized by its embedded "config".
inline std::vector<ExperimentConfig> parse_config_document(const json& j) {
    if (j.is_object() && j.contains("config") && j.contains("artifact_version")) return parse_config_document(j.at("config"));
    if (j.is_object() && j.contains("experiments")) {
        if (!j.at("experiments").is_array()) throw Error(ErrorKind::ConfigInvalid, "experiments: must be an array");
        std::vector<ExperimentConfig> out;
        for (std::size_t k = 0; k < j.at("experiments").size(); ++k)
            out.push_back(parse_experiment(j.at("experiments")[k], "experiments[" + std::to_string(k) + "]"));
        return out;
    }
    return {parse_experiment(j)};
}

inline json load_json_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::IoError, "cannot read " + path.string());
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw Error(ErrorKind::ConfigInvalid, path.string() + ": " + e.what());
    }
}

// ---------------------------------------------------------------------------
// Runs

struct CheckResult {
    std::string name;
    bool passed = false;
    std::string detail;
};

struct RunManifest {
    json config;
    std::string version = kVersion;
    double duration_seconds = 0.0;
    std::vector<CheckResult> checks;
    std::string error;

    bool passed() const {
        if (!error.empty()) return false;
        for (const auto& c : checks)
            if (!c.passed) return false;
        return true;
    }

    json to_json() const {
        json j;
        j["artifact_version"] = version;
        j["config"] = config;
        j["duration_seconds"] = duration_seconds;
        j["passed"] = passed();
        json checks_j = json::array();
        for (const auto& c : checks) checks_j.push_back({{"name", c.name}, {"passed", c.passed}, {"detail", c.detail}});
        j["checks"] = checks_j;
        if (!error.empty()) j["error"] = error;
        return j;
    }
};

namespace detail {

inline void add_check(RunManifest& m, std::string name, bool ok, double value) {
    m.checks.push_back({std::move(name), ok, format_double(value)});
}

inline void write_profile(const std::filesystem::path& path, const std::vector<std::pair<std::string, const RadialProfile*>>& cols) {
    std::vector<std::string> header{"r"};
    for (const auto& c : cols) header.push_back(c.first);
    CsvWriter w(path, header);
    const RadialProfile& first = *cols.front().second;
    for (std::size_t i = 0; i < first.size(); ++i) {
        std::vector<double> row{first.r(i)};
        for (const auto& c : cols) row.push_back((*c.second)[i]);
        w.row(row);
    }
}

inline void run_constants_table(const ExperimentConfig& c, const std::filesystem::path& dir, RunManifest& m) {
    CsvWriter w(dir / "constants.csv", {"dim", "exponent", "fujita", "sobolev", "joseph_lundgren", "jl_form_gap", "m",
                                        "L", "lambda1", "lambda2", "vieta_sum_error", "vieta_product_error",
                                        "indicial_residual_1", "indicial_residual_2"});
    double gap = 0, vieta = 0, indicial = 0, lmin = 1e300;
    for (int n = c.table_n_min; n <= c.table_n_max; ++n) {
        const auto ce = critical_exponents(n);
        const auto sc = SpectralConstants::compute({n, ce.joseph_lundgren.value() + c.table_p_shift});
        const auto& r = sc.lambdas();
        const double vs = std::abs(r.lambda1 + r.lambda2 - (n - 2 - 2 * sc.m));
        const double vp = std::abs(r.lambda1 * r.lambda2 - 2 * (n - 2 - sc.m));
        const double i1 = std::abs(indicial_residual(sc, sc.m + r.lambda1));
        const double i2 = std::abs(indicial_residual(sc, sc.m + r.lambda2));
        w.row({double(n), sc.p(), ce.fujita.as_double(), ce.sobolev.as_double(), ce.joseph_lundgren.as_double(),
               ce.jl_form_gap, sc.m, sc.amplitude(), r.lambda1, r.lambda2, vs, vp, i1, i2});
        gap = std::max(gap, ce.jl_form_gap);
        vieta = std::max({vieta, vs, vp});
        indicial = std::max({indicial, i1, i2});
        lmin = std::min(lmin, r.lambda1);
    }
    add_check(m, "pc closed forms agree (<1e-10)", gap < 1e-10, gap);
    add_check(m, "Vieta relations (<1e-10)", vieta < 1e-10, vieta);
    add_check(m, "indicial residual (<1e-9)", indicial < 1e-9, indicial);
    add_check(m, "lambda1 > 2", lmin > 2.0, lmin);
}

inline void run_steady(const ExperimentConfig& c, const std::filesystem::path& dir, RunManifest& m) {
    const auto sol = solve_ground_profile(c.params, make_grid(c.grid));
    const auto z = kernel_from_steady(sol);
    write_profile(dir / "profile.csv", {{"phi", &sol.phi}, {"dphi", &sol.dphi}, {"Z", &z.profile}});
    bool positive = true, decreasing = true;
    for (std::size_t i = 0; i < sol.phi.size(); ++i) {
        positive = positive && sol.phi[i] > 0;
        if (i) decreasing = decreasing && sol.phi[i] < sol.phi[i - 1];
    }
    json fit = {{"a", sol.tail->coefficient},
                {"logarithmic", sol.tail->logarithmic},
                {"window", {sol.tail->window.r_lo, sol.tail->window.r_hi}},
                {"fit_residual", sol.tail->residual},
                {"ode_residual", sol.ode_residual}};
    write_json(dir / "fit.json", fit);
    add_check(m, "Phi > 0", positive, sol.phi[sol.phi.size() - 1]);
    add_check(m, "Phi strictly decreasing", decreasing, 0.0);
    add_check(m, "fitted a < 0", sol.tail->coefficient < 0, sol.tail->coefficient);
}

inline void run_evolution(const ExperimentConfig& c, const std::filesystem::path& dir, RunManifest& m, bool liouville) {
    const GridPtr grid = make_grid(c.grid);
    const auto base = solve_ground_profile(c.params, grid);
    EvolutionConfig cfg;
    cfg.constants = base.constants;
    cfg.grid = grid;
    cfg.scheme = c.evolution.scheme;
    cfg.dt = c.evolution.dt;
    cfg.dt_control = c.evolution.dt_control;
    cfg.t_max = c.evolution.t_max;
    cfg.convergence_eps = c.evolution.convergence_eps;
    cfg.store_every = c.evolution.store_every;
    if (c.evolution.far_field == "asymptotic") {
        const auto& sc = base.constants;
        cfg.far_field = PinToAsymptotic{sc.amplitude(), sc.m, base.tail->coefficient, sc.lambda1()};
    }
    const auto q = quasiconvergence_experiment(c.bracket_alpha, c.bracket_beta, c.initial, cfg, base);
    const auto& d = q.trajectory.diagnostics;
    {
        CsvWriter w(dir / "diagnostics.csv", {"step", "t", "dt", "residual", "gamma_est", "weighted_decay",
                                              "sweep_plus", "sweep_minus", "ordering_ok", "newton_iterations"});
        for (const auto& r : d)
            w.row({double(r.step), r.t, r.dt, r.residual, r.gamma_est, r.weighted_decay, r.sweep_plus, r.sweep_minus,
                   r.ordering_ok ? double(*r.ordering_ok) : std::nan(""), double(r.newton_iterations)});
    }
    std::filesystem::create_directories(dir / "profiles");
    for (std::size_t k = 0; k < q.trajectory.states.size(); ++k) {
        const auto& s = q.trajectory.states[k];
        char name[32];
        std::snprintf(name, sizeof name, "state_%05zu.csv", k);
        CsvWriter w(dir / "profiles" / name, {"r", "u", "u_t", "t"});
        for (std::size_t i = 0; i < s.u.size(); ++i) w.row({s.u.r(i), s.u[i], s.u_t[i], s.t});
    }
    write_json(dir / "summary.json", {{"gamma_est", q.gamma_est},
                                      {"match_error", q.match_error},
                                      {"final_residual", q.final_residual},
                                      {"final_time", d.back().t},
                                      {"steps", d.size() - 1}});
    add_check(m, "converged (steady residual < convergence_eps)", q.trajectory.converged, q.final_residual);
    add_check(m, "gamma_est in [alpha, beta]", q.gamma_in_bracket, q.gamma_est);
    add_check(m, "match error < 1e-3", q.match_error < 1e-3, q.match_error);
    add_check(m, "ordering flags true at every step", q.ordering_ok, 0.0);
    if (liouville) {
        constexpr double slack = 1e-8;
        double w_inc = -1e300, sp = -1e300, sm = -1e300;
        for (std::size_t k = 1; k < d.size(); ++k) {
            if (k > d.size() / 10) w_inc = std::max(w_inc, d[k].weighted_decay - d[k - 1].weighted_decay);
            sp = std::max(sp, d[k].sweep_plus - d[k - 1].sweep_plus);
            sm = std::max(sm, d[k].sweep_minus - d[k - 1].sweep_minus);
        }
        add_check(m, "weighted_sup non-increasing after 10% of steps", w_inc <= slack, w_inc);
        add_check(m, "lambda_plus non-increasing", sp <= slack, sp);
        add_check(m, "lambda_minus non-increasing", sm <= slack, sm);
    }
}

inline void run_blowdown(const ExperimentConfig& c, const std::filesystem::path& dir, RunManifest& m) {
    const auto sol = solve_ground_profile(c.params, make_grid(c.grid));
    const auto& sc = sol.constants;
    const GridPtr target = make_annulus_grid(0.5, 2.0, 400);
    CsvWriter w(dir / "blowdown.csv", {"R", "annulus_error", "ratio", "expected_ratio"});
    double prev = std::nan("");
    for (double R : c.scales) {
        const double err = annulus_error(rescale(sol.phi, R, sc, target), sc);
        w.row({R, err, err / prev, std::pow(2.0, -sc.lambda1())});
        prev = err;
    }
    const auto cls = classify_limit(sol.phi, sc);
    add_check(m, "classify_limit(Phi) = plus_L", cls == LimitClass::PlusL, 0.0);
    CsvWriter s(dir / "sphere.csv", {"profile", "value"});
    const double L = sc.amplitude();
    const double zero_cases = std::max({std::abs(sphere_identity(SphereProfile::constant(sc, L))),
                                        std::abs(sphere_identity(SphereProfile::constant(sc, -L))),
                                        std::abs(sphere_identity(SphereProfile::constant(sc, 0.0)))});
    const double cos_half = sphere_identity(SphereProfile::cosine(sc, 0.5));
    s.row_strings({"constants_max_abs", format_double(zero_cases)});
    s.row_strings({"half_L_cos", format_double(cos_half)});
    add_check(m, "sphere identity vanishes on constants", zero_cases < 1e-10, zero_cases);
    add_check(m, "sphere identity positive on (L/2) cos", cos_half > 0, cos_half);
}

inline json interp_json(const InterpSummary& s) {
    json rows = json::array();
    for (const auto& r : s.results)
        rows.push_back({{"name", r.name},
                        {"R", r.radius},
                        {"lhs", r.lhs},
                        {"f_sup", r.f_sup},
                        {"psi_sup", r.psi_sup},
                        {"rhs_f", r.rhs_f},
                        {"rhs_psi", r.rhs_psi},
                        {"fitted_C", r.fitted_C}});
    return {{"dim", s.dim}, {"constant", s.constant}, {"cases", rows}};
}

inline void run_interp(const ExperimentConfig& c, const std::filesystem::path& dir, RunManifest& m) {
    const auto s = interp_sweep(c.params.dim, c.radii, c.random_count);
    write_json(dir / "interp.json", interp_json(s));
    add_check(m, "uniform constant finite", std::isfinite(s.constant), s.constant);
}

} // namespace detail

/// Runs one experiment into <out_root>/<name>/ and writes manifest.json there.
inline RunManifest run(const ExperimentConfig& c, const std::filesystem::path& out_root) {
    const auto t0 = std::chrono::steady_clock::now();
    RunManifest m;
    m.config = c.source;
    const auto dir = out_root / c.name;
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw Error(ErrorKind::IoError, "cannot create " + dir.string() + ": " + ec.message());
    try {
        switch (c.kind) {
        case ExperimentKind::ConstantsTable: detail::run_constants_table(c, dir, m); break;
        case ExperimentKind::Steady: detail::run_steady(c, dir, m); break;
        case ExperimentKind::Quasiconvergence: detail::run_evolution(c, dir, m, false); break;
        case ExperimentKind::LiouvilleDiagnostics: detail::run_evolution(c, dir, m, true); break;
        case ExperimentKind::Blowdown: detail::run_blowdown(c, dir, m); break;
        case ExperimentKind::Interp: detail::run_interp(c, dir, m); break;
        }
    } catch (const Error& e) {
        m.error = std::string(to_string(e.kind())) + ": " + e.what() + " (experiment '" + c.name + "')";
    } catch (const std::exception& e) {
        m.error = std::string(e.what()) + " (experiment '" + c.name + "')";
    }
    m.duration_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    write_json(dir / "manifest.json", m.to_json());
    return m;
}

inline constexpr const char* kThreadsEnv = "SUPERCRIT_THREADS";

inline unsigned default_threads() {
    if (const char* env = std::getenv(kThreadsEnv)) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end != env && *end == '\0' && v > 0) return static_cast<unsigned>(v);
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

/// Runs a batch with at most `threads` experiments in flight; results keep input order.
inline std::vector<RunManifest> run_batch(const std::vector<ExperimentConfig>& configs,
                                          const std::filesystem::path& out_root, unsigned threads = default_threads()) {
    for (std::size_t a = 0; a < configs.size(); ++a)
        for (std::size_t b = a + 1; b < configs.size(); ++b)
            if (configs[a].name == configs[b].name)
                throw Error(ErrorKind::ConfigInvalid, "experiments[" + std::to_string(b) + "].name: duplicate '" +
                                                          configs[b].name + "'");
    std::vector<RunManifest> out(configs.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t k = next++; k < configs.size(); k = next++) out[k] = run(configs[k], out_root);
    };
    std::vector<std::thread> pool;
    const unsigned n = std::min<unsigned>(std::max(1u, threads), static_cast<unsigned>(configs.size()));
    for (unsigned t = 0; t < n; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    return out;
}

} // namespace supercrit
