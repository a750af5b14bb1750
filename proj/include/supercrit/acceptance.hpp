#pragma once

// Acceptance criteria as runnable checks. Each criterion returns its
// measurements; `run_acceptance` prints one line per criterion followed by
// the individual measurements.

#include <chrono>
#include <cstdio>
#include <functional>
#include <future>
#include <optional>
#include <string>
#include <vector>

#include "supercrit/blowdown.hpp"
#include "supercrit/evolve.hpp"

namespace supercrit::acceptance {

struct Measurement {
    std::string label;
    double value = 0.0;
    double threshold = 0.0;
    std::string relation;  // "<", ">", "==", "in"
    bool ok = false;
};

struct CriterionResult {
    int id = 0;
    std::string name;
    std::vector<Measurement> measurements;
    double seconds = 0.0;
    std::string error;

    bool passed() const {
        if (!error.empty()) return false;
        for (const auto& m : measurements)
            if (!m.ok) return false;
        return true;
    }
};

struct Options {
    /// Relative perturbation applied to L inside the indicial-residual check (negative control).
    double perturb_constant = 0.0;
};

inline Measurement below(std::string label, double v, double limit) {
    return {std::move(label), v, limit, "<", v < limit};
}
inline Measurement above(std::string label, double v, double limit) {
    return {std::move(label), v, limit, ">", v > limit};
}
inline Measurement flag(std::string label, bool ok) { return {std::move(label), ok ? 1.0 : 0.0, 1.0, "==", ok}; }

// ---------------------------------------------------------------------------

inline CriterionResult exponent_identities(const Options& opt) {
    CriterionResult res{1, "constants: exponent identities", {}, 0.0, {}};
    double gap = 0, vieta = 0, indicial = 0, lambda_min = 1e300;
    for (int n = 11; n <= 100; ++n) {
        const double pc = critical_exponents(n).joseph_lundgren.value();
        gap = std::max(gap, critical_exponents(n).jl_form_gap);
        for (double f : {0.0, 0.05, 0.25, 1.0, 4.0}) {
            const auto sc = SpectralConstants::compute({n, pc * (1 + f)});
            const auto& r = sc.lambdas();
            const double m = sc.m;
            vieta = std::max({vieta, std::abs(r.lambda1 + r.lambda2 - (n - 2 - 2 * m)),
                              std::abs(r.lambda1 * r.lambda2 - 2 * (n - 2 - m))});
            const double L = sc.amplitude() * (1 + opt.perturb_constant);
            const double pl = sc.p() * std::pow(L, sc.p() - 1);
            for (double g : {m + r.lambda1, m + r.lambda2}) indicial = std::max(indicial, std::abs(g * (g - n + 2) + pl));
            lambda_min = std::min(lambda_min, r.lambda1);
        }
    }
    res.measurements = {below("pc closed-form gap", gap, 1e-10), below("Vieta sum/product error", vieta, 1e-10),
                        below("indicial residual", indicial, 1e-9), above("min lambda1", lambda_min, 2.0)};
    return res;
}

struct SteadyCache {
    SpectralConstants sc;
    GridPtr grid;
    SteadyStateSolution base;
};

inline const SteadyCache& steady_13_3() {
    static const SteadyCache cache = [] {
        const ProblemParams pp{13, 3.0};
        SteadyCache c;
        c.sc = SpectralConstants::compute(pp);
        c.grid = make_grid(GridSpec{});
        c.base = solve_ground_profile(pp, c.grid);
        return c;
    }();
    return cache;
}

inline CriterionResult steady_solver(const Options&) {
    CriterionResult res{2, "steady: ground state (13,3)", {}, 0.0, {}};
    const auto& c = steady_13_3();
    const auto& phi = c.base.phi;
    bool positive = true, decreasing = true;
    for (std::size_t i = 0; i < phi.size(); ++i) {
        positive = positive && phi[i] > 0.0;
        if (i > 0) decreasing = decreasing && phi[i] < phi[i - 1];
    }
    const double s10 = std::sqrt(10.0);
    const double far = std::abs(phi.at(50.0) * 50.0 - s10) / s10;
    const double a1 = fit_asymptotic_coefficient(c.base, {5, 20}).coefficient;
    const double a2 = fit_asymptotic_coefficient(c.base, {10, 40}).coefficient;
    const double spread = std::abs(a1 - a2) / std::max(std::abs(a1), std::abs(a2));
    res.measurements = {flag("Phi > 0 on [0,1e4]", positive), flag("Phi strictly decreasing", decreasing),
                        below("|Phi(50)*50 - sqrt10|/sqrt10", far, 1e-2), below("fitted a", c.base.tail_a(), 0.0),
                        below("window fit spread [5,20] vs [10,40]", spread, 0.05)};
    return res;
}

inline CriterionResult kernel_cross_validation(const Options&) {
    CriterionResult res{3, "linearize: kernel cross-validation (13,3)", {}, 0.0, {}};
    const auto& c = steady_13_3();
    const KernelElement z = kernel_from_steady(c.base);
    const KernelElement zo = kernel_by_ode(c.base);
    double rel = 0.0, zmin = 1e300;
    for (std::size_t i = 0; i < z.size(); ++i) {
        zmin = std::min(zmin, z[i]);
        if (z.profile.r(i) <= 5e3) rel = std::max(rel, std::abs(z[i] - zo[i]) / std::abs(zo[i]));
    }
    const double a = c.base.tail_a();
    const double target = c.sc.lambda1() / c.sc.m * std::abs(a);
    const double tail = z.profile.at(40.0) * std::pow(40.0, c.sc.kernel_decay());
    const double tail_err = std::abs(tail - target) / target;

    const double h = 1e-4;
    const ProblemParams pp{13, 3.0};
    const auto up = solve_ground_profile(pp, c.grid, 1 + h, {}, false);
    const auto dn = solve_ground_profile(pp, c.grid, 1 - h, {}, false);
    double fd = 0.0;
    for (std::size_t i = 0; i < z.size(); ++i) fd = std::max(fd, std::abs((up.phi[i] - dn.phi[i]) / (2 * h) - z[i]));
    res.measurements = {below("sup rel |Z_steady - Z_ode| on [0,5e3]", rel, 1e-3), above("min Z", zmin, 0.0),
                        below("|Z(40) 40^5 - 4|a|| / 4|a|", tail_err, 0.05),
                        below("sup |dphi/dalpha (h=1e-4) - Z|", fd, 1e-6)};
    return res;
}

inline CriterionResult singular_kernel_residual(const Options&) {
    CriterionResult res{4, "linearize: singular kernel residual", {}, 0.0, {}};
    const GridPtr annulus = make_annulus_grid(0.5, 200.0, 4000);
    const std::vector<ProblemParams> cases = {
        {13, 3.0}, {20, 2.0}, {11, critical_exponents(11).joseph_lundgren.value()}};
    for (const auto& pp : cases) {
        const auto sc = SpectralConstants::compute(pp);
        const KernelElement w = singular_kernel(sc, annulus, SingularWhich::First);
        std::vector<double> pot(annulus->size());
        const double c = sc.p() * std::pow(sc.amplitude(), sc.p() - 1);
        for (std::size_t i = 1; i < pot.size(); ++i) pot[i] = c / ((*annulus)[i] * (*annulus)[i]);
        const double r = linear_residual4(w.profile, pot, pp.dim, 1.0, 100.0);
        char label[96];
        std::snprintf(label, sizeof label, "rel residual N=%d p=%.6g%s", pp.dim, pp.exponent, sc.critical ? " (p=pc)" : "");
        res.measurements.push_back(below(label, r, 1e-4));
    }
    return res;
}

inline EvolutionConfig base_config(const SpectralConstants& sc, const GridPtr& grid) {
    EvolutionConfig cfg;
    cfg.constants = sc;
    cfg.grid = grid;
    cfg.dt = 1e-3;
    cfg.dt_control = 1e-6;
    return cfg;
}

inline CriterionResult fixed_points(const Options&) {
    CriterionResult res{5, "evolve: fixed points and dt refinement (13,3)", {}, 0.0, {}};
    const auto& c = steady_13_3();
    const RadialOperator op(c.grid, c.sc.dim());
    struct Out {
        double deviation, ratio;
    };
    auto work = [&](double alpha) {
        EvolutionConfig cfg = base_config(c.sc, c.grid);
        cfg.t_max = 10.0;
        const RadialProfile eq = discrete_equilibrium(op, c.sc.p(), alpha);
        const double dev = sup_difference(evolve_until(cfg, eq).final_state().u, eq);
        // time-discretization error of a nontrivial trajectory: start from the
        // continuous phi_alpha, which is not an equilibrium of the scheme
        const RadialProfile u0 = scale_family(c.base, alpha, c.grid);
        std::vector<RadialProfile> fin;
        for (double dt : {0.02, 0.01, 0.005}) {
            EvolutionConfig fixed = cfg;
            fixed.dt = dt;
            fixed.dt_control = 0.0;
            fin.push_back(evolve_until(fixed, u0).final_state().u);
        }
        return Out{dev, sup_difference(fin[0], fin[1]) / sup_difference(fin[1], fin[2])};
    };
    std::vector<std::future<Out>> jobs;
    const std::vector<double> alphas = {0.5, 1.0, 2.0};
    for (double a : alphas) jobs.push_back(std::async(std::launch::async, work, a));
    for (std::size_t k = 0; k < alphas.size(); ++k) {
        const Out o = jobs[k].get();
        char l1[64], l2[96];
        std::snprintf(l1, sizeof l1, "sup |u(T) - phi_%g|", alphas[k]);
        std::snprintf(l2, sizeof l2, "|err(dt)/err(dt/2) - 2|/2, alpha=%g", alphas[k]);
        res.measurements.push_back(below(l1, o.deviation, 1e-4));
        res.measurements.push_back(below(l2, std::abs(o.ratio - 2.0) / 2.0, 0.3));
    }
    return res;
}

struct QuasiRun {
    std::string label;
    QuasiconvergenceResult result;
    double seconds = 0.0;
    std::string error;
};

inline QuasiRun quasi_run(int n, double p) {
    QuasiRun run;
    char label[64];
    std::snprintf(label, sizeof label, "(N,p)=(%d,%.6g)", n, p);
    run.label = label;
    const auto t0 = std::chrono::steady_clock::now();
    try {
        const ProblemParams pp{n, p};
        const auto sc = SpectralConstants::compute(pp);
        const GridPtr grid = make_grid(GridSpec{});
        const auto base = solve_ground_profile(pp, grid);
        EvolutionConfig cfg = base_config(sc, grid);
        cfg.t_max = 1e12;
        cfg.convergence_eps = 1e-6;
        cfg.store_every = 1000;
        run.result = quasiconvergence_experiment(1.0, 2.0, BlendPreset{1.0, 2.0, 0.5}, cfg, base);
    } catch (const std::exception& e) {
        run.error = e.what();
    }
    run.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return run;
}

inline const std::vector<QuasiRun>& quasi_runs() {
    static const std::vector<QuasiRun> runs = [] {
        auto a = std::async(std::launch::async, quasi_run, 13, 3.0);
        auto b = std::async(std::launch::async, quasi_run, 11, critical_exponents(11).joseph_lundgren.value());
        return std::vector<QuasiRun>{a.get(), b.get()};
    }();
    return runs;
}

inline CriterionResult quasiconvergence(const Options&) {
    CriterionResult res{6, "evolve: quasiconvergence from blend(phi_1, phi_2)", {}, 0.0, {}};
    for (const auto& run : quasi_runs()) {
        if (!run.error.empty()) {
            res.error += run.label + ": " + run.error + "; ";
            continue;
        }
        const auto& q = run.result;
        res.measurements.push_back(below(run.label + " steady residual", q.final_residual, 1e-6));
        res.measurements.push_back({run.label + " gamma_est", q.gamma_est, 0.0, "in [1,2]", q.gamma_in_bracket});
        res.measurements.push_back(below(run.label + " match error on [0,5e3]", q.match_error, 1e-3));
        res.measurements.push_back(flag(run.label + " ordering flags", q.ordering_ok));
        res.measurements.push_back(below(run.label + " runtime [s]", run.seconds, 300.0));
    }
    return res;
}

/// Largest single-step increase of `series` from index `from` on.
inline double max_increase(const std::vector<StepRecord>& recs, double StepRecord::*field, std::size_t from) {
    double worst = -std::numeric_limits<double>::infinity();
    for (std::size_t k = std::max<std::size_t>(from, 1); k < recs.size(); ++k)
        worst = std::max(worst, recs[k].*field - recs[k - 1].*field);
    return worst;
}

inline CriterionResult liouville_diagnostics(const Options&) {
    CriterionResult res{7, "diagnostics: weighted decay and sweeping along criterion-6 runs", {}, 0.0, {}};
    constexpr double slack = 1e-8;
    for (const auto& run : quasi_runs()) {
        if (!run.error.empty()) {
            res.error += run.label + ": " + run.error + "; ";
            continue;
        }
        const auto& d = run.result.trajectory.diagnostics;
        res.measurements.push_back(below(run.label + " max step increase of weighted_sup after 10% of steps",
                                         max_increase(d, &StepRecord::weighted_decay, d.size() / 10), slack));
        res.measurements.push_back(
            below(run.label + " max step increase of lambda_plus", max_increase(d, &StepRecord::sweep_plus, 1), slack));
        res.measurements.push_back(
            below(run.label + " max step increase of lambda_minus", max_increase(d, &StepRecord::sweep_minus, 1), slack));
    }
    return res;
}

inline CriterionResult interpolation_inequality(const Options&) {
    CriterionResult res{8, "diagnostics: gradient interpolation inequality", {}, 0.0, {}};
    const std::vector<double> radii = {1, 2, 4, 8};
    for (int n : {3, 13}) {
        const InterpSummary s = interp_sweep(n, radii);
        bool uniform = std::isfinite(s.constant);
        double x1_err = 0.0;
        for (const auto& r : s.results) {
            uniform = uniform && r.lhs <= s.constant * (r.rhs_f + r.rhs_psi) * (1 + 1e-12);
            if (r.name == "linear_x1") x1_err = std::max(x1_err, std::abs(r.fitted_C - 1.0));
        }
        res.measurements.push_back(flag("N=" + std::to_string(n) + " single C=" + std::to_string(s.constant) +
                                            " covers all " + std::to_string(s.results.size()) + " cases",
                                        uniform));
        res.measurements.push_back(below("N=" + std::to_string(n) + " |fitted_C(psi=x1) - 1|", x1_err, 1e-6));
    }
    return res;
}

inline CriterionResult blowdown_rate(const Options&) {
    CriterionResult res{9, "blowdown: rate and limit classification (13,3)", {}, 0.0, {}};
    const auto& c = steady_13_3();
    const GridPtr target = make_annulus_grid(0.5, 2.0, 400);
    const double expected = std::pow(2.0, -c.sc.lambda1());
    double prev = 0.0;
    for (double R : {2.0, 4.0, 8.0, 16.0}) {
        const double err = annulus_error(rescale(c.base.phi, R, c.sc, target), c.sc);
        if (prev > 0.0) {
            char label[96];
            std::snprintf(label, sizeof label, "|ratio/2^-lambda1 - 1|, R=%g->%g (ratio %.4g)", R / 2, R, err / prev);
            res.measurements.push_back(below(label, std::abs(err / prev / expected - 1.0), 0.2));
        }
        prev = err;
    }
    bool plus = true;
    for (double a : {0.25, 0.5, 1.0, 2.0, 4.0})
        plus = plus && classify_limit(scale_family(c.base, a), c.sc) == LimitClass::PlusL;
    std::vector<double> neg(c.base.phi.values());
    for (auto& v : neg) v = -v;
    const bool minus = classify_limit(RadialProfile(c.grid, neg), c.sc) == LimitClass::MinusL;
    const bool zero =
        classify_limit(RadialProfile(c.grid, std::vector<double>(c.grid->size(), 0.0)), c.sc) == LimitClass::Zero;
    res.measurements.push_back(flag("phi_alpha -> plus_L", plus));
    res.measurements.push_back(flag("-Phi -> minus_L", minus));
    res.measurements.push_back(flag("0 -> zero", zero));
    return res;
}

inline CriterionResult sphere_identity_check(const Options&) {
    CriterionResult res{10, "blowdown: sphere identity", {}, 0.0, {}};
    const auto sc = SpectralConstants::compute({13, 3.0});
    const double L = sc.amplitude();
    double worst_const = 0.0;
    for (double v : {L, -L, 0.0}) worst_const = std::max(worst_const, std::abs(sphere_identity(SphereProfile::constant(sc, v))));
    std::mt19937_64 rng(20241018);
    double min_random = std::numeric_limits<double>::infinity();
    for (int k = 0; k < 100; ++k) min_random = std::min(min_random, sphere_identity(SphereProfile::random_trig(sc, rng)));
    res.measurements = {below("max |I(f)| over f = L, -L, 0", worst_const, 1e-10),
                        above("min I(f) over 100 random profiles", min_random, 0.0)};
    return res;
}

struct Criterion {
    int id;
    std::string module;
    double runtime_limit;
    std::function<CriterionResult(const Options&)> run;
};

inline std::vector<Criterion> criteria() {
    return {
        {1, "constants", 1.0, exponent_identities},     {2, "steady", 10.0, steady_solver},
        {3, "linearize", 10.0, kernel_cross_validation}, {4, "linearize", 5.0, singular_kernel_residual},
        {5, "evolve", 60.0, fixed_points},               {6, "evolve", 600.0, quasiconvergence},
        {7, "diagnostics", 600.0, liouville_diagnostics}, {8, "diagnostics", 30.0, interpolation_inequality},
        {9, "blowdown", 10.0, blowdown_rate},             {10, "blowdown", 5.0, sphere_identity_check},
    };
}

/// Substring match against "<id>", the module name or the criterion name.
inline bool matches(const Criterion& c, const std::string& filter) {
    if (filter.empty()) return true;
    return std::to_string(c.id) == filter || c.module.find(filter) != std::string::npos;
}

inline std::string fmt_value(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

/// Runs the selected criteria, printing the table to `out`. Returns the results.
inline std::vector<CriterionResult> run_acceptance(const std::string& filter = {}, const Options& opt = {},
                                                   std::FILE* out = stdout) {
    std::vector<CriterionResult> results;
    for (const auto& c : criteria()) {
        if (!matches(c, filter)) continue;
        const auto t0 = std::chrono::steady_clock::now();
        CriterionResult r;
        try {
            r = c.run(opt);
        } catch (const std::exception& e) {
            r.id = c.id;
            r.name = c.module;
            r.error = e.what();
        }
        r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        r.measurements.push_back(below("runtime [s]", r.seconds, c.runtime_limit));
        std::fprintf(out, "%s  criterion %2d  %-62s %7.2fs\n", r.passed() ? "PASS" : "FAIL", r.id, r.name.c_str(),
                     r.seconds);
        for (const auto& m : r.measurements) {
            const std::string thr = m.relation == "==" || m.relation.rfind("in", 0) == 0
                                        ? m.relation
                                        : m.relation + " " + fmt_value(m.threshold);
            std::fprintf(out, "        %-4s %-66s %14s  %s\n", m.ok ? "ok" : "FAIL", m.label.c_str(),
                         fmt_value(m.value).c_str(), thr.c_str());
        }
        if (!r.error.empty()) std::fprintf(out, "        error: %s\n", r.error.c_str());
        std::fflush(out);
        results.push_back(std::move(r));
    }
    return results;
}

} // namespace supercrit::acceptance
