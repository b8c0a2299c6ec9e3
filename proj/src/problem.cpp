#include "nsvar/problem.hpp"

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <future>
#include <sstream>
#include <thread>

#include "nsvar/bolza.hpp"
#include "nsvar/catalog.hpp"
#include "nsvar/clarke.hpp"
#include "nsvar/duality.hpp"
#include "nsvar/rng.hpp"
#include "nsvar/sweeping.hpp"

namespace nsvar {

namespace {

constexpr const char* kVersion = "1";

double tol_of(const json& problem, const RunOptions& opts, const std::string& name,
              double fallback) {
    if (auto it = opts.tol_overrides.find(name); it != opts.tol_overrides.end()) return it->second;
    if (problem.contains("tolerances")) {
        const auto& t = problem.at("tolerances");
        if (t.contains(name)) return t.at(name).get<double>();
    }
    return fallback;
}

uint64_t seed_of(const json& problem, const RunOptions& opts) {
    if (opts.seed_override) return *opts.seed_override;
    return problem.value("seed", 0ULL);
}

TimeGrid grid_of(const json& body, const RunOptions& opts) {
    const json& g = body.at("grid");
    require_keys(g, {"a", "b", "n"}, "grid");
    int n = g.value("n", 100);
    if (opts.grid_override > 0) n = opts.grid_override;
    return TimeGrid::uniform(g.value("a", 0.0), g.value("b", 1.0), n);
}

DiscreteMeasure measure_of(const json& body, const TimeGrid& grid) {
    if (!body.contains("density")) return DiscreteMeasure::lebesgue(grid);
    const Expr dens = Expr::parse_t(body.at("density").get<std::string>());
    std::vector<double> d(static_cast<size_t>(grid.cells()));
    for (int k = 0; k < grid.cells(); ++k) d[static_cast<size_t>(k)] = dens.eval_t(grid.midpoint(k));
    return DiscreteMeasure(grid, std::move(d));
}

// {"expr": "t"} / {"expr": ["t","0"]} / {"const": [c...]} sampled per cell
StepFunction step_of(const json& spec, const TimeGrid& grid, int dim) {
    require_keys(spec, {"expr", "const"}, "step function");
    std::vector<Vec> cells(static_cast<size_t>(grid.cells()));
    if (spec.contains("const")) {
        Vec v = spec.at("const").get<Vec>();
        if (static_cast<int>(v.size()) != dim)
            throw structural_error("step function: const dimension mismatch");
        for (auto& c : cells) c = v;
        return StepFunction(grid, std::move(cells));
    }
    std::vector<Expr> exprs;
    if (spec.at("expr").is_string()) {
        exprs.push_back(Expr::parse_t(spec.at("expr").get<std::string>()));
    } else {
        for (const auto& e : spec.at("expr")) exprs.push_back(Expr::parse_t(e.get<std::string>()));
    }
    if (static_cast<int>(exprs.size()) != dim)
        throw structural_error("step function: expression dimension mismatch");
    for (int k = 0; k < grid.cells(); ++k) {
        Vec v(exprs.size());
        for (size_t i = 0; i < exprs.size(); ++i) v[i] = exprs[i].eval_t(grid.midpoint(k));
        cells[static_cast<size_t>(k)] = std::move(v);
    }
    return StepFunction(grid, std::move(cells));
}

ClarkeConfig clarke_config_of(const json& body, const RunOptions& opts, uint64_t seed) {
    ClarkeConfig cfg;
    cfg.seed = seed;
    if (body.contains("config")) {
        const json& c = body.at("config");
        require_keys(c, {"radii", "samples", "dirs", "step_fractions"}, "clarke config");
        if (c.contains("radii")) cfg.radii = c.at("radii").get<std::vector<double>>();
        if (c.contains("samples")) cfg.samples_per_radius = c.at("samples").get<int>();
        if (c.contains("dirs")) cfg.directions = c.at("dirs").get<int>();
        if (c.contains("step_fractions"))
            cfg.step_fractions = c.at("step_fractions").get<std::vector<double>>();
    }
    if (!opts.clarke_radii.empty()) cfg.radii = opts.clarke_radii;
    if (opts.clarke_samples > 0) cfg.samples_per_radius = opts.clarke_samples;
    if (opts.clarke_dirs > 0) cfg.directions = opts.clarke_dirs;
    return cfg;
}

// ---------------------------------------------------------------------------
// per-kind runners

std::vector<Report> run_interchange(const json& body, const json& problem, const RunOptions& opts) {
    require_keys(body, {"integrand", "grid", "density", "eps_schedule"}, "interchange body");
    const TimeGrid grid = grid_of(body, opts);
    IntegralFunctional F{integrand_from_json(body.at("integrand")), measure_of(body, grid), 2.0};
    InterchangeBudget budget;
    budget.tol = tol_of(problem, opts, "main", 1e-5);
    if (body.contains("eps_schedule"))
        budget.eps_schedule = body.at("eps_schedule").get<std::vector<double>>();
    return {verify_interchange(F, budget)};
}

std::vector<Report> run_conjugate(const json& body, const json& problem, const RunOptions& opts) {
    require_keys(body, {"integrand", "grid", "density", "dual", "trials"}, "conjugate body");
    const TimeGrid grid = grid_of(body, opts);
    IntegralFunctional F{integrand_from_json(body.at("integrand")), measure_of(body, grid), 2.0};
    const double tol = tol_of(problem, opts, "main", 1e-5);
    const uint64_t seed = seed_of(problem, opts);

    std::vector<StepFunction> duals;
    if (body.contains("dual")) {
        duals.push_back(step_of(body.at("dual"), grid, F.f.dim));
    }
    const int trials = body.value("trials", 0);
    CounterRng rng(seed, 0x64756c);
    uint64_t counter = 0;
    for (int tr = 0; tr < trials; ++tr) {
        std::vector<Vec> cells(static_cast<size_t>(grid.cells()));
        for (int k = 0; k < grid.cells(); ++k)
            cells[static_cast<size_t>(k)] = rng.point(counter++, F.f.dual_box.lo, F.f.dual_box.hi);
        duals.emplace_back(grid, std::move(cells));
    }
    if (duals.empty()) throw structural_error("conjugate body: provide \"dual\" and/or \"trials\"");

    Report agg;
    agg.kind = "conjugate_integral";
    agg.tolerance = tol;
    agg.residual = 0.0;
    agg.pass = true;
    json worst_case = json::object();
    for (size_t i = 0; i < duals.size(); ++i) {
        const ConjIntResult r = conjugate_of_integral(F, duals[i], tol);
        if (!r.report.pass) agg.pass = false;
        if (r.report.residual > agg.residual && r.report.residual != kInf) {
            agg.residual = r.report.residual;
            agg.lhs = r.pointwise;
            agg.rhs = r.direct;
            worst_case = {{"trial", i}, {"notes", r.report.notes}};
        }
        if (r.report.residual == kInf) {
            agg.residual = kInf;
            agg.lhs = r.pointwise;
            agg.rhs = r.direct;
            worst_case = {{"trial", i}, {"notes", r.report.notes}};
        }
    }
    agg.pass = agg.pass && agg.residual <= tol;
    agg.witnesses["trials"] = duals.size();
    agg.witnesses["worst"] = worst_case;
    return {agg};
}

std::vector<Report> run_subdiff(const json& body, const json& problem, const RunOptions& opts) {
    require_keys(body, {"integrand", "grid", "density", "x", "s", "eps"}, "subdiff body");
    const TimeGrid grid = grid_of(body, opts);
    IntegralFunctional F{integrand_from_json(body.at("integrand")), measure_of(body, grid), 2.0};
    const double eps = body.value("eps", 0.0);
    const double slack = tol_of(problem, opts, "slack", 1e-9);
    const StepFunction x = step_of(body.at("x"), grid, F.f.dim);
    const StepFunction s = step_of(body.at("s"), grid, F.f.dim);
    auto [member, witness] = eps_subdiff_membership(F, x, s, eps, slack);
    Report rep;
    rep.kind = "eps_subdiff";
    rep.lhs = witness.total;
    rep.rhs = eps;
    rep.tolerance = slack;
    rep.residual = witness.infinite ? kInf : std::max(0.0, witness.total - eps);
    rep.pass = member;
    rep.witnesses["witness_total"] = json_num(witness.total);
    rep.witnesses["witness_infinite"] = witness.infinite;
    rep.witnesses["witness_density"] = witness.ell;
    return {rep};
}

std::vector<Report> run_expected(const json& body, const json& problem, const RunOptions& opts) {
    require_keys(body, {"integrand", "grid", "density", "mode", "u", "v", "eps", "s", "box"},
                 "expected body");
    const TimeGrid grid = grid_of(body, opts);
    const IntegrandOracle f = integrand_from_json(body.at("integrand"));
    const DiscreteMeasure m = measure_of(body, grid);
    const std::string mode = body.value("mode", "witness");
    if (mode == "witness") {
        const Vec u = body.at("u").get<Vec>();
        const StepFunction v = step_of(body.at("v"), grid, f.dim);
        const double eps = body.value("eps", 0.0);
        const double slack = tol_of(problem, opts, "slack", 1e-9);
        auto [ok, witness] = expected_subgradient_witness_check(f, m, u, v, eps, slack);
        Report rep;
        rep.kind = "expected_subgradient";
        rep.lhs = witness.total;
        rep.rhs = eps;
        rep.tolerance = slack;
        rep.residual = witness.infinite ? kInf : std::max(0.0, witness.total - eps);
        rep.pass = ok;
        rep.witnesses["witness_total"] = json_num(witness.total);
        return {rep};
    }
    if (mode == "conjugate") {
        const Vec s = body.at("s").get<Vec>();
        Box box = Box::cube(f.dim, -4.0, 4.0);
        if (body.contains("box")) {
            Vec lo, hi;
            for (const auto& pair : body.at("box")) {
                lo.push_back(pair.at(0).get<double>());
                hi.push_back(pair.at(1).get<double>());
            }
            box = Box(std::move(lo), std::move(hi));
        }
        return {expected_conjugate(f, m, s, box, tol_of(problem, opts, "main", 1e-5))};
    }
    throw structural_error("expected body: mode must be \"witness\" or \"conjugate\"");
}

std::vector<Report> run_clarke(const json& body, const json& problem, const RunOptions& opts) {
    require_keys(body, {"integrand", "grid", "density", "check", "x", "s", "v", "config"},
                 "clarke body");
    const TimeGrid grid = grid_of(body, opts);
    IntegralFunctional F{integrand_from_json(body.at("integrand")), measure_of(body, grid), 2.0};
    ClarkeConfig cfg = clarke_config_of(body, opts, seed_of(problem, opts));
    cfg.tol = tol_of(problem, opts, "main", 5e-2);
    const std::string check = body.value("check", "inclusion");
    const StepFunction x = step_of(body.at("x"), grid, F.f.dim);
    if (check == "inclusion")
        return {integral_clarke_inclusion(F, x, step_of(body.at("s"), grid, F.f.dim), cfg)};
    if (check == "upper_bound")
        return {clarke_upper_bound_check(F, x, step_of(body.at("v"), grid, F.f.dim), cfg)};
    throw structural_error("clarke body: check must be \"inclusion\" or \"upper_bound\"");
}

ConvexSet endpoint_set_of(const json& spec, int n) {
    require_keys(spec, {"kind", "left", "right", "center", "radius", "rows", "rhs"}, "constraint");
    const std::string kind = spec.at("kind").get<std::string>();
    if (kind == "pinned") {
        Vec left = spec.at("left").get<Vec>();
        Vec right = spec.at("right").get<Vec>();
        if (static_cast<int>(left.size()) != n || static_cast<int>(right.size()) != n)
            throw structural_error("constraint: pinned endpoint dimension mismatch");
        Vec both = left;
        both.insert(both.end(), right.begin(), right.end());
        return ConvexSet::point(std::move(both));
    }
    if (kind == "left-pinned") {
        Vec left = spec.at("left").get<Vec>();
        if (static_cast<int>(left.size()) != n)
            throw structural_error("constraint: pinned endpoint dimension mismatch");
        return ConvexSet::product(ConvexSet::point(std::move(left)), ConvexSet::whole_space(n));
    }
    if (kind == "ball") {
        Vec center = spec.at("center").get<Vec>();
        if (static_cast<int>(center.size()) != 2 * n)
            throw structural_error("constraint: ball center must live in R^{2n}");
        return ConvexSet::ball(std::move(center), spec.at("radius").get<double>());
    }
    if (kind == "affine") {
        std::vector<Vec> rows;
        for (const auto& r : spec.at("rows")) rows.push_back(r.get<Vec>());
        return ConvexSet::affine(std::move(rows), spec.at("rhs").get<Vec>(), 2 * n);
    }
    throw structural_error("constraint: unknown kind \"" + kind + "\"");
}

std::vector<Report> run_bolza(const json& body, const json& problem, const RunOptions& opts,
                              std::map<std::string, std::string>* csv_out) {
    require_keys(body,
                 {"lagrangian", "endpoint_cost", "constraint", "n", "a", "b", "N", "p", "K_factor",
                  "init", "solver"},
                 "bolza body");
    BolzaProblem P;
    P.n = body.value("n", 1);
    P.a = body.value("a", 0.0);
    P.b = body.value("b", 1.0);
    P.p = body.value("p", 2.0);
    P.f = integrand_from_json(body.at("lagrangian"));
    P.S = endpoint_set_of(body.at("constraint"), P.n);

    // endpoint cost over named variables u0..,w0.. (u, w aliases in 1D)
    std::vector<std::string> vars;
    for (int i = 0; i < P.n; ++i) vars.push_back("u" + std::to_string(i));
    for (int i = 0; i < P.n; ++i) vars.push_back("w" + std::to_string(i));
    if (P.n == 1) {
        vars = {"u", "w"};
    }
    const Expr ell = Expr::parse(body.value("endpoint_cost", "0"), vars);
    P.ell.eval = [ell](const Vec& u, const Vec& w) {
        Vec z = u;
        z.insert(z.end(), w.begin(), w.end());
        return ell.eval(z);
    };

    int N = body.value("N", 200);
    if (opts.grid_override > 0) N = opts.grid_override;
    const TimeGrid grid = TimeGrid::uniform(P.a, P.b, N);

    Arc init = Arc::constant(grid, zeros(P.n));
    const json& cons = body.at("constraint");
    if (cons.at("kind") == "pinned")
        init = Arc::line(grid, cons.at("left").get<Vec>(), cons.at("right").get<Vec>());
    else if (cons.at("kind") == "left-pinned")
        init = Arc::constant(grid, cons.at("left").get<Vec>());
    if (body.contains("init") && body.at("init").value("kind", "") == "zero")
        init = Arc::constant(grid, zeros(P.n));

    const double K0 = estimate_K0(P, init, 0.25, seed_of(problem, opts));
    const double K = std::max(body.value("K_factor", 2.0) * K0, 1e-3);

    SolveOptions sopts;
    sopts.seed = seed_of(problem, opts);
    if (body.contains("solver")) {
        const json& s = body.at("solver");
        require_keys(s, {"max_iters", "window", "tol"}, "solver options");
        sopts.max_iters = s.value("max_iters", sopts.max_iters);
        sopts.window = s.value("window", sopts.window);
        sopts.tol = s.value("tol", sopts.tol);
    }

    SolveResult solved = solve(P, init, K, sopts);
    AdjointOptions aopts;
    AdjointResult adj = adjoint_reconstruct(P, solved.arc, aopts);
    solved.report.witnesses["arc"] = curve_to_json(solved.arc.x);
    adj.report.witnesses["costate"] = curve_to_json(adj.adjoint.p_curve);
    EulerLagrangeConfig ecfg;
    ecfg.tol = tol_of(problem, opts, "el", 1e-2);
    ecfg.seed = seed_of(problem, opts);
    Report el = euler_lagrange_residual(P, solved.arc, adj.adjoint, ecfg);

    Report feas;
    feas.kind = "penalization_feasibility";
    feas.lhs = P.S.dist(solved.arc.endpoint_pair());
    feas.rhs = 0.0;
    feas.tolerance = tol_of(problem, opts, "feasibility", 1e-4);
    feas.residual = feas.lhs;
    feas.pass = feas.residual <= feas.tolerance;
    feas.witnesses["K0"] = json_num(K0);
    feas.witnesses["K"] = json_num(K);

    if (csv_out) {
        std::ostringstream csv;
        csv << "t,x,xdot,p,pdot\n";
        for (int i = 0; i <= grid.cells(); ++i) {
            const int cell = std::min(i, grid.cells() - 1);
            csv << format_double(grid.node(i));
            for (int d = 0; d < P.n; ++d)
                csv << "," << format_double(solved.arc.x.values[static_cast<size_t>(i)][static_cast<size_t>(d)]);
            for (int d = 0; d < P.n; ++d)
                csv << "," << format_double(solved.arc.y.at_cell(cell)[static_cast<size_t>(d)]);
            for (int d = 0; d < P.n; ++d)
                csv << "," << format_double(adj.adjoint.p_curve.values[static_cast<size_t>(i)][static_cast<size_t>(d)]);
            for (int d = 0; d < P.n; ++d)
                csv << "," << format_double(adj.adjoint.pdot.at_cell(cell)[static_cast<size_t>(d)]);
            csv << "\n";
        }
        (*csv_out)["trajectory.csv"] = csv.str();
    }
    return {solved.report, feas, adj.report, el};
}

std::vector<Report> run_sweep(const json& body, const json& problem, const RunOptions& opts,
                              std::map<std::string, std::string>* csv_out) {
    require_keys(body, {"set", "x0", "N", "a", "b", "inject", "selections", "coupling"},
                 "sweep body");
    MovingSet C = moving_set_from_json(body.at("set"));
    const double a = body.value("a", 0.0), b = body.value("b", 1.0);
    int N = body.value("N", 256);
    if (opts.grid_override > 0) N = opts.grid_override;
    const TimeGrid grid = TimeGrid::uniform(a, b, N);
    const Vec x0 = body.at("x0").get<Vec>();

    BVSolution sol = catching_up(C, x0, grid);
    const std::string inject = body.value("inject", "none");
    if (inject == "flip_density") {
        for (auto& cell : sol.density.cell_values)
            if (norm2(cell) > 1e-9) cell = scale(-1.0, cell);
        for (auto& atom : sol.atom_density) atom = scale(-1.0, atom);
    } else if (inject == "scale_density") {
        for (auto& cell : sol.density.cell_values) cell = scale(3.0, cell);
    } else if (inject != "none") {
        throw structural_error("sweep body: unknown injection \"" + inject + "\"");
    }

    EquivalenceTolerances tols;
    tols.coupling = tol_of(problem, opts, "coupling", 1.0);
    tols.selections = body.value("selections", 24);
    tols.seed = seed_of(problem, opts);
    Report eq = equivalence_report(C, sol, tols);

    Report dm, is;
    dm.kind = "differential_measure";
    is.kind = "integral_solution";
    // surface the two sub-verdicts as standalone reports for the exit code
    auto jnum = [](const json& j, const char* key) {
        if (!j.contains(key)) return 0.0;
        const json& v = j.at(key);
        if (v.is_number()) return v.get<double>();
        if (v.is_string()) return v.get<std::string>() == "-inf" ? -kInf : kInf;
        return 0.0;
    };
    {
        const json& dmw = eq.witnesses["differential_measure"];
        dm.lhs = jnum(dmw, "lhs");
        dm.rhs = jnum(dmw, "rhs");
        dm.residual = jnum(dmw, "residual");
        dm.tolerance = jnum(dmw, "tolerance");
        dm.pass = dmw.at("pass").get<bool>();
        const json& isw = eq.witnesses["integral_solution"];
        is.lhs = jnum(isw, "lhs");
        is.rhs = jnum(isw, "rhs");
        is.residual = jnum(isw, "residual");
        is.tolerance = jnum(isw, "tolerance");
        is.pass = isw.at("pass").get<bool>();
    }

    if (csv_out) {
        std::ostringstream csv;
        csv << "t,x,density\n";
        for (int i = 0; i <= grid.cells(); ++i) {
            const int cell = std::min(i, grid.cells() - 1);
            csv << format_double(grid.node(i));
            for (int d = 0; d < C.dim; ++d)
                csv << "," << format_double(sol.x.values[static_cast<size_t>(i)][static_cast<size_t>(d)]);
            for (int d = 0; d < C.dim; ++d)
                csv << "," << format_double(sol.density.at_cell(cell)[static_cast<size_t>(d)]);
            csv << "\n";
        }
        (*csv_out)["solution.csv"] = csv.str();
    }
    return {dm, is, eq};
}

}  // namespace

uint64_t stable_hash(const std::string& payload) {
    // FNV-1a
    uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : payload) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

RunOutcome run_problem(const json& problem, const RunOptions& opts) {
    RunOutcome out;
    const auto t0 = std::chrono::steady_clock::now();
    try {
        require_keys(problem, {"version", "kind", "seed", "tolerances", "body"}, "problem file");
        if (problem.value("version", "") != kVersion)
            throw structural_error("problem file: unsupported version (expected \"" +
                                   std::string(kVersion) + "\")");
        if (!problem.contains("kind") || !problem.contains("body"))
            throw structural_error("problem file: \"kind\" and \"body\" are required");
        out.kind = problem.at("kind").get<std::string>();
        const json& body = problem.at("body");

        std::map<std::string, std::string>* csv = opts.write_csv ? &out.csv_files : nullptr;
        if (out.kind == "interchange") {
            out.reports = run_interchange(body, problem, opts);
        } else if (out.kind == "conjugate") {
            out.reports = run_conjugate(body, problem, opts);
        } else if (out.kind == "subdiff") {
            out.reports = run_subdiff(body, problem, opts);
        } else if (out.kind == "expected") {
            out.reports = run_expected(body, problem, opts);
        } else if (out.kind == "clarke") {
            out.reports = run_clarke(body, problem, opts);
        } else if (out.kind == "bolza") {
            out.reports = run_bolza(body, problem, opts, csv);
        } else if (out.kind == "sweep") {
            out.reports = run_sweep(body, problem, opts, csv);
        } else {
            throw structural_error("problem file: unknown kind \"" + out.kind + "\"");
        }
        out.exit_code = 0;
        for (const auto& r : out.reports)
            if (!r.pass) out.exit_code = 1;
    } catch (const std::exception& e) {
        out.exit_code = 2;
        out.diagnostic = e.what();
    }
    const auto t1 = std::chrono::steady_clock::now();
    const uint64_t seed = problem.is_object() ? seed_of(problem, opts) : 0;

    json payload;
    payload["version"] = kVersion;
    payload["kind"] = out.kind;
    payload["seed"] = seed;
    payload["exit_code"] = out.exit_code;
    if (!out.diagnostic.empty()) payload["diagnostic"] = out.diagnostic;
    payload["reports"] = json::array();
    for (const auto& r : out.reports) payload["reports"].push_back(r.to_json());
    out.report_payload = payload;

    json manifest;
    manifest["inputs_hash"] = stable_hash(problem.dump());
    manifest["seed"] = seed;
    manifest["grid_override"] = opts.grid_override;
    json sizes = json::array();
    if (problem.is_object() && problem.contains("body")) {
        const json& body = problem.at("body");
        if (body.is_object()) {
            if (body.contains("grid") && body.at("grid").contains("n"))
                sizes.push_back(opts.grid_override > 0 ? opts.grid_override
                                                       : body.at("grid").at("n").get<int>());
            if (body.contains("N"))
                sizes.push_back(opts.grid_override > 0 ? opts.grid_override
                                                       : body.at("N").get<int>());
        }
    }
    manifest["grid_sizes"] = sizes;
    json tolset = json::object();
    if (problem.is_object() && problem.contains("tolerances")) tolset = problem.at("tolerances");
    for (const auto& [name, value] : opts.tol_overrides) tolset[name] = value;
    manifest["tolerances"] = tolset;
    manifest["wall_time_ms"] =
        std::chrono::duration_cast<std::chrono::milliseconds>(t1 - t0).count();
    json verdicts = json::array();
    for (const auto& r : out.reports) verdicts.push_back(r.pass ? "pass" : "fail");
    manifest["verdicts"] = verdicts;
    out.manifest = manifest;
    return out;
}

RunOutcome run_problem_file(const std::string& path, const std::string& out_dir,
                            const RunOptions& opts) {
    RunOutcome out;
    json problem;
    try {
        std::ifstream in(path);
        if (!in) throw structural_error("cannot open problem file: " + path);
        problem = json::parse(in);
    } catch (const std::exception& e) {
        out.exit_code = 2;
        out.diagnostic = e.what();
        out.report_payload = {{"version", kVersion}, {"exit_code", 2}, {"diagnostic", e.what()}};
        return out;
    }
    out = run_problem(problem, opts);
    if (!out_dir.empty()) {
        namespace fs = std::filesystem;
        const fs::path stem = fs::path(path).stem();
        const fs::path dir = fs::path(out_dir) / stem;
        fs::create_directories(dir);
        std::ofstream(dir / "report.json") << out.report_payload.dump(2) << "\n";
        std::ofstream(dir / "manifest.json") << out.manifest.dump(2) << "\n";
        for (const auto& [name, content] : out.csv_files) std::ofstream(dir / name) << content;
    }
    return out;
}

SuiteOutcome run_suite(const std::string& dir, const std::string& out_dir, const RunOptions& opts) {
    namespace fs = std::filesystem;
    SuiteOutcome suite;
    std::vector<std::string> files;
    if (fs::exists(dir))
        for (const auto& entry : fs::directory_iterator(dir))
            if (entry.path().extension() == ".json") files.push_back(entry.path().string());
    std::sort(files.begin(), files.end());

    const unsigned workers = std::max(1u, std::thread::hardware_concurrency());
    std::vector<std::future<SuiteRow>> futures;
    std::vector<SuiteRow> rows(files.size());
    for (size_t batch = 0; batch < files.size(); batch += workers) {
        const size_t end = std::min(files.size(), batch + workers);
        futures.clear();
        for (size_t i = batch; i < end; ++i) {
            futures.push_back(std::async(std::launch::async, [&, i]() {
                const auto t0 = std::chrono::steady_clock::now();
                const RunOutcome r = run_problem_file(files[i], out_dir, opts);
                const auto t1 = std::chrono::steady_clock::now();
                SuiteRow row;
                row.file = fs::path(files[i]).filename().string();
                row.kind = r.kind.empty() ? "?" : r.kind;
                double worst = 0.0, tol = 0.0;
                for (const auto& rep : r.reports)
                    if (rep.residual >= worst) {
                        worst = rep.residual;
                        tol = rep.tolerance;
                    }
                row.residual = worst;
                row.tolerance = tol;
                row.verdict = r.exit_code == 0 ? "pass" : (r.exit_code == 1 ? "fail" : "error");
                row.runtime_s = std::chrono::duration<double>(t1 - t0).count();
                return row;
            }));
        }
        for (size_t i = batch; i < end; ++i) rows[i] = futures[i - batch].get();
    }

    std::ostringstream csv;
    csv << "file,kind,residual,tolerance,verdict,runtime\n";
    for (const auto& row : rows) {
        csv << row.file << "," << row.kind << "," << format_double(row.residual) << ","
            << format_double(row.tolerance) << "," << row.verdict << ","
            << format_double(row.runtime_s) << "\n";
        if (row.verdict != "pass") suite.exit_code = 1;
    }
    suite.rows = rows;
    suite.summary_csv = csv.str();
    if (!out_dir.empty()) {
        fs::create_directories(out_dir);
        std::ofstream(fs::path(out_dir) / "summary.csv") << suite.summary_csv;
    }
    return suite;
}

}  // namespace nsvar
