#include "nsvar/clarke.hpp"

#include <algorithm>
#include <cmath>

#include "nsvar/rng.hpp"

namespace nsvar {

namespace {

void validate(const ClarkeConfig& cfg) {
    if (cfg.radii.empty()) throw structural_error("ClarkeConfig: radii must be nonempty");
    for (size_t i = 0; i + 1 < cfg.radii.size(); ++i)
        if (!(cfg.radii[i] > cfg.radii[i + 1]) || !(cfg.radii[i + 1] > 0.0))
            throw structural_error("ClarkeConfig: radii must be strictly decreasing and positive");
    if (cfg.samples_per_radius < 1 || cfg.step_fractions.empty())
        throw structural_error("ClarkeConfig: empty sampling plan");
}

std::vector<Vec> unit_directions(int n, int count, uint64_t seed) {
    std::vector<Vec> dirs;
    if (n == 1) {
        dirs.push_back({1.0});
        dirs.push_back({-1.0});
        return dirs;
    }
    if (n == 2) {
        for (int i = 0; i < count; ++i) {
            const double phi = 2.0 * M_PI * static_cast<double>(i) / count;
            dirs.push_back({std::cos(phi), std::sin(phi)});
        }
        return dirs;
    }
    CounterRng rng(seed, 0x646972);
    for (int i = 0; i < count; ++i) dirs.push_back(rng.direction(static_cast<uint64_t>(i), n));
    return dirs;
}

}  // namespace

DirDerivResult clarke_dirderiv(const std::function<double(const Vec&)>& g, const Vec& x,
                               const Vec& v, const ClarkeConfig& cfg) {
    validate(cfg);
    const int n = static_cast<int>(x.size());
    const double vnorm = norm2(v);
    DirDerivResult out;
    if (vnorm == 0.0) return out;  // positively homogeneous: d(x)(0) = 0
    const Vec vhat = scale(1.0 / vnorm, v);

    CounterRng rng(cfg.seed, 0x636c61);
    uint64_t counter = 0;
    for (double radius : cfg.radii) {
        double best = -kInf;
        auto probe = [&](const Vec& y, double t) {
            const double gy = g(y);
            const double gyt = g(axpy(y, t, v));
            if (std::isnan(gy) || std::isnan(gyt) || gy == kInf || gyt == kInf)
                throw oracle_error("clarke_dirderiv: g must be finite near x");
            best = std::max(best, (gyt - gy) / t);
        };
        for (double frac : cfg.step_fractions) {
            const double t = frac * radius;
            // deterministic anchors: the base point and axial displacements
            probe(x, t);
            probe(axpy(x, radius, vhat), t);
            probe(axpy(x, -radius, vhat), t);
            for (int i = 0; i < n; ++i) {
                Vec e = zeros(n);
                e[static_cast<size_t>(i)] = radius;
                probe(add(x, e), t);
                e[static_cast<size_t>(i)] = -radius;
                probe(add(x, e), t);
            }
        }
        const int random_probes = std::max(0, cfg.samples_per_radius - 3 - 2 * n);
        for (int i = 0; i < random_probes; ++i) {
            const Vec u = rng.direction(counter++, n);
            const double r = radius * std::pow(rng.uniform(counter++), 1.0 / n);
            const double frac =
                cfg.step_fractions[static_cast<size_t>(i) % cfg.step_fractions.size()];
            probe(axpy(x, r, u), frac * radius);
        }
        out.per_radius.push_back(best);
    }

    const size_t m = out.per_radius.size();
    if (m >= 3) {
        // divergence guard: quotients blowing up as the radius shrinks
        bool diverging = true;
        for (size_t i = 0; i + 1 < m; ++i) {
            if (std::abs(out.per_radius[i + 1]) < 2.0 * std::abs(out.per_radius[i]))
                diverging = false;
        }
        if (diverging && std::abs(out.per_radius.back()) > 8.0 * std::abs(out.per_radius.front()) &&
            std::abs(out.per_radius.back()) > 10.0 * (1.0 + vnorm))
            throw oracle_error("clarke_dirderiv: difference quotients diverge (g not Lipschitz near x?)");
    }
    const double last = out.per_radius[m - 1];
    const double prev = m >= 2 ? out.per_radius[m - 2] : last;
    out.value = std::max(last, prev);
    out.stabilized = std::abs(last - prev) <= cfg.stab_tol * (1.0 + std::abs(last));
    return out;
}

SubdiffMembershipResult clarke_membership(const std::function<double(const Vec&)>& g, const Vec& x,
                                          const Vec& s, const ClarkeConfig& cfg) {
    const int n = static_cast<int>(x.size());
    SubdiffMembershipResult out;
    out.margin = kInf;
    for (const Vec& v : unit_directions(n, cfg.directions, cfg.seed)) {
        const double d = clarke_dirderiv(g, x, v, cfg).value;
        const double gap = d - dot(s, v);
        if (gap < out.margin) {
            out.margin = gap;
            out.worst_direction = v;
        }
    }
    out.member = out.margin >= -cfg.tol;
    return out;
}

Report integral_clarke_inclusion(const IntegralFunctional& F, const StepFunction& x,
                                 const StepFunction& s, const ClarkeConfig& cfg) {
    if (!x.grid.same_nodes(F.measure.grid) || !s.grid.same_nodes(F.measure.grid))
        throw structural_error("integral_clarke_inclusion: grid mismatch");
    if (!F.f.has_modulus())
        throw structural_error("integral_clarke_inclusion: integrand needs a Lipschitz modulus");
    const TimeGrid& g = F.measure.grid;
    const double q = F.p == 1.0 ? kInf : F.p / (F.p - 1.0);

    // hypothesis bookkeeping: int k(t)^q dmu must be finite
    double kq = 0.0;
    if (q == kInf) {
        for (int k = 0; k < g.cells(); ++k)
            kq = std::max(kq, F.f.lipschitz_modulus(g.midpoint(k)));
    } else {
        std::vector<double> cells(static_cast<size_t>(g.cells()));
        for (int k = 0; k < g.cells(); ++k)
            cells[static_cast<size_t>(k)] = std::pow(F.f.lipschitz_modulus(g.midpoint(k)), q);
        std::vector<double> nodes(g.nodes().size(), 0.0);
        for (const auto& a : F.measure.atoms)
            nodes[static_cast<size_t>(a.node)] = std::pow(F.f.lipschitz_modulus(g.node(a.node)), q);
        kq = quadrature(cells, nodes, F.measure);
    }
    if (kq == kInf)
        throw oracle_error("integral_clarke_inclusion: the modulus pairing integral is infinite");

    double violating_measure = 0.0;
    double worst_margin = kInf;
    json violations = json::array();
    for (int k = 0; k < g.cells(); ++k) {
        const double tm = g.midpoint(k);
        auto gk = [&](const Vec& z) { return F.f.eval(tm, z); };
        const SubdiffMembershipResult r = clarke_membership(gk, x.at_cell(k), s.at_cell(k), cfg);
        worst_margin = std::min(worst_margin, r.margin);
        if (!r.member) {
            violating_measure += F.measure.cell_mass(k);
            if (violations.size() < 32)
                violations.push_back({{"cell", k}, {"t", tm}, {"margin", r.margin}});
        }
    }

    Report rep;
    rep.kind = "clarke_inclusion";
    rep.lhs = violating_measure;
    rep.rhs = 0.0;
    rep.tolerance = 0.0;
    rep.residual = violating_measure;
    rep.pass = violating_measure <= rep.tolerance;
    rep.witnesses["violating_cells"] = violations;
    rep.witnesses["worst_margin"] = json_num(worst_margin);
    rep.witnesses["modulus_pairing_integral"] = json_num(kq);
    if (F.f.dim > 1)
        rep.notes = "membership sampled over " + std::to_string(cfg.directions) +
                    " directions: necessary-condition check only";
    return rep;
}

Report clarke_upper_bound_check(const IntegralFunctional& F, const StepFunction& x,
                                const StepFunction& v, const ClarkeConfig& cfg) {
    if (!x.grid.same_nodes(F.measure.grid) || !v.grid.same_nodes(F.measure.grid))
        throw structural_error("clarke_upper_bound_check: grid mismatch");
    if (!F.f.has_modulus())
        throw structural_error("clarke_upper_bound_check: integrand needs a Lipschitz modulus");
    validate(cfg);
    const TimeGrid& g = F.measure.grid;
    const int cells = g.cells();
    const int dim = F.f.dim;

    // rhs: cellwise directional derivatives integrated
    std::vector<double> rhs_cells(static_cast<size_t>(cells));
    for (int k = 0; k < cells; ++k) {
        const double tm = g.midpoint(k);
        auto gk = [&](const Vec& z) { return F.f.eval(tm, z); };
        rhs_cells[static_cast<size_t>(k)] = clarke_dirderiv(gk, x.at_cell(k), v.at_cell(k), cfg).value;
    }
    std::vector<double> rhs_nodes(g.nodes().size(), 0.0);
    for (const auto& a : F.measure.atoms) {
        const double tn = g.node(a.node);
        auto gn = [&](const Vec& z) { return F.f.eval(tn, z); };
        rhs_nodes[static_cast<size_t>(a.node)] =
            clarke_dirderiv(gn, x.at_node(a.node), v.at_node(a.node), cfg).value;
    }
    const double rhs = quadrature(rhs_cells, rhs_nodes, F.measure);

    // lhs: the same limsup sampled on the step-function space, perturbing
    // each cell independently within radius delta (matching the radius the
    // cellwise estimator sees, so both sides resolve kinks at the same scale)
    CounterRng rng(cfg.seed, 0x75626e);
    uint64_t counter = 0;
    auto perturbed = [&](double radius) {
        std::vector<Vec> y(static_cast<size_t>(cells));
        for (int k = 0; k < cells; ++k) {
            const Vec u = rng.direction(counter++, dim);
            const double r =
                radius * std::pow(rng.uniform(counter++), 1.0 / static_cast<double>(dim));
            y[static_cast<size_t>(k)] = axpy(x.at_cell(k), r, u);
        }
        return StepFunction(g, std::move(y));
    };
    auto value_at = [&](const StepFunction& y) { return F.eval_step(y); };

    std::vector<double> per_radius;
    for (double radius : cfg.radii) {
        double best = -kInf;
        const int samples = std::max(1, cfg.samples_per_radius / 4);
        for (int i = 0; i < samples; ++i) {
            const StepFunction y = i == 0 ? x : perturbed(radius * rng.uniform(counter++));
            for (double frac : cfg.step_fractions) {
                const double t = frac * radius;
                std::vector<Vec> shifted(static_cast<size_t>(cells));
                for (int k = 0; k < cells; ++k)
                    shifted[static_cast<size_t>(k)] = axpy(y.at_cell(k), t, v.at_cell(k));
                const double num = value_at(StepFunction(g, std::move(shifted))) - value_at(y);
                best = std::max(best, num / t);
            }
        }
        per_radius.push_back(best);
    }
    const double lhs = std::max(per_radius[per_radius.size() - 1], per_radius[per_radius.size() - 2]);

    Report rep;
    rep.kind = "clarke_upper_bound";
    rep.lhs = lhs;
    rep.rhs = rhs;
    rep.tolerance = cfg.tol;
    rep.residual = std::max(0.0, lhs - rhs);
    rep.pass = rep.residual <= rep.tolerance;
    rep.witnesses["lhs_per_radius"] = per_radius;
    rep.witnesses["rhs_cells_head"] =
        std::vector<double>(rhs_cells.begin(), rhs_cells.begin() + std::min<size_t>(8, rhs_cells.size()));
    return rep;
}

}  // namespace nsvar
