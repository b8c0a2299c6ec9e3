#include "nsvar/grid.hpp"

#include <algorithm>
#include <cmath>

namespace nsvar {

TimeGrid::TimeGrid(double a, double b, std::vector<double> nodes)
    : a_(a), b_(b), nodes_(std::move(nodes)) {
    if (nodes_.size() < 2) throw structural_error("TimeGrid: need at least two nodes");
    if (nodes_.front() != a_ || nodes_.back() != b_)
        throw structural_error("TimeGrid: nodes must start at a and end at b");
    for (size_t i = 0; i + 1 < nodes_.size(); ++i)
        if (!(nodes_[i] < nodes_[i + 1]))
            throw structural_error("TimeGrid: nodes must be strictly increasing");
}

TimeGrid TimeGrid::uniform(double a, double b, int cells) {
    if (cells < 1) throw structural_error("TimeGrid::uniform: need at least one cell");
    if (!(a < b)) throw structural_error("TimeGrid::uniform: need a < b");
    std::vector<double> nodes(static_cast<size_t>(cells) + 1);
    for (int i = 0; i <= cells; ++i)
        nodes[static_cast<size_t>(i)] = a + (b - a) * static_cast<double>(i) / cells;
    nodes.front() = a;
    nodes.back() = b;
    return TimeGrid(a, b, std::move(nodes));
}

TimeGrid TimeGrid::from_nodes(std::vector<double> nodes) {
    if (nodes.size() < 2) throw structural_error("TimeGrid::from_nodes: need at least two nodes");
    const double a = nodes.front(), b = nodes.back();
    return TimeGrid(a, b, std::move(nodes));
}

int TimeGrid::cell_of(double t) const {
    if (t <= a_) return 0;
    if (t >= b_) return cells() - 1;
    const auto it = std::upper_bound(nodes_.begin(), nodes_.end(), t);
    return static_cast<int>(it - nodes_.begin()) - 1;
}

TimeGrid TimeGrid::with_node(double t) const {
    if (t <= a_ || t >= b_) return *this;
    auto nodes = nodes_;
    const auto it = std::lower_bound(nodes.begin(), nodes.end(), t);
    if (it != nodes.end() && *it == t) return *this;
    nodes.insert(it, t);
    return TimeGrid(a_, b_, std::move(nodes));
}

bool TimeGrid::same_nodes(const TimeGrid& other, double tol) const {
    if (nodes_.size() != other.nodes_.size()) return false;
    for (size_t i = 0; i < nodes_.size(); ++i)
        if (std::abs(nodes_[i] - other.nodes_[i]) > tol) return false;
    return true;
}

Curve::Curve(TimeGrid g, std::vector<Vec> vals, Interp ip)
    : grid(std::move(g)), values(std::move(vals)), interp(ip) {
    if (values.size() != grid.nodes().size())
        throw structural_error("Curve: one value per node required");
    if (values.empty() || values.front().empty()) throw structural_error("Curve: empty values");
    dim = static_cast<int>(values.front().size());
    for (const auto& v : values)
        if (static_cast<int>(v.size()) != dim) throw structural_error("Curve: ragged values");
}

Curve Curve::scalar(TimeGrid g, std::vector<double> vals, Interp ip) {
    std::vector<Vec> vv(vals.size());
    for (size_t i = 0; i < vals.size(); ++i) vv[i] = {vals[i]};
    return Curve(std::move(g), std::move(vv), ip);
}

Vec Curve::eval(double t) const {
    const int k = grid.cell_of(t);
    const auto ku = static_cast<size_t>(k);
    if (interp == Interp::RightConstant) {
        // right continuous: values[k] on [t_k, t_{k+1}); t = b yields values[N]
        if (t >= grid.b()) return values.back();
        return values[ku];
    }
    const double t0 = grid.node(k), t1 = grid.node(k + 1);
    const double w = (t - t0) / (t1 - t0);
    Vec r(values[ku].size());
    for (size_t i = 0; i < r.size(); ++i)
        r[i] = (1.0 - w) * values[ku][i] + w * values[ku + 1][i];
    return r;
}

double Curve::eval1(double t) const {
    if (dim != 1) throw structural_error("Curve::eval1 on non-scalar curve");
    return eval(t)[0];
}

StepFunction::StepFunction(TimeGrid g, std::vector<Vec> vals)
    : grid(std::move(g)), cell_values(std::move(vals)) {
    if (static_cast<int>(cell_values.size()) != grid.cells())
        throw structural_error("StepFunction: one value per cell required");
    if (cell_values.empty() || cell_values.front().empty())
        throw structural_error("StepFunction: empty values");
    dim = static_cast<int>(cell_values.front().size());
    for (const auto& v : cell_values)
        if (static_cast<int>(v.size()) != dim) throw structural_error("StepFunction: ragged values");
}

StepFunction StepFunction::scalar(TimeGrid g, std::vector<double> vals) {
    std::vector<Vec> vv(vals.size());
    for (size_t i = 0; i < vals.size(); ++i) vv[i] = {vals[i]};
    return StepFunction(std::move(g), std::move(vv));
}

StepFunction StepFunction::constant(TimeGrid g, Vec v) {
    std::vector<Vec> vv(static_cast<size_t>(g.cells()), v);
    return StepFunction(std::move(g), std::move(vv));
}

Vec StepFunction::eval(double t) const {
    return cell_values[static_cast<size_t>(grid.cell_of(t))];
}

const Vec& StepFunction::at_node(int i) const {
    const int k = std::min(i, grid.cells() - 1);
    return cell_values[static_cast<size_t>(k)];
}

DiscreteMeasure::DiscreteMeasure(TimeGrid g, std::vector<double> dens, std::vector<Atom> at)
    : grid(std::move(g)), density(std::move(dens)), atoms(std::move(at)) {
    if (static_cast<int>(density.size()) != grid.cells())
        throw structural_error("DiscreteMeasure: one density per cell required");
    for (double d : density)
        if (!(d >= 0.0) || !finite(d)) throw structural_error("DiscreteMeasure: negative density");
    for (const auto& a : atoms) {
        if (a.node < 0 || a.node >= static_cast<int>(grid.nodes().size()))
            throw structural_error("DiscreteMeasure: atom node out of range");
        if (!(a.mass >= 0.0) || !finite(a.mass))
            throw structural_error("DiscreteMeasure: negative atom mass");
    }
}

DiscreteMeasure DiscreteMeasure::lebesgue(TimeGrid g) {
    std::vector<double> dens(static_cast<size_t>(g.cells()), 1.0);
    return DiscreteMeasure(std::move(g), std::move(dens));
}

double DiscreteMeasure::total() const {
    std::vector<double> parts;
    parts.reserve(density.size() + atoms.size());
    for (int k = 0; k < grid.cells(); ++k) parts.push_back(cell_mass(k));
    for (const auto& a : atoms) parts.push_back(a.mass);
    return pairwise_sum(parts);
}

double quadrature(std::span<const double> cell_samples, const DiscreteMeasure& m) {
    if (m.has_atoms())
        throw structural_error("quadrature: measure has atoms, node samples required");
    return quadrature(cell_samples, {}, m);
}

double quadrature(std::span<const double> cell_samples, std::span<const double> node_samples,
                  const DiscreteMeasure& m) {
    const size_t n_cells = static_cast<size_t>(m.grid.cells());
    if (cell_samples.size() != n_cells)
        throw structural_error("quadrature: cell sample count mismatch");
    if (m.has_atoms() && node_samples.size() != m.grid.nodes().size())
        throw structural_error("quadrature: node sample count mismatch");
    std::vector<double> parts;
    parts.reserve(n_cells + m.atoms.size());
    for (size_t k = 0; k < n_cells; ++k) {
        const double mass = m.cell_mass(static_cast<int>(k));
        if (mass == 0.0) {
            parts.push_back(0.0);  // null cells contribute nothing, even for +inf samples
        } else {
            parts.push_back(cell_samples[k] == kInf ? kInf : cell_samples[k] * mass);
        }
    }
    for (const auto& a : m.atoms) {
        if (a.mass == 0.0) {
            parts.push_back(0.0);
        } else {
            const double g = node_samples[static_cast<size_t>(a.node)];
            parts.push_back(g == kInf ? kInf : g * a.mass);
        }
    }
    return pairwise_sum(parts);
}

Vec quadrature_vec(const std::vector<Vec>& cell_samples, const DiscreteMeasure& m) {
    if (static_cast<int>(cell_samples.size()) != m.grid.cells())
        throw structural_error("quadrature_vec: cell sample count mismatch");
    if (m.has_atoms()) throw structural_error("quadrature_vec: atoms unsupported here");
    const size_t dim = cell_samples.empty() ? 0 : cell_samples.front().size();
    Vec out(dim, 0.0);
    std::vector<double> parts(cell_samples.size());
    for (size_t i = 0; i < dim; ++i) {
        for (size_t k = 0; k < cell_samples.size(); ++k)
            parts[k] = cell_samples[k][i] * m.cell_mass(static_cast<int>(k));
        out[i] = pairwise_sum(parts);
    }
    return out;
}

StepFunction curve_derivative(const Curve& x) {
    if (x.interp != Interp::PiecewiseLinear)
        throw structural_error("curve_derivative: unsupported interpolation (need piecewise-linear)");
    std::vector<Vec> slopes(static_cast<size_t>(x.grid.cells()));
    for (int k = 0; k < x.grid.cells(); ++k) {
        const double h = x.grid.width(k);
        slopes[static_cast<size_t>(k)] =
            scale(1.0 / h, sub(x.values[static_cast<size_t>(k) + 1], x.values[static_cast<size_t>(k)]));
    }
    return StepFunction(x.grid, std::move(slopes));
}

Curve cumulative_integral(const StepFunction& y, const Vec& x0) {
    if (static_cast<int>(x0.size()) != y.dim)
        throw structural_error("cumulative_integral: initial value dimension mismatch");
    std::vector<Vec> vals(y.grid.nodes().size());
    vals[0] = x0;
    for (int k = 0; k < y.grid.cells(); ++k)
        vals[static_cast<size_t>(k) + 1] =
            axpy(vals[static_cast<size_t>(k)], y.grid.width(k), y.at_cell(k));
    return Curve(y.grid, std::move(vals), Interp::PiecewiseLinear);
}

double lp_norm(const StepFunction& y, double p, const DiscreteMeasure& m) {
    if (!(p >= 1.0)) throw structural_error("lp_norm: p must satisfy p >= 1");
    if (!y.grid.same_nodes(m.grid)) throw structural_error("lp_norm: grid mismatch");
    if (p == kInf) {
        double ess = 0.0;
        for (int k = 0; k < y.grid.cells(); ++k)
            if (m.cell_mass(k) > 0.0) ess = std::max(ess, norm2(y.at_cell(k)));
        for (const auto& a : m.atoms)
            if (a.mass > 0.0) ess = std::max(ess, norm2(y.at_node(a.node)));
        return ess;
    }
    std::vector<double> cell(static_cast<size_t>(y.grid.cells()));
    for (int k = 0; k < y.grid.cells(); ++k)
        cell[static_cast<size_t>(k)] = std::pow(norm2(y.at_cell(k)), p);
    if (!m.has_atoms()) return std::pow(quadrature(cell, m), 1.0 / p);
    std::vector<double> node(y.grid.nodes().size());
    for (size_t i = 0; i < node.size(); ++i)
        node[i] = std::pow(norm2(y.at_node(static_cast<int>(i))), p);
    return std::pow(quadrature(cell, node, m), 1.0 / p);
}

DiscreteMeasure refine_measure(const DiscreteMeasure& m, const TimeGrid& finer) {
    std::vector<double> dens(static_cast<size_t>(finer.cells()));
    for (int k = 0; k < finer.cells(); ++k) {
        const int parent = m.grid.cell_of(finer.midpoint(k));
        dens[static_cast<size_t>(k)] = m.density[static_cast<size_t>(parent)];
    }
    std::vector<Atom> atoms;
    atoms.reserve(m.atoms.size());
    for (const auto& a : m.atoms) {
        const double t = m.grid.node(a.node);
        const auto& nn = finer.nodes();
        const auto it = std::lower_bound(nn.begin(), nn.end(), t);
        if (it == nn.end() || *it != t)
            throw structural_error("refine_measure: atom instant is not a node of the finer grid");
        atoms.push_back({static_cast<int>(it - nn.begin()), a.mass});
    }
    return DiscreteMeasure(finer, std::move(dens), std::move(atoms));
}

}  // namespace nsvar
