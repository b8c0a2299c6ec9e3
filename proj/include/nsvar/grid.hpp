#ifndef NSVAR_GRID_HPP
#define NSVAR_GRID_HPP

#include <span>
#include <vector>

#include "nsvar/common.hpp"

namespace nsvar {

// Partition a = t_0 < t_1 < ... < t_N = b. Immutable after construction.
class TimeGrid {
  public:
    TimeGrid(double a, double b, std::vector<double> nodes);

    static TimeGrid uniform(double a, double b, int cells);
    static TimeGrid from_nodes(std::vector<double> nodes);

    double a() const { return a_; }
    double b() const { return b_; }
    const std::vector<double>& nodes() const { return nodes_; }
    int cells() const { return static_cast<int>(nodes_.size()) - 1; }
    double node(int i) const { return nodes_[static_cast<size_t>(i)]; }
    double width(int k) const { return nodes_[static_cast<size_t>(k) + 1] - nodes_[static_cast<size_t>(k)]; }
    double midpoint(int k) const { return 0.5 * (nodes_[static_cast<size_t>(k)] + nodes_[static_cast<size_t>(k) + 1]); }

    // Index of the cell containing t, with [t_k, t_{k+1}) half-open and
    // t = b mapped to the last cell.
    int cell_of(double t) const;

    // Grid with one extra node inserted (no-op if t is already a node).
    TimeGrid with_node(double t) const;

    bool same_nodes(const TimeGrid& other, double tol = 0.0) const;

  private:
    double a_, b_;
    std::vector<double> nodes_;
};

enum class Interp { PiecewiseLinear, RightConstant };

// Grid-sampled arc in R^n. PiecewiseLinear interpolates between nodes;
// RightConstant takes the left node's value on [t_k, t_{k+1}).
struct Curve {
    TimeGrid grid;
    std::vector<Vec> values;  // one per node
    Interp interp = Interp::PiecewiseLinear;
    int dim = 1;

    Curve(TimeGrid g, std::vector<Vec> vals, Interp ip = Interp::PiecewiseLinear);

    static Curve scalar(TimeGrid g, std::vector<double> vals, Interp ip = Interp::PiecewiseLinear);

    Vec eval(double t) const;
    double eval1(double t) const;  // dim 1 convenience
    const Vec& at_node(int i) const { return values[static_cast<size_t>(i)]; }
};

// Element of the decomposable space: one value per cell, right continuous
// as a function (value at node t_k is the value on [t_k, t_{k+1})).
struct StepFunction {
    TimeGrid grid;
    std::vector<Vec> cell_values;
    int dim = 1;

    StepFunction(TimeGrid g, std::vector<Vec> vals);

    static StepFunction scalar(TimeGrid g, std::vector<double> vals);
    static StepFunction constant(TimeGrid g, Vec v);

    const Vec& at_cell(int k) const { return cell_values[static_cast<size_t>(k)]; }
    Vec eval(double t) const;
    // Value used for an atom sitting at node i (cell starting at the node;
    // the terminal node takes the last cell).
    const Vec& at_node(int i) const;
};

struct Atom {
    int node;     // node index in the grid
    double mass;  // nonnegative
};

// Reference measure on [a,b]: absolutely continuous part as a per-cell
// density against Lebesgue, plus finitely many atoms at nodes.
struct DiscreteMeasure {
    TimeGrid grid;
    std::vector<double> density;  // one per cell, >= 0
    std::vector<Atom> atoms;

    DiscreteMeasure(TimeGrid g, std::vector<double> dens, std::vector<Atom> at = {});

    static DiscreteMeasure lebesgue(TimeGrid g);

    double cell_mass(int k) const { return density[static_cast<size_t>(k)] * grid.width(k); }
    double total() const;
    bool has_atoms() const { return !atoms.empty(); }
};

// Midpoint-rule integral of the density part plus exact atom evaluation.
// cell_samples holds one integrand sample per cell (at the midpoint by
// convention); node_samples one per node, required only when atoms exist.
double quadrature(std::span<const double> cell_samples, const DiscreteMeasure& m);
double quadrature(std::span<const double> cell_samples, std::span<const double> node_samples,
                  const DiscreteMeasure& m);
Vec quadrature_vec(const std::vector<Vec>& cell_samples, const DiscreteMeasure& m);

// Per-cell slopes of a piecewise-linear curve.
StepFunction curve_derivative(const Curve& x);

// x(t) = x0 + int_a^t y; inverse of curve_derivative at the nodes.
Curve cumulative_integral(const StepFunction& y, const Vec& x0);

// (int |y|^p dnu)^(1/p); essential supremum for p = inf. |.| is Euclidean.
double lp_norm(const StepFunction& y, double p, const DiscreteMeasure& m);

// Refine m onto a grid whose nodes contain m's nodes; densities are
// inherited from the parent cell, atoms keep their instants.
DiscreteMeasure refine_measure(const DiscreteMeasure& m, const TimeGrid& finer);

}  // namespace nsvar

#endif
