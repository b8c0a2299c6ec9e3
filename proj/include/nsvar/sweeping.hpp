#ifndef NSVAR_SWEEPING_HPP
#define NSVAR_SWEEPING_HPP

#include "nsvar/grid.hpp"
#include "nsvar/report.hpp"
#include "nsvar/sets.hpp"

namespace nsvar {

// Discrete BV solution of the sweeping process: node values of the state,
// the reference measure nu (Lebesgue plus a unit atom per realized jump),
// and the density dx/dnu split into its absolutely continuous part (per
// cell) and its atomic part (per atom of nu).
struct BVSolution {
    Curve x;                        // node values; linear between nodes off jump cells
    std::vector<bool> jump_cell;    // cell ends with an atom at its right node
    DiscreteMeasure nu;
    StepFunction density;           // dx/dnu against the Lebesgue part
    std::vector<Vec> atom_density;  // dx/dnu at the atoms, aligned with nu.atoms

    // right-continuous reading x(t) = x(t_k) on [t_k, t_{k+1})
    Vec eval_rc(double t) const;
    // hybrid reading: linear between nodes, constant on jump cells
    Vec eval_hybrid(double t) const;
};

// x_{k+1} = proj_{C(t_{k+1})}(x_k). Jump instants of C must be grid nodes;
// displacements at those instants are recorded as atoms of nu.
BVSolution catching_up(const MovingSet& C, const Vec& x0, const TimeGrid& grid);

// Pointwise certificate: dx/dnu(t) in -N_{C(t)}(x(t)) nu-a.e., tested via
// support functions at the instants where the density is nonzero.
Report check_differential_measure(const MovingSet& C, const BVSolution& sol, double tol);

// Continuous test curves with values in C(t): projections of fixed anchors,
// plus convex combinations. Curves failing containment are discarded.
std::vector<Curve> generate_test_selections(const MovingSet& C, int count, const TimeGrid& grid,
                                            uint64_t seed = 0);

// Variational certificate: int <dx/dnu, y - x> dnu >= -tol for every test
// selection y.
Report check_integral_solution(const MovingSet& C, const BVSolution& sol,
                               const std::vector<Curve>& selections, double tol);

struct EquivalenceTolerances {
    double coupling = 1.0;     // both checkers get coupling * (kappa + 1) * h
    double dm_override = -1.0;  // explicit per-checker tolerances; negative = coupled
    double integral_override = -1.0;
    int selections = 24;
    uint64_t seed = 0;
};

// Runs both solution checkers; the verdicts must agree at coupled
// tolerances. Disagreement at matched tolerances is flagged as a
// equivalence breach; at mismatched ones it is inconclusive.
Report equivalence_report(const MovingSet& C, const BVSolution& sol,
                          const EquivalenceTolerances& tols = {});

// kappa estimate from support-function differences over node pairs without
// jumps in between.
double hausdorff_lipschitz_estimate(const MovingSet& C, const TimeGrid& grid, int samples = 16,
                                    uint64_t seed = 0);

}  // namespace nsvar

#endif
