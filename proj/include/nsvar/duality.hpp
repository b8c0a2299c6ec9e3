#ifndef NSVAR_DUALITY_HPP
#define NSVAR_DUALITY_HPP

#include <utility>

#include "nsvar/grid.hpp"
#include "nsvar/integrand.hpp"
#include "nsvar/report.hpp"

namespace nsvar {

// I_f(x) = int f_t(x(t)) dmu over step functions on the grid of `measure`.
// The grid is the finite model of a decomposable space: any cell value
// can be replaced independently without leaving the class.
struct IntegralFunctional {
    IntegrandOracle f;
    DiscreteMeasure measure;
    double p = 2.0;

    // +inf-absorbing evaluation; cell integrands are sampled at midpoints.
    double eval_step(const StepFunction& x, const SolverOptions& opts = {}) const;
    // Evaluation along a curve on a (possibly finer) grid; the measure is
    // refined by density inheritance.
    double eval_curve(const Curve& x, const SolverOptions& opts = {}) const;
};

// Nonnegative error density certifying eps-subgradient membership.
struct EpsWitness {
    std::vector<double> ell;  // per cell
    double total = 0.0;       // int ell dmu
    bool infinite = false;
};

// int m_f(t) dmu by midpoint sampling of the infimal value function.
double infimal_integral(const IntegralFunctional& F, const SolverOptions& opts = {});

struct SelectionOptions {
    int max_extra_nodes_factor = 32;  // refinement cap, relative to the base cell count
    SolverOptions solver;
};

// Piecewise-linear curve phi with f_t(phi(t)) <= alpha(t) at all nodes and
// cell midpoints, built from pointwise argmins with bisection repair.
// alpha must strictly dominate the computed m_f at the nodes.
Curve continuous_eps_selection(const IntegralFunctional& F, const Curve& alpha,
                               const SelectionOptions& opts = {});

struct InterchangeBudget {
    std::vector<double> eps_schedule = {1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6};
    double tol = 1e-6;
    double stall_gap = 1e-12;  // stop when the gap stops improving by this much
    SelectionOptions selection;
};

// Verifies inf over continuous curves of I_f equals int m_f dmu.
Report verify_interchange(const IntegralFunctional& F, const InterchangeBudget& budget = {});

struct ConjIntResult {
    double pointwise = 0.0;  // quadrature of f_t^*(s(t)), analytic-first route
    double direct = 0.0;     // per-cell supremum route, never the analytic conjugate
    Report report;
};

// Conjugate identity for the integral functional at the dual step function s.
ConjIntResult conjugate_of_integral(const IntegralFunctional& F, const StepFunction& s,
                                    double tol = 1e-5, const SolverOptions& opts = {});

// Membership s in eps-subdifferential of I_f at x, with the minimal witness
// (the cellwise Young-Fenchel residual).
std::pair<bool, EpsWitness> eps_subdiff_membership(const IntegralFunctional& F,
                                                   const StepFunction& x, const StepFunction& s,
                                                   double eps, double tol = 1e-9,
                                                   const SolverOptions& opts = {});

// x_bar built from per-cell argmins minimizes I_f over step functions;
// checked against int m_f and `trials` random step functions.
Report argmin_equivalence(const IntegralFunctional& F, int trials, uint64_t seed = 0,
                          const SolverOptions& opts = {});

// E_f(u) = int f_t(u) dmu.
double expected_value(const IntegrandOracle& f, const DiscreteMeasure& m, const Vec& u);

// Does the cellwise selection v certify s = int v dmu in d_eps E_f(u)?
std::pair<bool, EpsWitness> expected_subgradient_witness_check(const IntegrandOracle& f,
                                                               const DiscreteMeasure& m,
                                                               const Vec& u, const StepFunction& v,
                                                               double eps, double tol = 1e-9,
                                                               const SolverOptions& opts = {});

// (E_f)^*(s) two ways: direct supremum over the box against the selection
// route inf { I_{f*}(v) : int v dmu = s }.
Report expected_conjugate(const IntegrandOracle& f, const DiscreteMeasure& m, const Vec& s,
                          const Box& box, double tol = 1e-5, const SolverOptions& opts = {});

}  // namespace nsvar

#endif
