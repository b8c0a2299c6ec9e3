#ifndef NSVAR_BOLZA_HPP
#define NSVAR_BOLZA_HPP

#include <functional>

#include "nsvar/clarke.hpp"
#include "nsvar/grid.hpp"
#include "nsvar/integrand.hpp"
#include "nsvar/report.hpp"
#include "nsvar/sets.hpp"

namespace nsvar {

// Endpoint cost ell(x(a), x(b)), locally Lipschitz; grad is optional and
// takes the concatenated pair (u, w) in R^{2n}.
struct EndpointCost {
    std::function<double(const Vec&, const Vec&)> eval;
    std::function<Vec(const Vec&, const Vec&)> grad;

    static EndpointCost zero();
    bool has_grad() const { return static_cast<bool>(grad); }
};

// min ell(x(a), x(b)) + int_a^b f(t, x(t), xdot(t)) dt over arcs with
// (x(a), x(b)) in S. The running cost f is an integrand on R^{2n} whose
// argument is the concatenation (x, v).
struct BolzaProblem {
    int n = 1;
    double a = 0.0, b = 1.0;
    EndpointCost ell;
    IntegrandOracle f;  // dim 2n
    ConvexSet S;        // subset of R^{2n}
    double p = 2.0;
};

// Arc stored as (initial value, derivative); the state curve is the exact
// cumulative integral, so membership in the arc class holds by construction.
struct Arc {
    Vec u;
    StepFunction y;
    Curve x;

    static Arc make(Vec u, StepFunction y);
    static Arc constant(const TimeGrid& grid, Vec value);
    // straight line between two endpoint values
    static Arc line(const TimeGrid& grid, const Vec& from, const Vec& to);
    Vec endpoint_pair() const;  // (x(a), x(b)) concatenated
};

struct Adjoint {
    Curve p_curve;      // costate at the nodes
    StepFunction pdot;  // per-cell slope; p is its exact backward integral
};

double objective(const BolzaProblem& P, const Arc& arc);

// K0 = M + ||k||_1 from sampled endpoint-cost difference quotients and the
// integrated modulus; penalty weights above K0 make the constraint exact.
double estimate_K0(const BolzaProblem& P, const Arc& anchor, double delta = 0.25,
                   uint64_t seed = 0);

double penalized_objective(const BolzaProblem& P, const Arc& arc, double K);

struct SolveOptions {
    int max_iters = 30000;
    double tol = 1e-11;          // stop when the windowed J_K decrease falls below this
    int window = 400;
    double diminishing_c = 0.5;  // safeguard step c/sqrt(j) along -g/|g|
    int snap_every = 1;          // try the exact-penalty endpoint correction this often
    uint64_t seed = 0;
};

struct SolveResult {
    Arc arc;
    Report report;  // kind "bolza_solve"; pass == stabilized before the cap
};

// Descent on the discretized J_K over (u, y): Armijo-adapted subgradient
// steps with a diminishing-step fallback at kinks, plus the linear endpoint
// correction from the penalization argument whenever it lowers J_K.
SolveResult solve(const BolzaProblem& P, const Arc& init, double K, const SolveOptions& opts = {});

struct AdjointOptions {
    double sample_radius = 1e-3;  // kink-widening radius for subdifferential hulls
    double residual_cap = 5e-2;
    SolverOptions solver;
};

struct AdjointResult {
    Adjoint adjoint;
    Report report;  // kind "adjoint_reconstruct"; residual = worst cell mismatch
};

// Cellwise selection (xstar_k, p_k) from the subdifferential hull of f,
// glued by backward integration; the terminal costate is chosen to minimize
// the worst mismatch, seeded at the transversality guess.
AdjointResult adjoint_reconstruct(const BolzaProblem& P, const Arc& arc,
                                  const AdjointOptions& opts = {});

struct EulerLagrangeConfig {
    double tol = 1e-2;
    ClarkeConfig clarke;
    int normal_samples = 64;    // proximal-normal directions for N_S
    double grad_radius = 1e-4;  // endpoint-cost gradient sampling radius
    uint64_t seed = 0;
};

// (pdot, p) in Clarke subdifferential of f along the arc, and
// (p(a), -p(b)) in  sampled dl + N_S at the endpoints.
Report euler_lagrange_residual(const BolzaProblem& P, const Arc& arc, const Adjoint& adj,
                               const EulerLagrangeConfig& cfg = {});

}  // namespace nsvar

#endif
