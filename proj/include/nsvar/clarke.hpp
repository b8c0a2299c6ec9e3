#ifndef NSVAR_CLARKE_HPP
#define NSVAR_CLARKE_HPP

#include <functional>

#include "nsvar/duality.hpp"
#include "nsvar/report.hpp"

namespace nsvar {

// Sampling plan for the limsup in the Clarke directional derivative
// dg(x)(v) = limsup_{y->x, t->0+} [g(y+tv) - g(y)]/t. No finite sampler
// converges for adversarial Lipschitz g; the estimator targets
// piecewise-C^1 specimens and reports non-stabilization instead of
// guessing.
struct ClarkeConfig {
    std::vector<double> radii = {1e-1, 1e-2, 1e-3, 1e-4};  // strictly decreasing
    int samples_per_radius = 200;
    std::vector<double> step_fractions = {1.0, 0.5, 0.25, 0.1};  // t as a fraction of the radius
    double stab_tol = 2.5e-2;  // two smallest radii must agree this closely
    double tol = 5e-2;         // membership / inequality tolerance
    int directions = 64;       // unit directions for membership in n > 1
    uint64_t seed = 0;
};

struct DirDerivResult {
    double value = 0.0;
    bool stabilized = true;
    std::vector<double> per_radius;
};

DirDerivResult clarke_dirderiv(const std::function<double(const Vec&)>& g, const Vec& x,
                               const Vec& v, const ClarkeConfig& cfg = {});

struct SubdiffMembershipResult {
    bool member = false;
    Vec worst_direction;
    double margin = 0.0;  // min over directions of dg(x)(v) - <s, v>
};

// s in Clarke subdifferential of g at x iff <s,v> <= dg(x)(v) for all v.
// Exact direction set {+1,-1} in 1D; quasi-uniform sampling otherwise
// (necessary-condition checking only, as the Report notes).
SubdiffMembershipResult clarke_membership(const std::function<double(const Vec&)>& g, const Vec& x,
                                          const Vec& s, const ClarkeConfig& cfg = {});

// Cellwise inclusion x*(t) in Clarke subdifferential of f_t at x(t).
Report integral_clarke_inclusion(const IntegralFunctional& F, const StepFunction& x,
                                 const StepFunction& s, const ClarkeConfig& cfg = {});

// dI_f(x)(v) <= int df_t(x(t))(v(t)) dmu, the integral-functional bound.
Report clarke_upper_bound_check(const IntegralFunctional& F, const StepFunction& x,
                                const StepFunction& v, const ClarkeConfig& cfg = {});

}  // namespace nsvar

#endif
