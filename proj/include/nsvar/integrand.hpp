#ifndef NSVAR_INTEGRAND_HPP
#define NSVAR_INTEGRAND_HPP

#include <functional>
#include <optional>
#include <string>

#include "nsvar/common.hpp"
#include "nsvar/rng.hpp"

namespace nsvar {

// Compact coordinate box; the region a numeric solver is allowed to search.
struct Box {
    Vec lo, hi;

    Box() = default;
    Box(Vec l, Vec h);

    int dim() const { return static_cast<int>(lo.size()); }
    double width(int i) const { return hi[static_cast<size_t>(i)] - lo[static_cast<size_t>(i)]; }
    double max_width() const;
    Vec clamp(Vec x) const;
    bool touches_boundary(const Vec& x, double rel_tol = 1e-7) const;
    static Box cube(int dim, double lo, double hi);
};

// Convex hull descriptor for (sub)gradient sets: the hull of finitely many
// extreme points. Exact for polyhedral subdifferentials and singletons;
// gradient sets with curved boundary (Euclidean-norm balls in dimension
// >= 2) are represented by a polyhedral inner approximation.
struct SubdiffSet {
    std::vector<Vec> extremes;

    bool single() const { return extremes.size() == 1; }
    // 1D helpers
    double lo1() const;
    double hi1() const;
};

// Time-dependent extended-real integrand f_t(x). eval is mandatory and never
// returns NaN or -inf; +inf encodes points outside dom f_t. Everything else
// is optional analytic structure the checkers exploit when present.
struct IntegrandOracle {
    std::string name;
    int dim = 1;
    std::function<double(double, const Vec&)> eval;
    std::function<double(double, const Vec&)> conj;           // f_t^*(s), optional
    std::function<SubdiffSet(double, const Vec&)> subdiff;    // optional
    std::function<double(double)> lipschitz_modulus;          // k(t), optional
    std::function<Box(double)> search_box;                    // mandatory
    bool convex = true;
    Box dual_box;  // recommended sampling region for dual points (tests, CLI)

    double operator()(double t, const Vec& x) const { return eval(t, x); }
    bool has_conj() const { return static_cast<bool>(conj); }
    bool has_subdiff() const { return static_cast<bool>(subdiff); }
    bool has_modulus() const { return static_cast<bool>(lipschitz_modulus); }
};

struct SolverOptions {
    int lattice_1d = 2049;
    int refine_iters = 160;
    double tol = 1e-9;
    uint64_t seed = 0;
};

struct MinResult {
    double value = kInf;
    Vec argmin;
    bool boundary = false;  // minimizer active at the search-box boundary
};

struct ConjValue {
    double value = -kInf;
    bool boundary = false;  // maximizer active at the search-box boundary
    Vec argmax;
};

// Generic minimization over a box: dense lattice scan, then golden-section
// (1D) or compass-search (nD) refinement from the best starts.
MinResult minimize_in_box(const std::function<double(const Vec&)>& g, const Box& box,
                          const SolverOptions& opts = {});

// m_f(t) with the analytic-subdifferential fast path for convex 1D oracles.
MinResult infimal_value(const IntegrandOracle& f, double t, const SolverOptions& opts = {});

// Legendre-Fenchel value sup_x <s,x> - f_t(x) computed numerically over the
// search box; never consults the analytic conjugate.
ConjValue conjugate_numeric(const IntegrandOracle& f, double t, const Vec& s,
                            const SolverOptions& opts = {});

// Analytic conjugate when available, numeric transform otherwise.
ConjValue conjugate_value(const IntegrandOracle& f, double t, const Vec& s,
                          const SolverOptions& opts = {});

// eta = f_t(x) + f_t^*(s) - <s,x> (>= 0 for convex f by Young-Fenchel).
double young_fenchel_residual(const IntegrandOracle& f, double t, const Vec& x, const Vec& s,
                              const SolverOptions& opts = {});

// Membership s in eps-subdifferential of f_t at x via the residual
// characterization; valid for convex oracles only.
bool eps_subdiff_contains(const IntegrandOracle& f, double t, const Vec& x, const Vec& s,
                          double eps, double tol = 1e-9, const SolverOptions& opts = {});

// Extreme points of the subdifferential hull collected at x and at compass
// probes within the given radius; a sampled stand-in for the Clarke set of
// piecewise-smooth integrands near kinks.
SubdiffSet subdiff_hull_sampled(const IntegrandOracle& f, double t, const Vec& x, double radius);

}  // namespace nsvar

#endif
