#ifndef NSVAR_SETS_HPP
#define NSVAR_SETS_HPP

#include <functional>
#include <vector>

#include "nsvar/common.hpp"

namespace nsvar {

// Closed convex set given through a metric projection and a support
// function. contains/dist are derived from the projection.
struct ConvexSet {
    int dim = 1;
    std::function<Vec(const Vec&)> project;
    std::function<double(const Vec&)> support;  // sigma_C(s) = sup_{x in C} <s,x>

    Vec proj(const Vec& z) const;
    double dist(const Vec& z) const;
    bool contains(const Vec& z, double tol) const { return dist(z) <= tol; }

    static ConvexSet interval(double lo, double hi);
    static ConvexSet box(Vec lo, Vec hi);
    static ConvexSet ball(Vec center, double radius);
    static ConvexSet point(Vec at);
    static ConvexSet whole_space(int dim);
    // {z : <normals[i], z> <= offsets[i]} intersected with a bounding box
    // that keeps the set bounded. Projection by Dykstra's scheme; support by
    // projected ascent.
    static ConvexSet halfspaces(std::vector<Vec> normals, Vec offsets, Vec bbox_lo, Vec bbox_hi);
    // {z : A z = rhs} (affine subspace), dense solve of the normal equations.
    static ConvexSet affine(std::vector<Vec> rows, Vec rhs, int dim);
    // Cartesian product (used for endpoint-pair constraints).
    static ConvexSet product(const ConvexSet& A, const ConvexSet& B);
};

// Time-dependent closed convex set C(t). Motion is Hausdorff-continuous
// between consecutive jump instants.
struct MovingSet {
    int dim = 1;
    std::function<ConvexSet(double)> at;
    std::vector<double> jump_times;  // ordered, strictly inside (a,b)
    double diam_bound = 0.0;         // sup_t diam C(t)

    Vec project(double t, const Vec& z) const { return at(t).proj(z); }
    double support(double t, const Vec& s) const { return at(t).support(s); }
    bool contains(double t, const Vec& z, double tol) const { return at(t).contains(z, tol); }
    bool jumps_in(double t0, double t1) const;  // any jump instant in (t0, t1)
};

}  // namespace nsvar

#endif
