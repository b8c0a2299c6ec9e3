#include "nsvar/sets.hpp"

#include <algorithm>
#include <cmath>

namespace nsvar {

Vec ConvexSet::proj(const Vec& z) const {
    if (static_cast<int>(z.size()) != dim) throw structural_error("ConvexSet: point dimension mismatch");
    return project(z);
}

double ConvexSet::dist(const Vec& z) const { return norm2(sub(z, proj(z))); }

ConvexSet ConvexSet::interval(double lo, double hi) {
    if (!(lo <= hi)) throw structural_error("ConvexSet::interval: lo > hi");
    ConvexSet c;
    c.dim = 1;
    c.project = [lo, hi](const Vec& z) { return Vec{std::clamp(z[0], lo, hi)}; };
    c.support = [lo, hi](const Vec& s) { return s[0] >= 0.0 ? s[0] * hi : s[0] * lo; };
    return c;
}

ConvexSet ConvexSet::box(Vec lo, Vec hi) {
    if (lo.size() != hi.size()) throw structural_error("ConvexSet::box: dimension mismatch");
    for (size_t i = 0; i < lo.size(); ++i)
        if (!(lo[i] <= hi[i])) throw structural_error("ConvexSet::box: lo > hi");
    ConvexSet c;
    c.dim = static_cast<int>(lo.size());
    c.project = [lo, hi](const Vec& z) {
        Vec r(z.size());
        for (size_t i = 0; i < z.size(); ++i) r[i] = std::clamp(z[i], lo[i], hi[i]);
        return r;
    };
    c.support = [lo, hi](const Vec& s) {
        double v = 0.0;
        for (size_t i = 0; i < s.size(); ++i) v += s[i] >= 0.0 ? s[i] * hi[i] : s[i] * lo[i];
        return v;
    };
    return c;
}

ConvexSet ConvexSet::ball(Vec center, double radius) {
    if (!(radius >= 0.0)) throw structural_error("ConvexSet::ball: negative radius");
    ConvexSet c;
    c.dim = static_cast<int>(center.size());
    c.project = [center, radius](const Vec& z) {
        Vec d = sub(z, center);
        const double n = norm2(d);
        if (n <= radius) return z;
        return axpy(center, radius / n, d);
    };
    c.support = [center, radius](const Vec& s) { return dot(s, center) + radius * norm2(s); };
    return c;
}

ConvexSet ConvexSet::point(Vec at) {
    ConvexSet c;
    c.dim = static_cast<int>(at.size());
    c.project = [at](const Vec&) { return at; };
    c.support = [at](const Vec& s) { return dot(s, at); };
    return c;
}

ConvexSet ConvexSet::whole_space(int dim) {
    ConvexSet c;
    c.dim = dim;
    c.project = [](const Vec& z) { return z; };
    c.support = [](const Vec& s) { return norm2(s) == 0.0 ? 0.0 : kInf; };
    return c;
}

namespace {

Vec project_halfspace(const Vec& z, const Vec& n, double off) {
    const double viol = dot(n, z) - off;
    if (viol <= 0.0) return z;
    const double nn = dot(n, n);
    return axpy(z, -viol / nn, n);
}

}  // namespace

ConvexSet ConvexSet::halfspaces(std::vector<Vec> normals, Vec offsets, Vec bbox_lo, Vec bbox_hi) {
    if (normals.size() != offsets.size())
        throw structural_error("ConvexSet::halfspaces: normals/offsets mismatch");
    const int dim = static_cast<int>(bbox_lo.size());
    auto bbox = ConvexSet::box(bbox_lo, bbox_hi);
    ConvexSet c;
    c.dim = dim;
    c.project = [normals, offsets, bbox](const Vec& z) {
        // Dykstra over halfspaces plus the bounding box
        const size_t m = normals.size() + 1;
        Vec x = z;
        std::vector<Vec> corr(m, zeros(static_cast<int>(z.size())));
        for (int sweep = 0; sweep < 256; ++sweep) {
            double moved = 0.0;
            for (size_t i = 0; i < m; ++i) {
                Vec y = add(x, corr[i]);
                Vec px = (i < normals.size()) ? project_halfspace(y, normals[i], offsets[i])
                                              : bbox.project(y);
                corr[i] = sub(y, px);
                moved += norm2(sub(px, x));
                x = std::move(px);
            }
            if (moved < 1e-14) break;
        }
        return x;
    };
    c.support = [c_proj = c.project, bbox_lo, bbox_hi](const Vec& s) {
        // projected ascent on <s, .>; restarted from box corners biased by s
        double best = -kInf;
        for (int start = 0; start < 3; ++start) {
            Vec x(bbox_lo.size());
            for (size_t i = 0; i < x.size(); ++i) {
                const double mid = 0.5 * (bbox_lo[i] + bbox_hi[i]);
                const double ext = s[i] >= 0.0 ? bbox_hi[i] : bbox_lo[i];
                x[i] = start == 0 ? ext : (start == 1 ? mid : 0.5 * (mid + ext));
            }
            x = c_proj(x);
            double step = 0.0;
            for (size_t i = 0; i < x.size(); ++i) step = std::max(step, bbox_hi[i] - bbox_lo[i]);
            for (int it = 0; it < 400; ++it) {
                Vec y = c_proj(axpy(x, step, s));
                if (dot(s, y) <= dot(s, x) + 1e-15) step *= 0.5;
                x = std::move(y);
                if (step < 1e-12) break;
            }
            best = std::max(best, dot(s, x));
        }
        return best;
    };
    return c;
}

ConvexSet ConvexSet::affine(std::vector<Vec> rows, Vec rhs, int dim) {
    if (rows.size() != rhs.size()) throw structural_error("ConvexSet::affine: rows/rhs mismatch");
    const size_t m = rows.size();
    ConvexSet c;
    c.dim = dim;
    c.project = [rows, rhs, m](const Vec& z) {
        // z - A^T (A A^T)^{-1} (A z - rhs), Gaussian elimination on the small Gram matrix
        std::vector<Vec> G(m, Vec(m));
        Vec r(m);
        for (size_t i = 0; i < m; ++i) {
            r[i] = dot(rows[i], z) - rhs[i];
            for (size_t j = 0; j < m; ++j) G[i][j] = dot(rows[i], rows[j]);
        }
        // solve G lambda = r
        Vec lam = r;
        std::vector<Vec> A = G;
        for (size_t col = 0; col < m; ++col) {
            size_t piv = col;
            for (size_t i = col + 1; i < m; ++i)
                if (std::abs(A[i][col]) > std::abs(A[piv][col])) piv = i;
            std::swap(A[col], A[piv]);
            std::swap(lam[col], lam[piv]);
            if (std::abs(A[col][col]) < 1e-14)
                throw oracle_error("ConvexSet::affine: rank-deficient constraint rows");
            for (size_t i = col + 1; i < m; ++i) {
                const double f = A[i][col] / A[col][col];
                for (size_t j = col; j < m; ++j) A[i][j] -= f * A[col][j];
                lam[i] -= f * lam[col];
            }
        }
        for (size_t col = m; col-- > 0;) {
            for (size_t j = col + 1; j < m; ++j) lam[col] -= A[col][j] * lam[j];
            lam[col] /= A[col][col];
        }
        Vec out = z;
        for (size_t i = 0; i < m; ++i) out = axpy(out, -lam[i], rows[i]);
        return out;
    };
    c.support = [proj = c.project, dim](const Vec& s) {
        // finite only when s is orthogonal to the subspace direction
        Vec origin = proj(zeros(dim));
        Vec probe = proj(s);  // proj is affine; probe-origin spans nothing unless s has a tangential part
        const double tangential = std::abs(dot(s, sub(probe, origin)));
        if (tangential > 1e-10 * (1.0 + dot(s, s))) return kInf;
        return dot(s, origin);
    };
    return c;
}

ConvexSet ConvexSet::product(const ConvexSet& A, const ConvexSet& B) {
    ConvexSet c;
    c.dim = A.dim + B.dim;
    const int da = A.dim, db = B.dim;
    c.project = [A, B, da, db](const Vec& z) {
        Vec za(z.begin(), z.begin() + da), zb(z.begin() + da, z.end());
        Vec pa = A.project(za), pb = B.project(zb);
        Vec out;
        out.reserve(static_cast<size_t>(da + db));
        out.insert(out.end(), pa.begin(), pa.end());
        out.insert(out.end(), pb.begin(), pb.end());
        return out;
    };
    c.support = [A, B, da](const Vec& s) {
        Vec sa(s.begin(), s.begin() + da), sb(s.begin() + da, s.end());
        return ext_add(A.support(sa), B.support(sb));
    };
    return c;
}

bool MovingSet::jumps_in(double t0, double t1) const {
    for (double tj : jump_times)
        if (tj > std::min(t0, t1) && tj <= std::max(t0, t1)) return true;
    return false;
}

}  // namespace nsvar
