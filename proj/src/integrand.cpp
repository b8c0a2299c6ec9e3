#include "nsvar/integrand.hpp"

#include <algorithm>
#include <cmath>

namespace nsvar {

Box::Box(Vec l, Vec h) : lo(std::move(l)), hi(std::move(h)) {
    if (lo.size() != hi.size() || lo.empty()) throw structural_error("Box: bad bounds");
    for (size_t i = 0; i < lo.size(); ++i)
        if (!(lo[i] < hi[i])) throw structural_error("Box: lo must be strictly below hi");
}

double Box::max_width() const {
    double w = 0.0;
    for (int i = 0; i < dim(); ++i) w = std::max(w, width(i));
    return w;
}

Vec Box::clamp(Vec x) const {
    for (size_t i = 0; i < x.size(); ++i) x[i] = std::clamp(x[i], lo[i], hi[i]);
    return x;
}

bool Box::touches_boundary(const Vec& x, double rel_tol) const {
    for (size_t i = 0; i < x.size(); ++i) {
        const double margin = rel_tol * (hi[i] - lo[i]);
        if (x[i] - lo[i] <= margin || hi[i] - x[i] <= margin) return true;
    }
    return false;
}

Box Box::cube(int dim, double lo, double hi) {
    return Box(Vec(static_cast<size_t>(dim), lo), Vec(static_cast<size_t>(dim), hi));
}

double SubdiffSet::lo1() const {
    double m = kInf;
    for (const auto& e : extremes) m = std::min(m, e[0]);
    return m;
}

double SubdiffSet::hi1() const {
    double m = -kInf;
    for (const auto& e : extremes) m = std::max(m, e[0]);
    return m;
}

namespace {

// golden-section minimization on [a, b]; g may return +inf
Vec golden_refine_1d(const std::function<double(const Vec&)>& g, double a, double b, int iters) {
    constexpr double phi = 0.6180339887498949;
    double x1 = b - phi * (b - a);
    double x2 = a + phi * (b - a);
    double f1 = g({x1});
    double f2 = g({x2});
    for (int i = 0; i < iters && b - a > 1e-14 * (1.0 + std::abs(a) + std::abs(b)); ++i) {
        if (f1 <= f2) {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - phi * (b - a);
            f1 = g({x1});
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + phi * (b - a);
            f2 = g({x2});
        }
    }
    return {0.5 * (a + b)};
}

// compass search from x0 with per-coordinate steps, clamped to the box
MinResult compass_refine(const std::function<double(const Vec&)>& g, const Box& box, Vec x0,
                         Vec step, int iters) {
    MinResult best;
    best.argmin = box.clamp(std::move(x0));
    best.value = g(best.argmin);
    const int n = box.dim();
    for (int it = 0; it < iters; ++it) {
        bool improved = false;
        for (int i = 0; i < n; ++i) {
            for (double sgn : {1.0, -1.0}) {
                Vec y = best.argmin;
                y[static_cast<size_t>(i)] += sgn * step[static_cast<size_t>(i)];
                y = box.clamp(std::move(y));
                const double fy = g(y);
                if (fy < best.value) {
                    best.value = fy;
                    best.argmin = std::move(y);
                    improved = true;
                }
            }
        }
        if (!improved) {
            double maxstep = 0.0;
            for (auto& s : step) {
                s *= 0.5;
                maxstep = std::max(maxstep, s);
            }
            if (maxstep < 1e-13 * box.max_width()) break;
        }
    }
    return best;
}

int lattice_points_per_dim(int dim, const SolverOptions& opts) {
    switch (dim) {
        case 1: return opts.lattice_1d;
        case 2: return 65;
        case 3: return 25;
        default: return 11;
    }
}

}  // namespace

MinResult minimize_in_box(const std::function<double(const Vec&)>& g, const Box& box,
                          const SolverOptions& opts) {
    const int n = box.dim();
    const int m = lattice_points_per_dim(n, opts);

    if (n == 1) {
        const double lo = box.lo[0], hi = box.hi[0];
        const double center = 0.5 * (lo + hi);
        int best = -1;
        double bestval = kInf;
        for (int i = 0; i < m; ++i) {
            const double x = lo + (hi - lo) * static_cast<double>(i) / (m - 1);
            const double v = g({x});
            if (std::isnan(v) || v == -kInf)
                throw oracle_error("integrand returned NaN or -inf (improper)");
            // ties break toward the box center so flat minima (indicators)
            // yield argmins that vary continuously with t
            const bool wins = v < bestval ||
                              (v == bestval && best >= 0 &&
                               std::abs(x - center) <
                                   std::abs(lo + (hi - lo) * best / double(m - 1) - center));
            if (wins) {
                bestval = v;
                best = i;
            }
        }
        if (best < 0 || bestval == kInf)
            throw oracle_error("empty domain: integrand is +inf on the whole search box");
        const double spacing = (hi - lo) / (m - 1);
        const double bl = std::max(lo, lo + spacing * (best - 1));
        const double br = std::min(hi, lo + spacing * (best + 1));
        Vec x = golden_refine_1d(g, bl, br, opts.refine_iters);
        double v = g(x);
        // the refined midpoint can sit just outside dom f; keep the lattice
        // point in that case
        if (!(v <= bestval)) {
            x = {lo + spacing * best};
            v = bestval;
        }
        MinResult r;
        r.value = v;
        r.argmin = x;
        r.boundary = box.touches_boundary(x);
        return r;
    }

    // dense lattice, then compass refinement from the best few starts
    std::vector<int> idx(static_cast<size_t>(n), 0);
    Vec x(static_cast<size_t>(n));
    Vec center(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i)
        center[static_cast<size_t>(i)] =
            0.5 * (box.lo[static_cast<size_t>(i)] + box.hi[static_cast<size_t>(i)]);
    std::vector<std::pair<double, Vec>> top;
    auto center_dist = [&](const Vec& p) { return norm2(sub(p, center)); };
    for (;;) {
        for (int i = 0; i < n; ++i)
            x[static_cast<size_t>(i)] =
                box.lo[static_cast<size_t>(i)] +
                box.width(i) * static_cast<double>(idx[static_cast<size_t>(i)]) / (m - 1);
        const double v = g(x);
        if (std::isnan(v) || v == -kInf)
            throw oracle_error("integrand returned NaN or -inf (improper)");
        if (v < kInf) {
            // same center-biased tie-breaking as the 1D scan
            const bool duplicate_worse =
                !top.empty() && v == top.back().first && top.size() == 3 &&
                center_dist(x) >= center_dist(top.back().second);
            if (!duplicate_worse) {
                top.emplace_back(v, x);
                std::sort(top.begin(), top.end(), [&](const auto& a, const auto& b) {
                    if (a.first != b.first) return a.first < b.first;
                    return center_dist(a.second) < center_dist(b.second);
                });
                if (top.size() > 3) top.pop_back();
            }
        }
        int carry = 0;
        for (; carry < n; ++carry) {
            if (++idx[static_cast<size_t>(carry)] < m) break;
            idx[static_cast<size_t>(carry)] = 0;
        }
        if (carry == n) break;
    }
    if (top.empty()) throw oracle_error("empty domain: integrand is +inf on the whole search box");

    Vec step(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) step[static_cast<size_t>(i)] = box.width(i) / (m - 1);
    MinResult best;
    for (auto& [v0, x0] : top) {
        MinResult r = compass_refine(g, box, x0, step, opts.refine_iters);
        if (r.value < best.value) best = std::move(r);
    }
    best.boundary = box.touches_boundary(best.argmin);
    return best;
}

MinResult infimal_value(const IntegrandOracle& f, double t, const SolverOptions& opts) {
    const Box box = f.search_box(t);
    if (box.dim() != f.dim) throw structural_error("infimal_value: search box dimension mismatch");

    // convex 1D with analytic subdifferential: bisect for the zero crossing
    if (f.convex && f.dim == 1 && f.has_subdiff()) {
        auto side = [&](double x) {
            const SubdiffSet s = f.subdiff(t, {x});
            if (s.lo1() > 0.0) return +1;
            if (s.hi1() < 0.0) return -1;
            return 0;
        };
        double a = box.lo[0], b = box.hi[0];
        const int sa = side(a);
        MinResult r;
        if (sa == 0 || sa > 0) {
            // nondecreasing from the left edge: minimum at a (or a is already optimal)
            if (sa > 0) {
                r.argmin = {a};
                r.value = f.eval(t, r.argmin);
                r.boundary = true;
                if (r.value < kInf) return r;
            } else {
                r.argmin = {a};
                r.value = f.eval(t, r.argmin);
                r.boundary = box.touches_boundary(r.argmin);
                if (r.value < kInf) return r;
            }
        } else if (side(b) < 0) {
            r.argmin = {b};
            r.value = f.eval(t, r.argmin);
            r.boundary = true;
            if (r.value < kInf) return r;
        } else {
            for (int i = 0; i < 200 && b - a > 1e-15 * (1.0 + std::abs(a) + std::abs(b)); ++i) {
                const double mid = 0.5 * (a + b);
                const int sm = side(mid);
                if (sm == 0) {
                    a = b = mid;
                    break;
                }
                (sm < 0 ? a : b) = mid;
            }
            r.argmin = {0.5 * (a + b)};
            r.value = f.eval(t, r.argmin);
            r.boundary = box.touches_boundary(r.argmin);
            if (r.value < kInf) return r;
        }
        // fall through to the lattice if the analytic root landed outside dom f
    }

    auto g = [&](const Vec& x) { return f.eval(t, x); };
    return minimize_in_box(g, box, opts);
}

ConjValue conjugate_numeric(const IntegrandOracle& f, double t, const Vec& s,
                            const SolverOptions& opts) {
    if (static_cast<int>(s.size()) != f.dim)
        throw structural_error("conjugate_numeric: slope dimension mismatch");
    const Box box = f.search_box(t);
    auto neg = [&](const Vec& x) {
        const double v = f.eval(t, x);
        if (v == kInf) return kInf;
        return v - dot(s, x);
    };
    MinResult r = minimize_in_box(neg, box, opts);
    ConjValue c;
    c.value = -r.value;
    c.boundary = r.boundary;
    c.argmax = r.argmin;
    return c;
}

namespace {

// 1D monotone linear-time Legendre transform: the lower convex hull of the
// samples (x_i, f_i) has increasing edge slopes, so sup_x (s x - f(x)) is
// attained at the hull vertex where the edge slope first exceeds s.
ConjValue conjugate_llt_1d(const IntegrandOracle& f, double t, double s, int samples) {
    const Box box = f.search_box(t);
    const double lo = box.lo[0], hi = box.hi[0];
    std::vector<std::pair<double, double>> hull;  // (x, f(x)), lower convex hull
    hull.reserve(64);
    auto cross_ok = [&](const std::pair<double, double>& a, const std::pair<double, double>& b,
                        const std::pair<double, double>& c) {
        // b above or on segment (a, c): drop b
        return (b.second - a.second) * (c.first - b.first) <=
               (c.second - b.second) * (b.first - a.first);
    };
    for (int i = 0; i < samples; ++i) {
        const double x = lo + (hi - lo) * static_cast<double>(i) / (samples - 1);
        const double v = f.eval(t, {x});
        if (std::isnan(v) || v == -kInf)
            throw oracle_error("integrand returned NaN or -inf (improper)");
        if (v == kInf) continue;
        std::pair<double, double> p{x, v};
        while (hull.size() >= 2 && !cross_ok(hull[hull.size() - 2], hull.back(), p)) hull.pop_back();
        hull.push_back(p);
    }
    if (hull.empty()) throw oracle_error("empty domain: integrand is +inf on the whole search box");
    // first vertex whose outgoing edge slope exceeds s
    size_t best = 0;
    while (best + 1 < hull.size()) {
        const double slope = (hull[best + 1].second - hull[best].second) /
                             (hull[best + 1].first - hull[best].first);
        if (slope >= s) break;
        ++best;
    }
    ConjValue out;
    out.value = s * hull[best].first - hull[best].second;
    out.argmax = {hull[best].first};
    out.boundary = box.touches_boundary(out.argmax, 1e-3 / samples) ||
                   (best == 0 && hull.front().first - lo < 2.0 * (hi - lo) / samples) ||
                   (best + 1 == hull.size() && hi - hull.back().first < 2.0 * (hi - lo) / samples);
    return out;
}

}  // namespace

ConjValue conjugate_value(const IntegrandOracle& f, double t, const Vec& s,
                          const SolverOptions& opts) {
    if (f.has_conj()) {
        ConjValue c;
        c.value = f.conj(t, s);
        if (std::isnan(c.value)) throw oracle_error("analytic conjugate returned NaN");
        return c;
    }
    if (f.dim == 1) return conjugate_llt_1d(f, t, s[0], 4097);
    return conjugate_numeric(f, t, s, opts);
}

double young_fenchel_residual(const IntegrandOracle& f, double t, const Vec& x, const Vec& s,
                              const SolverOptions& opts) {
    const double fx = f.eval(t, x);
    if (fx == kInf) throw oracle_error("young_fenchel_residual: f_t(x) is not finite");
    const ConjValue fs = conjugate_value(f, t, s, opts);
    if (fs.value == kInf) return kInf;
    return fx + fs.value - dot(s, x);
}

bool eps_subdiff_contains(const IntegrandOracle& f, double t, const Vec& x, const Vec& s,
                          double eps, double tol, const SolverOptions& opts) {
    if (!f.convex)
        throw oracle_error(
            "eps_subdiff_contains: residual characterization requires a convex integrand");
    if (eps < 0.0) throw structural_error("eps_subdiff_contains: eps must be nonnegative");
    return young_fenchel_residual(f, t, x, s, opts) <= eps + tol;
}

SubdiffSet subdiff_hull_sampled(const IntegrandOracle& f, double t, const Vec& x, double radius) {
    if (!f.has_subdiff()) throw oracle_error("subdiff_hull_sampled: oracle has no subdifferential");
    SubdiffSet out = f.subdiff(t, x);
    if (radius > 0.0) {
        for (int i = 0; i < f.dim; ++i) {
            for (double sgn : {1.0, -1.0}) {
                Vec y = x;
                y[static_cast<size_t>(i)] += sgn * radius;
                const SubdiffSet s = f.subdiff(t, y);
                out.extremes.insert(out.extremes.end(), s.extremes.begin(), s.extremes.end());
            }
        }
        // drop near-duplicates picked up from overlapping probes
        std::vector<Vec> unique;
        for (const auto& e : out.extremes) {
            bool dup = false;
            for (const auto& u : unique)
                if (norm_inf(sub(e, u)) <= 1e-12) {
                    dup = true;
                    break;
                }
            if (!dup) unique.push_back(e);
        }
        out.extremes = std::move(unique);
    }
    return out;
}

}  // namespace nsvar
