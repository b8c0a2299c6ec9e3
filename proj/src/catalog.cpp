#include "nsvar/catalog.hpp"

#include <algorithm>
#include <cmath>

namespace nsvar {

namespace {

constexpr double kDefaultBoxHalf = 8.0;

std::function<Box(double)> boxed(std::vector<Expr> lo, std::vector<Expr> hi) {
    return [lo = std::move(lo), hi = std::move(hi)](double t) {
        Vec l(lo.size()), h(hi.size());
        for (size_t i = 0; i < lo.size(); ++i) {
            l[i] = lo[i].eval_t(t);
            h[i] = hi[i].eval_t(t);
        }
        return Box(std::move(l), std::move(h));
    };
}

Vec eval_all(const std::vector<Expr>& e, double t) {
    Vec v(e.size());
    for (size_t i = 0; i < e.size(); ++i) v[i] = e[i].eval_t(t);
    return v;
}

}  // namespace

IntegrandOracle with_box(IntegrandOracle f, Box box) {
    if (box.dim() != f.dim) throw structural_error("with_box: dimension mismatch");
    f.search_box = [box](double) { return box; };
    return f;
}

IntegrandOracle with_dual_box(IntegrandOracle f, Box dual) {
    if (dual.dim() != f.dim) throw structural_error("with_dual_box: dimension mismatch");
    f.dual_box = std::move(dual);
    return f;
}

IntegrandOracle make_quadratic(std::vector<Expr> center, std::vector<double> weights, Expr offset) {
    const int n = static_cast<int>(center.size());
    if (weights.size() != center.size())
        throw structural_error("make_quadratic: center/weights size mismatch");
    for (double w : weights)
        if (w < 0.0) throw structural_error("make_quadratic: negative weight");
    IntegrandOracle f;
    f.name = "quadratic";
    f.dim = n;
    f.convex = true;
    f.eval = [center, weights, offset](double t, const Vec& x) {
        double v = offset.eval_t(t);
        for (size_t i = 0; i < x.size(); ++i) {
            const double d = x[i] - center[i].eval_t(t);
            v += 0.5 * weights[i] * d * d;
        }
        return v;
    };
    f.conj = [center, weights, offset](double t, const Vec& s) {
        double v = -offset.eval_t(t);
        for (size_t i = 0; i < s.size(); ++i) {
            const double c = center[i].eval_t(t);
            if (weights[i] > 0.0) {
                v += 0.5 * s[i] * s[i] / weights[i] + s[i] * c;
            } else if (std::abs(s[i]) > 1e-9) {
                return kInf;  // degenerate coordinate: dom f^* = {s_i = 0}
            }
        }
        return v;
    };
    f.subdiff = [center, weights](double t, const Vec& x) {
        Vec g(x.size());
        for (size_t i = 0; i < x.size(); ++i) g[i] = weights[i] * (x[i] - center[i].eval_t(t));
        return SubdiffSet{{g}};
    };
    f.search_box = [center, n](double t) {
        Vec lo(static_cast<size_t>(n)), hi(static_cast<size_t>(n));
        for (int i = 0; i < n; ++i) {
            const double c = center[static_cast<size_t>(i)].eval_t(t);
            lo[static_cast<size_t>(i)] = c - kDefaultBoxHalf;
            hi[static_cast<size_t>(i)] = c + kDefaultBoxHalf;
        }
        return Box(std::move(lo), std::move(hi));
    };
    f.lipschitz_modulus = [center, weights, n, box = f.search_box](double t) {
        const Box b = box(t);
        double s2 = 0.0;
        for (int i = 0; i < n; ++i) {
            const double c = center[static_cast<size_t>(i)].eval_t(t);
            const double r = std::max(std::abs(b.lo[static_cast<size_t>(i)] - c),
                                      std::abs(b.hi[static_cast<size_t>(i)] - c));
            s2 += weights[static_cast<size_t>(i)] * weights[static_cast<size_t>(i)] * r * r;
        }
        return std::sqrt(s2);
    };
    Vec dlo(static_cast<size_t>(n)), dhi(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) {
        const double w = weights[static_cast<size_t>(i)];
        const double r = w > 0.0 ? std::min(3.0, 0.8 * w * kDefaultBoxHalf) : 1e-9;
        dlo[static_cast<size_t>(i)] = -r;
        dhi[static_cast<size_t>(i)] = r;
    }
    f.dual_box = Box(std::move(dlo), std::move(dhi));
    return f;
}

IntegrandOracle make_affine(std::vector<Expr> a, Expr b) {
    const int n = static_cast<int>(a.size());
    IntegrandOracle f;
    f.name = "affine";
    f.dim = n;
    f.convex = true;
    f.eval = [a, b](double t, const Vec& x) {
        double v = b.eval_t(t);
        for (size_t i = 0; i < x.size(); ++i) v += a[i].eval_t(t) * x[i];
        return v;
    };
    f.conj = [a, b](double t, const Vec& s) {
        for (size_t i = 0; i < s.size(); ++i) {
            const double ai = a[i].eval_t(t);
            if (std::abs(s[i] - ai) > 1e-9 * (1.0 + std::abs(ai))) return kInf;
        }
        return -b.eval_t(t);
    };
    f.subdiff = [a](double t, const Vec&) { return SubdiffSet{{eval_all(a, t)}}; };
    f.search_box = [n](double) { return Box::cube(n, -kDefaultBoxHalf, kDefaultBoxHalf); };
    f.lipschitz_modulus = [a](double t) { return norm2(eval_all(a, t)); };
    f.dual_box = Box::cube(n, -3.0, 3.0);
    return f;
}

IntegrandOracle make_abs(int dim, int coord, Expr center) {
    if (coord < 0 || coord >= dim) throw structural_error("make_abs: coord out of range");
    IntegrandOracle f;
    f.name = "abs";
    f.dim = dim;
    f.convex = true;
    const auto j = static_cast<size_t>(coord);
    f.eval = [j, center](double t, const Vec& x) { return std::abs(x[j] - center.eval_t(t)); };
    f.conj = [j, center](double t, const Vec& s) {
        for (size_t i = 0; i < s.size(); ++i) {
            if (i == j) continue;
            if (std::abs(s[i]) > 1e-9) return kInf;
        }
        if (std::abs(s[j]) > 1.0 + 1e-12) return kInf;
        return center.eval_t(t) * s[j];
    };
    f.subdiff = [dim, j, center](double t, const Vec& x) {
        const double d = x[j] - center.eval_t(t);
        SubdiffSet s;
        if (std::abs(d) <= 1e-12) {
            Vec lo = zeros(dim), hi = zeros(dim);
            lo[j] = -1.0;
            hi[j] = 1.0;
            s.extremes = {lo, hi};
        } else {
            Vec g = zeros(dim);
            g[j] = d > 0.0 ? 1.0 : -1.0;
            s.extremes = {g};
        }
        return s;
    };
    f.search_box = [dim, j, center](double t) {
        Box b = Box::cube(dim, -kDefaultBoxHalf, kDefaultBoxHalf);
        const double c = center.eval_t(t);
        b.lo[j] = c - kDefaultBoxHalf;
        b.hi[j] = c + kDefaultBoxHalf;
        return b;
    };
    f.lipschitz_modulus = [](double) { return 1.0; };
    Vec dlo(static_cast<size_t>(dim), -1e-9), dhi(static_cast<size_t>(dim), 1e-9);
    dlo[j] = -0.95;
    dhi[j] = 0.95;
    f.dual_box = Box(std::move(dlo), std::move(dhi));
    return f;
}

IntegrandOracle make_norm(int dim) {
    IntegrandOracle f;
    f.name = "norm";
    f.dim = dim;
    f.convex = true;
    f.eval = [](double, const Vec& x) { return norm2(x); };
    f.conj = [](double, const Vec& s) { return norm2(s) <= 1.0 + 1e-12 ? 0.0 : kInf; };
    f.subdiff = [dim](double, const Vec& x) {
        const double n = norm2(x);
        SubdiffSet s;
        if (n > 1e-12) {
            s.extremes = {scale(1.0 / n, x)};
        } else {
            for (int i = 0; i < dim; ++i) {
                Vec e = zeros(dim);
                e[static_cast<size_t>(i)] = 1.0;
                s.extremes.push_back(e);
                e[static_cast<size_t>(i)] = -1.0;
                s.extremes.push_back(e);
            }
        }
        return s;
    };
    f.search_box = [dim](double) { return Box::cube(dim, -kDefaultBoxHalf, kDefaultBoxHalf); };
    f.lipschitz_modulus = [](double) { return 1.0; };
    const double r = std::min(0.95, 0.99 / std::sqrt(static_cast<double>(dim)));
    f.dual_box = Box::cube(dim, -r, r);
    return f;
}

IntegrandOracle make_neg_norm(int dim) {
    IntegrandOracle f = make_norm(dim);
    f.name = "neg_norm";
    f.convex = false;
    f.conj = nullptr;
    f.eval = [](double, const Vec& x) { return -norm2(x); };
    f.subdiff = [dim](double, const Vec& x) {
        const double n = norm2(x);
        SubdiffSet s;
        if (n > 1e-12) {
            s.extremes = {scale(-1.0 / n, x)};
        } else {
            for (int i = 0; i < dim; ++i) {
                Vec e = zeros(dim);
                e[static_cast<size_t>(i)] = 1.0;
                s.extremes.push_back(e);
                e[static_cast<size_t>(i)] = -1.0;
                s.extremes.push_back(e);
            }
        }
        return s;
    };
    return f;
}

IntegrandOracle make_norm_power(int dim, double p) {
    if (!(p > 1.0)) throw structural_error("make_norm_power: need p > 1");
    const double q = p / (p - 1.0);
    IntegrandOracle f;
    f.name = "norm_power";
    f.dim = dim;
    f.convex = true;
    f.eval = [p](double, const Vec& x) { return std::pow(norm2(x), p) / p; };
    f.conj = [q](double, const Vec& s) { return std::pow(norm2(s), q) / q; };
    f.subdiff = [p](double, const Vec& x) {
        const double n = norm2(x);
        if (n <= 1e-300) return SubdiffSet{{zeros(static_cast<int>(x.size()))}};
        return SubdiffSet{{scale(std::pow(n, p - 2.0), x)}};
    };
    f.search_box = [dim](double) { return Box::cube(dim, -6.0, 6.0); };
    f.lipschitz_modulus = [p, dim](double) {
        return std::pow(6.0 * std::sqrt(static_cast<double>(dim)), p - 1.0);
    };
    f.dual_box = Box::cube(dim, -2.0, 2.0);
    return f;
}

IntegrandOracle make_indicator(MovingSet C) {
    // freezing C(t) builds projection/support closures; a one-slot cache on
    // the last t keeps per-cell lattice scans cheap without changing any
    // observable value (the engine never interleaves instants concurrently)
    auto cache = std::make_shared<std::pair<double, ConvexSet>>(
        std::numeric_limits<double>::quiet_NaN(), ConvexSet{});
    auto frozen = [C, cache](double t) -> const ConvexSet& {
        if (!(cache->first == t)) {
            cache->second = C.at(t);
            cache->first = t;
        }
        return cache->second;
    };
    IntegrandOracle f;
    f.name = "indicator";
    f.dim = C.dim;
    f.convex = true;
    f.eval = [frozen](double t, const Vec& x) {
        return frozen(t).contains(x, 1e-9) ? 0.0 : kInf;
    };
    f.conj = [frozen](double t, const Vec& s) { return frozen(t).support(s); };
    f.search_box = [frozen, dim = C.dim](double t) {
        // bounding box of C(t) from its support function, padded
        const ConvexSet& set = frozen(t);
        Vec lo(static_cast<size_t>(dim)), hi(static_cast<size_t>(dim));
        for (int i = 0; i < dim; ++i) {
            Vec e = zeros(dim);
            e[static_cast<size_t>(i)] = 1.0;
            hi[static_cast<size_t>(i)] = set.support(e) + 1.0;
            e[static_cast<size_t>(i)] = -1.0;
            lo[static_cast<size_t>(i)] = -set.support(e) - 1.0;
        }
        return Box(std::move(lo), std::move(hi));
    };
    f.dual_box = Box::cube(C.dim, -3.0, 3.0);
    return f;
}

IntegrandOracle make_support_interval(Expr lo, Expr hi) {
    IntegrandOracle f;
    f.name = "support_interval";
    f.dim = 1;
    f.convex = true;
    f.eval = [lo, hi](double t, const Vec& x) {
        return std::max(lo.eval_t(t) * x[0], hi.eval_t(t) * x[0]);
    };
    f.conj = [lo, hi](double t, const Vec& s) {
        const double l = lo.eval_t(t), u = hi.eval_t(t);
        return (s[0] >= l - 1e-12 && s[0] <= u + 1e-12) ? 0.0 : kInf;
    };
    f.subdiff = [lo, hi](double t, const Vec& x) {
        const double l = lo.eval_t(t), u = hi.eval_t(t);
        if (x[0] > 1e-12) return SubdiffSet{{{u}}};
        if (x[0] < -1e-12) return SubdiffSet{{{l}}};
        return SubdiffSet{{{l}, {u}}};
    };
    f.search_box = [](double) { return Box::cube(1, -kDefaultBoxHalf, kDefaultBoxHalf); };
    f.lipschitz_modulus = [lo, hi](double t) {
        return std::max(std::abs(lo.eval_t(t)), std::abs(hi.eval_t(t)));
    };
    f.dual_box = Box::cube(1, -0.9, 0.9);
    return f;
}

IntegrandOracle make_min_quadratics(Expr shift) {
    IntegrandOracle f;
    f.name = "min_quadratics";
    f.dim = 1;
    f.convex = false;
    auto f1 = [](double x) { return (x + 1.0) * (x + 1.0); };
    auto f2 = [shift](double t, double x) { return (x - 1.0) * (x - 1.0) + shift.eval_t(t); };
    f.eval = [f1, f2](double t, const Vec& x) { return std::min(f1(x[0]), f2(t, x[0])); };
    f.subdiff = [f1, f2](double t, const Vec& x) {
        const double v1 = f1(x[0]), v2 = f2(t, x[0]);
        SubdiffSet s;
        if (std::abs(v1 - v2) <= 1e-12) {
            s.extremes = {{2.0 * (x[0] + 1.0)}, {2.0 * (x[0] - 1.0)}};
        } else if (v1 < v2) {
            s.extremes = {{2.0 * (x[0] + 1.0)}};
        } else {
            s.extremes = {{2.0 * (x[0] - 1.0)}};
        }
        return s;
    };
    f.search_box = [](double) { return Box::cube(1, -6.0, 6.0); };
    f.lipschitz_modulus = [](double) { return 2.0 * 7.0; };
    f.dual_box = Box::cube(1, -2.0, 2.0);
    return f;
}

IntegrandOracle make_offset(int dim, Expr d) {
    IntegrandOracle f;
    f.name = "offset";
    f.dim = dim;
    f.convex = true;
    f.eval = [d](double t, const Vec&) { return d.eval_t(t); };
    f.conj = [d, dim](double t, const Vec& s) {
        for (int i = 0; i < dim; ++i)
            if (std::abs(s[static_cast<size_t>(i)]) > 1e-9) return kInf;
        return -d.eval_t(t);
    };
    f.subdiff = [dim](double, const Vec&) { return SubdiffSet{{zeros(dim)}}; };
    f.search_box = [dim](double) { return Box::cube(dim, -kDefaultBoxHalf, kDefaultBoxHalf); };
    f.lipschitz_modulus = [](double) { return 0.0; };
    f.dual_box = Box::cube(dim, -1e-9, 1e-9);
    return f;
}

IntegrandOracle make_sum(std::vector<IntegrandOracle> terms) {
    if (terms.empty()) throw structural_error("make_sum: no terms");
    const int n = terms.front().dim;
    for (const auto& t : terms)
        if (t.dim != n) throw structural_error("make_sum: dimension mismatch across terms");

    IntegrandOracle f;
    f.name = "sum";
    f.dim = n;
    f.convex = std::all_of(terms.begin(), terms.end(), [](const auto& t) { return t.convex; });
    f.eval = [terms](double t, const Vec& x) {
        double v = 0.0;
        for (const auto& g : terms) v = ext_add(v, g.eval(t, x));
        return v;
    };

    // analytic conjugate survives when all terms but one are affine/offset:
    // (g + <a,.> + b)^*(s) = g^*(s - a) - b
    size_t main_idx = terms.size();
    bool conj_ok = true;
    for (size_t i = 0; i < terms.size(); ++i) {
        if (terms[i].name == "affine" || terms[i].name == "offset") continue;
        if (main_idx != terms.size()) {
            conj_ok = false;
            break;
        }
        main_idx = i;
    }
    if (conj_ok && main_idx < terms.size() && terms[main_idx].has_conj()) {
        f.conj = [terms, main_idx](double t, const Vec& s) {
            Vec shifted = s;
            double off = 0.0;
            for (size_t i = 0; i < terms.size(); ++i) {
                if (i == main_idx) continue;
                // affine/offset terms have singleton subdifferential {a(t)}
                const Vec a = terms[i].subdiff(t, shifted).extremes.front();
                shifted = sub(shifted, a);
                off += terms[i].eval(t, zeros(static_cast<int>(s.size())));
            }
            const double c = terms[main_idx].conj(t, shifted);
            return c == kInf ? kInf : c - off;
        };
    }

    bool all_sub = std::all_of(terms.begin(), terms.end(), [](const auto& t) { return t.has_subdiff(); });
    if (all_sub) {
        f.subdiff = [terms](double t, const Vec& x) {
            SubdiffSet acc = terms.front().subdiff(t, x);
            for (size_t i = 1; i < terms.size(); ++i) {
                const SubdiffSet s = terms[i].subdiff(t, x);
                std::vector<Vec> next;
                next.reserve(acc.extremes.size() * s.extremes.size());
                for (const auto& u : acc.extremes)
                    for (const auto& v : s.extremes) next.push_back(add(u, v));
                acc.extremes = std::move(next);
            }
            return acc;
        };
    }
    bool all_mod = std::all_of(terms.begin(), terms.end(), [](const auto& t) { return t.has_modulus(); });
    if (all_mod) {
        f.lipschitz_modulus = [terms](double t) {
            double k = 0.0;
            for (const auto& g : terms) k += g.lipschitz_modulus(t);
            return k;
        };
    }
    const size_t box_from = main_idx < terms.size() ? main_idx : 0;
    f.search_box = terms[box_from].search_box;
    f.dual_box = terms[box_from].dual_box;
    return f;
}

IntegrandOracle make_scaled(double alpha, IntegrandOracle g) {
    if (!(alpha > 0.0)) throw structural_error("make_scaled: factor must be positive");
    IntegrandOracle f = g;
    f.name = "scaled_" + g.name;
    f.eval = [alpha, g](double t, const Vec& x) {
        const double v = g.eval(t, x);
        return v == kInf ? kInf : alpha * v;
    };
    if (g.has_conj())
        f.conj = [alpha, g](double t, const Vec& s) {
            const double v = g.conj(t, scale(1.0 / alpha, s));
            return v == kInf ? kInf : alpha * v;
        };
    if (g.has_subdiff())
        f.subdiff = [alpha, g](double t, const Vec& x) {
            SubdiffSet s = g.subdiff(t, x);
            for (auto& e : s.extremes) e = scale(alpha, e);
            return s;
        };
    if (g.has_modulus())
        f.lipschitz_modulus = [alpha, g](double t) { return alpha * g.lipschitz_modulus(t); };
    Box d = g.dual_box;
    for (size_t i = 0; i < d.lo.size(); ++i) {
        d.lo[i] *= alpha;
        d.hi[i] *= alpha;
    }
    f.dual_box = d;
    return f;
}

// ---------------------------------------------------------------------------
// JSON construction

void require_keys(const json& obj, const std::vector<std::string>& allowed,
                  const std::string& context) {
    if (!obj.is_object()) throw structural_error(context + ": expected a JSON object");
    for (const auto& [key, _] : obj.items()) {
        if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
            throw structural_error(context + ": unknown field \"" + key + "\"");
    }
}

namespace {

Expr expr_field(const json& j, const std::string& key, const std::string& fallback) {
    if (!j.contains(key)) return Expr::parse_t(fallback);
    const auto& v = j.at(key);
    if (v.is_number()) return Expr::parse_t(format_double(v.get<double>()));
    return Expr::parse_t(v.get<std::string>());
}

std::vector<Expr> expr_list(const json& j, const std::string& key) {
    std::vector<Expr> out;
    const json& v = j.at(key);
    // a bare string or number means a one-dimensional coefficient list
    if (v.is_string()) {
        out.push_back(Expr::parse_t(v.get<std::string>()));
        return out;
    }
    if (v.is_number()) {
        out.push_back(Expr::parse_t(format_double(v.get<double>())));
        return out;
    }
    for (const auto& e : v) {
        if (e.is_number())
            out.push_back(Expr::parse_t(format_double(e.get<double>())));
        else
            out.push_back(Expr::parse_t(e.get<std::string>()));
    }
    return out;
}

Box const_box(const json& j) {
    Vec lo, hi;
    for (const auto& pair : j) {
        lo.push_back(pair.at(0).get<double>());
        hi.push_back(pair.at(1).get<double>());
    }
    return Box(std::move(lo), std::move(hi));
}

std::function<Box(double)> box_field(const json& j) {
    std::vector<Expr> lo, hi;
    for (const auto& pair : j) {
        auto get = [](const json& v) {
            return v.is_number() ? Expr::parse_t(format_double(v.get<double>()))
                                 : Expr::parse_t(v.get<std::string>());
        };
        lo.push_back(get(pair.at(0)));
        hi.push_back(get(pair.at(1)));
    }
    return boxed(std::move(lo), std::move(hi));
}

ConvexSet frozen_set_from_json(const json& spec, double t);

MovingSet moving_set_segments(const json& base, const json& jumps) {
    // Each jump entry replaces the set spec from its instant onward.
    struct Segment {
        double start;
        json spec;
    };
    auto strip = [](json j) {
        j.erase("jumps");
        return j;
    };
    std::vector<Segment> segs{{-kInf, strip(base)}};
    std::vector<double> jump_times;
    for (const auto& jmp : jumps) {
        if (!jmp.contains("t")) throw structural_error("moving set jump: missing \"t\"");
        json spec = jmp;
        spec.erase("t");
        const double tj = jmp.at("t").get<double>();
        if (!jump_times.empty() && tj <= jump_times.back())
            throw structural_error("moving set jumps must be strictly increasing");
        jump_times.push_back(tj);
        segs.push_back({tj, std::move(spec)});
    }
    MovingSet C;
    C.jump_times = jump_times;
    // probe dimension at the earliest segment
    C.dim = frozen_set_from_json(segs.front().spec, 0.0).dim;
    C.at = [segs](double t) {
        size_t k = 0;
        while (k + 1 < segs.size() && t >= segs[k + 1].start) ++k;
        return frozen_set_from_json(segs[k].spec, t);
    };
    // crude uniform diameter bound from the support function at a few instants
    double diam = 0.0;
    for (double t : {0.0, 0.25, 0.5, 0.75, 1.0}) {
        const ConvexSet s = C.at(t);
        for (int i = 0; i < C.dim; ++i) {
            Vec e = zeros(C.dim);
            e[static_cast<size_t>(i)] = 1.0;
            const double w = s.support(e);
            e[static_cast<size_t>(i)] = -1.0;
            diam = std::max(diam, w + s.support(e));
        }
    }
    C.diam_bound = diam;
    return C;
}

ConvexSet frozen_set_from_json(const json& spec, double t) {
    const std::string kind = spec.at("kind").get<std::string>();
    if (kind == "interval") {
        require_keys(spec, {"kind", "lo", "hi", "jumps"}, "set/interval");
        return ConvexSet::interval(expr_field(spec, "lo", "0").eval_t(t),
                                   expr_field(spec, "hi", "1").eval_t(t));
    }
    if (kind == "ball") {
        require_keys(spec, {"kind", "center", "radius", "jumps"}, "set/ball");
        Vec c;
        for (const auto& e : expr_list(spec, "center")) c.push_back(e.eval_t(t));
        return ConvexSet::ball(std::move(c), expr_field(spec, "radius", "1").eval_t(t));
    }
    if (kind == "box") {
        require_keys(spec, {"kind", "lo", "hi", "jumps"}, "set/box");
        Vec lo, hi;
        for (const auto& e : expr_list(spec, "lo")) lo.push_back(e.eval_t(t));
        for (const auto& e : expr_list(spec, "hi")) hi.push_back(e.eval_t(t));
        return ConvexSet::box(std::move(lo), std::move(hi));
    }
    if (kind == "point") {
        require_keys(spec, {"kind", "at", "jumps"}, "set/point");
        Vec p;
        for (const auto& e : expr_list(spec, "at")) p.push_back(e.eval_t(t));
        return ConvexSet::point(std::move(p));
    }
    if (kind == "halfspaces") {
        require_keys(spec, {"kind", "normals", "offsets", "bbox", "jumps"}, "set/halfspaces");
        std::vector<Vec> normals;
        for (const auto& row : spec.at("normals")) {
            Vec n;
            for (const auto& v : row) n.push_back(v.get<double>());
            normals.push_back(std::move(n));
        }
        Vec offsets;
        for (const auto& e : expr_list(spec, "offsets")) offsets.push_back(e.eval_t(t));
        const Box bb = const_box(spec.at("bbox"));
        return ConvexSet::halfspaces(std::move(normals), std::move(offsets), bb.lo, bb.hi);
    }
    throw structural_error("unknown set kind \"" + kind + "\"");
}

}  // namespace

MovingSet moving_set_from_json(const json& spec) {
    if (!spec.is_object() || !spec.contains("kind"))
        throw structural_error("moving set: missing \"kind\"");
    return moving_set_segments(spec, spec.contains("jumps") ? spec.at("jumps") : json::array());
}

IntegrandOracle integrand_from_json(const json& spec) {
    if (!spec.is_object() || !spec.contains("kind"))
        throw structural_error("integrand: missing \"kind\"");
    const std::string kind = spec.at("kind").get<std::string>();
    IntegrandOracle f;
    if (kind == "quadratic") {
        require_keys(spec, {"kind", "center", "weights", "offset", "box", "dual_box"}, "integrand/quadratic");
        auto center = expr_list(spec, "center");
        std::vector<double> weights(center.size(), 1.0);
        if (spec.contains("weights")) weights = spec.at("weights").get<std::vector<double>>();
        f = make_quadratic(std::move(center), std::move(weights), expr_field(spec, "offset", "0"));
    } else if (kind == "affine") {
        require_keys(spec, {"kind", "a", "b", "box", "dual_box"}, "integrand/affine");
        f = make_affine(expr_list(spec, "a"), expr_field(spec, "b", "0"));
    } else if (kind == "abs") {
        require_keys(spec, {"kind", "dim", "coord", "center", "box", "dual_box"}, "integrand/abs");
        f = make_abs(spec.value("dim", 1), spec.value("coord", 0), expr_field(spec, "center", "0"));
    } else if (kind == "norm") {
        require_keys(spec, {"kind", "dim", "box", "dual_box"}, "integrand/norm");
        f = make_norm(spec.value("dim", 1));
    } else if (kind == "neg_norm") {
        require_keys(spec, {"kind", "dim", "box", "dual_box"}, "integrand/neg_norm");
        f = make_neg_norm(spec.value("dim", 1));
    } else if (kind == "norm_power") {
        require_keys(spec, {"kind", "dim", "p", "box", "dual_box"}, "integrand/norm_power");
        f = make_norm_power(spec.value("dim", 1), spec.at("p").get<double>());
    } else if (kind == "indicator") {
        require_keys(spec, {"kind", "set", "box", "dual_box"}, "integrand/indicator");
        f = make_indicator(moving_set_from_json(spec.at("set")));
    } else if (kind == "support_interval") {
        require_keys(spec, {"kind", "lo", "hi", "box", "dual_box"}, "integrand/support_interval");
        f = make_support_interval(expr_field(spec, "lo", "-1"), expr_field(spec, "hi", "1"));
    } else if (kind == "min_quadratics") {
        require_keys(spec, {"kind", "shift", "box", "dual_box"}, "integrand/min_quadratics");
        f = make_min_quadratics(expr_field(spec, "shift", "0.5"));
    } else if (kind == "offset") {
        require_keys(spec, {"kind", "dim", "c", "box", "dual_box"}, "integrand/offset");
        f = make_offset(spec.value("dim", 1), expr_field(spec, "c", "0"));
    } else if (kind == "sum") {
        require_keys(spec, {"kind", "terms", "box", "dual_box"}, "integrand/sum");
        std::vector<IntegrandOracle> terms;
        for (const auto& term : spec.at("terms")) terms.push_back(integrand_from_json(term));
        f = make_sum(std::move(terms));
    } else if (kind == "scale") {
        require_keys(spec, {"kind", "factor", "term", "box", "dual_box"}, "integrand/scale");
        f = make_scaled(spec.at("factor").get<double>(), integrand_from_json(spec.at("term")));
    } else {
        throw structural_error("unknown integrand kind \"" + kind + "\"");
    }
    if (spec.contains("box")) f.search_box = box_field(spec.at("box"));
    if (spec.contains("dual_box")) f.dual_box = const_box(spec.at("dual_box"));
    return f;
}

}  // namespace nsvar
