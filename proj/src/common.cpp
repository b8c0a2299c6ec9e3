#include "nsvar/common.hpp"

#include <cstdio>

namespace nsvar {

double pairwise_sum(std::span<const double> v) {
    const size_t n = v.size();
    if (n == 0) return 0.0;
    if (n <= 8) {
        double s = 0.0;
        for (double x : v) s = ext_add(s, x);
        return s;
    }
    const size_t half = n / 2;
    return ext_add(pairwise_sum(v.first(half)), pairwise_sum(v.subspan(half)));
}

double dot(const Vec& a, const Vec& b) {
    if (a.size() != b.size()) throw structural_error("dot: dimension mismatch");
    double s = 0.0;
    for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double norm2(const Vec& a) { return std::sqrt(dot(a, a)); }

double norm_inf(const Vec& a) {
    double m = 0.0;
    for (double x : a) m = std::max(m, std::abs(x));
    return m;
}

Vec add(const Vec& a, const Vec& b) {
    if (a.size() != b.size()) throw structural_error("add: dimension mismatch");
    Vec r(a.size());
    for (size_t i = 0; i < a.size(); ++i) r[i] = a[i] + b[i];
    return r;
}

Vec sub(const Vec& a, const Vec& b) {
    if (a.size() != b.size()) throw structural_error("sub: dimension mismatch");
    Vec r(a.size());
    for (size_t i = 0; i < a.size(); ++i) r[i] = a[i] - b[i];
    return r;
}

Vec scale(double c, const Vec& a) {
    Vec r(a.size());
    for (size_t i = 0; i < a.size(); ++i) r[i] = c * a[i];
    return r;
}

Vec axpy(const Vec& a, double c, const Vec& b) {
    if (a.size() != b.size()) throw structural_error("axpy: dimension mismatch");
    Vec r(a.size());
    for (size_t i = 0; i < a.size(); ++i) r[i] = a[i] + c * b[i];
    return r;
}

std::string format_double(double x) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

}  // namespace nsvar
