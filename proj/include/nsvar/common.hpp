#ifndef NSVAR_COMMON_HPP
#define NSVAR_COMMON_HPP

#include <cmath>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace nsvar {

// Malformed inputs: size mismatches, bad schemas, invalid grids.
struct structural_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// An oracle misbehaved: empty domain, non-Lipschitz behavior, projection failure.
struct oracle_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A solver or estimator could not produce a trustworthy answer.
struct solver_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline constexpr double kInf = std::numeric_limits<double>::infinity();

inline bool finite(double x) { return std::isfinite(x); }

// Extended-real addition. -inf never appears as an oracle value, but sums of
// residuals may mix +inf with anything; +inf absorbs.
inline double ext_add(double a, double b) {
    if (a == kInf || b == kInf) return kInf;
    return a + b;
}

// Deterministic pairwise summation: result is independent of how callers
// might batch or parallelise term evaluation.
double pairwise_sum(std::span<const double> v);

using Vec = std::vector<double>;

double dot(const Vec& a, const Vec& b);
double norm2(const Vec& a);
double norm_inf(const Vec& a);
Vec add(const Vec& a, const Vec& b);
Vec sub(const Vec& a, const Vec& b);
Vec scale(double c, const Vec& a);
// a + c*b
Vec axpy(const Vec& a, double c, const Vec& b);

inline Vec zeros(int n) { return Vec(static_cast<size_t>(n), 0.0); }

std::string format_double(double x);

}  // namespace nsvar

#endif
