#include "nsvar/rng.hpp"

#include <cmath>

namespace nsvar {

namespace {

uint64_t splitmix64(uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

}  // namespace

uint64_t CounterRng::word(uint64_t counter, uint64_t lane) const {
    uint64_t z = splitmix64(seed_ ^ splitmix64(stream_));
    z = splitmix64(z ^ splitmix64(counter));
    return splitmix64(z ^ lane);
}

double CounterRng::uniform(uint64_t counter) const {
    // top 53 bits -> [0, 1)
    return static_cast<double>(word(counter, 0) >> 11) * 0x1.0p-53;
}

double CounterRng::uniform(uint64_t counter, double lo, double hi) const {
    return lo + (hi - lo) * uniform(counter);
}

double CounterRng::normal(uint64_t counter) const {
    const double u1 = static_cast<double>(word(counter, 1) >> 11) * 0x1.0p-53;
    const double u2 = static_cast<double>(word(counter, 2) >> 11) * 0x1.0p-53;
    const double r = std::sqrt(-2.0 * std::log(1.0 - u1));
    return r * std::cos(2.0 * M_PI * u2);
}

Vec CounterRng::point(uint64_t counter, const Vec& lo, const Vec& hi) const {
    if (lo.size() != hi.size()) throw structural_error("CounterRng::point: box dimension mismatch");
    Vec p(lo.size());
    for (size_t i = 0; i < p.size(); ++i) {
        const double u = static_cast<double>(word(counter, 16 + i) >> 11) * 0x1.0p-53;
        p[i] = lo[i] + (hi[i] - lo[i]) * u;
    }
    return p;
}

Vec CounterRng::direction(uint64_t counter, int n) const {
    if (n == 1) return {uniform(counter) < 0.5 ? -1.0 : 1.0};
    Vec d(static_cast<size_t>(n));
    double nrm = 0.0;
    for (int i = 0; i < n; ++i) {
        const double u1 = static_cast<double>(word(counter, 100 + 2 * i) >> 11) * 0x1.0p-53;
        const double u2 = static_cast<double>(word(counter, 101 + 2 * i) >> 11) * 0x1.0p-53;
        d[i] = std::sqrt(-2.0 * std::log(1.0 - u1)) * std::cos(2.0 * M_PI * u2);
        nrm += d[i] * d[i];
    }
    nrm = std::sqrt(nrm);
    if (nrm < 1e-300) return direction(counter + 0x51ed, n);
    for (auto& x : d) x /= nrm;
    return d;
}

}  // namespace nsvar
