#ifndef NSVAR_RNG_HPP
#define NSVAR_RNG_HPP

#include <cstdint>

#include "nsvar/common.hpp"

namespace nsvar {

// Counter-based generator (splitmix64 finalizer over (seed, stream, counter)).
// No state is advanced: sample i of stream s under seed k is a pure function
// of (k, s, i), so parallel loops draw independent values in any order.
class CounterRng {
  public:
    CounterRng(uint64_t seed, uint64_t stream) : seed_(seed), stream_(stream) {}

    // uniform in [0, 1)
    double uniform(uint64_t counter) const;
    // uniform in [lo, hi)
    double uniform(uint64_t counter, double lo, double hi) const;
    // standard normal (Box-Muller on two lanes of the counter)
    double normal(uint64_t counter) const;
    // point with coordinates uniform in [lo[i], hi[i])
    Vec point(uint64_t counter, const Vec& lo, const Vec& hi) const;
    // uniform direction on the unit sphere in dimension n
    Vec direction(uint64_t counter, int n) const;

    uint64_t seed() const { return seed_; }

  private:
    uint64_t word(uint64_t counter, uint64_t lane) const;
    uint64_t seed_;
    uint64_t stream_;
};

}  // namespace nsvar

#endif
