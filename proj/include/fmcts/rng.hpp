#pragma once

#include <cstdint>
#include <string_view>

namespace fmcts {

/// Deterministic 64-bit generator (xoshiro256**) with named, reproducible
/// sub-streams. Results do not depend on the standard library implementation.
class Rng {
public:
    using result_type = std::uint64_t;

    explicit Rng(std::uint64_t seed = 0);

    std::uint64_t next();
    std::uint64_t operator()() { return next(); }
    static constexpr std::uint64_t min() { return 0; }
    static constexpr std::uint64_t max() { return ~std::uint64_t{0}; }

    /// Uniform in [0, n); n must be positive.
    std::size_t index(std::size_t n);
    /// Uniform in [0, 1).
    double uniform();

    /// Independent stream keyed by (this stream's seed, tag, i). Does not
    /// advance this generator.
    Rng derive(std::string_view tag, std::uint64_t i = 0) const;

private:
    std::uint64_t seed_;
    std::uint64_t s_[4];
};

} // namespace fmcts
