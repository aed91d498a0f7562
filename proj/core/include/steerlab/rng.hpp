#pragma once

#include <cstdint>
#include <random>

namespace steerlab {

/// Seeded random source with platform-independent uniform and normal draws.
///
/// The standard library distributions are implementation-defined, so the
/// transforms from raw engine output are done here to keep streams
/// reproducible across toolchains.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    /// Uniform on [0, 1) with 53 random bits.
    double uniform();
    /// Uniform on [lo, hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    /// Standard normal via the Marsaglia polar method.
    double normal();

    std::uint64_t next_u64() { return engine_(); }

private:
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

/// splitmix64 finalizer.
std::uint64_t mix64(std::uint64_t x) noexcept;

/// Seed for worker `index` derived from a base seed: base XOR mix64(index).
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index) noexcept;

} // namespace steerlab
