#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "steerlab/hermitian.hpp"
#include "steerlab/rng.hpp"
#include "steerlab/state.hpp"

namespace steerlab {

/// Hit-and-run settings for the body of D×D density matrices.
struct SamplerConfig {
    int dim = 2; ///< total dimension D = d_A·d_B
    std::uint64_t seed = 0;
    std::optional<long> burn_in;  ///< defaults to 50·(D²−1)
    std::optional<long> thinning; ///< defaults to D²−1

    long resolved_burn_in() const;
    long resolved_thinning() const;
    void validate() const;
};

/// Interior point ρ(c) = I/D + Σ_i c_i G_i over the traceless Gell-Mann elements.
struct ChainState {
    int dim = 2;
    RVector c; ///< D²−1 coefficients

    static ChainState center(int dim);
    CMatrix density() const;
};

/// Isotropic unit vector (normalized standard Gaussian).
RVector random_direction(Rng& rng, int n);

struct Chord {
    double t_min = 0.0;
    double t_max = 0.0;
};

/// Maximal interval with ρ(c) + t·U ⪰ 0 for U = Σ u_i G_i.
/// Throws ChainRepair when ρ(c) has an eigenvalue below 1e-13.
Chord chord_endpoints(const ChainState& state, const RVector& u);

/// One move: random direction, uniform t on the chord shrunk by 1e-9 at both ends.
ChainState hit_and_run_step(const ChainState& state, Rng& rng);

/// Sequential hit-and-run chain started at the maximally mixed state.
class HitAndRunChain {
public:
    explicit HitAndRunChain(const SamplerConfig& config);

    /// Advances one move, re-centering toward c/2 on a chain-repair error.
    void step();
    /// Runs the burn-in on first use, then `thinning` moves; returns the new point.
    const ChainState& next();

    const ChainState& state() const noexcept { return state_; }
    const SamplerConfig& config() const noexcept { return config_; }
    std::size_t repairs() const noexcept { return repairs_; }
    std::size_t steps() const noexcept { return steps_; }

private:
    SamplerConfig config_;
    Rng rng_;
    ChainState state_;
    bool burned_in_ = false;
    std::size_t repairs_ = 0;
    std::size_t steps_ = 0;
};

/// Emits n states (burn-in, then every thinning-th state) to `sink`.
/// Requires d_A·d_B = config.dim.
void sample_states(const SamplerConfig& config, int da, int db, std::size_t n,
                   const std::function<void(const BipartiteState&)>& sink);
std::vector<BipartiteState> sample_states(const SamplerConfig& config, int da, int db,
                                          std::size_t n);

/// Emitted Bloch vectors with the metadata needed for replay.
struct BlochDump {
    int dim = 2;
    std::uint64_t seed = 0;
    long burn_in = 0;
    long thinning = 1;
    std::vector<RVector> samples;
};

BlochDump sample_bloch_vectors(const SamplerConfig& config, std::size_t n);

} // namespace steerlab
