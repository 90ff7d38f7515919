#pragma once

#include <cstdint>
#include <vector>

#include "erft/tensor.hpp"

namespace erft {

// Counter-based generator: output i of stream s is a pure function of
// (s, i), so replaying a stream never depends on call-site ordering and
// derived streams never collide with their parent.
struct RngState {
    std::uint64_t seed = 0;
    std::uint64_t counter = 0;

    explicit RngState(std::uint64_t seed_ = 0) : seed(seed_) {}

    std::uint64_t next_u64();

    // Uniform in [0, 1).
    double next_uniform();

    // Standard normal via Box-Muller, consuming exactly two raw draws.
    // Always finite.
    double next_gaussian();

    // Uniform index in [0, n). Rejection sampled, so no modulo bias.
    std::size_t next_index(std::size_t n);

    // Bernoulli(p) as a single uniform draw.
    bool next_bernoulli(double p);

    // Child stream keyed by this stream's seed and stream_id. Counter
    // starts at zero; the child's outputs are disjoint from the parent's.
    RngState derive(std::uint64_t stream_id) const;
};

// Raw counter-based word: mixes (seed, counter) through a splitmix64-style
// finalizer. Exposed so tests can pin exact values.
std::uint64_t rng_raw(std::uint64_t seed, std::uint64_t counter);

// Tensor of iid standard normals drawn from rng.
Tensor gaussian_sample(const std::vector<std::size_t>& shape, RngState& rng);

} // namespace erft
