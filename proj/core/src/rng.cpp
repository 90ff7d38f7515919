#include "erft/rng.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace erft {

namespace {

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ull;

std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

} // namespace

std::uint64_t rng_raw(std::uint64_t seed, std::uint64_t counter) {
    return mix(seed + kGolden * (counter + 1));
}

std::uint64_t RngState::next_u64() {
    return rng_raw(seed, counter++);
}

double RngState::next_uniform() {
    // 53 high bits -> [0, 1).
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double RngState::next_gaussian() {
    // u1 mapped into (0, 1] so the log never sees zero.
    const double u1 = static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
    const double u2 = static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::size_t RngState::next_index(std::size_t n) {
    if (n == 0) throw std::invalid_argument("next_index: n must be positive");
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t r;
    do {
        r = next_u64();
    } while (r >= limit);
    return static_cast<std::size_t>(r % n);
}

bool RngState::next_bernoulli(double p) {
    if (p < 0.0 || p > 1.0) throw std::invalid_argument("next_bernoulli: p outside [0, 1]");
    return next_uniform() < p;
}

RngState RngState::derive(std::uint64_t stream_id) const {
    RngState child;
    child.seed = mix(seed ^ rng_raw(stream_id, 0x5EEDull));
    child.counter = 0;
    return child;
}

Tensor gaussian_sample(const std::vector<std::size_t>& shape, RngState& rng) {
    Tensor out(shape);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = rng.next_gaussian();
    return out;
}

} // namespace erft
