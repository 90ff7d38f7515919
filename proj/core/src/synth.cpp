#include "erft/synth.hpp"

#include <cmath>
#include <stdexcept>

namespace erft {

void ClipSpec::validate() const {
    if (frames < 2) throw std::invalid_argument("ClipSpec: frames must be >= 2");
    if (dim < 2 || dim % 2 != 0) throw std::invalid_argument("ClipSpec: dim must be even and >= 2");
    if (data_noise < 0.0) throw std::invalid_argument("ClipSpec: data_noise must be >= 0");
}

Tensor oracle_next_frame(const ClipSpec& spec, const Tensor& frame) {
    spec.validate();
    if (frame.size() != spec.dim)
        throw std::invalid_argument("oracle_next_frame: frame dimension mismatch");
    const double c = std::cos(spec.angle);
    const double s = std::sin(spec.angle);
    Tensor out({spec.dim});
    for (std::size_t p = 0; p + 1 < spec.dim; p += 2) {
        out[p] = c * frame[p] - s * frame[p + 1];
        out[p + 1] = s * frame[p] + c * frame[p + 1];
    }
    return out;
}

Clip generate_clip(const ClipSpec& spec, const Tensor& initial_frame, RngState& rng) {
    spec.validate();
    if (initial_frame.size() != spec.dim)
        throw std::invalid_argument("generate_clip: initial_frame dimension mismatch");

    Clip clip;
    clip.spec = spec;
    clip.frames = Tensor({spec.frames, spec.dim});
    set_row(clip.frames, 0, initial_frame);
    Tensor prev = initial_frame;
    for (std::size_t i = 1; i < spec.frames; ++i) {
        Tensor next = oracle_next_frame(spec, prev);
        if (spec.data_noise > 0.0) {
            for (std::size_t d = 0; d < spec.dim; ++d)
                next[d] += spec.data_noise * rng.next_gaussian();
        }
        set_row(clip.frames, i, next);
        prev = next;
    }
    return clip;
}

Tensor random_unit_frame(std::size_t dim, double norm, RngState& rng) {
    if (dim == 0) throw std::invalid_argument("random_unit_frame: dim must be positive");
    if (norm <= 0.0) throw std::invalid_argument("random_unit_frame: norm must be positive");
    Tensor f({dim});
    double n = 0.0;
    // Resample in the (astronomically unlikely) event of a near-zero vector.
    do {
        for (std::size_t d = 0; d < dim; ++d) f[d] = rng.next_gaussian();
        n = l2_norm(f);
    } while (n < 1e-12);
    f *= norm / n;
    return f;
}

DriftMetrics drift_metric_frames(const Tensor& frames, double reference_norm, const ClipSpec& spec) {
    spec.validate();
    if (reference_norm <= 0.0)
        throw std::invalid_argument("drift_metric: reference_norm must be positive");
    const auto& sh = frames.shape();
    if (sh.size() != 2 || sh[0] == 0)
        throw std::invalid_argument("drift_metric: expected non-empty [N x D] frames");
    if (sh[1] != spec.dim)
        throw std::invalid_argument("drift_metric: frame dimension mismatch");

    const std::size_t n = sh[0];
    DriftMetrics m;
    for (std::size_t i = 0; i < n; ++i) {
        const double fn = l2_norm(row_of(frames, i));
        m.norm_drift += std::abs(fn - reference_norm) / reference_norm;
    }
    m.norm_drift /= static_cast<double>(n);

    if (n > 1) {
        for (std::size_t i = 0; i + 1 < n; ++i) {
            const Tensor pred = oracle_next_frame(spec, row_of(frames, i));
            m.step_drift += l2_distance(row_of(frames, i + 1), pred) / reference_norm;
        }
        m.step_drift /= static_cast<double>(n - 1);
    }
    return m;
}

DriftMetrics drift_metric(const Clip& clip, double reference_norm, const ClipSpec& spec) {
    return drift_metric_frames(clip.frames, reference_norm, spec);
}

} // namespace erft
