#pragma once

#include <cstddef>

#include "erft/rng.hpp"
#include "erft/tensor.hpp"

namespace erft {

// Synthetic clip generator. The ground-truth dynamics are a block-diagonal
// 2x2 rotation by `angle` radians on consecutive coordinate pairs, which
// preserves the Euclidean norm exactly. That gives long-horizon rollouts
// two exactly measurable degradation axes: magnitude drift and motion drift.
struct ClipSpec {
    std::size_t frames = 8;   // T_frames, >= 2
    std::size_t dim = 8;      // D, even, >= 2
    double angle = 0.2;       // radians of rotation per frame
    double data_noise = 0.01; // per-frame gaussian sigma

    void validate() const;
};

struct Clip {
    Tensor frames; // [T_frames x D]
    ClipSpec spec;
};

// Frame 0 is initial_frame; frame_{i+1} = R(angle) * frame_i + sigma * gauss.
Clip generate_clip(const ClipSpec& spec, const Tensor& initial_frame, RngState& rng);

// Exact noise-free continuation: R(angle) * frame.
Tensor oracle_next_frame(const ClipSpec& spec, const Tensor& frame);

// Random frame on the sphere of radius `norm`.
Tensor random_unit_frame(std::size_t dim, double norm, RngState& rng);

struct DriftMetrics {
    double norm_drift = 0.0; // mean |  ||frame|| - r | / r
    double step_drift = 0.0; // mean || frame_{i+1} - R(w) frame_i || / r
};

DriftMetrics drift_metric(const Clip& clip, double reference_norm, const ClipSpec& spec);

// Drift over a raw frame sequence [N x D] with the same definitions.
DriftMetrics drift_metric_frames(const Tensor& frames, double reference_norm, const ClipSpec& spec);

} // namespace erft
