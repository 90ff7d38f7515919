#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "erft/flow.hpp"
#include "erft/rng.hpp"
#include "erft/synth.hpp"
#include "erft/tensor.hpp"
#include "erft/velocity_net.hpp"

namespace erft {

enum class ReferenceMode { last_frame, motion_frames, fixed_anchor };

struct RolloutConfig {
    std::size_t num_clips = 20;
    std::size_t motion_frames = 5;
    ReferenceMode reference_mode = ReferenceMode::last_frame;
    TimestepSchedule schedule;
    ClipSpec clip; // geometry and oracle dynamics for the drift metrics

    void validate() const;
};

struct RolloutTrace {
    std::vector<Tensor> clips; // num_clips tensors [t_frames x dim]
    std::vector<DriftMetrics> metrics;
    std::uint64_t seed = 0;
};

// Produces one clip from fresh noise given the previous reference frame.
using ClipSampler =
    std::function<Tensor(const Tensor& noise, const Tensor& reference, const Tensor& condition)>;

// Autoregressive long generation: clip 0 is conditioned on initial_frame,
// clip i on a reference derived from clip i-1 (last frame, mean of the
// last motion_frames frames, or always the initial anchor). Clip i's noise
// comes from rng.derive(i), so traces are reproducible per (seed, clip).
// Drift is measured against the oracle dynamics with reference_norm
// = ||initial_frame||.
RolloutTrace generate_long(const ClipSampler& sampler, const Tensor& initial_frame,
                           const Tensor& condition, const RolloutConfig& config, RngState rng);

RolloutTrace generate_long(const VelocityNetParams& params, const Tensor& initial_frame,
                           const Tensor& condition, const RolloutConfig& config, RngState rng);

RolloutTrace generate_long(const VelocityField& field, const Tensor& initial_frame,
                           const Tensor& condition, const RolloutConfig& config, RngState rng);

struct MethodSummary {
    std::vector<double> mean_norm_drift; // per clip index, averaged over traces
    std::vector<double> mean_step_drift;
    double terminal_norm_drift = 0.0; // mean over traces of the final clip's norm drift
    double terminal_step_drift = 0.0;
    double norm_slope = 0.0; // least-squares slope of mean norm drift vs clip index
    double step_slope = 0.0;
};

MethodSummary summarize_traces(std::span<const RolloutTrace> traces);

struct RunComparison {
    MethodSummary a;
    MethodSummary b;
    std::size_t seeds = 0;       // paired trace count
    std::size_t a_norm_wins = 0; // seeds where a's terminal norm drift is strictly lower
    std::size_t b_norm_wins = 0;
    std::size_t a_step_wins = 0;
    std::size_t b_step_wins = 0;
};

// Pairs traces by position (one per seed). Trace lists must agree on
// num_clips.
RunComparison compare_runs(std::span<const RolloutTrace> a, std::span<const RolloutTrace> b);

// Least-squares slope of y against x = 0, 1, ..., y.size()-1.
double least_squares_slope(std::span<const double> y);

} // namespace erft
