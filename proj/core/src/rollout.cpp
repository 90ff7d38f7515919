#include "erft/rollout.hpp"

#include <stdexcept>
#include <string>

#include "erft/errors.hpp"

namespace erft {

void RolloutConfig::validate() const {
    clip.validate();
    schedule.validate();
    if (num_clips < 1) throw std::invalid_argument("RolloutConfig: num_clips must be >= 1");
    if (motion_frames < 1 || motion_frames > clip.frames)
        throw std::invalid_argument("RolloutConfig: motion_frames must be in [1, t_frames]");
}

namespace {

Tensor derive_reference(const RolloutConfig& config, const Tensor& prev_clip,
                        const Tensor& initial_frame) {
    switch (config.reference_mode) {
    case ReferenceMode::last_frame:
        return row_of(prev_clip, config.clip.frames - 1);
    case ReferenceMode::motion_frames: {
        Tensor ref({config.clip.dim});
        const std::size_t m = config.motion_frames;
        for (std::size_t i = config.clip.frames - m; i < config.clip.frames; ++i)
            ref += row_of(prev_clip, i);
        ref *= 1.0 / static_cast<double>(m);
        return ref;
    }
    case ReferenceMode::fixed_anchor:
        return initial_frame;
    }
    throw std::invalid_argument("RolloutConfig: unknown reference_mode");
}

} // namespace

RolloutTrace generate_long(const ClipSampler& sampler, const Tensor& initial_frame,
                           const Tensor& condition, const RolloutConfig& config, RngState rng) {
    config.validate();
    if (initial_frame.size() != config.clip.dim)
        throw std::invalid_argument("generate_long: initial_frame dimension mismatch");

    RolloutTrace trace;
    trace.seed = rng.seed;
    const double reference_norm = l2_norm(initial_frame);
    Tensor reference = initial_frame;
    for (std::size_t i = 0; i < config.num_clips; ++i) {
        RngState noise_rng = rng.derive(i);
        const Tensor noise = gaussian_sample({config.clip.frames, config.clip.dim}, noise_rng);
        Tensor clip;
        try {
            clip = sampler(noise, reference, condition);
        } catch (const SamplingDiverged& e) {
            throw SamplingDiverged(std::string(e.what()) + " (clip " + std::to_string(i) + ")", i);
        }
        if (clip.shape() != std::vector<std::size_t>{config.clip.frames, config.clip.dim})
            throw std::invalid_argument("generate_long: sampler returned wrong clip shape");
        trace.metrics.push_back(drift_metric_frames(clip, reference_norm, config.clip));
        reference = derive_reference(config, clip, initial_frame);
        trace.clips.push_back(std::move(clip));
    }
    return trace;
}

RolloutTrace generate_long(const VelocityNetParams& params, const Tensor& initial_frame,
                           const Tensor& condition, const RolloutConfig& config, RngState rng) {
    ClipSampler sampler = [&params, &config](const Tensor& noise, const Tensor& ref,
                                             const Tensor& cond) {
        return euler_sample(params, noise, ref, cond, config.schedule);
    };
    return generate_long(sampler, initial_frame, condition, config, rng);
}

RolloutTrace generate_long(const VelocityField& field, const Tensor& initial_frame,
                           const Tensor& condition, const RolloutConfig& config, RngState rng) {
    ClipSampler sampler = [&field, &config](const Tensor& noise, const Tensor& ref,
                                            const Tensor& cond) {
        return euler_sample(field, noise, ref, cond, config.schedule);
    };
    return generate_long(sampler, initial_frame, condition, config, rng);
}

double least_squares_slope(std::span<const double> y) {
    const std::size_t n = y.size();
    if (n < 2) return 0.0;
    const double xbar = static_cast<double>(n - 1) / 2.0;
    double ybar = 0.0;
    for (double v : y) ybar += v;
    ybar /= static_cast<double>(n);
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double dx = static_cast<double>(i) - xbar;
        num += dx * (y[i] - ybar);
        den += dx * dx;
    }
    return num / den;
}

MethodSummary summarize_traces(std::span<const RolloutTrace> traces) {
    if (traces.empty()) throw std::invalid_argument("summarize_traces: no traces");
    const std::size_t k = traces[0].metrics.size();
    for (const auto& t : traces)
        if (t.metrics.size() != k)
            throw std::invalid_argument("summarize_traces: traces disagree on num_clips");

    MethodSummary s;
    s.mean_norm_drift.assign(k, 0.0);
    s.mean_step_drift.assign(k, 0.0);
    for (const auto& t : traces) {
        for (std::size_t i = 0; i < k; ++i) {
            s.mean_norm_drift[i] += t.metrics[i].norm_drift;
            s.mean_step_drift[i] += t.metrics[i].step_drift;
        }
    }
    const double inv = 1.0 / static_cast<double>(traces.size());
    for (std::size_t i = 0; i < k; ++i) {
        s.mean_norm_drift[i] *= inv;
        s.mean_step_drift[i] *= inv;
    }
    s.terminal_norm_drift = s.mean_norm_drift[k - 1];
    s.terminal_step_drift = s.mean_step_drift[k - 1];
    s.norm_slope = least_squares_slope(s.mean_norm_drift);
    s.step_slope = least_squares_slope(s.mean_step_drift);
    return s;
}

RunComparison compare_runs(std::span<const RolloutTrace> a, std::span<const RolloutTrace> b) {
    if (a.empty() || b.empty()) throw std::invalid_argument("compare_runs: empty trace list");
    if (a.size() != b.size())
        throw std::invalid_argument("compare_runs: methods ran different seed counts");
    if (a[0].metrics.size() != b[0].metrics.size())
        throw std::invalid_argument("compare_runs: num_clips mismatch between methods");

    RunComparison cmp;
    cmp.a = summarize_traces(a);
    cmp.b = summarize_traces(b);
    cmp.seeds = a.size();
    const std::size_t k = a[0].metrics.size();
    for (std::size_t s = 0; s < cmp.seeds; ++s) {
        const DriftMetrics& ma = a[s].metrics[k - 1];
        const DriftMetrics& mb = b[s].metrics[k - 1];
        if (ma.norm_drift < mb.norm_drift) ++cmp.a_norm_wins;
        else if (mb.norm_drift < ma.norm_drift) ++cmp.b_norm_wins;
        if (ma.step_drift < mb.step_drift) ++cmp.a_step_wins;
        else if (mb.step_drift < ma.step_drift) ++cmp.b_step_wins;
    }
    return cmp;
}

} // namespace erft
