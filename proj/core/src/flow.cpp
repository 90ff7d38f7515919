#include "erft/flow.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "erft/errors.hpp"

namespace erft {

void TimestepSchedule::validate() const {
    if (n_train < 2) throw std::invalid_argument("TimestepSchedule: n_train must be >= 2");
    if (n_test < 1) throw std::invalid_argument("TimestepSchedule: n_test must be >= 1");
}

double TimestepSchedule::test_point(std::size_t k) const {
    if (k >= n_test) throw std::invalid_argument("test_point: k out of range");
    return static_cast<double>(k) / static_cast<double>(n_test);
}

double TimestepSchedule::step_end(std::size_t k) const {
    if (k >= n_test) throw std::invalid_argument("step_end: k out of range");
    if (k + 1 == n_test) return 1.0;
    return static_cast<double>(k + 1) / static_cast<double>(n_test);
}

double TimestepSchedule::sample_train_t(RngState& rng) const {
    validate();
    const std::size_t i = 1 + rng.next_index(n_train - 1);
    return static_cast<double>(i) / static_cast<double>(n_train);
}

void TrainBatch::validate() const {
    const std::size_t n = clips.size();
    if (n == 0) throw std::invalid_argument("TrainBatch: empty batch");
    if (references.size() != n || conditions.size() != n || noises.size() != n ||
        timesteps.size() != n)
        throw std::invalid_argument("TrainBatch: field lengths differ");
    for (std::size_t i = 0; i < n; ++i) {
        if (!clips[i].same_shape(noises[i]))
            throw std::invalid_argument("TrainBatch: clip/noise shape mismatch");
        if (!(timesteps[i] >= 0.0 && timesteps[i] <= 1.0))
            throw std::invalid_argument("TrainBatch: timestep outside [0, 1]");
    }
}

Tensor interpolate(const Tensor& x_vid, const Tensor& x_noi, double t) {
    if (!x_vid.same_shape(x_noi)) throw std::invalid_argument("interpolate: shape mismatch");
    if (!(t >= 0.0 && t <= 1.0)) throw std::invalid_argument("interpolate: t outside [0, 1]");
    Tensor out = Tensor::zeros_like(x_vid);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = t * x_vid[i] + (1.0 - t) * x_noi[i];
    return out;
}

Tensor target_velocity(const Tensor& x_vid, const Tensor& x_noi) {
    if (!x_vid.same_shape(x_noi)) throw std::invalid_argument("target_velocity: shape mismatch");
    return x_vid - x_noi;
}

Tensor euler_sample(const VelocityField& field, const Tensor& x0, const Tensor& reference,
                    const Tensor& condition, const TimestepSchedule& schedule) {
    schedule.validate();
    Tensor x = x0;
    for (std::size_t k = 0; k < schedule.n_test; ++k) {
        const double t = schedule.test_point(k);
        const double dt = schedule.step_end(k) - t;
        axpy(x, dt, field(x, reference, condition, t));
        if (!x.all_finite())
            throw SamplingDiverged("euler_sample: non-finite state at step " + std::to_string(k));
    }
    return x;
}

Tensor euler_sample(const VelocityNetParams& params, const Tensor& x0, const Tensor& reference,
                    const Tensor& condition, const TimestepSchedule& schedule) {
    return euler_sample(
        [&params](const Tensor& x, const Tensor& ref, const Tensor& cond, double t) {
            return forward(params, NetInput{x, ref, cond, t});
        },
        x0, reference, condition, schedule);
}

double fm_train_step(VelocityNetParams& params, OptimizerState& opt, const TrainBatch& batch,
                     double lr) {
    batch.validate();
    const std::size_t n = batch.size();
    VelocityNetParams grads = zero_params(params.dims);
    double loss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const Tensor x_t = interpolate(batch.clips[i], batch.noises[i], batch.timesteps[i]);
        const Tensor v = target_velocity(batch.clips[i], batch.noises[i]);
        LossGrad lg = loss_and_grad(
            params, NetInput{x_t, batch.references[i], batch.conditions[i], batch.timesteps[i]}, v);
        loss += lg.loss;
        for (std::size_t l = 0; l < params.dims.layer_count(); ++l) {
            axpy(grads.weights[l], 1.0, lg.grads.weights[l]);
            axpy(grads.biases[l], 1.0, lg.grads.biases[l]);
        }
    }
    loss /= static_cast<double>(n);
    if (!std::isfinite(loss)) throw TrainingDiverged("fm_train_step: non-finite loss");
    const double inv = 1.0 / static_cast<double>(n);
    for (std::size_t l = 0; l < params.dims.layer_count(); ++l) {
        grads.weights[l] *= inv;
        grads.biases[l] *= inv;
    }
    sgd_step(params, grads, lr, opt);
    return loss;
}

} // namespace erft
