#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include "erft/rng.hpp"
#include "erft/tensor.hpp"
#include "erft/velocity_net.hpp"

namespace erft {

// Training timesteps live on the dense grid {i/n_train : i = 1..n_train-1},
// test (sampling) steps start at the left endpoints {k/n_test : k = 0..n_test-1}
// and the final Euler step always lands on t = 1.
struct TimestepSchedule {
    std::size_t n_train = 1000;
    std::size_t n_test = 50;

    void validate() const;

    double test_point(std::size_t k) const;   // k / n_test, k < n_test
    double step_end(std::size_t k) const;     // (k+1) / n_test, exactly 1 for the last step
    double sample_train_t(RngState& rng) const;
};

struct TrainBatch {
    std::vector<Tensor> clips;      // x_vid, each [t_frames x dim]
    std::vector<Tensor> references; // x_img, each [dim]
    std::vector<Tensor> conditions; // c, each [cond_dim] (empty tensors when cond_dim = 0)
    std::vector<Tensor> noises;     // x_noi, each [t_frames x dim]
    std::vector<double> timesteps;  // t, each from the train grid

    std::size_t size() const noexcept { return clips.size(); }
    void validate() const;
};

// x_t = t * x_vid + (1 - t) * x_noi.
Tensor interpolate(const Tensor& x_vid, const Tensor& x_noi, double t);

// v_t = x_vid - x_noi.
Tensor target_velocity(const Tensor& x_vid, const Tensor& x_noi);

// Arbitrary velocity field u(x, reference, condition, t), used to drive the
// Euler sampler with stubs or oracles in addition to trained nets.
using VelocityField =
    std::function<Tensor(const Tensor& x, const Tensor& reference, const Tensor& condition, double t)>;

// Euler integration of dx/dt = u from t = 0 to t = 1 over the test grid:
// x_{k+1} = x_k + (step_end(k) - test_point(k)) * u(x_k, ..., test_point(k)).
Tensor euler_sample(const VelocityField& field, const Tensor& x0, const Tensor& reference,
                    const Tensor& condition, const TimestepSchedule& schedule);

Tensor euler_sample(const VelocityNetParams& params, const Tensor& x0, const Tensor& reference,
                    const Tensor& condition, const TimestepSchedule& schedule);

// One optimizer step on the batch-mean flow-matching loss
// mse(u(x_t, x_img, c, t), x_vid - x_noi). Returns the pre-step loss.
double fm_train_step(VelocityNetParams& params, OptimizerState& opt, const TrainBatch& batch,
                     double lr);

} // namespace erft
