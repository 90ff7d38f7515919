#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <vector>

#include "erft/rng.hpp"
#include "erft/tensor.hpp"

namespace erft {

// Fully-connected velocity field u(x_t, x_img, c, t; theta).
//
// Input vector layout: flattened clip (t_frames*dim) ++ reference frame
// (dim) ++ condition (cond_dim, may be 0) ++ 4 sinusoidal time features.
// hidden_layers counts hidden activations: 0 means a single linear map,
// H >= 1 means input->width, (H-1) x width->width, width->output, with
// tanh after every layer except the last.
struct NetDims {
    std::size_t t_frames = 8;
    std::size_t dim = 8;
    std::size_t cond_dim = 0;
    std::size_t hidden_layers = 2;
    std::size_t hidden_width = 64;

    std::size_t input_size() const noexcept { return t_frames * dim + dim + cond_dim + 4; }
    std::size_t output_size() const noexcept { return t_frames * dim; }
    std::size_t layer_count() const noexcept { return hidden_layers + 1; }
    std::size_t param_count() const noexcept;

    void validate() const;
    bool operator==(const NetDims&) const = default;
};

struct VelocityNetParams {
    NetDims dims;
    std::vector<Tensor> weights; // layer_count() matrices, row-major [out x in]
    std::vector<Tensor> biases;  // layer_count() vectors [out]

    bool all_finite() const noexcept;
    bool operator==(const VelocityNetParams&) const = default;
};

struct NetInput {
    Tensor noisy_clip; // [t_frames x dim]
    Tensor reference;  // [dim]
    Tensor condition;  // [cond_dim], empty when cond_dim = 0
    double t = 0.0;    // in [0, 1]
};

// Gaussian fan-in-scaled weights, zero biases.
VelocityNetParams init_params(const NetDims& dims, RngState& rng);

// All-zero parameters; forward output is exactly zero for any input.
VelocityNetParams zero_params(const NetDims& dims);

// The four time features appended to the input vector.
std::array<double, 4> time_features(double t);

Tensor forward(const VelocityNetParams& params, const NetInput& input);

struct LossGrad {
    double loss = 0.0;
    VelocityNetParams grads;
    Tensor prediction; // forward output, reused by callers that need v_hat
};

// loss = mean over t_frames*dim elements of (forward - target)^2,
// grads = exact reverse-mode derivative w.r.t. every parameter.
LossGrad loss_and_grad(const VelocityNetParams& params, const NetInput& input, const Tensor& target);

enum class OptimizerKind { sgd, adam };

struct OptimizerState {
    OptimizerKind kind = OptimizerKind::adam;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    std::size_t step_count = 0;
    std::vector<Tensor> m_weights, v_weights, m_biases, v_biases;
};

// One optimizer step in place. Adam with bias-corrected moments by
// default, plain SGD when state.kind == sgd. lr = 0 is a legal no-op.
void sgd_step(VelocityNetParams& params, const VelocityNetParams& grads, double lr,
              OptimizerState& state);

// Central finite-difference gradient of the loss at one parameter,
// used as the oracle for gradient tests.
double finite_difference_grad(const VelocityNetParams& params, const NetInput& input,
                              const Tensor& target, std::size_t layer, bool bias,
                              std::size_t flat_index, double h = 1e-4);

// Checkpoint: magic "ERFT1", five little-endian uint32 dims
// (t_frames, dim, cond_dim, hidden_layers, hidden_width), then per layer
// the weight matrix row-major and the bias vector as little-endian f64.
void save_checkpoint(const VelocityNetParams& params, const std::filesystem::path& path);
VelocityNetParams load_checkpoint(const std::filesystem::path& path);

} // namespace erft
