#include "erft/velocity_net.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <stdexcept>

#include "erft/errors.hpp"
#include "wire.hpp"

namespace erft {

namespace {

// in/out sizes of layer `l` for the given dims.
std::pair<std::size_t, std::size_t> layer_io(const NetDims& d, std::size_t l) {
    const std::size_t last = d.layer_count() - 1;
    const std::size_t in = (l == 0) ? d.input_size() : d.hidden_width;
    const std::size_t out = (l == last) ? d.output_size() : d.hidden_width;
    return {in, out};
}

void check_input(const NetDims& d, const NetInput& input) {
    if (input.noisy_clip.shape() != std::vector<std::size_t>{d.t_frames, d.dim})
        throw std::invalid_argument("velocity net: noisy_clip shape mismatch");
    if (input.reference.size() != d.dim)
        throw std::invalid_argument("velocity net: reference size mismatch");
    if (input.condition.size() != d.cond_dim)
        throw std::invalid_argument("velocity net: condition size mismatch");
    if (!(input.t >= 0.0 && input.t <= 1.0))
        throw std::invalid_argument("velocity net: t outside [0, 1]");
}

std::vector<double> assemble_input(const NetDims& d, const NetInput& input) {
    std::vector<double> x;
    x.reserve(d.input_size());
    x.insert(x.end(), input.noisy_clip.raw().begin(), input.noisy_clip.raw().end());
    x.insert(x.end(), input.reference.raw().begin(), input.reference.raw().end());
    x.insert(x.end(), input.condition.raw().begin(), input.condition.raw().end());
    for (double f : time_features(input.t)) x.push_back(f);
    return x;
}

// y = W x + b for a row-major [out x in] matrix.
void affine(const Tensor& w, const Tensor& b, const std::vector<double>& x, std::vector<double>& y) {
    const std::size_t out = b.size();
    const std::size_t in = x.size();
    y.assign(out, 0.0);
    for (std::size_t r = 0; r < out; ++r) {
        double acc = b[r];
        const double* wr = w.data() + r * in;
        for (std::size_t c = 0; c < in; ++c) acc += wr[c] * x[c];
        y[r] = acc;
    }
}

} // namespace

std::size_t NetDims::param_count() const noexcept {
    std::size_t total = 0;
    for (std::size_t l = 0; l < layer_count(); ++l) {
        const auto [in, out] = layer_io(*this, l);
        total += in * out + out;
    }
    return total;
}

void NetDims::validate() const {
    if (t_frames == 0 || dim == 0) throw std::invalid_argument("NetDims: t_frames and dim must be positive");
    if (hidden_layers > 0 && hidden_width == 0)
        throw std::invalid_argument("NetDims: hidden_width must be positive with hidden layers");
}

bool VelocityNetParams::all_finite() const noexcept {
    for (const Tensor& w : weights)
        if (!w.all_finite()) return false;
    for (const Tensor& b : biases)
        if (!b.all_finite()) return false;
    return true;
}

std::array<double, 4> time_features(double t) {
    // Frequencies pi and 3*pi: cos(pi t) is injective on [0,1], so t = 0
    // and t = 1 featurize differently (2*pi would alias the endpoints).
    const double p = std::numbers::pi * t;
    return {std::sin(p), std::cos(p), std::sin(3.0 * p), std::cos(3.0 * p)};
}

VelocityNetParams init_params(const NetDims& dims, RngState& rng) {
    dims.validate();
    VelocityNetParams p;
    p.dims = dims;
    for (std::size_t l = 0; l < dims.layer_count(); ++l) {
        const auto [in, out] = layer_io(dims, l);
        Tensor w({out, in});
        const double scale = 1.0 / std::sqrt(static_cast<double>(in));
        for (std::size_t i = 0; i < w.size(); ++i) w[i] = scale * rng.next_gaussian();
        p.weights.push_back(std::move(w));
        p.biases.emplace_back(std::vector<std::size_t>{out});
    }
    return p;
}

VelocityNetParams zero_params(const NetDims& dims) {
    dims.validate();
    VelocityNetParams p;
    p.dims = dims;
    for (std::size_t l = 0; l < dims.layer_count(); ++l) {
        const auto [in, out] = layer_io(dims, l);
        p.weights.emplace_back(std::vector<std::size_t>{out, in});
        p.biases.emplace_back(std::vector<std::size_t>{out});
    }
    return p;
}

Tensor forward(const VelocityNetParams& params, const NetInput& input) {
    check_input(params.dims, input);
    std::vector<double> act = assemble_input(params.dims, input);
    std::vector<double> next;
    const std::size_t last = params.dims.layer_count() - 1;
    for (std::size_t l = 0; l <= last; ++l) {
        affine(params.weights[l], params.biases[l], act, next);
        if (l != last)
            for (double& v : next) v = std::tanh(v);
        act.swap(next);
    }
    return Tensor({params.dims.t_frames, params.dims.dim}, std::move(act));
}

LossGrad loss_and_grad(const VelocityNetParams& params, const NetInput& input, const Tensor& target) {
    check_input(params.dims, input);
    const NetDims& d = params.dims;
    if (target.shape() != std::vector<std::size_t>{d.t_frames, d.dim})
        throw std::invalid_argument("loss_and_grad: target shape mismatch");

    const std::size_t last = d.layer_count() - 1;

    // Forward, keeping every layer's post-activation output.
    std::vector<std::vector<double>> acts(d.layer_count() + 1);
    acts[0] = assemble_input(d, input);
    for (std::size_t l = 0; l <= last; ++l) {
        affine(params.weights[l], params.biases[l], acts[l], acts[l + 1]);
        if (l != last)
            for (double& v : acts[l + 1]) v = std::tanh(v);
    }

    LossGrad out;
    out.grads = zero_params(d);
    const std::size_t m = d.output_size();

    // dL/dy for L = (1/m) sum (y - target)^2.
    std::vector<double> delta(m);
    double loss = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        const double diff = acts[last + 1][i] - target[i];
        loss += diff * diff;
        delta[i] = 2.0 * diff / static_cast<double>(m);
    }
    out.loss = loss / static_cast<double>(m);
    out.prediction = Tensor({d.t_frames, d.dim}, acts[last + 1]);

    std::vector<double> prev_delta;
    for (std::size_t l = last + 1; l-- > 0;) {
        const auto [in, outn] = layer_io(d, l);
        Tensor& gw = out.grads.weights[l];
        Tensor& gb = out.grads.biases[l];
        const std::vector<double>& x = acts[l];
        for (std::size_t r = 0; r < outn; ++r) {
            gb[r] = delta[r];
            double* gr = gw.data() + r * in;
            for (std::size_t c = 0; c < in; ++c) gr[c] = delta[r] * x[c];
        }
        if (l == 0) break;
        // Propagate through W^T, then through tanh of the previous layer:
        // acts[l] already holds tanh(z), so tanh'(z) = 1 - acts[l]^2.
        prev_delta.assign(in, 0.0);
        const Tensor& w = params.weights[l];
        for (std::size_t r = 0; r < outn; ++r) {
            const double* wr = w.data() + r * in;
            for (std::size_t c = 0; c < in; ++c) prev_delta[c] += wr[c] * delta[r];
        }
        for (std::size_t c = 0; c < in; ++c) prev_delta[c] *= 1.0 - x[c] * x[c];
        delta.swap(prev_delta);
    }
    return out;
}

void sgd_step(VelocityNetParams& params, const VelocityNetParams& grads, double lr,
              OptimizerState& state) {
    if (lr < 0.0) throw std::invalid_argument("sgd_step: lr must be >= 0");
    if (params.dims != grads.dims) throw std::invalid_argument("sgd_step: dims mismatch");
    if (!grads.all_finite()) throw TrainingDiverged("sgd_step: non-finite gradients");

    const std::size_t layers = params.dims.layer_count();
    if (state.kind == OptimizerKind::sgd) {
        for (std::size_t l = 0; l < layers; ++l) {
            axpy(params.weights[l], -lr, grads.weights[l]);
            axpy(params.biases[l], -lr, grads.biases[l]);
        }
        ++state.step_count;
        return;
    }

    if (state.m_weights.empty()) {
        for (std::size_t l = 0; l < layers; ++l) {
            state.m_weights.push_back(Tensor::zeros_like(params.weights[l]));
            state.v_weights.push_back(Tensor::zeros_like(params.weights[l]));
            state.m_biases.push_back(Tensor::zeros_like(params.biases[l]));
            state.v_biases.push_back(Tensor::zeros_like(params.biases[l]));
        }
    }
    ++state.step_count;
    const double t = static_cast<double>(state.step_count);
    const double bc1 = 1.0 - std::pow(state.beta1, t);
    const double bc2 = 1.0 - std::pow(state.beta2, t);

    auto update = [&](Tensor& p, const Tensor& g, Tensor& m, Tensor& v) {
        for (std::size_t i = 0; i < p.size(); ++i) {
            m[i] = state.beta1 * m[i] + (1.0 - state.beta1) * g[i];
            v[i] = state.beta2 * v[i] + (1.0 - state.beta2) * g[i] * g[i];
            const double mhat = m[i] / bc1;
            const double vhat = v[i] / bc2;
            p[i] -= lr * mhat / (std::sqrt(vhat) + state.eps);
        }
    };
    for (std::size_t l = 0; l < layers; ++l) {
        update(params.weights[l], grads.weights[l], state.m_weights[l], state.v_weights[l]);
        update(params.biases[l], grads.biases[l], state.m_biases[l], state.v_biases[l]);
    }
}

double finite_difference_grad(const VelocityNetParams& params, const NetInput& input,
                              const Tensor& target, std::size_t layer, bool bias,
                              std::size_t flat_index, double h) {
    auto eval = [&](double shift) {
        VelocityNetParams p = params;
        Tensor& t = bias ? p.biases[layer] : p.weights[layer];
        t[flat_index] += shift;
        Tensor pred = forward(p, input);
        pred -= target;
        return mean_square(pred);
    };
    return (eval(h) - eval(-h)) / (2.0 * h);
}

void save_checkpoint(const VelocityNetParams& params, const std::filesystem::path& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw FormatError("cannot open checkpoint for writing: " + path.string());
    wire::put_magic(os, "ERFT1");
    const NetDims& d = params.dims;
    for (std::size_t v : {d.t_frames, d.dim, d.cond_dim, d.hidden_layers, d.hidden_width})
        wire::put_u32(os, static_cast<std::uint32_t>(v));
    for (std::size_t l = 0; l < d.layer_count(); ++l) {
        for (std::size_t i = 0; i < params.weights[l].size(); ++i) wire::put_f64(os, params.weights[l][i]);
        for (std::size_t i = 0; i < params.biases[l].size(); ++i) wire::put_f64(os, params.biases[l][i]);
    }
    if (!os) throw FormatError("failed writing checkpoint: " + path.string());
}

VelocityNetParams load_checkpoint(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw FormatError("cannot open checkpoint: " + path.string());
    wire::expect_magic(is, "ERFT1");
    NetDims d;
    d.t_frames = wire::get_u32(is, "t_frames");
    d.dim = wire::get_u32(is, "dim");
    d.cond_dim = wire::get_u32(is, "cond_dim");
    d.hidden_layers = wire::get_u32(is, "hidden_layers");
    d.hidden_width = wire::get_u32(is, "hidden_width");
    d.validate();

    VelocityNetParams p = zero_params(d);
    for (std::size_t l = 0; l < d.layer_count(); ++l) {
        for (std::size_t i = 0; i < p.weights[l].size(); ++i) p.weights[l][i] = wire::get_f64(is, "weights");
        for (std::size_t i = 0; i < p.biases[l].size(); ++i) p.biases[l][i] = wire::get_f64(is, "biases");
    }
    char extra;
    if (is.read(&extra, 1)) throw FormatError("trailing bytes after checkpoint payload: " + path.string());
    return p;
}

} // namespace erft
