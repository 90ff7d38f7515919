#include "erft/recycling.hpp"

#include <cmath>
#include <stdexcept>

#include "erft/errors.hpp"

namespace erft {

void InjectionConfig::validate() const {
    for (double p : {p_vid, p_img, p_noi, p_clean})
        if (!(p >= 0.0 && p <= 1.0))
            throw std::invalid_argument("InjectionConfig: probabilities must be in [0, 1]");
}

Indicators sample_indicators(const InjectionConfig& config, const ChannelAvailability& avail,
                             RngState& rng) {
    config.validate();
    if (rng.next_bernoulli(config.p_clean)) return {};
    Indicators ind;
    ind.vid = rng.next_bernoulli(config.p_vid) && avail.vid;
    ind.noi = rng.next_bernoulli(config.p_noi) && avail.noi;
    ind.img = rng.next_bernoulli(config.p_img) && avail.img;
    return ind;
}

namespace {

CaseTag classify(const Indicators& ind) {
    if (!ind.vid && !ind.noi && !ind.img) return CaseTag::clean;
    if (!ind.vid) return CaseTag::start_injected;
    if (ind.vid && !ind.noi && !ind.img) return CaseTag::end_injected;
    return CaseTag::mixed;
}

} // namespace

InjectionOutcome inject(const Tensor& x_vid, const Tensor& x_noi, const Tensor& x_img,
                        const ErrorTriple& errors, const Indicators& indicators) {
    if (!x_vid.same_shape(x_noi)) throw std::invalid_argument("inject: x_vid/x_noi shape mismatch");
    if (indicators.vid && !errors.e_vid.same_shape(x_vid))
        throw std::invalid_argument("inject: e_vid shape mismatch");
    if (indicators.noi && !errors.e_noi.same_shape(x_noi))
        throw std::invalid_argument("inject: e_noi shape mismatch");
    if (indicators.img && !errors.e_img.same_shape(x_img))
        throw std::invalid_argument("inject: e_img shape mismatch");

    InjectionOutcome out;
    out.indicators = indicators;
    out.case_tag = classify(indicators);
    out.x_vid_tilde = indicators.vid ? x_vid + errors.e_vid : x_vid;
    out.x_noi_tilde = indicators.noi ? x_noi + errors.e_noi : x_noi;
    out.x_img_tilde = indicators.img ? x_img + errors.e_img : x_img;
    return out;
}

PredictionPair approximate_predictions(const Tensor& x_t_tilde, const Tensor& v_hat, double t) {
    if (!x_t_tilde.same_shape(v_hat))
        throw std::invalid_argument("approximate_predictions: shape mismatch");
    if (!(t >= 0.0 && t <= 1.0))
        throw std::invalid_argument("approximate_predictions: t outside [0, 1]");
    PredictionPair out;
    out.x_vid_hat = x_t_tilde;
    axpy(out.x_vid_hat, 1.0 - t, v_hat);
    out.x_noi_hat = x_t_tilde;
    axpy(out.x_noi_hat, -t, v_hat);
    return out;
}

RecycledTargets recycled_targets(const Tensor& x_vid, const Tensor& x_noi_tilde,
                                 const Tensor& x_t_tilde, double t) {
    if (!x_vid.same_shape(x_noi_tilde) || !x_vid.same_shape(x_t_tilde))
        throw std::invalid_argument("recycled_targets: shape mismatch");
    if (!(t >= 0.0 && t <= 1.0))
        throw std::invalid_argument("recycled_targets: t outside [0, 1]");
    RecycledTargets out;
    out.v_rcy = x_vid - x_noi_tilde;
    out.x_rcy_vid = x_vid;
    out.x_rcy_noi = x_t_tilde;
    axpy(out.x_rcy_noi, -t, out.v_rcy);
    return out;
}

CuratedPair curate_errors(const Tensor& x_vid_hat, const Tensor& x_noi_hat,
                          const Tensor& x_rcy_vid, const Tensor& x_rcy_noi) {
    if (!x_vid_hat.same_shape(x_rcy_vid) || !x_noi_hat.same_shape(x_rcy_noi))
        throw std::invalid_argument("curate_errors: shape mismatch");
    return {x_vid_hat - x_rcy_vid, x_noi_hat - x_rcy_noi};
}

Tensor derive_image_error(const Tensor& e_vid, RngState& rng) {
    const auto& sh = e_vid.shape();
    if (sh.size() != 2 || sh[0] == 0)
        throw std::invalid_argument("derive_image_error: expected non-empty [t_frames x dim]");
    return row_of(e_vid, rng.next_index(sh[0]));
}

ErftStepResult erft_train_step(VelocityNetParams& params, OptimizerState& opt,
                               const TrainBatch& batch, const ErrorBank& bank,
                               const InjectionConfig& config, const TimestepSchedule& schedule,
                               double lr, RngState& inject_rng) {
    batch.validate();
    config.validate();
    const std::size_t n = batch.size();
    VelocityNetParams grads = zero_params(params.dims);
    ErftStepResult result;
    result.curated.reserve(n);

    for (std::size_t i = 0; i < n; ++i) {
        const Tensor& x_vid = batch.clips[i];
        const Tensor& x_noi = batch.noises[i];
        const Tensor& x_img = batch.references[i];
        const double t = batch.timesteps[i];
        const std::size_t g = nearest_grid(t, schedule);

        ChannelAvailability avail;
        avail.vid = bank.occupancy(BankChannel::vid, g) > 0;
        avail.noi = bank.occupancy(BankChannel::noi, g) > 0;
        avail.img = bank.any_vid_nonempty();

        const Indicators ind = sample_indicators(config, avail, inject_rng);
        ErrorTriple errors;
        if (ind.vid) errors.e_vid = bank.sample_vid(g, inject_rng);
        if (ind.noi) errors.e_noi = bank.sample_noi(g, inject_rng);
        if (ind.img) errors.e_img = bank.sample_img(inject_rng);

        const InjectionOutcome inj = inject(x_vid, x_noi, x_img, errors, ind);
        const Tensor x_t_tilde = interpolate(inj.x_vid_tilde, inj.x_noi_tilde, t);
        const RecycledTargets targets = recycled_targets(x_vid, inj.x_noi_tilde, x_t_tilde, t);

        LossGrad lg = loss_and_grad(
            params, NetInput{x_t_tilde, inj.x_img_tilde, batch.conditions[i], t}, targets.v_rcy);
        result.loss += lg.loss;
        for (std::size_t l = 0; l < params.dims.layer_count(); ++l) {
            axpy(grads.weights[l], 1.0, lg.grads.weights[l]);
            axpy(grads.biases[l], 1.0, lg.grads.biases[l]);
        }

        const PredictionPair preds = approximate_predictions(x_t_tilde, lg.prediction, t);
        CuratedPair pair = curate_errors(preds.x_vid_hat, preds.x_noi_hat, targets.x_rcy_vid,
                                         targets.x_rcy_noi);
        result.curated.push_back({t, std::move(pair.e_vid), std::move(pair.e_noi)});
    }

    result.loss /= static_cast<double>(n);
    if (!std::isfinite(result.loss)) throw TrainingDiverged("erft_train_step: non-finite loss");
    const double inv = 1.0 / static_cast<double>(n);
    for (std::size_t l = 0; l < params.dims.layer_count(); ++l) {
        grads.weights[l] *= inv;
        grads.biases[l] *= inv;
    }
    sgd_step(params, grads, lr, opt);
    return result;
}

} // namespace erft
