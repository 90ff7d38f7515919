#pragma once

#include <cstddef>
#include <vector>

#include "erft/error_bank.hpp"
#include "erft/flow.hpp"
#include "erft/rng.hpp"
#include "erft/tensor.hpp"
#include "erft/velocity_net.hpp"

namespace erft {

struct InjectionConfig {
    double p_vid = 0.9;   // latent (end point) error probability
    double p_img = 0.9;   // reference image error probability
    double p_noi = 0.01;  // noise (start point) error probability
    double p_clean = 0.5; // probability of forcing fully clean inputs

    void validate() const;
};

struct ErrorTriple {
    Tensor e_vid; // [t_frames x dim]
    Tensor e_noi; // [t_frames x dim]
    Tensor e_img; // [dim]
};

struct Indicators {
    bool vid = false;
    bool noi = false;
    bool img = false;
};

// Which bank regions currently hold entries; empty regions force the
// matching indicator to zero so injection never needs a missing error.
struct ChannelAvailability {
    bool vid = false;
    bool noi = false;
    bool img = false;
};

enum class CaseTag { clean, start_injected, end_injected, mixed };

struct InjectionOutcome {
    Tensor x_vid_tilde; // [t_frames x dim]
    Tensor x_noi_tilde; // [t_frames x dim]
    Tensor x_img_tilde; // [dim]
    Indicators indicators;
    CaseTag case_tag = CaseTag::clean;
};

// Clean gate first: with probability p_clean all indicators are zero and
// no further randomness is consumed. Otherwise independent Bernoullis per
// channel, masked by availability.
Indicators sample_indicators(const InjectionConfig& config, const ChannelAvailability& avail,
                             RngState& rng);

// x_tilde = x + indicator * e, per channel. Indicator 0 copies the clean
// input bit-exactly rather than adding a zeroed error.
InjectionOutcome inject(const Tensor& x_vid, const Tensor& x_noi, const Tensor& x_img,
                        const ErrorTriple& errors, const Indicators& indicators);

struct PredictionPair {
    Tensor x_vid_hat; // x_t_tilde + (1 - t) * v_hat
    Tensor x_noi_hat; // x_t_tilde - t * v_hat
};

// One-step forward and backward integration from x_t_tilde along v_hat.
PredictionPair approximate_predictions(const Tensor& x_t_tilde, const Tensor& v_hat, double t);

struct RecycledTargets {
    Tensor v_rcy;     // x_vid - x_noi_tilde, pointing to the clean latent
    Tensor x_rcy_vid; // the clean latent itself
    Tensor x_rcy_noi; // x_t_tilde - t * v_rcy
};

RecycledTargets recycled_targets(const Tensor& x_vid, const Tensor& x_noi_tilde,
                                 const Tensor& x_t_tilde, double t);

struct CuratedPair {
    Tensor e_vid; // x_vid_hat - x_rcy_vid
    Tensor e_noi; // x_noi_hat - x_rcy_noi
};

CuratedPair curate_errors(const Tensor& x_vid_hat, const Tensor& x_noi_hat,
                          const Tensor& x_rcy_vid, const Tensor& x_rcy_noi);

// Uniformly chosen temporal slice of e_vid.
Tensor derive_image_error(const Tensor& e_vid, RngState& rng);

struct ErftStepResult {
    double loss = 0.0;
    std::vector<CuratedError> curated; // one per batch sample, tagged with its t
};

// One error-recycled training step: per sample, decide injection, draw the
// needed errors from the bank, inject, build x_t_tilde, take the gradient
// of mse(v_hat, v_rcy), and curate new errors from the same pre-update
// forward pass. One optimizer step on the batch mean. The bank is read
// only; callers decide how curated errors are merged back.
ErftStepResult erft_train_step(VelocityNetParams& params, OptimizerState& opt,
                               const TrainBatch& batch, const ErrorBank& bank,
                               const InjectionConfig& config, const TimestepSchedule& schedule,
                               double lr, RngState& inject_rng);

} // namespace erft
