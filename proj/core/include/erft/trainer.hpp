#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "erft/error_bank.hpp"
#include "erft/flow.hpp"
#include "erft/recycling.hpp"
#include "erft/rng.hpp"
#include "erft/synth.hpp"
#include "erft/velocity_net.hpp"

namespace erft {

struct TrainerConfig {
    ClipSpec clip;
    std::size_t cond_dim = 0;
    std::size_t hidden_layers = 2;
    std::size_t hidden_width = 64;
    TimestepSchedule schedule;
    InjectionConfig injection;
    std::size_t bank_capacity = 500;
    std::size_t warmup_iters = 20;
    std::size_t workers = 4;
    std::size_t steps = 5000;
    std::size_t batch_size = 16;
    double learning_rate = 1e-3;
    OptimizerKind optimizer = OptimizerKind::adam;
    std::uint64_t seed = 1;

    void validate() const;
    NetDims net_dims() const;
};

struct TrainOutput {
    VelocityNetParams params;
    std::vector<double> losses; // pre-step loss per training step
    ErrorBank bank;             // the local worker's bank (empty for the baseline)
};

// Fresh training batch: clips from random unit-norm initial frames, the
// clean initial frame as reference, gaussian noise, and train-grid
// timesteps, all drawn from data_rng.
TrainBatch make_batch(const TrainerConfig& config, RngState& data_rng);

// Baseline flow-matching training.
TrainOutput train_flow_matching(const TrainerConfig& config);

// Error-recycled training. Worker 0 owns the optimizer; during the first
// warmup_iters iterations the remaining workers curate errors on their own
// batches (no parameter updates) and everything is merged into every
// worker's bank in worker order, after which worker 0 banks locally.
TrainOutput train_error_recycling(const TrainerConfig& config);

struct AblationDrop {
    bool img = false;
    bool vid = false;
    bool noi = false;
};

// ERFT training with the dropped channels' injection probabilities forced
// to zero; everything else identical to train_error_recycling.
TrainOutput ablate(const TrainerConfig& config, const AblationDrop& drop);

} // namespace erft
