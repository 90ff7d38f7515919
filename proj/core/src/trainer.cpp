#include "erft/trainer.hpp"

#include <stdexcept>

namespace erft {

namespace {

// Stream ids under the run seed. Worker 0 is the trainer; auxiliary
// workers get disjoint data/injection streams during warmup.
constexpr std::uint64_t kInitStream = 0;
constexpr std::uint64_t kDataStream = 1;
constexpr std::uint64_t kInjectStream = 2;
constexpr std::uint64_t kAuxDataBase = 100;
constexpr std::uint64_t kAuxInjectBase = 200;

} // namespace

void TrainerConfig::validate() const {
    clip.validate();
    schedule.validate();
    injection.validate();
    if (batch_size < 1) throw std::invalid_argument("TrainerConfig: batch_size must be >= 1");
    if (workers < 1) throw std::invalid_argument("TrainerConfig: workers must be >= 1");
    if (bank_capacity < 1) throw std::invalid_argument("TrainerConfig: bank_capacity must be >= 1");
    if (learning_rate < 0.0) throw std::invalid_argument("TrainerConfig: learning_rate must be >= 0");
    net_dims().validate();
}

NetDims TrainerConfig::net_dims() const {
    return NetDims{clip.frames, clip.dim, cond_dim, hidden_layers, hidden_width};
}

TrainBatch make_batch(const TrainerConfig& config, RngState& data_rng) {
    TrainBatch batch;
    batch.clips.reserve(config.batch_size);
    for (std::size_t i = 0; i < config.batch_size; ++i) {
        const Tensor f0 = random_unit_frame(config.clip.dim, 1.0, data_rng);
        Clip clip = generate_clip(config.clip, f0, data_rng);
        batch.clips.push_back(std::move(clip.frames));
        batch.references.push_back(f0);
        batch.conditions.emplace_back(std::vector<std::size_t>{config.cond_dim});
        batch.noises.push_back(gaussian_sample({config.clip.frames, config.clip.dim}, data_rng));
        batch.timesteps.push_back(config.schedule.sample_train_t(data_rng));
    }
    return batch;
}

TrainOutput train_flow_matching(const TrainerConfig& config) {
    config.validate();
    const RngState root(config.seed);
    RngState init_rng = root.derive(kInitStream);
    RngState data_rng = root.derive(kDataStream);

    TrainOutput out;
    out.params = init_params(config.net_dims(), init_rng);
    out.bank = ErrorBank(config.schedule, config.bank_capacity);
    OptimizerState opt;
    opt.kind = config.optimizer;
    out.losses.reserve(config.steps);
    for (std::size_t step = 0; step < config.steps; ++step) {
        const TrainBatch batch = make_batch(config, data_rng);
        out.losses.push_back(fm_train_step(out.params, opt, batch, config.learning_rate));
    }
    return out;
}

TrainOutput train_error_recycling(const TrainerConfig& config) {
    config.validate();
    const RngState root(config.seed);
    RngState init_rng = root.derive(kInitStream);
    RngState data_rng = root.derive(kDataStream);
    RngState inject_rng = root.derive(kInjectStream);

    TrainOutput out;
    out.params = init_params(config.net_dims(), init_rng);
    OptimizerState opt;
    opt.kind = config.optimizer;

    std::vector<ErrorBank> banks;
    banks.reserve(config.workers);
    for (std::size_t w = 0; w < config.workers; ++w)
        banks.emplace_back(config.schedule, config.bank_capacity);

    std::vector<RngState> aux_data, aux_inject;
    for (std::size_t w = 1; w < config.workers; ++w) {
        aux_data.push_back(root.derive(kAuxDataBase + w));
        aux_inject.push_back(root.derive(kAuxInjectBase + w));
    }

    out.losses.reserve(config.steps);
    for (std::size_t step = 0; step < config.steps; ++step) {
        const TrainBatch batch = make_batch(config, data_rng);
        ErftStepResult res = erft_train_step(out.params, opt, batch, banks[0], config.injection,
                                             config.schedule, config.learning_rate, inject_rng);
        out.losses.push_back(res.loss);

        if (step < config.warmup_iters) {
            // Gathering phase: every worker curates on its own batch (lr = 0
            // keeps auxiliary workers from training), then the iteration's
            // errors merge into every bank in worker order.
            std::vector<std::vector<CuratedError>> per_worker(config.workers);
            per_worker[0] = std::move(res.curated);
            for (std::size_t w = 1; w < config.workers; ++w) {
                const TrainBatch aux_batch = make_batch(config, aux_data[w - 1]);
                VelocityNetParams frozen = out.params;
                OptimizerState scratch;
                scratch.kind = config.optimizer;
                ErftStepResult aux =
                    erft_train_step(frozen, scratch, aux_batch, banks[w], config.injection,
                                    config.schedule, 0.0, aux_inject[w - 1]);
                per_worker[w] = std::move(aux.curated);
            }
            for (ErrorBank& bank : banks)
                for (const auto& worker_errors : per_worker)
                    for (const CuratedError& e : worker_errors) bank.add_curated(e);
        } else {
            for (const CuratedError& e : res.curated) banks[0].add_curated(e);
        }
    }
    out.bank = std::move(banks[0]);
    return out;
}

TrainOutput ablate(const TrainerConfig& config, const AblationDrop& drop) {
    TrainerConfig ablated = config;
    if (drop.img) ablated.injection.p_img = 0.0;
    if (drop.vid) ablated.injection.p_vid = 0.0;
    if (drop.noi) ablated.injection.p_noi = 0.0;
    return train_error_recycling(ablated);
}

} // namespace erft
