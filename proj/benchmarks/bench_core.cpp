#include <benchmark/benchmark.h>

#include "erft/error_bank.hpp"
#include "erft/flow.hpp"
#include "erft/recycling.hpp"
#include "erft/rng.hpp"
#include "erft/trainer.hpp"
#include "erft/velocity_net.hpp"

namespace {

using namespace erft;

TrainerConfig bench_config() {
    TrainerConfig cfg;
    cfg.clip = ClipSpec{8, 8, 0.2, 0.01};
    cfg.steps = 0;
    cfg.batch_size = 16;
    return cfg;
}

void BM_Forward(benchmark::State& state) {
    const TrainerConfig cfg = bench_config();
    RngState rng(1);
    const VelocityNetParams params = init_params(cfg.net_dims(), rng);
    NetInput in;
    in.noisy_clip = gaussian_sample({cfg.clip.frames, cfg.clip.dim}, rng);
    in.reference = gaussian_sample({cfg.clip.dim}, rng);
    in.condition = Tensor({0});
    in.t = 0.5;
    for (auto _ : state) benchmark::DoNotOptimize(forward(params, in));
}
BENCHMARK(BM_Forward);

void BM_LossAndGrad(benchmark::State& state) {
    const TrainerConfig cfg = bench_config();
    RngState rng(1);
    const VelocityNetParams params = init_params(cfg.net_dims(), rng);
    NetInput in;
    in.noisy_clip = gaussian_sample({cfg.clip.frames, cfg.clip.dim}, rng);
    in.reference = gaussian_sample({cfg.clip.dim}, rng);
    in.condition = Tensor({0});
    in.t = 0.5;
    const Tensor target = gaussian_sample({cfg.clip.frames, cfg.clip.dim}, rng);
    for (auto _ : state) benchmark::DoNotOptimize(loss_and_grad(params, in, target));
}
BENCHMARK(BM_LossAndGrad);

void BM_EulerSample(benchmark::State& state) {
    const TrainerConfig cfg = bench_config();
    RngState rng(2);
    const VelocityNetParams params = init_params(cfg.net_dims(), rng);
    const Tensor x0 = gaussian_sample({cfg.clip.frames, cfg.clip.dim}, rng);
    const Tensor ref = gaussian_sample({cfg.clip.dim}, rng);
    const Tensor cond({0});
    for (auto _ : state)
        benchmark::DoNotOptimize(euler_sample(params, x0, ref, cond, cfg.schedule));
}
BENCHMARK(BM_EulerSample);

void BM_BankUpdateFull(benchmark::State& state) {
    const std::size_t capacity = static_cast<std::size_t>(state.range(0));
    TimestepSchedule schedule;
    ErrorBank bank(schedule, capacity);
    RngState rng(3);
    for (std::size_t i = 0; i < capacity; ++i)
        bank.update(BankChannel::vid, 10, gaussian_sample({8, 8}, rng));
    const Tensor incoming = gaussian_sample({8, 8}, rng);
    for (auto _ : state) bank.update(BankChannel::vid, 10, incoming);
}
BENCHMARK(BM_BankUpdateFull)->Arg(10)->Arg(100)->Arg(500);

void BM_BankSampleImg(benchmark::State& state) {
    TimestepSchedule schedule;
    ErrorBank bank(schedule, 500);
    RngState rng(4);
    for (std::size_t g = 0; g < schedule.n_test; g += 2)
        for (int i = 0; i < 20; ++i)
            bank.update(BankChannel::vid, g, gaussian_sample({8, 8}, rng));
    for (auto _ : state) benchmark::DoNotOptimize(bank.sample_img(rng));
}
BENCHMARK(BM_BankSampleImg);

void BM_NearestGrid(benchmark::State& state) {
    TimestepSchedule schedule;
    RngState rng(5);
    double t = 0.0;
    for (auto _ : state) {
        t = rng.next_uniform();
        benchmark::DoNotOptimize(nearest_grid(t, schedule));
    }
}
BENCHMARK(BM_NearestGrid);

void BM_FmTrainStep(benchmark::State& state) {
    TrainerConfig cfg = bench_config();
    RngState rng(6);
    VelocityNetParams params = init_params(cfg.net_dims(), rng);
    OptimizerState opt;
    RngState data_rng(7);
    const TrainBatch batch = make_batch(cfg, data_rng);
    for (auto _ : state) benchmark::DoNotOptimize(fm_train_step(params, opt, batch, 1e-3));
}
BENCHMARK(BM_FmTrainStep);

void BM_ErftTrainStep(benchmark::State& state) {
    TrainerConfig cfg = bench_config();
    RngState rng(8);
    VelocityNetParams params = init_params(cfg.net_dims(), rng);
    OptimizerState opt;
    RngState data_rng(9), inject_rng(10);
    const TrainBatch batch = make_batch(cfg, data_rng);
    ErrorBank bank(cfg.schedule, cfg.bank_capacity);
    for (std::size_t g = 0; g < cfg.schedule.n_test; ++g) {
        bank.update(BankChannel::vid, g, gaussian_sample({8, 8}, rng));
        bank.update(BankChannel::noi, g, gaussian_sample({8, 8}, rng));
    }
    for (auto _ : state)
        benchmark::DoNotOptimize(erft_train_step(params, opt, batch, bank, cfg.injection,
                                                 cfg.schedule, 1e-3, inject_rng));
}
BENCHMARK(BM_ErftTrainStep);

} // namespace

BENCHMARK_MAIN();
