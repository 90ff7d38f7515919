#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "erft/errors.hpp"
#include "erft/recycling.hpp"

using namespace erft;

namespace {

Tensor t1(double v) { return Tensor({1, 1}, std::vector<double>{v}); }

const ChannelAvailability kAllAvail{true, true, true};

} // namespace

TEST_CASE("injection config validation") {
    CHECK_NOTHROW(InjectionConfig{}.validate());
    InjectionConfig bad;
    bad.p_vid = 1.5;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = InjectionConfig{};
    bad.p_clean = -0.1;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("clean gate forces all indicators to zero") {
    InjectionConfig config;
    config.p_clean = 1.0;
    config.p_vid = config.p_img = config.p_noi = 1.0;
    RngState rng(3);
    for (int i = 0; i < 50; ++i) {
        const Indicators ind = sample_indicators(config, kAllAvail, rng);
        CHECK_FALSE(ind.vid);
        CHECK_FALSE(ind.noi);
        CHECK_FALSE(ind.img);
    }
    CHECK(rng.counter == 50); // one bernoulli per call, nothing else drawn
}

TEST_CASE("empty availability masks every indicator") {
    InjectionConfig config;
    config.p_clean = 0.0;
    config.p_vid = config.p_img = config.p_noi = 1.0;
    RngState rng(4);
    const Indicators ind = sample_indicators(config, ChannelAvailability{}, rng);
    CHECK_FALSE(ind.vid);
    CHECK_FALSE(ind.noi);
    CHECK_FALSE(ind.img);
}

TEST_CASE("degenerate probabilities give deterministic indicators") {
    InjectionConfig config;
    config.p_clean = 0.0;
    config.p_vid = 1.0;
    config.p_noi = 0.0;
    config.p_img = 1.0;
    RngState rng(5);
    for (int i = 0; i < 20; ++i) {
        const Indicators ind = sample_indicators(config, kAllAvail, rng);
        CHECK(ind.vid);
        CHECK_FALSE(ind.noi);
        CHECK(ind.img);
    }
}

TEST_CASE("indicator draw count is constant regardless of availability") {
    InjectionConfig config;
    config.p_clean = 0.0;
    config.p_vid = config.p_img = config.p_noi = 0.5;
    RngState rng_full(7), rng_masked(7);
    sample_indicators(config, kAllAvail, rng_full);
    sample_indicators(config, ChannelAvailability{false, true, false}, rng_masked);
    CHECK(rng_full.counter == rng_masked.counter);
}

TEST_CASE("inject with all-zero indicators is a bit-exact pass-through") {
    RngState rng(8);
    const Tensor x_vid = gaussian_sample({2, 3}, rng);
    const Tensor x_noi = gaussian_sample({2, 3}, rng);
    const Tensor x_img = gaussian_sample({3}, rng);
    const InjectionOutcome out = inject(x_vid, x_noi, x_img, ErrorTriple{}, Indicators{});
    CHECK(out.x_vid_tilde.raw() == x_vid.raw());
    CHECK(out.x_noi_tilde.raw() == x_noi.raw());
    CHECK(out.x_img_tilde.raw() == x_img.raw());
    CHECK(out.case_tag == CaseTag::clean);
}

TEST_CASE("inject adds errors on the selected channels") {
    ErrorTriple errors;
    errors.e_vid = t1(0.5);
    errors.e_img = Tensor({1}, std::vector<double>{-0.3});
    const InjectionOutcome out =
        inject(t1(2.0), t1(0.0), Tensor({1}, std::vector<double>{1.0}), errors,
               Indicators{true, false, true});
    CHECK(out.x_vid_tilde[0] == 2.5);
    CHECK(out.x_noi_tilde[0] == 0.0);
    CHECK(out.x_img_tilde[0] == doctest::Approx(0.7).epsilon(1e-15));
    CHECK(out.case_tag == CaseTag::mixed);
}

TEST_CASE("case tags follow the indicator pattern") {
    const Tensor img({1}, std::vector<double>{0.0});
    ErrorTriple errors;
    errors.e_vid = t1(1.0);
    errors.e_noi = t1(1.0);
    errors.e_img = Tensor({1}, std::vector<double>{1.0});
    CHECK(inject(t1(0), t1(0), img, errors, Indicators{false, false, false}).case_tag ==
          CaseTag::clean);
    CHECK(inject(t1(0), t1(0), img, errors, Indicators{false, true, false}).case_tag ==
          CaseTag::start_injected);
    CHECK(inject(t1(0), t1(0), img, errors, Indicators{false, false, true}).case_tag ==
          CaseTag::start_injected);
    CHECK(inject(t1(0), t1(0), img, errors, Indicators{true, false, false}).case_tag ==
          CaseTag::end_injected);
    CHECK(inject(t1(0), t1(0), img, errors, Indicators{true, true, false}).case_tag ==
          CaseTag::mixed);
    CHECK(inject(t1(0), t1(0), img, errors, Indicators{true, false, true}).case_tag ==
          CaseTag::mixed);
}

TEST_CASE("inject validates shapes only for channels that fire") {
    ErrorTriple errors; // all errors empty
    CHECK_NOTHROW(inject(t1(1.0), t1(0.0), Tensor({1}), errors, Indicators{}));
    CHECK_THROWS_AS(inject(t1(1.0), t1(0.0), Tensor({1}), errors, Indicators{true, false, false}),
                    std::invalid_argument);
}

TEST_CASE("approximate predictions at the endpoints") {
    const Tensor x = t1(3.0), v = t1(1.0);
    const PredictionPair at1 = approximate_predictions(x, v, 1.0);
    CHECK(at1.x_vid_hat.raw() == x.raw());
    const PredictionPair at0 = approximate_predictions(x, v, 0.0);
    CHECK(at0.x_noi_hat.raw() == x.raw());
}

TEST_CASE("approximate predictions hand values at t = 0.5") {
    const PredictionPair p = approximate_predictions(t1(1.0), t1(3.0), 0.5);
    CHECK(p.x_vid_hat[0] == doctest::Approx(2.5).epsilon(1e-15));
    CHECK(p.x_noi_hat[0] == doctest::Approx(-0.5).epsilon(1e-15));
}

TEST_CASE("bidirectional prediction identities hold to 1e-12") {
    RngState rng(19);
    for (int i = 0; i < 200; ++i) {
        const Tensor x = gaussian_sample({2, 2}, rng);
        const Tensor v = gaussian_sample({2, 2}, rng);
        const double t = rng.next_uniform();
        const PredictionPair p = approximate_predictions(x, v, t);
        for (std::size_t j = 0; j < x.size(); ++j) {
            CHECK(std::abs((p.x_vid_hat[j] - p.x_noi_hat[j]) - v[j]) <= 1e-12);
            const double recon = t * p.x_vid_hat[j] + (1.0 - t) * p.x_noi_hat[j];
            CHECK(std::abs(recon - x[j]) <= 1e-12);
        }
    }
}

TEST_CASE("recycled targets reduce to the clean pair without injection") {
    const Tensor x_vid = t1(2.0), x_noi = t1(0.0);
    const double t = 0.25;
    const Tensor x_t = interpolate(x_vid, x_noi, t);
    const RecycledTargets r = recycled_targets(x_vid, x_noi, x_t, t);
    CHECK(r.v_rcy[0] == 2.0);
    CHECK(r.x_rcy_vid[0] == 2.0);
    CHECK(std::abs(r.x_rcy_noi[0] - 0.0) <= 1e-12);
}

TEST_CASE("recycled targets keep an injected start point as its own target") {
    const Tensor x_vid = t1(2.0);
    const Tensor x_noi_tilde = t1(0.5); // start point carrying an error
    const double t = 0.5;
    const Tensor x_t = interpolate(x_vid, x_noi_tilde, t);
    const RecycledTargets r = recycled_targets(x_vid, x_noi_tilde, x_t, t);
    CHECK(r.v_rcy[0] == doctest::Approx(1.5).epsilon(1e-15));
    CHECK(r.x_rcy_vid[0] == 2.0);
    CHECK(std::abs(r.x_rcy_noi[0] - 0.5) <= 1e-12);
}

TEST_CASE("recycled targets redirect an injected end point to the clean latent") {
    // x_vid = 2, x_noi = 0, e_vid = 0.4, t = 0.5:
    // x_t_tilde = 0.5 * 2.4 = 1.2, v_rcy = 2, x_rcy_noi = 1.2 - 0.5 * 2 = 0.2.
    const Tensor x_vid = t1(2.0);
    const Tensor x_vid_tilde = t1(2.4);
    const Tensor x_noi = t1(0.0);
    const double t = 0.5;
    const Tensor x_t = interpolate(x_vid_tilde, x_noi, t);
    CHECK(x_t[0] == doctest::Approx(1.2).epsilon(1e-15));
    const RecycledTargets r = recycled_targets(x_vid, x_noi, x_t, t);
    CHECK(r.v_rcy[0] == 2.0);
    CHECK(r.x_rcy_vid[0] == 2.0);
    CHECK(r.x_rcy_noi[0] == doctest::Approx(0.2).epsilon(1e-12));
}

TEST_CASE("curated errors are prediction minus recycled target") {
    const CuratedPair c = curate_errors(t1(2.5), t1(-0.5), t1(2.0), t1(0.0));
    CHECK(c.e_vid[0] == 0.5);
    CHECK(c.e_noi[0] == -0.5);
}

TEST_CASE("perfect prediction curates exactly zero errors") {
    RngState rng(23);
    for (int i = 0; i < 100; ++i) {
        const Tensor x_vid = gaussian_sample({2, 2}, rng);
        const Tensor x_noi = gaussian_sample({2, 2}, rng);
        const double t = rng.next_uniform();
        const Tensor x_t = interpolate(x_vid, x_noi, t);
        const RecycledTargets r = recycled_targets(x_vid, x_noi, x_t, t);
        const PredictionPair p = approximate_predictions(x_t, r.v_rcy, t);
        const CuratedPair c = curate_errors(p.x_vid_hat, p.x_noi_hat, r.x_rcy_vid, r.x_rcy_noi);
        for (std::size_t j = 0; j < c.e_vid.size(); ++j) {
            CHECK(std::abs(c.e_vid[j]) <= 1e-12);
            CHECK(std::abs(c.e_noi[j]) <= 1e-12);
        }
    }
}

TEST_CASE("image error is a temporal slice of the latent error") {
    Tensor e({1, 3}, std::vector<double>{1, 2, 3});
    RngState rng(2);
    const Tensor slice = derive_image_error(e, rng);
    CHECK(slice.raw() == std::vector<double>{1, 2, 3});

    Tensor zero({4, 2});
    for (int i = 0; i < 10; ++i) CHECK(derive_image_error(zero, rng).raw() == std::vector<double>{0, 0});

    Tensor multi({4, 1}, std::vector<double>{1, 2, 3, 4});
    std::vector<int> counts(4, 0);
    for (int i = 0; i < 8000; ++i)
        counts[static_cast<std::size_t>(derive_image_error(multi, rng)[0]) - 1] += 1;
    for (int n : counts) CHECK(static_cast<double>(n) / 8000.0 == doctest::Approx(0.25).epsilon(0.1));
}

namespace {

TrainBatch single_sample_batch(double x_vid, double x_noi, double x_img, double t) {
    TrainBatch b;
    b.clips.push_back(t1(x_vid));
    b.noises.push_back(t1(x_noi));
    b.references.push_back(Tensor({1}, std::vector<double>{x_img}));
    b.conditions.emplace_back(std::vector<std::size_t>{0});
    b.timesteps.push_back(t);
    return b;
}

} // namespace

TEST_CASE("erft step hand trace with a zero net and a forced vid error") {
    // x_vid = 2, x_noi = 0, t = 0.5, banked e_vid = 0.4, v_hat = 0:
    // loss = (0 - 2)^2 = 4, curated e_vid = 1.2 - 2 = -0.8,
    // curated e_noi = 1.2 - 0.2 = 1.0.
    const NetDims dims{1, 1, 0, 0, 0};
    VelocityNetParams params = zero_params(dims);
    OptimizerState opt;
    const TimestepSchedule sched{1000, 50};

    ErrorBank bank(sched, 4);
    bank.update(BankChannel::vid, nearest_grid(0.5, sched), t1(0.4));

    InjectionConfig config;
    config.p_clean = 0.0;
    config.p_vid = 1.0;
    config.p_noi = 0.0;
    config.p_img = 0.0;

    TrainBatch batch = single_sample_batch(2.0, 0.0, 1.0, 0.5);
    RngState rng(1);
    const VelocityNetParams before = params;
    const ErftStepResult res = erft_train_step(params, opt, batch, bank, config, sched, 0.0, rng);

    CHECK(res.loss == doctest::Approx(4.0).epsilon(1e-12));
    REQUIRE(res.curated.size() == 1);
    CHECK(res.curated[0].t == 0.5);
    CHECK(res.curated[0].e_vid[0] == doctest::Approx(-0.8).epsilon(1e-12));
    CHECK(res.curated[0].e_noi[0] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(params == before); // lr = 0 keeps params, curation still happens
}

TEST_CASE("erft step on an empty bank falls back to clean training") {
    const NetDims dims{2, 2, 0, 1, 8};
    RngState init_rng(3);
    VelocityNetParams p_erft = init_params(dims, init_rng);
    VelocityNetParams p_fm = p_erft;
    OptimizerState opt_erft, opt_fm;

    const TimestepSchedule sched{1000, 50};
    ErrorBank empty(sched, 4);
    InjectionConfig aggressive;
    aggressive.p_clean = 0.0;
    aggressive.p_vid = aggressive.p_img = 1.0;

    RngState data_rng(5);
    for (int step = 0; step < 5; ++step) {
        TrainBatch b;
        for (int i = 0; i < 3; ++i) {
            b.clips.push_back(gaussian_sample({2, 2}, data_rng));
            b.noises.push_back(gaussian_sample({2, 2}, data_rng));
            b.references.push_back(gaussian_sample({2}, data_rng));
            b.conditions.emplace_back(std::vector<std::size_t>{0});
            b.timesteps.push_back(sched.sample_train_t(data_rng));
        }
        RngState inject_rng(99 + step);
        const ErftStepResult res =
            erft_train_step(p_erft, opt_erft, b, empty, aggressive, sched, 1e-3, inject_rng);
        const double fm_loss = fm_train_step(p_fm, opt_fm, b, 1e-3);
        CHECK(res.loss == doctest::Approx(fm_loss).epsilon(1e-15));
    }
    CHECK(p_erft == p_fm);
}

TEST_CASE("p_clean = 1 makes the erft step identical to the fm step") {
    const NetDims dims{2, 2, 0, 1, 8};
    RngState init_rng(7);
    VelocityNetParams p_erft = init_params(dims, init_rng);
    VelocityNetParams p_fm = p_erft;
    OptimizerState opt_erft, opt_fm;

    const TimestepSchedule sched{1000, 50};
    ErrorBank bank(sched, 8);
    RngState fill_rng(11);
    for (std::size_t g = 0; g < 50; ++g) {
        bank.update(BankChannel::vid, g, gaussian_sample({2, 2}, fill_rng));
        bank.update(BankChannel::noi, g, gaussian_sample({2, 2}, fill_rng));
    }

    InjectionConfig config;
    config.p_clean = 1.0;

    RngState data_rng(13);
    for (int step = 0; step < 10; ++step) {
        TrainBatch b;
        for (int i = 0; i < 4; ++i) {
            b.clips.push_back(gaussian_sample({2, 2}, data_rng));
            b.noises.push_back(gaussian_sample({2, 2}, data_rng));
            b.references.push_back(gaussian_sample({2}, data_rng));
            b.conditions.emplace_back(std::vector<std::size_t>{0});
            b.timesteps.push_back(sched.sample_train_t(data_rng));
        }
        RngState inject_rng(42 + step);
        const ErftStepResult res =
            erft_train_step(p_erft, opt_erft, b, bank, config, sched, 1e-3, inject_rng);
        const double fm_loss = fm_train_step(p_fm, opt_fm, b, 1e-3);
        CHECK(std::abs(res.loss - fm_loss) <= 1e-12);
    }
    CHECK(p_erft == p_fm);
}

TEST_CASE("erft step rejects invalid batches and configs") {
    const NetDims dims{1, 1, 0, 0, 0};
    VelocityNetParams params = zero_params(dims);
    OptimizerState opt;
    const TimestepSchedule sched{1000, 50};
    ErrorBank bank(sched, 4);
    RngState rng(1);

    TrainBatch empty;
    CHECK_THROWS_AS(
        erft_train_step(params, opt, empty, bank, InjectionConfig{}, sched, 1e-3, rng),
        std::invalid_argument);

    InjectionConfig bad;
    bad.p_img = 2.0;
    TrainBatch b = single_sample_batch(1.0, 0.0, 0.0, 0.5);
    CHECK_THROWS_AS(erft_train_step(params, opt, b, bank, bad, sched, 1e-3, rng),
                    std::invalid_argument);
}
