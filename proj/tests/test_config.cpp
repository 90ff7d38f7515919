#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <string>

#include "erft/config.hpp"
#include "erft/errors.hpp"

using namespace erft;

TEST_CASE("empty text keeps every default") {
    const RunConfig c = parse_config_text("");
    CHECK(c.latent_error_p == 0.9);
    CHECK(c.image_error_p == 0.9);
    CHECK(c.noise_error_p == 0.01);
    CHECK(c.clean_input_p == 0.5);
    CHECK(c.max_errors_per_grid == 500);
    CHECK(c.timestep_grids == 50);
    CHECK(c.warmup_iterations == 20);
    CHECK(c.workers == 4);
    CHECK(c.train_timesteps == 1000);
    CHECK(c.clip_frames == 8);
    CHECK(c.clip_dim == 8);
    CHECK(c.hidden_layers == 2);
    CHECK(c.hidden_width == 64);
    CHECK(c.learning_rate == 1e-3);
    CHECK(c.reference_mode == "last_frame");
    CHECK(c.seed == 1);
    CHECK(c.out_dir.empty());
}

TEST_CASE("comments, blank lines, and whitespace are tolerated") {
    const RunConfig c = parse_config_text(
        "# a comment\n"
        "\n"
        "  seed = 7  \n"
        "learning_rate=0.5\n");
    CHECK(c.seed == 7);
    CHECK(c.learning_rate == 0.5);
}

TEST_CASE("out-of-range probabilities are rejected with the key named") {
    RunConfig c;
    try {
        apply_config_entry(c, "latent_error_p", "1.5");
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(e.key() == "latent_error_p");
        CHECK(std::string(e.what()).find("latent_error_p") != std::string::npos);
    }
    CHECK_THROWS_AS(apply_config_entry(c, "clean_input_p", "-0.1"), ConfigError);
    CHECK_THROWS_AS(apply_config_entry(c, "noise_error_p", "nonsense"), ConfigError);
}

TEST_CASE("unknown keys are rejected") {
    RunConfig c;
    try {
        apply_config_entry(c, "latent_error", "0.5");
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(e.key() == "latent_error");
    }
    CHECK_THROWS_AS(parse_config_text("no_such_key=1\n"), ConfigError);
}

TEST_CASE("structural constraints are enforced") {
    CHECK_THROWS_AS(parse_config_text("clip_dim=7\n"), ConfigError);
    CHECK_THROWS_AS(parse_config_text("clip_frames=1\n"), ConfigError);
    CHECK_THROWS_AS(parse_config_text("learning_rate=-1\n"), ConfigError);
    CHECK_THROWS_AS(parse_config_text("reference_mode=banana\n"), ConfigError);
    CHECK_THROWS_AS(parse_config_text("motion_frames=9\n"), ConfigError); // > clip_frames = 8
    CHECK_THROWS_AS(parse_config_text("batch_size=0\n"), ConfigError);
    CHECK_THROWS_AS(parse_config_text("max_errors_per_grid=0\n"), ConfigError);
    CHECK_THROWS_AS(parse_config_text("workers=0\n"), ConfigError);
    CHECK_NOTHROW(parse_config_text("motion_frames=8\n"));
    CHECK_NOTHROW(parse_config_text("learning_rate=0\n"));
}

TEST_CASE("malformed lines report their line number") {
    try {
        parse_config_text("seed=1\nthis line has no equals\n");
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("2") != std::string::npos);
    }
}

TEST_CASE("later assignments win, including over a parsed base") {
    const RunConfig base = parse_config_text("seed=3\nworkers=2\n");
    RunConfig c = parse_config_text("seed=9\n", base);
    CHECK(c.seed == 9);
    CHECK(c.workers == 2);

    apply_config_entry(c, "seed", "11");
    CHECK(c.seed == 11);

    const RunConfig repeated = parse_config_text("seed=1\nseed=2\n");
    CHECK(repeated.seed == 2);
}

TEST_CASE("dump and reparse round-trips bit-identically") {
    RunConfig c;
    c.frame_angle = 0.1;       // not exactly representable
    c.learning_rate = 1.0 / 3.0;
    c.data_noise = 1.2345678901234567e-12;
    c.seed = 0xFFFFFFFFFFFFFFFFull;
    c.out_dir = "some/dir";
    c.reference_mode = "motion_frames";

    const std::string text = dump_config(c);
    const RunConfig back = parse_config_text(text);
    CHECK(back.frame_angle == c.frame_angle);
    CHECK(back.learning_rate == c.learning_rate);
    CHECK(back.data_noise == c.data_noise);
    CHECK(back.seed == c.seed);
    CHECK(back.out_dir == c.out_dir);
    CHECK(back.reference_mode == c.reference_mode);
    CHECK(dump_config(back) == text);
}

TEST_CASE("dump lists every key exactly once") {
    const std::string text = dump_config(RunConfig{});
    for (const char* key :
         {"latent_error_p", "image_error_p", "noise_error_p", "clean_input_p",
          "max_errors_per_grid", "timestep_grids", "warmup_iterations", "workers",
          "train_timesteps", "clip_frames", "clip_dim", "frame_angle", "data_noise",
          "hidden_layers", "hidden_width", "condition_dim", "learning_rate", "train_steps",
          "batch_size", "motion_frames", "reference_mode", "num_clips", "seed", "out_dir"}) {
        const std::string needle = std::string(key) + "=";
        const std::size_t first = text.find(needle);
        REQUIRE(first != std::string::npos);
        const std::size_t again = text.find("\n" + needle, first + 1);
        CHECK(again == std::string::npos);
    }
}

TEST_CASE("config files parse like text and missing files fail") {
    const auto dir = std::filesystem::temp_directory_path() / "erft_config_test";
    std::filesystem::create_directories(dir);
    const auto path = dir / "run.cfg";
    {
        std::ofstream out(path);
        out << "seed=21\nclip_frames=4\nmotion_frames=3\n";
    }
    const RunConfig c = parse_config_file(path);
    CHECK(c.seed == 21);
    CHECK(c.clip_frames == 4);
    CHECK_THROWS_AS(parse_config_file(dir / "absent.cfg"), ConfigError);
}

TEST_CASE("conversions carry the fields into the component configs") {
    RunConfig c = parse_config_text(
        "clip_frames=6\nclip_dim=4\nframe_angle=0.3\ndata_noise=0.05\n"
        "hidden_layers=1\nhidden_width=8\ntimestep_grids=25\ntrain_timesteps=500\n"
        "latent_error_p=0.7\nclean_input_p=0.2\nmax_errors_per_grid=9\n"
        "warmup_iterations=2\nworkers=3\ntrain_steps=10\nbatch_size=2\n"
        "learning_rate=0.01\nmotion_frames=2\nreference_mode=motion_frames\n"
        "num_clips=5\nseed=99\n");

    const TrainerConfig tc = c.trainer_config();
    CHECK(tc.clip.frames == 6);
    CHECK(tc.clip.dim == 4);
    CHECK(tc.clip.angle == 0.3);
    CHECK(tc.schedule.n_train == 500);
    CHECK(tc.schedule.n_test == 25);
    CHECK(tc.injection.p_vid == 0.7);
    CHECK(tc.injection.p_clean == 0.2);
    CHECK(tc.bank_capacity == 9);
    CHECK(tc.warmup_iters == 2);
    CHECK(tc.workers == 3);
    CHECK(tc.steps == 10);
    CHECK(tc.batch_size == 2);
    CHECK(tc.seed == 99);

    const RolloutConfig rc = c.rollout_config();
    CHECK(rc.num_clips == 5);
    CHECK(rc.motion_frames == 2);
    CHECK(rc.reference_mode == ReferenceMode::motion_frames);
    CHECK(rc.clip.frames == 6);

    CHECK(parse_config_text("reference_mode=fixed_anchor\n").reference_mode_enum() ==
          ReferenceMode::fixed_anchor);
}
