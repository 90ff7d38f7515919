#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>

#include "erft/recycling.hpp"
#include "erft/rollout.hpp"
#include "erft/trainer.hpp"

namespace erft {

// Resolved experiment configuration. Config files are flat key=value text;
// every field maps to exactly one key of the same name. Unknown keys and
// out-of-range values are rejected with the offending key named.
struct RunConfig {
    double latent_error_p = 0.9;
    double image_error_p = 0.9;
    double noise_error_p = 0.01;
    double clean_input_p = 0.5;
    std::size_t max_errors_per_grid = 500;
    std::size_t timestep_grids = 50;
    std::size_t warmup_iterations = 20;
    std::size_t workers = 4;
    std::size_t train_timesteps = 1000;
    std::size_t clip_frames = 8;
    std::size_t clip_dim = 8;
    double frame_angle = 0.2;
    double data_noise = 0.01;
    std::size_t hidden_layers = 2;
    std::size_t hidden_width = 64;
    std::size_t condition_dim = 0;
    double learning_rate = 1e-3;
    std::size_t train_steps = 5000;
    std::size_t batch_size = 16;
    std::size_t motion_frames = 5;
    std::string reference_mode = "last_frame";
    std::size_t num_clips = 20;
    std::uint64_t seed = 1;
    std::string out_dir;

    void validate() const;

    TrainerConfig trainer_config() const;
    RolloutConfig rollout_config() const;
    ClipSpec clip_spec() const;
    TimestepSchedule schedule() const;
    InjectionConfig injection_config() const;
    ReferenceMode reference_mode_enum() const;
};

// Apply one "key=value" assignment. Throws ConfigError for unknown keys,
// malformed values, or range violations.
void apply_config_entry(RunConfig& config, const std::string& key, const std::string& value);

// Parse flat key=value text ('#' starts a comment, blank lines ignored).
RunConfig parse_config_text(const std::string& text, const RunConfig& base = {});

// Parse a config file. Missing file throws ConfigError naming the path.
RunConfig parse_config_file(const std::filesystem::path& path, const RunConfig& base = {});

// Canonical dump: every key in fixed order, doubles formatted to round-trip
// exactly. parse_config_text(dump_config(c)) reproduces c bit-identically.
std::string dump_config(const RunConfig& config);

} // namespace erft
