#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "erft/config.hpp"
#include "erft/report.hpp"
#include "erft/trainer.hpp"

namespace erft {

// Environment variable naming the default output root.
inline constexpr const char* kOutRootEnvVar = "ERFT_OUT_ROOT";

// Precedence: explicit flag > config out_dir > ERFT_OUT_ROOT > ./runs.
std::filesystem::path resolve_out_root(const std::string& flag_value, const RunConfig& config);

// Creates root/run_id. Outputs are write-once: an existing directory is an
// error, never overwritten.
std::filesystem::path make_run_dir(const std::filesystem::path& root, const std::string& run_id);

struct TrainArtifacts {
    std::filesystem::path run_dir;
    std::filesystem::path config_path;
    std::filesystem::path checkpoint_path;
    std::filesystem::path loss_csv_path;
    std::filesystem::path bank_path; // empty for baseline runs
    std::string mode_label;
    double final_loss = 0.0;
};

// Trains in the given mode ("baseline" or "erft"), writing config.txt,
// checkpoint.erft, loss.csv, mode.txt, and (erft only) bank.erftbank into
// a fresh run directory. A non-empty drop ablates the named channels and
// is reflected in the stored mode label (e.g. "erft-drop-img").
TrainArtifacts run_train(const RunConfig& config, const std::string& mode,
                         const std::string& run_id, const std::filesystem::path& out_root,
                         const AblationDrop& drop = {});

struct RolloutArtifacts {
    std::filesystem::path run_dir;
    std::filesystem::path config_path;
    std::filesystem::path metrics_path;
    std::vector<MetricsRow> rows;
};

// Rolls out num_clips clips per seed from the checkpoint and writes the
// metrics CSV. The mode column comes from mode_label if non-empty, else
// from mode.txt next to the checkpoint, else "model". loss_final comes
// from the last row of loss_csv (default: loss.csv next to the
// checkpoint); missing loss data records nan.
RolloutArtifacts run_rollout(const RunConfig& config, const std::filesystem::path& checkpoint_path,
                             const std::vector<std::uint64_t>& seeds, const std::string& run_id,
                             const std::filesystem::path& out_root,
                             const std::string& mode_label = {},
                             const std::optional<std::filesystem::path>& loss_csv = {});

// Dumps sample clips as CSV (clip_index,frame_index,d0..d{dim-1}).
std::filesystem::path run_gen_data(const RunConfig& config, const std::string& run_id,
                                   const std::filesystem::path& out_root);

// Stable default run ids (no timestamps, so reruns collide loudly instead
// of silently multiplying).
std::string default_run_id(const std::string& kind, const RunConfig& config);

} // namespace erft
