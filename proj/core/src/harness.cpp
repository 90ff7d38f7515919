#include "erft/harness.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "erft/errors.hpp"

namespace erft {

namespace {

// Rollout stream ids under the per-seed root (training uses 0..2, aux
// workers 100.. / 200..; these must stay disjoint).
constexpr std::uint64_t kRolloutFrameStream = 50;
constexpr std::uint64_t kRolloutNoiseStream = 51;
constexpr std::uint64_t kGenDataStream = 60;

std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void write_text_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw FormatError("cannot open for writing: " + path.string());
    os << content;
    if (!os) throw FormatError("failed writing: " + path.string());
}

std::string read_optional_line(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) return {};
    std::string line;
    std::getline(is, line);
    return line;
}

double last_loss_from_csv(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) return std::nan("");
    std::string line, last;
    std::getline(is, line); // header
    while (std::getline(is, line))
        if (!line.empty()) last = line;
    const std::size_t comma = last.find(',');
    if (comma == std::string::npos) return std::nan("");
    try {
        return std::stod(last.substr(comma + 1));
    } catch (const std::exception&) {
        return std::nan("");
    }
}

} // namespace

std::filesystem::path resolve_out_root(const std::string& flag_value, const RunConfig& config) {
    if (!flag_value.empty()) return flag_value;
    if (!config.out_dir.empty()) return config.out_dir;
    if (const char* env = std::getenv(kOutRootEnvVar); env != nullptr && *env != '\0') return env;
    return "runs";
}

std::filesystem::path make_run_dir(const std::filesystem::path& root, const std::string& run_id) {
    if (run_id.empty()) throw std::invalid_argument("make_run_dir: empty run id");
    std::filesystem::create_directories(root);
    const std::filesystem::path dir = root / run_id;
    if (std::filesystem::exists(dir))
        throw FormatError("run directory already exists (outputs are write-once): " + dir.string());
    std::filesystem::create_directory(dir);
    return dir;
}

std::string default_run_id(const std::string& kind, const RunConfig& config) {
    return kind + "-seed" + std::to_string(config.seed);
}

TrainArtifacts run_train(const RunConfig& config, const std::string& mode,
                         const std::string& run_id, const std::filesystem::path& out_root,
                         const AblationDrop& drop) {
    config.validate();
    if (mode != "baseline" && mode != "erft")
        throw std::invalid_argument("run_train: mode must be baseline or erft");

    std::string label = mode;
    if (drop.img || drop.vid || drop.noi) {
        if (mode != "erft") throw std::invalid_argument("run_train: ablation requires erft mode");
        label += "-drop";
        if (drop.img) label += "-img";
        if (drop.vid) label += "-vid";
        if (drop.noi) label += "-noi";
    }

    TrainArtifacts art;
    art.mode_label = label;
    art.run_dir = make_run_dir(out_root, run_id);
    art.config_path = art.run_dir / "config.txt";
    write_text_file(art.config_path, dump_config(config));
    write_text_file(art.run_dir / "mode.txt", label + "\n");

    const TrainerConfig tc = config.trainer_config();
    TrainOutput out;
    if (mode == "baseline") {
        out = train_flow_matching(tc);
    } else {
        out = ablate(tc, drop); // empty drop is full erft
    }

    art.checkpoint_path = art.run_dir / "checkpoint.erft";
    save_checkpoint(out.params, art.checkpoint_path);

    std::ostringstream loss_csv;
    loss_csv << "step,loss\n";
    for (std::size_t i = 0; i < out.losses.size(); ++i)
        loss_csv << i << ',' << format_double(out.losses[i]) << "\n";
    art.loss_csv_path = art.run_dir / "loss.csv";
    write_text_file(art.loss_csv_path, loss_csv.str());
    art.final_loss = out.losses.empty() ? std::nan("") : out.losses.back();

    if (mode == "erft") {
        art.bank_path = art.run_dir / "bank.erftbank";
        out.bank.save(art.bank_path);
        write_text_file(art.run_dir / "bank_occupancy.csv", out.bank.occupancy_csv());
    }
    return art;
}

RolloutArtifacts run_rollout(const RunConfig& config, const std::filesystem::path& checkpoint_path,
                             const std::vector<std::uint64_t>& seeds, const std::string& run_id,
                             const std::filesystem::path& out_root, const std::string& mode_label,
                             const std::optional<std::filesystem::path>& loss_csv) {
    config.validate();
    if (seeds.empty()) throw std::invalid_argument("run_rollout: at least one seed required");

    const VelocityNetParams params = load_checkpoint(checkpoint_path);
    const RolloutConfig rc = config.rollout_config();
    if (params.dims != config.trainer_config().net_dims())
        throw FormatError("run_rollout: checkpoint dims disagree with the config");

    std::string label = mode_label;
    if (label.empty()) label = read_optional_line(checkpoint_path.parent_path() / "mode.txt");
    if (label.empty()) label = "model";

    const std::filesystem::path loss_path =
        loss_csv.value_or(checkpoint_path.parent_path() / "loss.csv");
    const double final_loss = last_loss_from_csv(loss_path);

    RolloutArtifacts art;
    art.run_dir = make_run_dir(out_root, run_id);
    art.config_path = art.run_dir / "config.txt";
    write_text_file(art.config_path, dump_config(config));

    std::ostringstream csv;
    csv << metrics_csv_header() << "\n";
    for (std::uint64_t seed : seeds) {
        const RngState root(seed);
        RngState frame_rng = root.derive(kRolloutFrameStream);
        const Tensor initial_frame = random_unit_frame(config.clip_dim, 1.0, frame_rng);
        const Tensor condition({config.condition_dim});
        RolloutTrace trace =
            generate_long(params, initial_frame, condition, rc, root.derive(kRolloutNoiseStream));
        for (std::size_t i = 0; i < trace.metrics.size(); ++i) {
            MetricsRow row;
            row.run_id = run_id;
            row.mode = label;
            row.seed = seed;
            row.clip_index = i;
            row.norm_drift = trace.metrics[i].norm_drift;
            row.step_drift = trace.metrics[i].step_drift;
            row.loss_final = final_loss;
            csv << format_metrics_row(row) << "\n";
            art.rows.push_back(std::move(row));
        }
    }
    art.metrics_path = art.run_dir / "metrics.csv";
    write_text_file(art.metrics_path, csv.str());
    return art;
}

std::filesystem::path run_gen_data(const RunConfig& config, const std::string& run_id,
                                   const std::filesystem::path& out_root) {
    config.validate();
    const std::filesystem::path run_dir = make_run_dir(out_root, run_id);
    write_text_file(run_dir / "config.txt", dump_config(config));

    const RngState root(config.seed);
    RngState rng = root.derive(kGenDataStream);
    const ClipSpec spec = config.clip_spec();

    std::ostringstream csv;
    csv << "clip_index,frame_index";
    for (std::size_t d = 0; d < spec.dim; ++d) csv << ",d" << d;
    csv << "\n";
    for (std::size_t c = 0; c < config.num_clips; ++c) {
        const Tensor f0 = random_unit_frame(spec.dim, 1.0, rng);
        const Clip clip = generate_clip(spec, f0, rng);
        for (std::size_t f = 0; f < spec.frames; ++f) {
            csv << c << ',' << f;
            for (std::size_t d = 0; d < spec.dim; ++d)
                csv << ',' << format_double(clip.frames.at(f, d));
            csv << "\n";
        }
    }
    const std::filesystem::path path = run_dir / "clips.csv";
    write_text_file(path, csv.str());
    return path;
}

} // namespace erft
