#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "erft/config.hpp"
#include "erft/errors.hpp"
#include "erft/harness.hpp"
#include "erft/report.hpp"

namespace {

struct CommonOpts {
    std::string config_path;
    std::vector<std::string> overrides;
    std::string out_root;
    std::string run_id;
};

void add_common(CLI::App* cmd, CommonOpts& opts) {
    cmd->add_option("--config", opts.config_path, "Flat key=value config file");
    cmd->add_option("--set", opts.overrides, "Override a config key (key=value, repeatable)")
        ->expected(-1);
    cmd->add_option("--out", opts.out_root,
                    "Output root (default: config out_dir, then $ERFT_OUT_ROOT, then ./runs)");
    cmd->add_option("--run-id", opts.run_id, "Run directory name (write-once)");
}

erft::RunConfig resolve_config(const CommonOpts& opts) {
    erft::RunConfig config;
    if (!opts.config_path.empty()) config = erft::parse_config_file(opts.config_path);
    for (const std::string& entry : opts.overrides) {
        const std::size_t eq = entry.find('=');
        if (eq == std::string::npos)
            throw erft::ConfigError(entry, "--set expects key=value");
        erft::apply_config_entry(config, entry.substr(0, eq), entry.substr(eq + 1));
    }
    config.validate();
    return config;
}

int run_cli(int argc, char** argv) {
    CLI::App app{"Error-recycling fine-tuning for flow-matching models on synthetic latents"};
    app.require_subcommand(1);

    CommonOpts gen_opts;
    CLI::App* gen = app.add_subcommand("gen-data", "Dump synthetic clips to CSV");
    add_common(gen, gen_opts);

    CommonOpts train_opts;
    std::string train_mode = "baseline";
    CLI::App* train = app.add_subcommand("train", "Train a velocity net");
    add_common(train, train_opts);
    train->add_option("--mode", train_mode, "baseline or erft")
        ->check(CLI::IsMember({"baseline", "erft"}))
        ->required();

    CommonOpts ablate_opts;
    std::vector<std::string> ablate_drops;
    CLI::App* ablate_cmd = app.add_subcommand("ablate", "ERFT training with error channels dropped");
    add_common(ablate_cmd, ablate_opts);
    ablate_cmd->add_option("--drop", ablate_drops, "Channel to drop: img, vid or noi (repeatable)")
        ->check(CLI::IsMember({"img", "vid", "noi"}))
        ->expected(-1);

    CommonOpts roll_opts;
    std::string checkpoint;
    std::size_t clips = 0;
    std::vector<std::uint64_t> seeds;
    std::string mode_label;
    std::string loss_csv;
    CLI::App* roll = app.add_subcommand("rollout", "Autoregressive rollout from a checkpoint");
    add_common(roll, roll_opts);
    roll->add_option("--checkpoint", checkpoint, "Checkpoint file")->required();
    roll->add_option("--clips", clips, "Clips per rollout (default: config num_clips)");
    roll->add_option("--seeds", seeds, "Rollout seeds")->expected(-1)->required();
    roll->add_option("--mode-label", mode_label,
                     "Mode column value (default: mode.txt next to the checkpoint)");
    roll->add_option("--loss-csv", loss_csv,
                     "Loss CSV supplying loss_final (default: loss.csv next to the checkpoint)");

    std::vector<std::string> report_csvs;
    erft::ReportOptions report_opts;
    std::string report_out_csv;
    CLI::App* report = app.add_subcommand("report", "Summarize metrics CSVs");
    report->add_option("csvs", report_csvs, "Metrics CSV files")->required()->expected(-1);
    report->add_flag("--assert-dominance", report_opts.assert_dominance,
                     "Exit nonzero unless method A dominates method B");
    report->add_option("--method-a", report_opts.method_a, "Mode treated as method A");
    report->add_option("--method-b", report_opts.method_b, "Mode treated as method B");
    report->add_option("--min-win-frac", report_opts.min_win_frac,
                       "Fraction of seeds A must win on terminal norm drift (default 0.8)");
    report->add_option("--max-slope-ratio", report_opts.max_slope_ratio,
                       "A's drift slope must be <= ratio * B's slope (default 0.5)");
    report->add_flag("--wins-only", report_opts.wins_only, "Check win counts only, skip slopes");
    report->add_option("--out-csv", report_out_csv, "Write the per-mode drift curves CSV here");

    CLI11_PARSE(app, argc, argv);

    if (gen->parsed()) {
        const erft::RunConfig config = resolve_config(gen_opts);
        const auto root = erft::resolve_out_root(gen_opts.out_root, config);
        const std::string run_id =
            gen_opts.run_id.empty() ? erft::default_run_id("gen-data", config) : gen_opts.run_id;
        const auto path = erft::run_gen_data(config, run_id, root);
        std::cout << path.string() << "\n";
        return 0;
    }

    if (train->parsed()) {
        const erft::RunConfig config = resolve_config(train_opts);
        const auto root = erft::resolve_out_root(train_opts.out_root, config);
        const std::string run_id =
            train_opts.run_id.empty() ? erft::default_run_id(train_mode, config) : train_opts.run_id;
        const auto art = erft::run_train(config, train_mode, run_id, root);
        std::cout << art.checkpoint_path.string() << "\n";
        return 0;
    }

    if (ablate_cmd->parsed()) {
        const erft::RunConfig config = resolve_config(ablate_opts);
        erft::AblationDrop drop;
        for (const std::string& d : ablate_drops) {
            if (d == "img") drop.img = true;
            if (d == "vid") drop.vid = true;
            if (d == "noi") drop.noi = true;
        }
        const auto root = erft::resolve_out_root(ablate_opts.out_root, config);
        std::string default_id = "erft";
        if (drop.img) default_id += "-drop-img";
        if (drop.vid) default_id += "-drop-vid";
        if (drop.noi) default_id += "-drop-noi";
        const std::string run_id = ablate_opts.run_id.empty()
                                       ? erft::default_run_id(default_id, config)
                                       : ablate_opts.run_id;
        const auto art = erft::run_train(config, "erft", run_id, root, drop);
        std::cout << art.checkpoint_path.string() << "\n";
        return 0;
    }

    if (roll->parsed()) {
        erft::RunConfig config = resolve_config(roll_opts);
        if (clips > 0) config.num_clips = clips;
        const auto root = erft::resolve_out_root(roll_opts.out_root, config);
        const std::string run_id =
            roll_opts.run_id.empty() ? erft::default_run_id("rollout", config) : roll_opts.run_id;
        std::optional<std::filesystem::path> loss_path;
        if (!loss_csv.empty()) loss_path = loss_csv;
        const auto art =
            erft::run_rollout(config, checkpoint, seeds, run_id, root, mode_label, loss_path);
        std::cout << art.metrics_path.string() << "\n";
        return 0;
    }

    if (report->parsed()) {
        std::vector<erft::MetricsRow> rows;
        for (const std::string& path : report_csvs) {
            auto more = erft::read_metrics_csv(path);
            rows.insert(rows.end(), more.begin(), more.end());
        }
        const erft::ReportResult result = erft::run_report(rows, report_opts);
        std::cout << result.text;
        if (!report_out_csv.empty()) {
            std::ofstream os(report_out_csv, std::ios::binary);
            if (!os) throw erft::FormatError("cannot open for writing: " + report_out_csv);
            os << result.comparison_csv;
        }
        if (result.dominance_checked && !result.dominance_ok) return 1;
        return 0;
    }

    return 2;
}

} // namespace

int main(int argc, char** argv) {
    try {
        return run_cli(argc, argv);
    } catch (const erft::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
