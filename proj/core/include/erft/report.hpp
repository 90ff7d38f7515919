#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "erft/rollout.hpp"

namespace erft {

// One row of the metrics CSV
// (header: run_id,mode,seed,clip_index,norm_drift,step_drift,loss_final).
struct MetricsRow {
    std::string run_id;
    std::string mode;
    std::uint64_t seed = 0;
    std::size_t clip_index = 0;
    double norm_drift = 0.0;
    double step_drift = 0.0;
    double loss_final = 0.0;
};

const std::string& metrics_csv_header();
std::string format_metrics_row(const MetricsRow& row);

// Parses a metrics CSV; malformed rows raise FormatError naming the line.
std::vector<MetricsRow> read_metrics_csv(const std::filesystem::path& path);
std::vector<MetricsRow> parse_metrics_csv(const std::string& text, const std::string& origin);

struct ReportOptions {
    bool assert_dominance = false;
    // Dominance compares method_a against method_b; empty strings pick the
    // first two modes in row order.
    std::string method_a;
    std::string method_b;
    double min_win_frac = 0.8;    // fraction of seeds method_a must win on terminal norm drift
    double max_slope_ratio = 0.5; // method_a slope must be <= ratio * method_b slope
    bool wins_only = false;       // skip the slope conditions (stochastic trend checks)
};

struct ModeSummary {
    std::string mode;
    std::size_t seeds = 0;
    MethodSummary summary;
    std::vector<RolloutTrace> traces; // metrics only, ordered by seed
};

struct ReportResult {
    std::string text;           // human-readable summary
    std::string comparison_csv; // mode,clip_index,mean_norm_drift,mean_step_drift
    bool dominance_checked = false;
    bool dominance_ok = true;
    std::vector<ModeSummary> modes;
};

// Groups rows by mode, rebuilds per-seed drift curves, summarizes each
// mode, and (optionally) evaluates the dominance criteria of method_a
// over method_b.
ReportResult run_report(const std::vector<MetricsRow>& rows, const ReportOptions& options);

} // namespace erft
