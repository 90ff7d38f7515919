#include "erft/report.hpp"

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>

#include "erft/errors.hpp"

namespace erft {

namespace {

const std::string kHeader = "run_id,mode,seed,clip_index,norm_drift,step_drift,loss_final";

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    for (char ch : line) {
        if (ch == ',') {
            fields.push_back(cur);
            cur.clear();
        } else {
            cur += ch;
        }
    }
    fields.push_back(cur);
    return fields;
}

double parse_field_double(const std::string& s, const std::string& origin, std::size_t line_no) {
    errno = 0;
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (end == s.c_str() || *end != '\0' || errno == ERANGE)
        throw FormatError(origin + ": line " + std::to_string(line_no) +
                          ": expected a number, got '" + s + "'");
    return v;
}

std::uint64_t parse_field_u64(const std::string& s, const std::string& origin, std::size_t line_no) {
    errno = 0;
    char* end = nullptr;
    const unsigned long long v = std::strtoull(s.c_str(), &end, 10);
    if (s.empty() || s[0] == '-' || end == s.c_str() || *end != '\0' || errno == ERANGE)
        throw FormatError(origin + ": line " + std::to_string(line_no) +
                          ": expected an integer, got '" + s + "'");
    return static_cast<std::uint64_t>(v);
}

std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

} // namespace

const std::string& metrics_csv_header() { return kHeader; }

std::string format_metrics_row(const MetricsRow& row) {
    std::ostringstream os;
    os << row.run_id << ',' << row.mode << ',' << row.seed << ',' << row.clip_index << ','
       << format_double(row.norm_drift) << ',' << format_double(row.step_drift) << ','
       << format_double(row.loss_final);
    return os.str();
}

std::vector<MetricsRow> parse_metrics_csv(const std::string& text, const std::string& origin) {
    std::istringstream is(text);
    std::string line;
    std::size_t line_no = 0;
    std::vector<MetricsRow> rows;
    bool saw_header = false;
    while (std::getline(is, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (!saw_header) {
            if (line != kHeader)
                throw FormatError(origin + ": line 1: expected header '" + kHeader + "'");
            saw_header = true;
            continue;
        }
        const auto fields = split_csv_line(line);
        if (fields.size() != 7)
            throw FormatError(origin + ": line " + std::to_string(line_no) + ": expected 7 fields, got " +
                              std::to_string(fields.size()));
        MetricsRow row;
        row.run_id = fields[0];
        row.mode = fields[1];
        row.seed = parse_field_u64(fields[2], origin, line_no);
        row.clip_index = static_cast<std::size_t>(parse_field_u64(fields[3], origin, line_no));
        row.norm_drift = parse_field_double(fields[4], origin, line_no);
        row.step_drift = parse_field_double(fields[5], origin, line_no);
        row.loss_final = parse_field_double(fields[6], origin, line_no);
        rows.push_back(std::move(row));
    }
    if (!saw_header) throw FormatError(origin + ": empty metrics CSV");
    return rows;
}

std::vector<MetricsRow> read_metrics_csv(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw FormatError("cannot open metrics CSV: " + path.string());
    std::ostringstream buf;
    buf << is.rdbuf();
    return parse_metrics_csv(buf.str(), path.string());
}

namespace {

std::vector<ModeSummary> build_mode_summaries(const std::vector<MetricsRow>& rows,
                                              std::vector<std::string>& mode_order) {
    // mode -> seed -> clip_index -> metrics
    std::map<std::string, std::map<std::uint64_t, std::map<std::size_t, DriftMetrics>>> grouped;
    for (const MetricsRow& row : rows) {
        if (std::find(mode_order.begin(), mode_order.end(), row.mode) == mode_order.end())
            mode_order.push_back(row.mode);
        grouped[row.mode][row.seed][row.clip_index] = DriftMetrics{row.norm_drift, row.step_drift};
    }

    std::vector<ModeSummary> out;
    for (const std::string& mode : mode_order) {
        ModeSummary ms;
        ms.mode = mode;
        for (const auto& [seed, curve] : grouped[mode]) {
            RolloutTrace trace;
            trace.seed = seed;
            std::size_t expected = 0;
            for (const auto& [clip_index, metrics] : curve) {
                if (clip_index != expected)
                    throw FormatError("mode '" + mode + "' seed " + std::to_string(seed) +
                                      ": clip indices not contiguous from 0");
                trace.metrics.push_back(metrics);
                ++expected;
            }
            ms.traces.push_back(std::move(trace));
        }
        ms.seeds = ms.traces.size();
        ms.summary = summarize_traces(ms.traces);
        out.push_back(std::move(ms));
    }
    return out;
}

const ModeSummary* find_mode(const std::vector<ModeSummary>& modes, const std::string& name) {
    for (const auto& m : modes)
        if (m.mode == name) return &m;
    return nullptr;
}

} // namespace

ReportResult run_report(const std::vector<MetricsRow>& rows, const ReportOptions& options) {
    if (rows.empty()) throw FormatError("run_report: no metrics rows");

    std::vector<std::string> mode_order;
    ReportResult result;
    result.modes = build_mode_summaries(rows, mode_order);

    std::ostringstream text;
    std::ostringstream csv;
    csv << "mode,clip_index,mean_norm_drift,mean_step_drift\n";
    for (const ModeSummary& ms : result.modes) {
        text << "mode " << ms.mode << ": seeds=" << ms.seeds
             << " clips=" << ms.summary.mean_norm_drift.size()
             << " terminal_norm_drift=" << format_double(ms.summary.terminal_norm_drift)
             << " terminal_step_drift=" << format_double(ms.summary.terminal_step_drift)
             << " norm_slope=" << format_double(ms.summary.norm_slope)
             << " step_slope=" << format_double(ms.summary.step_slope) << "\n";
        for (std::size_t i = 0; i < ms.summary.mean_norm_drift.size(); ++i)
            csv << ms.mode << ',' << i << ',' << format_double(ms.summary.mean_norm_drift[i]) << ','
                << format_double(ms.summary.mean_step_drift[i]) << "\n";
    }

    std::string name_a = options.method_a;
    std::string name_b = options.method_b;
    if (name_a.empty() && mode_order.size() >= 2) name_a = mode_order[0];
    if (name_b.empty() && mode_order.size() >= 2) name_b = mode_order[1];

    if (!name_a.empty() && !name_b.empty() && name_a != name_b) {
        const ModeSummary* a = find_mode(result.modes, name_a);
        const ModeSummary* b = find_mode(result.modes, name_b);
        if (a == nullptr || b == nullptr)
            throw FormatError("run_report: requested modes not present in the metrics rows");
        const RunComparison cmp = compare_runs(a->traces, b->traces);
        text << "comparison " << name_a << " vs " << name_b << ": seeds=" << cmp.seeds
             << " norm_wins=" << cmp.a_norm_wins << "/" << cmp.seeds
             << " step_wins=" << cmp.a_step_wins << "/" << cmp.seeds
             << " slopes=" << format_double(cmp.a.norm_slope) << " vs "
             << format_double(cmp.b.norm_slope) << "\n";

        if (options.assert_dominance) {
            result.dominance_checked = true;
            const double needed = options.min_win_frac * static_cast<double>(cmp.seeds);
            const bool wins_ok = static_cast<double>(cmp.a_norm_wins) >= needed - 1e-12;
            bool slope_ok = true;
            if (!options.wins_only) {
                slope_ok = cmp.b.norm_slope > 0.0 &&
                           cmp.a.norm_slope <= options.max_slope_ratio * cmp.b.norm_slope;
            }
            result.dominance_ok = wins_ok && slope_ok;
            text << "dominance: wins_ok=" << (wins_ok ? "yes" : "no");
            if (!options.wins_only) text << " slope_ok=" << (slope_ok ? "yes" : "no");
            text << " => " << (result.dominance_ok ? "PASS" : "FAIL") << "\n";
        }
    } else if (options.assert_dominance) {
        throw FormatError("run_report: dominance assertion needs two distinct modes");
    }

    result.text = text.str();
    result.comparison_csv = csv.str();
    return result;
}

} // namespace erft
