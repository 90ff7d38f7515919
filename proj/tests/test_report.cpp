#include <doctest.h>

#include <cmath>
#include <string>
#include <vector>

#include "erft/errors.hpp"
#include "erft/report.hpp"

using namespace erft;

namespace {

MetricsRow row(const std::string& mode, std::uint64_t seed, std::size_t clip, double norm_drift) {
    MetricsRow r;
    r.run_id = mode + "-run";
    r.mode = mode;
    r.seed = seed;
    r.clip_index = clip;
    r.norm_drift = norm_drift;
    r.step_drift = norm_drift * 2.0;
    r.loss_final = 0.25;
    return r;
}

// Two seeds, three clips per seed, with mode "b" drifting harder.
std::vector<MetricsRow> two_mode_rows() {
    std::vector<MetricsRow> rows;
    for (std::uint64_t seed : {1, 2}) {
        for (std::size_t clip = 0; clip < 3; ++clip) {
            const double base = 0.1 * static_cast<double>(seed);
            rows.push_back(row("a", seed, clip, base + 0.01 * static_cast<double>(clip)));
            rows.push_back(row("b", seed, clip, base + 0.10 * static_cast<double>(clip)));
        }
    }
    return rows;
}

} // namespace

TEST_CASE("row formatting round-trips through the parser") {
    MetricsRow r = row("erft", 7, 3, 0.1);
    r.loss_final = 1.0 / 3.0;
    const std::string text = metrics_csv_header() + "\n" + format_metrics_row(r) + "\n";
    const std::vector<MetricsRow> rows = parse_metrics_csv(text, "mem");
    REQUIRE(rows.size() == 1);
    CHECK(rows[0].run_id == "erft-run");
    CHECK(rows[0].mode == "erft");
    CHECK(rows[0].seed == 7);
    CHECK(rows[0].clip_index == 3);
    CHECK(rows[0].norm_drift == 0.1);
    CHECK(rows[0].step_drift == 0.2);
    CHECK(rows[0].loss_final == 1.0 / 3.0);
}

TEST_CASE("the header line is mandatory and exact") {
    CHECK_THROWS_AS(parse_metrics_csv("nonsense\n", "mem"), FormatError);
    CHECK_THROWS_AS(parse_metrics_csv("", "mem"), FormatError);
    CHECK_NOTHROW(parse_metrics_csv(metrics_csv_header() + "\n", "mem"));
    CHECK_NOTHROW(parse_metrics_csv(metrics_csv_header() + "\r\n", "mem"));
}

TEST_CASE("malformed rows name the origin and line") {
    const std::string text = metrics_csv_header() + "\nrun,erft,1,0,0.1,0.2,0.3\nrun,erft,1,oops,0.1,0.2,0.3\n";
    try {
        parse_metrics_csv(text, "somefile.csv");
        FAIL("expected FormatError");
    } catch (const FormatError& e) {
        const std::string what = e.what();
        CHECK(what.find("somefile.csv") != std::string::npos);
        CHECK(what.find("3") != std::string::npos);
    }
    CHECK_THROWS_AS(parse_metrics_csv(metrics_csv_header() + "\na,b,1,0,0.1,0.2\n", "mem"),
                    FormatError);
    CHECK_THROWS_AS(read_metrics_csv("/nonexistent/erft/metrics.csv"), FormatError);
}

TEST_CASE("report summarizes each mode from the drift curves") {
    const ReportResult res = run_report(two_mode_rows(), ReportOptions{});
    REQUIRE(res.modes.size() == 2);
    const ModeSummary& a = res.modes[0];
    const ModeSummary& b = res.modes[1];
    CHECK(a.mode == "a");
    CHECK(b.mode == "b");
    CHECK(a.seeds == 2);
    REQUIRE(a.traces.size() == 2);
    REQUIRE(a.traces[0].metrics.size() == 3);

    // Terminal norm drift averages the two seeds' final clips.
    CHECK(a.summary.terminal_norm_drift == doctest::Approx(0.17).epsilon(1e-12));
    CHECK(b.summary.terminal_norm_drift == doctest::Approx(0.35).epsilon(1e-12));
    CHECK(a.summary.norm_slope == doctest::Approx(0.01).epsilon(1e-9));
    CHECK(b.summary.norm_slope == doctest::Approx(0.10).epsilon(1e-9));

    CHECK(res.text.find("mode a:") != std::string::npos);
    CHECK(res.text.find("mode b:") != std::string::npos);
    CHECK_FALSE(res.dominance_checked);

    CHECK(res.comparison_csv.find("mode,clip_index,mean_norm_drift,mean_step_drift") == 0);
    CHECK(res.comparison_csv.find("\na,0,") != std::string::npos);
    CHECK(res.comparison_csv.find("\nb,2,") != std::string::npos);
}

TEST_CASE("dominance passes when method a wins everywhere with a flat slope") {
    ReportOptions opts;
    opts.assert_dominance = true;
    const ReportResult res = run_report(two_mode_rows(), opts);
    CHECK(res.dominance_checked);
    CHECK(res.dominance_ok); // a wins 2/2 seeds and 0.01 <= 0.5 * 0.10
}

TEST_CASE("dominance fails on the slope condition") {
    ReportOptions opts;
    opts.assert_dominance = true;
    opts.max_slope_ratio = 0.05; // requires 0.01 <= 0.005
    const ReportResult res = run_report(two_mode_rows(), opts);
    CHECK(res.dominance_checked);
    CHECK_FALSE(res.dominance_ok);

    opts.wins_only = true; // ignore slopes, wins alone decide
    CHECK(run_report(two_mode_rows(), opts).dominance_ok);
}

TEST_CASE("dominance fails when method a loses too many seeds") {
    std::vector<MetricsRow> rows = two_mode_rows();
    for (MetricsRow& r : rows)
        if (r.mode == "a" && r.seed == 2) r.norm_drift += 10.0;
    ReportOptions opts;
    opts.assert_dominance = true;
    opts.wins_only = true;
    opts.min_win_frac = 0.8; // 1/2 < 0.8
    const ReportResult res = run_report(rows, opts);
    CHECK_FALSE(res.dominance_ok);

    opts.min_win_frac = 0.5; // 1/2 >= 0.5
    CHECK(run_report(rows, opts).dominance_ok);
}

TEST_CASE("explicit method names override row order") {
    ReportOptions opts;
    opts.assert_dominance = true;
    opts.method_a = "b";
    opts.method_b = "a";
    opts.wins_only = true;
    const ReportResult res = run_report(two_mode_rows(), opts);
    CHECK_FALSE(res.dominance_ok); // b never wins

    opts.method_a = "missing";
    CHECK_THROWS_AS(run_report(two_mode_rows(), opts), FormatError);
}

TEST_CASE("single-mode reports skip the comparison") {
    std::vector<MetricsRow> rows;
    for (std::size_t clip = 0; clip < 3; ++clip) rows.push_back(row("solo", 1, clip, 0.1));
    const ReportResult res = run_report(rows, ReportOptions{});
    CHECK(res.modes.size() == 1);
    CHECK(res.comparison_csv.find("solo,0,") != std::string::npos);

    ReportOptions opts;
    opts.assert_dominance = true;
    CHECK_THROWS_AS(run_report(rows, opts), FormatError);
}

TEST_CASE("gaps in the clip indices are rejected") {
    std::vector<MetricsRow> rows{row("a", 1, 0, 0.1), row("a", 1, 2, 0.2)};
    CHECK_THROWS_AS(run_report(rows, ReportOptions{}), FormatError);
    std::vector<MetricsRow> empty;
    CHECK_THROWS_AS(run_report(empty, ReportOptions{}), FormatError);
}
