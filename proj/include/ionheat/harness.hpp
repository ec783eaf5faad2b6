#pragma once

#include <string>
#include <vector>

#include "ionheat/mcwf.hpp"
#include "ionheat/params.hpp"

// Experiment runner: preset and file-configured scenarios, CSV time series,
// and a plain-text comparison report. The heavy lifting lives in the
// analytic and mcwf engines; this layer owns grids, files, and exit codes.
namespace ionheat::harness {

enum class Engine { analytic, mcwf, markovian };

struct GridSpec {
    double t_max{0.0};
    int n_points{0};
    bool log_spacing{false};
    double log_min_fraction{1e-3};  // first nonzero time as a fraction of t_max
};

struct Scenario {
    std::string name{"custom"};
    PhysicalParams params{};
    InitialCondition init{};
    GridSpec grid{};
    std::vector<Engine> engines{};
    mcwf::SimConfig sim{};  // t_grid is filled from `grid` at run time
};

struct ReportRow {
    double t{0.0};
    double analytic{0.0};
    double mcwf_mean{0.0};
    double mcwf_sem{0.0};
    double markovian{0.0};
};

struct ComparisonReport {
    std::vector<ReportRow> rows;
    bool have_analytic{false};
    bool have_mcwf{false};
    bool have_markovian{false};

    // Agreement summary (only meaningful when analytic and mcwf both ran).
    // sem_eff is the sample sem floored by the thermal prediction
    // sqrt(n (n+1) / n_traj), so early grid points with zero observed
    // variance are compared against the statistically expected spread.
    double max_dev_over_sem{0.0};
    double fraction_within_3sem{1.0};
    bool tolerance_pass{true};

    // Short-time log-log fit over t in (0, 0.2/omega_c] and the quadratic
    // amplitude over t in (0, 0.05/omega_c].
    double fitted_exponent{0.0};
    double fitted_amplitude{0.0};
    double markovian_exponent{0.0};

    double asymptote_estimate{0.0};   // analytic value at t_max
    double asymptote_predicted{0.0};  // equilibrium mean occupation

    int resolved_dim{0};
    long completed{0};
    long aborted{0};
    std::vector<std::string> artifacts;  // files written, report last
};

struct RunOptions {
    std::string out_dir{"."};
    bool quiet{false};
};

// Sample times; log grids get t = 0 prepended ahead of the log-spaced block.
std::vector<double> make_grid(const GridSpec& g);

std::vector<std::string> preset_names();

// Bundled scenarios: fig1 (300 K transient), fig2 (10 mK thermalization),
// fig3 (flat-spectrum comparison window). paper_scale raises fig1 to its
// full 10^7-trajectory form; desk scale is the default.
Scenario preset(const std::string& name, bool paper_scale = false);

// Line-oriented `key = value` configuration; '#' starts a comment. Unknown
// and duplicate keys are hard errors carrying the line number.
Scenario parse_config(const std::string& text);

// Runs the selected engines on the shared grid and writes
// <out>/<name>_<engine>.csv, <out>/<name>_combined.csv, <out>/<name>_report.txt.
// On any hard error every file already written for this run is removed before
// the exception propagates.
ComparisonReport run_scenario(const Scenario& s, const RunOptions& opt = {});

// 0 = success, 1 = statistical tolerance failure in the comparison summary.
int exit_code(const ComparisonReport& r);

// Worker-count fallback: IONHEAT_WORKERS if set and positive, else fallback.
int env_workers(int fallback);

}  // namespace ionheat::harness
