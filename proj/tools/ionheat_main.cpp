#include <cstdio>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "ionheat/errors.hpp"
#include "ionheat/harness.hpp"

namespace {

ionheat::harness::Scenario resolve_scenario(const std::string& name, bool paper_scale,
                                            bool quiet) {
    const auto presets = ionheat::harness::preset_names();
    for (const auto& p : presets)
        if (name == p) return ionheat::harness::preset(name, paper_scale);

    std::ifstream in(name);
    if (!in) throw std::runtime_error("no such preset or config file: '" + name + "'");
    std::ostringstream text;
    text << in.rdbuf();
    auto s = ionheat::harness::parse_config(text.str());
    const std::string stem = std::filesystem::path(name).stem().string();
    if (!stem.empty()) s.name = stem;
    if (paper_scale && !quiet)
        std::fprintf(stderr, "note: --paper-scale only affects presets; ignored for config files\n");
    return s;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"ionheat: reservoir-induced heating of a trapped ion"};
    app.require_subcommand(1);

    auto* run = app.add_subcommand("run", "run a scenario and write CSV + report artifacts");
    std::string scenario;
    std::string out_dir = ".";
    long trajectories = 0;
    std::uint64_t seed = 0;
    int dim = 0;
    int workers = 0;
    bool paper_scale = false;
    bool quiet = false;
    run->add_option("--scenario", scenario, "preset name (fig1, fig2, fig3) or config file path")
        ->required();
    run->add_option("--out", out_dir, "output directory (default: current directory)");
    run->add_option("--trajectories", trajectories, "override trajectory count (0 skips mcwf)");
    run->add_option("--seed", seed, "override the ensemble base seed");
    run->add_option("--dim", dim, "override the Fock truncation (0 = automatic)");
    run->add_option("--workers", workers, "worker threads (default: IONHEAT_WORKERS or hardware)");
    run->add_flag("--paper-scale", paper_scale, "use the published trajectory counts");
    run->add_flag("--quiet", quiet, "suppress progress and warning chatter");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        auto s = resolve_scenario(scenario, paper_scale, quiet);
        if (run->count("--trajectories") > 0) {
            if (trajectories < 0) throw ionheat::ValidationError("trajectories", "must be non-negative");
            s.sim.n_traj = trajectories;
        }
        if (run->count("--seed") > 0) s.sim.seed = seed;
        if (run->count("--dim") > 0) {
            if (dim != 0 && dim < 2) throw ionheat::ValidationError("dim", "must be 0 (auto) or >= 2");
            s.sim.dim = dim;
        }
        if (run->count("--workers") > 0) {
            if (workers < 1) throw ionheat::ValidationError("workers", "must be >= 1");
            s.sim.workers = workers;
        } else {
            s.sim.workers = ionheat::harness::env_workers(s.sim.workers);
        }

        ionheat::harness::RunOptions opt;
        opt.out_dir = out_dir;
        opt.quiet = quiet;
        const auto rep = ionheat::harness::run_scenario(s, opt);
        if (!quiet) {
            for (const auto& f : rep.artifacts) std::printf("wrote %s\n", f.c_str());
            if (rep.have_analytic && rep.have_mcwf)
                std::printf("agreement: %.4f of points within 3 sem_eff (max dev %.3g sem)\n",
                            rep.fraction_within_3sem, rep.max_dev_over_sem);
            std::printf("status: %s\n", rep.tolerance_pass ? "PASS" : "FAIL");
        }
        return ionheat::harness::exit_code(rep);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
}
