#include "ionheat/harness.hpp"

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>

#include "ionheat/analytic.hpp"
#include "ionheat/errors.hpp"
#include "ionheat/reservoir.hpp"

#ifndef IONHEAT_BUILD_ID
#define IONHEAT_BUILD_ID "unversioned"
#endif

namespace ionheat::harness {

namespace fs = std::filesystem;

namespace {

std::string fmt(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

std::string engine_name(Engine e) {
    switch (e) {
        case Engine::analytic: return "analytic";
        case Engine::mcwf: return "mcwf";
        case Engine::markovian: return "markovian";
    }
    return "?";
}

std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return {};
    std::size_t b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

double parse_real(const std::string& v, int line) {
    errno = 0;
    char* end = nullptr;
    const double x = std::strtod(v.c_str(), &end);
    if (end == v.c_str() || *end != '\0' || errno == ERANGE || !std::isfinite(x))
        throw ParseError(line, "cannot parse numeric value '" + v + "'");
    return x;
}

long parse_integer(const std::string& v, int line) {
    const double x = parse_real(v, line);
    const double r = std::nearbyint(x);
    if (x != r || std::fabs(r) > 9.0e15)
        throw ParseError(line, "expected an integer value, got '" + v + "'");
    return static_cast<long>(r);
}

std::uint64_t parse_seed(const std::string& v, int line) {
    errno = 0;
    char* end = nullptr;
    const unsigned long long x = std::strtoull(v.c_str(), &end, 0);
    if (end == v.c_str() || *end != '\0' || errno == ERANGE || v.front() == '-')
        throw ParseError(line, "cannot parse seed '" + v + "'");
    return x;
}

std::vector<Engine> parse_engine_list(const std::string& v) {
    std::vector<Engine> out;
    std::stringstream ss(v);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        tok = trim(tok);
        if (tok.empty()) throw ValidationError("engines", "empty engine name in list");
        Engine e;
        if (tok == "analytic") e = Engine::analytic;
        else if (tok == "mcwf") e = Engine::mcwf;
        else if (tok == "markovian") e = Engine::markovian;
        else throw ValidationError("engines", "unknown engine '" + tok + "'");
        if (std::find(out.begin(), out.end(), e) == out.end()) out.push_back(e);
    }
    if (out.empty()) throw ValidationError("engines", "at least one engine is required");
    return out;
}

bool has_engine(const std::vector<Engine>& v, Engine e) {
    return std::find(v.begin(), v.end(), e) != v.end();
}

// Least-squares slope of ln(y) against ln(t) over the given samples.
double loglog_slope(const std::vector<std::pair<double, double>>& pts) {
    if (pts.size() < 2) return 0.0;
    double sx = 0, sy = 0;
    for (const auto& [t, y] : pts) {
        sx += std::log(t);
        sy += std::log(y);
    }
    const double mx = sx / double(pts.size());
    const double my = sy / double(pts.size());
    double num = 0, den = 0;
    for (const auto& [t, y] : pts) {
        const double dx = std::log(t) - mx;
        num += dx * (std::log(y) - my);
        den += dx * dx;
    }
    return den > 0 ? num / den : 0.0;
}

}  // namespace

std::vector<double> make_grid(const GridSpec& g) {
    if (!(g.t_max > 0.0) || !std::isfinite(g.t_max))
        throw ValidationError("t_max", "must be positive and finite");
    if (g.n_points < 2 || g.n_points > 1000000)
        throw ValidationError("n_points", "must lie in [2, 1000000]");
    if (!(g.log_min_fraction > 0.0) || !(g.log_min_fraction < 1.0))
        throw ValidationError("log_min_fraction", "must lie in (0, 1)");
    std::vector<double> t(static_cast<std::size_t>(g.n_points));
    t.front() = 0.0;
    t.back() = g.t_max;
    if (g.log_spacing) {
        // t = 0 plus a log-spaced block from t_max * log_min_fraction to t_max.
        const int m = g.n_points - 1;
        const double lo = std::log(g.t_max * g.log_min_fraction);
        const double hi = std::log(g.t_max);
        for (int i = 1; i + 1 < g.n_points; ++i)
            t[static_cast<std::size_t>(i)] = std::exp(lo + (hi - lo) * double(i - 1) / double(m - 1));
    } else {
        for (int i = 1; i + 1 < g.n_points; ++i)
            t[static_cast<std::size_t>(i)] = g.t_max * double(i) / double(g.n_points - 1);
    }
    for (std::size_t i = 1; i < t.size(); ++i)
        if (!(t[i] > t[i - 1]))
            throw ValidationError("n_points", "grid is not strictly increasing; too many points for this span");
    return t;
}

std::vector<std::string> preset_names() { return {"fig1", "fig2", "fig3"}; }

Scenario preset(const std::string& name, bool paper_scale) {
    Scenario s;
    s.name = name;
    if (name == "fig1") {
        // Room-temperature transient: quadratic onset through the first
        // coefficient oscillations, out to two cutoff periods.
        s.grid = GridSpec{2.0 / s.params.omega_c(), 81, true, 1e-3};
        s.engines = {Engine::analytic, Engine::mcwf};
        s.sim.n_traj = paper_scale ? 10000000L : 100000L;
    } else if (name == "fig2") {
        // Millikelvin thermalization out to five Markovian lifetimes.
        s.params.temperature = 0.010;
        const auto mk = reservoir::markovian_limit(s.params);
        s.grid = GridSpec{5.0 / mk.Gamma, 50, false, 1e-3};
        s.engines = {Engine::analytic, Engine::mcwf};
        s.sim.n_traj = 10000L;
    } else if (name == "fig3") {
        // Exact vs flat-spectrum reference over one cutoff period.
        s.grid = GridSpec{1.0 / s.params.omega_c(), 61, true, 1e-3};
        s.engines = {Engine::analytic, Engine::markovian};
        s.sim.n_traj = 0;
    } else {
        throw ValidationError("scenario", "unknown preset '" + name + "'");
    }
    return s;
}

Scenario parse_config(const std::string& text) {
    Scenario s;
    s.name = "custom";
    s.engines = {Engine::analytic, Engine::mcwf};
    s.grid = GridSpec{0.0, 81, true, 1e-3};  // t_max defaults to 2/omega_c below
    s.sim.n_traj = 100000L;

    std::set<std::string> seen;
    std::stringstream ss(text);
    std::string raw;
    int line = 0;
    while (std::getline(ss, raw)) {
        ++line;
        const std::size_t hash = raw.find('#');
        if (hash != std::string::npos) raw.erase(hash);
        const std::string stripped = trim(raw);
        if (stripped.empty()) continue;
        const std::size_t eq = stripped.find('=');
        if (eq == std::string::npos)
            throw ParseError(line, "expected 'key = value', got '" + stripped + "'");
        const std::string key = trim(stripped.substr(0, eq));
        const std::string val = trim(stripped.substr(eq + 1));
        if (key.empty()) throw ParseError(line, "missing key before '='");
        if (val.empty()) {
            if (key == "engines") throw ValidationError("engines", "at least one engine is required");
            throw ParseError(line, "missing value for key '" + key + "'");
        }
        if (!seen.insert(key).second)
            throw ParseError(line, "duplicate key '" + key + "'");

        auto positive = [&](double v, const char* name) {
            if (!(v > 0.0))
                throw ValidationError(name, "must be positive, got " + val);
            return v;
        };
        if (key == "alpha") s.params.alpha = positive(parse_real(val, line), "alpha");
        else if (key == "omega0") s.params.omega0 = positive(parse_real(val, line), "omega0");
        else if (key == "r") s.params.r = positive(parse_real(val, line), "r");
        else if (key == "temperature_K") s.params.temperature = positive(parse_real(val, line), "temperature_K");
        else if (key == "k") {
            const long k = parse_integer(val, line);
            if (k < 0) throw ValidationError("k", "must be non-negative, got " + val);
            s.init.k = k;
        } else if (key == "t_max") s.grid.t_max = positive(parse_real(val, line), "t_max");
        else if (key == "n_points") {
            const long n = parse_integer(val, line);
            if (n < 2 || n > 1000000) throw ValidationError("n_points", "must lie in [2, 1000000], got " + val);
            s.grid.n_points = static_cast<int>(n);
        } else if (key == "spacing") {
            if (val == "log") s.grid.log_spacing = true;
            else if (val == "linear") s.grid.log_spacing = false;
            else throw ValidationError("spacing", "must be 'linear' or 'log', got '" + val + "'");
        } else if (key == "engines") s.engines = parse_engine_list(val);
        else if (key == "dim") {
            const long d = parse_integer(val, line);
            if (d != 0 && (d < 2 || d > 200000))
                throw ValidationError("dim", "must be 0 (auto) or in [2, 200000], got " + val);
            s.sim.dim = static_cast<int>(d);
        } else if (key == "n_traj") {
            const long n = parse_integer(val, line);
            if (n < 0) throw ValidationError("n_traj", "must be non-negative, got " + val);
            s.sim.n_traj = n;
        } else if (key == "seed") s.sim.seed = parse_seed(val, line);
        else if (key == "dp_max") {
            const double d = parse_real(val, line);
            if (!(d > 0.0) || d > 0.1)
                throw ValidationError("dp_max", "must lie in (0, 0.1], got " + val);
            s.sim.dp_max = d;
        } else if (key == "leak_tol") {
            const double d = parse_real(val, line);
            if (!(d > 0.0) || !(d < 1.0))
                throw ValidationError("leak_tol", "must lie in (0, 1), got " + val);
            s.sim.leak_tol = d;
        } else {
            throw ParseError(line, "unknown key '" + key + "'");
        }
    }
    if (s.grid.t_max == 0.0) s.grid.t_max = 2.0 / s.params.omega_c();
    return s;
}

ComparisonReport run_scenario(const Scenario& s, const RunOptions& opt) {
    const PhysicalParams p = [&] {
        s.params.validate();
        return s.params;
    }();
    s.init.validate();
    if (s.name.empty() || s.name.find('/') != std::string::npos ||
        s.name.find('\\') != std::string::npos)
        throw ValidationError("scenario", "scenario name must be a plain file stem");
    if (s.engines.empty())
        throw ValidationError("engines", "at least one engine is required");

    const std::vector<double> grid = make_grid(s.grid);
    const bool want_analytic = has_engine(s.engines, Engine::analytic);
    const bool want_markovian = has_engine(s.engines, Engine::markovian);
    const bool want_mcwf = has_engine(s.engines, Engine::mcwf) && s.sim.n_traj > 0;

    if (!p.high_temperature_ok() && !opt.quiet)
        std::fprintf(stderr,
                     "warning: k_B T is not large against hbar omega_c; "
                     "second-order coefficients are extrapolated outside their regime\n");

    ComparisonReport rep;
    rep.have_analytic = want_analytic;
    rep.have_mcwf = want_mcwf;
    rep.have_markovian = want_markovian;
    rep.rows.resize(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) rep.rows[i].t = grid[i];

    if (want_analytic) {
        const auto curve = analytic::heating_curve(grid, s.init, p);
        for (std::size_t i = 0; i < grid.size(); ++i) rep.rows[i].analytic = curve[i].mean_n;
    }
    if (want_markovian) {
        for (std::size_t i = 0; i < grid.size(); ++i)
            rep.rows[i].markovian = analytic::markovian_heating(grid[i], s.init.k, p).mean_n;
    }
    mcwf::EnsembleStats stats;
    if (want_mcwf) {
        mcwf::SimConfig cfg = s.sim;
        cfg.t_grid = grid;
        stats = mcwf::ensemble_average(s.init, cfg, p);
        for (std::size_t i = 0; i < grid.size(); ++i) {
            rep.rows[i].mcwf_mean = stats.mean_n[i];
            rep.rows[i].mcwf_sem = stats.sem[i];
        }
        rep.resolved_dim = stats.dim;
        rep.completed = stats.completed;
        rep.aborted = stats.aborted;
    }

    const double omega_c = p.omega_c();
    rep.asymptote_predicted = 1.0 / p.hbar_beta_omega0() - 0.5;
    if (want_analytic) {
        rep.asymptote_estimate = rep.rows.back().analytic;
        std::vector<std::pair<double, double>> win;
        for (const auto& row : rep.rows)
            if (row.t > 0.0 && row.t <= 0.2 / omega_c && row.analytic > 0.0)
                win.emplace_back(row.t, row.analytic);
        rep.fitted_exponent = loglog_slope(win);
        double sum = 0;
        int cnt = 0;
        for (const auto& row : rep.rows)
            if (row.t > 0.0 && row.t <= 0.05 / omega_c && row.analytic > 0.0) {
                sum += std::log(row.analytic) - 2.0 * std::log(row.t);
                ++cnt;
            }
        rep.fitted_amplitude = cnt > 0 ? std::exp(sum / cnt) : 0.0;
    }
    if (want_markovian) {
        std::vector<std::pair<double, double>> win;
        for (const auto& row : rep.rows)
            if (row.t > 0.0 && row.t <= 0.2 / omega_c && row.markovian > 0.0)
                win.emplace_back(row.t, row.markovian);
        rep.markovian_exponent = loglog_slope(win);
    }

    // Statistical agreement: the sample sem is floored by the thermal
    // prediction sqrt(n(n+1)/M) so early points with no observed jumps are
    // judged against the spread the analytic mean implies.
    int compared = 0, within = 0;
    if (want_analytic && want_mcwf) {
        for (const auto& row : rep.rows) {
            const double nbar = std::max(row.analytic, 0.0);
            const double floor_sem =
                std::sqrt(nbar * (1.0 + nbar) / double(std::max(rep.completed, 1L)));
            const double sem_eff = std::fmax(row.mcwf_sem, floor_sem);
            const double dev = std::fabs(row.analytic - row.mcwf_mean);
            double z;
            if (dev == 0.0) z = 0.0;
            else if (sem_eff > 0.0) z = dev / sem_eff;
            else z = std::numeric_limits<double>::infinity();
            ++compared;
            if (z <= 3.0) ++within;
            rep.max_dev_over_sem = std::max(rep.max_dev_over_sem, z);
        }
        rep.fraction_within_3sem = double(within) / double(compared);
        rep.tolerance_pass = rep.fraction_within_3sem >= 0.99 - 1e-12;
    }

    // All computation succeeded; now write artifacts, removing everything on
    // a failure partway through.
    const fs::path dir(opt.out_dir);
    if (!dir.empty()) {
        std::error_code ec;
        fs::create_directories(dir, ec);
        if (!fs::is_directory(dir))
            throw std::runtime_error("cannot create output directory '" + dir.string() + "'");
    }
    std::vector<fs::path> written;
    auto open_file = [&](const std::string& base) {
        const fs::path f = dir / base;
        written.push_back(f);
        std::ofstream os(f, std::ios::trunc);
        if (!os) throw std::runtime_error("cannot open '" + f.string() + "' for writing");
        return os;
    };
    auto finish_file = [&](std::ofstream& os, const fs::path& f) {
        os.flush();
        if (!os) throw std::runtime_error("write failed for '" + f.string() + "'");
    };

    try {
        auto write_series = [&](Engine e, auto value, auto sem) {
            const std::string base = s.name + "_" + engine_name(e) + ".csv";
            auto os = open_file(base);
            os << "t,mean_n,sem,engine\n";
            for (std::size_t i = 0; i < rep.rows.size(); ++i)
                os << fmt(rep.rows[i].t) << ',' << fmt(value(i)) << ',' << fmt(sem(i)) << ','
                   << engine_name(e) << '\n';
            finish_file(os, written.back());
        };
        if (want_analytic)
            write_series(
                Engine::analytic, [&](std::size_t i) { return rep.rows[i].analytic; },
                [](std::size_t) { return 0.0; });
        if (want_mcwf)
            write_series(
                Engine::mcwf, [&](std::size_t i) { return rep.rows[i].mcwf_mean; },
                [&](std::size_t i) { return rep.rows[i].mcwf_sem; });
        if (want_markovian)
            write_series(
                Engine::markovian, [&](std::size_t i) { return rep.rows[i].markovian; },
                [](std::size_t) { return 0.0; });

        {
            auto os = open_file(s.name + "_combined.csv");
            os << "t";
            if (want_analytic) os << ",analytic";
            if (want_mcwf) os << ",mcwf_mean,mcwf_sem";
            if (want_markovian) os << ",markovian";
            os << '\n';
            for (const auto& row : rep.rows) {
                os << fmt(row.t);
                if (want_analytic) os << ',' << fmt(row.analytic);
                if (want_mcwf) os << ',' << fmt(row.mcwf_mean) << ',' << fmt(row.mcwf_sem);
                if (want_markovian) os << ',' << fmt(row.markovian);
                os << '\n';
            }
            finish_file(os, written.back());
        }

        {
            const auto mk = reservoir::markovian_limit(p);
            auto os = open_file(s.name + "_report.txt");
            os << "ionheat scenario report\n";
            os << "scenario: " << s.name << '\n';
            os << "build: " << IONHEAT_BUILD_ID << '\n';
            os << "constants: hbar = " << fmt(kHbar) << " J s, k_B = " << fmt(kBoltzmann)
               << " J/K\n";
            os << "alpha = " << fmt(p.alpha) << " 1/s\n";
            os << "omega0 = " << fmt(p.omega0) << " rad/s\n";
            os << "r = " << fmt(p.r) << "  (omega_c = " << fmt(p.omega_c()) << " rad/s)\n";
            os << "temperature_K = " << fmt(p.temperature) << '\n';
            os << "initial Fock level k = " << s.init.k << '\n';
            os << "grid: t_max = " << fmt(s.grid.t_max) << " s, n_points = " << s.grid.n_points
               << ", spacing = " << (s.grid.log_spacing ? "log" : "linear") << '\n';
            os << "engines:";
            if (want_analytic) os << " analytic";
            if (want_mcwf) os << " mcwf";
            if (want_markovian) os << " markovian";
            if (!want_analytic && !want_mcwf && !want_markovian) os << " none";
            os << '\n';
            os << "seed = " << s.sim.seed << '\n';
            if (has_engine(s.engines, Engine::mcwf) && s.sim.n_traj == 0)
                os << "note: n_traj = 0, stochastic engine skipped\n";
            if (want_mcwf) {
                os << "trajectories: requested = " << stats.n_traj
                   << ", completed = " << stats.completed << ", aborted = " << stats.aborted
                   << '\n';
                os << "dim = " << stats.dim << '\n';
                os << "dp_max = " << fmt(s.sim.dp_max) << ", leak_tol = " << fmt(s.sim.leak_tol)
                   << '\n';
                if (s.sim.freeze_rates) os << "rates frozen at their long-time values\n";
                os << "jump totals: down = " << stats.jumps_down << ", up = " << stats.jumps_up
                   << '\n';
            }
            os << "flat-spectrum reference: n(t) = n_th (1 - exp(-Gamma t)) + k exp(-Gamma t)\n";
            os << "  Gamma = " << fmt(mk.Gamma) << " 1/s\n";
            os << "  n_th = " << fmt(mk.n_omega0) << "  (thermal occupation at omega0)\n";
            os << "equilibrium mean occupation = " << fmt(rep.asymptote_predicted) << '\n';
            if (want_analytic) {
                os << "short-time fit: exponent = " << fmt(rep.fitted_exponent)
                   << " (window t <= 0.2/omega_c), amplitude = " << fmt(rep.fitted_amplitude)
                   << " (window t <= 0.05/omega_c)\n";
                os << "analytic(t_max) = " << fmt(rep.asymptote_estimate) << '\n';
            }
            if (want_markovian)
                os << "flat-spectrum short-time exponent = " << fmt(rep.markovian_exponent)
                   << '\n';
            if (want_analytic && want_mcwf) {
                os << "comparison (analytic vs mcwf):\n";
                os << "  points compared = " << compared << '\n';
                os << "  within 3 sem_eff = " << within
                   << " (fraction = " << fmt(rep.fraction_within_3sem) << ")\n";
                os << "  max |dev| / sem_eff = " << fmt(rep.max_dev_over_sem) << '\n';
                os << "  sem_eff floor: sqrt(n (n+1) / completed) from the analytic mean\n";
                os << "status: " << (rep.tolerance_pass ? "PASS" : "FAIL") << '\n';
            } else {
                os << "status: PASS (no statistical comparison)\n";
            }
            finish_file(os, written.back());
        }
    } catch (...) {
        for (const auto& f : written) {
            std::error_code ec;
            fs::remove(f, ec);
        }
        throw;
    }

    rep.artifacts.reserve(written.size());
    for (const auto& f : written) rep.artifacts.push_back(f.string());
    return rep;
}

int exit_code(const ComparisonReport& r) { return r.tolerance_pass ? 0 : 1; }

int env_workers(int fallback) {
    const char* v = std::getenv("IONHEAT_WORKERS");
    if (v == nullptr || *v == '\0') return fallback;
    char* end = nullptr;
    const long w = std::strtol(v, &end, 10);
    if (end == v || *end != '\0' || w < 1 || w > 4096) return fallback;
    return static_cast<int>(w);
}

}  // namespace ionheat::harness
