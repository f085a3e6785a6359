#include "rydecay/commands.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

#include "rydecay/coherence.hpp"
#include "rydecay/master_equation.hpp"
#include "rydecay/meanfield.hpp"
#include "rydecay/parallel.hpp"
#include "rydecay/trajectories.hpp"

namespace rydecay {

namespace fs = std::filesystem;
using nlohmann::json;

std::string format_number(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

namespace {

class CsvWriter {
public:
    CsvWriter(const fs::path& path, const std::vector<std::string>& comments, const std::vector<std::string>& columns)
        : path_(path), out_(path) {
        if (!out_) throw std::runtime_error("cannot write '" + path.string() + "'");
        for (const auto& c : comments) out_ << "# " << c << '\n';
        row(columns);
    }

    void row(const std::vector<std::string>& fields) {
        for (std::size_t i = 0; i < fields.size(); ++i) out_ << (i ? "," : "") << fields[i];
        out_ << '\n';
    }

    const fs::path& path() const { return path_; }

private:
    fs::path path_;
    std::ofstream out_;
};

std::string num_or_empty(const std::vector<double>& v, std::size_t i) {
    return i < v.size() ? format_number(v[i]) : std::string{};
}

fs::path prepare_out(const RunConfig& config) {
    fs::path dir(config.out);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir)) throw std::runtime_error("cannot create output directory '" + config.out + "'");
    return dir;
}

json lattice_json(const LatticeSpec& l) {
    return {{"dimension", l.dimension()}, {"extents", l.extents()}, {"boundary", to_string(l.boundary())},
            {"sites", l.site_count()}};
}

void finish(CommandResult& result, const fs::path& dir, const std::string& command, const RunConfig& config,
            std::chrono::steady_clock::time_point start) {
    result.manifest["command"] = command;
    result.manifest["config"] = config;
    result.manifest["units"] = "gamma = 1: times in 1/gamma, frequencies in gamma";
    result.manifest["wall_time_s"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    json files = json::array();
    for (const auto& f : result.files) files.push_back(f.filename().string());
    result.manifest["outputs"] = files;
    const fs::path manifest = dir / (command + ".manifest.json");
    std::ofstream out(manifest);
    if (!out) throw std::runtime_error("cannot write '" + manifest.string() + "'");
    out << result.manifest.dump(2) << '\n';
    result.files.push_back(manifest);
}

// The CLI works in units of gamma; the kernels of every module accept a general
// gamma, so rescale rather than assume.
void require_unit_rate(const RunConfig& config) {
    if (config.gamma != 1.0)
        throw std::invalid_argument("the CLI works in units of the decay rate; set gamma = 1 and rescale inputs");
}

}  // namespace

CommandResult cmd_coherence(const RunConfig& config) {
    config.validate();
    require_unit_rate(config);
    const auto start = std::chrono::steady_clock::now();
    const fs::path dir = prepare_out(config);
    const CoherenceParams params{config.omega_a, config.V, config.gamma};
    const auto times = linspace(0.0, config.t_max, config.t_points);
    const auto single0 = initial_coherence(config.d, params, DecayModel::single);
    const auto collective0 = initial_coherence(config.d, params, DecayModel::collective);
    const int modes = 2 * config.d + 1;

    CommandResult result;
    std::vector<std::vector<double>> me_abs(2);
    if (config.cross_check_sites > 0) {
        std::vector<int> ext(static_cast<std::size_t>(config.d), config.cross_check_sites);
        const auto lattice = build_lattice(config.d, ext, Boundary::periodic);
        json checks = json::object();
        for (auto model : {DecayModel::single, DecayModel::collective}) {
            const auto check = verify_against_master_equation(lattice, params, model, times, {config.dt});
            auto& col = me_abs[model == DecayModel::single ? 0 : 1];
            for (const auto& row : check.master_equation_modes) {
                cplx sum{};
                for (const auto& x : row) sum += x;
                col.push_back(std::abs(sum));
            }
            checks[to_string(model)] = {{"skipped", check.skipped},
                                        {"diagnostic", check.diagnostic},
                                        {"max_deviation", check.max_deviation}};
        }
        result.manifest["cross_check"] = {{"lattice", lattice_json(lattice)}, {"results", checks}};
    }

    std::vector<std::string> columns{"t", "abs_X_single", "abs_X_collective"};
    for (const char* m : {"single", "collective"})
        for (int xi = 0; xi < modes; ++xi) columns.push_back(std::string("abs_X_") + m + "_xi" + std::to_string(xi));
    if (config.cross_check_sites > 0) {
        columns.push_back("me_abs_X_single");
        columns.push_back("me_abs_X_collective");
    }
    CsvWriter csv(dir / "coherence.csv",
                  {"site-averaged coherence |X(t)| and neighborhood modes |X_xi(t)|",
                   "d=" + std::to_string(config.d) + " V=" + format_number(config.V) +
                       " omega_a=" + format_number(config.omega_a) + " (units of gamma)"},
                  columns);
    for (std::size_t i = 0; i < times.size(); ++i) {
        const auto s = evolve_single(single0, times[i]);
        const auto c = evolve_collective(collective0, times[i]);
        std::vector<std::string> row{format_number(times[i]), format_number(s.modulus()), format_number(c.modulus())};
        for (const auto* st : {&s, &c})
            for (const auto& x : st->modes) row.push_back(format_number(std::abs(x)));
        if (config.cross_check_sites > 0) {
            row.push_back(num_or_empty(me_abs[0], i));
            row.push_back(num_or_empty(me_abs[1], i));
        }
        csv.row(row);
    }
    result.files.push_back(csv.path());
    result.manifest["short_time"] = json::object();
    for (auto model : {DecayModel::single, DecayModel::collective}) {
        const auto k = short_time_coefficients(model, config.d, config.gamma, config.V);
        result.manifest["short_time"][to_string(model)] = {k.c0, k.c1, k.c2};
    }
    finish(result, dir, "coherence", config, start);
    return result;
}

namespace {

struct SweepRow {
    double Delta, Omega;
    std::vector<double> n;    // indexed like models; NaN when absent
    std::vector<double> err;  // trajectories only
};

CommandResult steady_state_sweep(const RunConfig& config, bool trajectories) {
    config.validate();
    require_unit_rate(config);
    const auto start = std::chrono::steady_clock::now();
    const auto lattice = config.lattice();
    if (!trajectories && lattice.site_count() > kMaxExactSites)
        throw std::invalid_argument("exact steady state supports at most " + std::to_string(kMaxExactSites) +
                                    " sites; use the 'trajectories' command for larger systems");
    const fs::path dir = prepare_out(config);
    const auto deltas = config.delta_grid();
    const auto omegas = config.omega_grid();
    const auto models = config.decay_models();
    const IntegratorOptions integrator{config.dt};

    std::vector<SweepRow> rows(deltas.size() * omegas.size());
    parallel_for(static_cast<int>(rows.size()), config.threads, [&](int idx) {
        auto& row = rows[static_cast<std::size_t>(idx)];
        row.Delta = deltas[static_cast<std::size_t>(idx) % deltas.size()];
        row.Omega = omegas[static_cast<std::size_t>(idx) / deltas.size()];
        row.n.assign(2, std::nan(""));
        row.err.assign(2, std::nan(""));
        for (auto model : models) {
            const auto slot = static_cast<std::size_t>(model == DecayModel::single ? 0 : 1);
            const auto system = build_open_system(lattice, config.model_params(row.Delta, row.Omega), model);
            if (trajectories) {
                EnsembleOptions opt;
                opt.n_traj = config.n_traj;
                // Both models share the cell's random stream.
                opt.master_seed = child_seed(config.seed, static_cast<std::uint64_t>(idx));
                opt.trajectory.dt = config.dt;
                const auto est = trajectory_steady_state(system, opt);
                row.n[slot] = est.mean;
                row.err[slot] = est.std_error;
            } else {
                row.n[slot] = exact_steady_state_density(system, integrator);
            }
        }
    });

    auto field = [](double v) { return std::isnan(v) ? std::string{} : format_number(v); };
    std::vector<std::string> columns{"Delta", "Omega", "n_ss_single", "n_ss_collective", "delta_n_ss"};
    if (trajectories) {
        columns.push_back("stderr_single");
        columns.push_back("stderr_collective");
    }
    const std::string name = trajectories ? "trajectories" : "steady_state";
    CsvWriter csv(dir / (name + ".csv"),
                  {std::string("stationary excitation density, ") +
                       (trajectories ? "quantum-jump ensemble" : "exact master equation") +
                       ", mean over 100 samples in t in [4.75, 5.00]",
                   "delta_n_ss = (n_ss_collective - n_ss_single) / n_ss_single"},
                  columns);
    double max_delta = -INFINITY, max_at_delta = 0.0, max_at_omega = 0.0;
    for (const auto& r : rows) {
        double rel = std::nan("");
        if (!std::isnan(r.n[0]) && !std::isnan(r.n[1]) && std::abs(r.n[0]) >= 1e-12) {
            rel = relative_difference(r.n[1], r.n[0]);
            if (rel > max_delta) {
                max_delta = rel;
                max_at_delta = r.Delta;
                max_at_omega = r.Omega;
            }
        }
        std::vector<std::string> line{format_number(r.Delta), format_number(r.Omega), field(r.n[0]), field(r.n[1]),
                                      field(rel)};
        if (trajectories) {
            line.push_back(field(r.err[0]));
            line.push_back(field(r.err[1]));
        }
        csv.row(line);
    }

    CommandResult result;
    result.files.push_back(csv.path());
    result.manifest["lattice"] = lattice_json(lattice);
    result.manifest["initial_state"] = "all atoms in the ground state";
    if (trajectories) {
        result.manifest["integrator"] = {{"method", "waiting-time quantum jumps, RK4 between jumps"},
                                         {"dt", config.dt},
                                         {"jump_time_tolerance", TrajectoryOptions{}.jump_time_tolerance}};
        result.manifest["master_seed"] = config.seed;
        result.manifest["n_traj"] = config.n_traj;
    } else {
        result.manifest["integrator"] = {{"method", "fixed-step RK4 on the density matrix"}, {"dt", config.dt}};
    }
    if (std::isfinite(max_delta))
        result.manifest["max_delta_n_ss"] = {{"value", max_delta}, {"Delta", max_at_delta}, {"Omega", max_at_omega}};
    finish(result, dir, trajectories ? "trajectories" : "steady-state", config, start);
    return result;
}

}  // namespace

CommandResult cmd_steady_state(const RunConfig& config) { return steady_state_sweep(config, false); }

CommandResult cmd_trajectories(const RunConfig& config) { return steady_state_sweep(config, true); }

CommandResult cmd_meanfield(const RunConfig& config) {
    config.validate();
    require_unit_rate(config);
    const auto start = std::chrono::steady_clock::now();
    const fs::path dir = prepare_out(config);
    const auto deltas = config.delta_grid();
    const auto omegas = config.omega_grid();
    const auto base = config.meanfield_params();
    FixedPointOptions fpo;
    fpo.seed_grid = config.seed_grid;

    CommandResult result;
    const auto cells = scan_phase_diagram(deltas, omegas, base, fpo, config.threads);
    const std::string params_line = "d=" + std::to_string(config.d) + " V=" + format_number(config.V) +
                                    " dV=" + format_number(config.d * config.V) + " decay=" + config.mf_model +
                                    " sign=" + config.sign_convention;
    {
        CsvWriter csv(dir / "meanfield.csv", {"mean-field stable fixed points per (Delta, Omega)", params_line},
                      {"Delta", "Omega", "stable_count", "n_ss_branch1", "n_ss_branch2"});
        for (const auto& c : cells) {
            const auto n = c.stable_densities();
            csv.row({format_number(c.Delta), format_number(c.Omega), std::to_string(c.stable_count), num_or_empty(n, 0),
                     num_or_empty(n, 1)});
        }
        result.files.push_back(csv.path());
    }
    {
        const auto cut_deltas = linspace(config.delta_min, config.delta_max, config.cut_points);
        const auto cut = scan_phase_diagram(cut_deltas, {config.cut_omega}, base, fpo, config.threads);
        CsvWriter csv(dir / "meanfield_cut.csv",
                      {"stationary densities along Omega = " + format_number(config.cut_omega), params_line,
                       "n_stable_low/high: stable branches, n_unstable: middle (unstable) solution"},
                      {"Delta", "stable_count", "n_stable_low", "n_stable_high", "n_unstable"});
        for (const auto& c : cut) {
            const auto n = c.stable_densities();
            std::vector<double> unstable;
            for (const auto& fp : c.fixed_points)
                if (!fp.stable) unstable.push_back(fp.state.n);
            csv.row({format_number(c.Delta), std::to_string(c.stable_count), num_or_empty(n, 0),
                     n.size() > 1 ? format_number(n.back()) : std::string{}, num_or_empty(unstable, 0)});
        }
        result.files.push_back(csv.path());
    }

    json critical = json::array();
    for (const auto& cp : locate_critical_points(cells, deltas.size(), omegas.size(), base))
        critical.push_back({{"Delta", cp.Delta}, {"Omega", cp.Omega}, {"n", cp.n}});
    json errors = json::array();
    for (const auto& c : cells)
        if (!c.error.empty()) errors.push_back({{"Delta", c.Delta}, {"Omega", c.Omega}, {"error", c.error}});
    {
        const fs::path path = dir / "critical_points.json";
        std::ofstream out(path);
        out << json{{"critical_points", critical}}.dump(2) << '\n';
        result.files.push_back(path);
    }
    result.manifest["bistable_components"] = bistable_components(cells, deltas.size(), omegas.size());
    result.manifest["cell_errors"] = errors;
    result.manifest["fixed_point_search"] = {{"seed_grid", fpo.seed_grid},
                                             {"polynomial_seeds", fpo.polynomial_seeds},
                                             {"residual_tol", fpo.residual_tol},
                                             {"dedup_tol", fpo.dedup_tol}};
    finish(result, dir, "meanfield", config, start);
    return result;
}

}  // namespace rydecay
