#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"

#include "rydecay/lattice.hpp"
#include "rydecay/meanfield.hpp"
#include "rydecay/operators.hpp"

namespace rydecay {

/// Parameters of every CLI workflow. All physical quantities are in units of
/// the single-atom decay rate (times in 1/gamma, frequencies in gamma).
struct RunConfig {
    // lattice (steady-state, trajectories, coherence cross-check)
    int dimension = 1;
    std::vector<int> extents{4};
    std::string boundary = "periodic";

    // model
    double gamma = 1.0;
    double V = 10.0;
    double omega_a = 0.0;
    std::vector<std::string> models{"single", "collective"};

    // coherence
    int d = 1;
    double t_max = 2.0;
    int t_points = 201;
    int cross_check_sites = 0;  // 0 disables the master-equation cross-check

    // detuning / Rabi grids
    double delta_min = -30.0;
    double delta_max = 10.0;
    int delta_points = 41;
    double omega_min = 0.5;
    double omega_max = 10.0;
    int omega_points = 21;

    // integrators
    double dt = 1e-3;

    // trajectories
    int n_traj = 300;
    std::uint64_t seed = 0;

    // mean field
    std::string mf_model = "collective";
    std::string sign_convention = "oracle_verified";
    double cut_omega = 2.5;
    int cut_points = 401;
    int seed_grid = 10;

    // execution
    int threads = 1;
    std::string out = "out";

    void validate() const;
    LatticeSpec lattice() const;
    ModelParams model_params(double Delta = 0.0, double Omega = 0.0) const;
    MeanFieldParams meanfield_params(double Delta = 0.0, double Omega = 0.0) const;
    std::vector<double> delta_grid() const;
    std::vector<double> omega_grid() const;
    std::vector<DecayModel> decay_models() const;

    bool operator==(const RunConfig&) const = default;
};

void to_json(nlohmann::json& j, const RunConfig& c);
/// Unknown keys are rejected so that typos do not silently fall back to defaults.
void from_json(const nlohmann::json& j, RunConfig& c);

/// Applies the keys of `overrides` on top of `base`.
RunConfig merge_config(const RunConfig& base, const nlohmann::json& overrides);

/// Reads a flat JSON object, or a run manifest (whose "config" member is used).
RunConfig load_config(const std::string& path, const RunConfig& base = {});

/// Parses `key=value` where the value is JSON (bare words are taken as strings).
nlohmann::json parse_assignment(const std::string& assignment);

}  // namespace rydecay
