#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "rydecay/master_equation.hpp"
#include "rydecay/operators.hpp"

namespace rydecay {

using StateVector = Eigen::VectorXcd;

StateVector basis_state(Eigen::Index dim, std::uint64_t state);

/// H - (i/2) sum_j L_j^dagger L_j
SparseOperator effective_hamiltonian(const SparseOperator& hamiltonian, const std::vector<JumpOperator>& jumps);

/// ||L_j psi||^2 normalised to sum to one. All zeros when no channel is open.
std::vector<double> channel_probabilities(const StateVector& psi, const std::vector<JumpOperator>& jumps);

struct JumpRecord {
    double t;
    int site;
    int xi;  // -1 for single-atom channels
};

struct TrajectoryOptions {
    double dt = 1e-3;
    double jump_time_tolerance = 1e-10;
    bool keep_post_jump_states = false;
};

struct NamedObservable {
    std::string label;
    SparseOperator op;
};

struct TrajectoryResult {
    std::vector<double> times;
    std::vector<std::vector<double>> values;  // [observable][time], normalised expectation values
    std::vector<JumpRecord> jumps;
    std::vector<StateVector> post_jump_states;  // only with keep_post_jump_states
};

/// Waiting-time quantum-jump unravelling. The unnormalised state follows
/// H_eff with RK4 until its squared norm reaches a uniform threshold; the
/// crossing is located by bisection and a channel is drawn with weight
/// ||L_j psi||^2.
TrajectoryResult evolve_trajectory(const StateVector& psi0, const SparseOperator& heff,
                                   const std::vector<JumpOperator>& jumps, const std::vector<double>& sample_times,
                                   const std::vector<NamedObservable>& observables, std::uint64_t seed,
                                   const TrajectoryOptions& options = {});

/// Seed of trajectory `index` in an ensemble; a SplitMix64 counter stream so
/// any trajectory can be generated independently of the others.
std::uint64_t child_seed(std::uint64_t master_seed, std::uint64_t index);

struct EnsembleOptions {
    int n_traj = 300;
    std::uint64_t master_seed = 0;
    int threads = 1;
    TrajectoryOptions trajectory;
};

struct TrajectoryEnsembleResult {
    std::vector<double> times;
    std::vector<std::string> labels;
    std::vector<std::vector<double>> mean;    // [observable][time]
    std::vector<std::vector<double>> std_error;  // [observable][time]
    int n_traj = 0;
    std::uint64_t master_seed = 0;
    std::uint64_t total_jumps = 0;

    bool operator==(const TrajectoryEnsembleResult&) const = default;
};

/// Runs `n_traj` trajectories and merges them in index order, so the result is
/// independent of thread count and scheduling.
TrajectoryEnsembleResult run_ensemble(const OpenSystem& system, const StateVector& psi0,
                                      const std::vector<double>& sample_times,
                                      const std::vector<NamedObservable>& observables, const EnsembleOptions& options);

/// (1/N) sum_k n_k as a diagonal operator.
SparseOperator density_observable(const LatticeSpec& lattice);

struct SteadyStateEstimate {
    double mean = 0.0;
    double std_error = 0.0;
};

/// Window-averaged excitation density from the all-down state, one window
/// average per trajectory; the error bar is the across-trajectory standard error.
SteadyStateEstimate trajectory_steady_state(const OpenSystem& system, const EnsembleOptions& options);

}  // namespace rydecay
