#include "rydecay/trajectories.hpp"

#include "rydecay/parallel.hpp"

#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>

namespace rydecay {

StateVector basis_state(Eigen::Index dim, std::uint64_t state) {
    if (static_cast<Eigen::Index>(state) >= dim) throw std::out_of_range("basis state outside dimension");
    StateVector psi = StateVector::Zero(dim);
    psi(static_cast<Eigen::Index>(state)) = 1.0;
    return psi;
}

SparseOperator effective_hamiltonian(const SparseOperator& hamiltonian, const std::vector<JumpOperator>& jumps) {
    const auto rate = jump_rate_operator(jumps, hamiltonian.dim());
    return hamiltonian - cplx{0.0, 0.5} * rate;
}

std::vector<double> channel_probabilities(const StateVector& psi, const std::vector<JumpOperator>& jumps) {
    std::vector<double> w(jumps.size());
    for (std::size_t j = 0; j < jumps.size(); ++j) w[j] = (jumps[j].op.matrix() * psi).squaredNorm();
    const double total = std::accumulate(w.begin(), w.end(), 0.0);
    if (total > 0.0)
        for (double& x : w) x /= total;
    return w;
}

namespace {

class NonUnitaryStepper {
public:
    explicit NonUnitaryStepper(const SparseOperator& heff) : minus_i_heff_(cplx{0.0, -1.0} * heff.matrix()) {}

    void step(const StateVector& psi, double h, StateVector& out) {
        k1_.noalias() = minus_i_heff_ * psi;
        tmp_ = psi + (0.5 * h) * k1_;
        k2_.noalias() = minus_i_heff_ * tmp_;
        tmp_ = psi + (0.5 * h) * k2_;
        k3_.noalias() = minus_i_heff_ * tmp_;
        tmp_ = psi + h * k3_;
        k4_.noalias() = minus_i_heff_ * tmp_;
        out = psi + (h / 6.0) * (k1_ + 2.0 * k2_ + 2.0 * k3_ + k4_);
    }

private:
    SparseMatrix minus_i_heff_;
    StateVector k1_, k2_, k3_, k4_, tmp_;
};

double normalised_expectation(const StateVector& psi, const SparseOperator& op) {
    const double norm2 = psi.squaredNorm();
    return psi.dot(op.matrix() * psi).real() / norm2;
}

}  // namespace

TrajectoryResult evolve_trajectory(const StateVector& psi0, const SparseOperator& heff,
                                   const std::vector<JumpOperator>& jumps, const std::vector<double>& sample_times,
                                   const std::vector<NamedObservable>& observables, std::uint64_t seed,
                                   const TrajectoryOptions& options) {
    if (!(options.dt > 0.0)) throw std::invalid_argument("trajectory step dt must be positive");
    if (psi0.size() != heff.dim()) throw std::invalid_argument("initial state dimension mismatch");
    if (std::abs(psi0.squaredNorm() - 1.0) > 1e-10) throw std::invalid_argument("initial state must be normalised");
    for (std::size_t i = 1; i < sample_times.size(); ++i)
        if (sample_times[i] < sample_times[i - 1]) throw std::invalid_argument("sample times must be sorted");

    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> uniform(0.0, 1.0);
    // Threshold in (0, 1]; a negative threshold marks the no-more-jumps state.
    auto draw_threshold = [&] { return 1.0 - uniform(rng); };

    TrajectoryResult result;
    result.times = sample_times;
    result.values.assign(observables.size(), std::vector<double>(sample_times.size(), 0.0));

    NonUnitaryStepper stepper(heff);
    StateVector psi = psi0;
    StateVector trial(psi.size());
    double t = 0.0;
    double threshold = draw_threshold();
    std::size_t next_sample = 0;

    auto record_samples = [&] {
        while (next_sample < sample_times.size() && sample_times[next_sample] <= t + 1e-14) {
            for (std::size_t o = 0; o < observables.size(); ++o)
                result.values[o][next_sample] = normalised_expectation(psi, observables[o].op);
            ++next_sample;
        }
    };
    record_samples();

    while (next_sample < sample_times.size()) {
        const double h = std::min(options.dt, sample_times[next_sample] - t);
        stepper.step(psi, h, trial);
        if (trial.squaredNorm() > threshold) {
            psi.swap(trial);
            t += h;
            record_samples();
            continue;
        }

        // The norm crossed the threshold inside this step: bisect the crossing time.
        double lo = 0.0, hi = h;
        while (hi - lo > options.jump_time_tolerance) {
            const double mid = 0.5 * (lo + hi);
            stepper.step(psi, mid, trial);
            if (trial.squaredNorm() > threshold)
                lo = mid;
            else
                hi = mid;
        }
        stepper.step(psi, hi, trial);
        psi.swap(trial);
        t += hi;

        std::vector<double> weights(jumps.size());
        double total = 0.0;
        for (std::size_t j = 0; j < jumps.size(); ++j) {
            weights[j] = (jumps[j].op.matrix() * psi).squaredNorm();
            total += weights[j];
        }
        if (!(total > 0.0)) {
            // Only reachable when psi has no decaying component: no further jumps.
            threshold = -1.0;
            psi.normalize();
            record_samples();
            continue;
        }
        const double r = uniform(rng) * total;
        std::size_t chosen = jumps.size();
        double cumulative = 0.0;
        for (std::size_t j = 0; j < jumps.size(); ++j) {
            cumulative += weights[j];
            if (r < cumulative) {
                chosen = j;
                break;
            }
        }
        if (chosen == jumps.size())  // r rounded past the running sum: take the last open channel
            for (std::size_t j = jumps.size(); j-- > 0;)
                if (weights[j] > 0.0) {
                    chosen = j;
                    break;
                }

        psi = jumps[chosen].op.matrix() * psi;
        psi.normalize();
        result.jumps.push_back({t, jumps[chosen].site, jumps[chosen].xi});
        if (options.keep_post_jump_states) result.post_jump_states.push_back(psi);
        threshold = draw_threshold();
        record_samples();
    }
    return result;
}

std::uint64_t child_seed(std::uint64_t master_seed, std::uint64_t index) {
    std::uint64_t z = master_seed + (index + 1) * 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}


TrajectoryEnsembleResult run_ensemble(const OpenSystem& system, const StateVector& psi0,
                                      const std::vector<double>& sample_times,
                                      const std::vector<NamedObservable>& observables, const EnsembleOptions& options) {
    if (options.n_traj < 1) throw std::invalid_argument("ensemble needs n_traj >= 1");
    const auto heff = effective_hamiltonian(system.hamiltonian, system.jumps);
    std::vector<TrajectoryResult> runs(static_cast<std::size_t>(options.n_traj));
    parallel_for(options.n_traj, options.threads, [&](int i) {
        runs[static_cast<std::size_t>(i)] =
            evolve_trajectory(psi0, heff, system.jumps, sample_times, observables,
                              child_seed(options.master_seed, static_cast<std::uint64_t>(i)), options.trajectory);
    });

    TrajectoryEnsembleResult out;
    out.times = sample_times;
    out.n_traj = options.n_traj;
    out.master_seed = options.master_seed;
    for (const auto& o : observables) out.labels.push_back(o.label);
    const std::size_t n_obs = observables.size(), n_t = sample_times.size();
    out.mean.assign(n_obs, std::vector<double>(n_t, 0.0));
    out.std_error.assign(n_obs, std::vector<double>(n_t, 0.0));
    const double n = options.n_traj;
    for (const auto& run : runs) {
        out.total_jumps += run.jumps.size();
        for (std::size_t o = 0; o < n_obs; ++o)
            for (std::size_t k = 0; k < n_t; ++k) out.mean[o][k] += run.values[o][k] / n;
    }
    if (options.n_traj > 1)
        for (std::size_t o = 0; o < n_obs; ++o)
            for (std::size_t k = 0; k < n_t; ++k) {
                double ss = 0.0;
                for (const auto& run : runs) {
                    const double d = run.values[o][k] - out.mean[o][k];
                    ss += d * d;
                }
                out.std_error[o][k] = std::sqrt(ss / (n - 1.0) / n);
            }
    return out;
}

SparseOperator density_observable(const LatticeSpec& lattice) {
    const int n = lattice.site_count();
    const Eigen::Index dim = Eigen::Index{1} << n;
    std::vector<Triplet> t;
    for (Eigen::Index s = 1; s < dim; ++s)
        t.emplace_back(s, s, static_cast<double>(excited_count(static_cast<std::uint64_t>(s))) / n);
    return SparseOperator::from_triplets(dim, t, true);
}

SteadyStateEstimate trajectory_steady_state(const OpenSystem& system, const EnsembleOptions& options) {
    if (options.n_traj < 1) throw std::invalid_argument("ensemble needs n_traj >= 1");
    const auto heff = effective_hamiltonian(system.hamiltonian, system.jumps);
    const auto window = steady_state_window_times(system.params.gamma);
    const std::vector<NamedObservable> obs{{"n", density_observable(system.lattice)}};
    const StateVector psi0 = basis_state(system.dim(), 0);
    std::vector<double> per_traj(static_cast<std::size_t>(options.n_traj));
    parallel_for(options.n_traj, options.threads, [&](int i) {
        const auto run = evolve_trajectory(psi0, heff, system.jumps, window, obs,
                                           child_seed(options.master_seed, static_cast<std::uint64_t>(i)),
                                           options.trajectory);
        per_traj[static_cast<std::size_t>(i)] =
            steady_state_window_average(ObservableSeries{run.times, run.values[0], "n"}, system.params.gamma);
    });
    SteadyStateEstimate est;
    const double n = options.n_traj;
    for (double v : per_traj) est.mean += v / n;
    if (options.n_traj > 1) {
        double ss = 0.0;
        for (double v : per_traj) ss += (v - est.mean) * (v - est.mean);
        est.std_error = std::sqrt(ss / (n - 1.0) / n);
    }
    return est;
}

}  // namespace rydecay
