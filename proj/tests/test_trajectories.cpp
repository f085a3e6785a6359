#include "doctest.h"

#include <cmath>
#include <numeric>

#include "rydecay/trajectories.hpp"

using namespace rydecay;

namespace {

ModelParams driven(double delta, double omega) {
    ModelParams p;
    p.Delta = delta;
    p.Omega = omega;
    return p;
}

std::vector<double> grid(double step, int count) {
    std::vector<double> t;
    for (int i = 1; i <= count; ++i) t.push_back(step * i);
    return t;
}

}  // namespace

TEST_CASE("effective Hamiltonian") {
    const auto one = build_lattice(1, {1}, Boundary::open);
    ModelParams p = driven(0.3, 0.8);
    const auto sys = build_open_system(one, p, DecayModel::single);
    const auto heff = effective_hamiltonian(sys.hamiltonian, sys.jumps);
    const auto ref = sys.hamiltonian - cplx{0.0, 0.5} * site_operator(one, 0, SiteOp::number);
    CHECK(max_abs_diff(heff, ref) < 1e-15);

    const auto ring = periodic_chain(4);
    const auto s = build_open_system(ring, p, DecayModel::single);
    const auto c = build_open_system(ring, p, DecayModel::collective);
    CHECK(max_abs_diff(effective_hamiltonian(s.hamiltonian, s.jumps),
                       effective_hamiltonian(c.hamiltonian, c.jumps)) < 1e-15);

    p.gamma = 0.0;
    const auto lossless = build_open_system(ring, p, DecayModel::collective);
    CHECK(effective_hamiltonian(lossless.hamiltonian, lossless.jumps) == lossless.hamiltonian);
}

TEST_CASE("single excited atom jumps exactly once, waiting times exponential") {
    const auto one = build_lattice(1, {1}, Boundary::open);
    const auto sys = build_open_system(one, ModelParams{}, DecayModel::single);
    const auto heff = effective_hamiltonian(sys.hamiltonian, sys.jumps);
    const int n = 2000;
    double sum = 0.0;
    for (int i = 0; i < n; ++i) {
        const auto r = evolve_trajectory(basis_state(2, 1), heff, sys.jumps, {40.0}, {}, child_seed(99, i));
        REQUIRE(r.jumps.size() == 1);
        sum += r.jumps[0].t;
    }
    // mean 1, standard deviation of the mean 1/sqrt(n)
    CHECK(std::abs(sum / n - 1.0) < 4.0 / std::sqrt(n));
}

TEST_CASE("vacuum never jumps") {
    const auto ring = periodic_chain(4);
    const auto sys = build_open_system(ring, ModelParams{}, DecayModel::collective);
    const auto heff = effective_hamiltonian(sys.hamiltonian, sys.jumps);
    const auto r = evolve_trajectory(basis_state(16, 0), heff, sys.jumps, grid(0.5, 10),
                                     {{"n", density_observable(ring)}}, 1);
    CHECK(r.jumps.empty());
    for (double v : r.values[0]) CHECK(v == 0.0);
}

TEST_CASE("channel probabilities sum to one") {
    const auto ring = periodic_chain(4);
    const auto sys = build_open_system(ring, ModelParams{}, DecayModel::collective);
    StateVector psi = StateVector::Constant(16, cplx{0.25, 0.0});
    const auto p = channel_probabilities(psi, sys.jumps);
    CHECK(std::accumulate(p.begin(), p.end(), 0.0) == doctest::Approx(1.0).epsilon(1e-14));
    const auto closed = channel_probabilities(basis_state(16, 0), sys.jumps);
    CHECK(std::accumulate(closed.begin(), closed.end(), 0.0) == 0.0);
}

TEST_CASE("collective post-jump states carry the recorded neighborhood") {
    const auto ring = periodic_chain(4);
    const auto table = neighbor_table(ring);
    const auto sys = build_open_system(ring, driven(-4.0, 2.0), DecayModel::collective);
    const auto heff = effective_hamiltonian(sys.hamiltonian, sys.jumps);
    TrajectoryOptions opt;
    opt.keep_post_jump_states = true;
    int checked = 0;
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const auto r = evolve_trajectory(basis_state(16, 0), heff, sys.jumps, {3.0}, {}, seed, opt);
        REQUIRE(r.post_jump_states.size() == r.jumps.size());
        for (std::size_t j = 0; j < r.jumps.size(); ++j) {
            CHECK(std::abs(r.post_jump_states[j].norm() - 1.0) < 1e-10);
            for (Eigen::Index b = 0; b < 16; ++b) {
                if (std::abs(r.post_jump_states[j][b]) < 1e-14) continue;
                const auto state = static_cast<std::uint64_t>(b);
                CHECK(excited_neighbor_count(state, 4, table.neighbors[r.jumps[j].site]) == r.jumps[j].xi);
                CHECK_FALSE(is_excited(state, 4, r.jumps[j].site));
                ++checked;
            }
        }
    }
    CHECK(checked > 0);
}

TEST_CASE("ensemble bookkeeping") {
    const auto ring = periodic_chain(4);
    const auto sys = build_open_system(ring, driven(-6.0, 2.5), DecayModel::single);
    const std::vector<NamedObservable> obs{{"n", density_observable(ring)}};
    const auto times = grid(0.25, 8);

    EnsembleOptions one;
    one.n_traj = 1;
    one.master_seed = 17;
    const auto e1 = run_ensemble(sys, basis_state(16, 0), times, obs, one);
    const auto heff = effective_hamiltonian(sys.hamiltonian, sys.jumps);
    const auto t1 = evolve_trajectory(basis_state(16, 0), heff, sys.jumps, times, obs, child_seed(17, 0));
    CHECK(e1.mean[0] == t1.values[0]);
    for (double s : e1.std_error[0]) CHECK(s == 0.0);

    EnsembleOptions many;
    many.n_traj = 12;
    many.master_seed = 5;
    const auto a = run_ensemble(sys, basis_state(16, 0), times, obs, many);
    many.threads = 3;
    const auto b = run_ensemble(sys, basis_state(16, 0), times, obs, many);
    CHECK(a == b);
    for (double s : a.std_error[0]) CHECK(s >= 0.0);
    CHECK(a.n_traj == 12);
    CHECK(a.master_seed == 5);

    CHECK(child_seed(1, 0) != child_seed(1, 1));
    CHECK(child_seed(1, 0) != child_seed(2, 0));
}

TEST_CASE("ensemble mean tracks the master equation") {
    const auto ring = periodic_chain(4);
    const auto times = grid(0.25, 12);
    for (auto model : {DecayModel::single, DecayModel::collective}) {
        const auto sys = build_open_system(ring, driven(-6.0, 2.5), model);
        std::vector<double> exact;
        integrate_exact(basis_density(16, 0), Lindbladian(sys), times,
                        [&](double, const DensityMatrix& rho) { exact.push_back(excitation_density(rho, ring)); });
        EnsembleOptions opt;
        opt.n_traj = 200;
        opt.master_seed = 123;
        const auto e = run_ensemble(sys, basis_state(16, 0), times, {{"n", density_observable(ring)}}, opt);
        for (std::size_t i = 0; i < times.size(); ++i)
            CHECK(std::abs(e.mean[0][i] - exact[i]) <= 4.0 * e.std_error[0][i] + 1e-12);
    }
}
