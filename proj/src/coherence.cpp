#include "rydecay/coherence.hpp"

#include <cmath>
#include <stdexcept>

namespace rydecay {

namespace {

double binomial(int n, int k) {
    if (k < 0 || k > n) return 0.0;
    double r = 1.0;
    for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return r;
}

void check_state(const CoherenceState& s) {
    if (s.d < 1) throw std::invalid_argument("coherence dimension d must be >= 1");
    if (static_cast<int>(s.modes.size()) != 2 * s.d + 1)
        throw std::invalid_argument("coherence state must hold 2d+1 modes");
}

// (1 - e^{-z}) / z times t, for z = kappa t; the series branch covers kappa -> 0.
cplx relaxed_time(cplx kappa, double t) {
    const cplx z = kappa * t;
    if (std::abs(z) < 1e-3) return t * (1.0 - z / 2.0 + z * z / 6.0 - z * z * z / 24.0);
    return (1.0 - std::exp(-z)) / kappa;
}

}  // namespace

cplx CoherenceState::total() const {
    cplx acc{};
    for (const auto& m : modes) acc += m;
    return acc;
}

CoherenceState initial_coherence(int d, const CoherenceParams& params, DecayModel model) {
    if (d < 1) throw std::invalid_argument("coherence dimension d must be >= 1");
    CoherenceState s{d, {}, params, model};
    s.modes.resize(static_cast<std::size_t>(2 * d + 1));
    const double scale = std::ldexp(1.0, -2 * d - 1);
    for (int xi = 0; xi <= 2 * d; ++xi) s.modes[static_cast<std::size_t>(xi)] = scale * binomial(2 * d, xi);
    return s;
}

std::vector<cplx> coherence_rhs(const CoherenceState& s) {
    check_state(s);
    const auto& p = s.params;
    const cplx base{p.gamma / 2.0, p.omega_a};
    const cplx kappa{p.gamma, p.V};
    const int top = 2 * s.d;
    std::vector<cplx> out(s.modes.size());
    for (int xi = 0; xi <= top; ++xi) {
        const auto i = static_cast<std::size_t>(xi);
        out[i] = -(base + static_cast<double>(xi) * kappa) * s.modes[i];
        if (s.model == DecayModel::single && xi < top) out[i] += p.gamma * (xi + 1) * s.modes[i + 1];
    }
    return out;
}

CoherenceState evolve_collective(const CoherenceState& s, double t) {
    check_state(s);
    if (s.model != DecayModel::collective) throw std::invalid_argument("evolve_collective needs a collective state");
    const auto& p = s.params;
    CoherenceState out = s;
    for (int xi = 0; xi <= 2 * s.d; ++xi) {
        const cplx rate{p.gamma / 2.0 + xi * p.gamma, p.omega_a + xi * p.V};
        out.modes[static_cast<std::size_t>(xi)] *= std::exp(-rate * t);
    }
    return out;
}

CoherenceState evolve_single(const CoherenceState& s, double t) {
    check_state(s);
    if (s.model != DecayModel::single) throw std::invalid_argument("evolve_single needs a single-atom state");
    const auto& p = s.params;
    const cplx kappa{p.gamma, p.V};
    const cplx phase = std::exp(-cplx{p.gamma / 2.0, p.omega_a} * t);
    const cplx survive = std::exp(-kappa * t);
    const cplx feed = p.gamma * relaxed_time(kappa, t);
    const int top = 2 * s.d;

    CoherenceState out = s;
    for (int xi = 0; xi <= top; ++xi) {
        cplx acc{};
        cplx feed_pow{1.0};
        for (int j = xi; j <= top; ++j) {
            acc += s.modes[static_cast<std::size_t>(j)] * binomial(j, xi) * feed_pow;
            feed_pow *= feed;
        }
        out.modes[static_cast<std::size_t>(xi)] = phase * std::pow(survive, xi) * acc;
    }
    return out;
}

CoherenceState evolve(const CoherenceState& state, double t) {
    return state.model == DecayModel::single ? evolve_single(state, t) : evolve_collective(state, t);
}

ShortTimeCoefficients short_time_coefficients(DecayModel model, int d, double gamma, double V) {
    if (d < 1) throw std::invalid_argument("coherence dimension d must be >= 1");
    const double z = 2.0 * d;  // coordination number
    if (model == DecayModel::single) return {0.5, -gamma / 4.0, (gamma * gamma - z * V * V) / 16.0};
    return {0.5, -(z + 1.0) * gamma / 4.0, (((z + 1.0) * (z + 1.0) + z) * gamma * gamma - z * V * V) / 16.0};
}

CoherenceCrossCheck verify_against_master_equation(const LatticeSpec& lattice, const CoherenceParams& params,
                                                   DecayModel model, const std::vector<double>& t_grid,
                                                   const IntegratorOptions& options) {
    CoherenceCrossCheck check;
    const auto table = neighbor_table(lattice);
    const int d = lattice.dimension();
    const int n = lattice.site_count();
    for (int k = 0; k < n; ++k)
        if (static_cast<int>(table.coordination(k)) != 2 * d) {
            check.skipped = true;
            check.diagnostic = "translation-invariance violated: site " + std::to_string(k) + " has " +
                               std::to_string(table.coordination(k)) + " neighbors, expected " +
                               std::to_string(2 * d);
            return check;
        }
    if (n > kMaxExactSites) throw std::invalid_argument("lattice too large for exact integration");

    ModelParams mp;
    mp.omega_a = params.omega_a;
    mp.V = params.V;
    mp.gamma = params.gamma;
    const auto system = build_open_system(lattice, mp, model, HamiltonianKind::atomic);

    // Observables P_k^xi sigma^-_k, summed over k for every xi.
    std::vector<SparseOperator> mode_ops;
    for (int xi = 0; xi <= 2 * d; ++xi) {
        SparseOperator acc = SparseOperator::zero(system.dim());
        for (int k = 0; k < n; ++k)
            acc = acc + neighborhood_projector(lattice, table, k, xi) * site_operator(lattice, k, SiteOp::sigma_minus);
        mode_ops.push_back(acc);
    }

    Eigen::Matrix2cd plus;
    plus << 0.5, 0.5, 0.5, 0.5;
    const auto initial = initial_coherence(d, params, model);
    integrate_exact(product_density(n, plus), Lindbladian(system), t_grid,
                    [&](double t, const DensityMatrix& rho) {
                        const auto analytic = evolve(initial, t);
                        std::vector<cplx> modes;
                        for (int xi = 0; xi <= 2 * d; ++xi) {
                            const cplx x = trace_product(rho, mode_ops[static_cast<std::size_t>(xi)]) /
                                           static_cast<double>(n);
                            modes.push_back(x);
                            check.max_deviation = std::max(
                                check.max_deviation, std::abs(x - analytic.modes[static_cast<std::size_t>(xi)]));
                        }
                        check.master_equation_modes.push_back(std::move(modes));
                    },
                    options);
    return check;
}

}  // namespace rydecay
