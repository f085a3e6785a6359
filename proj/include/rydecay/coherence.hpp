#pragma once

#include <complex>
#include <string>
#include <vector>

#include "rydecay/lattice.hpp"
#include "rydecay/master_equation.hpp"
#include "rydecay/operators.hpp"

namespace rydecay {

struct CoherenceParams {
    double omega_a = 0.0;
    double V = 10.0;
    double gamma = 1.0;
};

/// Neighborhood-resolved coherence X_xi, xi = 0..2d, of a d-dimensional
/// hypercubic lattice. The site-averaged coherence is the sum of the modes.
struct CoherenceState {
    int d = 1;
    std::vector<cplx> modes;
    CoherenceParams params;
    DecayModel model = DecayModel::collective;

    cplx total() const;
    /// |sum_xi X_xi|, summed before taking the modulus.
    double modulus() const { return std::abs(total()); }
};

/// Modes of the uniform superposition product state: 2^(-2d-1) binom(2d, xi).
CoherenceState initial_coherence(int d, const CoherenceParams& params = {},
                                 DecayModel model = DecayModel::collective);

/// Right-hand side of the mode equations for the state's decay model.
std::vector<cplx> coherence_rhs(const CoherenceState& state);

/// Each mode decays independently: X_xi(t) = X_xi(0) exp[-(i omega_a + gamma/2 + xi (gamma + i V)) t].
CoherenceState evolve_collective(const CoherenceState& state, double t);

/// Exact solution of the single-atom cascade, where mode xi+1 feeds mode xi at
/// rate gamma (xi+1). With kappa = gamma + iV the cascade resums to
///   X_xi(t) = e^{-(i omega_a + gamma/2) t} sum_{j>=xi} X_j(0) C(j,xi) q^{j-xi} p^xi,
///   p = e^{-kappa t},  q = gamma (1 - e^{-kappa t}) / kappa,
/// and q -> gamma t in the kappa -> 0 limit.
CoherenceState evolve_single(const CoherenceState& state, double t);

/// Dispatches on state.model.
CoherenceState evolve(const CoherenceState& state, double t);

/// |X(t)| ~ c0 + c1 t + c2 t^2
struct ShortTimeCoefficients {
    double c0, c1, c2;
};

ShortTimeCoefficients short_time_coefficients(DecayModel model, int d, double gamma, double V);

struct CoherenceCrossCheck {
    bool skipped = false;
    std::string diagnostic;
    double max_deviation = 0.0;
    /// X_xi(t) from the master equation, [time][xi].
    std::vector<std::vector<cplx>> master_equation_modes;
};

/// Integrates the undriven master equation from the uniform superposition and
/// compares X_xi(t) = (1/N) sum_k <P_k^xi sigma^-_k> against the closed forms.
/// Lattices with unequal coordination are skipped with a diagnostic.
CoherenceCrossCheck verify_against_master_equation(const LatticeSpec& lattice, const CoherenceParams& params,
                                                   DecayModel model, const std::vector<double>& t_grid,
                                                   const IntegratorOptions& options = {});

}  // namespace rydecay
