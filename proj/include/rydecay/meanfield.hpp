#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "rydecay/operators.hpp"

namespace rydecay {

/// Sign of the detuning term in the s_y equation. `as_printed` keeps
/// -Delta s_x; `oracle_verified` uses the sign that matches the exact
/// Lindbladian at translation-invariant product states (see mf_oracle_check).
enum class SignConvention { as_printed, oracle_verified };

const char* to_string(SignConvention c);
SignConvention sign_convention_from_string(const std::string& s);

struct MeanFieldParams {
    double Delta = 0.0;
    double Omega = 0.0;
    double gamma = 1.0;
    double V = 10.0;
    int d = 1;
    DecayModel model = DecayModel::collective;
    SignConvention sign = SignConvention::oracle_verified;
};

/// Site-averaged (n, <sigma^x>, <sigma^y>) under translation invariance.
struct MeanFieldState {
    double n = 0.0;
    double s_x = 0.0;
    double s_y = 0.0;

    Eigen::Vector3d vec() const { return {n, s_x, s_y}; }
    static MeanFieldState from(const Eigen::Vector3d& v) { return {v[0], v[1], v[2]}; }
    /// Soft check of n in [0,1] and |s| <= 1.
    bool in_bounds(double slack = 1e-9) const;
};

///   dn/dt   = Omega s_y - gamma n
///   ds_x/dt = -Delta s_y - G(n) s_x - 2dV n s_y
///   ds_y/dt = (+/-)Delta s_x - G(n) s_y + 2dV n s_x - Omega (4n - 2)
/// with G(n) = (gamma/2)(4dn + 1) for collective decay and gamma/2 for single-atom decay.
MeanFieldState mf_rhs(const MeanFieldState& state, const MeanFieldParams& params);
Eigen::Matrix3d mf_jacobian(const MeanFieldState& state, const MeanFieldParams& params);

struct OracleCheck {
    std::array<double, 3> exact{};      // d/dt of (<n>, <sigma^x>, <sigma^y>) from the Lindbladian
    std::array<double, 3> mean_field{};
    std::array<double, 3> deviation{};  // absolute
    double max_deviation() const;
};

/// Compares mf_rhs with the exact Lindbladian time derivative at a homogeneous
/// product state on an N-site periodic chain, where the factorisation is exact.
/// `state` must be a valid single-site Bloch state.
OracleCheck mf_oracle_check(int n_sites, const MeanFieldParams& params, const MeanFieldState& state);

/// Runs mf_oracle_check for both sign conventions and reports the one whose
/// deviation is below `tol` at every state, if any.
std::optional<SignConvention> determine_sign_convention(int n_sites, MeanFieldParams params,
                                                        const std::vector<MeanFieldState>& states,
                                                        double tol = 1e-9);

struct FixedPoint {
    MeanFieldState state;
    std::array<double, 3> eigen_real_parts{};
    bool stable = false;
    double residual = 0.0;
};

struct FixedPointOptions {
    int seed_grid = 10;           // per axis, over [0,1] x [-1,1] x [-1,1]
    bool polynomial_seeds = true;  // also seed from the exact reduction to a cubic in n
    double residual_tol = 1e-12;
    double dedup_tol = 1e-6;
    int max_iterations = 60;
};

/// Newton search from a seed grid; converged roots inside the physical box are
/// deduplicated (max norm) and classified by the Jacobian spectrum.
std::vector<FixedPoint> find_fixed_points(const MeanFieldParams& params, const FixedPointOptions& options = {});

/// Coefficients c0..c3 of the cubic in n whose physical roots are the fixed
/// points: gamma n (Dx Dy + G^2) - Omega^2 G (2 - 4n).
std::array<double, 4> fixed_point_cubic(const MeanFieldParams& params);

struct PhaseDiagramCell {
    double Delta = 0.0;
    double Omega = 0.0;
    std::vector<FixedPoint> fixed_points;
    int stable_count = 0;
    std::string error;

    std::vector<double> stable_densities() const;  // ascending
};

/// Cells in row-major order: Omega outer, Delta inner.
std::vector<PhaseDiagramCell> scan_phase_diagram(const std::vector<double>& delta_grid,
                                                 const std::vector<double>& omega_grid, const MeanFieldParams& base,
                                                 const FixedPointOptions& options = {}, int threads = 1);

/// Number of 8-connected components of stable_count == 2 cells.
int bistable_components(const std::vector<PhaseDiagramCell>& cells, std::size_t n_delta, std::size_t n_omega);

struct CriticalPoint {
    double Delta = 0.0;
    double Omega = 0.0;
    double n = 0.0;
    bool converged = false;
};

/// Cusp points of the bistable region: the cubic has a triple root. Seeded
/// from the extreme-Omega cells of each bistable component and refined by
/// Newton to |Delta|, |Omega| accuracy well below 1e-3.
std::vector<CriticalPoint> locate_critical_points(const std::vector<PhaseDiagramCell>& cells, std::size_t n_delta,
                                                  std::size_t n_omega, const MeanFieldParams& base);

struct MeanFieldTrajectory {
    std::vector<double> times;
    std::vector<MeanFieldState> states;
};

/// RK4; aborts when any component exceeds 10 in magnitude.
MeanFieldTrajectory integrate_mf(const MeanFieldState& state0, const MeanFieldParams& params, double t_final,
                                 double dt, int record_every = 1);

std::vector<double> linspace(double lo, double hi, int count);

}  // namespace rydecay
