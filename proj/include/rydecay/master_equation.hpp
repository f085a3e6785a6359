#pragma once

#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "rydecay/lattice.hpp"
#include "rydecay/operators.hpp"

namespace rydecay {

using DensityMatrix = Eigen::MatrixXcd;

struct DensityDiagnostics {
    double trace_error = 0.0;        // |tr rho - 1|
    double hermiticity_error = 0.0;  // max |rho - rho^dagger|
    double min_diagonal = 0.0;
};

DensityDiagnostics diagnose(const DensityMatrix& rho);
/// Throws if trace, Hermiticity or the diagonal positivity spot-check fail at `tol`.
void validate_density_matrix(const DensityMatrix& rho, double tol = 1e-10);

DensityMatrix basis_density(Eigen::Index dim, std::uint64_t state);
DensityMatrix pure_density(const Eigen::VectorXcd& psi);
/// Tensor power of a single-site 2x2 density matrix given in the (|down>, |up>) basis.
DensityMatrix product_density(int n_sites, const Eigen::Matrix2cd& site_rho);

enum class HamiltonianKind { atomic, driven };

/// Hamiltonian and jump operators for one (lattice, params, model) choice. Built
/// once and shared read-only afterwards.
struct OpenSystem {
    LatticeSpec lattice;
    NeighborTable table;
    ModelParams params;
    DecayModel model;
    SparseOperator hamiltonian;
    std::vector<JumpOperator> jumps;

    int site_count() const { return lattice.site_count(); }
    Eigen::Index dim() const { return hamiltonian.dim(); }
};

OpenSystem build_open_system(const LatticeSpec& lattice, const ModelParams& params, DecayModel model,
                             HamiltonianKind kind = HamiltonianKind::driven);

/// Lindblad generator applied as operator products:
///   L[rho] = -i[H, rho] + sum_j (L_j rho L_j^dagger - 1/2 {L_j^dagger L_j, rho}).
/// Jump operators with at most one entry per row and column (every jump built
/// by this library) take a direct index path; others fall back to sparse products.
class Lindbladian {
public:
    Lindbladian(const SparseOperator& hamiltonian, const std::vector<JumpOperator>& jumps);
    explicit Lindbladian(const OpenSystem& system) : Lindbladian(system.hamiltonian, system.jumps) {}

    Eigen::Index dim() const { return dim_; }

    /// out = L[rho]. `out` must not alias `rho`.
    void apply(const DensityMatrix& rho, DensityMatrix& out) const;
    DensityMatrix operator()(const DensityMatrix& rho) const;

private:
    struct MonomialChannel {
        std::vector<Eigen::Index> source;
        std::vector<Eigen::Index> target;
        std::vector<cplx> amplitude;
    };

    Eigen::Index dim_;
    SparseMatrix minus_i_heff_;  // -i (H - i/2 sum L^dagger L)
    std::vector<MonomialChannel> monomial_;
    std::vector<SparseMatrix> general_;
};

DensityMatrix lindblad_rhs(const DensityMatrix& rho, const SparseOperator& hamiltonian,
                           const std::vector<JumpOperator>& jumps);

struct IntegratorOptions {
    double dt = 1e-3;
    double renormalize_threshold = 1e-12;
    double drift_alarm = 1e-6;
    int max_halvings = 6;
};

struct IntegrationReport {
    double dt_used = 0.0;
    double max_trace_drift = 0.0;
    int renormalizations = 0;
    int halvings = 0;
};

using SampleObserver = std::function<void(double t, const DensityMatrix& rho)>;

/// Fixed-step RK4 from t = 0. The observer is called at each requested sample
/// time (sorted, >= 0); steps are shortened to land on sample times exactly.
IntegrationReport integrate_exact(const DensityMatrix& rho0, const Lindbladian& generator,
                                  const std::vector<double>& sample_times, const SampleObserver& observer,
                                  const IntegratorOptions& options = {});

struct Snapshot {
    double t;
    DensityMatrix rho;
};

std::vector<Snapshot> integrate_exact(const DensityMatrix& rho0, const Lindbladian& generator,
                                      const std::vector<double>& sample_times,
                                      const IntegratorOptions& options = {});

inline constexpr int kMaxExactSites = 10;

/// tr(op rho)
cplx trace_product(const DensityMatrix& rho, const SparseOperator& op);
/// Real part of tr(op rho), for Hermitian observables.
double expectation(const DensityMatrix& rho, const SparseOperator& op);
/// (1/N) sum_k <n_k>
double excitation_density(const DensityMatrix& rho, const LatticeSpec& lattice);

struct ObservableSeries {
    std::vector<double> times;
    std::vector<double> values;
    std::string label;

    void validate() const;
    /// Linear interpolation; t must lie inside [times.front(), times.back()].
    double at(double t) const;
};

inline constexpr double kWindowStart = 4.75;
inline constexpr double kWindowEnd = 5.00;
inline constexpr int kWindowSamples = 100;

/// The 100 linearly spaced sample times of the stationary window, endpoints included.
std::vector<double> steady_state_window_times(double gamma = 1.0);
double steady_state_window_average(const ObservableSeries& series, double gamma = 1.0);
/// (n_c - n_s) / n_s
double relative_difference(double n_c, double n_s);

/// Window-averaged excitation density starting from the all-down state.
double exact_steady_state_density(const OpenSystem& system, const IntegratorOptions& options = {});

}  // namespace rydecay
