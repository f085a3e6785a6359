#pragma once

#include <complex>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "rydecay/lattice.hpp"

namespace rydecay {

using cplx = std::complex<double>;
using SparseMatrix = Eigen::SparseMatrix<cplx, Eigen::RowMajor>;
using Triplet = Eigen::Triplet<cplx>;

// Basis convention: a basis state is an N-bit integer, site 0 is the most
// significant bit, and a set bit means the site is in the Rydberg state |up>.
inline std::uint64_t site_mask(int n_sites, int k) { return std::uint64_t{1} << (n_sites - 1 - k); }
inline bool is_excited(std::uint64_t state, int n_sites, int k) { return (state & site_mask(n_sites, k)) != 0; }
int excited_count(std::uint64_t state);
int excited_neighbor_count(std::uint64_t state, int n_sites, const std::vector<int>& neighbors);

/// Complex sparse operator on the 2^N many-body space.
class SparseOperator {
public:
    SparseOperator() = default;
    explicit SparseOperator(SparseMatrix m, bool hermitian = false);
    static SparseOperator from_triplets(Eigen::Index dim, const std::vector<Triplet>& entries,
                                        bool hermitian = false);
    static SparseOperator identity(Eigen::Index dim);
    static SparseOperator zero(Eigen::Index dim);

    Eigen::Index dim() const { return m_.rows(); }
    Eigen::Index nonzeros() const { return m_.nonZeros(); }
    const SparseMatrix& matrix() const { return m_; }
    bool hermitian_flag() const { return hermitian_; }

    cplx coeff(Eigen::Index r, Eigen::Index c) const { return m_.coeff(r, c); }
    std::vector<Triplet> entries() const;
    bool is_hermitian(double tol = 0.0) const;
    bool is_diagonal() const;
    Eigen::MatrixXcd dense() const { return Eigen::MatrixXcd(m_); }

    SparseOperator adjoint() const;
    /// Drops stored zeros so that exact comparisons are meaningful.
    SparseOperator pruned(double tol = 0.0) const;

    friend SparseOperator operator+(const SparseOperator& a, const SparseOperator& b);
    friend SparseOperator operator-(const SparseOperator& a, const SparseOperator& b);
    friend SparseOperator operator*(const SparseOperator& a, const SparseOperator& b);
    friend SparseOperator operator*(cplx s, const SparseOperator& a);

    /// Max absolute elementwise difference.
    friend double max_abs_diff(const SparseOperator& a, const SparseOperator& b);
    /// Exact structural and numerical equality after pruning explicit zeros.
    friend bool operator==(const SparseOperator& a, const SparseOperator& b);

private:
    SparseMatrix m_;
    bool hermitian_ = false;
};

struct ModelParams {
    double omega_a = 0.0;
    double V = 10.0;
    double gamma = 1.0;
    double Omega = 0.0;
    double Delta = 0.0;

    /// Throws on gamma < 0 or non-finite values. gamma = 0 is accepted as the
    /// dissipation-free limit.
    void validate() const;
    /// The rotating-wave treatment of the decay needs V >> gamma.
    bool outside_rwa_regime() const { return V <= gamma; }
};

enum class SiteOp { sigma_minus, sigma_plus, sigma_x, sigma_y, number };
enum class DecayModel { single, collective };

const char* to_string(DecayModel m);
DecayModel decay_model_from_string(const std::string& s);

SparseOperator site_operator(const LatticeSpec& lattice, int k, SiteOp which);

/// Projector onto basis states with exactly `xi` excited neighbors of site k.
SparseOperator neighborhood_projector(const LatticeSpec& lattice, const NeighborTable& table, int k, int xi);

/// omega_a sum_k n_k + V sum_bonds n_k n_m (each bond once).
SparseOperator atomic_hamiltonian(const LatticeSpec& lattice, const NeighborTable& table,
                                  const ModelParams& params);

/// Atomic Hamiltonian plus laser: sum_k [Omega sigma^x_k + (Delta - omega_a) n_k].
SparseOperator driven_hamiltonian(const LatticeSpec& lattice, const NeighborTable& table,
                                  const ModelParams& params);

struct JumpOperator {
    int site = 0;
    int xi = -1;  // neighborhood occupation for collective channels, -1 for single-atom decay
    SparseOperator op;

    std::string label() const;
};

/// single: sqrt(gamma) sigma^-_k for every k.
/// collective: sqrt(gamma) P_k^xi sigma^-_k for every k and xi = 0..|neighbors(k)|.
std::vector<JumpOperator> jump_operators(const LatticeSpec& lattice, const NeighborTable& table,
                                         const ModelParams& params, DecayModel model);

/// sum_j L_j^dagger L_j
SparseOperator jump_rate_operator(const std::vector<JumpOperator>& jumps, Eigen::Index dim);

}  // namespace rydecay
