#include "rydecay/operators.hpp"

#include <bit>
#include <cmath>
#include <stdexcept>

namespace rydecay {

int excited_count(std::uint64_t state) { return std::popcount(state); }

int excited_neighbor_count(std::uint64_t state, int n_sites, const std::vector<int>& neighbors) {
    int count = 0;
    for (int m : neighbors) count += is_excited(state, n_sites, m) ? 1 : 0;
    return count;
}

SparseOperator::SparseOperator(SparseMatrix m, bool hermitian) : m_(std::move(m)), hermitian_(hermitian) {
    if (m_.rows() != m_.cols()) throw std::invalid_argument("operator must be square");
    m_.makeCompressed();
    if (hermitian_ && !is_hermitian(1e-12)) throw std::invalid_argument("operator flagged Hermitian is not");
}

SparseOperator SparseOperator::from_triplets(Eigen::Index dim, const std::vector<Triplet>& entries, bool hermitian) {
    for (const auto& t : entries)
        if (t.row() < 0 || t.col() < 0 || t.row() >= dim || t.col() >= dim)
            throw std::out_of_range("operator entry index outside dimension");
    SparseMatrix m(dim, dim);
    m.setFromTriplets(entries.begin(), entries.end());  // duplicates are summed
    return SparseOperator(std::move(m), hermitian);
}

SparseOperator SparseOperator::identity(Eigen::Index dim) {
    SparseMatrix m(dim, dim);
    m.setIdentity();
    return SparseOperator(std::move(m), true);
}

SparseOperator SparseOperator::zero(Eigen::Index dim) { return SparseOperator(SparseMatrix(dim, dim), true); }

std::vector<Triplet> SparseOperator::entries() const {
    std::vector<Triplet> out;
    out.reserve(static_cast<std::size_t>(m_.nonZeros()));
    for (Eigen::Index r = 0; r < m_.outerSize(); ++r)
        for (SparseMatrix::InnerIterator it(m_, r); it; ++it) out.emplace_back(it.row(), it.col(), it.value());
    return out;
}

bool SparseOperator::is_hermitian(double tol) const {
    SparseMatrix diff = m_ - SparseMatrix(m_.adjoint());
    for (Eigen::Index r = 0; r < diff.outerSize(); ++r)
        for (SparseMatrix::InnerIterator it(diff, r); it; ++it)
            if (std::abs(it.value()) > tol) return false;
    return true;
}

bool SparseOperator::is_diagonal() const {
    for (Eigen::Index r = 0; r < m_.outerSize(); ++r)
        for (SparseMatrix::InnerIterator it(m_, r); it; ++it)
            if (it.row() != it.col() && it.value() != cplx{}) return false;
    return true;
}

SparseOperator SparseOperator::adjoint() const { return SparseOperator(SparseMatrix(m_.adjoint()), hermitian_); }

SparseOperator SparseOperator::pruned(double tol) const {
    SparseMatrix m = m_;
    m.prune([tol](Eigen::Index, Eigen::Index, const cplx& v) { return std::abs(v) > tol; });
    SparseOperator out;
    out.m_ = std::move(m);
    out.m_.makeCompressed();
    out.hermitian_ = hermitian_;
    return out;
}

SparseOperator operator+(const SparseOperator& a, const SparseOperator& b) {
    if (a.dim() != b.dim()) throw std::invalid_argument("operator dimension mismatch");
    SparseOperator out(SparseMatrix(a.m_ + b.m_));
    out.hermitian_ = a.hermitian_ && b.hermitian_;
    return out;
}

SparseOperator operator-(const SparseOperator& a, const SparseOperator& b) {
    if (a.dim() != b.dim()) throw std::invalid_argument("operator dimension mismatch");
    SparseOperator out(SparseMatrix(a.m_ - b.m_));
    out.hermitian_ = a.hermitian_ && b.hermitian_;
    return out;
}

SparseOperator operator*(const SparseOperator& a, const SparseOperator& b) {
    if (a.dim() != b.dim()) throw std::invalid_argument("operator dimension mismatch");
    return SparseOperator(SparseMatrix(a.m_ * b.m_));
}

SparseOperator operator*(cplx s, const SparseOperator& a) {
    SparseOperator out(SparseMatrix(s * a.m_));
    out.hermitian_ = a.hermitian_ && s.imag() == 0.0;
    return out;
}

double max_abs_diff(const SparseOperator& a, const SparseOperator& b) {
    if (a.dim() != b.dim()) throw std::invalid_argument("operator dimension mismatch");
    SparseMatrix d = a.m_ - b.m_;
    double worst = 0.0;
    for (Eigen::Index r = 0; r < d.outerSize(); ++r)
        for (SparseMatrix::InnerIterator it(d, r); it; ++it) worst = std::max(worst, std::abs(it.value()));
    return worst;
}

bool operator==(const SparseOperator& a, const SparseOperator& b) {
    if (a.dim() != b.dim()) return false;
    const auto ea = a.pruned().entries();
    const auto eb = b.pruned().entries();
    if (ea.size() != eb.size()) return false;
    for (std::size_t i = 0; i < ea.size(); ++i)
        if (ea[i].row() != eb[i].row() || ea[i].col() != eb[i].col() || ea[i].value() != eb[i].value())
            return false;
    return true;
}

void ModelParams::validate() const {
    for (double v : {omega_a, V, gamma, Omega, Delta})
        if (!std::isfinite(v)) throw std::invalid_argument("model parameters must be finite");
    if (gamma < 0.0) throw std::invalid_argument("decay rate gamma must be non-negative");
}

const char* to_string(DecayModel m) { return m == DecayModel::single ? "single" : "collective"; }

DecayModel decay_model_from_string(const std::string& s) {
    if (s == "single") return DecayModel::single;
    if (s == "collective") return DecayModel::collective;
    throw std::invalid_argument("unknown decay model '" + s + "' (expected single|collective)");
}

namespace {

Eigen::Index hilbert_dim(const LatticeSpec& lattice) {
    if (lattice.site_count() > 30) throw std::invalid_argument("lattice too large for a dense basis");
    return Eigen::Index{1} << lattice.site_count();
}

void check_site(const LatticeSpec& lattice, int k) {
    if (k < 0 || k >= lattice.site_count())
        throw std::out_of_range("site index " + std::to_string(k) + " outside lattice of " +
                                std::to_string(lattice.site_count()) + " sites");
}

}  // namespace

SparseOperator site_operator(const LatticeSpec& lattice, int k, SiteOp which) {
    check_site(lattice, k);
    const int n = lattice.site_count();
    const Eigen::Index dim = hilbert_dim(lattice);
    const std::uint64_t mask = site_mask(n, k);
    const cplx i_unit{0.0, 1.0};
    std::vector<Triplet> t;
    t.reserve(static_cast<std::size_t>(dim));
    for (std::uint64_t s = 0; s < static_cast<std::uint64_t>(dim); ++s) {
        const bool up = (s & mask) != 0;
        const auto flipped = static_cast<Eigen::Index>(s ^ mask);
        const auto col = static_cast<Eigen::Index>(s);
        switch (which) {
            case SiteOp::sigma_minus:
                if (up) t.emplace_back(flipped, col, 1.0);
                break;
            case SiteOp::sigma_plus:
                if (!up) t.emplace_back(flipped, col, 1.0);
                break;
            case SiteOp::sigma_x:
                t.emplace_back(flipped, col, 1.0);
                break;
            case SiteOp::sigma_y:
                // sigma^y = -i sigma^+ + i sigma^-
                t.emplace_back(flipped, col, up ? i_unit : -i_unit);
                break;
            case SiteOp::number:
                if (up) t.emplace_back(col, col, 1.0);
                break;
        }
    }
    const bool herm = which == SiteOp::sigma_x || which == SiteOp::sigma_y || which == SiteOp::number;
    return SparseOperator::from_triplets(dim, t, herm);
}

SparseOperator neighborhood_projector(const LatticeSpec& lattice, const NeighborTable& table, int k, int xi) {
    check_site(lattice, k);
    const auto& nb = table.neighbors[static_cast<std::size_t>(k)];
    if (xi < 0 || xi > static_cast<int>(nb.size()))
        throw std::out_of_range("xi=" + std::to_string(xi) + " outside 0.." + std::to_string(nb.size()) +
                                " for site " + std::to_string(k));
    const int n = lattice.site_count();
    const Eigen::Index dim = hilbert_dim(lattice);
    std::vector<Triplet> t;
    for (std::uint64_t s = 0; s < static_cast<std::uint64_t>(dim); ++s)
        if (excited_neighbor_count(s, n, nb) == xi) t.emplace_back(s, s, 1.0);
    return SparseOperator::from_triplets(dim, t, true);
}

namespace {

std::vector<Triplet> interaction_diagonal(const LatticeSpec& lattice, const NeighborTable& table,
                                          double single_site_energy, double V) {
    const int n = lattice.site_count();
    const Eigen::Index dim = hilbert_dim(lattice);
    std::vector<Triplet> t;
    t.reserve(static_cast<std::size_t>(dim));
    for (std::uint64_t s = 0; s < static_cast<std::uint64_t>(dim); ++s) {
        int bonds = 0;
        for (const auto& [a, b] : table.bond_list)
            if (is_excited(s, n, a) && is_excited(s, n, b)) ++bonds;
        const double e = single_site_energy * excited_count(s) + V * bonds;
        if (e != 0.0) t.emplace_back(s, s, e);
    }
    return t;
}

}  // namespace

SparseOperator atomic_hamiltonian(const LatticeSpec& lattice, const NeighborTable& table, const ModelParams& params) {
    params.validate();
    return SparseOperator::from_triplets(hilbert_dim(lattice),
                                         interaction_diagonal(lattice, table, params.omega_a, params.V), true);
}

SparseOperator driven_hamiltonian(const LatticeSpec& lattice, const NeighborTable& table, const ModelParams& params) {
    params.validate();
    // omega_a cancels against the (Delta - omega_a) shift of the laser term.
    auto t = interaction_diagonal(lattice, table, params.Delta, params.V);
    const int n = lattice.site_count();
    const Eigen::Index dim = hilbert_dim(lattice);
    if (params.Omega != 0.0)
        for (int k = 0; k < n; ++k)
            for (std::uint64_t s = 0; s < static_cast<std::uint64_t>(dim); ++s)
                t.emplace_back(static_cast<Eigen::Index>(s ^ site_mask(n, k)), s, params.Omega);
    return SparseOperator::from_triplets(dim, t, true);
}

std::string JumpOperator::label() const {
    std::string s = "k=" + std::to_string(site);
    if (xi >= 0) s += ",xi=" + std::to_string(xi);
    return s;
}

std::vector<JumpOperator> jump_operators(const LatticeSpec& lattice, const NeighborTable& table,
                                         const ModelParams& params, DecayModel model) {
    params.validate();
    const int n = lattice.site_count();
    const Eigen::Index dim = hilbert_dim(lattice);
    const double amp = std::sqrt(params.gamma);
    std::vector<JumpOperator> out;
    for (int k = 0; k < n; ++k) {
        const std::uint64_t mask = site_mask(n, k);
        const auto& nb = table.neighbors[static_cast<std::size_t>(k)];
        if (model == DecayModel::single) {
            std::vector<Triplet> t;
            for (std::uint64_t s = 0; s < static_cast<std::uint64_t>(dim); ++s)
                if (s & mask) t.emplace_back(s ^ mask, s, amp);
            out.push_back({k, -1, SparseOperator::from_triplets(dim, t)});
            continue;
        }
        // The projector commutes with sigma^-_k since site k is not its own neighbor.
        std::vector<std::vector<Triplet>> by_xi(nb.size() + 1);
        for (std::uint64_t s = 0; s < static_cast<std::uint64_t>(dim); ++s)
            if (s & mask) by_xi[static_cast<std::size_t>(excited_neighbor_count(s, n, nb))].emplace_back(s ^ mask, s, amp);
        for (std::size_t xi = 0; xi < by_xi.size(); ++xi)
            out.push_back({k, static_cast<int>(xi), SparseOperator::from_triplets(dim, by_xi[xi])});
    }
    return out;
}

SparseOperator jump_rate_operator(const std::vector<JumpOperator>& jumps, Eigen::Index dim) {
    SparseMatrix acc(dim, dim);
    for (const auto& j : jumps) acc += SparseMatrix(j.op.matrix().adjoint() * j.op.matrix());
    return SparseOperator(std::move(acc), true);
}

}  // namespace rydecay
