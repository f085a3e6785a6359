#include "rydecay/lattice.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace rydecay {

LatticeSpec::LatticeSpec(int dimension, std::vector<int> extents, Boundary boundary)
    : dimension_(dimension), extents_(std::move(extents)), boundary_(boundary), site_count_(1) {
    if (dimension_ < 1) throw std::invalid_argument("lattice dimension must be >= 1");
    if (static_cast<int>(extents_.size()) != dimension_)
        throw std::invalid_argument("lattice extents length (" + std::to_string(extents_.size()) +
                                    ") does not match dimension " + std::to_string(dimension_));
    for (int e : extents_) {
        if (e < 1) throw std::invalid_argument("lattice extent must be >= 1");
        // An extent-2 ring would make two sites neighbors in both directions.
        if (boundary_ == Boundary::periodic && e < 3)
            throw std::invalid_argument("periodic lattice requires every extent >= 3, got " +
                                        std::to_string(e));
        site_count_ *= e;
    }
}

int LatticeSpec::index(const std::vector<int>& c) const {
    if (static_cast<int>(c.size()) != dimension_) throw std::invalid_argument("coordinate rank mismatch");
    int idx = 0;
    for (int a = 0; a < dimension_; ++a) {
        if (c[a] < 0 || c[a] >= extents_[a]) throw std::out_of_range("coordinate outside lattice");
        idx = idx * extents_[a] + c[a];
    }
    return idx;
}

std::vector<int> LatticeSpec::coords(int index) const {
    if (index < 0 || index >= site_count_) throw std::out_of_range("site index outside lattice");
    std::vector<int> c(dimension_);
    for (int a = dimension_ - 1; a >= 0; --a) {
        c[a] = index % extents_[a];
        index /= extents_[a];
    }
    return c;
}

LatticeSpec build_lattice(int dimension, std::vector<int> extents, Boundary boundary) {
    return LatticeSpec(dimension, std::move(extents), boundary);
}

LatticeSpec periodic_chain(int n) { return LatticeSpec(1, {n}, Boundary::periodic); }

NeighborTable neighbor_table(const LatticeSpec& lattice) {
    const int n = lattice.site_count();
    NeighborTable table;
    table.neighbors.resize(n);
    for (int k = 0; k < n; ++k) {
        const auto c = lattice.coords(k);
        for (int a = 0; a < lattice.dimension(); ++a) {
            const int ext = lattice.extents()[a];
            for (int step : {-1, +1}) {
                auto m = c;
                m[a] += step;
                if (m[a] < 0 || m[a] >= ext) {
                    if (lattice.boundary() == Boundary::open) continue;
                    m[a] = (m[a] + ext) % ext;
                }
                const int j = lattice.index(m);
                auto& nb = table.neighbors[k];
                if (std::find(nb.begin(), nb.end(), j) == nb.end()) nb.push_back(j);
                if (k < j) table.bond_list.emplace_back(k, j);
            }
        }
        std::sort(table.neighbors[k].begin(), table.neighbors[k].end());
    }
    std::sort(table.bond_list.begin(), table.bond_list.end());
    table.bond_list.erase(std::unique(table.bond_list.begin(), table.bond_list.end()), table.bond_list.end());
    return table;
}

const char* to_string(Boundary b) { return b == Boundary::periodic ? "periodic" : "open"; }

Boundary boundary_from_string(const std::string& s) {
    if (s == "periodic") return Boundary::periodic;
    if (s == "open") return Boundary::open;
    throw std::invalid_argument("unknown boundary '" + s + "' (expected periodic|open)");
}

}  // namespace rydecay
