#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

namespace rydecay {

enum class Boundary { periodic, open };

/// Hypercubic lattice of `dimension` axes. Sites are numbered row-major over
/// the axis coordinates, axis 0 varying slowest.
class LatticeSpec {
public:
    LatticeSpec(int dimension, std::vector<int> extents, Boundary boundary);

    int dimension() const { return dimension_; }
    const std::vector<int>& extents() const { return extents_; }
    Boundary boundary() const { return boundary_; }
    int site_count() const { return site_count_; }

    int index(const std::vector<int>& coords) const;
    std::vector<int> coords(int index) const;

    bool operator==(const LatticeSpec&) const = default;

private:
    int dimension_;
    std::vector<int> extents_;
    Boundary boundary_;
    int site_count_;
};

LatticeSpec build_lattice(int dimension, std::vector<int> extents, Boundary boundary);

/// Convenience for the 1D ring used throughout the simulations.
LatticeSpec periodic_chain(int n);

struct NeighborTable {
    std::vector<std::vector<int>> neighbors;   // sorted, per site
    std::vector<std::pair<int, int>> bond_list;  // each unordered bond once, first < second

    std::size_t coordination(int k) const { return neighbors[static_cast<std::size_t>(k)].size(); }
};

NeighborTable neighbor_table(const LatticeSpec& lattice);

const char* to_string(Boundary b);
Boundary boundary_from_string(const std::string& s);

}  // namespace rydecay
