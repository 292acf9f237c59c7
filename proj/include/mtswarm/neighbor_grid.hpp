#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "mtswarm/potentials.hpp"
#include "mtswarm/vec2.hpp"

namespace mtswarm {

/// Periodic cell list. Cells are stored CSR-style: the sites of cell c are
/// items[start[c] .. start[c+1]) in ascending site order.
class CellGrid {
public:
    /// Requires at least 3 cells per axis (cell_size <= side / 3).
    static CellGrid build(std::span<const Vec2> sites, const SimBox& box, double cell_size);

    std::size_t cells_per_axis() const { return n_; }
    double cell_width() const { return width_; }
    std::size_t n_sites() const { return sites_.size(); }
    std::span<const std::uint32_t> cell(std::size_t cx, std::size_t cy) const;
    std::size_t occupied_cells() const;

    /// Inter-site pairs with minimum-image distance <= cutoff, excluding pairs
    /// for which `exclude(a, b)` holds. Sorted by (a, b) with a < b.
    std::vector<SitePair> pairs_within(double cutoff,
                                       const std::function<bool(std::size_t, std::size_t)>& exclude) const;

    /// Same, excluding pairs on the same filament of `sites_per_filament` sites.
    std::vector<SitePair> inter_filament_pairs(double cutoff, std::size_t sites_per_filament) const;

private:
    template <class Exclude>
    std::vector<SitePair> collect(double cutoff, const Exclude& exclude) const;

    SimBox box_;
    std::size_t n_ = 0;
    double width_ = 0.0;
    std::vector<Vec2> sites_;
    std::vector<std::uint32_t> cell_of_;
    std::vector<std::uint32_t> start_;
    std::vector<std::uint32_t> items_;
};

/// Verlet neighbour list over a cell grid: candidate inter-filament pairs
/// within cutoff + skin, refreshed once any site has moved more than skin / 2
/// since the last build. pairs() returns exactly the pairs an exact
/// CellGrid search would, in the same (a, b) order.
class VerletList {
public:
    VerletList(double cutoff, double skin, std::size_t sites_per_filament);

    /// Exact inter-filament pairs within cutoff for `sites`, rebuilding the
    /// candidate list first if needed. Reuses `out`'s storage.
    void pairs(std::span<const Vec2> sites, const SimBox& box, std::vector<SitePair>& out);

    std::size_t rebuilds() const { return rebuilds_; }

private:
    bool stale(std::span<const Vec2> sites, const SimBox& box) const;

    double cutoff_;
    double skin_;
    std::size_t per_;
    std::size_t rebuilds_ = 0;
    std::vector<Vec2> reference_;
    std::vector<std::pair<std::uint32_t, std::uint32_t>> candidates_;
};

}  // namespace mtswarm
