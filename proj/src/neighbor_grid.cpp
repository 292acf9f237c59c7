#include "mtswarm/neighbor_grid.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace mtswarm {

CellGrid CellGrid::build(std::span<const Vec2> sites, const SimBox& box, double cell_size) {
    if (!(cell_size > 0.0)) throw std::invalid_argument("cell_size must be positive");
    const auto n = static_cast<std::size_t>(std::floor(box.side / cell_size));
    if (n < 3) {
        throw std::invalid_argument("cell_size " + std::to_string(cell_size) +
                                    " too large: need at least 3 cells per axis");
    }
    CellGrid g;
    g.box_ = box;
    g.n_ = n;
    g.width_ = box.side / static_cast<double>(n);
    g.sites_.assign(sites.begin(), sites.end());
    g.cell_of_.resize(sites.size());
    g.start_.assign(n * n + 1, 0);
    g.items_.resize(sites.size());

    auto axis = [&](double v) {
        const double w = box.wrap({v, 0.0}).x;
        return std::min(n - 1, static_cast<std::size_t>(w / g.width_));
    };
    for (std::size_t i = 0; i < sites.size(); ++i) {
        const auto c = static_cast<std::uint32_t>(axis(sites[i].y) * n + axis(sites[i].x));
        g.cell_of_[i] = c;
        ++g.start_[c + 1];
    }
    for (std::size_t c = 0; c < n * n; ++c) g.start_[c + 1] += g.start_[c];
    std::vector<std::uint32_t> fill(g.start_.begin(), g.start_.end() - 1);
    for (std::size_t i = 0; i < sites.size(); ++i) g.items_[fill[g.cell_of_[i]]++] = static_cast<std::uint32_t>(i);
    return g;
}

std::span<const std::uint32_t> CellGrid::cell(std::size_t cx, std::size_t cy) const {
    const std::size_t c = cy * n_ + cx;
    return {items_.data() + start_[c], start_[c + 1] - start_[c]};
}

std::size_t CellGrid::occupied_cells() const {
    std::size_t count = 0;
    for (std::size_t c = 0; c < n_ * n_; ++c) count += start_[c + 1] > start_[c] ? 1 : 0;
    return count;
}

template <class Exclude>
std::vector<SitePair> CellGrid::collect(double cutoff, const Exclude& exclude) const {
    if (cutoff > width_) throw std::invalid_argument("pairs_within: cutoff exceeds cell width");
    const double cut2 = cutoff * cutoff;
    std::vector<SitePair> pairs;
    std::vector<SitePair> local;
    for (std::size_t a = 0; a < sites_.size(); ++a) {
        local.clear();
        const std::size_t cx = cell_of_[a] % n_;
        const std::size_t cy = cell_of_[a] / n_;
        for (std::size_t dy = 0; dy < 3; ++dy) {
            for (std::size_t dx = 0; dx < 3; ++dx) {
                const std::size_t nx = (cx + n_ + dx - 1) % n_;
                const std::size_t ny = (cy + n_ + dy - 1) % n_;
                for (std::uint32_t b : cell(nx, ny)) {
                    if (b <= a || exclude(a, b)) continue;
                    const Vec2 d = minimum_image(sites_[a], sites_[b], box_);
                    const double r2 = norm2(d);
                    if (r2 <= cut2) local.push_back({static_cast<std::uint32_t>(a), b, std::sqrt(r2), d});
                }
            }
        }
        std::sort(local.begin(), local.end(), [](const SitePair& l, const SitePair& r) { return l.b < r.b; });
        pairs.insert(pairs.end(), local.begin(), local.end());
    }
    return pairs;
}

std::vector<SitePair> CellGrid::pairs_within(
    double cutoff, const std::function<bool(std::size_t, std::size_t)>& exclude) const {
    if (!exclude) return collect(cutoff, [](std::size_t, std::size_t) { return false; });
    return collect(cutoff, exclude);
}

std::vector<SitePair> CellGrid::inter_filament_pairs(double cutoff, std::size_t sites_per_filament) const {
    return collect(cutoff, [sites_per_filament](std::size_t a, std::size_t b) {
        return a / sites_per_filament == b / sites_per_filament;
    });
}

VerletList::VerletList(double cutoff, double skin, std::size_t sites_per_filament)
    : cutoff_(cutoff), skin_(skin), per_(sites_per_filament) {
    if (!(cutoff > 0.0) || !(skin >= 0.0)) throw std::invalid_argument("VerletList: need cutoff > 0, skin >= 0");
    if (per_ == 0) throw std::invalid_argument("VerletList: sites_per_filament must be positive");
}

bool VerletList::stale(std::span<const Vec2> sites, const SimBox& box) const {
    if (reference_.size() != sites.size()) return true;
    const double limit2 = 0.25 * skin_ * skin_;
    for (std::size_t i = 0; i < sites.size(); ++i) {
        if (norm2(minimum_image(reference_[i], sites[i], box)) > limit2) return true;
    }
    return false;
}

void VerletList::pairs(std::span<const Vec2> sites, const SimBox& box, std::vector<SitePair>& out) {
    if (stale(sites, box)) {
        const double reach = cutoff_ + skin_;
        const double cell = std::min(box.side / 3.0, reach);
        const auto grid = CellGrid::build(sites, box, cell);
        const auto found = grid.inter_filament_pairs(reach, per_);
        candidates_.resize(found.size());
        for (std::size_t i = 0; i < found.size(); ++i) candidates_[i] = {found[i].a, found[i].b};
        reference_.assign(sites.begin(), sites.end());
        ++rebuilds_;
    }
    out.clear();
    const double cut2 = cutoff_ * cutoff_;
    for (const auto& [a, b] : candidates_) {
        const Vec2 d = minimum_image(sites[a], sites[b], box);
        const double r2 = norm2(d);
        if (r2 <= cut2) out.push_back({a, b, std::sqrt(r2), d});
    }
}

}  // namespace mtswarm
