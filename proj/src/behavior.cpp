#include "mtswarm/behavior.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "mtswarm/neighbor_grid.hpp"

namespace mtswarm {

namespace {

std::size_t find_root(std::vector<std::size_t>& parent, std::size_t i) {
    while (parent[i] != i) {
        parent[i] = parent[parent[i]];
        i = parent[i];
    }
    return i;
}

Vec2 filament_axis(std::span<const Vec2> sites, const SimBox& box) {
    Vec2 chord{};
    for (std::size_t j = 0; j + 1 < sites.size(); ++j) chord += minimum_image(sites[j + 1], sites[j], box);
    return normalized(chord);
}

}  // namespace

std::vector<Vec2> filament_headings(const FrameView& frame) {
    std::vector<Vec2> out(frame.n_filaments());
    for (std::size_t f = 0; f < out.size(); ++f) {
        const auto s = frame.filament(f);
        out[f] = normalized(minimum_image(s[1], s[0], frame.box));
    }
    return out;
}

double polar_order(const FrameView& frame) {
    if (frame.n_filaments() == 0) throw std::invalid_argument("polar_order: empty frame");
    Vec2 sum{};
    for (const Vec2& h : filament_headings(frame)) sum += h;
    return norm(sum) / static_cast<double>(frame.n_filaments());
}

double nematic_order(const FrameView& frame) {
    if (frame.n_filaments() == 0) throw std::invalid_argument("nematic_order: empty frame");
    double c = 0.0, s = 0.0;
    for (const Vec2& h : filament_headings(frame)) {
        c += h.x * h.x - h.y * h.y;
        s += 2.0 * h.x * h.y;
    }
    return std::hypot(c, s) / static_cast<double>(frame.n_filaments());
}

ClusterStats cluster_stats(const FrameView& frame, double link_distance, double angle_tol) {
    if (!(link_distance > 0.0)) throw std::invalid_argument("cluster_stats: link_distance must be positive");
    const std::size_t n = frame.n_filaments();
    ClusterStats out;
    if (n == 0) return out;

    std::vector<Vec2> axes(n);
    for (std::size_t f = 0; f < n; ++f) axes[f] = filament_axis(frame.filament(f), frame.box);
    const double cos_tol = std::cos(angle_tol);

    std::vector<std::size_t> parent(n);
    std::iota(parent.begin(), parent.end(), 0);
    const CellGrid grid = CellGrid::build(frame.positions, frame.box, link_distance);
    for (const SitePair& p : grid.inter_filament_pairs(link_distance, frame.sites_per_filament)) {
        const std::size_t fa = p.a / frame.sites_per_filament;
        const std::size_t fb = p.b / frame.sites_per_filament;
        if (std::abs(dot(axes[fa], axes[fb])) <= cos_tol) continue;
        const std::size_t ra = find_root(parent, fa);
        const std::size_t rb = find_root(parent, fb);
        if (ra != rb) parent[std::max(ra, rb)] = std::min(ra, rb);
    }

    std::vector<std::size_t> sizes(n, 0);
    out.labels.resize(n);
    for (std::size_t f = 0; f < n; ++f) {
        out.labels[f] = find_root(parent, f);
        ++sizes[out.labels[f]];
    }
    std::size_t largest = 0;
    for (std::size_t size : sizes) {
        if (size == 0) continue;
        ++out.n_clusters;
        ++out.size_histogram[size];
        largest = std::max(largest, size);
    }
    out.largest_fraction = static_cast<double>(largest) / static_cast<double>(n);
    return out;
}

std::string_view to_string(BehaviorLabel label) {
    switch (label) {
        case BehaviorLabel::disorder: return "disorder";
        case BehaviorLabel::partial_swarming: return "partial_swarming";
        case BehaviorLabel::strong_swarming: return "strong_swarming";
    }
    return "unknown";
}

BehaviorLabel classify_behavior(double largest_fraction, double order, const BehaviorThresholds& t) {
    if (largest_fraction >= t.strong_fraction) return BehaviorLabel::strong_swarming;
    if (largest_fraction <= t.disorder_fraction && order < t.disorder_order) return BehaviorLabel::disorder;
    return BehaviorLabel::partial_swarming;
}

std::vector<BehaviorLabel> classify_behavior(std::span<const FrameBehavior> series, const BehaviorThresholds& t) {
    std::vector<BehaviorLabel> out;
    out.reserve(series.size());
    for (const auto& b : series) out.push_back(classify_behavior(b.largest_fraction, b.polar_order, t));
    return out;
}

}  // namespace mtswarm
