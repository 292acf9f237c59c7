#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <string_view>
#include <vector>

#include "mtswarm/vec2.hpp"

namespace mtswarm {

/// Read-only view of one recorded frame.
struct FrameView {
    std::span<const Vec2> positions;
    std::size_t sites_per_filament = 0;
    SimBox box;

    std::size_t n_filaments() const {
        return sites_per_filament == 0 ? 0 : positions.size() / sites_per_filament;
    }
    std::span<const Vec2> filament(std::size_t f) const {
        return positions.subspan(f * sites_per_filament, sites_per_filament);
    }
};

/// Unit heading of each filament: the tangent at the leading end (site 0 - site 1).
std::vector<Vec2> filament_headings(const FrameView& frame);

/// |mean heading| in [0, 1]. Throws std::invalid_argument for an empty frame.
double polar_order(const FrameView& frame);

/// |mean exp(2 i theta)| in [0, 1]; identifies heading and anti-heading.
double nematic_order(const FrameView& frame);

struct ClusterParams {
    double link_distance = 2.0;
    double angle_tol = 0.5235987755982988;  // 30 degrees
};

struct ClusterStats {
    std::size_t n_clusters = 0;
    double largest_fraction = 0.0;
    /// cluster size -> number of clusters of that size
    std::map<std::size_t, std::size_t> size_histogram;
    /// cluster id per filament (ids are the smallest member index)
    std::vector<std::size_t> labels;
};

/// Single-linkage clustering of filaments. Two filaments are linked when some
/// inter-filament site pair lies within `link_distance` and their axes differ
/// by less than `angle_tol` modulo pi.
ClusterStats cluster_stats(const FrameView& frame, double link_distance, double angle_tol);
inline ClusterStats cluster_stats(const FrameView& frame, const ClusterParams& p = {}) {
    return cluster_stats(frame, p.link_distance, p.angle_tol);
}

enum class BehaviorLabel { disorder, partial_swarming, strong_swarming };

std::string_view to_string(BehaviorLabel label);

struct BehaviorThresholds {
    double strong_fraction = 0.5;
    double disorder_fraction = 0.1;
    double disorder_order = 0.3;
};

/// strong if largest_fraction >= strong_fraction; disorder if largest_fraction
/// <= disorder_fraction and order < disorder_order; partial otherwise.
BehaviorLabel classify_behavior(double largest_fraction, double order, const BehaviorThresholds& t = {});

struct FrameBehavior {
    double largest_fraction = 0.0;
    double polar_order = 0.0;
};

std::vector<BehaviorLabel> classify_behavior(std::span<const FrameBehavior> series,
                                             const BehaviorThresholds& t = {});

}  // namespace mtswarm
