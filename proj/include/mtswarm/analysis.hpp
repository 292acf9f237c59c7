#pragma once

#include <Eigen/Dense>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "mtswarm/behavior.hpp"
#include "mtswarm/dictionary.hpp"

namespace mtswarm {

struct Trajectory;

/// Type-7 (linear interpolation) quantile of `sorted`, p in [0, 1].
double quantile_sorted(std::span<const double> sorted, double p);

/// Spearman rank correlation with average ranks for ties; NaN when either
/// side is constant. Throws std::invalid_argument on length mismatch or n < 2.
double spearman(std::span<const double> x, std::span<const double> y);

struct BoxStats {
    std::size_t atom = 0;
    double temperature = 0.0;
    double q1 = 0.0, median = 0.0, q3 = 0.0;
    double lo = 0.0, hi = 0.0;  // whiskers: extreme samples within 1.5 IQR of the box
    std::size_t n = 0;
    std::vector<double> outliers;
    double mean = 0.0;
    double stddev = 0.0;  // sample standard deviation
};

/// Per (atom, temperature) box statistics of the signed activations of
/// frames >= exclude_first, ordered by atom then temperature. Throws
/// std::invalid_argument when nothing is left after the exclusion.
std::vector<BoxStats> activation_boxplot_stats(const ActivationTable& acts, std::uint32_t exclude_first = 50);

/// Tile-averaged activation per frame for a single run: n_frames x n_a.
/// Throws std::invalid_argument when the table mixes runs.
Eigen::MatrixXd temporal_activation_map(const ActivationTable& acts);

/// Tile-averaged activation vector per (run, frame), in first-appearance order.
struct FrameActivations {
    std::vector<TileMeta> frames;  // tile field unused
    Eigen::MatrixXd X;             // n_frames x n_a
};
FrameActivations frame_averages(const ActivationTable& acts);

struct Exemplar {
    std::size_t row = 0;  // index into the feature matrix
    double similarity = 0.0;
};

/// The k feature rows most cosine-similar to each atom (features are mapped
/// through the dictionary's transform first). Ties go to the smaller
/// (run, frame, tile).
std::vector<std::vector<Exemplar>> atom_exemplars(const Dictionary& dict, const FeatureMatrix& features, std::size_t k);

struct BehaviorRow {
    std::string run;
    std::uint32_t frame = 0;
    BehaviorLabel label = BehaviorLabel::disorder;
    double largest_fraction = 0.0;
    double polar_order = 0.0;
};

std::vector<BehaviorRow> behavior_series(const Trajectory& traj, const std::string& run,
                                         const ClusterParams& cp = {}, const BehaviorThresholds& th = {});

void write_boxplot_csv(const std::filesystem::path& path, std::span<const BoxStats> stats);
void write_temporal_csv(const std::filesystem::path& path, const Eigen::MatrixXd& series);
void write_behavior_csv(const std::filesystem::path& path, std::span<const BehaviorRow> rows);
void write_exemplars_csv(const std::filesystem::path& path, const std::vector<std::vector<Exemplar>>& ex,
                         const FeatureMatrix& features);

}  // namespace mtswarm
