#pragma once

// File-staged pipeline glue shared by the command-line tool, the Python
// module and the acceptance driver.

#include <Eigen/Dense>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "mtswarm/analysis.hpp"
#include "mtswarm/dictionary.hpp"
#include "mtswarm/render.hpp"
#include "mtswarm/simulation.hpp"
#include "mtswarm/temperature.hpp"

namespace mtswarm {

/// Run name of a trajectory file: its stem ("T200.mtsw" -> "T200").
std::string run_name_of(const std::filesystem::path& trajectory);

/// Features of several trajectories, runs concatenated in argument order.
FeatureMatrix featurize_files(std::span<const std::filesystem::path> trajectories, const FeaturizeOptions& opts = {});

/// Tile manifest of several trajectory files (metadata only, no rasterizing).
std::vector<TileMeta> manifest_of_files(std::span<const std::filesystem::path> trajectories);

struct LearnStage {
    Dictionary dictionary;
    ActivationTable activations;
    std::vector<double> history;
};

/// Learns a dictionary on (optionally z-scored) features, ranks atoms by
/// temperature relevancy and returns the training-set activations.
LearnStage learn_stage(const FeatureMatrix& features, std::size_t n_atoms, const SparseCodingConfig& cfg,
                       std::uint64_t seed, bool standardize = true);

/// Sparse codes of every feature row under a fixed dictionary (its stored mu).
ActivationTable decompose(const Dictionary& dict, const FeatureMatrix& features, unsigned jobs = 1);

/// Rows for the temperature regressor: one per (run, frame) holding the
/// tile-averaged activations, or one per tile when per_tile is set.
struct TemperatureData {
    Eigen::MatrixXd X;
    std::vector<double> kelvin;
    std::vector<TileMeta> meta;
};
TemperatureData temperature_data(const ActivationTable& acts, bool per_tile = false);

/// Restricts a table to one run.
ActivationTable select_run(const ActivationTable& acts, const std::string& run);

}  // namespace mtswarm
