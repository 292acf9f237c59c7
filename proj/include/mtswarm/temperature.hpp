#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace mtswarm {

/// (T - 200) / (400 - 200), not clamped.
double normalize_temperature(double kelvin);

/// Two-layer perceptron: y = w2 . relu(W1 s(x) + b1) + b2 where s() is a
/// fixed per-input standardisation taken from the training data.
struct MlpModel {
    Eigen::MatrixXd W1;  // hidden x n_in
    Eigen::VectorXd b1;
    Eigen::VectorXd w2;
    double b2 = 0.0;
    Eigen::VectorXd input_mean;   // empty means no standardisation
    Eigen::VectorXd input_scale;

    std::size_t n_inputs() const { return static_cast<std::size_t>(W1.cols()); }
    std::size_t hidden() const { return static_cast<std::size_t>(W1.rows()); }
    std::size_t parameter_count() const { return static_cast<std::size_t>(W1.size() + b1.size() + w2.size() + 1); }

    /// Flattened parameters: W1 row-major, b1, w2, b2.
    Eigen::VectorXd parameters() const;
    void set_parameters(const Eigen::VectorXd& p);

    static MlpModel zeros(std::size_t n_inputs, std::size_t hidden);
};

double predict(const MlpModel& m, const Eigen::VectorXd& x);
/// One prediction per row of X.
Eigen::VectorXd predict_rows(const MlpModel& m, const Eigen::MatrixXd& X);

/// Mean squared error over the rows of X and its gradient w.r.t. parameters().
double mse_and_gradient(const MlpModel& m, const Eigen::MatrixXd& X, const Eigen::VectorXd& y, Eigen::VectorXd* grad);

struct TrainConfig {
    std::size_t hidden = 32;
    std::size_t epochs = 200;
    std::size_t batch_size = 16;
    double learning_rate = 0.01;
    double momentum = 0.9;
    double val_fraction = 0.2;
    std::uint64_t seed = 1;        // initial weights and batch order
    std::uint64_t split_seed = 0;  // train/validation partition

    void validate() const;
};

struct TrainResult {
    MlpModel model;
    std::vector<double> train_mse;  // per epoch
    std::vector<double> val_mse;    // per epoch
    std::vector<std::size_t> train_rows, val_rows;
    double baseline_val_mse = 0.0;  // validation MSE of predicting the mean training target
};

/// Seeded train/validation partition of n rows.
void split_rows(std::size_t n, const TrainConfig& cfg, std::vector<std::size_t>& train, std::vector<std::size_t>& val);

/// Momentum SGD on the mean squared error. Deterministic for a given config.
TrainResult fit(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const TrainConfig& cfg);

/// fit() on normalised temperatures; throws std::invalid_argument when the
/// data holds fewer than two distinct temperatures.
TrainResult train(const Eigen::MatrixXd& X, std::span<const double> kelvin, const TrainConfig& cfg);

double evaluate(const MlpModel& m, const Eigen::MatrixXd& X, const Eigen::VectorXd& y);

struct RepeatSummary {
    std::vector<double> val_mse;
    std::vector<double> baseline_mse;
    double mean = 0.0, stddev = 0.0;
    double baseline_mean = 0.0;
};

/// train() with seeds cfg.seed, cfg.seed + 1, ...; split fixed by split_seed.
RepeatSummary train_repeats(const Eigen::MatrixXd& X, std::span<const double> kelvin, const TrainConfig& cfg,
                            std::size_t repeats, MlpModel* first_model = nullptr);

struct TrackPoint {
    std::uint32_t frame = 0;
    double true_norm = 0.0;
    double predicted = 0.0;
};

/// Per-frame predictions for one run's frame-averaged activations.
std::vector<TrackPoint> track(const MlpModel& m, const Eigen::MatrixXd& X, std::span<const std::uint32_t> frames,
                              std::span<const double> kelvin);

/// First frame index f such that the trailing mean of `window` predictions
/// is >= level at f and at every later frame; nullopt if it never settles.
std::optional<std::size_t> sustained_crossing(std::span<const double> predicted, double level, std::size_t window = 5);

void write_model(const std::filesystem::path& path, const MlpModel& m);
MlpModel read_model(const std::filesystem::path& path);
void write_tracking_csv(const std::filesystem::path& path, std::span<const TrackPoint> pts);

}  // namespace mtswarm
