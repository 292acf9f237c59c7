#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <span>
#include <vector>

#include "mtswarm/config.hpp"
#include "mtswarm/neighbor_grid.hpp"
#include "mtswarm/physics.hpp"
#include "mtswarm/rng.hpp"

namespace mtswarm {

struct TrajectoryHeader {
    std::uint64_t config_hash = 0;
    std::uint32_t n_filaments = 0;
    std::uint32_t sites_per_filament = 0;
    std::uint32_t n_frames = 0;
    double box_side = 0.0;

    friend bool operator==(const TrajectoryHeader&, const TrajectoryHeader&) = default;
};

/// Recorded run: one temperature and one full set of site positions per frame.
struct Trajectory {
    TrajectoryHeader header;
    std::vector<double> temperatures;
    std::vector<std::vector<Vec2>> frames;
    /// Set when the run stopped on a numeric blow-up; frames holds what was recorded.
    bool aborted = false;
    std::uint64_t abort_step = 0;

    std::size_t n_frames() const { return frames.size(); }
    SimBox box() const { return SimBox{header.box_side}; }
    SwarmState state(std::size_t frame) const;
};

/// Places straight filaments with uniform random centres and orientations,
/// rejecting placements that overlap existing filaments. Throws ConfigError
/// when the requested density cannot be placed.
SwarmState initialize(const SimConfig& cfg, CounterRng& rng);

/// Live simulation state stepping under a config.
class Simulation {
public:
    explicit Simulation(SimConfig cfg);

    const SimConfig& config() const { return cfg_; }
    const SwarmState& state() const { return state_; }
    std::uint64_t step_count() const { return step_; }

    /// One midstep update at the given temperature. Throws NumericError on blow-up.
    void step(double temperature);

private:
    SimConfig cfg_;
    SwarmState state_;
    std::uint64_t step_ = 0;
    VerletList neighbours_;
    std::vector<SitePair> pairs_;
};

/// Receives each recorded frame as it is produced.
using FrameSink = std::function<void(std::uint32_t frame, double temperature, std::span<const Vec2> positions)>;

/// Runs n_frames x steps_per_frame updates and records the state after each
/// frame's steps (frame 0 is the initial state when steps_per_frame = 0).
/// Frame f uses the schedule temperature at f. Throws NumericError on blow-up;
/// frames already passed to `sink` stay delivered.
Trajectory run(const SimConfig& cfg, const FrameSink& sink = {});

struct SweepEntry {
    std::uint32_t index = 0;
    double temperature = 0.0;
    std::uint64_t seed = 0;
};

/// Temperatures t_min, t_min + t_step, ..., t_max with derived per-run seeds
/// seed_i = base_seed XOR mix64(i). Throws std::invalid_argument unless
/// t_step divides t_max - t_min.
std::vector<SweepEntry> sweep_plan(const SimConfig& base, double t_min, double t_max, double t_step);

/// Base config with the entry's fixed temperature and seed.
SimConfig sweep_config(const SimConfig& base, const SweepEntry& entry);

struct SweepRun {
    SweepEntry entry;
    Trajectory trajectory;
};

/// Runs every sweep entry, up to `jobs` at a time. Results are in plan order.
std::vector<SweepRun> sweep(const SimConfig& base, double t_min, double t_max, double t_step,
                            unsigned jobs = 1);

// ---- trajectory file ("MTSW", little-endian) -------------------------------

/// Streams a trajectory to disk frame by frame. The header's frame count is
/// patched on abort so the file stays readable.
class TrajectoryWriter {
public:
    TrajectoryWriter(const std::filesystem::path& path, const TrajectoryHeader& header);
    void write_frame(double temperature, std::span<const Vec2> positions);
    /// Rewrites the frame count and appends the abort marker plus failing step.
    void abort(std::uint64_t step);
    void close();
    std::uint32_t frames_written() const { return written_; }

private:
    std::filesystem::path path_;
    std::ofstream out_;
    TrajectoryHeader header_;
    std::uint32_t written_ = 0;
};

void write_trajectory(const std::filesystem::path& path, const Trajectory& traj);

/// Throws FormatError (naming the file and byte offset) on malformed input.
Trajectory read_trajectory(const std::filesystem::path& path);

}  // namespace mtswarm
