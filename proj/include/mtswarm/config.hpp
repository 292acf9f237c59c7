#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "mtswarm/physics.hpp"
#include "mtswarm/potentials.hpp"

namespace mtswarm {

/// Piecewise-constant control temperature. Each entry (frame, value) takes
/// effect at the start of that frame; the first entry is always frame 0.
class TemperatureSchedule {
public:
    TemperatureSchedule() : steps_{{0u, 300.0}} {}
    static TemperatureSchedule fixed(double kelvin);
    /// Throws ConfigError unless frames start at 0 and strictly increase.
    static TemperatureSchedule from_steps(std::vector<std::pair<std::uint32_t, double>> steps);
    /// Parses "frame:value,frame:value,...".
    static TemperatureSchedule parse(std::string_view text);

    double at(std::uint32_t frame) const;
    bool is_fixed() const { return steps_.size() == 1; }
    const std::vector<std::pair<std::uint32_t, double>>& steps() const { return steps_; }
    std::string to_string() const;

    friend bool operator==(const TemperatureSchedule&, const TemperatureSchedule&) = default;

private:
    std::vector<std::pair<std::uint32_t, double>> steps_;
};

struct SimConfig {
    std::uint32_t n_filaments = 100;
    std::uint32_t sites_per_filament = 5;
    double box_side = 55.0;
    double dt = 0.001;
    std::uint32_t steps_per_frame = 200;
    std::uint32_t n_frames = 500;
    TemperatureSchedule temperature;
    std::uint64_t seed = 1;
    // Simulation default halves the DNA strength: at scale 1 the 200 K run
    // jams into misaligned rafts instead of swarming.
    PotentialParams potentials = [] {
        PotentialParams p;
        p.dna.scale = 0.5;
        return p;
    }();
    FrictionParams friction;

    SimBox box() const { return SimBox{box_side}; }

    /// Throws ConfigError naming the first invalid key.
    void validate() const;

    /// Assigns one `key = value` entry. Unknown keys throw ConfigError.
    void set(std::string_view key, std::string_view value);

    /// Canonical `key = value` text; parse_config(to_text()) reproduces the config.
    std::string to_text() const;

    /// FNV-1a hash of the canonical text.
    std::uint64_t hash() const;
};

/// Every key accepted by SimConfig::set, in canonical order.
const std::vector<std::string>& config_keys();

/// Parses the flat `key = value` format (`#` starts a comment).
SimConfig parse_config(std::string_view text);
SimConfig load_config(const std::filesystem::path& path);

}  // namespace mtswarm
