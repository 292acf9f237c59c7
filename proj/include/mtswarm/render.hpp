#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "mtswarm/behavior.hpp"
#include "mtswarm/vec2.hpp"

namespace mtswarm {

constexpr std::size_t kDefaultRasterSize = 513;
constexpr std::size_t kTilesPerFrame = 9;
constexpr std::size_t kDescriptorDim = 64;

/// 8-bit RGB image, rows top to bottom, black background.
struct FrameRaster {
    std::size_t width = 0;
    std::size_t height = 0;
    std::vector<std::uint8_t> pixels;  // width * height * 3

    FrameRaster() = default;
    FrameRaster(std::size_t w, std::size_t h) : width(w), height(h), pixels(w * h * 3, 0) {}

    std::uint8_t* at(std::size_t x, std::size_t y) { return pixels.data() + 3 * (y * width + x); }
    const std::uint8_t* at(std::size_t x, std::size_t y) const { return pixels.data() + 3 * (y * width + x); }
    bool lit(std::size_t x, std::size_t y) const {
        const auto* p = at(x, y);
        return p[0] | p[1] | p[2];
    }
    bool operator==(const FrameRaster&) const = default;
};

enum class HueMode { nematic, polar };

HueMode parse_hue_mode(const std::string& s);

/// Fully saturated colour for a hue in degrees.
std::array<std::uint8_t, 3> hue_to_rgb(double hue_deg);
/// Hue in degrees [0, 360) of an RGB colour; 0 for greys.
double rgb_to_hue(const std::uint8_t* rgb);

/// Draws each segment as a 1-pixel line (Bresenham, periodic). The hue is the
/// filament's mean orientation: in nematic mode [0, pi) maps onto [0, 360),
/// in polar mode the heading angle [0, 2 pi) does. World y grows downward in
/// image rows. Throws std::invalid_argument unless size is a positive multiple of 3.
FrameRaster rasterize(const FrameView& frame, std::size_t size = kDefaultRasterSize,
                      HueMode mode = HueMode::nematic);

/// Nine equal tiles in row-major order.
std::vector<FrameRaster> tile3x3(const FrameRaster& raster);

/// Inverse of tile3x3.
FrameRaster untile3x3(std::span<const FrameRaster> tiles);

/// Binary PPM (P6).
void write_ppm(const std::filesystem::path& path, const FrameRaster& raster);
FrameRaster read_ppm(const std::filesystem::path& path);

/// 64-dim tile descriptor: hue histogram (16), per-block orientation
/// coherence histogram (16), 4x4 density grid (16), lit-fraction histogram
/// over the 4x4 blocks (16). L2-normalised; all zeros for an empty tile.
std::vector<float> descriptor(const FrameRaster& tile);

struct TileMeta {
    std::string run;
    double temperature = 0.0;
    std::uint32_t frame = 0;
    std::uint32_t tile = 0;

    bool operator==(const TileMeta&) const = default;
};

/// Row-per-tile feature table (rows are the columns of Z).
struct FeatureMatrix {
    std::size_t dim = 0;
    std::vector<TileMeta> meta;
    std::vector<float> values;  // meta.size() * dim, row-major

    std::size_t rows() const { return meta.size(); }
    std::span<const float> row(std::size_t i) const { return {values.data() + i * dim, dim}; }
    void append(const TileMeta& m, std::span<const float> v);
    void append(const FeatureMatrix& other);
};

struct FeaturizeOptions {
    std::size_t raster_size = kDefaultRasterSize;
    HueMode hue = HueMode::nematic;
    /// When set, every frame is also written as <dir>/<run>_f<frame>.ppm.
    std::filesystem::path frames_dir;
};

struct Trajectory;

/// Descriptor rows for every (frame, tile) of a trajectory, ordered by frame then tile.
FeatureMatrix featurize(const Trajectory& traj, const std::string& run, const FeaturizeOptions& opts = {});

/// Metadata rows a run of `n_frames` frames at `temperature` produces.
std::vector<TileMeta> tile_manifest(const std::string& run, double temperature, std::uint32_t n_frames);

/// Metadata-only manifest of a sweep: one run per temperature, named T<kelvin>.
std::vector<TileMeta> protocol_manifest(std::span<const double> temperatures, std::uint32_t n_frames);

/// CSV with header run,temperature,frame,tile,f0..f{d-1}; values at 9 significant digits.
void write_features(const std::filesystem::path& path, const FeatureMatrix& m);
FeatureMatrix read_features(const std::filesystem::path& path);

/// Loads external embeddings in the feature CSV schema and joins them to
/// `manifest`: rows come back in manifest order with manifest metadata.
/// Throws FormatError on dimension or row-count mismatch or missing keys.
FeatureMatrix import_embeddings(const std::filesystem::path& path, std::span<const TileMeta> manifest);

std::string run_name(double temperature);

}  // namespace mtswarm
