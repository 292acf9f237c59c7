#include "mtswarm/render.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <tuple>

#include "mtswarm/csv.hpp"
#include "mtswarm/errors.hpp"
#include "mtswarm/simulation.hpp"

namespace mtswarm {

HueMode parse_hue_mode(const std::string& s) {
    if (s == "nematic") return HueMode::nematic;
    if (s == "polar") return HueMode::polar;
    throw std::invalid_argument("hue mode must be 'nematic' or 'polar', got '" + s + "'");
}

std::array<std::uint8_t, 3> hue_to_rgb(double hue_deg) {
    double h = std::fmod(hue_deg, 360.0);
    if (h < 0.0) h += 360.0;
    const double hp = h / 60.0;
    const double x = 1.0 - std::abs(std::fmod(hp, 2.0) - 1.0);
    double r = 0, g = 0, b = 0;
    switch (static_cast<int>(hp)) {
        case 0: r = 1; g = x; break;
        case 1: r = x; g = 1; break;
        case 2: g = 1; b = x; break;
        case 3: g = x; b = 1; break;
        case 4: r = x; b = 1; break;
        default: r = 1; b = x; break;
    }
    auto q = [](double v) { return static_cast<std::uint8_t>(std::lround(v * 255.0)); };
    return {q(r), q(g), q(b)};
}

double rgb_to_hue(const std::uint8_t* rgb) {
    const double r = rgb[0], g = rgb[1], b = rgb[2];
    const double mx = std::max({r, g, b});
    const double mn = std::min({r, g, b});
    const double c = mx - mn;
    if (c == 0.0) return 0.0;
    double h;
    if (mx == r) {
        h = std::fmod((g - b) / c, 6.0);
    } else if (mx == g) {
        h = (b - r) / c + 2.0;
    } else {
        h = (r - g) / c + 4.0;
    }
    h *= 60.0;
    if (h < 0.0) h += 360.0;
    return h >= 360.0 ? h - 360.0 : h;
}

namespace {

double filament_hue(std::span<const Vec2> sites, const SimBox& box, HueMode mode) {
    double sx = 0.0, sy = 0.0;
    for (std::size_t j = 0; j + 1 < sites.size(); ++j) {
        const Vec2 d = minimum_image(sites[j + 1], sites[j], box);
        const double phi = std::atan2(d.y, d.x);
        if (mode == HueMode::nematic) {
            sx += std::cos(2.0 * phi);
            sy += std::sin(2.0 * phi);
        } else {
            sx += std::cos(phi);
            sy += std::sin(phi);
        }
    }
    double a = std::atan2(sy, sx);
    if (a < 0.0) a += 2.0 * M_PI;
    // nematic: a is twice the orientation, so [0, 2pi) already covers [0, pi)
    double hue = a / (2.0 * M_PI) * 360.0;
    return hue >= 360.0 ? 0.0 : hue;
}

void draw_line(FrameRaster& r, long x0, long y0, long x1, long y1, const std::array<std::uint8_t, 3>& c) {
    const long n = static_cast<long>(r.width);
    auto plot = [&](long x, long y) {
        const long px = ((x % n) + n) % n;
        const long py = ((y % n) + n) % n;
        auto* p = r.at(static_cast<std::size_t>(px), static_cast<std::size_t>(py));
        p[0] = c[0];
        p[1] = c[1];
        p[2] = c[2];
    };
    const long dx = std::abs(x1 - x0), sx = x0 < x1 ? 1 : -1;
    const long dy = -std::abs(y1 - y0), sy = y0 < y1 ? 1 : -1;
    long err = dx + dy;
    for (;;) {
        plot(x0, y0);
        if (x0 == x1 && y0 == y1) break;
        const long e2 = 2 * err;
        if (e2 >= dy) {
            err += dy;
            x0 += sx;
        }
        if (e2 <= dx) {
            err += dx;
            y0 += sy;
        }
    }
}

}  // namespace

FrameRaster rasterize(const FrameView& frame, std::size_t size, HueMode mode) {
    if (size == 0 || size % 3 != 0) throw std::invalid_argument("raster size must be a positive multiple of 3");
    FrameRaster r(size, size);
    const double scale = static_cast<double>(size) / frame.box.side;
    const long n = static_cast<long>(size);
    for (std::size_t f = 0; f < frame.n_filaments(); ++f) {
        const auto sites = frame.filament(f);
        const auto colour = hue_to_rgb(filament_hue(sites, frame.box, mode));
        for (std::size_t j = 0; j + 1 < sites.size(); ++j) {
            const Vec2 a = frame.box.wrap(sites[j]);
            const Vec2 d = minimum_image(sites[j], sites[j + 1], frame.box);
            const long x0 = std::min(n - 1, static_cast<long>(a.x * scale));
            const long y0 = std::min(n - 1, static_cast<long>(a.y * scale));
            draw_line(r, x0, y0, x0 + std::lround(d.x * scale), y0 + std::lround(d.y * scale), colour);
        }
    }
    return r;
}

std::vector<FrameRaster> tile3x3(const FrameRaster& raster) {
    if (raster.width % 3 != 0 || raster.height % 3 != 0) {
        throw std::invalid_argument("tile3x3: raster dimensions must be divisible by 3");
    }
    const std::size_t tw = raster.width / 3, th = raster.height / 3;
    std::vector<FrameRaster> tiles;
    tiles.reserve(9);
    for (std::size_t ty = 0; ty < 3; ++ty) {
        for (std::size_t tx = 0; tx < 3; ++tx) {
            FrameRaster t(tw, th);
            for (std::size_t y = 0; y < th; ++y) {
                std::copy_n(raster.at(tx * tw, ty * th + y), 3 * tw, t.at(0, y));
            }
            tiles.push_back(std::move(t));
        }
    }
    return tiles;
}

FrameRaster untile3x3(std::span<const FrameRaster> tiles) {
    if (tiles.size() != 9) throw std::invalid_argument("untile3x3: need 9 tiles");
    const std::size_t tw = tiles[0].width, th = tiles[0].height;
    FrameRaster r(3 * tw, 3 * th);
    for (std::size_t k = 0; k < 9; ++k) {
        if (tiles[k].width != tw || tiles[k].height != th) throw std::invalid_argument("untile3x3: tile sizes differ");
        const std::size_t tx = k % 3, ty = k / 3;
        for (std::size_t y = 0; y < th; ++y) std::copy_n(tiles[k].at(0, y), 3 * tw, r.at(tx * tw, ty * th + y));
    }
    return r;
}

void write_ppm(const std::filesystem::path& path, const FrameRaster& raster) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
    out << "P6\n" << raster.width << ' ' << raster.height << "\n255\n";
    out.write(reinterpret_cast<const char*>(raster.pixels.data()), static_cast<std::streamsize>(raster.pixels.size()));
    if (!out) throw std::runtime_error("write failed: " + path.string());
}

FrameRaster read_ppm(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    std::string magic;
    std::size_t w = 0, h = 0, maxval = 0;
    in >> magic >> w >> h >> maxval;
    if (magic != "P6" || maxval != 255 || w == 0 || h == 0) throw FormatError(path.string() + ": not an 8-bit P6 image");
    in.get();
    FrameRaster r(w, h);
    in.read(reinterpret_cast<char*>(r.pixels.data()), static_cast<std::streamsize>(r.pixels.size()));
    if (in.gcount() != static_cast<std::streamsize>(r.pixels.size())) {
        throw FormatError(path.string() + ": truncated pixel data");
    }
    return r;
}

std::vector<float> descriptor(const FrameRaster& tile) {
    std::array<double, kDescriptorDim> v{};
    double* hue_hist = v.data();
    double* coherence_hist = v.data() + 16;
    double* density = v.data() + 32;
    double* lit_hist = v.data() + 48;

    std::size_t lit_total = 0;
    for (std::size_t by = 0; by < 4; ++by) {
        const std::size_t y0 = by * tile.height / 4, y1 = (by + 1) * tile.height / 4;
        for (std::size_t bx = 0; bx < 4; ++bx) {
            const std::size_t x0 = bx * tile.width / 4, x1 = (bx + 1) * tile.width / 4;
            std::size_t lit = 0;
            double c = 0.0, s = 0.0;
            for (std::size_t y = y0; y < y1; ++y) {
                for (std::size_t x = x0; x < x1; ++x) {
                    if (!tile.lit(x, y)) continue;
                    const double h = rgb_to_hue(tile.at(x, y));
                    hue_hist[std::min<std::size_t>(15, static_cast<std::size_t>(h / 22.5))] += 1.0;
                    c += std::cos(h * M_PI / 180.0);
                    s += std::sin(h * M_PI / 180.0);
                    ++lit;
                }
            }
            lit_total += lit;
            const double area = static_cast<double>((y1 - y0) * (x1 - x0));
            const double frac = area > 0 ? lit / area : 0.0;
            density[by * 4 + bx] = frac;
            if (lit == 0) continue;
            const double coherence = std::sqrt(c * c + s * s) / static_cast<double>(lit);
            coherence_hist[std::min<std::size_t>(15, static_cast<std::size_t>(coherence * 16.0))] += 1.0 / 16.0;
            lit_hist[std::min<std::size_t>(15, static_cast<std::size_t>(std::sqrt(frac / 0.25) * 16.0))] += 1.0 / 16.0;
        }
    }
    if (lit_total > 0) {
        for (std::size_t i = 0; i < 16; ++i) hue_hist[i] /= static_cast<double>(lit_total);
    }
    double n2 = 0.0;
    for (double x : v) n2 += x * x;
    std::vector<float> out(kDescriptorDim, 0.0f);
    if (n2 == 0.0) return out;
    const double inv = 1.0 / std::sqrt(n2);
    for (std::size_t i = 0; i < kDescriptorDim; ++i) out[i] = static_cast<float>(v[i] * inv);
    return out;
}

void FeatureMatrix::append(const TileMeta& m, std::span<const float> v) {
    if (dim == 0 && meta.empty()) dim = v.size();
    if (v.size() != dim) throw std::invalid_argument("FeatureMatrix::append: dimension mismatch");
    meta.push_back(m);
    values.insert(values.end(), v.begin(), v.end());
}

void FeatureMatrix::append(const FeatureMatrix& other) {
    if (other.rows() == 0) return;
    if (rows() == 0) dim = other.dim;
    if (other.dim != dim) throw std::invalid_argument("FeatureMatrix::append: dimension mismatch");
    meta.insert(meta.end(), other.meta.begin(), other.meta.end());
    values.insert(values.end(), other.values.begin(), other.values.end());
}

std::string run_name(double temperature) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "T%g", temperature);
    return buf;
}

FeatureMatrix featurize(const Trajectory& traj, const std::string& run, const FeaturizeOptions& opts) {
    FeatureMatrix m;
    m.dim = kDescriptorDim;
    const SimBox box = traj.box();
    for (std::size_t f = 0; f < traj.n_frames(); ++f) {
        const FrameView view{traj.frames[f], traj.header.sites_per_filament, box};
        const FrameRaster raster = rasterize(view, opts.raster_size, opts.hue);
        if (!opts.frames_dir.empty()) {
            char name[64];
            std::snprintf(name, sizeof name, "_f%04zu.ppm", f);
            write_ppm(opts.frames_dir / (run + name), raster);
        }
        const auto tiles = tile3x3(raster);
        for (std::uint32_t t = 0; t < tiles.size(); ++t) {
            m.append({run, traj.temperatures[f], static_cast<std::uint32_t>(f), t}, descriptor(tiles[t]));
        }
    }
    return m;
}

std::vector<TileMeta> tile_manifest(const std::string& run, double temperature, std::uint32_t n_frames) {
    std::vector<TileMeta> out;
    out.reserve(std::size_t{n_frames} * kTilesPerFrame);
    for (std::uint32_t f = 0; f < n_frames; ++f) {
        for (std::uint32_t t = 0; t < kTilesPerFrame; ++t) out.push_back({run, temperature, f, t});
    }
    return out;
}

std::vector<TileMeta> protocol_manifest(std::span<const double> temperatures, std::uint32_t n_frames) {
    std::vector<TileMeta> out;
    for (double t : temperatures) {
        const auto part = tile_manifest(run_name(t), t, n_frames);
        out.insert(out.end(), part.begin(), part.end());
    }
    return out;
}

void write_features(const std::filesystem::path& path, const FeatureMatrix& m) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
    out << "run,temperature,frame,tile";
    for (std::size_t j = 0; j < m.dim; ++j) out << ",f" << j;
    out << '\n';
    std::string line;
    char buf[32];
    for (std::size_t i = 0; i < m.rows(); ++i) {
        const auto& meta = m.meta[i];
        line = meta.run;
        std::snprintf(buf, sizeof buf, ",%.17g,%u,%u", meta.temperature, meta.frame, meta.tile);
        line += buf;
        for (float x : m.row(i)) {
            std::snprintf(buf, sizeof buf, ",%.9g", static_cast<double>(x));
            line += buf;
        }
        line += '\n';
        out << line;
    }
    if (!out) throw std::runtime_error("write failed: " + path.string());
}

FeatureMatrix read_features(const std::filesystem::path& path) {
    CsvReader csv(path);
    const auto& header = csv.header();
    if (header.size() < 4 || header[0] != "run" || header[1] != "temperature" || header[2] != "frame" ||
        header[3] != "tile") {
        throw FormatError(path.string() + ": expected header run,temperature,frame,tile,f0..; found " +
                          csv.header_line());
    }
    FeatureMatrix m;
    m.dim = header.size() - 4;
    for (std::size_t j = 0; j < m.dim; ++j) {
        if (header[4 + j] != "f" + std::to_string(j)) {
            throw FormatError(path.string() + ": expected header run,temperature,frame,tile,f0..f" +
                              std::to_string(m.dim - 1) + "; found " + csv.header_line());
        }
    }
    std::vector<float> row(m.dim);
    while (auto fields = csv.next()) {
        const auto& f = *fields;
        TileMeta meta{f[0], csv.to_double(f[1], 1), static_cast<std::uint32_t>(csv.to_uint(f[2], 2)),
                      static_cast<std::uint32_t>(csv.to_uint(f[3], 3))};
        for (std::size_t j = 0; j < m.dim; ++j) {
            const double x = csv.to_double(f[4 + j], 4 + j);
            row[j] = static_cast<float>(x);
        }
        m.append(meta, row);
    }
    return m;
}

FeatureMatrix import_embeddings(const std::filesystem::path& path, std::span<const TileMeta> manifest) {
    const FeatureMatrix raw = read_features(path);
    if (raw.rows() != manifest.size()) {
        throw FormatError(path.string() + ": " + std::to_string(raw.rows()) + " embedding rows but manifest has " +
                          std::to_string(manifest.size()));
    }
    std::map<std::tuple<std::string, std::uint32_t, std::uint32_t>, std::size_t> index;
    for (std::size_t i = 0; i < raw.rows(); ++i) {
        const auto& m = raw.meta[i];
        if (!index.emplace(std::tuple{m.run, m.frame, m.tile}, i).second) {
            throw FormatError(path.string() + ": duplicate row for run " + m.run + " frame " + std::to_string(m.frame) +
                              " tile " + std::to_string(m.tile));
        }
    }
    FeatureMatrix out;
    out.dim = raw.dim;
    out.meta.reserve(manifest.size());
    out.values.reserve(manifest.size() * raw.dim);
    for (const auto& m : manifest) {
        const auto it = index.find({m.run, m.frame, m.tile});
        if (it == index.end()) {
            throw FormatError(path.string() + ": no embedding for run " + m.run + " frame " + std::to_string(m.frame) +
                              " tile " + std::to_string(m.tile));
        }
        out.append(m, raw.row(it->second));
    }
    return out;
}

}  // namespace mtswarm
