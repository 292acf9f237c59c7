#include "mtswarm/simulation.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <cstring>
#include <iostream>
#include <mutex>
#include <sstream>
#include <thread>

#include "mtswarm/errors.hpp"
#include "mtswarm/neighbor_grid.hpp"
#include "mtswarm/potentials.hpp"

namespace mtswarm {

namespace {

constexpr std::uint64_t kInitStream = 1;
constexpr std::uint64_t kNoiseStream = 2;
// Largest per-step displacement tolerated before the run is declared unstable.
constexpr double kMaxStepDisplacement = 10.0;

}  // namespace

SwarmState Trajectory::state(std::size_t frame) const {
    SwarmState s(header.n_filaments, header.sites_per_filament);
    s.positions = frames.at(frame);
    return s;
}

SwarmState initialize(const SimConfig& cfg, CounterRng& rng) {
    cfg.validate();
    const SimBox box = cfg.box();
    const std::size_t per = cfg.sites_per_filament;
    SwarmState state(cfg.n_filaments, per);
    if (cfg.n_filaments == 0) return state;

    const double l0 = cfg.potentials.mech.l0;
    const double length = (per - 1) * l0;
    if (length >= box.side / 2.0) {
        throw ConfigError("sites_per_filament", "filament length must be below half the box side");
    }
    const double area_fraction =
        cfg.n_filaments * per * l0 * cfg.potentials.dna.sigma / (box.side * box.side);
    if (area_fraction > 0.4) {
        std::cerr << "warning: filament area fraction " << area_fraction << " exceeds 0.4\n";
    }

    const double min_sep = std::max(cfg.potentials.mech.lj_cutoff, cfg.potentials.mech.lj_sigma);
    const double min_sep2 = min_sep * min_sep;
    constexpr int kMaxAttempts = 10000;
    std::vector<Vec2> candidate(per);

    for (std::size_t f = 0; f < cfg.n_filaments; ++f) {
        bool placed = false;
        for (int attempt = 0; attempt < kMaxAttempts && !placed; ++attempt) {
            const Vec2 centre{rng.uniform() * box.side, rng.uniform() * box.side};
            const double angle = 2.0 * M_PI * rng.uniform();
            const Vec2 dir{std::cos(angle), std::sin(angle)};
            for (std::size_t s = 0; s < per; ++s) {
                const double offset = (0.5 * static_cast<double>(per - 1) - static_cast<double>(s)) * l0;
                candidate[s] = box.wrap(centre + offset * dir);
            }
            placed = true;
            for (std::size_t other = 0; other < f * per && placed; ++other) {
                for (const Vec2& c : candidate) {
                    if (norm2(minimum_image(state.positions[other], c, box)) < min_sep2) {
                        placed = false;
                        break;
                    }
                }
            }
        }
        if (!placed) {
            throw ConfigError("n_filaments", "density infeasible: could not place filament " + std::to_string(f));
        }
        std::copy(candidate.begin(), candidate.end(), state.filament(f).begin());
    }
    return state;
}

namespace {

double verlet_skin(const SimConfig& cfg) {
    return std::clamp(cfg.box_side / 3.0 - cfg.potentials.interaction_cutoff(), 0.0, 0.5);
}

}  // namespace

Simulation::Simulation(SimConfig cfg)
    : cfg_(std::move(cfg)),
      neighbours_(cfg_.potentials.interaction_cutoff(), verlet_skin(cfg_), cfg_.sites_per_filament) {
    CounterRng rng = CounterRng(cfg_.seed).substream(kInitStream);
    state_ = initialize(cfg_, rng);
}

void Simulation::step(double temperature) {
    const SimBox box = cfg_.box();
    const std::size_t per = cfg_.sites_per_filament;
    const auto noise = draw_step_noise(cfg_.n_filaments, per, cfg_.potentials.mech.noise_amp,
                                       CounterRng(cfg_.seed).substream(kNoiseStream).substream(step_));

    auto eval = [&](const SwarmState& s, std::span<Vec2> out) {
        neighbours_.pairs(s.positions, box, pairs_);
        total_forces(s, cfg_.potentials, temperature, pairs_, noise, box, out);
    };

    StepReport report;
    try {
        report = midstep_advance(state_, eval, cfg_.dt, cfg_.friction, box);
    } catch (const NumericError& e) {
        throw NumericError(step_, std::string(e.what()) + " at step " + std::to_string(step_));
    } catch (const DegenerateFilament& e) {
        throw NumericError(step_, std::string(e.what()) + " at step " + std::to_string(step_));
    }
    if (!(report.max_displacement <= kMaxStepDisplacement)) {
        throw NumericError(step_, "integration blow-up: displacement " + std::to_string(report.max_displacement) +
                                      " at step " + std::to_string(step_));
    }
    ++step_;
}

Trajectory run(const SimConfig& cfg, const FrameSink& sink) {
    cfg.validate();
    Simulation sim(cfg);
    Trajectory traj;
    traj.header = {cfg.hash(), cfg.n_filaments, cfg.sites_per_filament, cfg.n_frames, cfg.box_side};
    traj.temperatures.reserve(cfg.n_frames);
    traj.frames.reserve(cfg.n_frames);
    for (std::uint32_t frame = 0; frame < cfg.n_frames; ++frame) {
        const double t = cfg.temperature.at(frame);
        for (std::uint32_t s = 0; s < cfg.steps_per_frame; ++s) sim.step(t);
        traj.temperatures.push_back(t);
        traj.frames.push_back(sim.state().positions);
        if (sink) sink(frame, t, sim.state().positions);
    }
    return traj;
}

std::vector<SweepEntry> sweep_plan(const SimConfig& base, double t_min, double t_max, double t_step) {
    if (!(t_step > 0.0) || !(t_max >= t_min)) {
        throw std::invalid_argument("sweep: require t_step > 0 and t_max >= t_min");
    }
    const double span = (t_max - t_min) / t_step;
    const double count = std::round(span);
    if (std::abs(span - count) > 1e-9) throw std::invalid_argument("sweep: t_step must divide t_max - t_min");
    std::vector<SweepEntry> plan;
    for (std::uint32_t i = 0; i <= static_cast<std::uint32_t>(count); ++i) {
        plan.push_back({i, t_min + i * t_step, base.seed ^ mix64(i)});
    }
    return plan;
}

SimConfig sweep_config(const SimConfig& base, const SweepEntry& entry) {
    SimConfig cfg = base;
    cfg.temperature = TemperatureSchedule::fixed(entry.temperature);
    cfg.seed = entry.seed;
    return cfg;
}

std::vector<SweepRun> sweep(const SimConfig& base, double t_min, double t_max, double t_step, unsigned jobs) {
    const auto plan = sweep_plan(base, t_min, t_max, t_step);
    std::vector<SweepRun> runs(plan.size());
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto worker = [&] {
        for (std::size_t i = next++; i < plan.size(); i = next++) {
            try {
                runs[i] = {plan[i], run(sweep_config(base, plan[i]))};
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
            }
        }
    };
    const unsigned n_threads = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(plan.size())));
    if (n_threads == 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (unsigned t = 0; t < n_threads; ++t) pool.emplace_back(worker);
    }
    if (failure) std::rethrow_exception(failure);
    return runs;
}

// ---- binary IO --------------------------------------------------------------

namespace {

constexpr char kMagic[4] = {'M', 'T', 'S', 'W'};
constexpr char kAbortMarker[8] = {'M', 'T', 'S', 'W', 'A', 'B', 'R', 'T'};
constexpr std::uint32_t kVersion = 1;
constexpr std::size_t kHeaderBytes = 4 + 4 + 8 + 4 + 4 + 4 + 8;

template <class T>
void put_le(std::ostream& out, T value) {
    static_assert(std::is_trivially_copyable_v<T>);
    unsigned char bytes[sizeof(T)];
    std::memcpy(bytes, &value, sizeof(T));
    if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
    out.write(reinterpret_cast<const char*>(bytes), sizeof(T));
}

void write_header(std::ostream& out, const TrajectoryHeader& h) {
    out.write(kMagic, 4);
    put_le(out, kVersion);
    put_le(out, h.config_hash);
    put_le(out, h.n_filaments);
    put_le(out, h.sites_per_filament);
    put_le(out, h.n_frames);
    put_le(out, h.box_side);
}

class Reader {
public:
    Reader(std::string name, std::string data) : name_(std::move(name)), data_(std::move(data)) {}

    template <class T>
    T get(const char* what) {
        if (data_.size() - pos_ < sizeof(T)) {
            throw FormatError(name_ + ": truncated at byte offset " + std::to_string(pos_) + " while reading " + what);
        }
        unsigned char bytes[sizeof(T)];
        std::memcpy(bytes, data_.data() + pos_, sizeof(T));
        if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
        T v;
        std::memcpy(&v, bytes, sizeof(T));
        pos_ += sizeof(T);
        return v;
    }
    std::size_t pos() const { return pos_; }
    std::size_t remaining() const { return data_.size() - pos_; }
    std::string_view rest() const { return std::string_view(data_).substr(pos_); }
    const std::string& name() const { return name_; }

private:
    std::string name_;
    std::string data_;
    std::size_t pos_ = 0;
};

}  // namespace

TrajectoryWriter::TrajectoryWriter(const std::filesystem::path& path, const TrajectoryHeader& header)
    : path_(path), out_(path, std::ios::binary | std::ios::trunc), header_(header) {
    if (!out_) throw std::runtime_error("cannot open " + path.string() + " for writing");
    write_header(out_, header_);
}

void TrajectoryWriter::write_frame(double temperature, std::span<const Vec2> positions) {
    if (positions.size() != std::size_t{header_.n_filaments} * header_.sites_per_filament) {
        throw std::invalid_argument("write_frame: position count does not match header");
    }
    put_le(out_, temperature);
    for (const Vec2& p : positions) {
        put_le(out_, p.x);
        put_le(out_, p.y);
    }
    ++written_;
}

void TrajectoryWriter::abort(std::uint64_t step) {
    out_.write(kAbortMarker, 8);
    put_le(out_, step);
    out_.seekp(kHeaderBytes - 12);
    put_le(out_, written_);
    out_.seekp(0, std::ios::end);
    close();
}

void TrajectoryWriter::close() {
    if (out_.is_open()) {
        out_.flush();
        if (!out_) throw std::runtime_error("write failed for " + path_.string());
        out_.close();
    }
}

void write_trajectory(const std::filesystem::path& path, const Trajectory& traj) {
    TrajectoryHeader h = traj.header;
    h.n_frames = static_cast<std::uint32_t>(traj.frames.size());
    TrajectoryWriter w(path, h);
    for (std::size_t f = 0; f < traj.frames.size(); ++f) w.write_frame(traj.temperatures[f], traj.frames[f]);
    if (traj.aborted) {
        w.abort(traj.abort_step);
    } else {
        w.close();
    }
}

Trajectory read_trajectory(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError(path.string() + ": cannot open");
    std::stringstream ss;
    ss << in.rdbuf();
    Reader r(path.string(), ss.str());

    char magic[4];
    for (char& c : magic) c = r.get<char>("magic");
    if (std::memcmp(magic, kMagic, 4) != 0) throw FormatError(path.string() + ": bad magic at byte offset 0");
    const auto version = r.get<std::uint32_t>("version");
    if (version != kVersion) {
        throw FormatError(path.string() + ": unsupported version " + std::to_string(version) + " at byte offset 4");
    }
    Trajectory t;
    t.header.config_hash = r.get<std::uint64_t>("config hash");
    t.header.n_filaments = r.get<std::uint32_t>("n_filaments");
    t.header.sites_per_filament = r.get<std::uint32_t>("sites_per_filament");
    t.header.n_frames = r.get<std::uint32_t>("n_frames");
    t.header.box_side = r.get<double>("box_side");
    if (!(t.header.box_side > 0.0)) throw FormatError(path.string() + ": invalid box_side in header");

    const std::size_t n_sites = std::size_t{t.header.n_filaments} * t.header.sites_per_filament;
    const std::size_t frame_bytes = 8 + 16 * n_sites;
    if (r.remaining() / frame_bytes < t.header.n_frames) {
        const std::size_t complete = r.remaining() / frame_bytes;
        throw FormatError(path.string() + ": truncated at byte offset " +
                          std::to_string(r.pos() + complete * frame_bytes + r.remaining() % frame_bytes) +
                          " (header declares " + std::to_string(t.header.n_frames) + " frames, found " +
                          std::to_string(complete) + ")");
    }
    t.temperatures.reserve(t.header.n_frames);
    t.frames.reserve(t.header.n_frames);
    for (std::uint32_t f = 0; f < t.header.n_frames; ++f) {
        t.temperatures.push_back(r.get<double>("temperature"));
        std::vector<Vec2> pos(n_sites);
        for (Vec2& p : pos) {
            p.x = r.get<double>("x");
            p.y = r.get<double>("y");
        }
        t.frames.push_back(std::move(pos));
    }
    if (r.remaining() > 0) {
        if (r.remaining() == 16 && r.rest().substr(0, 8) == std::string_view(kAbortMarker, 8)) {
            for (int i = 0; i < 8; ++i) r.get<char>("abort marker");
            t.aborted = true;
            t.abort_step = r.get<std::uint64_t>("abort step");
        } else {
            throw FormatError(path.string() + ": unexpected trailing data at byte offset " + std::to_string(r.pos()));
        }
    }
    return t;
}

}  // namespace mtswarm
