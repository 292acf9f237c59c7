#include "mtswarm/config.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "mtswarm/errors.hpp"

namespace mtswarm {

namespace {

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
}

double parse_double(std::string_view key, std::string_view text) {
    text = trim(text);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc{} || ptr != text.data() + text.size() || !std::isfinite(v)) {
        throw ConfigError(std::string(key), "invalid number for '" + std::string(key) + "': '" + std::string(text) + "'");
    }
    return v;
}

template <class Int>
Int parse_int(std::string_view key, std::string_view text) {
    text = trim(text);
    Int v{};
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc{} || ptr != text.data() + text.size()) {
        throw ConfigError(std::string(key), "invalid integer for '" + std::string(key) + "': '" + std::string(text) + "'");
    }
    return v;
}

std::string fmt_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace

TemperatureSchedule TemperatureSchedule::fixed(double kelvin) {
    return from_steps({{0u, kelvin}});
}

TemperatureSchedule TemperatureSchedule::from_steps(std::vector<std::pair<std::uint32_t, double>> steps) {
    if (steps.empty() || steps.front().first != 0) {
        throw ConfigError("temperature_schedule", "temperature schedule must start at frame 0");
    }
    for (std::size_t i = 0; i < steps.size(); ++i) {
        if (!(steps[i].second > 0.0) || !std::isfinite(steps[i].second)) {
            throw ConfigError("temperature_schedule", "temperatures must be positive");
        }
        if (i > 0 && steps[i].first <= steps[i - 1].first) {
            throw ConfigError("temperature_schedule", "schedule frames must strictly increase");
        }
    }
    TemperatureSchedule s;
    s.steps_ = std::move(steps);
    return s;
}

TemperatureSchedule TemperatureSchedule::parse(std::string_view text) {
    std::vector<std::pair<std::uint32_t, double>> steps;
    while (!trim(text).empty()) {
        const auto comma = text.find(',');
        const std::string_view item = trim(text.substr(0, comma));
        const auto colon = item.find(':');
        if (colon == std::string_view::npos) {
            throw ConfigError("temperature_schedule", "expected frame:value, got '" + std::string(item) + "'");
        }
        steps.emplace_back(parse_int<std::uint32_t>("temperature_schedule", item.substr(0, colon)),
                           parse_double("temperature_schedule", item.substr(colon + 1)));
        if (comma == std::string_view::npos) break;
        text.remove_prefix(comma + 1);
    }
    return from_steps(std::move(steps));
}

double TemperatureSchedule::at(std::uint32_t frame) const {
    double value = steps_.front().second;
    for (const auto& [f, v] : steps_) {
        if (f > frame) break;
        value = v;
    }
    return value;
}

std::string TemperatureSchedule::to_string() const {
    std::string out;
    for (const auto& [f, v] : steps_) {
        if (!out.empty()) out += ',';
        out += std::to_string(f) + ':' + fmt_double(v);
    }
    return out;
}

const std::vector<std::string>& config_keys() {
    static const std::vector<std::string> keys = {
        "n_filaments", "sites_per_filament", "box_side", "dt", "steps_per_frame", "n_frames", "seed",
        "temperature", "temperature_schedule", "sigma", "m", "delta_h", "delta_s", "dna_scale",
        "dna_cutoff", "lj_epsilon", "lj_sigma", "lj_cutoff", "kappa_bend", "k_tension", "l0",
        "f_drive", "noise_amp", "gamma_par", "gamma_perp"};
    return keys;
}

void SimConfig::set(std::string_view key, std::string_view value) {
    auto& dna = potentials.dna;
    auto& mech = potentials.mech;
    auto d = [&](double& field) { field = parse_double(key, value); };

    if (key == "n_filaments") n_filaments = parse_int<std::uint32_t>(key, value);
    else if (key == "sites_per_filament") sites_per_filament = parse_int<std::uint32_t>(key, value);
    else if (key == "box_side") d(box_side);
    else if (key == "dt") d(dt);
    else if (key == "steps_per_frame") steps_per_frame = parse_int<std::uint32_t>(key, value);
    else if (key == "n_frames") n_frames = parse_int<std::uint32_t>(key, value);
    else if (key == "seed") seed = parse_int<std::uint64_t>(key, value);
    else if (key == "temperature") temperature = TemperatureSchedule::fixed(parse_double(key, value));
    else if (key == "temperature_schedule") temperature = TemperatureSchedule::parse(value);
    else if (key == "sigma") d(dna.sigma);
    else if (key == "m") d(dna.m);
    else if (key == "delta_h") d(dna.delta_h);
    else if (key == "delta_s") d(dna.delta_s);
    else if (key == "dna_scale") d(dna.scale);
    else if (key == "dna_cutoff") d(dna.cutoff);
    else if (key == "lj_epsilon") d(mech.lj_epsilon);
    else if (key == "lj_sigma") d(mech.lj_sigma);
    else if (key == "lj_cutoff") d(mech.lj_cutoff);
    else if (key == "kappa_bend") d(mech.kappa_bend);
    else if (key == "k_tension") d(mech.k_tension);
    else if (key == "l0") d(mech.l0);
    else if (key == "f_drive") d(mech.f_drive);
    else if (key == "noise_amp") d(mech.noise_amp);
    else if (key == "gamma_par") d(friction.gamma_par);
    else if (key == "gamma_perp") d(friction.gamma_perp);
    else throw ConfigError(std::string(key), "unknown config key '" + std::string(key) + "'");
}

void SimConfig::validate() const {
    if (n_frames < 1) throw ConfigError("n_frames", "n_frames must be >= 1");
    if (n_filaments > 0 && sites_per_filament < 2) {
        throw ConfigError("sites_per_filament", "sites_per_filament must be >= 2");
    }
    if (!(dt > 0.0) || !std::isfinite(dt)) throw ConfigError("dt", "dt must be positive");
    if (!(box_side > 4.0) || !std::isfinite(box_side)) throw ConfigError("box_side", "box_side must exceed 4");
    potentials.dna.validate();
    potentials.mech.validate();
    friction.validate();
    if (potentials.interaction_cutoff() > box_side / 3.0) {
        throw ConfigError("box_side", "box too small for the interaction cutoff (need 3 cells per axis)");
    }
}

std::string SimConfig::to_text() const {
    const auto& dna = potentials.dna;
    const auto& mech = potentials.mech;
    std::ostringstream os;
    os << "n_filaments = " << n_filaments << '\n'
       << "sites_per_filament = " << sites_per_filament << '\n'
       << "box_side = " << fmt_double(box_side) << '\n'
       << "dt = " << fmt_double(dt) << '\n'
       << "steps_per_frame = " << steps_per_frame << '\n'
       << "n_frames = " << n_frames << '\n'
       << "seed = " << seed << '\n';
    if (temperature.is_fixed()) {
        os << "temperature = " << fmt_double(temperature.at(0)) << '\n';
    } else {
        os << "temperature_schedule = " << temperature.to_string() << '\n';
    }
    os << "sigma = " << fmt_double(dna.sigma) << '\n'
       << "m = " << fmt_double(dna.m) << '\n'
       << "delta_h = " << fmt_double(dna.delta_h) << '\n'
       << "delta_s = " << fmt_double(dna.delta_s) << '\n'
       << "dna_scale = " << fmt_double(dna.scale) << '\n'
       << "dna_cutoff = " << fmt_double(dna.cutoff) << '\n'
       << "lj_epsilon = " << fmt_double(mech.lj_epsilon) << '\n'
       << "lj_sigma = " << fmt_double(mech.lj_sigma) << '\n'
       << "lj_cutoff = " << fmt_double(mech.lj_cutoff) << '\n'
       << "kappa_bend = " << fmt_double(mech.kappa_bend) << '\n'
       << "k_tension = " << fmt_double(mech.k_tension) << '\n'
       << "l0 = " << fmt_double(mech.l0) << '\n'
       << "f_drive = " << fmt_double(mech.f_drive) << '\n'
       << "noise_amp = " << fmt_double(mech.noise_amp) << '\n'
       << "gamma_par = " << fmt_double(friction.gamma_par) << '\n'
       << "gamma_perp = " << fmt_double(friction.gamma_perp) << '\n';
    return os.str();
}

std::uint64_t SimConfig::hash() const {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : to_text()) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

SimConfig parse_config(std::string_view text) {
    SimConfig cfg;
    std::size_t line_no = 0;
    while (!text.empty()) {
        const auto nl = text.find('\n');
        std::string_view line = text.substr(0, nl);
        text.remove_prefix(nl == std::string_view::npos ? text.size() : nl + 1);
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) {
            throw ConfigError(std::string(line), "line " + std::to_string(line_no) + ": expected 'key = value'");
        }
        cfg.set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
    cfg.validate();
    return cfg;
}

SimConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("", "cannot read config file " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

}  // namespace mtswarm
