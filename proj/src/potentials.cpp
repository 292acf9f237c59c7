#include "mtswarm/potentials.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

#include "mtswarm/errors.hpp"

namespace mtswarm {

void DnaPotentialParams::validate() const {
    if (!(sigma > 0.0)) throw ConfigError("sigma", "sigma must be positive");
    if (!(m > 0.0 && m < cutoff)) throw ConfigError("m", "require 0 < m < dna_cutoff");
    if (!(delta_s > 0.0)) throw ConfigError("delta_s", "delta_s must be positive");
    if (!std::isfinite(delta_h)) throw ConfigError("delta_h", "delta_h must be finite");
    if (!(scale >= 0.0) || !std::isfinite(scale)) throw ConfigError("dna_scale", "dna_scale must be >= 0");
}

void MechanicalParams::validate() const {
    auto positive = [](double v, const char* key) {
        if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError(key, std::string(key) + " must be positive");
    };
    auto non_negative = [](double v, const char* key) {
        if (!(v >= 0.0) || !std::isfinite(v)) throw ConfigError(key, std::string(key) + " must be >= 0");
    };
    positive(kappa_bend, "kappa_bend");
    positive(k_tension, "k_tension");
    positive(l0, "l0");
    non_negative(f_drive, "f_drive");
    non_negative(noise_amp, "noise_amp");
    positive(lj_epsilon, "lj_epsilon");
    positive(lj_sigma, "lj_sigma");
    if (!(lj_cutoff >= lj_sigma)) throw ConfigError("lj_cutoff", "lj_cutoff must be >= lj_sigma");
}

double duplex_free_energy(double temperature, const DnaPotentialParams& p) {
    return p.scale * (p.delta_h - temperature * p.delta_s);
}

double dna_pair_potential(double r, double eps, const DnaPotentialParams& p) {
    if (!(r > 0.0)) throw std::invalid_argument("dna_pair_potential: r must be positive");
    if (r > p.cutoff) throw std::invalid_argument("dna_pair_potential: r beyond cutoff");
    const double w = p.cutoff - p.m;
    return eps / (w * w) * (r - p.m) * (r - p.m) - eps;
}

Vec2 dna_pair_force(Vec2 r_vec, double eps, const DnaPotentialParams& p) {
    const double r = norm(r_vec);
    if (r == 0.0) throw std::invalid_argument("dna_pair_force: coincident sites");
    if (r > p.cutoff) throw std::invalid_argument("dna_pair_force: r beyond cutoff");
    const double w = p.cutoff - p.m;
    const double du_dr = 2.0 * eps / (w * w) * (r - p.m);
    return (du_dr / r) * r_vec;
}

double lj_pair_potential(double r, const MechanicalParams& p) {
    if (r >= p.lj_cutoff) return 0.0;
    auto lj = [&p](double x) {
        const double s6 = std::pow(p.lj_sigma / x, 6);
        return 4.0 * p.lj_epsilon * (s6 * s6 - s6);
    };
    return lj(r) - lj(p.lj_cutoff);
}

Vec2 lj_pair_force(Vec2 r_vec, const MechanicalParams& p) {
    const double r2 = norm2(r_vec);
    if (r2 == 0.0) throw std::invalid_argument("lj_pair_force: coincident sites");
    if (r2 >= p.lj_cutoff * p.lj_cutoff) return {};
    const double s2 = p.lj_sigma * p.lj_sigma / r2;
    const double s6 = s2 * s2 * s2;
    // dU/dr / r, so that F_site = (dU/dr / r) * r_vec
    const double du_dr_over_r = -24.0 * p.lj_epsilon * (2.0 * s6 * s6 - s6) / r2;
    return du_dr_over_r * r_vec;
}

double bend_energy(std::span<const Vec2> sites, const MechanicalParams& p, const SimBox& box) {
    double u = 0.0;
    for (std::size_t j = 1; j + 1 < sites.size(); ++j) {
        const Vec2 a = minimum_image(sites[j - 1], sites[j], box);
        const Vec2 b = minimum_image(sites[j], sites[j + 1], box);
        u += 1.0 - dot(a, b) / (norm(a) * norm(b));
    }
    return p.kappa_bend / p.l0 * u;
}

void add_bend_forces(std::span<const Vec2> sites, const MechanicalParams& p, const SimBox& box,
                     std::span<Vec2> out) {
    const double k = p.kappa_bend / p.l0;
    for (std::size_t j = 1; j + 1 < sites.size(); ++j) {
        const Vec2 a = minimum_image(sites[j - 1], sites[j], box);
        const Vec2 b = minimum_image(sites[j], sites[j + 1], box);
        const double la = norm(a);
        const double lb = norm(b);
        const Vec2 ua = a / la;
        const Vec2 ub = b / lb;
        const double c = dot(ua, ub);
        const Vec2 dcos_da = (ub - c * ua) / la;
        const Vec2 dcos_db = (ua - c * ub) / lb;
        out[j - 1] -= k * dcos_da;
        out[j] += k * (dcos_da - dcos_db);
        out[j + 1] += k * dcos_db;
    }
}

std::vector<Vec2> bend_forces(const Filament& f, const MechanicalParams& p, const SimBox& box) {
    std::vector<Vec2> out(f.sites.size());
    add_bend_forces(f.sites, p, box, out);
    return out;
}

double tension_energy(std::span<const Vec2> sites, const MechanicalParams& p, const SimBox& box) {
    double u = 0.0;
    for (std::size_t j = 0; j + 1 < sites.size(); ++j) {
        const double stretch = norm(minimum_image(sites[j], sites[j + 1], box)) - p.l0;
        u += 0.5 * p.k_tension * stretch * stretch;
    }
    return u;
}

void add_tension_forces(std::span<const Vec2> sites, const MechanicalParams& p, const SimBox& box,
                        std::span<Vec2> out) {
    for (std::size_t j = 0; j + 1 < sites.size(); ++j) {
        const Vec2 d = minimum_image(sites[j], sites[j + 1], box);
        const double len = norm(d);
        const Vec2 f = (p.k_tension * (len - p.l0) / len) * d;
        out[j] += f;
        out[j + 1] -= f;
    }
}

std::vector<Vec2> tension_forces(const Filament& f, const MechanicalParams& p, const SimBox& box) {
    std::vector<Vec2> out(f.sites.size());
    add_tension_forces(f.sites, p, box, out);
    return out;
}

void add_drive_forces(std::span<const Vec2> sites, const MechanicalParams& p, const SimBox& box,
                      std::span<Vec2> out) {
    if (p.f_drive == 0.0) return;
    Vec2 tangents[64];
    std::vector<Vec2> heap;
    std::span<Vec2> t;
    if (sites.size() <= 64) {
        t = std::span<Vec2>(tangents, sites.size());
    } else {
        heap.resize(sites.size());
        t = heap;
    }
    site_tangents(sites, box, t);
    for (std::size_t i = 0; i < sites.size(); ++i) out[i] += p.f_drive * t[i];
}

std::vector<Vec2> drive_forces(const Filament& f, const MechanicalParams& p, const SimBox& box) {
    std::vector<Vec2> out(f.sites.size());
    add_drive_forces(f.sites, p, box, out);
    return out;
}

std::vector<Vec2> random_forces(std::size_t n_sites, double noise_amp, CounterRng& rng) {
    if (!(noise_amp >= 0.0)) throw std::invalid_argument("random_forces: noise_amp must be >= 0");
    std::vector<Vec2> out(n_sites);
    if (noise_amp == 0.0) return out;
    for (auto& f : out) {
        f.x = noise_amp * rng.normal();
        f.y = noise_amp * rng.normal();
    }
    return out;
}

std::vector<Vec2> draw_step_noise(std::size_t n_filaments, std::size_t sites_per_filament, double noise_amp,
                                  const CounterRng& step_stream) {
    std::vector<Vec2> out;
    out.reserve(n_filaments * sites_per_filament);
    for (std::size_t f = 0; f < n_filaments; ++f) {
        CounterRng rng = step_stream.substream(f);
        const auto part = random_forces(sites_per_filament, noise_amp, rng);
        out.insert(out.end(), part.begin(), part.end());
    }
    return out;
}

void total_forces(const SwarmState& state, const PotentialParams& params, double temperature,
                  std::span<const SitePair> pairs, std::span<const Vec2> noise, const SimBox& box,
                  std::span<Vec2> out, const ForceTerms& terms) {
    std::fill(out.begin(), out.end(), Vec2{});
    const auto& mech = params.mech;
    const std::size_t per = state.sites_per_filament;

    for (std::size_t f = 0; f < state.n_filaments; ++f) {
        const auto sites = state.filament(f);
        const auto dst = out.subspan(f * per, per);
        if (terms.bend) add_bend_forces(sites, mech, box, dst);
        if (terms.tension) add_tension_forces(sites, mech, box, dst);
        if (terms.drive) add_drive_forces(sites, mech, box, dst);
    }
    if (terms.noise && !noise.empty()) {
        if (noise.size() != out.size()) throw std::invalid_argument("total_forces: noise size mismatch");
        for (std::size_t i = 0; i < out.size(); ++i) out[i] += noise[i];
    }

    const double eps = duplex_free_energy(temperature, params.dna);
    const bool dna_on = terms.dna && eps > 0.0;
    const double lj_cut2 = mech.lj_cutoff * mech.lj_cutoff;
    for (const SitePair& pr : pairs) {
        Vec2 f_on_a{};
        if (terms.lj && pr.distance * pr.distance < lj_cut2) f_on_a += lj_pair_force(pr.displacement, mech);
        if (dna_on && pr.distance <= params.dna.cutoff) f_on_a += dna_pair_force(pr.displacement, eps, params.dna);
        out[pr.a] += f_on_a;
        out[pr.b] -= f_on_a;
    }
}

double total_energy(const SwarmState& state, const PotentialParams& params, double temperature,
                    std::span<const SitePair> pairs, const SimBox& box, const ForceTerms& terms) {
    double u = 0.0;
    for (std::size_t f = 0; f < state.n_filaments; ++f) {
        const auto sites = state.filament(f);
        if (terms.bend) u += bend_energy(sites, params.mech, box);
        if (terms.tension) u += tension_energy(sites, params.mech, box);
    }
    const double eps = duplex_free_energy(temperature, params.dna);
    const bool dna_on = terms.dna && eps > 0.0;
    for (const SitePair& pr : pairs) {
        if (terms.lj) u += lj_pair_potential(pr.distance, params.mech);
        if (dna_on && pr.distance <= params.dna.cutoff) u += dna_pair_potential(pr.distance, eps, params.dna);
    }
    return u;
}

}  // namespace mtswarm
