#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "mtswarm/physics.hpp"
#include "mtswarm/rng.hpp"
#include "mtswarm/vec2.hpp"

namespace mtswarm {

/// Constants of the temperature-controlled DNA duplex potential.
///
///   U(r) = eps / (cutoff - m)^2 * (r - m)^2 - eps,   r <= cutoff
///   eps(T) = scale * (delta_h - T * delta_s)
///
/// The well sits at r = m with depth eps and the potential reaches zero at
/// the cutoff (2 sigma by default).
struct DnaPotentialParams {
    double sigma = 1.0;
    double m = 1.5;
    double delta_h = 400.0;
    double delta_s = 1.0;
    double cutoff = 2.0;
    double scale = 1.0;

    void validate() const;
    double melting_temperature() const { return delta_h / delta_s; }
};

/// Filament mechanics and the non-DNA interaction constants.
struct MechanicalParams {
    double kappa_bend = 30000.0;
    double k_tension = 200000.0;
    double l0 = 1.0;
    double f_drive = 500.0;
    double noise_amp = 5000.0;
    double lj_epsilon = 100.0;
    double lj_sigma = 1.0;
    double lj_cutoff = 1.122462048309373;  // 2^(1/6) lj_sigma: purely repulsive

    void validate() const;
};

struct PotentialParams {
    DnaPotentialParams dna;
    MechanicalParams mech;

    /// Largest inter-filament interaction range.
    double interaction_cutoff() const { return std::max(dna.cutoff, mech.lj_cutoff); }
};

/// Free energy of duplexing eps(T) = scale * (dH - T dS). Non-positive above melting.
double duplex_free_energy(double temperature, const DnaPotentialParams& p);

/// U_dna(r); requires 0 < r <= cutoff.
double dna_pair_potential(double r, double eps, const DnaPotentialParams& p);

/// Force on a site from its DNA partner. `r_vec` is partner - site; the
/// force points toward the partner when r > m. Throws for r_vec = 0.
Vec2 dna_pair_force(Vec2 r_vec, double eps, const DnaPotentialParams& p);

/// Truncated-and-shifted Lennard-Jones energy; zero at and beyond lj_cutoff.
double lj_pair_potential(double r, const MechanicalParams& p);

/// Force on a site from a neighbour at displacement `r_vec` (neighbour - site).
Vec2 lj_pair_force(Vec2 r_vec, const MechanicalParams& p);

/// U_bend = kappa / l0 * sum_j (1 - cos theta_j) over interior joints.
double bend_energy(std::span<const Vec2> sites, const MechanicalParams& p, const SimBox& box);
/// Adds -grad U_bend to `out`. Filaments with fewer than 3 sites contribute nothing.
void add_bend_forces(std::span<const Vec2> sites, const MechanicalParams& p, const SimBox& box,
                     std::span<Vec2> out);
std::vector<Vec2> bend_forces(const Filament& f, const MechanicalParams& p, const SimBox& box);

/// U_tension = k/2 * sum_j (|b_j| - l0)^2 over bonds.
double tension_energy(std::span<const Vec2> sites, const MechanicalParams& p, const SimBox& box);
void add_tension_forces(std::span<const Vec2> sites, const MechanicalParams& p, const SimBox& box,
                        std::span<Vec2> out);
std::vector<Vec2> tension_forces(const Filament& f, const MechanicalParams& p, const SimBox& box);

/// Kinesin propulsion: f_drive along each site's tangent toward the leading end.
void add_drive_forces(std::span<const Vec2> sites, const MechanicalParams& p, const SimBox& box,
                      std::span<Vec2> out);
std::vector<Vec2> drive_forces(const Filament& f, const MechanicalParams& p, const SimBox& box);

/// i.i.d. Gaussian components with standard deviation `noise_amp`, drawn in
/// site order (x then y) from `rng`.
std::vector<Vec2> random_forces(std::size_t n_sites, double noise_amp, CounterRng& rng);

/// Unordered inter-filament site pair, a < b, with minimum-image displacement b - a.
struct SitePair {
    std::uint32_t a = 0;
    std::uint32_t b = 0;
    double distance = 0.0;
    Vec2 displacement;
};

/// Selects force terms; everything is on by default.
struct ForceTerms {
    bool bend = true;
    bool tension = true;
    bool drive = true;
    bool lj = true;
    bool dna = true;
    bool noise = true;
};

/// Random forces for one step: filament f draws from `step_stream.substream(f)`
/// via random_forces, so each draw is keyed by (step, filament, site).
std::vector<Vec2> draw_step_noise(std::size_t n_filaments, std::size_t sites_per_filament, double noise_amp,
                                  const CounterRng& step_stream);

/// Sum of bend, tension, drive, LJ, DNA and random forces on every site.
/// `pairs` must contain every inter-filament pair within interaction_cutoff().
/// `noise` holds the step's random forces (empty for none). The DNA term is
/// skipped entirely when eps(T) <= 0.
void total_forces(const SwarmState& state, const PotentialParams& params, double temperature,
                  std::span<const SitePair> pairs, std::span<const Vec2> noise, const SimBox& box,
                  std::span<Vec2> out, const ForceTerms& terms = {});

/// Conservative energy (bend + tension + LJ + DNA) matching total_forces with noise and drive off.
double total_energy(const SwarmState& state, const PotentialParams& params, double temperature,
                    std::span<const SitePair> pairs, const SimBox& box, const ForceTerms& terms = {});

}  // namespace mtswarm
