#include "mtswarm/physics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "mtswarm/errors.hpp"
#include "mtswarm/rng.hpp"

namespace mtswarm {

void SimBox::validate() const {
    if (!(side > 4.0) || !std::isfinite(side)) {
        throw std::invalid_argument("box side must exceed 4 sigma, got " + std::to_string(side));
    }
}

Vec2 SimBox::wrap(Vec2 p) const {
    auto wrap1 = [this](double v) {
        if (v >= 0.0 && v < side) return v;
        double w = v - side * std::floor(v / side);
        // floor can round v/side up to an integer for tiny negative v
        if (w >= side) w -= side;
        if (w < 0.0) w = 0.0;
        return w;
    };
    return {wrap1(p.x), wrap1(p.y)};
}


std::uint64_t CounterRng::below(std::uint64_t n) {
    if (n == 0) throw std::invalid_argument("CounterRng::below: n must be positive");
    const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
    std::uint64_t v = next_u64();
    while (v >= limit) v = next_u64();
    return v % n;
}

double CounterRng::normal() {
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    const double u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double phi = 2.0 * M_PI * u2;
    spare_ = r * std::sin(phi);
    has_spare_ = true;
    return r * std::cos(phi);
}

Filament SwarmState::extract(std::size_t f) const {
    auto s = filament(f);
    return {static_cast<int>(f), std::vector<Vec2>(s.begin(), s.end())};
}

void FrictionParams::validate() const {
    if (!(gamma_par > 0.0)) throw ConfigError("gamma_par", "gamma_par must be positive");
    if (!(gamma_perp > 0.0)) throw ConfigError("gamma_perp", "gamma_perp must be positive");
}

Mat2 site_friction_inverse(Vec2 tangent, const FrictionParams& fr) {
    const double n = norm(tangent);
    if (n == 0.0 || !std::isfinite(n)) {
        throw DegenerateFilament("zero local tangent: filament sites coincide");
    }
    if (std::abs(n - 1.0) > 1e-9) {
        throw std::invalid_argument("site_friction_inverse: tangent is not a unit vector");
    }
    const Mat2 uu = Mat2::outer(tangent);
    return (1.0 / fr.gamma_par) * uu + (1.0 / fr.gamma_perp) * (Mat2::identity() - uu);
}

void site_tangents(std::span<const Vec2> sites, const SimBox& box, std::span<Vec2> out) {
    const std::size_t n = sites.size();
    if (n < 2) throw DegenerateFilament("filament needs at least two sites");
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t fwd = i == 0 ? 0 : i - 1;
        const std::size_t back = i + 1 == n ? n - 1 : i + 1;
        const Vec2 chord = minimum_image(sites[back], sites[fwd], box);
        const double len = norm(chord);
        if (!(len > 0.0)) throw DegenerateFilament("coincident neighbouring sites");
        out[i] = chord / len;
    }
}

namespace {

// v = zeta^-1 F for every site; isotropic drag skips the tangent computation.
void velocities(const SwarmState& state, std::span<const Vec2> forces, const FrictionParams& fr,
                const SimBox& box, std::vector<Vec2>& tangents, std::span<Vec2> vel) {
    const bool isotropic = fr.gamma_par == fr.gamma_perp;
    const std::size_t per = state.sites_per_filament;
    for (std::size_t f = 0; f < state.n_filaments; ++f) {
        const std::size_t base = f * per;
        if (isotropic) {
            for (std::size_t s = 0; s < per; ++s) vel[base + s] = forces[base + s] / fr.gamma_par;
            continue;
        }
        site_tangents(state.filament(f), box, tangents);
        for (std::size_t s = 0; s < per; ++s) {
            vel[base + s] = site_friction_inverse(tangents[s], fr) * forces[base + s];
        }
    }
}

void check_finite(std::span<const Vec2> forces) {
    for (std::size_t i = 0; i < forces.size(); ++i) {
        if (!is_finite(forces[i])) {
            throw NumericError(0, "non-finite force on site " + std::to_string(i));
        }
    }
}

}  // namespace

StepReport midstep_advance(SwarmState& state, const ForceEvaluator& force_eval, double dt,
                           const FrictionParams& fr, const SimBox& box) {
    if (!(dt > 0.0)) throw std::invalid_argument("midstep_advance: dt must be positive");
    const std::size_t n = state.n_sites();
    std::vector<Vec2> forces(n), vel(n), tangents(state.sites_per_filament);

    force_eval(state, forces);
    check_finite(forces);
    velocities(state, forces, fr, box, tangents, vel);

    SwarmState half = state;
    for (std::size_t i = 0; i < n; ++i) half.positions[i] = box.wrap(state.positions[i] + 0.5 * dt * vel[i]);

    force_eval(half, forces);
    check_finite(forces);
    velocities(half, forces, fr, box, tangents, vel);

    StepReport report;
    for (std::size_t i = 0; i < n; ++i) {
        const Vec2 step = dt * vel[i];
        report.max_displacement = std::max({report.max_displacement, std::abs(step.x), std::abs(step.y)});
        state.positions[i] = box.wrap(state.positions[i] + step);
    }
    return report;
}

}  // namespace mtswarm
