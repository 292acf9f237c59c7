#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "mtswarm/vec2.hpp"

namespace mtswarm {

/// One microtubule: an ordered chain of sites. Site 0 is the leading end.
struct Filament {
    int id = 0;
    std::vector<Vec2> sites;
};

/// All filaments of one simulation, stored as a flat site array.
/// Site `s` of filament `f` lives at index f * sites_per_filament + s.
struct SwarmState {
    std::size_t n_filaments = 0;
    std::size_t sites_per_filament = 0;
    std::vector<Vec2> positions;

    SwarmState() = default;
    SwarmState(std::size_t filaments, std::size_t sites)
        : n_filaments(filaments), sites_per_filament(sites), positions(filaments * sites) {}

    std::size_t n_sites() const { return positions.size(); }
    std::size_t filament_of(std::size_t site) const { return site / sites_per_filament; }

    std::span<Vec2> filament(std::size_t f) {
        return {positions.data() + f * sites_per_filament, sites_per_filament};
    }
    std::span<const Vec2> filament(std::size_t f) const {
        return {positions.data() + f * sites_per_filament, sites_per_filament};
    }

    Filament extract(std::size_t f) const;

    friend bool operator==(const SwarmState&, const SwarmState&) = default;
};

/// Per-site drag coefficients along and across the local tangent.
struct FrictionParams {
    double gamma_par = 500.0;
    double gamma_perp = 1000.0;

    void validate() const;
};

/// Inverse friction tensor (1/g_par) u u^T + (1/g_perp)(I - u u^T).
/// `tangent` must be a unit vector; a zero tangent throws DegenerateFilament.
Mat2 site_friction_inverse(Vec2 tangent, const FrictionParams& fr);

/// Local unit tangents pointing toward the leading end (site 0).
/// End sites use their single bond; interior sites use the chord between neighbours.
void site_tangents(std::span<const Vec2> sites, const SimBox& box, std::span<Vec2> out);

/// Evaluates total per-site forces for a state into `out` (same length as positions).
using ForceEvaluator = std::function<void(const SwarmState&, std::span<Vec2>)>;

struct StepReport {
    double max_displacement = 0.0;
};

/// One midstep update:
///   r(t+1/2) = r(t) + dt/2 * v(t),   v = zeta^-1 F
///   r(t+1)   = r(t) + dt * v(t+1/2)
/// `force_eval` must return the same random-force contribution for both
/// evaluations within a step. Positions are wrapped into the box afterwards.
/// Throws NumericError on a non-finite force.
StepReport midstep_advance(SwarmState& state, const ForceEvaluator& force_eval, double dt,
                           const FrictionParams& fr, const SimBox& box);

}  // namespace mtswarm
