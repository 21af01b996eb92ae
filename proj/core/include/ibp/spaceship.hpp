#pragma once

#include <array>
#include <iosfwd>
#include <vector>

#include "ibp/rng.hpp"
#include "ibp/tensor.hpp"

namespace ibp {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    Vec2 operator+(Vec2 o) const { return {x + o.x, y + o.y}; }
    Vec2 operator-(Vec2 o) const { return {x - o.x, y - o.y}; }
    Vec2 operator*(double s) const { return {x * s, y * s}; }
    double norm() const;
};

inline constexpr std::size_t kPlanetCount = 5;

struct Planet {
    Vec2 position;
    double mass = 0.0;
};

/// World state for the piloting task: the ship plus five stationary planets.
/// The target sits at the origin for every scene.
struct Scene {
    Vec2 ship_position;
    Vec2 ship_velocity;
    double ship_mass = 0.0;
    std::array<Planet, kPlanetCount> planets;

    /// Fixed observation layout: ship pos(2), vel(2), mass(1), then per
    /// planet pos(2) + mass(1). 23 values total.
    static constexpr std::size_t kObservationWidth = 5 + 3 * kPlanetCount;
    Tensor observation() const;
    static Scene from_observation(const Tensor& obs);
};

struct ThrustAction {
    Vec2 force;
};

struct SpaceshipConfig {
    double fuel_price = 0.0002;     // cost units per force unit over the threshold
    double fuel_threshold = 8.0;    // free-thrust magnitude
    double noise_scale = 0.05;      // std of the multiplicative control noise
    double gravity = 1.0;
    double dt = 0.005;              // per substep
    int substeps = 11;              // ballistic substeps per action
    double softening = 0.25;        // gravitational softening length

    // Scene distribution.
    double ship_radius_min = 0.6, ship_radius_max = 1.0;
    double ship_mass_min = 0.004, ship_mass_max = 0.36;
    double planet_radius_min = 0.4, planet_radius_max = 1.0;
    double planet_mass_min = 0.08, planet_mass_max = 0.4;
};

/// Draws a scene: ship at a uniform angle and radius, initially stationary;
/// five planets likewise; masses uniform in their ranges.
Scene sample_scene(Rng& rng, const SpaceshipConfig& config);

/// Softened Newtonian field: sum over planets of
/// G * m * (p - x) / (|p - x|^2 + eps^2)^{3/2}.
Vec2 gravity_accel(const Scene& scene, Vec2 at_position, const SpaceshipConfig& config);

double fuel_cost(double force_magnitude, double price, double threshold = 8.0);

struct ActionOutcome {
    std::vector<Scene> trajectory;  // one entry per substep
    Scene next;
    double fuel = 0.0;
    Vec2 noise;  // multiplier offsets actually drawn: effective F = F * (1 + noise)
};

/// Fires the thrusters once (velocity impulse dv = F_eff * dt / m), then
/// integrates ballistic motion with semi-implicit Euler for the configured
/// substeps. Control noise is multiplicative per component.
ActionOutcome apply_action(const Scene& scene, const ThrustAction& action, Rng& rng,
                           const SpaceshipConfig& config);

/// Replays an action under pinned noise multiplier offsets.
ActionOutcome apply_action_with_noise(const Scene& scene, const ThrustAction& action, Vec2 noise,
                                      const SpaceshipConfig& config);

/// Episode objective: accumulated fuel plus the final distance to the target.
double task_loss(const std::vector<double>& episode_fuel_costs, const Scene& final_scene);

/// Kinetic plus softened potential energy of the ship; used by the energy
/// drift checks.
double mechanical_energy(const Scene& scene, const SpaceshipConfig& config);

// Structured-text serialization, one record per body.
void write_scene(std::ostream& os, const Scene& scene);
Scene read_scene(std::istream& is);

}  // namespace ibp
