#include "ibp/spaceship.hpp"

#include <cmath>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>

namespace ibp {

double Vec2::norm() const { return std::sqrt(x * x + y * y); }

Tensor Scene::observation() const {
    Tensor obs = Tensor::zeros({kObservationWidth});
    obs[0] = ship_position.x;
    obs[1] = ship_position.y;
    obs[2] = ship_velocity.x;
    obs[3] = ship_velocity.y;
    obs[4] = ship_mass;
    for (std::size_t p = 0; p < kPlanetCount; ++p) {
        obs[5 + 3 * p + 0] = planets[p].position.x;
        obs[5 + 3 * p + 1] = planets[p].position.y;
        obs[5 + 3 * p + 2] = planets[p].mass;
    }
    return obs;
}

Scene Scene::from_observation(const Tensor& obs) {
    if (obs.numel() != kObservationWidth)
        throw std::invalid_argument("Scene::from_observation: expected " +
                                    std::to_string(kObservationWidth) + " values, got " +
                                    std::to_string(obs.numel()));
    Scene s;
    s.ship_position = {obs[0], obs[1]};
    s.ship_velocity = {obs[2], obs[3]};
    s.ship_mass = obs[4];
    for (std::size_t p = 0; p < kPlanetCount; ++p) {
        s.planets[p].position = {obs[5 + 3 * p + 0], obs[5 + 3 * p + 1]};
        s.planets[p].mass = obs[5 + 3 * p + 2];
    }
    return s;
}

Scene sample_scene(Rng& rng, const SpaceshipConfig& config) {
    constexpr double kTau = 2.0 * 3.14159265358979323846;
    Scene s;
    double angle = rng.uniform(0.0, kTau);
    double radius = rng.uniform(config.ship_radius_min, config.ship_radius_max);
    s.ship_position = {radius * std::cos(angle), radius * std::sin(angle)};
    s.ship_velocity = {0.0, 0.0};
    s.ship_mass = rng.uniform(config.ship_mass_min, config.ship_mass_max);
    for (auto& planet : s.planets) {
        double a = rng.uniform(0.0, kTau);
        double r = rng.uniform(config.planet_radius_min, config.planet_radius_max);
        planet.position = {r * std::cos(a), r * std::sin(a)};
        planet.mass = rng.uniform(config.planet_mass_min, config.planet_mass_max);
    }
    return s;
}

Vec2 gravity_accel(const Scene& scene, Vec2 at_position, const SpaceshipConfig& config) {
    Vec2 acc;
    double eps2 = config.softening * config.softening;
    for (const Planet& p : scene.planets) {
        Vec2 d = p.position - at_position;
        double r2 = d.x * d.x + d.y * d.y + eps2;
        double inv = config.gravity * p.mass / (r2 * std::sqrt(r2));
        acc = acc + d * inv;
    }
    return acc;
}

double fuel_cost(double force_magnitude, double price, double threshold) {
    return std::max(0.0, (force_magnitude - threshold) * price);
}

namespace {
ActionOutcome integrate(const Scene& scene, Vec2 effective_force, Vec2 noise,
                        const SpaceshipConfig& config) {
    ActionOutcome out;
    out.noise = noise;
    Scene cur = scene;

    // Thrust is an instantaneous velocity impulse at the start of the action.
    Vec2 dv = effective_force * (config.dt / cur.ship_mass);
    cur.ship_velocity = cur.ship_velocity + dv;

    out.trajectory.reserve(static_cast<std::size_t>(config.substeps));
    for (int step = 0; step < config.substeps; ++step) {
        Vec2 acc = gravity_accel(cur, cur.ship_position, config);
        cur.ship_velocity = cur.ship_velocity + acc * config.dt;
        cur.ship_position = cur.ship_position + cur.ship_velocity * config.dt;
        out.trajectory.push_back(cur);
    }
    out.next = cur;
    out.fuel = fuel_cost(effective_force.norm(), config.fuel_price, config.fuel_threshold);
    return out;
}
}  // namespace

ActionOutcome apply_action(const Scene& scene, const ThrustAction& action, Rng& rng,
                           const SpaceshipConfig& config) {
    Vec2 noise{rng.normal(0.0, config.noise_scale), rng.normal(0.0, config.noise_scale)};
    return apply_action_with_noise(scene, action, noise, config);
}

ActionOutcome apply_action_with_noise(const Scene& scene, const ThrustAction& action, Vec2 noise,
                                      const SpaceshipConfig& config) {
    Vec2 effective{action.force.x * (1.0 + noise.x), action.force.y * (1.0 + noise.y)};
    return integrate(scene, effective, noise, config);
}

double task_loss(const std::vector<double>& episode_fuel_costs, const Scene& final_scene) {
    double total = 0.0;
    for (double f : episode_fuel_costs) total += f;
    return total + final_scene.ship_position.norm();
}

double mechanical_energy(const Scene& scene, const SpaceshipConfig& config) {
    double v2 = scene.ship_velocity.x * scene.ship_velocity.x +
                scene.ship_velocity.y * scene.ship_velocity.y;
    double e = 0.5 * scene.ship_mass * v2;
    double eps2 = config.softening * config.softening;
    for (const Planet& p : scene.planets) {
        Vec2 d = p.position - scene.ship_position;
        double r2 = d.x * d.x + d.y * d.y + eps2;
        e -= config.gravity * p.mass * scene.ship_mass / std::sqrt(r2);
    }
    return e;
}

void write_scene(std::ostream& os, const Scene& scene) {
    os.precision(17);
    os << "ship " << scene.ship_position.x << ' ' << scene.ship_position.y << ' '
       << scene.ship_velocity.x << ' ' << scene.ship_velocity.y << ' ' << scene.ship_mass << '\n';
    for (const Planet& p : scene.planets)
        os << "planet " << p.position.x << ' ' << p.position.y << ' ' << p.mass << '\n';
}

Scene read_scene(std::istream& is) {
    Scene s;
    std::string tag;
    if (!(is >> tag) || tag != "ship")
        throw std::runtime_error("read_scene: expected 'ship' record, got '" + tag + "'");
    if (!(is >> s.ship_position.x >> s.ship_position.y >> s.ship_velocity.x >> s.ship_velocity.y >>
          s.ship_mass))
        throw std::runtime_error("read_scene: malformed ship record");
    for (std::size_t i = 0; i < kPlanetCount; ++i) {
        if (!(is >> tag) || tag != "planet")
            throw std::runtime_error("read_scene: expected planet record " + std::to_string(i));
        if (!(is >> s.planets[i].position.x >> s.planets[i].position.y >> s.planets[i].mass))
            throw std::runtime_error("read_scene: malformed planet record " + std::to_string(i));
    }
    return s;
}

}  // namespace ibp
