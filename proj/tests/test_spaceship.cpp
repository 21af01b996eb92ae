#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <sstream>

#include "ibp/spaceship.hpp"

using namespace ibp;

namespace {

// Reference integrator: same scheme at dt/100, used as the physics oracle.
Scene fine_integrate(const Scene& scene, Vec2 effective_force, const SpaceshipConfig& config,
                     int refine = 100) {
    SpaceshipConfig fine = config;
    fine.dt = config.dt / refine;
    fine.noise_scale = 0.0;
    Scene cur = scene;
    Vec2 dv = effective_force * (config.dt / cur.ship_mass);
    cur.ship_velocity = cur.ship_velocity + dv;
    for (int step = 0; step < config.substeps * refine; ++step) {
        Vec2 acc = gravity_accel(cur, cur.ship_position, fine);
        cur.ship_velocity = cur.ship_velocity + acc * fine.dt;
        cur.ship_position = cur.ship_position + cur.ship_velocity * fine.dt;
    }
    return cur;
}

}  // namespace

TEST_CASE("sample_scene: 10k samples stay in the documented ranges") {
    SpaceshipConfig cfg;
    Rng rng(2024);
    double ship_r_min = 1e9, ship_r_max = -1e9;
    for (int i = 0; i < 10000; ++i) {
        Scene s = sample_scene(rng, cfg);
        double r = s.ship_position.norm();
        ship_r_min = std::min(ship_r_min, r);
        ship_r_max = std::max(ship_r_max, r);
        CHECK(r >= 0.6);
        CHECK(r <= 1.0);
        CHECK(s.ship_mass >= 0.004);
        CHECK(s.ship_mass <= 0.36);
        CHECK(s.ship_velocity.norm() == 0.0);
        for (const Planet& p : s.planets) {
            double pr = p.position.norm();
            CHECK(pr >= 0.4);
            CHECK(pr <= 1.0);
            CHECK(p.mass >= 0.08);
            CHECK(p.mass <= 0.4);
        }
    }
    // The empirical extremes should hug the bounds.
    CHECK(ship_r_min < 0.61);
    CHECK(ship_r_max > 0.99);
}

TEST_CASE("sample_scene: same seed gives an identical scene") {
    SpaceshipConfig cfg;
    Rng a(7), b(7);
    Scene sa = sample_scene(a, cfg);
    Scene sb = sample_scene(b, cfg);
    CHECK(sa.observation() == sb.observation());
}

TEST_CASE("gravity_accel: single planet Newtonian limit") {
    SpaceshipConfig cfg;
    cfg.softening = 0.0;
    Scene s;
    s.planets.fill(Planet{{9.0, 9.0}, 0.0});  // zero-mass fillers away from the query point
    s.planets[0] = Planet{{2.0, 0.0}, 0.5};
    Vec2 a = gravity_accel(s, {0, 0}, cfg);
    CHECK(a.x == doctest::Approx(cfg.gravity * 0.5 / 4.0).epsilon(1e-14));
    CHECK(a.y == doctest::Approx(0.0).epsilon(1e-14));
}

TEST_CASE("gravity_accel: symmetric planets cancel") {
    SpaceshipConfig cfg;
    Scene s;
    s.planets.fill(Planet{{0, 0}, 0.0});
    s.planets[0] = Planet{{1.0, 0.0}, 0.3};
    s.planets[1] = Planet{{-1.0, 0.0}, 0.3};
    Vec2 a = gravity_accel(s, {0, 0}, cfg);
    CHECK(a.x == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(a.y == doctest::Approx(0.0).epsilon(1e-15));
}

TEST_CASE("gravity_accel: matches a naive per-planet summation oracle") {
    SpaceshipConfig cfg;
    Rng rng(31);
    for (int it = 0; it < 50; ++it) {
        Scene s = sample_scene(rng, cfg);
        Vec2 q{rng.uniform(-1, 1), rng.uniform(-1, 1)};
        double ax = 0.0, ay = 0.0;
        for (const Planet& p : s.planets) {
            double dx = p.position.x - q.x, dy = p.position.y - q.y;
            double r2 = dx * dx + dy * dy + cfg.softening * cfg.softening;
            double f = cfg.gravity * p.mass * std::pow(r2, -1.5);
            ax += f * dx;
            ay += f * dy;
        }
        Vec2 a = gravity_accel(s, q, cfg);
        CHECK(a.x == doctest::Approx(ax).epsilon(1e-12));
        CHECK(a.y == doctest::Approx(ay).epsilon(1e-12));
    }
}

TEST_CASE("apply_action: zero force and massless planets keep the ship still") {
    SpaceshipConfig cfg;
    Scene s;
    s.ship_position = {0.7, -0.2};
    s.ship_mass = 0.1;
    for (auto& p : s.planets) p = Planet{{0.5, 0.5}, 0.0};
    Rng rng(1);
    auto out = apply_action(s, ThrustAction{{0, 0}}, rng, cfg);
    for (const Scene& step : out.trajectory) {
        CHECK(step.ship_position.x == 0.7);
        CHECK(step.ship_position.y == -0.2);
    }
    CHECK(out.fuel == 0.0);
}

TEST_CASE("apply_action: noise scale zero makes seeds irrelevant") {
    SpaceshipConfig cfg;
    cfg.noise_scale = 0.0;
    Rng scene_rng(9);
    Scene s = sample_scene(scene_rng, cfg);
    Rng r1(100), r2(200);
    auto a = apply_action(s, ThrustAction{{30, -12}}, r1, cfg);
    auto b = apply_action(s, ThrustAction{{30, -12}}, r2, cfg);
    CHECK(a.next.observation() == b.next.observation());
}

TEST_CASE("apply_action: same seed is bit-reproducible") {
    SpaceshipConfig cfg;
    Rng scene_rng(10);
    Scene s = sample_scene(scene_rng, cfg);
    auto run = [&] {
        Rng rng(55);
        return apply_action(s, ThrustAction{{25, 40}}, rng, cfg).next.observation();
    };
    CHECK(run() == run());
}

TEST_CASE("apply_action: zero-thrust trajectory matches the dt/100 oracle") {
    SpaceshipConfig cfg;
    cfg.noise_scale = 0.0;
    SUBCASE("one planet") {
        Scene s;
        s.ship_position = {0.8, 0.0};
        s.ship_mass = 0.1;
        for (auto& p : s.planets) p = Planet{{0, 0}, 0.0};
        s.planets[0] = Planet{{0.0, 0.3}, 0.4};
        Rng rng(2);
        auto coarse = apply_action(s, ThrustAction{{0, 0}}, rng, cfg);
        Scene fine = fine_integrate(s, {0, 0}, cfg);
        CHECK((coarse.next.ship_position - fine.ship_position).norm() < 1e-3);
    }
    SUBCASE("100 random scenes") {
        Rng rng(77);
        double worst = 0.0;
        for (int i = 0; i < 100; ++i) {
            Scene s = sample_scene(rng, cfg);
            Rng step_rng(3);
            auto coarse = apply_action(s, ThrustAction{{0, 0}}, step_rng, cfg);
            Scene fine = fine_integrate(s, {0, 0}, cfg);
            worst = std::max(worst, (coarse.next.ship_position - fine.ship_position).norm());
        }
        INFO("worst-case position error " << worst);
        CHECK(worst < 1e-3);
    }
}

TEST_CASE("fuel_cost formula") {
    CHECK(fuel_cost(8.0, 0.0002) == 0.0);
    CHECK(fuel_cost(13.0, 0.0004) == doctest::Approx(0.002).epsilon(1e-15));
    CHECK(fuel_cost(0.0, 0.0004) == 0.0);
}

TEST_CASE("fuel_cost: continuous, non-decreasing, zero below threshold") {
    double prev = -1.0;
    for (double f = 0.0; f <= 20.0; f += 0.125) {
        double c = fuel_cost(f, 0.0002);
        CHECK(c >= prev);
        if (f <= 8.0) CHECK(c == 0.0);
        prev = c;
    }
}

TEST_CASE("task_loss") {
    Scene at_target;
    at_target.ship_position = {0, 0};
    CHECK(task_loss({}, at_target) == 0.0);
    Scene off;
    off.ship_position = {3, 4};
    CHECK(task_loss({}, off) == doctest::Approx(5.0).epsilon(1e-15));
    Scene near;
    near.ship_position = {0.6, 0.8};
    CHECK(task_loss({0.002, 0.001}, near) == doctest::Approx(1.003).epsilon(1e-15));
}

TEST_CASE("energy drift below 1% over one action at default dt") {
    SpaceshipConfig cfg;
    cfg.noise_scale = 0.0;
    Rng rng(123);
    for (int i = 0; i < 50; ++i) {
        Scene s = sample_scene(rng, cfg);
        double e0 = mechanical_energy(s, cfg);
        Rng step_rng(4);
        auto out = apply_action(s, ThrustAction{{0, 0}}, step_rng, cfg);
        double e1 = mechanical_energy(out.next, cfg);
        CHECK(std::abs(e1 - e0) / std::abs(e0) < 0.01);
    }
}

TEST_CASE("scene text round-trip") {
    SpaceshipConfig cfg;
    Rng rng(6);
    Scene s = sample_scene(rng, cfg);
    s.ship_velocity = {0.25, -1.5};
    std::stringstream ss;
    write_scene(ss, s);
    Scene back = read_scene(ss);
    CHECK(back.observation() == s.observation());
}

TEST_CASE("read_scene rejects malformed input") {
    std::stringstream ss("planet 0 0 1\n");
    CHECK_THROWS_AS(read_scene(ss), std::runtime_error);
}
