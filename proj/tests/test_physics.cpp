#include <doctest.h>

#include <cmath>

#include "pkpiece/physics.hpp"
#include "support.hpp"

using namespace pkp;
using pkp::test::box;
using pkp::test::disk;

TEST_SUITE("physics") {
  TEST_CASE("a world at rest without control is a fixed point") {
    WorldState w;
    w.bodies = {disk(0, BodyClass::robot, 0.1, 0.1, 0.03, 1.0, 0.4),
                disk(1, BodyClass::movable, 0.3, 0.1, 0.03, 0.3, 0.4),
                box(2, BodyClass::fixed, 0.6, 0.3, 0.05, 0.1, 0.0)};
    const auto out = propagate(w, {{}, 0.5}, ContactParams{});
    CHECK(out.final.bodies == w.bodies);
    CHECK(out.trace.steps == 100);
  }

  TEST_CASE("constant force on a frictionless disk matches the semi-implicit Euler closed form") {
    WorldState w;
    w.bodies = {disk(0, BodyClass::robot, 0.0, 0.0, 0.05, 2.0)};
    const PhysicsConfig cfg;
    const auto out = propagate(w, {{1.0, 0.0, 0.0}, 1.0}, ContactParams{}, cfg);
    const double n = 200.0;
    const double expected_x = cfg.dt * cfg.dt * 0.5 * n * (n + 1.0) / 2.0;
    CHECK(out.final.robot().velocity.vx == doctest::Approx(0.5).epsilon(1e-9));
    CHECK(std::abs(out.final.robot().pose.x - expected_x) < 1e-9);
    CHECK(out.final.robot().pose.y == 0.0);
  }

  TEST_CASE("waypoints are recorded every record_every steps and at the end") {
    WorldState w;
    w.bodies = {disk(0, BodyClass::robot, 0.0, 0.0, 0.05, 1.0)};
    const auto out = propagate(w, {{1.0, 0.0, 0.0}, 0.125}, ContactParams{});
    REQUIRE(out.waypoint_steps == std::vector<std::int64_t>{10, 20, 25});
    CHECK(out.waypoints.back() == out.final);
  }

  TEST_CASE("head-on frictionless impact conserves linear momentum") {
    WorldState w;
    w.bodies = {disk(0, BodyClass::robot, 0.0, 0.0, 0.05, 1.0), disk(1, BodyClass::movable, 0.2, 0.0, 0.05, 1.0)};
    w.bodies[0].velocity.vx = 1.0;
    const auto params = pkp::test::frictionless();
    const PhysicsConfig cfg;
    WorldState cur = w;
    const Vec2 p0 = linear_momentum(w.bodies);
    bool collided = false;
    for (int i = 0; i < 60; ++i) {
      const auto out = propagate(cur, {{}, cfg.dt}, params, cfg);
      const Vec2 p = linear_momentum(out.final.bodies);
      CHECK(std::abs(p.x - p0.x) < 1e-6);
      CHECK(std::abs(p.y - p0.y) < 1e-6);
      collided = collided || out.final.bodies[1].velocity.vx > 0.0;
      cur = out.final;
    }
    CHECK(collided);
    // Perfectly inelastic: both end up sharing the momentum.
    CHECK(cur.bodies[0].velocity.vx == doctest::Approx(0.5).epsilon(1e-6));
    CHECK(cur.bodies[1].velocity.vx == doctest::Approx(0.5).epsilon(1e-6));
  }

  TEST_CASE("sliding disk decelerates at mu * g") {
    WorldState w;
    w.bodies = {disk(0, BodyClass::robot, 0.0, 0.0, 0.05, 1.0, 0.5)};
    w.bodies[0].velocity.vx = 1.0;
    const auto out = propagate(w, {{}, 0.1}, ContactParams{});
    const double decel = (1.0 - out.final.robot().velocity.vx) / 0.1;
    CHECK(std::abs(decel - 4.905) / 4.905 < 0.02);
  }

  TEST_CASE("friction stops a slow body without reversing it") {
    WorldState w;
    w.bodies = {disk(0, BodyClass::robot, 0.0, 0.0, 0.05, 1.0, 0.5)};
    w.bodies[0].velocity = {0.05, 0.0, 3.0};
    const auto out = propagate(w, {{}, 0.5}, ContactParams{});
    CHECK(out.final.robot().velocity == Twist{});
    CHECK(out.final.robot().pose.x > 0.0);
  }

  TEST_CASE("touching bodies at rest stay put for 1000 steps") {
    WorldState w;
    w.bodies = {disk(0, BodyClass::robot, 0.0, 0.0, 0.03, 1.0, 0.4),
                disk(1, BodyClass::movable, 0.06, 0.0, 0.03, 0.3, 0.4),
                box(2, BodyClass::movable, 0.14, 0.0, 0.05, 0.05, 0.5),
                box(3, BodyClass::fixed, 0.24, 0.0, 0.05, 0.2, 0.0)};
    w.bodies[2].support_friction = 0.4;
    const auto out = propagate(w, {{}, 1000 * 0.005}, ContactParams{});
    for (std::size_t i = 0; i < w.bodies.size(); ++i) {
      CHECK(length(out.final.bodies[i].pose.position() - w.bodies[i].pose.position()) < 1e-6);
    }
  }

  TEST_CASE("kinetic energy never increases under friction and zero control") {
    WorldState w;
    w.bodies = {disk(0, BodyClass::robot, 0.0, 0.0, 0.03, 1.0, 0.3),
                disk(1, BodyClass::movable, 0.1, 0.01, 0.03, 0.3, 0.4),
                box(2, BodyClass::movable, 0.2, -0.02, 0.04, 0.02, 0.5, 0.3),
                box(3, BodyClass::fixed, 0.35, 0.0, 0.02, 0.3, 0.0)};
    w.bodies[2].support_friction = 0.4;
    w.bodies[0].velocity = {1.2, 0.1, 0.0};
    w.bodies[1].velocity = {0.3, -0.2, 2.0};
    const PhysicsConfig cfg;
    WorldState cur = w;
    double e = kinetic_energy(cur.bodies);
    for (int i = 0; i < 300; ++i) {
      cur = propagate(cur, {{}, cfg.dt}, ContactParams{}, cfg).final;
      const double next = kinetic_energy(cur.bodies);
      CHECK(next <= e + 1e-9);
      e = next;
    }
  }

  TEST_CASE("zero disturbance is bit-identical to the nominal transition") {
    WorldState w;
    w.bodies = {disk(0, BodyClass::robot, 0.0, 0.0, 0.03, 1.0, 0.2), disk(1, BodyClass::movable, 0.08, 0.0, 0.03, 0.3, 0.4)};
    const Control c{{3.0, 0.5, 0.0}, 0.3};
    const auto a = propagate(w, c, ContactParams{});
    const auto b = propagate_noisy(w, c, Disturbance{}, ContactParams{});
    CHECK(a.final == b.final);
    CHECK(a.waypoints == b.waypoints);
  }

  TEST_CASE("a disturbance cancelling the control leaves a free disk at rest") {
    WorldState w;
    w.bodies = {disk(0, BodyClass::robot, 0.0, 0.0, 0.03, 1.0)};
    const auto out = propagate_noisy(w, {{1.0, 0.0, 0.0}, 0.2}, Disturbance{{-1.0, 0.0, 0.0}}, ContactParams{});
    CHECK(out.final.robot().pose == w.robot().pose);
    CHECK(out.final.robot().velocity == Twist{});
  }

  TEST_CASE("different disturbances give different robot poses") {
    WorldState w;
    w.bodies = {disk(0, BodyClass::robot, 0.0, 0.0, 0.03, 1.0, 0.1)};
    const Control c{{2.0, 0.0, 0.0}, 0.2};
    const auto a = propagate_noisy(w, c, Disturbance{{0.1, 0.0, 0.0}}, ContactParams{});
    const auto b = propagate_noisy(w, c, Disturbance{{0.0, 0.2, 0.0}}, ContactParams{});
    CHECK(a.final.robot().pose != b.final.robot().pose);
  }

  TEST_CASE("propagation is deterministic and leaves fixed bodies alone") {
    WorldState w;
    w.bodies = {disk(0, BodyClass::robot, 0.0, 0.0, 0.03, 1.0, 0.2), box(1, BodyClass::fixed, 0.1, 0.0, 0.02, 0.1, 0.0)};
    const Control c{{5.0, 0.3, 0.0}, 0.5};
    const auto a = propagate(w, c, ContactParams{});
    const auto b = propagate(w, c, ContactParams{});
    CHECK(a.final == b.final);
    CHECK(a.final.bodies[1].pose == w.bodies[1].pose);
    CHECK(a.trace.robot_hit_fixed);
    CHECK(a.final.robot().pose.x < 0.1 - 0.02 - 0.03 + 1e-3);
  }

  TEST_CASE("durations must be positive multiples of the step") {
    CHECK(steps_for_duration(0.5, 0.005) == 100);
    CHECK_THROWS_AS(steps_for_duration(0.0, 0.005), std::invalid_argument);
    CHECK_THROWS_AS(steps_for_duration(0.0123, 0.005), std::invalid_argument);
    CHECK_THROWS_AS(steps_for_duration(-0.1, 0.005), std::invalid_argument);
  }

  TEST_CASE("a non-finite state raises a propagation error naming the step") {
    WorldState w;
    w.bodies = {disk(0, BodyClass::robot, 0.0, 0.0, 0.03, 1e-10)};
    CHECK_THROWS_AS(propagate(w, {{std::nan(""), 0.0, 0.0}, 0.1}, ContactParams{}), std::invalid_argument);
    try {
      // Finite inputs whose acceleration overflows on the first step.
      propagate(w, {{1e308, 0.0, 0.0}, 0.1}, ContactParams{});
      FAIL("expected a propagation error");
    } catch (const PropagationError& e) {
      CHECK(e.step() == 1);
      CHECK(std::string(e.what()).find("step") != std::string::npos);
    }
  }

  TEST_CASE("separated bodies produce no contacts and no impulses") {
    std::vector<Body> bodies{disk(0, BodyClass::robot, 0.0, 0.0, 0.03, 1.0), disk(1, BodyClass::movable, 0.5, 0.0, 0.03, 1.0)};
    CHECK(find_contacts(bodies, 2e-3).empty());
    CHECK(solve_contacts(bodies, ContactParams{}, 0.005).empty());
  }

  TEST_CASE("a disk pressed into a fixed wall loses its normal velocity") {
    std::vector<Body> bodies{disk(0, BodyClass::robot, 0.0, 0.0, 0.05, 1.0),
                             box(1, BodyClass::fixed, 0.1, 0.0, 0.05, 0.5, 0.0)};
    bodies[0].velocity = {0.7, 0.2, 0.0};
    auto params = pkp::test::frictionless();
    const auto impulses = solve_contacts(bodies, params, 0.005);
    REQUIRE(impulses.size() == 1);
    CHECK(impulses[0].normal_impulse >= 0.0);
    CHECK(std::abs(bodies[0].velocity.vx) < 1e-6);
    CHECK(bodies[0].velocity.vy == doctest::Approx(0.2));
  }

  TEST_CASE("normal impulses are never negative") {
    std::vector<Body> bodies{disk(0, BodyClass::robot, 0.0, 0.0, 0.05, 1.0), disk(1, BodyClass::movable, 0.099, 0.0, 0.05, 1.0),
                             box(2, BodyClass::movable, 0.18, 0.02, 0.04, 0.04, 1.0, 0.4)};
    bodies[0].velocity.vx = -0.5;  // separating from body 1
    bodies[2].velocity.vx = -0.5;  // approaching body 1
    for (const auto& ci : solve_contacts(bodies, ContactParams{}, 0.005)) CHECK(ci.normal_impulse >= 0.0);
  }

  TEST_CASE("box pairs generate a clipped two-point manifold") {
    std::vector<Body> bodies{box(0, BodyClass::robot, 0.0, 0.0, 0.05, 0.05, 1.0), box(1, BodyClass::movable, 0.099, 0.01, 0.05, 0.05, 1.0)};
    const auto contacts = find_contacts(bodies, 0.0);
    REQUIRE(contacts.size() == 2);
    for (const auto& c : contacts) {
      CHECK(c.normal.x == doctest::Approx(1.0));
      CHECK(c.separation == doctest::Approx(-0.001));
    }
  }

  TEST_CASE("box and disk collide on the nearest face") {
    std::vector<Body> bodies{disk(0, BodyClass::robot, 0.0, 0.079, 0.03, 1.0), box(1, BodyClass::fixed, 0.0, 0.0, 0.1, 0.05, 0.0)};
    const auto contacts = find_contacts(bodies, 0.0);
    REQUIRE(contacts.size() == 1);
    CHECK(contacts[0].normal.y == doctest::Approx(-1.0));
    CHECK(contacts[0].separation == doctest::Approx(-0.001));
  }

  TEST_CASE("a pushed object records its peak speed and target contact is flagged") {
    WorldState w;
    w.bodies = {disk(0, BodyClass::robot, 0.0, 0.0, 0.03, 1.0, 0.2), disk(1, BodyClass::movable, 0.07, 0.0, 0.03, 0.3, 0.4),
                disk(2, BodyClass::target, 0.3, 0.3, 0.04, 0.5, 0.4)};
    const auto out = propagate(w, {{4.0, 0.0, 0.0}, 0.3}, ContactParams{});
    REQUIRE(out.trace.object_peak_speed.size() == 2);
    CHECK(out.trace.object_peak_speed[0] > 0.1);
    CHECK(out.trace.object_peak_speed[1] == 0.0);
    CHECK_FALSE(out.trace.target_contacted);

    w.bodies[2].pose = {0.14, 0.0, 0.0};
    const auto hit = propagate(w, {{4.0, 0.0, 0.0}, 0.3}, ContactParams{});
    CHECK(hit.trace.target_contacted);
  }
}
