#include <doctest.h>

#include <cmath>
#include <numbers>

#include "pkpiece/uncertainty.hpp"
#include "support.hpp"

using namespace pkp;
using pkp::test::box;
using pkp::test::disk;

namespace {

GaussianBelief gaussian(double x, double y, double th, double vx, double vy, double vth) {
  GaussianBelief g;
  g.mean = {x, y, th};
  g.covariance = Eigen::Vector3d(vx, vy, vth).asDiagonal();
  return g;
}

WorldState scene() {
  WorldState w;
  w.bodies = {disk(0, BodyClass::robot, 0.0, 0.0, 0.03, 1.0), disk(1, BodyClass::movable, 0.3, 0.0, 0.03, 0.3),
              box(2, BodyClass::fixed, 0.6, 0.0, 0.05, 0.05, 0.0), disk(3, BodyClass::target, 0.9, 0.0, 0.04, 0.5)};
  return w;
}

BeliefSet beliefs_for(const WorldState& w, double var) {
  BeliefSet out;
  for (const auto& o : w.objects()) {
    const double v = o.cls == BodyClass::movable ? var : 0.0;
    out.emplace_back(gaussian(o.pose.x, o.pose.y, o.pose.theta, v, v, v));
  }
  return out;
}

std::vector<Pose> two_clusters(RngStream& rng, int n) {
  std::vector<Pose> pts;
  for (int i = 0; i < n; ++i) {
    const bool second = i % 2 == 1;
    const Eigen::Vector3d mean = second ? Eigen::Vector3d(5, 5, 0) : Eigen::Vector3d(0, 0, 0);
    const Eigen::Matrix3d cov = Eigen::Vector3d(1.0, 0.8, 0.1).asDiagonal();
    pts.push_back(to_pose(sample_gaussian(mean, cov, rng)));
  }
  return pts;
}

}  // namespace

TEST_SUITE("uncertainty") {
  TEST_CASE("zero covariance reproduces the nominal poses") {
    const auto w = scene();
    RngStream rng(3);
    const auto out = sample_initial_world(w, beliefs_for(w, 0.0), rng);
    CHECK(out == w);
  }

  TEST_CASE("sample mean of x converges to the nominal value") {
    const double sigma = 0.02;
    RngStream rng(11);
    const auto g = gaussian(0.4, 0.2, 0.0, sigma * sigma, sigma * sigma, 0.0);
    double sum = 0.0;
    for (int i = 0; i < 10000; ++i) sum += sample_object_pose(g, rng).x;
    CHECK(std::abs(sum / 10000 - 0.4) < 4 * sigma / 100);
  }

  TEST_CASE("fixed obstacles and the target are never perturbed") {
    const auto w = scene();
    RngStream rng(5);
    const auto out = sample_initial_world(w, beliefs_for(w, 1e-4), rng);
    CHECK(out.bodies[2] == w.bodies[2]);
    CHECK(out.bodies[3] == w.bodies[3]);
    CHECK(out.bodies[1].pose != w.bodies[1].pose);
  }

  TEST_CASE("unavoidable deep interpenetration raises a sampling error") {
    auto w = scene();
    w.bodies[1].pose = {0.0, 0.0, 0.0};  // on top of the robot
    RngStream rng(1);
    CHECK_THROWS_AS(sample_initial_world(w, beliefs_for(w, 0.0), rng), SamplingError);
  }

  TEST_CASE("control disturbance statistics") {
    NoiseConfig n;
    RngStream rng(7);
    const auto zero = sample_control_disturbance(n, rng);
    CHECK(zero.wrench == Wrench{});

    n.control_covariance = Eigen::Vector3d(1.0, 1.0, 0.01).asDiagonal();
    double sx = 0, sy = 0, st = 0;
    for (int i = 0; i < 10000; ++i) {
      const auto d = sample_control_disturbance(n, rng);
      sx += d.wrench.fx;
      sy += d.wrench.fy;
      st += d.wrench.torque;
    }
    CHECK(std::abs(sx / 10000) < 0.05);
    CHECK(std::abs(sy / 10000) < 0.05);
    CHECK(std::abs(st / 10000) < 0.05);

    RngStream a(1), b(2);
    CHECK(sample_control_disturbance(n, a).wrench != sample_control_disturbance(n, b).wrench);
  }

  TEST_CASE("contact parameter sampling") {
    NoiseConfig n;
    RngStream rng(9);
    CHECK(sample_contact_params(n, rng) == n.nominal);

    n.nominal.erp = 0.99;
    n.contact_variance = {0.0, 0.0, 4.0};
    for (int i = 0; i < 1000; ++i) {
      const auto p = sample_contact_params(n, rng);
      CHECK(p.erp <= 1.0);
      CHECK(p.erp >= 0.0);
    }

    n.contact_variance = {0.0025, 0.0, 0.0};
    const double se = 0.05 / std::sqrt(10000.0);
    double sum = 0.0;
    for (int i = 0; i < 10000; ++i) sum += sample_contact_params(n, rng).mu_robot;
    CHECK(std::abs(sum / 10000 - n.nominal.mu_robot) < 3 * se);
  }

  TEST_CASE("mixture sampling follows the weights") {
    MixtureBelief m;
    m.components = {{1.0, {0, 0, 0}, Eigen::Matrix3d::Identity() * 0.01},
                    {0.0, {10, 0, 0}, Eigen::Matrix3d::Identity() * 0.01}};
    RngStream rng(4);
    for (int i = 0; i < 1000; ++i) CHECK(sample_object_pose(m, rng).x < 5.0);

    m.components[0].weight = 0.5;
    m.components[1].weight = 0.5;
    int near_second = 0;
    for (int i = 0; i < 10000; ++i) near_second += sample_object_pose(m, rng).x > 5.0;
    CHECK(near_second >= 4700);
    CHECK(near_second <= 5300);
  }

  TEST_CASE("a one-component mixture matches the plain Gaussian") {
    const auto g = gaussian(0.1, -0.2, 0.0, 0.04, 0.01, 0.0);
    MixtureBelief m;
    m.components = {{1.0, g.mean, g.covariance}};
    RngStream r1(21), r2(22);
    double mg = 0, mm = 0, vg = 0, vm = 0;
    const int n = 10000;
    for (int i = 0; i < n; ++i) {
      const double a = sample_object_pose(g, r1).x;
      const double b = sample_object_pose(m, r2).x;
      mg += a;
      mm += b;
      vg += a * a;
      vm += b * b;
    }
    mg /= n;
    mm /= n;
    vg = vg / n - mg * mg;
    vm = vm / n - mm * mm;
    // Two-sample z test on the means and a loose ratio test on the variances.
    CHECK(std::abs(mg - mm) / std::sqrt(0.04 * 2 / n) < 3.0);
    CHECK(vg / vm == doctest::Approx(1.0).epsilon(0.06));
  }

  TEST_CASE("one-component EM is the sample mean and biased covariance") {
    RngStream rng(2);
    std::vector<Pose> pts{{0, 0, 0.1}, {1, 0, 0.2}, {0, 2, 0.3}, {1, 2, 0.0}};
    const auto fit = fit_gmm_em(pts, 1, rng);
    REQUIRE(fit.mixture.components.size() == 1);
    const auto& c = fit.mixture.components[0];
    CHECK(c.weight == doctest::Approx(1.0));
    CHECK(c.mean.x() == doctest::Approx(0.5));
    CHECK(c.mean.y() == doctest::Approx(1.0));
    CHECK(c.mean.z() == doctest::Approx(0.15));
    CHECK(c.covariance(0, 0) == doctest::Approx(0.25 + 1e-8));
    CHECK(c.covariance(1, 1) == doctest::Approx(1.0 + 1e-8));
    CHECK(c.covariance(0, 1) == doctest::Approx(0.0));
  }

  TEST_CASE("two-component EM recovers the generating mixture") {
    RngStream data(42), seeding(43);
    const auto pts = two_clusters(data, 2000);
    const auto fit = fit_gmm_em(pts, 2, seeding);
    REQUIRE(fit.mixture.components.size() == 2);
    auto a = fit.mixture.components[0];
    auto b = fit.mixture.components[1];
    if (a.mean.x() > b.mean.x()) std::swap(a, b);
    CHECK((a.mean - Eigen::Vector3d(0, 0, 0)).norm() < 0.2);
    CHECK((b.mean - Eigen::Vector3d(5, 5, 0)).norm() < 0.2);
    CHECK(std::abs(a.weight - 0.5) < 0.05);
    CHECK(a.weight + b.weight == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(fit.responsibility_error < 1e-9);
    for (std::size_t i = 1; i < fit.log_likelihood.size(); ++i)
      CHECK(fit.log_likelihood[i] >= fit.log_likelihood[i - 1] - 1e-9);
  }

  TEST_CASE("EM unwraps angles across the branch cut") {
    RngStream rng(6);
    std::vector<Pose> pts;
    for (int i = 0; i < 200; ++i) {
      const double th = std::numbers::pi - 0.05 + 0.1 * (i % 10) / 9.0;
      pts.push_back({0.0, 0.0, wrap_angle(th)});
    }
    const auto fit = fit_gmm_em(pts, 1, rng);
    CHECK(std::abs(std::abs(fit.mixture.components[0].mean.z()) - std::numbers::pi) < 0.01);
    CHECK(fit.mixture.components[0].covariance(2, 2) < 0.01);
  }

  TEST_CASE("a fitted mixture survives a sample and refit round trip") {
    MixtureBelief m;
    m.components = {{0.3, {0, 0, 0}, Eigen::Matrix3d::Identity() * 0.1},
                    {0.7, {3, -2, 0.5}, Eigen::Matrix3d::Identity() * 0.1}};
    RngStream rng(8);
    std::vector<Pose> pts;
    for (int i = 0; i < 10000; ++i) pts.push_back(sample_object_pose(m, rng));
    const auto fit = fit_gmm_em(pts, 2, rng);
    for (const auto& truth : m.components) {
      double best = 1e9;
      for (const auto& c : fit.mixture.components) best = std::min(best, (c.mean - truth.mean).norm());
      CHECK(best < 0.2);
    }
  }

  TEST_CASE("beliefs are untouched when nothing moved") {
    const auto w = scene();
    const auto beliefs = beliefs_for(w, 1e-4);
    ParticleOutcomes o;
    o.final_poses.assign(3, {});
    o.max_displacement.assign(3, 0.0);
    for (int j = 0; j < 10; ++j) o.final_poses[0].push_back(w.bodies[1].pose);
    RngStream rng(1);
    const auto up = update_pose_uncertainty(beliefs, o, 3, rng);
    CHECK(up.beliefs == beliefs);
    CHECK(up.refitted.empty());
    CHECK(up.warnings == 0);
  }

  TEST_CASE("bimodal particle outcomes give a mixture covering both clusters") {
    const auto w = scene();
    const auto beliefs = beliefs_for(w, 1e-4);
    ParticleOutcomes o;
    o.final_poses.assign(3, {});
    o.max_displacement = {0.3, 0.0, 0.0};
    for (int j = 0; j < 20; ++j) {
      const double jitter = 0.002 * (j % 5);
      o.final_poses[0].push_back(j % 2 ? Pose{0.5, 0.2 + jitter, 0.0} : Pose{0.5, -0.2 - jitter, 0.0});
    }
    RngStream rng(3);
    const auto up = update_pose_uncertainty(beliefs, o, 2, rng);
    REQUIRE(up.refitted == std::vector<std::size_t>{0});
    const auto* m = std::get_if<MixtureBelief>(&up.beliefs[0]);
    REQUIRE(m != nullptr);
    for (const Eigen::Vector3d& cluster : {Eigen::Vector3d(0.5, 0.2, 0), Eigen::Vector3d(0.5, -0.2, 0)}) {
      double best = 1e9;
      for (const auto& c : m->components) best = std::min(best, (c.mean - cluster).norm());
      CHECK(best < 0.2);
    }
    CHECK(up.beliefs[1] == beliefs[1]);
  }

  TEST_CASE("a single particle keeps the prior and warns") {
    const auto w = scene();
    const auto beliefs = beliefs_for(w, 1e-4);
    ParticleOutcomes o;
    o.final_poses.assign(3, {});
    o.max_displacement = {0.2, 0.0, 0.0};
    o.final_poses[0].push_back({0.5, 0.0, 0.0});
    RngStream rng(3);
    const auto up = update_pose_uncertainty(beliefs, o, 3, rng);
    CHECK(up.beliefs == beliefs);
    CHECK(up.warnings == 1);
  }

  TEST_CASE("replaying a stream replays the draws") {
    const auto w = scene();
    const auto b = beliefs_for(w, 1e-3);
    RngStream r1(77), r2(77);
    CHECK(sample_initial_world(w, b, r1) == sample_initial_world(w, b, r2));
    CHECK(RngStream(77).split(5).uniform() == RngStream(77).split(5).uniform());
  }
}
