#pragma once

#include "pkpiece/physics.hpp"

namespace pkp::test {

inline Body disk(int id, BodyClass cls, double x, double y, double radius, double mass, double mu = 0.0) {
  Body b;
  b.id = id;
  b.cls = cls;
  b.shape = Disk{radius};
  b.pose = {x, y, 0.0};
  b.mass = mass;
  b.inertia = default_inertia(b.shape, mass);
  b.support_friction = mu;
  return b;
}

inline Body box(int id, BodyClass cls, double x, double y, double hx, double hy, double mass, double theta = 0.0) {
  Body b;
  b.id = id;
  b.cls = cls;
  b.shape = Box{hx, hy};
  b.pose = {x, y, theta};
  b.mass = mass;
  b.inertia = default_inertia(b.shape, mass);
  return b;
}

inline ContactParams frictionless() {
  ContactParams p;
  p.mu_robot = p.mu_object = p.mu_fixed = 0.0;
  p.erp = 0.0;
  return p;
}

}  // namespace pkp::test
