#pragma once

#include <span>
#include <stdexcept>
#include <variant>
#include <vector>

#include <Eigen/Core>

#include "pkpiece/physics.hpp"
#include "pkpiece/rng.hpp"

namespace pkp {

/// Single Gaussian over an object pose (x, y, theta).
struct GaussianBelief {
  Eigen::Vector3d mean = Eigen::Vector3d::Zero();
  Eigen::Matrix3d covariance = Eigen::Matrix3d::Zero();

  void validate() const;
  bool operator==(const GaussianBelief&) const = default;
};

struct MixtureComponent {
  double weight = 1.0;
  Eigen::Vector3d mean = Eigen::Vector3d::Zero();
  Eigen::Matrix3d covariance = Eigen::Matrix3d::Zero();

  bool operator==(const MixtureComponent&) const = default;
};

/// Gaussian mixture over an object pose; weights are non-negative and sum to 1.
struct MixtureBelief {
  std::vector<MixtureComponent> components;

  Eigen::Vector3d mean() const;
  void validate() const;
  bool operator==(const MixtureBelief&) const = default;
};

using PoseBelief = std::variant<GaussianBelief, MixtureBelief>;
/// One belief per object index of a WorldState.
using BeliefSet = std::vector<PoseBelief>;

Eigen::Vector3d belief_mean(const PoseBelief& belief);
Eigen::Vector3d to_vector(const Pose& p);
Pose to_pose(const Eigen::Vector3d& v);

struct ContactVariance {
  double mu = 0.0;
  double cfm = 0.0;
  double erp = 0.0;
  bool operator==(const ContactVariance&) const = default;
};

/// Execution noise: control disturbance covariance, contact-parameter
/// variances and the nominal contact parameters they are centred on.
struct NoiseConfig {
  Eigen::Matrix3d control_covariance = Eigen::Matrix3d::Zero();
  ContactVariance contact_variance;
  ContactParams nominal;

  void validate() const;
  bool operator==(const NoiseConfig&) const = default;
};

class SamplingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Draw from N(mean, covariance); covariance may be singular.
Eigen::Vector3d sample_gaussian(const Eigen::Vector3d& mean, const Eigen::Matrix3d& covariance,
                                RngStream& rng);

Pose sample_object_pose(const PoseBelief& belief, RngStream& rng);

/// Replaces each movable object's pose by a draw from its belief. Draws that
/// interpenetrate deeper than 10% of the smallest body radius are redrawn, up
/// to 100 attempts, after which SamplingError is thrown.
WorldState sample_initial_world(const WorldState& nominal, std::span<const PoseBelief> beliefs,
                                RngStream& rng);

/// Like sample_initial_world, but each movable object keeps its pose in
/// `start` and receives the belief's deviation from its own mean. When the
/// belief is centred on the object's pose this is the same distribution.
WorldState perturb_object_poses(const WorldState& start, std::span<const PoseBelief> beliefs,
                                RngStream& rng);

Disturbance sample_control_disturbance(const NoiseConfig& config, RngStream& rng);

/// Gaussian draw around the nominal parameters, clamped to mu, cfm >= 0 and
/// erp in [0, 1].
ContactParams sample_contact_params(const NoiseConfig& config, RngStream& rng);

struct EmOptions {
  int max_iterations = 200;
  double tolerance = 1e-6;
  double covariance_floor = 1e-8;
};

struct GmmFit {
  MixtureBelief mixture;
  /// Log-likelihood at every E-step, in order.
  std::vector<double> log_likelihood;
  /// Largest |sum_k r_ik - 1| seen over every E-step.
  double responsibility_error = 0.0;
  int iterations = 0;
};

/// Expectation-maximization fit of an n-component mixture with k-means++
/// seeding. Angles are unwrapped around their circular mean before fitting.
GmmFit fit_gmm_em(std::span<const Pose> samples, int components, RngStream& rng,
                  const EmOptions& options = {});

/// Particle outcomes of one accepted motion, per object index.
struct ParticleOutcomes {
  std::vector<std::vector<Pose>> final_poses;
  std::vector<double> max_displacement;
};

struct UncertaintyUpdate {
  BeliefSet beliefs;
  std::vector<std::size_t> refitted;
  int warnings = 0;
};

/// Refits the belief of every object displaced beyond 1e-4 m in some
/// particle; other beliefs are returned untouched.
UncertaintyUpdate update_pose_uncertainty(const BeliefSet& current, const ParticleOutcomes& outcomes,
                                          int components, RngStream& rng);

}  // namespace pkp
