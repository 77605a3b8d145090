#include "pkpiece/uncertainty.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

namespace pkp {

namespace {

bool is_psd(const Eigen::Matrix3d& m) {
  if (!m.allFinite()) return false;
  if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-12) return false;
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> solver;
  solver.computeDirect(m, Eigen::EigenvaluesOnly);
  return solver.eigenvalues().minCoeff() >= -1e-12;
}

}  // namespace

void GaussianBelief::validate() const {
  if (!mean.allFinite()) throw std::invalid_argument("gaussian belief: non-finite mean");
  if (!is_psd(covariance)) throw std::invalid_argument("gaussian belief: covariance is not symmetric PSD");
}

Eigen::Vector3d MixtureBelief::mean() const {
  Eigen::Vector3d m = Eigen::Vector3d::Zero();
  for (const auto& c : components) m += c.weight * c.mean;
  return m;
}

void MixtureBelief::validate() const {
  if (components.empty()) throw std::invalid_argument("mixture belief: no components");
  double total = 0.0;
  for (const auto& c : components) {
    if (!(c.weight >= 0.0)) throw std::invalid_argument("mixture belief: negative weight");
    if (!c.mean.allFinite()) throw std::invalid_argument("mixture belief: non-finite mean");
    if (!is_psd(c.covariance)) throw std::invalid_argument("mixture belief: covariance is not symmetric PSD");
    total += c.weight;
  }
  if (std::abs(total - 1.0) > 1e-9) throw std::invalid_argument("mixture belief: weights do not sum to 1");
}

Eigen::Vector3d belief_mean(const PoseBelief& belief) {
  if (const auto* g = std::get_if<GaussianBelief>(&belief)) return g->mean;
  return std::get<MixtureBelief>(belief).mean();
}

Eigen::Vector3d to_vector(const Pose& p) { return {p.x, p.y, p.theta}; }
Pose to_pose(const Eigen::Vector3d& v) { return {v.x(), v.y(), wrap_angle(v.z())}; }

void NoiseConfig::validate() const {
  if (!is_psd(control_covariance)) throw std::invalid_argument("noise: control covariance is not symmetric PSD");
  if (!(contact_variance.mu >= 0.0 && contact_variance.cfm >= 0.0 && contact_variance.erp >= 0.0))
    throw std::invalid_argument("noise: contact variances must be >= 0");
  nominal.validate();
}

Eigen::Vector3d sample_gaussian(const Eigen::Vector3d& mean, const Eigen::Matrix3d& covariance,
                                RngStream& rng) {
  const Eigen::Vector3d z(rng.normal(), rng.normal(), rng.normal());
  const bool diagonal = covariance(0, 1) == 0.0 && covariance(0, 2) == 0.0 && covariance(1, 2) == 0.0 &&
                        covariance(1, 0) == 0.0 && covariance(2, 0) == 0.0 && covariance(2, 1) == 0.0;
  if (diagonal) {
    Eigen::Vector3d out = mean;
    for (int i = 0; i < 3; ++i) {
      const double var = covariance(i, i);
      if (var > 0.0) out(i) += std::sqrt(var) * z(i);
    }
    return out;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> solver;
  solver.computeDirect(covariance);
  const Eigen::Vector3d root = solver.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return mean + solver.eigenvectors() * root.asDiagonal() * z;
}

Pose sample_object_pose(const PoseBelief& belief, RngStream& rng) {
  if (const auto* g = std::get_if<GaussianBelief>(&belief)) return to_pose(sample_gaussian(g->mean, g->covariance, rng));
  const auto& mix = std::get<MixtureBelief>(belief);
  const double u = rng.uniform();
  double cumulative = 0.0;
  std::size_t pick = mix.components.size() - 1;
  for (std::size_t j = 0; j < mix.components.size(); ++j) {
    cumulative += mix.components[j].weight;
    if (u < cumulative) {
      pick = j;
      break;
    }
  }
  // Guard against rounding in the cumulative sum landing on a zero-weight tail.
  while (mix.components[pick].weight <= 0.0 && pick > 0) --pick;
  const auto& c = mix.components[pick];
  return to_pose(sample_gaussian(c.mean, c.covariance, rng));
}

namespace {

constexpr int kMaxSamplingAttempts = 100;

bool deeply_interpenetrating(const WorldState& world, double depth_limit) {
  const auto contacts = find_contacts(world.bodies, 0.0);
  for (const auto& c : contacts) {
    const bool involves_movable = world.bodies[c.a].cls == BodyClass::movable ||
                                  world.bodies[c.b].cls == BodyClass::movable;
    if (involves_movable && -c.separation > depth_limit) return true;
  }
  return false;
}

template <class Draw>
WorldState sample_with_retries(const WorldState& base, std::span<const PoseBelief> beliefs,
                               Draw draw) {
  if (beliefs.size() != base.object_count())
    throw std::invalid_argument("pose sampling: need one belief per object");
  double smallest = std::numeric_limits<double>::infinity();
  for (const auto& b : base.bodies) smallest = std::min(smallest, inner_radius(b.shape));
  const double depth_limit = 0.1 * smallest;

  for (int attempt = 0; attempt < kMaxSamplingAttempts; ++attempt) {
    WorldState w = base;
    auto objects = w.objects();
    bool any = false;
    for (std::size_t i = 0; i < objects.size(); ++i) {
      if (objects[i].cls != BodyClass::movable) continue;
      objects[i].pose = draw(objects[i].pose, beliefs[i]);
      any = true;
    }
    if (!any || !deeply_interpenetrating(w, depth_limit)) return w;
  }
  throw SamplingError("pose sampling: no non-interpenetrating draw after 100 attempts");
}

}  // namespace

WorldState sample_initial_world(const WorldState& nominal, std::span<const PoseBelief> beliefs,
                                RngStream& rng) {
  return sample_with_retries(nominal, beliefs, [&rng](const Pose&, const PoseBelief& belief) {
    return sample_object_pose(belief, rng);
  });
}

WorldState perturb_object_poses(const WorldState& start, std::span<const PoseBelief> beliefs,
                                RngStream& rng) {
  return sample_with_retries(start, beliefs, [&rng](const Pose& current, const PoseBelief& belief) {
    const Eigen::Vector3d draw = to_vector(sample_object_pose(belief, rng));
    const Eigen::Vector3d centre = belief_mean(belief);
    Eigen::Vector3d offset = draw - centre;
    offset.z() = wrap_angle(offset.z());
    return Pose{current.x + offset.x(), current.y + offset.y(), wrap_angle(current.theta + offset.z())};
  });
}

Disturbance sample_control_disturbance(const NoiseConfig& config, RngStream& rng) {
  const Eigen::Vector3d e = sample_gaussian(Eigen::Vector3d::Zero(), config.control_covariance, rng);
  return Disturbance{{e.x(), e.y(), e.z()}};
}

ContactParams sample_contact_params(const NoiseConfig& config, RngStream& rng) {
  const auto& v = config.contact_variance;
  ContactParams p = config.nominal;
  const double z_mu_r = rng.normal();
  const double z_mu_o = rng.normal();
  const double z_mu_f = rng.normal();
  const double z_c = rng.normal();
  const double z_e = rng.normal();
  if (v.mu > 0.0) {
    const double s = std::sqrt(v.mu);
    p.mu_robot = std::max(0.0, p.mu_robot + s * z_mu_r);
    p.mu_object = std::max(0.0, p.mu_object + s * z_mu_o);
    p.mu_fixed = std::max(0.0, p.mu_fixed + s * z_mu_f);
  }
  if (v.cfm > 0.0) p.cfm = std::max(0.0, p.cfm + std::sqrt(v.cfm) * z_c);
  if (v.erp > 0.0) p.erp = std::clamp(p.erp + std::sqrt(v.erp) * z_e, 0.0, 1.0);
  return p;
}

// ---------------------------------------------------------------------------
// EM

namespace {

double circular_mean(std::span<const Pose> samples) {
  double s = 0.0;
  double c = 0.0;
  for (const auto& p : samples) {
    s += std::sin(p.theta);
    c += std::cos(p.theta);
  }
  if (s == 0.0 && c == 0.0) return 0.0;
  return std::atan2(s, c);
}

struct Component {
  double weight;
  Eigen::Vector3d mean;
  Eigen::Matrix3d cov;
  Eigen::LLT<Eigen::Matrix3d> llt;
  double log_norm;

  void factor() {
    llt.compute(cov);
    const Eigen::Matrix3d l = llt.matrixL();
    const double log_det = 2.0 * (l.diagonal().array().log().sum());
    log_norm = -0.5 * (3.0 * std::log(2.0 * std::numbers::pi) + log_det);
  }

  double log_density(const Eigen::Vector3d& x) const {
    const Eigen::Vector3d d = x - mean;
    const Eigen::Vector3d y = llt.matrixL().solve(d);
    return log_norm - 0.5 * y.squaredNorm();
  }
};

Eigen::Matrix3d covariance_of(const std::vector<Eigen::Vector3d>& xs, const Eigen::Vector3d& mean) {
  Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
  for (const auto& x : xs) {
    const Eigen::Vector3d d = x - mean;
    cov += d * d.transpose();
  }
  return cov / static_cast<double>(xs.size());
}

std::vector<Eigen::Vector3d> kmeanspp_seeds(const std::vector<Eigen::Vector3d>& xs, int k, RngStream& rng) {
  std::vector<Eigen::Vector3d> centres;
  centres.push_back(xs[rng.index(xs.size())]);
  std::vector<double> d2(xs.size(), std::numeric_limits<double>::infinity());
  while (static_cast<int>(centres.size()) < k) {
    double total = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      d2[i] = std::min(d2[i], (xs[i] - centres.back()).squaredNorm());
      total += d2[i];
    }
    std::size_t pick = 0;
    if (total <= 0.0) {
      pick = rng.index(xs.size());
    } else {
      const double u = rng.uniform() * total;
      double acc = 0.0;
      pick = xs.size() - 1;
      for (std::size_t i = 0; i < xs.size(); ++i) {
        acc += d2[i];
        if (u < acc && d2[i] > 0.0) {
          pick = i;
          break;
        }
      }
    }
    centres.push_back(xs[pick]);
  }
  return centres;
}

// Lloyd refinement of the seeds; returns the hard label of every sample.
std::vector<int> lloyd(const std::vector<Eigen::Vector3d>& xs, std::vector<Eigen::Vector3d>& centres, int rounds) {
  std::vector<int> label(xs.size(), 0);
  for (int r = 0; r < rounds; ++r) {
    bool changed = false;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      int best = 0;
      for (int j = 1; j < static_cast<int>(centres.size()); ++j)
        if ((xs[i] - centres[j]).squaredNorm() < (xs[i] - centres[best]).squaredNorm()) best = j;
      changed = changed || best != label[i];
      label[i] = best;
    }
    if (r > 0 && !changed) break;
    std::vector<Eigen::Vector3d> sum(centres.size(), Eigen::Vector3d::Zero());
    std::vector<int> count(centres.size(), 0);
    for (std::size_t i = 0; i < xs.size(); ++i) {
      sum[label[i]] += xs[i];
      ++count[label[i]];
    }
    for (std::size_t j = 0; j < centres.size(); ++j)
      if (count[j] > 0) centres[j] = sum[j] / count[j];
  }
  return label;
}

}  // namespace

GmmFit fit_gmm_em(std::span<const Pose> samples, int components, RngStream& rng, const EmOptions& options) {
  if (components < 1) throw std::invalid_argument("fit_gmm_em: need at least one component");
  if (samples.size() < static_cast<std::size_t>(components))
    throw std::invalid_argument("fit_gmm_em: fewer samples than mixture components");

  const double theta_ref = circular_mean(samples);
  std::vector<Eigen::Vector3d> xs;
  xs.reserve(samples.size());
  for (const auto& p : samples) xs.emplace_back(p.x, p.y, theta_ref + wrap_angle(p.theta - theta_ref));

  const std::size_t n = xs.size();
  const int k = components;
  const Eigen::Matrix3d floor = options.covariance_floor * Eigen::Matrix3d::Identity();

  Eigen::Vector3d global_mean = Eigen::Vector3d::Zero();
  for (const auto& x : xs) global_mean += x;
  global_mean /= static_cast<double>(n);
  const Eigen::Matrix3d global_cov = covariance_of(xs, global_mean) + floor;

  // Start from the hard clusters of the refined seeds. Clusters too small
  // for a covariance fall back to the pooled one.
  auto centres = kmeanspp_seeds(xs, k, rng);
  const auto label = lloyd(xs, centres, 20);
  std::vector<Component> comps;
  for (int j = 0; j < k; ++j) {
    std::vector<Eigen::Vector3d> members;
    for (std::size_t i = 0; i < n; ++i)
      if (label[i] == j) members.push_back(xs[i]);
    const Eigen::Matrix3d cov = members.size() > 3 ? covariance_of(members, centres[j]) + floor : global_cov;
    const double w = std::max<double>(static_cast<double>(members.size()), 1.0) / static_cast<double>(n);
    comps.push_back({w, centres[j], cov, {}, 0.0});
    comps.back().factor();
  }
  double w0 = 0.0;
  for (const auto& c : comps) w0 += c.weight;
  for (auto& c : comps) c.weight /= w0;

  GmmFit fit;
  Eigen::MatrixXd resp(n, k);
  std::vector<double> logp(k);
  for (int iter = 0; iter < options.max_iterations; ++iter) {
    // E-step.
    double ll = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double best = -std::numeric_limits<double>::infinity();
      for (int j = 0; j < k; ++j) {
        logp[j] = comps[j].weight > 0.0 ? std::log(comps[j].weight) + comps[j].log_density(xs[i])
                                        : -std::numeric_limits<double>::infinity();
        best = std::max(best, logp[j]);
      }
      double sum = 0.0;
      for (int j = 0; j < k; ++j) sum += std::exp(logp[j] - best);
      const double lse = best + std::log(sum);
      ll += lse;
      double rsum = 0.0;
      for (int j = 0; j < k; ++j) {
        resp(static_cast<Eigen::Index>(i), j) = std::exp(logp[j] - lse);
        rsum += resp(static_cast<Eigen::Index>(i), j);
      }
      fit.responsibility_error = std::max(fit.responsibility_error, std::abs(rsum - 1.0));
    }
    const bool converged =
        !fit.log_likelihood.empty() && ll - fit.log_likelihood.back() < options.tolerance;
    fit.log_likelihood.push_back(ll);
    fit.iterations = iter;
    if (converged) break;

    // M-step.
    for (int j = 0; j < k; ++j) {
      const double nk = resp.col(j).sum();
      if (nk <= 1e-12) {
        comps[j].weight = 0.0;
        continue;
      }
      Eigen::Vector3d mean = Eigen::Vector3d::Zero();
      for (std::size_t i = 0; i < n; ++i) mean += resp(static_cast<Eigen::Index>(i), j) * xs[i];
      mean /= nk;
      Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
      for (std::size_t i = 0; i < n; ++i) {
        const Eigen::Vector3d d = xs[i] - mean;
        cov += resp(static_cast<Eigen::Index>(i), j) * (d * d.transpose());
      }
      comps[j].weight = nk / static_cast<double>(n);
      comps[j].mean = mean;
      comps[j].cov = cov / nk + floor;
      comps[j].factor();
    }
    double wsum = 0.0;
    for (const auto& c : comps) wsum += c.weight;
    for (auto& c : comps) c.weight /= wsum;
  }

  for (const auto& c : comps) {
    MixtureComponent mc;
    mc.weight = c.weight;
    mc.mean = c.mean;
    mc.mean.z() = wrap_angle(mc.mean.z());
    mc.covariance = 0.5 * (c.cov + c.cov.transpose());
    fit.mixture.components.push_back(mc);
  }
  return fit;
}

namespace {

std::size_t distinct_count(const std::vector<Pose>& poses) {
  std::vector<Pose> sorted = poses;
  std::sort(sorted.begin(), sorted.end(), [](const Pose& a, const Pose& b) {
    if (a.x != b.x) return a.x < b.x;
    if (a.y != b.y) return a.y < b.y;
    return a.theta < b.theta;
  });
  return static_cast<std::size_t>(std::unique(sorted.begin(), sorted.end()) - sorted.begin());
}

}  // namespace

UncertaintyUpdate update_pose_uncertainty(const BeliefSet& current, const ParticleOutcomes& outcomes,
                                          int components, RngStream& rng) {
  UncertaintyUpdate out;
  out.beliefs = current;
  const std::size_t count = std::min(current.size(), outcomes.max_displacement.size());
  for (std::size_t i = 0; i < count; ++i) {
    if (!(outcomes.max_displacement[i] > 1e-4)) continue;
    const auto& poses = outcomes.final_poses[i];
    if (poses.size() < 2) {
      ++out.warnings;
      continue;
    }
    const int n = static_cast<int>(std::min<std::size_t>(static_cast<std::size_t>(components), distinct_count(poses)));
    RngStream stream = rng.split(i);
    out.beliefs[i] = fit_gmm_em(poses, std::max(n, 1), stream).mixture;
    out.refitted.push_back(i);
  }
  return out;
}

}  // namespace pkp
