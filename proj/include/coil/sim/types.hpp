#pragma once

#include <string>
#include <vector>

#include "coil/errors.hpp"

namespace coil::sim {

// Morphology parameter vector: one entry per variable segment length, in
// metres, ordered limb-major then proximal to distal.
struct MorphologyVector {
  std::vector<double> lengths;

  int size() const { return static_cast<int>(lengths.size()); }
  double operator[](int i) const { return lengths[i]; }
  double& operator[](int i) { return lengths[i]; }
};

struct MorphologyBounds {
  std::vector<double> lower;
  std::vector<double> upper;

  int size() const { return static_cast<int>(lower.size()); }
  void validate(const MorphologyVector& xi) const {
    if (xi.size() != size())
      throw DimensionError("morphology has " + std::to_string(xi.size()) +
                           " parameters, bounds expect " +
                           std::to_string(size()));
    for (int i = 0; i < size(); ++i) {
      if (!(xi[i] >= lower[i] && xi[i] <= upper[i]))
        throw BoundsViolation("morphology parameter " + std::to_string(i) +
                              " = " + std::to_string(xi[i]) +
                              " outside [" + std::to_string(lower[i]) + ", " +
                              std::to_string(upper[i]) + "]");
    }
  }
  // Map to/from the unit cube used by the proposal strategies.
  std::vector<double> normalize(const MorphologyVector& xi) const {
    std::vector<double> u(size());
    for (int i = 0; i < size(); ++i)
      u[i] = (xi[i] - lower[i]) / (upper[i] - lower[i]);
    return u;
  }
  MorphologyVector denormalize(const std::vector<double>& u) const {
    MorphologyVector xi;
    xi.lengths.resize(size());
    for (int i = 0; i < size(); ++i)
      xi.lengths[i] = lower[i] + u[i] * (upper[i] - lower[i]);
    return xi;
  }
};

// Generalized-coordinate snapshot of the mechanism plus bookkeeping flags.
struct SimState {
  std::vector<double> q;   // joint positions (base slide x, z first if floating)
  std::vector<double> qd;  // joint velocities
  int step_index = 0;
  bool failed = false;  // NaN guard tripped

  // Flat observation used by the policy/critics: [q, qd] with the floating
  // base x coordinate dropped (planar locomotion is translation invariant).
  std::vector<double> observation(bool floating_base) const {
    std::vector<double> obs;
    obs.reserve(q.size() + qd.size());
    for (size_t i = 0; i < q.size(); ++i) {
      if (floating_base && i == 0) continue;  // absolute x excluded
      obs.push_back(q[i]);
    }
    for (double v : qd) obs.push_back(v);
    return obs;
  }
};

struct Marker {
  double px = 0.0, py = 0.0;  // world position
  double vx = 0.0, vy = 0.0;  // world velocity
};

// Markers grouped per limb; index 0 is the limb's anchor on the base, the
// remaining entries are segment endpoints from proximal to distal.
struct MarkerSet {
  std::vector<std::vector<Marker>> limbs;
  double base_vx = 0.0, base_vy = 0.0;

  int limb_count() const { return static_cast<int>(limbs.size()); }
  int markers_per_limb() const {
    return limbs.empty() ? 0 : static_cast<int>(limbs[0].size());
  }
};

struct StepResult {
  SimState state;
  bool terminated = false;  // early-termination rule, NaN guard, or episode cap
  bool truncated = false;   // episode cap specifically
};

enum class BaseKind { Fixed, Floating };

// Static description of an environment family; the variable segment lengths
// come from the MorphologyVector at construction time.
struct EnvSpec {
  std::string name;
  BaseKind base = BaseKind::Floating;
  int limb_count = 2;
  int segments_per_limb = 3;
  double base_length = 0.5;   // torso extent (floating) or ignored (fixed)
  double base_mass = 2.0;
  MorphologyVector default_morphology;
  double gravity = 9.81;
  double dt = 0.01;
  int substeps = 2;
  double torque_limit = 6.0;
  double joint_damping = 0.15;
  double joint_limit = 2.4;        // radians, symmetric
  double joint_limit_stiffness = 80.0;
  double density = 4.0;            // kg per metre of segment
  double contact_stiffness = 4000.0;
  double contact_damping = 60.0;
  double friction = 1.2;
  int episode_length = 1000;
  bool early_termination = false;
  double termination_height_ratio = 0.5;  // fraction of rest height
  double reset_noise = 0.01;

  int morphology_dim() const { return limb_count * segments_per_limb; }
  MorphologyBounds bounds() const {
    MorphologyBounds b;
    b.lower.assign(default_morphology.lengths.size(), 1e-6);
    b.upper.resize(default_morphology.lengths.size());
    for (size_t i = 0; i < default_morphology.lengths.size(); ++i)
      b.upper[i] = 2.0 * default_morphology.lengths[i];
    return b;
  }
};

}  // namespace coil::sim
