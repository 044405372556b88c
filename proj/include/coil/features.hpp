#pragma once

#include <string>
#include <vector>

#include "coil/sim/env.hpp"

namespace coil::features {

// Shared feature space for demonstrator and imitator: per limb, selected
// markers expressed relative to the limb's anchor marker (positions then
// velocities), optionally followed by the base's absolute velocity. The
// schema is fixed by the demonstrator's marker list; an imitator with more
// segments contributes its leading joint markers plus its tip so marker
// counts always agree.
struct FeatureSchema {
  int limbs = 0;
  int markers_per_limb = 0;  // non-base markers contributed by each limb
  bool base_velocity = true;

  int position_dim() const { return limbs * markers_per_limb * 2; }
  int velocity_dim() const {
    return limbs * markers_per_limb * 2 + (base_velocity ? 2 : 0);
  }
  int dim() const { return position_dim() + velocity_dim(); }
  bool operator==(const FeatureSchema&) const = default;
};

using FeatureVector = std::vector<double>;

struct FeatureTrajectory {
  std::vector<FeatureVector> rows;
  FeatureSchema schema;
  int episode_id = 0;
  std::string source;  // "expert" | "imitator"
  std::vector<double> morphology;  // imitator only; empty for expert

  int length() const { return static_cast<int>(rows.size()); }
};

// Indices (into a limb's non-base marker list, 0-based) contributed to the
// schema by a body with `available` non-base markers: the first
// markers_per_limb-1 joints plus the tip.
std::vector<int> marker_selection(const FeatureSchema& schema, int available);

FeatureVector phi(const sim::MarkerSet& markers, double base_vx,
                  double base_vy, const FeatureSchema& schema);

FeatureTrajectory phi_trajectory(const std::vector<sim::SimState>& traj,
                                 const sim::Environment& env,
                                 const FeatureSchema& schema);

std::vector<double> position_slice(const FeatureVector& f,
                                   const FeatureSchema& schema);

// Schema induced by an environment acting as the demonstrator: every
// segment endpoint is a marker; base velocity included for floating bases.
FeatureSchema schema_for_env(const sim::EnvSpec& spec);

}  // namespace coil::features
