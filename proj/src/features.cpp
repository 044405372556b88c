#include "coil/features.hpp"

namespace coil::features {

std::vector<int> marker_selection(const FeatureSchema& schema, int available) {
  if (schema.markers_per_limb < 1)
    throw SchemaError("schema needs at least one marker per limb");
  if (available < schema.markers_per_limb)
    throw SchemaError("limb provides " + std::to_string(available) +
                      " markers, schema needs " +
                      std::to_string(schema.markers_per_limb));
  std::vector<int> sel;
  for (int i = 0; i + 1 < schema.markers_per_limb; ++i) sel.push_back(i);
  sel.push_back(available - 1);  // tip always participates
  return sel;
}

FeatureVector phi(const sim::MarkerSet& markers, double base_vx,
                  double base_vy, const FeatureSchema& schema) {
  if (markers.limb_count() != schema.limbs)
    throw SchemaError("marker set has " + std::to_string(markers.limb_count()) +
                      " limbs, schema expects " + std::to_string(schema.limbs));
  FeatureVector f;
  f.reserve(schema.dim());
  for (const auto& limb : markers.limbs) {
    const int available = static_cast<int>(limb.size()) - 1;
    const std::vector<int> sel = marker_selection(schema, available);
    const sim::Marker& base = limb[0];
    for (int idx : sel) {
      const sim::Marker& m = limb[idx + 1];
      f.push_back(m.px - base.px);
      f.push_back(m.py - base.py);
    }
  }
  for (const auto& limb : markers.limbs) {
    const int available = static_cast<int>(limb.size()) - 1;
    const std::vector<int> sel = marker_selection(schema, available);
    const sim::Marker& base = limb[0];
    for (int idx : sel) {
      const sim::Marker& m = limb[idx + 1];
      f.push_back(m.vx - base.vx);
      f.push_back(m.vy - base.vy);
    }
  }
  if (schema.base_velocity) {
    f.push_back(base_vx);
    f.push_back(base_vy);
  }
  return f;
}

FeatureTrajectory phi_trajectory(const std::vector<sim::SimState>& traj,
                                 const sim::Environment& env,
                                 const FeatureSchema& schema) {
  if (traj.empty()) throw EmptyTrajectory("cannot featurize an empty trajectory");
  FeatureTrajectory out;
  out.schema = schema;
  out.rows.reserve(traj.size());
  for (const auto& st : traj) {
    const sim::MarkerSet ms = env.markers(st);
    out.rows.push_back(phi(ms, ms.base_vx, ms.base_vy, schema));
  }
  return out;
}

std::vector<double> position_slice(const FeatureVector& f,
                                   const FeatureSchema& schema) {
  const int pd = schema.position_dim();
  if (static_cast<int>(f.size()) != schema.dim())
    throw SchemaError("feature vector length " + std::to_string(f.size()) +
                      " does not match schema dimension " +
                      std::to_string(schema.dim()));
  return std::vector<double>(f.begin(), f.begin() + pd);
}

FeatureSchema schema_for_env(const sim::EnvSpec& spec) {
  FeatureSchema s;
  s.limbs = spec.limb_count;
  s.markers_per_limb = spec.segments_per_limb;
  s.base_velocity = spec.base == sim::BaseKind::Floating;
  return s;
}

}  // namespace coil::features
