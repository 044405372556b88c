#pragma once

#include <cstdint>
#include <vector>

#include "coil/sim/types.hpp"
#include "coil/tensor.hpp"

namespace coil::sim {

// Planar articulated mechanism: a base (fixed anchor or floating torso with
// two translational degrees of freedom) carrying revolute-jointed limb
// chains whose segment lengths come from the MorphologyVector. Dynamics are
// exact rigid-body equations assembled by a recursive Newton-Euler pass,
// integrated with semi-implicit Euler; joint damping is handled implicitly
// so passive motion dissipates energy robustly.
class Environment {
 public:
  Environment(EnvSpec spec, MorphologyVector xi);

  const EnvSpec& spec() const { return spec_; }
  const MorphologyVector& morphology() const { return xi_; }
  bool floating() const { return spec_.base == BaseKind::Floating; }
  int dof() const { return ndof_; }
  int action_dim() const { return nact_; }
  int observation_dim() const;
  double rest_height() const { return rest_height_; }

  SimState reset(std::uint64_t seed) const;
  // `action` is normalized to [-1, 1] per actuated joint and scaled by the
  // spec torque limit internally; entries outside the range are clipped.
  StepResult step(const SimState& state, const std::vector<double>& action) const;
  MarkerSet markers(const SimState& state) const;
  std::vector<double> observation(const SimState& state) const {
    return state.observation(floating());
  }

  double energy(const SimState& state) const;  // kinetic + gravity potential
  double base_height(const SimState& state) const;
  double base_x(const SimState& state) const;

  // Mass matrix and bias vector at (q, qd) with gravity and external contact
  // forces folded into the bias; exposed for the integrator tests.
  void dynamics_terms(const std::vector<double>& q,
                      const std::vector<double>& qd, bool with_contacts,
                      Tensor* mass, std::vector<double>* bias) const;

 private:
  struct Body {
    enum class Joint { PrismX, PrismZ, Revolute };
    Joint joint = Joint::Revolute;
    int parent = -1;  // -1 = world
    double anchor_x = 0.0, anchor_y = 0.0;  // joint origin in parent frame
    double rest_angle = 0.0;                // constant offset for revolute
    double length = 0.0;
    double mass = 0.0;
    double inertia = 0.0;     // about com
    double com_offset = 0.0;  // along local x
    double damping = 0.0;
    bool actuated = false;
    int limb = -1;  // -1 for base bodies
    int seg = -1;
  };

  struct BodyKin {
    double ox = 0.0, oy = 0.0;    // frame origin, world
    double phi = 0.0, c = 1.0, s = 0.0;
    double vx = 0.0, vy = 0.0;    // origin velocity
    double w = 0.0;
    double ax = 0.0, ay = 0.0;    // origin acceleration
    double wd = 0.0;
    double cx = 0.0, cy = 0.0;    // com position
    double cax = 0.0, cay = 0.0;  // com acceleration
  };

  struct PointForce {
    int body = -1;
    double px = 0.0, py = 0.0;  // application point, world
    double fx = 0.0, fy = 0.0;
  };

  void build_model();
  void forward_kinematics(const std::vector<double>& q,
                          const std::vector<double>& qd,
                          const std::vector<double>& qdd, bool gravity_on,
                          std::vector<BodyKin>* kin) const;
  // Torques the actuators would need to realize qdd at (q, qd); gravity and
  // external point forces optional. This single routine yields both the bias
  // vector (qdd = 0) and mass-matrix columns (unit qdd, no gravity/velocity).
  std::vector<double> inverse_dynamics(const std::vector<double>& q,
                                       const std::vector<double>& qd,
                                       const std::vector<double>& qdd,
                                       bool gravity_on,
                                       const std::vector<PointForce>& ext) const;
  std::vector<PointForce> contact_forces(const std::vector<BodyKin>& kin) const;
  std::vector<double> limit_torques(const std::vector<double>& q,
                                    const std::vector<double>& qd) const;

  EnvSpec spec_;
  MorphologyVector xi_;
  std::vector<Body> bodies_;
  int ndof_ = 0;
  int nact_ = 0;
  double rest_height_ = 0.0;
};

Environment make_env(const EnvSpec& spec, const MorphologyVector& xi);

// Built-in environment families: "pendulum" (fixed base, one segment),
// "chain2" (floating torso, two 2-segment limbs), "chain3" (floating torso,
// two 3-segment limbs), "balance" (floating torso, one 2-segment leg,
// early termination on falling).
EnvSpec builtin_spec(const std::string& name);
std::vector<std::string> builtin_names();

}  // namespace coil::sim
