#include "coil/sim/env.hpp"

#include <algorithm>
#include <cmath>

#include "coil/linalg.hpp"
#include "coil/rng.hpp"

namespace coil::sim {

namespace {
constexpr double kHalfPi = 1.5707963267948966;

inline double cross2(double ax, double ay, double bx, double by) {
  return ax * by - ay * bx;
}
}  // namespace

Environment::Environment(EnvSpec spec, MorphologyVector xi)
    : spec_(std::move(spec)), xi_(std::move(xi)) {
  if (spec_.dt <= 0.0) throw BoundsViolation("timestep must be positive");
  if (spec_.episode_length <= 0)
    throw BoundsViolation("episode length must be positive");
  if (spec_.substeps <= 0) throw BoundsViolation("substeps must be positive");
  if (xi_.size() != spec_.morphology_dim())
    throw DimensionError("morphology has " + std::to_string(xi_.size()) +
                         " parameters, spec expects " +
                         std::to_string(spec_.morphology_dim()));
  spec_.bounds().validate(xi_);
  build_model();
}

void Environment::build_model() {
  bodies_.clear();
  ndof_ = 0;
  nact_ = 0;
  int base_body = -1;
  if (floating()) {
    Body slide;
    slide.joint = Body::Joint::PrismX;
    slide.parent = -1;
    bodies_.push_back(slide);

    Body torso;
    torso.joint = Body::Joint::PrismZ;
    torso.parent = 0;
    torso.length = spec_.base_length;
    torso.mass = spec_.base_mass;
    torso.inertia = spec_.base_mass * spec_.base_length * spec_.base_length / 12.0;
    torso.com_offset = 0.0;  // frame origin at torso centre
    bodies_.push_back(torso);
    base_body = 1;
  }
  double tallest = 0.0;
  for (int limb = 0; limb < spec_.limb_count; ++limb) {
    int parent = base_body;
    double anchor_x = 0.0;
    if (floating() && spec_.limb_count > 1) {
      // Limbs attach at the torso ends: limb 0 rear, limb 1 front.
      anchor_x = (limb == 0 ? -0.5 : 0.5) * spec_.base_length;
    }
    double total = 0.0;
    for (int seg = 0; seg < spec_.segments_per_limb; ++seg) {
      const double len = xi_[limb * spec_.segments_per_limb + seg];
      Body b;
      b.joint = Body::Joint::Revolute;
      b.parent = parent;
      b.anchor_x = seg == 0 ? anchor_x : bodies_[parent].length;
      b.anchor_y = 0.0;
      b.rest_angle = seg == 0 ? -kHalfPi : 0.0;  // limbs hang straight down
      b.length = len;
      b.mass = spec_.density * len;
      b.inertia = b.mass * len * len / 12.0;
      b.com_offset = 0.5 * len;
      b.damping = spec_.joint_damping;
      b.actuated = true;
      b.limb = limb;
      b.seg = seg;
      parent = static_cast<int>(bodies_.size());
      bodies_.push_back(b);
      total += len;
    }
    tallest = std::max(tallest, total);
  }
  ndof_ = static_cast<int>(bodies_.size());
  for (const auto& b : bodies_) nact_ += b.actuated ? 1 : 0;
  rest_height_ = floating() ? tallest : 0.0;
}

int Environment::observation_dim() const {
  // Floating base drops the absolute x coordinate from the position block.
  return 2 * ndof_ - (floating() ? 1 : 0);
}

SimState Environment::reset(std::uint64_t seed) const {
  SimState st;
  st.q.assign(ndof_, 0.0);
  st.qd.assign(ndof_, 0.0);
  if (floating()) st.q[1] = rest_height_;  // torso centre above ground
  Rng rng(derive_seed(seed, "sim-reset"));
  for (int i = 0; i < ndof_; ++i) {
    if (bodies_[i].joint == Body::Joint::Revolute)
      st.q[i] += rng.uniform(-spec_.reset_noise, spec_.reset_noise);
  }
  return st;
}

void Environment::forward_kinematics(const std::vector<double>& q,
                                     const std::vector<double>& qd,
                                     const std::vector<double>& qdd,
                                     bool gravity_on,
                                     std::vector<BodyKin>* kin) const {
  kin->assign(bodies_.size(), BodyKin{});
  const double g_ay = gravity_on ? spec_.gravity : 0.0;
  for (size_t i = 0; i < bodies_.size(); ++i) {
    const Body& b = bodies_[i];
    BodyKin pk;  // world frame defaults
    if (b.parent >= 0) {
      pk = (*kin)[b.parent];
    } else {
      pk.ay = g_ay;  // gravity as upward base acceleration
    }
    BodyKin& k = (*kin)[i];

    double local_dx = b.anchor_x;
    double local_dy = b.anchor_y;
    double axis_wx = 0.0, axis_wy = 0.0;
    if (b.joint == Body::Joint::PrismX) {
      local_dx += q[i];
      axis_wx = pk.c;
      axis_wy = pk.s;
    } else if (b.joint == Body::Joint::PrismZ) {
      local_dy += q[i];
      axis_wx = -pk.s;
      axis_wy = pk.c;
    }
    const double rx = pk.c * local_dx - pk.s * local_dy;
    const double ry = pk.s * local_dx + pk.c * local_dy;
    k.ox = pk.ox + rx;
    k.oy = pk.oy + ry;

    if (b.joint == Body::Joint::Revolute) {
      k.phi = pk.phi + b.rest_angle + q[i];
      k.w = pk.w + qd[i];
      k.wd = pk.wd + qdd[i];
    } else {
      k.phi = pk.phi;
      k.w = pk.w;
      k.wd = pk.wd;
    }
    k.c = std::cos(k.phi);
    k.s = std::sin(k.phi);

    k.vx = pk.vx + pk.w * (-ry);
    k.vy = pk.vy + pk.w * rx;
    k.ax = pk.ax + pk.wd * (-ry) - pk.w * pk.w * rx;
    k.ay = pk.ay + pk.wd * rx - pk.w * pk.w * ry;
    if (b.joint != Body::Joint::Revolute) {
      k.vx += axis_wx * qd[i];
      k.vy += axis_wy * qd[i];
      k.ax += axis_wx * qdd[i] + 2.0 * pk.w * (-axis_wy) * qd[i];
      k.ay += axis_wy * qdd[i] + 2.0 * pk.w * axis_wx * qd[i];
    }

    const double px = k.c * b.com_offset;
    const double py = k.s * b.com_offset;
    k.cx = k.ox + px;
    k.cy = k.oy + py;
    k.cax = k.ax + k.wd * (-py) - k.w * k.w * px;
    k.cay = k.ay + k.wd * px - k.w * k.w * py;
  }
}

std::vector<double> Environment::inverse_dynamics(
    const std::vector<double>& q, const std::vector<double>& qd,
    const std::vector<double>& qdd, bool gravity_on,
    const std::vector<PointForce>& ext) const {
  std::vector<BodyKin> kin;
  forward_kinematics(q, qd, qdd, gravity_on, &kin);

  const size_t nb = bodies_.size();
  std::vector<double> fx(nb, 0.0), fy(nb, 0.0), nz(nb, 0.0);
  for (size_t i = 0; i < nb; ++i) {
    const Body& b = bodies_[i];
    const BodyKin& k = kin[i];
    fx[i] = b.mass * k.cax;
    fy[i] = b.mass * k.cay;
    nz[i] = b.inertia * k.wd +
            cross2(k.cx - k.ox, k.cy - k.oy, b.mass * k.cax, b.mass * k.cay);
  }
  for (const PointForce& pf : ext) {
    fx[pf.body] -= pf.fx;
    fy[pf.body] -= pf.fy;
    nz[pf.body] -= cross2(pf.px - kin[pf.body].ox, pf.py - kin[pf.body].oy,
                          pf.fx, pf.fy);
  }
  std::vector<double> tau(ndof_, 0.0);
  for (int i = static_cast<int>(nb) - 1; i >= 0; --i) {
    const Body& b = bodies_[i];
    if (b.parent >= 0) {
      fx[b.parent] += fx[i];
      fy[b.parent] += fy[i];
      nz[b.parent] += nz[i] + cross2(kin[i].ox - kin[b.parent].ox,
                                     kin[i].oy - kin[b.parent].oy, fx[i], fy[i]);
    }
    const BodyKin pk = b.parent >= 0 ? kin[b.parent] : BodyKin{};
    switch (b.joint) {
      case Body::Joint::Revolute:
        tau[i] = nz[i];
        break;
      case Body::Joint::PrismX:
        tau[i] = fx[i] * pk.c + fy[i] * pk.s;
        break;
      case Body::Joint::PrismZ:
        tau[i] = fx[i] * (-pk.s) + fy[i] * pk.c;
        break;
    }
  }
  return tau;
}

std::vector<Environment::PointForce> Environment::contact_forces(
    const std::vector<BodyKin>& kin) const {
  std::vector<PointForce> out;
  if (!floating()) return out;  // ground plane exists for locomotion only
  auto probe = [&](int body, double lx, double ly) {
    const BodyKin& k = kin[body];
    const double px = k.ox + k.c * lx - k.s * ly;
    const double py = k.oy + k.s * lx + k.c * ly;
    if (py >= 0.0) return;
    const double rx = px - k.ox;
    const double ry = py - k.oy;
    const double vx = k.vx + k.w * (-ry);
    const double vy = k.vy + k.w * rx;
    double fn = -spec_.contact_stiffness * py - spec_.contact_damping * vy;
    if (fn < 0.0) fn = 0.0;
    // Bounded, smooth Coulomb-like tangential force; keeps the step map
    // deterministic and continuously differentiable.
    const double ft = -spec_.friction * fn * (vx / (std::fabs(vx) + 0.05));
    out.push_back(PointForce{body, px, py, ft, fn});
  };
  for (size_t i = 0; i < bodies_.size(); ++i) {
    const Body& b = bodies_[i];
    if (b.joint == Body::Joint::Revolute) {
      probe(static_cast<int>(i), b.length, 0.0);
    } else if (b.mass > 0.0 && b.length > 0.0) {
      probe(static_cast<int>(i), -0.5 * b.length, 0.0);
      probe(static_cast<int>(i), 0.5 * b.length, 0.0);
    }
  }
  return out;
}

std::vector<double> Environment::limit_torques(const std::vector<double>& q,
                                               const std::vector<double>& qd) const {
  std::vector<double> tau(ndof_, 0.0);
  for (int i = 0; i < ndof_; ++i) {
    if (bodies_[i].joint != Body::Joint::Revolute) continue;
    const double lim = spec_.joint_limit;
    if (q[i] > lim)
      tau[i] = -spec_.joint_limit_stiffness * (q[i] - lim) -
               spec_.joint_damping * qd[i];
    else if (q[i] < -lim)
      tau[i] = -spec_.joint_limit_stiffness * (q[i] + lim) -
               spec_.joint_damping * qd[i];
  }
  return tau;
}

void Environment::dynamics_terms(const std::vector<double>& q,
                                 const std::vector<double>& qd,
                                 bool with_contacts, Tensor* mass,
                                 std::vector<double>* bias) const {
  std::vector<PointForce> ext;
  if (with_contacts) {
    std::vector<BodyKin> kin;
    forward_kinematics(q, qd, std::vector<double>(ndof_, 0.0), true, &kin);
    ext = contact_forces(kin);
  }
  *bias = inverse_dynamics(q, qd, std::vector<double>(ndof_, 0.0), true, ext);
  *mass = Tensor(ndof_, ndof_);
  std::vector<double> zero(ndof_, 0.0);
  std::vector<double> unit(ndof_, 0.0);
  for (int j = 0; j < ndof_; ++j) {
    unit[j] = 1.0;
    const std::vector<double> col = inverse_dynamics(q, zero, unit, false, {});
    for (int i = 0; i < ndof_; ++i) mass->at(i, j) = col[i];
    unit[j] = 0.0;
  }
}

StepResult Environment::step(const SimState& state,
                             const std::vector<double>& action) const {
  if (static_cast<int>(action.size()) != nact_)
    throw InvalidAction("action has " + std::to_string(action.size()) +
                        " entries, environment expects " +
                        std::to_string(nact_));
  for (double a : action)
    if (!std::isfinite(a)) throw InvalidAction("non-finite action entry");

  std::vector<double> tau_app(ndof_, 0.0);
  int ai = 0;
  for (int i = 0; i < ndof_; ++i) {
    if (!bodies_[i].actuated) continue;
    const double a = std::clamp(action[ai++], -1.0, 1.0);
    tau_app[i] = a * spec_.torque_limit;
  }

  StepResult out;
  out.state = state;
  std::vector<double>& q = out.state.q;
  std::vector<double>& qd = out.state.qd;
  const double h = spec_.dt / spec_.substeps;
  const std::vector<double> zero(ndof_, 0.0);

  for (int sub = 0; sub < spec_.substeps; ++sub) {
    std::vector<BodyKin> kin;
    forward_kinematics(q, qd, zero, true, &kin);
    const std::vector<PointForce> ext = contact_forces(kin);
    const std::vector<double> bias = inverse_dynamics(q, qd, zero, true, ext);
    const std::vector<double> lim = limit_torques(q, qd);

    Tensor m(ndof_, ndof_);
    std::vector<double> unit(ndof_, 0.0);
    for (int j = 0; j < ndof_; ++j) {
      unit[j] = 1.0;
      const std::vector<double> col = inverse_dynamics(q, zero, unit, false, {});
      for (int i = 0; i < ndof_; ++i) m.at(i, j) = col[i];
      unit[j] = 0.0;
    }

    // Implicit joint damping: (M + h D) v' = M v + h (tau - bias).
    std::vector<double> rhs(ndof_, 0.0);
    for (int i = 0; i < ndof_; ++i) {
      double mv = 0.0;
      for (int j = 0; j < ndof_; ++j) mv += m.at(i, j) * qd[j];
      rhs[i] = mv + h * (tau_app[i] + lim[i] - bias[i]);
    }
    Tensor a = m;
    for (int i = 0; i < ndof_; ++i) a.at(i, i) += h * bodies_[i].damping;
    bool ok = true;
    try {
      const Tensor l = linalg::cholesky(a);
      qd = linalg::chol_solve(l, rhs);
    } catch (const SolverError&) {
      ok = false;
    }
    if (!ok) {
      out.state.failed = true;
      break;
    }
    for (int i = 0; i < ndof_; ++i) q[i] += h * qd[i];
  }

  for (double x : q)
    if (!std::isfinite(x)) out.state.failed = true;
  for (double x : qd)
    if (!std::isfinite(x)) out.state.failed = true;

  out.state.step_index = state.step_index + 1;
  out.truncated = out.state.step_index >= spec_.episode_length;
  bool rule_fired = false;
  if (spec_.early_termination && floating() && !out.state.failed) {
    rule_fired =
        base_height(out.state) < spec_.termination_height_ratio * rest_height_;
  }
  out.terminated = out.state.failed || rule_fired || out.truncated;
  return out;
}

MarkerSet Environment::markers(const SimState& state) const {
  std::vector<BodyKin> kin;
  forward_kinematics(state.q, state.qd, std::vector<double>(ndof_, 0.0), false,
                     &kin);
  MarkerSet ms;
  ms.limbs.resize(spec_.limb_count);
  for (size_t i = 0; i < bodies_.size(); ++i) {
    const Body& b = bodies_[i];
    if (b.limb < 0) continue;
    const BodyKin& k = kin[i];
    if (b.seg == 0) {
      // Anchor marker: the joint origin of the limb's first segment, which
      // is a material point of the base.
      Marker anchor;
      anchor.px = k.ox;
      anchor.py = k.oy;
      if (b.parent >= 0) {
        const BodyKin& pk = kin[b.parent];
        anchor.vx = pk.vx + pk.w * (-(k.oy - pk.oy));
        anchor.vy = pk.vy + pk.w * (k.ox - pk.ox);
      }
      ms.limbs[b.limb].push_back(anchor);
    }
    Marker tip;
    const double rx = k.c * b.length;
    const double ry = k.s * b.length;
    tip.px = k.ox + rx;
    tip.py = k.oy + ry;
    tip.vx = k.vx + k.w * (-ry);
    tip.vy = k.vy + k.w * rx;
    ms.limbs[b.limb].push_back(tip);
  }
  if (floating()) {
    const BodyKin& torso = kin[1];
    ms.base_vx = torso.vx;
    ms.base_vy = torso.vy;
  }
  return ms;
}

double Environment::energy(const SimState& state) const {
  Tensor m;
  std::vector<double> bias;
  dynamics_terms(state.q, state.qd, false, &m, &bias);
  double kinetic = 0.0;
  for (int i = 0; i < ndof_; ++i)
    for (int j = 0; j < ndof_; ++j)
      kinetic += 0.5 * state.qd[i] * m.at(i, j) * state.qd[j];
  std::vector<BodyKin> kin;
  forward_kinematics(state.q, state.qd, std::vector<double>(ndof_, 0.0), false,
                     &kin);
  double potential = 0.0;
  for (size_t i = 0; i < bodies_.size(); ++i)
    potential += bodies_[i].mass * spec_.gravity * kin[i].cy;
  return kinetic + potential;
}

double Environment::base_height(const SimState& state) const {
  return floating() ? state.q[1] : 0.0;
}

double Environment::base_x(const SimState& state) const {
  return floating() ? state.q[0] : 0.0;
}

Environment make_env(const EnvSpec& spec, const MorphologyVector& xi) {
  return Environment(spec, xi);
}

EnvSpec builtin_spec(const std::string& name) {
  EnvSpec s;
  s.name = name;
  if (name == "pendulum") {
    s.base = BaseKind::Fixed;
    s.limb_count = 1;
    s.segments_per_limb = 1;
    s.default_morphology.lengths = {0.6};
    s.torque_limit = 8.0;
    s.joint_damping = 0.3;
    s.joint_limit = 3.5;
    s.episode_length = 200;
    s.early_termination = false;
  } else if (name == "chain2") {
    s.base = BaseKind::Floating;
    s.limb_count = 2;
    s.segments_per_limb = 2;
    s.default_morphology.lengths = {0.3, 0.3, 0.3, 0.3};
    s.episode_length = 1000;
    s.early_termination = false;
  } else if (name == "chain3") {
    s.base = BaseKind::Floating;
    s.limb_count = 2;
    s.segments_per_limb = 3;
    s.default_morphology.lengths = {0.2, 0.2, 0.2, 0.2, 0.2, 0.2};
    s.episode_length = 1000;
    s.early_termination = false;
  } else if (name == "balance") {
    s.base = BaseKind::Floating;
    s.limb_count = 1;
    s.segments_per_limb = 2;
    s.default_morphology.lengths = {0.3, 0.3};
    s.episode_length = 300;
    s.early_termination = true;
  } else {
    throw BoundsViolation("unknown environment: " + name);
  }
  return s;
}

std::vector<std::string> builtin_names() {
  return {"pendulum", "chain2", "chain3", "balance"};
}

}  // namespace coil::sim
