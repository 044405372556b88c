#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "coil/features.hpp"

using namespace coil;

namespace {
sim::Environment zero_noise_env(const std::string& name) {
  sim::EnvSpec spec = sim::builtin_spec(name);
  spec.reset_noise = 0.0;
  return sim::make_env(spec, spec.default_morphology);
}
}  // namespace

TEST_CASE("schema arithmetic: 2-limb 3-segment body gives dimension 26") {
  const features::FeatureSchema s = features::schema_for_env(sim::builtin_spec("chain3"));
  CHECK(s.limbs == 2);
  CHECK(s.markers_per_limb == 3);
  CHECK(s.base_velocity);
  CHECK(s.dim() == 26);
  CHECK(s.position_dim() == 12);
}

TEST_CASE("rest pose features are cumulative offsets with zero velocities") {
  const auto env = zero_noise_env("chain3");
  const auto schema = features::schema_for_env(env.spec());
  const sim::MarkerSet ms = env.markers(env.reset(0));
  const auto f = features::phi(ms, ms.base_vx, ms.base_vy, schema);
  REQUIRE(static_cast<int>(f.size()) == schema.dim());
  const auto& xi = env.spec().default_morphology;
  int k = 0;
  for (int limb = 0; limb < 2; ++limb) {
    double cum = 0.0;
    for (int seg = 0; seg < 3; ++seg) {
      cum += xi[limb * 3 + seg];
      CHECK(f[k++] == doctest::Approx(0.0).epsilon(1e-12));   // relative x
      CHECK(f[k++] == doctest::Approx(-cum).epsilon(1e-12));  // hangs downward
    }
  }
  for (int i = schema.position_dim(); i < schema.dim(); ++i)
    CHECK(f[i] == doctest::Approx(0.0));
}

TEST_CASE("relative position features ignore rigid translation") {
  const auto env = zero_noise_env("chain2");
  const auto schema = features::schema_for_env(env.spec());
  sim::SimState st = env.reset(17);
  const sim::MarkerSet before = env.markers(st);
  st.q[0] += 3.21;  // slide the whole body
  st.q[1] += 0.5;
  const sim::MarkerSet after = env.markers(st);
  const auto fb = features::phi(before, before.base_vx, before.base_vy, schema);
  const auto fa = features::phi(after, after.base_vx, after.base_vy, schema);
  for (int i = 0; i < schema.dim(); ++i)
    CHECK(fa[i] == doctest::Approx(fb[i]).epsilon(1e-12));
}

TEST_CASE("imitator with extra segments maps into the demonstrator schema") {
  // Demonstrator: chain2 (2 markers per limb). Imitator: chain3.
  const auto schema = features::schema_for_env(sim::builtin_spec("chain2"));
  const auto env3 = zero_noise_env("chain3");
  const sim::MarkerSet ms = env3.markers(env3.reset(0));
  const auto f = features::phi(ms, ms.base_vx, ms.base_vy, schema);
  CHECK(static_cast<int>(f.size()) == schema.dim());
  // Selected markers are the first joint and the tip: offsets 0.2 and 0.6.
  CHECK(f[1] == doctest::Approx(-0.2));
  CHECK(f[3] == doctest::Approx(-0.6));
}

TEST_CASE("schema mismatch raises SchemaError") {
  const auto env = zero_noise_env("pendulum");
  const sim::MarkerSet ms = env.markers(env.reset(0));
  features::FeatureSchema demanding;
  demanding.limbs = 1;
  demanding.markers_per_limb = 3;  // pendulum only has 1 segment marker
  demanding.base_velocity = false;
  CHECK_THROWS_AS(features::phi(ms, 0, 0, demanding), SchemaError);
  features::FeatureSchema wrong_limbs;
  wrong_limbs.limbs = 2;
  wrong_limbs.markers_per_limb = 1;
  CHECK_THROWS_AS(features::phi(ms, 0, 0, wrong_limbs), SchemaError);
}

TEST_CASE("phi_trajectory preserves order and length, rejects empty input") {
  const auto env = zero_noise_env("chain2");
  const auto schema = features::schema_for_env(env.spec());
  std::vector<sim::SimState> traj;
  sim::SimState st = env.reset(5);
  for (int i = 0; i < 40; ++i) {
    traj.push_back(st);
    st = env.step(st, std::vector<double>(env.action_dim(), 0.2)).state;
  }
  const auto ft = features::phi_trajectory(traj, env, schema);
  CHECK(ft.length() == 40);
  const sim::MarkerSet first = env.markers(traj[0]);
  const auto f0 = features::phi(first, first.base_vx, first.base_vy, schema);
  CHECK(ft.rows[0] == f0);
  CHECK_THROWS_AS(features::phi_trajectory({}, env, schema), EmptyTrajectory);
}

TEST_CASE("constant trajectory yields identical feature rows") {
  const auto env = zero_noise_env("chain2");
  const auto schema = features::schema_for_env(env.spec());
  const std::vector<sim::SimState> traj(7, env.reset(9));
  const auto ft = features::phi_trajectory(traj, env, schema);
  for (int i = 1; i < ft.length(); ++i) CHECK(ft.rows[i] == ft.rows[0]);
}

TEST_CASE("position slice keeps positions and drops all velocities") {
  const auto env = zero_noise_env("chain3");
  const auto schema = features::schema_for_env(env.spec());
  sim::SimState st = env.reset(3);
  st.qd.assign(st.qd.size(), 0.4);
  const sim::MarkerSet ms = env.markers(st);
  auto f = features::phi(ms, ms.base_vx, ms.base_vy, schema);
  const auto slice = features::position_slice(f, schema);
  CHECK(static_cast<int>(slice.size()) == schema.position_dim());
  CHECK(static_cast<int>(slice.size()) == schema.dim() - 12 - 2);
  for (int i = 0; i < schema.position_dim(); ++i) CHECK(slice[i] == f[i]);
  // Different velocities, same slice.
  auto f2 = f;
  for (int i = schema.position_dim(); i < schema.dim(); ++i) f2[i] += 1.5;
  CHECK(features::position_slice(f2, schema) == slice);
}
