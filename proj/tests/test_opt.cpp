#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <set>

#include "coil/cmaes.hpp"
#include "coil/linalg.hpp"
#include "coil/lowdisc.hpp"
#include "coil/pso.hpp"

using namespace coil;

TEST_CASE("halton points live in the unit cube and are deterministic") {
  const Tensor a = lowdisc::scrambled_halton(512, 5, 99);
  const Tensor b = lowdisc::scrambled_halton(512, 5, 99);
  CHECK(a.v == b.v);
  for (double x : a.v) {
    CHECK(x >= 0.0);
    CHECK(x < 1.0);
  }
  const Tensor c = lowdisc::scrambled_halton(512, 5, 100);
  CHECK(a.v != c.v);
}

TEST_CASE("halton covers space more evenly than chance") {
  // 4x4 stratification in 2-D: every cell of a 1024-point set gets close to
  // its fair share. A uniform RNG routinely misses this bound.
  const int n = 1024;
  const Tensor pts = lowdisc::scrambled_halton(n, 2, 3);
  int counts[16] = {};
  for (int i = 0; i < n; ++i) {
    const int cx = std::min(3, static_cast<int>(pts.at(i, 0) * 4.0));
    const int cy = std::min(3, static_cast<int>(pts.at(i, 1) * 4.0));
    ++counts[cy * 4 + cx];
  }
  for (int c : counts) {
    CHECK(c > 64 - 13);
    CHECK(c < 64 + 13);
  }
}

TEST_CASE("halton points are distinct") {
  const Tensor pts = lowdisc::scrambled_halton(2048, 3, 17);
  std::set<std::vector<double>> seen;
  for (int i = 0; i < pts.rows; ++i)
    seen.insert({pts.at(i, 0), pts.at(i, 1), pts.at(i, 2)});
  CHECK(seen.size() == 2048);
}

TEST_CASE("cmaes drives a shifted sphere below 1e-3") {
  const std::vector<double> target = {0.3, 0.6, 0.45, 0.7};
  opt::Cmaes es(4, 7);
  for (int gen = 0; gen < 50; ++gen) {
    const Tensor xs = es.ask();
    std::vector<double> fit(xs.rows);
    for (int k = 0; k < xs.rows; ++k) {
      double s = 0.0;
      for (int d = 0; d < 4; ++d) {
        const double u = xs.at(k, d) - target[d];
        s += u * u;
      }
      fit[k] = s;
    }
    es.tell(xs, fit);
  }
  CHECK(es.best_fitness() < 1e-3);
}

TEST_CASE("cmaes covariance stays symmetric positive definite") {
  opt::Cmaes es(3, 12);
  for (int gen = 0; gen < 30; ++gen) {
    const Tensor xs = es.ask();
    std::vector<double> fit(xs.rows);
    for (int k = 0; k < xs.rows; ++k)
      fit[k] = std::sin(7.0 * xs.at(k, 0)) + xs.at(k, 1) * xs.at(k, 2);
    es.tell(xs, fit);

    const Tensor& c = es.covariance();
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        CHECK(c.at(i, j) == doctest::Approx(c.at(j, i)).epsilon(1e-12));
    Tensor v(0, 0);
    std::vector<double> eig;
    linalg::jacobi_eigen(c, &v, &eig);
    for (double e : eig) CHECK(e > 0.0);
  }
}

TEST_CASE("cmaes proposals respect the unit cube") {
  opt::Cmaes es(2, 5);
  for (int gen = 0; gen < 20; ++gen) {
    const Tensor xs = es.ask();
    for (double x : xs.v) {
      CHECK(x >= 0.0);
      CHECK(x <= 1.0);
    }
    std::vector<double> fit(xs.rows, 0.0);
    for (int k = 0; k < xs.rows; ++k) fit[k] = -xs.at(k, 0);  // push at a bound
    es.tell(xs, fit);
  }
}

TEST_CASE("pso finds the argmax of a quadratic surface") {
  const std::vector<double> target = {0.62, 0.18, 0.8};
  auto objective = [&](const Tensor& xs) {
    std::vector<double> out(xs.rows);
    for (int i = 0; i < xs.rows; ++i) {
      double s = 0.0;
      for (int d = 0; d < 3; ++d) {
        const double u = xs.at(i, d) - target[d];
        s += u * u;
      }
      out[i] = -s;
    }
    return out;
  };
  const auto res = opt::pso_maximize(objective, 3, 60, 80, 2);
  for (int d = 0; d < 3; ++d)
    CHECK(std::fabs(res.best_point[d] - target[d]) < 0.01);
  CHECK(res.best_value > -1e-3);
}

TEST_CASE("pso stays in bounds and is deterministic") {
  auto objective = [&](const Tensor& xs) {
    std::vector<double> out(xs.rows);
    for (int i = 0; i < xs.rows; ++i) out[i] = xs.at(i, 0) + xs.at(i, 1);
    return out;
  };
  const auto r1 = opt::pso_maximize(objective, 2, 30, 40, 11);
  const auto r2 = opt::pso_maximize(objective, 2, 30, 40, 11);
  CHECK(r1.best_point == r2.best_point);
  for (double x : r1.best_point) {
    CHECK(x >= 0.0);
    CHECK(x <= 1.0);
  }
  // Linear objective pushes to the corner.
  CHECK(r1.best_point[0] == doctest::Approx(1.0));
  CHECK(r1.best_point[1] == doctest::Approx(1.0));
}
