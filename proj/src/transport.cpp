#include "coil/transport.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "coil/errors.hpp"
#include "coil/kernels.hpp"
#include "coil/rng.hpp"

namespace coil::transport {

namespace {

// Transportation simplex over the dense bipartite problem with integer
// masses: source i supplies m units, sink j demands n units (total n*m on
// both sides, exactly representable), so flows stay integral and the basis
// never suffers round-off. Entering arcs are picked by a block search over
// reduced costs; a stall detector falls back to Bland's rule so degenerate
// pivots cannot cycle.
class TransportationSimplex {
 public:
  TransportationSimplex(const std::vector<double>& cost, int n, int m)
      : cost_(cost), n_(n), m_(m), nodes_(n + m) {}

  // Returns objective in mass units (divide by n*m for probability mass).
  double solve(std::vector<PlanEntry>* plan) {
    init_northwest();
    const double scale = 1.0 + *std::max_element(cost_.begin(), cost_.end());
    const double tol = 1e-12 * scale;
    const long max_pivots = 2000L * (nodes_ + 1) + 64L * n_ * m_ / block_size();
    long stall = 0;
    bool bland = false;
    for (long pivot = 0;; ++pivot) {
      if (pivot > max_pivots)
        throw SolverError("transportation simplex exceeded pivot budget");
      rebuild_tree();
      int ei = -1, ej = -1;
      if (!find_entering(tol, bland, &ei, &ej)) break;
      const double theta = apply_pivot(ei, ej);
      if (theta <= 0.5) {  // integer flows: zero-change (degenerate) pivot
        if (++stall > nodes_) bland = true;
      } else {
        stall = 0;
        bland = false;
      }
    }
    double total = 0.0;
    plan->clear();
    for (const Arc& a : arcs_) {
      if (a.flow <= 0.5) continue;
      plan->push_back(PlanEntry{a.src, a.snk - n_, a.flow});
      total += a.flow * cost_[static_cast<size_t>(a.src) * m_ + (a.snk - n_)];
    }
    return total;
  }

 private:
  struct Arc {
    int src;   // node id in [0, n)
    int snk;   // node id in [n, n+m)
    double flow;
  };

  int block_size() const {
    return std::max(64, static_cast<int>(2.0 * std::sqrt(double(n_) * m_)));
  }

  void init_northwest() {
    arcs_.clear();
    arcs_.reserve(nodes_ - 1);
    std::vector<double> rem_a(n_, double(m_));
    std::vector<double> rem_b(m_, double(n_));
    int i = 0, j = 0;
    while (i < n_ && j < m_) {
      const double f = std::min(rem_a[i], rem_b[j]);
      arcs_.push_back(Arc{i, n_ + j, f});
      rem_a[i] -= f;
      rem_b[j] -= f;
      if (i == n_ - 1 && j == m_ - 1) break;
      // On ties advance only one side so the basis keeps n+m-1 arcs.
      if (rem_a[i] <= 0.0 && i < n_ - 1)
        ++i;
      else
        ++j;
    }
  }

  void rebuild_tree() {
    adj_head_.assign(nodes_, -1);
    adj_next_.assign(2 * arcs_.size(), -1);
    adj_arc_.assign(2 * arcs_.size(), -1);
    int slot = 0;
    for (size_t a = 0; a < arcs_.size(); ++a) {
      for (int node : {arcs_[a].src, arcs_[a].snk}) {
        adj_arc_[slot] = static_cast<int>(a);
        adj_next_[slot] = adj_head_[node];
        adj_head_[node] = slot;
        ++slot;
      }
    }
    par_.assign(nodes_, -1);
    par_arc_.assign(nodes_, -1);
    pot_.assign(nodes_, 0.0);
    order_.clear();
    order_.reserve(nodes_);
    order_.push_back(0);
    std::vector<char> seen(nodes_, 0);
    seen[0] = 1;
    for (size_t qi = 0; qi < order_.size(); ++qi) {
      const int u = order_[qi];
      for (int s = adj_head_[u]; s >= 0; s = adj_next_[s]) {
        const int a = adj_arc_[s];
        const int v = arcs_[a].src == u ? arcs_[a].snk : arcs_[a].src;
        if (seen[v]) continue;
        seen[v] = 1;
        par_[v] = u;
        par_arc_[v] = a;
        const double c = cost_[static_cast<size_t>(arcs_[a].src) * m_ +
                               (arcs_[a].snk - n_)];
        pot_[v] = c - pot_[u];  // basic arcs satisfy u_i + v_j = c_ij
        order_.push_back(v);
      }
    }
    if (static_cast<int>(order_.size()) != nodes_)
      throw SolverError("transportation basis is not spanning");
  }

  bool find_entering(double tol, bool bland, int* ei, int* ej) {
    const long total = static_cast<long>(n_) * m_;
    if (bland) {
      for (long idx = 0; idx < total; ++idx) {
        const int i = static_cast<int>(idx / m_);
        const int j = static_cast<int>(idx % m_);
        if (cost_[idx] - pot_[i] - pot_[n_ + j] < -tol) {
          *ei = i;
          *ej = j;
          return true;
        }
      }
      return false;
    }
    const int block = block_size();
    long scanned = 0;
    double best = -tol;
    int bi = -1, bj = -1;
    while (scanned < total) {
      const long stop = std::min(total, scanned + block);
      for (; scanned < stop; ++scanned) {
        const long idx = (cursor_ + scanned) % total;
        const int i = static_cast<int>(idx / m_);
        const int j = static_cast<int>(idx % m_);
        const double rc = cost_[idx] - pot_[i] - pot_[n_ + j];
        if (rc < best) {
          best = rc;
          bi = i;
          bj = j;
        }
      }
      if (bi >= 0) break;
    }
    cursor_ = (cursor_ + scanned) % total;
    if (bi < 0) return false;
    *ei = bi;
    *ej = bj;
    return true;
  }

  // Push flow around the unique cycle closed by entering arc (ei -> ej);
  // returns theta. The leaving arc is replaced by the entering arc in place.
  double apply_pivot(int ei, int ej) {
    const int s = ei;
    const int t = n_ + ej;
    // Mark path from s to root.
    std::vector<char> on_path(nodes_, 0);
    for (int x = s; x >= 0; x = par_[x]) on_path[x] = 1;
    int lca = t;
    while (!on_path[lca]) lca = par_[lca];

    // Cycle traversal: entering arc s->t, then tree path t -> lca -> s.
    // Walking x -> par[x] from t: flow delta is +1 if x is a source node,
    // -1 if x is a sink. Walking down from lca to s (collected as s -> lca):
    // delta is +1 if x is a sink, -1 if x is a source.
    struct CycleArc {
      int arc;
      int dir;  // +1 increases flow, -1 decreases
    };
    std::vector<CycleArc> cyc;
    for (int x = t; x != lca; x = par_[x])
      cyc.push_back(CycleArc{par_arc_[x], x < n_ ? +1 : -1});
    for (int x = s; x != lca; x = par_[x])
      cyc.push_back(CycleArc{par_arc_[x], x >= n_ ? +1 : -1});

    double theta = std::numeric_limits<double>::infinity();
    int leaving = -1;
    for (const CycleArc& ca : cyc) {
      if (ca.dir < 0 && arcs_[ca.arc].flow < theta) {
        theta = arcs_[ca.arc].flow;
        leaving = ca.arc;
      }
    }
    if (leaving < 0)
      throw SolverError("transportation pivot found no leaving arc");
    for (const CycleArc& ca : cyc) arcs_[ca.arc].flow += ca.dir * theta;
    arcs_[leaving] = Arc{s, t, theta};
    return theta;
  }

  std::vector<double> cost_;
  int n_, m_, nodes_;
  std::vector<Arc> arcs_;
  std::vector<int> adj_head_, adj_next_, adj_arc_;
  std::vector<int> par_, par_arc_, order_;
  std::vector<double> pot_;
  long cursor_ = 0;
};

}  // namespace

std::pair<double, TransportPlan> wasserstein_exact(
    const EmpiricalDistribution& a, const EmpiricalDistribution& b) {
  if (a.n() < 1 || b.n() < 1)
    throw EmptyInput("empirical distributions must be non-empty");
  if (a.dim() != b.dim())
    throw DimensionError("distribution dimensions differ: " +
                         std::to_string(a.dim()) + " vs " +
                         std::to_string(b.dim()));
  const int n = a.n();
  const int m = b.n();
  const int d = a.dim();

  std::vector<double> xa(static_cast<size_t>(n) * d);
  std::vector<double> xb(static_cast<size_t>(m) * d);
  for (int i = 0; i < n; ++i)
    std::copy(a.points[i].begin(), a.points[i].end(), xa.begin() + static_cast<size_t>(i) * d);
  for (int j = 0; j < m; ++j)
    std::copy(b.points[j].begin(), b.points[j].end(), xb.begin() + static_cast<size_t>(j) * d);

  std::vector<double> cost(static_cast<size_t>(n) * m);
  kernels::pairwise_sqdist_auto(xa.data(), n, xb.data(), m, d, cost.data());
  for (double& c : cost) c = std::sqrt(c);

  TransportationSimplex simplex(cost, n, m);
  std::vector<PlanEntry> entries;
  const double units = simplex.solve(&entries);

  const double mass = static_cast<double>(n) * m;
  TransportPlan plan;
  plan.entries = std::move(entries);
  for (PlanEntry& e : plan.entries) e.weight /= mass;
  plan.cost = units / mass;
  return {plan.cost, plan};
}

EmpiricalDistribution subsample(
    const std::vector<features::FeatureTrajectory>& trajs, int n,
    std::uint64_t seed) {
  size_t total = 0;
  for (const auto& t : trajs) total += t.rows.size();
  if (total == 0) throw EmptyInput("no states available to subsample");
  if (n < 1) throw EmptyInput("subsample size must be at least 1");

  std::vector<std::pair<int, int>> index;  // (trajectory, row)
  index.reserve(total);
  for (size_t ti = 0; ti < trajs.size(); ++ti)
    for (size_t ri = 0; ri < trajs[ti].rows.size(); ++ri)
      index.emplace_back(static_cast<int>(ti), static_cast<int>(ri));

  const size_t k = std::min<size_t>(n, total);
  Rng rng(seed);
  // Partial Fisher-Yates: the first k entries become the sample.
  for (size_t i = 0; i < k; ++i) {
    const size_t j = i + rng.index(total - i);
    std::swap(index[i], index[j]);
  }

  EmpiricalDistribution out;
  out.points.reserve(k);
  for (size_t i = 0; i < k; ++i) {
    const auto& [ti, ri] = index[i];
    out.points.push_back(features::position_slice(trajs[ti].rows[ri],
                                                  trajs[ti].schema));
  }
  return out;
}

double mean_pairwise_demo_distance(
    const std::vector<features::FeatureTrajectory>& demos) {
  if (demos.size() < 2)
    throw InsufficientData("need at least two demonstrations");
  std::vector<EmpiricalDistribution> dists;
  dists.reserve(demos.size());
  for (size_t i = 0; i < demos.size(); ++i) {
    dists.push_back(subsample({demos[i]}, kDefaultSubsampleCap,
                              derive_seed(0x9d5b1735u, "demo-pairwise", i)));
  }
  double sum = 0.0;
  int pairs = 0;
  for (size_t i = 0; i < demos.size(); ++i)
    for (size_t j = i + 1; j < demos.size(); ++j) {
      sum += wasserstein_exact(dists[i], dists[j]).first;
      ++pairs;
    }
  return sum / pairs;
}

}  // namespace coil::transport
