#include "coil/morphopt.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "coil/lowdisc.hpp"
#include "coil/rng.hpp"

namespace coil::morph {

void MorphDataset::begin_entry(const sim::MorphologyVector& xi) {
  if (has_open_entry()) entries_.back().completed = true;
  MorphEntry e;
  e.xi = xi;
  entries_.push_back(std::move(e));
}

void MorphDataset::add_episode_distance(double d) {
  if (!has_open_entry())
    throw InsufficientData("morph dataset: no open entry to record into");
  entries_.back().episode_distances.push_back(d);
}

void MorphDataset::complete_entry() {
  if (!has_open_entry())
    throw InsufficientData("morph dataset: no open entry to complete");
  entries_.back().completed = true;
}

void MorphDataset::add_completed(const sim::MorphologyVector& xi,
                                 const std::vector<double>& distances) {
  begin_entry(xi);
  entries_.back().episode_distances = distances;
  entries_.back().completed = true;
}

int MorphDataset::completed_count() const {
  int n = 0;
  for (const auto& e : entries_) n += e.completed ? 1 : 0;
  return n;
}

bool MorphDataset::has_open_entry() const {
  return !entries_.empty() && !entries_.back().completed;
}

Targets targets(const MorphDataset& ds, const sim::MorphologyBounds& bounds) {
  if (ds.size() == 0) throw EmptyInput("targets: empty morphology dataset");
  std::vector<std::vector<double>> rows;
  Targets out;
  for (int i = 0; i < ds.size(); ++i) {
    const MorphEntry& e = ds.entry(i);
    if (!e.completed) continue;
    double sum = 0.0;
    int count = 0;
    for (double d : e.episode_distances) {
      if (std::isfinite(d)) {
        sum += d;
        ++count;
      }
    }
    if (count == 0) continue;  // every episode failed: nothing to learn from
    rows.push_back(bounds.normalize(e.xi));
    out.y.push_back(sum / count);
    out.entry_index.push_back(i);
  }
  out.x = Tensor(static_cast<int>(rows.size()),
                 rows.empty() ? bounds.size() : static_cast<int>(rows[0].size()));
  for (size_t r = 0; r < rows.size(); ++r)
    for (size_t c = 0; c < rows[r].size(); ++c)
      out.x.at(static_cast<int>(r), static_cast<int>(c)) = rows[r][c];
  return out;
}

std::optional<std::pair<sim::MorphologyVector, double>> incumbent_best(
    const MorphDataset& ds, const sim::MorphologyBounds& bounds) {
  if (ds.size() == 0) return std::nullopt;
  const Targets t = targets(ds, bounds);
  if (t.y.empty()) return std::nullopt;
  int best = 0;
  for (size_t i = 1; i < t.y.size(); ++i)
    if (t.y[i] < t.y[best]) best = static_cast<int>(i);
  return std::make_pair(ds.entry(t.entry_index[best]).xi, t.y[best]);
}

namespace {
sim::MorphologyVector random_in_bounds(const sim::MorphologyBounds& bounds,
                                       Rng& rng) {
  sim::MorphologyVector xi;
  xi.lengths.resize(bounds.size());
  for (int d = 0; d < bounds.size(); ++d)
    xi[d] = rng.uniform(bounds.lower[d], bounds.upper[d]);
  return xi;
}
}  // namespace

sim::MorphologyVector FixedStrategy::propose(const MorphDataset&,
                                             const sim::MorphologyBounds&) {
  return xi_;
}

sim::MorphologyVector RandomStrategy::propose(
    const MorphDataset&, const sim::MorphologyBounds& bounds) {
  Rng rng(derive_seed(seed_, "random-strategy", round_++));
  return random_in_bounds(bounds, rng);
}

sim::MorphologyVector BoStrategy::propose(const MorphDataset& ds,
                                          const sim::MorphologyBounds& bounds) {
  const int round = round_++;
  const Targets t = ds.size() ? targets(ds, bounds) : Targets{};
  if (static_cast<int>(t.y.size()) < 2) {
    Rng rng(derive_seed(seed_, "bo-coldstart", round));
    return random_in_bounds(bounds, rng);
  }

  model_ = std::make_unique<gp::SurrogateModel>(cfg_.gp);
  model_->fit(t.x, t.y, derive_seed(seed_, "bo-fit", round));

  // Candidate grid: fresh low-discrepancy points plus everything evaluated.
  const Tensor halton = lowdisc::scrambled_halton(
      cfg_.grid_size, bounds.size(), derive_seed(seed_, "bo-grid", round));
  Tensor grid(halton.rows + t.x.rows, bounds.size());
  for (int i = 0; i < halton.rows; ++i)
    for (int d = 0; d < bounds.size(); ++d) grid.at(i, d) = halton.at(i, d);
  for (int i = 0; i < t.x.rows; ++i)
    for (int d = 0; d < bounds.size(); ++d)
      grid.at(halton.rows + i, d) = t.x.at(i, d);

  const auto [mean, sd] = model_->posterior(grid);

  std::vector<int> order(grid.rows);
  for (int i = 0; i < grid.rows; ++i) order[i] = i;
  Rng shuffle_rng(derive_seed(seed_, "bo-tiebreak", round));
  for (int i = grid.rows - 1; i > 0; --i)
    std::swap(order[i], order[shuffle_rng.index(i + 1)]);

  int best = order[0];
  double best_acq = std::numeric_limits<double>::infinity();
  for (int idx : order) {
    const double acq = mean[idx] - cfg_.beta * sd[idx];
    if (acq < best_acq) {
      best_acq = acq;
      best = idx;
    }
  }
  std::vector<double> unit(bounds.size());
  for (int d = 0; d < bounds.size(); ++d) unit[d] = grid.at(best, d);
  return bounds.denormalize(unit);
}

sim::MorphologyVector CmaesStrategy::propose(
    const MorphDataset& ds, const sim::MorphologyBounds& bounds) {
  if (!es_) es_ = std::make_unique<opt::Cmaes>(bounds.size(), seed_);

  if (next_row_ >= pending_.rows) {
    if (pending_.rows > 0) {
      // Feed back the fitnesses of the generation just evaluated.
      const Targets t = targets(ds, bounds);
      const int need = es_->population();
      std::vector<double> fit;
      for (size_t i = t.y.size() >= static_cast<size_t>(need)
                          ? t.y.size() - need
                          : 0;
           i < t.y.size(); ++i)
        fit.push_back(t.y[i]);
      if (static_cast<int>(fit.size()) == need) es_->tell(pending_, fit);
    }
    pending_ = es_->ask();
    next_row_ = 0;
  }
  std::vector<double> unit(bounds.size());
  for (int d = 0; d < bounds.size(); ++d)
    unit[d] = pending_.at(next_row_, d);
  ++next_row_;
  return bounds.denormalize(unit);
}

void QPsoStrategy::set_objective(opt::BatchObjective objective) {
  objective_ = std::move(objective);
}

double QPsoStrategy::epsilon() const {
  if (cfg_.budget_steps <= 0) return 0.0;
  const double frac =
      static_cast<double>(step_count_) / static_cast<double>(cfg_.budget_steps);
  return std::clamp(1.0 - frac, 0.0, 1.0);
}

sim::MorphologyVector QPsoStrategy::propose(
    const MorphDataset&, const sim::MorphologyBounds& bounds) {
  const int round = round_++;
  Rng rng(derive_seed(seed_, "q-pso", round));
  if (!objective_ || rng.uniform(0.0, 1.0) < epsilon())
    return random_in_bounds(bounds, rng);
  const opt::PsoResult res =
      opt::pso_maximize(objective_, bounds.size(), cfg_.particles, cfg_.iters,
                        derive_seed(seed_, "q-pso-swarm", round));
  return bounds.denormalize(res.best_point);
}

std::unique_ptr<Strategy> make_strategy(const std::string& name,
                                        const sim::MorphologyVector& fixed_xi,
                                        const BoConfig& bo,
                                        const QPsoStrategy::Config& qcfg,
                                        std::uint64_t seed) {
  if (name == "fixed") return std::make_unique<FixedStrategy>(fixed_xi);
  if (name == "random") return std::make_unique<RandomStrategy>(seed);
  if (name == "bo") return std::make_unique<BoStrategy>(bo, seed);
  if (name == "cmaes") return std::make_unique<CmaesStrategy>(seed);
  if (name == "q_pso") return std::make_unique<QPsoStrategy>(qcfg, seed);
  throw ConfigError("unknown morphology strategy: " + name, {});
}

}  // namespace coil::morph
