#pragma once

#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

namespace coil::metrics {

// One evaluation record, written at the end of every training episode.
struct MetricRow {
  long step = 0;         // total environment steps taken when logged
  int episode = 0;       // episode index within the run
  std::string strategy;  // morphology proposal strategy
  std::uint64_t seed = 0;
  double wasserstein = 0.0;  // episode feature distribution vs demonstrations
  double reward_mean = 0.0;  // mean imitation reward over the episode
  std::vector<double> morphology;
};

// Append-only CSV writer with the fixed column set
//   step,episode,strategy,seed,wasserstein,reward_mean,xi_0..xi_{k-1}
// flushed after every row so a killed run leaves a readable partial log.
// Numbers are serialized with full round-trip precision.
class MetricLogger {
 public:
  MetricLogger(const std::string& path, std::string strategy,
               std::uint64_t seed, int morphology_dim);

  void log(long step, int episode, double wasserstein, double reward_mean,
           const std::vector<double>& morphology);

 private:
  std::ofstream out_;
  std::string path_;
  std::string strategy_;
  std::uint64_t seed_;
  int morphology_dim_;
};

std::vector<MetricRow> read_log(const std::string& path);

// Cross-run aggregation for plotting: rows from all logs are grouped by
// (strategy, episode index); x is the mean step of the group and the spread
// is the sample standard deviation of the distances over runs (0 for a
// single run).
struct SeriesPoint {
  double step = 0.0;
  double mean = 0.0;
  double stddev = 0.0;
  int runs = 0;
};

struct PlotSeries {
  std::string label;
  std::vector<SeriesPoint> points;
};

std::vector<PlotSeries> aggregate(
    const std::vector<std::vector<MetricRow>>& logs);

// CSV with header series,step,wasserstein_mean,wasserstein_std,runs.
void write_series(const std::vector<PlotSeries>& series,
                  const std::string& path);

}  // namespace coil::metrics
