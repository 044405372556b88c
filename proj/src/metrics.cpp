#include "coil/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <map>
#include <sstream>

#include "coil/errors.hpp"

namespace coil::metrics {
namespace {

std::string fmt_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double parse_number(const std::string& s, int line_no) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end == s.c_str() || *end != '\0')
    throw ParseError("metric log line " + std::to_string(line_no) +
                     ": not a number: '" + s + "'");
  return v;
}

}  // namespace

MetricLogger::MetricLogger(const std::string& path, std::string strategy,
                           std::uint64_t seed, int morphology_dim)
    : out_(path),
      path_(path),
      strategy_(std::move(strategy)),
      seed_(seed),
      morphology_dim_(morphology_dim) {
  if (!out_) throw IoError("cannot open metric log for writing: " + path);
  if (morphology_dim_ < 0) throw DimensionError("negative morphology dim");
  out_ << "step,episode,strategy,seed,wasserstein,reward_mean";
  for (int k = 0; k < morphology_dim_; ++k) out_ << ",xi_" << k;
  out_ << '\n';
  out_.flush();
}

void MetricLogger::log(long step, int episode, double wasserstein,
                       double reward_mean,
                       const std::vector<double>& morphology) {
  if (static_cast<int>(morphology.size()) != morphology_dim_)
    throw DimensionError("metric row morphology dim " +
                         std::to_string(morphology.size()) + ", expected " +
                         std::to_string(morphology_dim_));
  out_ << step << ',' << episode << ',' << strategy_ << ',' << seed_ << ','
       << fmt_double(wasserstein) << ',' << fmt_double(reward_mean);
  for (double m : morphology) out_ << ',' << fmt_double(m);
  out_ << '\n';
  out_.flush();
  if (!out_) throw IoError("metric log write failed: " + path_);
}

std::vector<MetricRow> read_log(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open metric log: " + path);
  std::string line;
  if (!std::getline(in, line)) throw ParseError("metric log is empty: " + path);
  const auto header = split_csv(line);
  const std::vector<std::string> prefix = {"step",        "episode",
                                           "strategy",    "seed",
                                           "wasserstein", "reward_mean"};
  if (header.size() < prefix.size())
    throw ParseError("metric log header has too few columns: " + path);
  for (size_t i = 0; i < prefix.size(); ++i)
    if (header[i] != prefix[i])
      throw ParseError("metric log header column " + std::to_string(i + 1) +
                       " is '" + header[i] + "', expected '" + prefix[i] + "'");
  const int morph_dim = static_cast<int>(header.size() - prefix.size());
  for (int k = 0; k < morph_dim; ++k)
    if (header[prefix.size() + k] != "xi_" + std::to_string(k))
      throw ParseError("metric log header morphology column " +
                       std::to_string(k) + " is misnamed");

  std::vector<MetricRow> rows;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto fields = split_csv(line);
    if (fields.size() != header.size())
      throw ParseError("metric log line " + std::to_string(line_no) + ": " +
                       std::to_string(fields.size()) + " fields, expected " +
                       std::to_string(header.size()));
    MetricRow r;
    r.step = static_cast<long>(parse_number(fields[0], line_no));
    r.episode = static_cast<int>(parse_number(fields[1], line_no));
    r.strategy = fields[2];
    r.seed = static_cast<std::uint64_t>(parse_number(fields[3], line_no));
    r.wasserstein = parse_number(fields[4], line_no);
    r.reward_mean = parse_number(fields[5], line_no);
    r.morphology.reserve(morph_dim);
    for (int k = 0; k < morph_dim; ++k)
      r.morphology.push_back(parse_number(fields[prefix.size() + k], line_no));
    rows.push_back(std::move(r));
  }
  return rows;
}

std::vector<PlotSeries> aggregate(
    const std::vector<std::vector<MetricRow>>& logs) {
  std::vector<std::string> order;
  std::map<std::string, std::map<int, std::vector<const MetricRow*>>> groups;
  for (const auto& log : logs)
    for (const auto& r : log) {
      if (!std::isfinite(r.wasserstein)) continue;  // failed episodes
      if (!groups.count(r.strategy)) order.push_back(r.strategy);
      groups[r.strategy][r.episode].push_back(&r);
    }

  std::vector<PlotSeries> series;
  series.reserve(order.size());
  for (const auto& label : order) {
    PlotSeries s;
    s.label = label;
    for (const auto& [episode, rows] : groups[label]) {
      (void)episode;
      SeriesPoint p;
      p.runs = static_cast<int>(rows.size());
      for (const MetricRow* r : rows) {
        p.step += r->step;
        p.mean += r->wasserstein;
      }
      p.step /= p.runs;
      p.mean /= p.runs;
      if (p.runs > 1) {
        double ss = 0.0;
        for (const MetricRow* r : rows) {
          const double d = r->wasserstein - p.mean;
          ss += d * d;
        }
        p.stddev = std::sqrt(ss / (p.runs - 1));
      }
      s.points.push_back(p);
    }
    series.push_back(std::move(s));
  }
  return series;
}

void write_series(const std::vector<PlotSeries>& series,
                  const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open series file for writing: " + path);
  out << "series,step,wasserstein_mean,wasserstein_std,runs\n";
  for (const auto& s : series)
    for (const auto& p : s.points)
      out << s.label << ',' << fmt_double(p.step) << ',' << fmt_double(p.mean)
          << ',' << fmt_double(p.stddev) << ',' << p.runs << '\n';
  if (!out) throw IoError("series write failed: " + path);
}

}  // namespace coil::metrics
