#include "coil/demo_io.hpp"

#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "coil/errors.hpp"

namespace coil::io {
namespace {

constexpr const char* kMagic = "coimit-demos 1";

std::string fmt_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

[[noreturn]] void bad_line(int line, const std::string& what) {
  throw ParseError("demo file line " + std::to_string(line) + ": " + what);
}

}  // namespace

void save_demos(const std::vector<features::FeatureTrajectory>& demos,
                const std::string& path) {
  if (demos.empty()) throw EmptyInput("refusing to save an empty demo set");
  const features::FeatureSchema& schema = demos.front().schema;
  for (const auto& d : demos) {
    if (!(d.schema == schema))
      throw SchemaError("demo episodes disagree on the feature schema");
    for (const auto& row : d.rows)
      if (static_cast<int>(row.size()) != schema.dim())
        throw DimensionError("demo row width does not match its schema");
  }

  std::ofstream out(path);
  if (!out) throw IoError("cannot open for writing: " + path);
  out << kMagic << '\n';
  out << "limbs " << schema.limbs << '\n';
  out << "markers_per_limb " << schema.markers_per_limb << '\n';
  out << "base_velocity " << (schema.base_velocity ? 1 : 0) << '\n';
  out << "episodes " << demos.size() << '\n';
  for (const auto& d : demos) {
    out << "episode " << d.episode_id << ' ' << d.rows.size() << ' '
        << (d.source.empty() ? "expert" : d.source);
    for (double m : d.morphology) out << ' ' << fmt_double(m);
    out << '\n';
    for (const auto& row : d.rows) {
      for (size_t j = 0; j < row.size(); ++j)
        out << (j ? " " : "") << fmt_double(row[j]);
      out << '\n';
    }
  }
  if (!out) throw IoError("write failed: " + path);
}

std::vector<features::FeatureTrajectory> load_demos(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open demo file: " + path);
  std::string line;
  int line_no = 0;
  auto next_line = [&](const char* what) {
    if (!std::getline(in, line)) bad_line(line_no + 1, std::string("missing ") + what);
    ++line_no;
    return line;
  };

  if (next_line("header") != kMagic)
    bad_line(line_no, "bad magic, expected '" + std::string(kMagic) + "'");

  features::FeatureSchema schema;
  long episode_count = 0;
  for (const char* field : {"limbs", "markers_per_limb", "base_velocity",
                            "episodes"}) {
    std::istringstream ls(next_line(field));
    std::string name;
    long value;
    if (!(ls >> name >> value) || name != field)
      bad_line(line_no, std::string("expected '") + field + " <n>'");
    if (std::string(field) == "limbs") schema.limbs = static_cast<int>(value);
    else if (std::string(field) == "markers_per_limb")
      schema.markers_per_limb = static_cast<int>(value);
    else if (std::string(field) == "base_velocity")
      schema.base_velocity = value != 0;
    else episode_count = value;
  }
  if (schema.limbs <= 0 || schema.markers_per_limb <= 0 || episode_count <= 0)
    bad_line(line_no, "schema fields must be positive");

  std::vector<features::FeatureTrajectory> demos;
  demos.reserve(episode_count);
  const int dim = schema.dim();
  for (long e = 0; e < episode_count; ++e) {
    std::istringstream hs(next_line("episode header"));
    std::string tag, source;
    long id, length;
    if (!(hs >> tag >> id >> length >> source) || tag != "episode")
      bad_line(line_no, "expected 'episode <id> <length> <source>'");
    if (length < 0) bad_line(line_no, "negative episode length");
    features::FeatureTrajectory t;
    t.schema = schema;
    t.episode_id = static_cast<int>(id);
    t.source = source;
    double m;
    while (hs >> m) t.morphology.push_back(m);
    t.rows.reserve(length);
    for (long r = 0; r < length; ++r) {
      std::istringstream rs(next_line("feature row"));
      features::FeatureVector row;
      row.reserve(dim);
      double x;
      while (rs >> x) row.push_back(x);
      if (static_cast<int>(row.size()) != dim)
        bad_line(line_no, "expected " + std::to_string(dim) + " values, got " +
                              std::to_string(row.size()));
      t.rows.push_back(std::move(row));
    }
    demos.push_back(std::move(t));
  }
  return demos;
}

void require_schema(const std::vector<features::FeatureTrajectory>& demos,
                    const features::FeatureSchema& expected) {
  if (demos.empty()) throw EmptyInput("no demonstrations loaded");
  const features::FeatureSchema& got = demos.front().schema;
  if (!(got == expected)) {
    std::ostringstream msg;
    msg << "demo schema (limbs " << got.limbs << ", markers "
        << got.markers_per_limb << ", base_velocity " << got.base_velocity
        << ") does not match the environment's (limbs " << expected.limbs
        << ", markers " << expected.markers_per_limb << ", base_velocity "
        << expected.base_velocity << ")";
    throw SchemaError(msg.str());
  }
}

}  // namespace coil::io
