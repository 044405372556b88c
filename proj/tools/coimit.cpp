#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>
#include <iostream>
#include <string>
#include <vector>

#include "coil/coil.hpp"
#include "coil/config.hpp"
#include "coil/demo_io.hpp"
#include "coil/errors.hpp"
#include "coil/metrics.hpp"
#include "coil/nn.hpp"
#include "coil/rng.hpp"
#include "coil/transport.hpp"

namespace {

using coil::cfg::ExperimentConfig;

std::string fmt(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string join(const std::vector<double>& xs) {
  std::string out;
  for (double x : xs) {
    if (!out.empty()) out += ' ';
    out += fmt(x);
  }
  return out;
}

struct CommonOverrides {
  std::string seed;
  std::string strategy;
  std::string algo;
  std::string max_steps;
  std::string out_dir;
};

// Flag overrides are funneled through the config parser so they get the same
// validation (and the same error wording) as file keys.
ExperimentConfig load_config(const std::string& path,
                             const CommonOverrides& ov) {
  std::string text;
  if (!path.empty()) {
    std::ifstream in(path);
    if (!in) throw coil::IoError("cannot open config file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    text = buf.str();
  }
  std::string extra;
  if (!ov.seed.empty()) extra += "seed = " + ov.seed + "\n";
  if (!ov.strategy.empty()) extra += "strategy = " + ov.strategy + "\n";
  if (!ov.algo.empty()) extra += "algo = " + ov.algo + "\n";
  if (!ov.max_steps.empty()) extra += "max_steps = " + ov.max_steps + "\n";
  if (!ov.out_dir.empty()) extra += "output_dir = " + ov.out_dir + "\n";
  if (!extra.empty()) text += "\n[run]\n" + extra;
  return coil::cfg::parse_config_text(
      text, path.empty() ? std::string("<flags>") : path);
}

int cmd_gen_demos(const std::string& config_path, const CommonOverrides& ov,
                  const std::string& out, long budget, int episodes,
                  double control_cost, double competence_factor) {
  const ExperimentConfig config = load_config(config_path, ov);
  const coil::sim::EnvSpec spec = coil::spec_from_config(config);

  coil::DemoGenConfig g;
  g.budget_steps = budget;
  g.episodes = episodes;
  g.start_steps = config.run.start_steps;
  g.control_cost = control_cost;
  g.competence_factor = competence_factor;
  g.sac = config.sac;
  const auto demos = coil::generate_demos(spec, g, config.run.seed);
  coil::io::save_demos(demos, out);

  std::cout << "env " << spec.name << "\n"
            << "episodes " << demos.size() << "\n"
            << "steps_per_episode " << spec.episode_length << "\n"
            << "mean_pairwise_demo_distance "
            << fmt(coil::transport::mean_pairwise_demo_distance(demos)) << "\n"
            << "demos " << out << "\n";
  return 0;
}

int cmd_train(const std::string& config_path, const CommonOverrides& ov,
              const std::string& demo_path) {
  const ExperimentConfig config = load_config(config_path, ov);
  const auto demos = coil::io::load_demos(demo_path);
  const coil::RunResult res = coil::run(config, demos);

  std::cout << "steps " << res.steps << "\n"
            << "episodes " << res.episodes << "\n"
            << "failed_episodes " << res.failed_episodes << "\n"
            << "morphologies " << res.completed_morphologies << "\n"
            << "best_target " << fmt(res.best_target) << "\n"
            << "best_morphology " << join(res.best_morphology.lengths) << "\n"
            << "final_morphology " << join(res.final_morphology.lengths)
            << "\n"
            << "metrics " << res.metric_path << "\n"
            << "checkpoint " << res.checkpoint_path << "\n";
  return 0;
}

int cmd_evaluate(const std::string& config_path, const CommonOverrides& ov,
                 const std::string& ckpt_path, const std::string& demo_path,
                 int episodes, bool use_final) {
  const ExperimentConfig config = load_config(config_path, ov);
  const coil::sim::EnvSpec spec = coil::spec_from_config(config);
  const auto demos = coil::io::load_demos(demo_path);

  const coil::nn::Checkpoint ck = coil::nn::Checkpoint::load_file(ckpt_path);
  const std::string xi_key = use_final ? "run.final_xi" : "run.xi";
  auto it = ck.tensors.find(xi_key);
  if (it == ck.tensors.end())
    throw coil::IoError("checkpoint has no morphology entry '" + xi_key + "'");
  coil::sim::MorphologyVector xi;
  for (int j = 0; j < it->second.cols; ++j)
    xi.lengths.push_back(it->second.at(0, j));

  const coil::sim::Environment env =
      coil::sim::make_env(spec, spec.default_morphology);
  coil::rl::SacAgent agent(coil::sac_config_for(config, env),
                           coil::derive_seed(config.run.seed, "evaluate"));
  agent.restore(ck);

  const coil::EvalReport rep =
      coil::evaluate(agent, spec, xi, demos, episodes,
                     coil::derive_seed(config.run.seed, "evaluate"),
                     config.run.subsample);
  std::cout << "episodes " << rep.distances.size() << "\n"
            << "wasserstein_mean " << fmt(rep.mean) << "\n"
            << "wasserstein_std " << fmt(rep.stddev) << "\n"
            << "morphology " << join(rep.morphology.lengths) << "\n"
            << "wall_seconds " << fmt(rep.wall_seconds) << "\n"
            << "distances " << join(rep.distances) << "\n";
  return 0;
}

int cmd_export_plots(const std::vector<std::string>& log_paths,
                     const std::string& demo_path, const std::string& out) {
  std::vector<std::vector<coil::metrics::MetricRow>> logs;
  for (const auto& p : log_paths) logs.push_back(coil::metrics::read_log(p));
  auto series = coil::metrics::aggregate(logs);

  if (!demo_path.empty()) {
    const auto demos = coil::io::load_demos(demo_path);
    const double baseline =
        coil::transport::mean_pairwise_demo_distance(demos);
    double lo = 0.0, hi = 0.0;
    bool any = false;
    for (const auto& s : series)
      for (const auto& p : s.points) {
        lo = any ? std::min(lo, p.step) : p.step;
        hi = any ? std::max(hi, p.step) : p.step;
        any = true;
      }
    coil::metrics::PlotSeries ref;
    ref.label = "Demonstrations";
    // Flat reference line spanning the x-range of the training series.
    ref.points.push_back({lo, baseline, 0.0, 1});
    if (hi > lo) ref.points.push_back({hi, baseline, 0.0, 1});
    series.push_back(std::move(ref));
  }
  coil::metrics::write_series(series, out);

  int points = 0;
  for (const auto& s : series) points += static_cast<int>(s.points.size());
  std::cout << "series " << series.size() << "\n"
            << "points " << points << "\n"
            << "out " << out << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Co-imitation learning experiments on planar chain bodies"};
  app.require_subcommand(1);

  CommonOverrides ov;
  std::string config_path;
  std::string demo_path;
  std::string out_path;
  std::string ckpt_path;
  long budget = 100000;
  int episodes = 10;
  double control_cost = 0.1;
  double competence_factor = 5.0;
  bool use_final = false;
  std::vector<std::string> log_paths;

  auto add_config = [&](CLI::App* cmd, bool required) {
    auto* opt = cmd->add_option("--config", config_path,
                                "experiment config file");
    if (required) opt->required();
    cmd->add_option("--seed", ov.seed, "override [run] seed");
    cmd->add_option("--strategy", ov.strategy, "override [run] strategy");
    cmd->add_option("--algo", ov.algo, "override [run] algo");
    cmd->add_option("--max-steps", ov.max_steps, "override [run] max_steps");
    cmd->add_option("--out-dir", ov.out_dir, "override [run] output_dir");
  };

  auto* gen = app.add_subcommand(
      "gen-demos", "train a task expert and record demonstrations");
  add_config(gen, false);
  gen->add_option("--out", out_path, "demo file to write")->required();
  gen->add_option("--budget", budget, "expert training steps");
  gen->add_option("--episodes", episodes, "demonstrations to record");
  gen->add_option("--control-cost", control_cost, "action penalty weight");
  gen->add_option("--competence-factor", competence_factor,
                  "required margin over a random policy");

  auto* train = app.add_subcommand("train", "run co-imitation learning");
  add_config(train, true);
  train->add_option("--demos", demo_path, "demonstration file")->required();

  auto* eval = app.add_subcommand("evaluate", "score a trained checkpoint");
  add_config(eval, true);
  eval->add_option("--checkpoint", ckpt_path, "checkpoint file")->required();
  eval->add_option("--demos", demo_path, "demonstration file")->required();
  eval->add_option("--episodes", episodes, "evaluation episodes");
  eval->add_flag("--use-final", use_final,
                 "evaluate the final morphology instead of the best");

  auto* plots = app.add_subcommand(
      "export-plots", "aggregate metric logs into plot series");
  plots->add_option("logs", log_paths, "metric log files")
      ->required()
      ->expected(-1);
  plots->add_option("--out", out_path, "series file to write")->required();
  plots->add_option("--demos", demo_path,
                    "demo file for the reference series");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    std::cerr << "error usage: " << e.what() << "\n";
    return 1;
  }

  try {
    if (gen->parsed())
      return cmd_gen_demos(config_path, ov, out_path, budget, episodes,
                           control_cost, competence_factor);
    if (train->parsed()) return cmd_train(config_path, ov, demo_path);
    if (eval->parsed())
      return cmd_evaluate(config_path, ov, ckpt_path, demo_path, episodes,
                          use_final);
    return cmd_export_plots(log_paths, demo_path, out_path);
  } catch (const coil::ConfigError& e) {
    std::cerr << "error " << e.code() << ": " << e.what() << "\n";
    for (const auto& d : e.details()) std::cerr << "  " << d << "\n";
    return 1;
  } catch (const coil::ParseError& e) {
    std::cerr << "error " << e.code() << ": " << e.what() << "\n";
    for (const auto& d : e.details()) std::cerr << "  " << d << "\n";
    return 1;
  } catch (const coil::CoilError& e) {
    std::cerr << "error " << e.code() << ": " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error internal: " << e.what() << "\n";
    return 1;
  }
}
