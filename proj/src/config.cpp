#include "coil/config.hpp"

#include <cctype>
#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "coil/errors.hpp"
#include "coil/sim/env.hpp"

namespace coil::cfg {
namespace {

std::string trim(const std::string& s) {
  size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

// One parse attempt per key; failures are collected, never thrown piecemeal.
struct Errors {
  std::vector<std::string> items;
  void add(int line, const std::string& what) {
    items.push_back("line " + std::to_string(line) + ": " + what);
  }
};

bool parse_double(const std::string& s, double* out) {
  try {
    size_t used = 0;
    *out = std::stod(s, &used);
    return used == s.size();
  } catch (...) {
    return false;
  }
}

bool parse_long(const std::string& s, long* out) {
  try {
    size_t used = 0;
    *out = std::stol(s, &used);
    return used == s.size();
  } catch (...) {
    return false;
  }
}

bool parse_bool(const std::string& s, bool* out) {
  if (s == "true" || s == "1" || s == "yes") { *out = true; return true; }
  if (s == "false" || s == "0" || s == "no") { *out = false; return true; }
  return false;
}

bool parse_vector(const std::string& s, std::vector<double>* out) {
  out->clear();
  std::istringstream in(s);
  std::string tok;
  while (in >> tok) {
    double x;
    if (!parse_double(tok, &x)) return false;
    out->push_back(x);
  }
  return !out->empty();
}

using Setter = std::function<void(const std::string& value, int line,
                                  Errors& errs)>;

template <typename T, typename Pred>
Setter numeric(T* slot, bool (*parse)(const std::string&, T*), Pred ok,
               const std::string& range) {
  return [=](const std::string& v, int line, Errors& errs) {
    T x;
    if (!parse(v, &x)) {
      errs.add(line, "expected a number, got '" + v + "'");
    } else if (!ok(x)) {
      errs.add(line, "value " + v + " outside " + range);
    } else {
      *slot = x;
    }
  };
}

Setter floating(double* slot, double lo, double hi, bool lo_open,
                bool hi_open) {
  std::string range = (lo_open ? "(" : "[") + std::to_string(lo) + ", " +
                      std::to_string(hi) + (hi_open ? ")" : "]");
  return numeric<double>(
      slot, parse_double,
      [=](double x) {
        return (lo_open ? x > lo : x >= lo) && (hi_open ? x < hi : x <= hi);
      },
      range);
}

Setter integer(int* slot, long lo, long hi) {
  std::string range = "[" + std::to_string(lo) + ", " + std::to_string(hi) + "]";
  return [=](const std::string& v, int line, Errors& errs) {
    long x;
    if (!parse_long(v, &x)) {
      errs.add(line, "expected an integer, got '" + v + "'");
    } else if (x < lo || x > hi) {
      errs.add(line, "value " + v + " outside " + range);
    } else {
      *slot = static_cast<int>(x);
    }
  };
}

Setter long_integer(long* slot, long lo, long hi) {
  std::string range = "[" + std::to_string(lo) + ", " + std::to_string(hi) + "]";
  return [=](const std::string& v, int line, Errors& errs) {
    long x;
    if (!parse_long(v, &x)) {
      errs.add(line, "expected an integer, got '" + v + "'");
    } else if (x < lo || x > hi) {
      errs.add(line, "value " + v + " outside " + range);
    } else {
      *slot = x;
    }
  };
}

Setter boolean(bool* slot) {
  return [=](const std::string& v, int line, Errors& errs) {
    if (!parse_bool(v, slot))
      errs.add(line, "expected true/false, got '" + v + "'");
  };
}

Setter choice(std::string* slot, std::vector<std::string> allowed) {
  return [=](const std::string& v, int line, Errors& errs) {
    for (const auto& a : allowed)
      if (v == a) {
        *slot = v;
        return;
      }
    std::string opts;
    for (const auto& a : allowed) opts += (opts.empty() ? "" : "|") + a;
    errs.add(line, "'" + v + "' is not one of " + opts);
  };
}

Setter optional_int(std::optional<int>* slot, long lo, long hi) {
  return [=](const std::string& v, int line, Errors& errs) {
    long x;
    if (!parse_long(v, &x)) {
      errs.add(line, "expected an integer, got '" + v + "'");
    } else if (x < lo || x > hi) {
      errs.add(line, "value " + v + " outside [" + std::to_string(lo) + ", " +
                         std::to_string(hi) + "]");
    } else {
      *slot = static_cast<int>(x);
    }
  };
}

Setter optional_double(std::optional<double>* slot, double lo, bool lo_open) {
  return [=](const std::string& v, int line, Errors& errs) {
    double x;
    if (!parse_double(v, &x)) {
      errs.add(line, "expected a number, got '" + v + "'");
    } else if (lo_open ? x <= lo : x < lo) {
      errs.add(line, "value " + v + " must be " + (lo_open ? "> " : ">= ") +
                         std::to_string(lo));
    } else {
      *slot = x;
    }
  };
}

}  // namespace

ExperimentConfig parse_config_text(const std::string& text,
                                   const std::string& origin) {
  ExperimentConfig c;
  Errors errs;

  std::map<std::string, Setter> keys;
  auto def = [&](const std::string& section, const std::string& key,
                 Setter s) { keys[section + "." + key] = std::move(s); };

  def("run", "env", choice(&c.run.env, sim::builtin_names()));
  def("run", "algo", choice(&c.run.algo, {"gail", "sail"}));
  def("run", "strategy",
      choice(&c.run.strategy, {"fixed", "random", "bo", "cmaes", "q_pso"}));
  def("run", "seed", [&](const std::string& v, int line, Errors& e) {
    long x;
    if (!parse_long(v, &x) || x < 0)
      e.add(line, "seed must be a nonnegative integer, got '" + v + "'");
    else
      c.run.seed = static_cast<std::uint64_t>(x);
  });
  def("run", "max_steps", long_integer(&c.run.max_steps, 1, 100000000L));
  def("run", "episodes_per_morphology",
      integer(&c.run.episodes_per_morphology, 1, 10000));
  def("run", "start_steps", integer(&c.run.start_steps, 0, 10000000));
  def("run", "eval_episodes", integer(&c.run.eval_episodes, 1, 1000));
  def("run", "subsample", integer(&c.run.subsample, 1, 100000));
  def("run", "relabel_rewards", boolean(&c.run.relabel_rewards));
  def("run", "output_dir", [&](const std::string& v, int, Errors&) {
    c.run.output_dir = v;
  });

  def("sac", "gamma", floating(&c.sac.gamma, 0.0, 1.0, false, true));
  def("sac", "tau", floating(&c.sac.tau, 0.0, 1.0, true, false));
  def("sac", "lr", floating(&c.sac.lr, 0.0, 1.0, true, false));
  def("sac", "batch_size", integer(&c.sac.batch_size, 1, 1000000));
  def("sac", "hidden", integer(&c.sac.hidden, 1, 100000));
  def("sac", "hidden_layers", integer(&c.sac.hidden_layers, 0, 16));
  def("sac", "init_alpha", floating(&c.sac.init_alpha, 0.0, 1e6, true, false));
  def("sac", "fixed_alpha",
      floating(&c.sac.fixed_alpha, -1.0, 1e6, false, false));
  def("sac", "replay_capacity",
      long_integer(&c.sac.replay_capacity, 1, 1000000000L));
  def("sac", "q_weight_decay",
      floating(&c.sac.q_weight_decay, 0.0, 1.0, false, false));
  def("sac", "updates_per_step", integer(&c.sac.updates_per_step, 0, 1000));

  def("imitation", "hidden", integer(&c.imitation.hidden, 1, 100000));
  def("imitation", "hidden_layers",
      integer(&c.imitation.hidden_layers, 0, 16));
  def("imitation", "lr", floating(&c.imitation.lr, 0.0, 1.0, true, false));
  def("imitation", "weight_decay",
      floating(&c.imitation.weight_decay, 0.0, 1.0, false, false));
  def("imitation", "grad_penalty",
      floating(&c.imitation.grad_penalty, 0.0, 1e6, false, false));
  def("imitation", "vae_latent", integer(&c.imitation.vae_latent, 1, 4096));
  def("imitation", "vae_beta",
      floating(&c.imitation.vae_beta, 0.0, 1e6, false, false));
  def("imitation", "vae_scaler",
      floating(&c.imitation.vae_scaler, 0.0, 1e6, false, false));
  def("imitation", "prior_sigma",
      floating(&c.imitation.prior_sigma, 0.0, 1e6, true, false));
  def("imitation", "pretrain_steps",
      integer(&c.imitation.pretrain_steps, 1, 10000000));
  def("imitation", "recenter_reward", boolean(&c.imitation.recenter_reward));

  def("morphology", "beta",
      floating(&c.morphology.beta, 0.0, 1e6, false, false));
  def("morphology", "grid_size", integer(&c.morphology.grid_size, 1, 1000000));
  def("morphology", "gp_window", integer(&c.morphology.gp_window, 2, 100000));
  def("morphology", "gp_restarts", integer(&c.morphology.gp_restarts, 1, 100));
  def("morphology", "fixed_lengths",
      [&](const std::string& v, int line, Errors& e) {
        std::vector<double> xs;
        if (!parse_vector(v, &xs)) {
          e.add(line, "expected space-separated lengths, got '" + v + "'");
          return;
        }
        for (double x : xs)
          if (x <= 0.0) {
            e.add(line, "lengths must be positive");
            return;
          }
        c.morphology.fixed_lengths = xs;
      });
  def("morphology", "pso_particles",
      integer(&c.morphology.pso_particles, 1, 100000));
  def("morphology", "pso_iters", integer(&c.morphology.pso_iters, 1, 100000));
  def("morphology", "epsilon_decay_steps",
      long_integer(&c.morphology.epsilon_decay_steps, 1, 1000000000L));

  def("env", "episode_length", optional_int(&c.env.episode_length, 1, 1000000));
  def("env", "torque_limit", optional_double(&c.env.torque_limit, 0.0, true));
  def("env", "joint_damping",
      optional_double(&c.env.joint_damping, 0.0, false));
  def("env", "gravity", optional_double(&c.env.gravity, 0.0, false));
  def("env", "dt", optional_double(&c.env.dt, 0.0, true));
  def("env", "substeps", optional_int(&c.env.substeps, 1, 1000));
  def("env", "reset_noise", optional_double(&c.env.reset_noise, 0.0, false));

  std::istringstream in(text);
  std::string raw;
  std::string section;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string line = trim(raw);
    if (line.empty() || line[0] == '#') continue;
    if (line.front() == '[') {
      if (line.back() != ']') {
        errs.add(line_no, "unterminated section header");
        continue;
      }
      section = trim(line.substr(1, line.size() - 2));
      bool known = false;
      for (const char* s : {"run", "sac", "imitation", "morphology", "env"})
        known = known || section == s;
      if (!known) errs.add(line_no, "unknown section [" + section + "]");
      continue;
    }
    const size_t eq = line.find('=');
    if (eq == std::string::npos) {
      errs.add(line_no, "expected key = value");
      continue;
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (section.empty()) {
      errs.add(line_no, "key '" + key + "' outside any section");
      continue;
    }
    auto it = keys.find(section + "." + key);
    if (it == keys.end()) {
      errs.add(line_no, "unknown key '" + key + "' in [" + section + "]");
      continue;
    }
    it->second(value, line_no, errs);
  }

  if (!errs.items.empty())
    throw ConfigError(origin + ": " + std::to_string(errs.items.size()) +
                          " config error(s)",
                      errs.items);
  return c;
}

ExperimentConfig parse_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str(), path);
}

}  // namespace coil::cfg
