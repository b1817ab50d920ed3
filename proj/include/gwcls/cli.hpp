#pragma once

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "gwcls/cls.hpp"
#include "gwcls/config.hpp"
#include "gwcls/error.hpp"
#include "gwcls/format.hpp"
#include "gwcls/harness.hpp"
#include "gwcls/limits.hpp"
#include "gwcls/model.hpp"
#include "gwcls/moments.hpp"
#include "gwcls/parallel.hpp"
#include "gwcls/simulate.hpp"

namespace gwcls::cli {

/// Exit codes: 0 all checks pass, 1 a configured check failed, 2 bad usage
/// or invalid input.
inline constexpr int kExitOk = 0;
inline constexpr int kExitCheckFailed = 1;
inline constexpr int kExitUsage = 2;

namespace detail {

struct CommonOptions {
  std::string config_path;
  std::string out_path;
  std::vector<std::string> overrides;  // key=value
  std::map<std::string, std::string> flags;
};

inline KeyValueConfig resolve_config(const CommonOptions& o) {
  KeyValueConfig cfg = o.config_path.empty() ? KeyValueConfig{} : KeyValueConfig::load(o.config_path);
  for (const auto& kv : o.overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw Error(ErrorCode::ConfigError, "--set expects key=value");
    cfg.set(KeyValueConfig::trim(kv.substr(0, eq)), KeyValueConfig::trim(kv.substr(eq + 1)));
  }
  for (const auto& [k, v] : o.flags)
    if (!v.empty()) cfg.set(k, v);
  return cfg;
}

/// Writes to --out when given, otherwise to the supplied stream.
class Sink {
 public:
  Sink(const std::string& path, std::ostream& fallback) {
    if (path.empty() || path == "-") {
      os_ = &fallback;
    } else {
      file_ = std::make_unique<std::ofstream>(path, std::ios::binary);
      if (!*file_) throw Error(ErrorCode::ConfigError, "cannot open '" + path + "' for writing");
      os_ = file_.get();
    }
  }
  std::ostream& stream() { return *os_; }

 private:
  std::unique_ptr<std::ofstream> file_;
  std::ostream* os_ = nullptr;
};

inline std::vector<Trajectory> simulate_replicas(const ModelSpec& spec, std::size_t n,
                                                 std::size_t replicas, std::uint64_t seed,
                                                 std::uint64_t stream_base, unsigned threads) {
  const Simulator sim(spec);
  std::vector<Trajectory> out(replicas);
  parallel_for(replicas, threads, [&](std::size_t r) {
    out[r] = simulate(sim, n, seed, stream_id(StreamDomain::Trajectory, stream_base, r));
  });
  return out;
}

inline std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) out.push_back(KeyValueConfig::trim(cell));
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

/// Reads `replica,k,X1,X2,...` (replica optional) into per-replica state lists.
inline std::map<std::uint64_t, std::vector<Count2>> read_trajectory_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::ConfigError, "cannot read trajectory file '" + path + "'");
  std::string line;
  std::vector<std::string> header;
  while (header.empty() && std::getline(in, line))
    if (!line.empty() && line[0] != '#') header = split_csv(line);
  auto column = [&](const std::string& name) -> int {
    for (std::size_t i = 0; i < header.size(); ++i)
      if (header[i] == name) return static_cast<int>(i);
    return -1;
  };
  const int c_rep = column("replica"), c_k = column("k"), c_x1 = column("X1"), c_x2 = column("X2");
  if (c_k < 0 || c_x1 < 0 || c_x2 < 0)
    throw Error(ErrorCode::ConfigError, "trajectory CSV needs columns k, X1, X2");
  std::map<std::uint64_t, std::vector<Count2>> out;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    const auto cells = split_csv(line);
    auto cell = [&](int c) -> const std::string& {
      if (c >= static_cast<int>(cells.size()))
        throw Error(ErrorCode::ConfigError, "short row in trajectory CSV: '" + line + "'");
      return cells[static_cast<std::size_t>(c)];
    };
    try {
      const std::uint64_t rep = c_rep >= 0 ? std::stoull(cell(c_rep)) : 0;
      const std::size_t k = std::stoull(cell(c_k));
      auto& states = out[rep];
      if (k != states.size())
        throw Error(ErrorCode::ConfigError, "rows of replica " + std::to_string(rep) +
                                                " must list k = 0, 1, 2, ... in order");
      states.push_back({std::stoll(cell(c_x1)), std::stoll(cell(c_x2))});
    } catch (const std::logic_error&) {
      throw Error(ErrorCode::ConfigError, "cannot parse trajectory row '" + line + "'");
    }
  }
  return out;
}

inline void write_estimate_row(std::ostream& os, std::uint64_t replica, const ClsResult& r) {
  os << replica << ',' << r.n << ',' << r.in_Hn << ',' << r.in_tHn << ','
     << format_optional(r.rho_hat) << ',' << format_optional(r.delta_hat) << ','
     << format_optional(r.alpha_hat) << ',' << format_optional(r.beta_hat) << '\n';
}

struct GrowthSpec {
  MomentTarget target;
  unsigned order;
};

inline std::vector<GrowthSpec> parse_targets(const std::string& text) {
  std::vector<GrowthSpec> out;
  std::istringstream in(text);
  std::string tok;
  while (in >> tok) {
    const auto colon = tok.find(':');
    if (colon == std::string::npos)
      throw Error(ErrorCode::ConfigError, "target '" + tok + "' must look like U:2");
    const int order = std::stoi(tok.substr(colon + 1));
    if (order < 1) throw Error(ErrorCode::ConfigError, "target order must be >= 1");
    out.push_back({parse_moment_target(tok.substr(0, colon)), static_cast<unsigned>(order)});
  }
  if (out.empty()) throw Error(ErrorCode::ConfigError, "no moment targets given");
  return out;
}

}  // namespace detail

inline int cmd_simulate(const KeyValueConfig& cfg, const std::string& out, std::ostream& os) {
  const ModelSpec spec = model_from_config(cfg);
  const auto n = cfg.get_uint("n", 100);
  const auto replicas = cfg.get_uint("replicas", 1);
  const auto trajs = detail::simulate_replicas(spec, n, replicas, cfg.get_uint("seed", 1),
                                               cfg.get_uint("stream", 0),
                                               static_cast<unsigned>(cfg.get_uint("threads", 1)));
  detail::Sink sink(out, os);
  auto& s = sink.stream();
  s << "replica,k,X1,X2,U,V,M1,M2\n";
  for (std::size_t r = 0; r < trajs.size(); ++r) {
    const auto& t = trajs[r];
    for (std::size_t k = 0; k < t.states.size(); ++k) {
      s << r << ',' << k << ',' << t.states[k].first << ',' << t.states[k].second << ','
        << t.u_seq[k] << ',' << t.v_seq[k] << ',';
      if (k > 0) s << format_double(t.m_seq[k].x) << ',' << format_double(t.m_seq[k].y);
      else s << ',';
      s << '\n';
    }
  }
  return kExitOk;
}

inline int cmd_estimate(const KeyValueConfig& cfg, const std::string& out, std::ostream& os) {
  const ModelSpec spec = model_from_config(cfg);
  const Vec2 m_eps = spec.immigration_mean();
  detail::Sink sink(out, os);
  auto& s = sink.stream();
  s << "replica,n,in_Hn,in_tHn,rho_hat,delta_hat,alpha_hat,beta_hat\n";
  if (cfg.has("input")) {
    for (auto& [rep, states] : detail::read_trajectory_csv(cfg.get_string("input")))
      detail::write_estimate_row(s, rep, estimate_all(make_trajectory(std::move(states)), m_eps));
    return kExitOk;
  }
  const auto trajs = detail::simulate_replicas(
      spec, cfg.get_uint("n", 100), cfg.get_uint("replicas", 1), cfg.get_uint("seed", 1),
      cfg.get_uint("stream", 0), static_cast<unsigned>(cfg.get_uint("threads", 1)));
  for (std::size_t r = 0; r < trajs.size(); ++r)
    detail::write_estimate_row(s, r, estimate_all(trajs[r], m_eps));
  return kExitOk;
}

inline int cmd_limit(const KeyValueConfig& cfg, const std::string& out, std::ostream& os) {
  const ModelSpec spec = model_from_config(cfg);
  const Regime regime = classify_regime(spec);
  const auto [a, c] = limit_coefficients(spec);
  const auto samples = sample_limit_functionals(
      a, c, cfg.get_uint("steps", kDefaultSdeSteps), cfg.get_uint("paths", 1000),
      cfg.get_uint("seed", 1), cfg.get_uint("stream", 0),
      static_cast<unsigned>(cfg.get_uint("threads", 1)));
  detail::Sink sink(out, os);
  auto& s = sink.stream();
  s << "# regime=" << to_string(regime) << '\n'
    << "# drift=" << format_double(a) << '\n'
    << "# diffusion=" << format_double(c) << '\n';
  if (regime == Regime::TotalDegenerate)
    s << "# sigma2_rho=" << format_double(limit_rho_degenerate_sigma2(spec)) << '\n';
  if (regime == Regime::DiffDegenerateImmigrationActive)
    s << "# sigma2_ab=" << format_double(limit_ab_degenerate_sigma2(spec)) << '\n';
  s << "path,int_Y2,int_Y,int_Y_dM,int_Y_dWt,rho_limit,ab_limit\n";
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto& x = samples[i];
    s << i << ',' << format_double(x.int_Y2) << ',' << format_double(x.int_Y) << ','
      << format_double(x.int_Y_dM) << ',' << format_double(x.int_Y_dWt) << ',';
    if (x.int_Y2 >= kMinLimitDenominator) s << format_double(limit_rho_sample(x));
    s << ',';
    if (x.int_Y >= kMinLimitDenominator)
      s << format_double(limit_ab_sample(x, spec.alpha(), spec.beta()).first);
    s << '\n';
  }
  return kExitOk;
}

inline int cmd_verify_moments(const KeyValueConfig& cfg, const std::string& out,
                              std::ostream& os) {
  const ModelSpec spec = model_from_config(cfg);
  const auto targets = detail::parse_targets(cfg.get_string("targets", "U:2 V:1 M:2"));
  const auto ks = cfg.get_uint_list("ks", {64, 128, 256, 512});
  const double band = cfg.get_double("band", 0.2);
  detail::Sink sink(out, os);
  auto& s = sink.stream();
  s << "target,order,k,estimate,std_error\n";
  std::vector<MomentGrowthReport> reports;
  for (const auto& t : targets) {
    reports.push_back(moment_growth(spec, t.target, t.order, ks, cfg.get_uint("replicas", 10000),
                                    cfg.get_uint("seed", 1),
                                    static_cast<unsigned>(cfg.get_uint("threads", 1))));
    const auto& r = reports.back();
    for (std::size_t i = 0; i < r.ks.size(); ++i)
      s << to_string(r.target) << ',' << r.order << ',' << r.ks[i] << ','
        << format_double(r.estimates[i]) << ',' << format_double(r.standard_errors[i]) << '\n';
  }
  bool ok = true;
  for (const auto& r : reports) {
    const bool pass = r.within(band);
    ok = ok && pass;
    s << "# slope target=" << to_string(r.target) << " order=" << r.order
      << " fitted=" << format_double(r.fitted_slope) << " expected=" << format_double(r.target_slope)
      << " band=" << format_double(band) << ' ' << (pass ? "PASS" : "FAIL") << '\n';
  }
  return ok ? kExitOk : kExitCheckFailed;
}

inline ExperimentConfig experiment_config_from(const KeyValueConfig& cfg) {
  ExperimentConfig ec{model_from_config(cfg)};
  const auto nv = cfg.get_uint_list("n_values", {200, 2000});
  ec.n_values.assign(nv.begin(), nv.end());
  ec.replicas = cfg.get_uint("replicas", ec.replicas);
  ec.limit_paths = cfg.get_uint("limit_paths", ec.limit_paths);
  ec.sde_steps = cfg.get_uint("sde_steps", ec.sde_steps);
  ec.seed = cfg.get_uint("seed", ec.seed);
  ec.threads = static_cast<unsigned>(cfg.get_uint("threads", 1));
  ec.ks_tolerance = cfg.get_double("ks_tolerance", ec.ks_tolerance);
  ec.variance_tolerance = cfg.get_double("variance_tolerance", ec.variance_tolerance);
  ec.monotone_slack = cfg.get_double("monotone_slack", ec.monotone_slack);
  return ec;
}

inline int cmd_experiment(const KeyValueConfig& cfg, const std::string& out, std::ostream& os) {
  const ExperimentConfig ec = experiment_config_from(cfg);
  const auto rep = run_experiment(ec);
  write_report(rep, out.empty() ? std::string("experiment_out") : out);
  for (const auto& c : rep.checks)
    os << (c.passed ? "PASS " : "FAIL ") << c.name << " value=" << format_double(c.value)
       << " threshold=" << format_double(c.threshold) << '\n';
  return rep.all_passed() ? kExitOk : kExitCheckFailed;
}

/// Entry point shared by the gwcls executable and the tests.
inline int run(int argc, const char* const* argv, std::ostream& out = std::cout,
               std::ostream& err = std::cerr) {
  CLI::App app{"Simulation and conditional least squares estimation for critical doubly "
               "symmetric 2-type Galton-Watson processes with immigration"};
  app.require_subcommand(1);
  detail::CommonOptions opts;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", opts.config_path, "key = value config file");
    sub->add_option("--out", opts.out_path, "output path (file; directory for experiment)");
    sub->add_option("--set", opts.overrides, "override a config entry, key=value")->take_all();
    for (const char* key : {"seed", "threads", "model", "alpha", "n", "replicas", "immigration"}) {
      const std::string flag = std::string(key).size() == 1 ? std::string("-") + key : std::string("--") + key;
      sub->add_option(flag, opts.flags[key], std::string("config key '") + key + "'");
    }
  };

  struct Command {
    const char* name;
    const char* help;
    int (*fn)(const KeyValueConfig&, const std::string&, std::ostream&);
    std::vector<const char*> extra;
  };
  const std::vector<Command> commands{
      {"simulate", "simulate trajectories, CSV k,X1,X2,U,V,M1,M2 per replica", cmd_simulate, {"stream"}},
      {"estimate", "CLS estimates per replica from a trajectory CSV or inline simulation",
       cmd_estimate, {"input", "stream"}},
      {"limit", "sample the limit functionals of the diffusion", cmd_limit, {"paths", "steps", "stream"}},
      {"verify-moments", "moment growth exponents", cmd_verify_moments, {"targets", "ks", "band"}},
      {"experiment", "finite-n versus limit-law Monte Carlo comparison", cmd_experiment,
       {"n_values", "limit_paths", "sde_steps"}},
  };
  std::vector<CLI::App*> subs;
  for (const auto& c : commands) {
    auto* sub = app.add_subcommand(c.name, c.help);
    add_common(sub);
    for (const char* key : c.extra) {
      std::string flag = std::string("--") + key;
      std::replace(flag.begin() + 2, flag.end(), '_', '-');
      sub->add_option(flag, opts.flags[key], std::string("config key '") + key + "'");
    }
    subs.push_back(sub);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? kExitOk : kExitUsage;
  }
  try {
    const KeyValueConfig cfg = detail::resolve_config(opts);
    for (std::size_t i = 0; i < commands.size(); ++i)
      if (subs[i]->parsed()) return commands[i].fn(cfg, opts.out_path, out);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }
  return kExitUsage;
}

}  // namespace gwcls::cli
