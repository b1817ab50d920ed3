#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "gwcls/cls.hpp"
#include "gwcls/error.hpp"
#include "gwcls/format.hpp"
#include "gwcls/limits.hpp"
#include "gwcls/model.hpp"
#include "gwcls/parallel.hpp"
#include "gwcls/rng.hpp"
#include "gwcls/simulate.hpp"
#include "gwcls/stats.hpp"
#include "gwcls/summation.hpp"

namespace gwcls {

/// Estimator errors under each candidate scaling; absent where undefined.
struct ScaledErrors {
  std::optional<double> n_rho;       // n (rho_hat - 1)
  std::optional<double> n32_rho;     // n^{3/2} (rho_hat - 1)
  std::optional<double> sqrt_alpha;  // sqrt(n) (alpha_hat - alpha)
  std::optional<double> sqrt_beta;   // sqrt(n) (beta_hat - beta)
};

inline ScaledErrors scaled_errors(const ModelSpec& spec, const ClsResult& r) {
  ScaledErrors s;
  const double n = static_cast<double>(r.n);
  if (r.rho_hat) {
    s.n_rho = n * (*r.rho_hat - 1.0);
    s.n32_rho = n * std::sqrt(n) * (*r.rho_hat - 1.0);
  }
  if (r.alpha_hat) {
    s.sqrt_alpha = std::sqrt(n) * (*r.alpha_hat - spec.alpha());
    s.sqrt_beta = std::sqrt(n) * (*r.beta_hat - spec.beta());
  }
  return s;
}

inline ScaledErrors scaled_errors(const ModelSpec& spec, const Trajectory& traj) {
  return scaled_errors(spec, estimate_all(traj, spec.immigration_mean()));
}

/// Normalised sums whose joint limit the regime's limit vector describes:
/// (sum U_{k-1}^2, sum V_{k-1}^2, sum <1,M_k> U_{k-1}, sum <u~,M_k> V_{k-1}),
/// each scaled by the regime's power of n.
inline std::array<double, 4> joint_statistics(const Trajectory& traj, Regime regime) {
  if (!traj.has_martingale())
    throw Error(ErrorCode::InvalidArgument, "trajectory has no martingale differences");
  CompensatedSum u2, v2, um, vm;
  for (std::size_t k = 1; k < traj.states.size(); ++k) {
    const double u = static_cast<double>(traj.u_seq[k - 1]);
    const double v = static_cast<double>(traj.v_seq[k - 1]);
    u2 += u * u;
    v2 += v * v;
    um += dot(kOnes, traj.m_seq[k]) * u;
    vm += dot(kContrast, traj.m_seq[k]) * v;
  }
  const double n = static_cast<double>(traj.n());
  std::array<double, 4> p{3.0, 2.0, 2.0, 1.5};
  if (regime == Regime::TotalDegenerate) p[2] = 1.5;
  if (is_diff_degenerate(regime)) p = {3.0, 1.0, 2.0, 0.5};
  return {u2.value() / std::pow(n, p[0]), v2.value() / std::pow(n, p[1]),
          um.value() / std::pow(n, p[2]), vm.value() / std::pow(n, p[3])};
}

struct ExistenceFrequencies {
  double freq_Hn = 0.0;
  double freq_tHn = 0.0;
};

inline ExistenceFrequencies existence_frequencies(const ModelSpec& spec, std::size_t n,
                                                  std::size_t replicas, std::uint64_t seed,
                                                  unsigned threads = 1) {
  if (replicas < 1) throw Error(ErrorCode::InvalidArgument, "need replicas >= 1");
  const Simulator sim(spec);
  std::vector<std::array<bool, 2>> flags(replicas);
  parallel_for(replicas, threads, [&](std::size_t r) {
    const auto t = simulate(sim, n, seed, stream_id(StreamDomain::Existence, 0, r));
    flags[r] = {in_Hn(t), in_tHn(t)};
  });
  std::size_t h = 0, th = 0;
  for (const auto& f : flags) {
    h += f[0];
    th += f[1];
  }
  const double nr = static_cast<double>(replicas);
  return {static_cast<double>(h) / nr, static_cast<double>(th) / nr};
}

struct ExperimentConfig {
  ModelSpec model;
  std::vector<std::size_t> n_values{200, 2000};
  std::size_t replicas = 5000;
  std::size_t limit_paths = 5000;
  std::size_t sde_steps = kDefaultSdeSteps;
  std::uint64_t seed = 1;
  unsigned threads = 1;
  double ks_tolerance = 0.05;
  double variance_tolerance = 0.15;
  double monotone_slack = 0.02;

  void validate() const {
    if (replicas < 100) throw Error(ErrorCode::ConfigError, "replicas must be >= 100");
    if (limit_paths < 100) throw Error(ErrorCode::ConfigError, "limit_paths must be >= 100");
    if (sde_steps < 2) throw Error(ErrorCode::ConfigError, "sde_steps must be >= 2");
    if (n_values.empty()) throw Error(ErrorCode::ConfigError, "n_values is empty");
    for (std::size_t i = 0; i < n_values.size(); ++i)
      if (n_values[i] < 1 || (i > 0 && n_values[i] <= n_values[i - 1]))
        throw Error(ErrorCode::ConfigError, "n_values must be positive and strictly increasing");
  }
};

/// One replica at one sample size.
struct ReplicaRow {
  ClsResult cls;
  ScaledErrors scaled;
  std::array<double, 4> joint{};
  bool failed = false;
};

struct SampleSizeSummary {
  std::size_t n = 0;
  std::vector<ReplicaRow> rows;
  std::size_t failures = 0;
  double freq_Hn = 0.0;
  double freq_tHn = 0.0;
  std::optional<double> ks_rho;
  std::optional<double> ks_ab;
  std::optional<double> variance_ratio_rho;
  std::optional<double> variance_ratio_ab;
  std::optional<double> sd_n_rho;
  std::optional<double> sd_n32_rho;
  std::optional<double> sd_sqrt_alpha;
  std::optional<double> sd_line;  // sd of sqrt(n)((alpha_hat-alpha)+(beta_hat-beta))
  std::array<double, 4> joint_mean{};
};

struct Check {
  std::string name;
  double value = 0.0;
  double threshold = 0.0;
  bool passed = false;
};

struct ExperimentReport {
  std::string model_name;
  Regime regime = Regime::General;
  double alpha = 0.0, beta = 0.0;
  double drift = 0.0, diffusion = 0.0;
  std::optional<double> sigma2_rho{};
  std::optional<double> sigma2_ab{};
  std::string rho_statistic{};  // which scaling is compared with the rho limit
  std::vector<double> rho_limit{};
  std::vector<double> ab_limit{};
  std::size_t limit_failures = 0;
  std::vector<SampleSizeSummary> per_n{};
  std::vector<Check> checks{};
  ExperimentConfig config;

  bool all_passed() const {
    for (const auto& c : checks)
      if (!c.passed) return false;
    return true;
  }
};

namespace detail {
inline std::vector<double> defined(const std::vector<ReplicaRow>& rows,
                                   std::optional<double> ScaledErrors::*field) {
  std::vector<double> out;
  for (const auto& r : rows)
    if (!r.failed && r.scaled.*field) out.push_back(*(r.scaled.*field));
  return out;
}

inline std::optional<double> sd_or_none(const std::vector<double>& xs) {
  if (xs.size() < 2) return std::nullopt;
  return sample_sd(xs);
}

inline std::vector<double> normal_sample(std::size_t count, double variance, std::uint64_t seed,
                                         std::uint64_t group) {
  RngStream rng(seed, stream_id(StreamDomain::NormalReference, group, 0));
  std::vector<double> out(count);
  const double sd = std::sqrt(variance);
  for (auto& x : out) x = sd * rng.normal();
  return out;
}
}  // namespace detail

/// Pairs finite-n scaled estimator errors with limit-law samples.
///
/// Trajectory r at the i-th sample size uses stream
/// stream_id(Trajectory, i, r); limit path j uses stream_id(LimitPath, 0, j).
/// Results are gathered by index, so the report depends only on the config.
inline ExperimentReport run_experiment(const ExperimentConfig& config) {
  config.validate();
  const ModelSpec& spec = config.model;
  ExperimentReport rep{.model_name = spec.name(), .config = config};
  rep.regime = classify_regime(spec);
  rep.alpha = spec.alpha();
  rep.beta = spec.beta();
  std::tie(rep.drift, rep.diffusion) = limit_coefficients(spec);
  const bool total_deg = rep.regime == Regime::TotalDegenerate;
  const bool ab_normal = rep.regime == Regime::DiffDegenerateImmigrationActive;
  const bool ab_defined = rep.regime != Regime::DiffDegenerateImmigrationNull;
  if (total_deg) rep.sigma2_rho = limit_rho_degenerate_sigma2(spec);
  if (ab_normal) rep.sigma2_ab = limit_ab_degenerate_sigma2(spec);
  rep.rho_statistic = total_deg ? "n^1.5(rho_hat-1)" : "n(rho_hat-1)";

  // Limit-law reference samples.
  const auto functionals =
      sample_limit_functionals(rep.drift, rep.diffusion, config.sde_steps, config.limit_paths,
                               config.seed, 0, config.threads);
  if (total_deg) {
    rep.rho_limit = detail::normal_sample(config.limit_paths, *rep.sigma2_rho, config.seed, 0);
  } else {
    for (const auto& f : functionals) {
      if (f.int_Y2 < kMinLimitDenominator) {
        ++rep.limit_failures;
        continue;
      }
      rep.rho_limit.push_back(limit_rho_sample(f));
    }
  }
  if (ab_normal) {
    rep.ab_limit = detail::normal_sample(config.limit_paths, *rep.sigma2_ab, config.seed, 1);
  } else if (ab_defined) {
    for (const auto& f : functionals)
      if (f.int_Y >= kMinLimitDenominator)
        rep.ab_limit.push_back(limit_ab_sample(f, rep.alpha, rep.beta).first);
  }

  const Simulator sim(spec);
  const Vec2 m_eps = spec.immigration_mean();
  for (std::size_t ni = 0; ni < config.n_values.size(); ++ni) {
    SampleSizeSummary s;
    s.n = config.n_values[ni];
    s.rows.resize(config.replicas);
    parallel_for(config.replicas, config.threads, [&](std::size_t r) {
      auto& row = s.rows[r];
      try {
        const auto traj =
            simulate(sim, s.n, config.seed, stream_id(StreamDomain::Trajectory, ni, r));
        row.cls = estimate_all(traj, m_eps);
        row.scaled = scaled_errors(spec, row.cls);
        row.joint = joint_statistics(traj, rep.regime);
      } catch (const Error&) {
        row = ReplicaRow{};
        row.failed = true;
      }
    });

    std::size_t h = 0, th = 0;
    std::array<CompensatedSum, 4> jm;
    for (const auto& row : s.rows) {
      if (row.failed) {
        ++s.failures;
        continue;
      }
      h += row.cls.in_Hn;
      th += row.cls.in_tHn;
      for (std::size_t i = 0; i < 4; ++i) jm[i] += row.joint[i];
    }
    const double ok = static_cast<double>(config.replicas - s.failures);
    s.freq_Hn = static_cast<double>(h) / static_cast<double>(config.replicas);
    s.freq_tHn = static_cast<double>(th) / static_cast<double>(config.replicas);
    if (ok > 0)
      for (std::size_t i = 0; i < 4; ++i) s.joint_mean[i] = jm[i].value() / ok;

    const auto n_rho = detail::defined(s.rows, &ScaledErrors::n_rho);
    const auto n32_rho = detail::defined(s.rows, &ScaledErrors::n32_rho);
    const auto sa = detail::defined(s.rows, &ScaledErrors::sqrt_alpha);
    const auto sb = detail::defined(s.rows, &ScaledErrors::sqrt_beta);
    s.sd_n_rho = detail::sd_or_none(n_rho);
    s.sd_n32_rho = detail::sd_or_none(n32_rho);
    s.sd_sqrt_alpha = detail::sd_or_none(sa);
    std::vector<double> line(sa.size());
    for (std::size_t i = 0; i < sa.size(); ++i) line[i] = sa[i] + sb[i];
    s.sd_line = detail::sd_or_none(line);

    const auto& pivot = total_deg ? n32_rho : n_rho;
    if (!pivot.empty() && !rep.rho_limit.empty()) s.ks_rho = ks_two_sample(pivot, rep.rho_limit);
    if (total_deg && pivot.size() >= 2) s.variance_ratio_rho = sample_variance(pivot) / *rep.sigma2_rho;
    if (!sa.empty() && !rep.ab_limit.empty()) s.ks_ab = ks_two_sample(sa, rep.ab_limit);
    if (sa.size() >= 2) {
      if (ab_normal) s.variance_ratio_ab = sample_variance(sa) / *rep.sigma2_ab;
      if (total_deg)
        s.variance_ratio_ab = sample_variance(sa) / (4.0 / 3.0 * rep.alpha * rep.beta);
    }
    rep.per_n.push_back(std::move(s));
  }

  // Configured checks on the largest sample size.
  const auto& last = rep.per_n.back();
  const std::string tag = "[n=" + std::to_string(last.n) + "]";
  auto add = [&](std::string name, std::optional<double> value, double threshold) {
    // Each check passes when value <= threshold.
    Check c{std::move(name), value.value_or(std::nan("")), threshold, value && *value <= threshold};
    rep.checks.push_back(std::move(c));
  };
  add("ks " + rep.rho_statistic + " " + tag, last.ks_rho, config.ks_tolerance);
  if (ab_defined) add("ks sqrt(n)(alpha_hat-alpha) " + tag, last.ks_ab, config.ks_tolerance);
  if (last.variance_ratio_rho)
    add("|variance ratio rho - 1| " + tag, std::abs(*last.variance_ratio_rho - 1.0),
        config.variance_tolerance);
  if (last.variance_ratio_ab)
    add("|variance ratio alpha - 1| " + tag, std::abs(*last.variance_ratio_ab - 1.0),
        config.variance_tolerance);
  if (rep.per_n.size() > 1) {
    const auto& first = rep.per_n.front();
    if (first.ks_rho && last.ks_rho)
      add("ks(n=" + std::to_string(last.n) + ") - ks(n=" + std::to_string(first.n) + ")",
          *last.ks_rho - *first.ks_rho, config.monotone_slack);
  }
  return rep;
}

inline nlohmann::ordered_json report_to_json(const ExperimentReport& rep) {
  using nlohmann::ordered_json;
  auto opt = [](const std::optional<double>& v) -> ordered_json {
    return v ? ordered_json(*v) : ordered_json(nullptr);
  };
  ordered_json j;
  j["model"] = rep.model_name;
  j["regime"] = std::string(to_string(rep.regime));
  j["alpha"] = rep.alpha;
  j["beta"] = rep.beta;
  j["limit_drift"] = rep.drift;
  j["limit_diffusion"] = rep.diffusion;
  j["sigma2_rho"] = opt(rep.sigma2_rho);
  j["sigma2_ab"] = opt(rep.sigma2_ab);
  j["rho_statistic"] = rep.rho_statistic;
  const auto& c = rep.config;
  j["config"] = {{"n_values", c.n_values},       {"replicas", c.replicas},
                 {"limit_paths", c.limit_paths}, {"sde_steps", c.sde_steps},
                 {"seed", c.seed},               {"ks_tolerance", c.ks_tolerance},
                 {"variance_tolerance", c.variance_tolerance},
                 {"monotone_slack", c.monotone_slack}};
  j["limit_samples"] = {{"rho", rep.rho_limit.size()}, {"ab", rep.ab_limit.size()},
                        {"failures", rep.limit_failures}};
  ordered_json per = ordered_json::array();
  for (const auto& s : rep.per_n) {
    per.push_back({{"n", s.n},
                   {"failures", s.failures},
                   {"freq_Hn", s.freq_Hn},
                   {"freq_tHn", s.freq_tHn},
                   {"ks_rho", opt(s.ks_rho)},
                   {"ks_ab", opt(s.ks_ab)},
                   {"variance_ratio_rho", opt(s.variance_ratio_rho)},
                   {"variance_ratio_ab", opt(s.variance_ratio_ab)},
                   {"sd_n_rho", opt(s.sd_n_rho)},
                   {"sd_n32_rho", opt(s.sd_n32_rho)},
                   {"sd_sqrt_alpha", opt(s.sd_sqrt_alpha)},
                   {"sd_line", opt(s.sd_line)},
                   {"joint_statistics_mean", s.joint_mean}});
  }
  j["per_n"] = per;
  ordered_json checks = ordered_json::array();
  for (const auto& ch : rep.checks)
    checks.push_back({{"name", ch.name},
                      {"value", std::isnan(ch.value) ? ordered_json(nullptr) : ordered_json(ch.value)},
                      {"threshold", ch.threshold},
                      {"result", ch.passed ? "PASS" : "FAIL"}});
  j["checks"] = checks;
  j["all_passed"] = rep.all_passed();
  return j;
}

/// Writes report.json, scaled_errors_n<N>.csv per sample size and
/// limit_samples.csv into `dir`.
inline void write_report(const ExperimentReport& rep, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  {
    std::ofstream out(dir / "report.json", std::ios::binary);
    out << report_to_json(rep).dump(2) << '\n';
  }
  for (const auto& s : rep.per_n) {
    std::ofstream out(dir / ("scaled_errors_n" + std::to_string(s.n) + ".csv"), std::ios::binary);
    out << "replica,n,in_Hn,in_tHn,rho_hat,delta_hat,alpha_hat,beta_hat,"
           "n_rho,n32_rho,sqrt_alpha,sqrt_beta,joint1,joint2,joint3,joint4\n";
    for (std::size_t r = 0; r < s.rows.size(); ++r) {
      const auto& row = s.rows[r];
      out << r << ',' << s.n << ',';
      if (row.failed) {
        out << "failed,,,,,,,,,,,,,\n";
        continue;
      }
      out << row.cls.in_Hn << ',' << row.cls.in_tHn << ',' << format_optional(row.cls.rho_hat)
          << ',' << format_optional(row.cls.delta_hat) << ',' << format_optional(row.cls.alpha_hat)
          << ',' << format_optional(row.cls.beta_hat) << ',' << format_optional(row.scaled.n_rho)
          << ',' << format_optional(row.scaled.n32_rho) << ','
          << format_optional(row.scaled.sqrt_alpha) << ',' << format_optional(row.scaled.sqrt_beta);
      for (double v : row.joint) out << ',' << format_double(v);
      out << '\n';
    }
  }
  std::ofstream out(dir / "limit_samples.csv", std::ios::binary);
  out << "index,rho_limit,ab_limit\n";
  const std::size_t rows = std::max(rep.rho_limit.size(), rep.ab_limit.size());
  for (std::size_t i = 0; i < rows; ++i) {
    out << i << ',';
    if (i < rep.rho_limit.size()) out << format_double(rep.rho_limit[i]);
    out << ',';
    if (i < rep.ab_limit.size()) out << format_double(rep.ab_limit[i]);
    out << '\n';
  }
}

}  // namespace gwcls
