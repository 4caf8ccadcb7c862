#pragma once

// Subcommands behind the dqwalk executable. Each takes a RunConfig and
// output streams, and returns the process exit code:
//   0 ok, 1 check failure, 2 invalid input or channel, 3 regime error.

#include "dqwalk/brokenline.hpp"
#include "dqwalk/channel.hpp"
#include "dqwalk/channel_io.hpp"
#include "dqwalk/csv.hpp"
#include "dqwalk/error.hpp"
#include "dqwalk/moments.hpp"
#include "dqwalk/series_io.hpp"
#include "dqwalk/simulator.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <iostream>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

namespace dqwalk {

enum ExitCode : int { kExitOk = 0, kExitCheckFailed = 1, kExitInvalidInput = 2, kExitRegime = 3 };

struct ChannelSpec {
  /// coherent | broken-line | coin-dephasing; ignored when `file` is set.
  std::string builtin = "coherent";
  std::string file;
  double p = 0.5;
  double q = 0.0;
  double theta1 = 0.0;
  double theta2 = std::numbers::pi;
  double theta3 = 0.0;
  double theta4 = 0.0;

  friend bool operator==(const ChannelSpec&, const ChannelSpec&) = default;
};

NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(ChannelSpec, builtin, file, p, q, theta1, theta2, theta3, theta4)

struct RunConfig {
  std::string subcommand;
  ChannelSpec channel;
  /// R | L | symmetric | mixed, or four comma-separated Pauli coefficients.
  std::string coin = "R";
  int t = 25;
  int t_lo = 400;
  int t_hi = 500;
  /// 0 = default node count.
  int n_k = 0;
  /// Empty = stdout.
  std::string output;
  std::string moments_output;
  /// csv | json
  std::string format = "csv";
  bool naive = false;
  bool asymptotic = false;
  bool critical = false;
  bool with_slope = false;
  bool coin_reduction = false;
  bool all_sites = false;
  std::vector<double> p_values;
  double tol = 1e-12;
  bool inject_g_sign_flip = false;

  friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(RunConfig, subcommand, channel, coin, t, t_lo, t_hi, n_k, output,
                                                moments_output, format, naive, asymptotic, critical, with_slope,
                                                coin_reduction, all_sites, p_values, tol, inject_g_sign_flip)

inline WalkChannel make_channel(const ChannelSpec& spec) {
  if (!spec.file.empty()) return load_channel_file(spec.file);
  if (spec.builtin == "coherent") return build_coherent(hadamard(), "coherent-hadamard");
  if (spec.builtin == "broken-line") {
    return build_broken_line({spec.p, spec.theta1, spec.theta2, spec.theta3, spec.theta4});
  }
  if (spec.builtin == "coin-dephasing") return build_coin_dephasing(spec.q);
  throw Error(ErrorKind::InvalidArgument, "unknown channel '" + spec.builtin + "'");
}

inline PauliVector coin_preset(const std::string& name) {
  if (name == "R") return to_pauli(dyad(Coin::R, Coin::R));
  if (name == "L") return to_pauli(dyad(Coin::L, Coin::L));
  if (name == "symmetric") {
    const Eigen::Vector2cd psi = Eigen::Vector2cd(1.0, kI) / std::sqrt(2.0);
    return to_pauli(psi * psi.adjoint());
  }
  if (name == "mixed") return PauliVector(0.5, 0.0, 0.0, 0.0);

  std::vector<double> r;
  std::stringstream ss(name);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      r.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw Error(ErrorKind::InvalidCoinState, "cannot parse coin '" + name + "'");
    }
  }
  if (r.size() != 4) {
    throw Error(ErrorKind::InvalidCoinState,
                "coin must be R, L, symmetric, mixed or four Pauli coefficients r0,r1,r2,r3");
  }
  PauliVector v(r[0], r[1], r[2], r[3]);
  require_coin_density(v);
  return v;
}

namespace detail {

/// Writes `text` to `path`, or to `fallback` when path is empty.
inline void emit(const std::string& path, const std::string& text, std::ostream& fallback) {
  if (path.empty()) {
    fallback << text;
    return;
  }
  std::ofstream f(path);
  if (!f) throw Error(ErrorKind::InvalidArgument, "cannot write " + path);
  f << text;
}

inline void print_warnings(const MomentSeries& s, std::ostream& err) {
  for (const auto& w : s.warnings) err << "warning: " << w << '\n';
}

}  // namespace detail

/// Runs `body`, mapping library errors to exit codes with a diagnostic.
inline int run_guarded(std::ostream& err, const std::function<int()>& body) {
  try {
    return body();
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return is_regime_error(e.kind()) ? kExitRegime : kExitInvalidInput;
  }
}

/// Oracle run: position distribution after t steps (and optionally the
/// per-step moment series) from the full density matrix.
inline int cmd_walk(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  return run_guarded(err, [&] {
    const WalkChannel channel = make_channel(cfg.channel);
    const PauliVector coin = coin_preset(cfg.coin);
    if (cfg.t < 0) throw Error(ErrorKind::InvalidArgument, "t must be >= 0");

    DensityState state = init_state(0, coin);
    std::vector<std::pair<double, double>> moments;
    for (int s = 0;; ++s) {
      moments.emplace_back(moments_direct(state, 1), moments_direct(state, 2));
      if (s == cfg.t) break;
      state = step(state, channel, default_thread_count());
    }
    std::ostringstream dist_csv, moments_csv;
    write_distribution_csv(dist_csv, position_distribution(state), cfg.all_sites);
    write_series_csv(moments_csv, moments);
    detail::emit(cfg.output, dist_csv.str(), out);
    if (!cfg.moments_output.empty()) detail::emit(cfg.moments_output, moments_csv.str(), out);
    return kExitOk;
  });
}

/// Fourier-space engine: the moment series, or its long-time limit.
inline int cmd_moments(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  return run_guarded(err, [&] {
    const WalkChannel channel = make_channel(cfg.channel);
    const PauliVector coin = coin_preset(cfg.coin);
    if (cfg.format != "csv" && cfg.format != "json") {
      throw Error(ErrorKind::InvalidArgument, "format must be csv or json");
    }

    if (cfg.asymptotic) {
      const int n_k = cfg.n_k > 0 ? cfg.n_k : 1024;
      const double value = asymptotic_first_moment(channel, coin, n_k);
      std::ostringstream text;
      if (cfg.format == "json") {
        text << nlohmann::json{{"label", channel.label()}, {"n_k", n_k}, {"asymptotic_first", value}}.dump(2)
             << '\n';
      } else {
        text << "n_k,asymptotic_first\n" << n_k << ',' << format_double(value) << '\n';
      }
      detail::emit(cfg.output, text.str(), out);
      return kExitOk;
    }

    MomentOptions opts;
    opts.n_k = cfg.n_k;
    opts.naive = cfg.naive;
    opts.negate_g_for_testing = cfg.inject_g_sign_flip;
    const MomentSeries series = compute_moment_series(channel, coin, cfg.t, opts);
    detail::print_warnings(series, err);
    std::ostringstream text;
    if (cfg.format == "json") {
      text << series_to_json(series, channel).dump(2) << '\n';
    } else {
      write_series_csv(text, series);
    }
    detail::emit(cfg.output, text.str(), out);
    return kExitOk;
  });
}

inline std::vector<double> default_p_grid() {
  std::vector<double> ps;
  for (int i = 1; i <= 20; ++i) ps.push_back(0.05 * i);
  return ps;
}

/// Broken-line K, D, I over a p grid (optionally with the slope estimate),
/// or the crossover probability where D = 1/2.
inline int cmd_diffusion(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  return run_guarded(err, [&] {
    std::ostringstream text;
    if (cfg.critical) {
      const double pc = critical_p(cfg.tol);
      text << "p_critical,D\n" << format_double(pc) << ',' << format_double(diffusion_closed_form(pc).D) << '\n';
      detail::emit(cfg.output, text.str(), out);
      return kExitOk;
    }
    const std::vector<double> ps = cfg.p_values.empty() ? default_p_grid() : cfg.p_values;
    write_sweep_csv_header(text, cfg.with_slope);
    const PauliVector coin = coin_preset(cfg.coin);
    for (double p : ps) {
      try {
        const DiffusionResult r = diffusion_closed_form(p);
        write_sweep_csv_row(text, r);
        if (cfg.with_slope) {
          MomentOptions opts;
          opts.n_k = cfg.n_k;
          const double d = diffusion_from_slope(build_broken_line({p}), coin, cfg.t_lo, cfg.t_hi, opts);
          text << ',' << format_double(d);
        }
        text << '\n';
      } catch (const Error& e) {
        text << format_double(p) << ",nan,nan,nan,error:" << to_string(e.kind()) << (cfg.with_slope ? ",nan" : "")
             << '\n';
        err << "warning: p = " << p << ": " << e.what() << '\n';
      }
    }
    detail::emit(cfg.output, text.str(), out);
    return kExitOk;
  });
}

struct CheckRow {
  std::string name;
  double max_abs_delta = 0.0;
  double tolerance = 0.0;
  bool pass() const { return max_abs_delta <= tolerance; }
};

/// Channels exercised by the cross-check suite.
inline std::vector<WalkChannel> xcheck_channels() {
  std::vector<WalkChannel> out;
  out.push_back(build_coherent(hadamard(), "coherent-hadamard"));
  for (double p : {0.0, 0.1, 0.5, 0.9, 1.0}) out.push_back(build_broken_line({p}));
  for (double q : {0.3, 0.8}) out.push_back(build_coin_dephasing(q));
  return out;
}

inline std::vector<CheckRow> run_xcheck(const RunConfig& cfg) {
  const std::vector<std::string> coins{"R", "symmetric", "mixed"};
  MomentOptions opts;
  opts.n_k = cfg.n_k;
  opts.negate_g_for_testing = cfg.inject_g_sign_flip;
  const int t = cfg.t;

  std::vector<CheckRow> rows;
  for (const auto& channel : xcheck_channels()) {
    CheckRow first{"oracle first-moment " + channel.label(), 0.0, 1e-9};
    CheckRow second{"oracle second-moment " + channel.label(), 0.0, 1e-9};
    for (const auto& name : coins) {
      const PauliVector coin = coin_preset(name);
      const auto series = compute_moment_series(channel, coin, t, opts);
      const auto direct = direct_moment_series(init_state(0, coin), channel, t);
      for (int s = 0; s <= t; ++s) {
        const auto i = static_cast<std::size_t>(s);
        first.max_abs_delta = std::max(first.max_abs_delta, std::abs(series.first[i] - direct[i].first));
        second.max_abs_delta = std::max(second.max_abs_delta, std::abs(series.second[i] - direct[i].second));
      }
    }
    rows.push_back(first);
    rows.push_back(second);
  }

  {
    const int t_naive = std::min(t, 12);
    CheckRow naive{"naive-vs-recursive second-moment", 0.0, 1e-11};
    MomentOptions n_opts = opts;
    n_opts.naive = true;
    for (const auto& channel : xcheck_channels()) {
      const PauliVector coin = coin_preset("R");
      const auto a = compute_moment_series(channel, coin, t_naive, opts);
      const auto b = compute_moment_series(channel, coin, t_naive, n_opts);
      for (int s = 0; s <= t_naive; ++s) {
        const auto i = static_cast<std::size_t>(s);
        naive.max_abs_delta = std::max(naive.max_abs_delta, std::abs(a.second[i] - b.second[i]));
      }
    }
    rows.push_back(naive);
  }

  if (cfg.coin_reduction) {
    const int t_red = std::min(t, 20);
    for (double q : {0.0, 0.2, 0.5, 1.0}) {
      const WalkChannel channel = build_coin_dephasing(q);
      CheckRow first{"coin-reduction first-moment " + channel.label(), 0.0, 1e-10};
      CheckRow second{"coin-reduction second-moment " + channel.label(), 0.0, 1e-10};
      CheckRow jt{"coin-reduction j-term " + channel.label(), 0.0, 1e-12};
      for (const auto& name : coins) {
        const PauliVector coin = coin_preset(name);
        const auto generic = compute_moment_series(channel, coin, t_red, opts);
        const auto special = compute_coin_series_specialized(channel, coin, t_red, opts);
        for (int s = 0; s <= t_red; ++s) {
          const auto i = static_cast<std::size_t>(s);
          first.max_abs_delta = std::max(first.max_abs_delta, std::abs(generic.first[i] - special.first[i]));
          second.max_abs_delta = std::max(second.max_abs_delta, std::abs(generic.second[i] - special.second[i]));
          jt.max_abs_delta = std::max(jt.max_abs_delta, std::abs(generic.j_term[i] - s));
        }
      }
      rows.push_back(first);
      rows.push_back(second);
      rows.push_back(jt);
    }
  }
  return rows;
}

/// Engine-vs-oracle (and optionally generic-vs-coin-specialized) table.
inline int cmd_xcheck(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  return run_guarded(err, [&] {
    if (cfg.t < 1) throw Error(ErrorKind::InvalidArgument, "t must be >= 1");
    const auto rows = run_xcheck(cfg);
    std::ostringstream text;
    text << "check,max_abs_delta,tolerance,status\n";
    bool all_pass = true;
    for (const auto& r : rows) {
      text << r.name << ',' << format_double(r.max_abs_delta) << ',' << format_double(r.tolerance) << ','
           << (r.pass() ? "PASS" : "FAIL") << '\n';
      all_pass = all_pass && r.pass();
    }
    detail::emit(cfg.output, text.str(), out);
    return all_pass ? kExitOk : kExitCheckFailed;
  });
}

inline int dispatch(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  if (cfg.subcommand == "walk") return cmd_walk(cfg, out, err);
  if (cfg.subcommand == "moments") return cmd_moments(cfg, out, err);
  if (cfg.subcommand == "diffusion") return cmd_diffusion(cfg, out, err);
  if (cfg.subcommand == "xcheck") return cmd_xcheck(cfg, out, err);
  err << "error: unknown subcommand '" << cfg.subcommand << "'\n";
  return kExitInvalidInput;
}

}  // namespace dqwalk
