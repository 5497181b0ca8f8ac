#pragma once

#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "finitekey/binomial.hpp"
#include "finitekey/choi.hpp"
#include "finitekey/estimation.hpp"
#include "finitekey/keyrate.hpp"
#include "finitekey/optimizer.hpp"
#include "finitekey/sweep.hpp"

namespace finitekey {

namespace detail {

inline std::optional<EstimationMethod> estimation_method_from(
    const std::string& name) {
  if (name == "variational") return EstimationMethod::variational;
  if (name == "relative") return EstimationMethod::relative_entropy;
  if (name == "chernoff") return EstimationMethod::chernoff;
  if (name == "moment") return EstimationMethod::factorial_moment;
  if (name == "klar") return EstimationMethod::klar;
  return std::nullopt;
}

inline ChannelSpec channel_from_flags(std::optional<double> depol,
                                      std::optional<double> ampdamp,
                                      const std::string& choi_path) {
  const int given = (depol ? 1 : 0) + (ampdamp ? 1 : 0) +
                    (choi_path.empty() ? 0 : 1);
  if (given != 1)
    throw CLI::ValidationError(
        "channel", "give exactly one of --depolarizing, --amplitude-damping, --choi");
  if (depol) return ChannelSpec::depolarizing(*depol);
  if (ampdamp) return ChannelSpec::amplitude_damping(*ampdamp);
  std::ifstream f(choi_path);
  if (!f) throw CLI::ValidationError("channel", "choi file not found: " + choi_path);
  return ChannelSpec::explicit_channel(choi_from_text(f));
}

}  // namespace detail

/// Command-line dispatch. Exit codes: 0 success, 1 usage or input error,
/// 2 numerical failure.
inline int cli_main(int argc, const char* const* argv, std::ostream& out,
                    std::ostream& err) {
  CLI::App app{"Finite-key BB84 rate analysis"};
  app.require_subcommand(1);

  // ---- bound ----
  auto* bound = app.add_subcommand(
      "bound", "Worst-case phase error estimate for one construction");
  std::string bound_method = "chernoff";
  std::uint64_t bound_m = 0;
  double bound_observed = 0.0, bound_eps = 1e-5;
  bound->add_option("--method", bound_method,
                    "variational|relative|chernoff|moment|klar|exact")
      ->required();
  bound->add_option("--m", bound_m, "sample count")->required();
  bound->add_option("--observed", bound_observed, "observed error rate")
      ->required();
  bound->add_option("--eps", bound_eps, "confidence failure probability");

  // ---- ambiguity ----
  auto* ambiguity = app.add_subcommand(
      "ambiguity", "Eve's worst-case ambiguity, conventional or accurate");
  std::string amb_method = "variational";
  std::uint64_t amb_m = 0;
  double amb_eps = 1e-5;
  std::optional<double> amb_depol, amb_ampdamp, amb_observed;
  std::string amb_choi, amb_stats;
  std::optional<std::uint64_t> amb_sample_seed;
  bool amb_details = false;
  ambiguity->add_option("--method", amb_method,
                        "variational|relative|chernoff|moment|klar|accurate")
      ->required();
  ambiguity->add_option("--m", amb_m, "sample count")->required();
  ambiguity->add_option("--eps", amb_eps, "confidence failure probability");
  ambiguity->add_option("--depolarizing", amb_depol, "depolarizing channel q");
  ambiguity->add_option("--amplitude-damping", amb_ampdamp,
                        "amplitude damping channel q");
  ambiguity->add_option("--choi", amb_choi, "file with 16 Choi entries");
  ambiguity->add_option("--observed", amb_observed,
                        "explicit observed error rate (conventional only)");
  ambiguity->add_option("--stats", amb_stats,
                        "file with 16 outcome frequencies (accurate only)");
  ambiguity->add_option("--sample-seed", amb_sample_seed,
                        "sample a pseudo-random statistic with this seed");
  ambiguity->add_flag("--details", amb_details,
                      "print the full optimizer record (accurate only)");

  // ---- keylength ----
  auto* keylength =
      app.add_subcommand("keylength", "Secure key length lower bound");
  std::uint64_t kl_n = 0;
  double kl_eps_pe = 1e-5, kl_eps_pa = 1e-10, kl_delta_bar = 0.0;
  std::optional<double> kl_leak, kl_qber, kl_eff, kl_eps_bar;
  double kl_ambiguity = 0.0;
  keylength->add_option("--n-raw", kl_n, "raw key length N")->required();
  keylength->add_option("--min-ambiguity", kl_ambiguity,
                        "Eve's worst-case ambiguity in bits")
      ->required();
  keylength->add_option("--eps-pe", kl_eps_pe, "estimation failure probability");
  keylength->add_option("--eps-pa", kl_eps_pa,
                        "privacy amplification failure probability");
  keylength->add_option("--delta-bar", kl_delta_bar, "correction term in bits");
  keylength->add_option("--delta-bar-from-epsbar", kl_eps_bar,
                        "derive delta-bar as 7 sqrt(log2(2/eps)/N)");
  keylength->add_option("--leak-ec", kl_leak, "reconciliation leakage in bits");
  keylength->add_option("--qber", kl_qber,
                        "derive leakage from the leak model at this QBER");
  keylength->add_option("--efficiency", kl_eff,
                        "reconciliation efficiency for the leak model");

  // ---- sweep ----
  auto* sweep = app.add_subcommand("sweep", "Run a comparison sweep");
  std::string sweep_config_path, sweep_format = "csv", sweep_output;
  std::optional<std::uint64_t> sweep_seed;
  std::optional<double> sweep_eps;
  std::optional<std::string> sweep_accounting;
  sweep->add_option("--config", sweep_config_path, "key=value config file")
      ->required();
  sweep->add_option("--format", sweep_format, "csv|json");
  sweep->add_option("--output", sweep_output, "write to file instead of stdout");
  sweep->add_option("--seed", sweep_seed, "override the config seed");
  sweep->add_option("--eps", sweep_eps, "override eps_pe");
  sweep->add_option("--accounting", sweep_accounting, "override: quarter|full");

  // ---- channel ----
  auto* channel = app.add_subcommand(
      "channel", "Print a channel's Choi matrix or statistics");
  std::optional<double> ch_depol, ch_ampdamp;
  std::string ch_choi, ch_print = "choi";
  channel->add_option("--depolarizing", ch_depol, "depolarizing channel q");
  channel->add_option("--amplitude-damping", ch_ampdamp,
                      "amplitude damping channel q");
  channel->add_option("--choi", ch_choi, "file with 16 Choi entries");
  channel->add_option("--print", ch_print,
                      "choi|stats|conventional|entropy");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      // --help and friends
      out << app.help();
      return 0;
    }
    err << "error: " << e.what() << '\n';
    return 1;
  }

  try {
    if (*bound) {
      double value;
      if (bound_method == "exact") {
        value = invert_bound(TailBoundKind::exact, bound_m, bound_observed,
                             bound_eps)
                    .upper;
      } else {
        const auto method = detail::estimation_method_from(bound_method);
        if (!method) {
          err << "error: unknown method: " << bound_method << '\n';
          return 1;
        }
        value = worst_case_phase_error(*method, bound_m, bound_observed,
                                       bound_eps);
      }
      out << detail::format_double(value) << '\n';
      return 0;
    }

    if (*ambiguity) {
      if (amb_method == "accurate") {
        EmpiricalDistribution lm{{}, 0};
        if (!amb_stats.empty()) {
          std::ifstream f(amb_stats);
          if (!f) {
            err << "error: stats file not found: " << amb_stats << '\n';
            return 1;
          }
          std::vector<double> probs(16);
          for (auto& p : probs)
            if (!(f >> p)) {
              err << "error: stats file needs 16 frequencies\n";
              return 1;
            }
          lm = EmpiricalDistribution::validated(std::move(probs), 0);
        } else {
          const ChoiMatrix rho = choi_of(
              detail::channel_from_flags(amb_depol, amb_ampdamp, amb_choi));
          lm = stats_accurate(rho);
        }
        if (amb_sample_seed)
          lm = sample_statistics(lm, amb_m, *amb_sample_seed);
        const double xi = xi_relative(amb_m, 16, amb_eps);
        const OptimizationResult res = min_ambiguity_accurate(lm, xi);
        if (res.status == OptimizerStatus::infeasible) {
          err << "error: no channel is compatible with the statistic at this radius\n";
          return 2;
        }
        if (amb_details)
          out << to_kv_text(res);
        else
          out << detail::format_double(res.value) << '\n';
        return 0;
      }
      const auto method = detail::estimation_method_from(amb_method);
      if (!method) {
        err << "error: unknown method: " << amb_method << '\n';
        return 1;
      }
      double observed;
      if (amb_observed) {
        observed = *amb_observed;
      } else {
        const ChoiMatrix rho = choi_of(
            detail::channel_from_flags(amb_depol, amb_ampdamp, amb_choi));
        observed = stats_conventional(rho).probs[0];
      }
      out << detail::format_double(
                 conventional_ambiguity(*method, amb_m, observed, amb_eps))
          << '\n';
      return 0;
    }

    if (*keylength) {
      double delta_bar = kl_delta_bar;
      if (kl_eps_bar) delta_bar = delta_bar_default(kl_n, *kl_eps_bar);
      double leak = 0.0;
      if (kl_leak) {
        leak = *kl_leak;
      } else if (kl_qber) {
        leak = leak_model(kl_n, *kl_qber, kl_eff.value_or(1.0));
      }
      const auto params =
          KeyRateParams::validated(kl_n, kl_eps_pe, kl_eps_pa, delta_bar, leak);
      out << key_length(params, kl_ambiguity) << '\n';
      return 0;
    }

    if (*sweep) {
      std::ifstream f(sweep_config_path);
      if (!f) {
        err << "error: config not found: " << sweep_config_path << '\n';
        return 1;
      }
      SweepConfig cfg = parse_sweep_config(f);
      if (sweep_seed) cfg.seed = *sweep_seed;
      if (sweep_eps) cfg.eps_pe = *sweep_eps;
      if (sweep_accounting) {
        if (*sweep_accounting == "quarter")
          cfg.accounting = SampleAccounting::quarter;
        else if (*sweep_accounting == "full")
          cfg.accounting = SampleAccounting::full;
        else {
          err << "error: accounting must be quarter or full\n";
          return 1;
        }
      }
      const auto rows = run_sweep(cfg);
      std::ofstream of;
      std::ostream* sink = &out;
      if (!sweep_output.empty()) {
        of.open(sweep_output, std::ios::binary);
        if (!of) {
          err << "error: cannot open output file: " << sweep_output << '\n';
          return 1;
        }
        sink = &of;
      }
      if (sweep_format == "csv")
        write_csv(*sink, rows);
      else if (sweep_format == "json")
        write_json(*sink, rows);
      else {
        err << "error: format must be csv or json\n";
        return 1;
      }
      return 0;
    }

    if (*channel) {
      const ChoiMatrix rho = choi_of(
          detail::channel_from_flags(ch_depol, ch_ampdamp, ch_choi));
      if (ch_print == "choi") {
        out << to_text(rho);
      } else if (ch_print == "stats") {
        const auto lam = stats_accurate(rho);
        for (std::size_t i = 0; i < lam.probs.size(); ++i)
          out << (i ? " " : "") << detail::format_double(lam.probs[i]);
        out << '\n';
      } else if (ch_print == "conventional") {
        out << detail::format_double(stats_conventional(rho).probs[0]) << '\n';
      } else if (ch_print == "entropy") {
        out << detail::format_double(cond_entropy_x_given_e(rho)) << '\n';
      } else {
        err << "error: --print must be choi, stats, conventional, or entropy\n";
        return 1;
      }
      return 0;
    }
  } catch (const CLI::ValidationError& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::runtime_error& e) {
    err << "error: numerical failure: " << e.what() << '\n';
    return 2;
  }
  err << "error: no subcommand given\n";
  return 1;
}

}  // namespace finitekey
