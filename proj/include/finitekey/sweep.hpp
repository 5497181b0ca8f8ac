#pragma once

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "finitekey/choi.hpp"
#include "finitekey/estimation.hpp"
#include "finitekey/optimizer.hpp"

namespace finitekey {

enum class SweepMethod {
  variational,
  relative_entropy,
  chernoff,
  factorial_moment,
  klar,
  accurate,
};

inline const char* to_string(SweepMethod m) {
  switch (m) {
    case SweepMethod::variational: return "variational";
    case SweepMethod::relative_entropy: return "relative";
    case SweepMethod::chernoff: return "chernoff";
    case SweepMethod::factorial_moment: return "moment";
    case SweepMethod::klar: return "klar";
    case SweepMethod::accurate: return "accurate";
  }
  return "unknown";
}

inline std::optional<SweepMethod> sweep_method_from(const std::string& name) {
  if (name == "variational") return SweepMethod::variational;
  if (name == "relative") return SweepMethod::relative_entropy;
  if (name == "chernoff") return SweepMethod::chernoff;
  if (name == "moment") return SweepMethod::factorial_moment;
  if (name == "klar") return SweepMethod::klar;
  if (name == "accurate") return SweepMethod::accurate;
  return std::nullopt;
}

/// How many of the m announced sample pairs the conventional methods see.
/// quarter: the matched-x-basis share m/4 (the accurate method uses all
/// outcomes, the conventional one only the x/x quarter). full: m as is.
enum class SampleAccounting { quarter, full };

struct SweepConfig {
  ChannelSpec channel;
  std::vector<std::uint64_t> sample_sizes;
  double eps_pe = 1e-5;
  std::vector<SweepMethod> methods;
  std::uint64_t seed = 1;
  int trials_per_point = 3;
  SampleAccounting accounting = SampleAccounting::quarter;

  void validate() const {
    if (sample_sizes.empty())
      throw std::invalid_argument("sweep: no sample sizes");
    for (std::size_t i = 1; i < sample_sizes.size(); ++i)
      if (sample_sizes[i] <= sample_sizes[i - 1])
        throw std::invalid_argument("sweep: sample sizes must be strictly increasing");
    if (!(eps_pe > 0.0 && eps_pe < 1.0))
      throw std::invalid_argument("sweep: eps_pe outside (0,1)");
    if (methods.empty()) throw std::invalid_argument("sweep: no methods");
    if (trials_per_point < 1)
      throw std::invalid_argument("sweep: trials_per_point < 1");
  }
};

struct ResultRow {
  std::string method;
  std::uint64_t m = 0;
  double ambiguity = 0.0;
  std::optional<double> phase_error;  // conventional methods only
  std::string status;
  int trial = 0;
};

namespace detail {

inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t point,
                                 std::uint64_t trial) {
  return splitmix64(splitmix64(master ^ (point * 0x100000001B3ull)) + trial);
}

inline std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

inline EstimationMethod estimation_method_of(SweepMethod m) {
  switch (m) {
    case SweepMethod::variational: return EstimationMethod::variational;
    case SweepMethod::relative_entropy: return EstimationMethod::relative_entropy;
    case SweepMethod::chernoff: return EstimationMethod::chernoff;
    case SweepMethod::factorial_moment: return EstimationMethod::factorial_moment;
    case SweepMethod::klar: return EstimationMethod::klar;
    case SweepMethod::accurate: break;
  }
  throw std::invalid_argument("sweep: not a conventional method");
}

}  // namespace detail

inline std::uint64_t conventional_samples(std::uint64_t m,
                                          SampleAccounting accounting) {
  if (accounting == SampleAccounting::full) return m;
  return std::max<std::uint64_t>(1, m / 4);
}

/// Runs the comparison sweep. Conventional methods are evaluated at the
/// channel's theoretical error statistic; the accurate method runs the
/// optimizer on seeded pseudo-random statistics, one row per trial. Rows
/// come out in deterministic order, so identical configs produce identical
/// output bytes.
inline std::vector<ResultRow> run_sweep(const SweepConfig& config) {
  config.validate();
  const ChoiMatrix rho = choi_of(config.channel);
  const double observed = stats_conventional(rho).probs[0];
  const EmpiricalDistribution lambda_inf = stats_accurate(rho);

  std::vector<SweepMethod> methods = config.methods;
  std::sort(methods.begin(), methods.end());
  methods.erase(std::unique(methods.begin(), methods.end()), methods.end());

  std::vector<ResultRow> rows;
  for (std::size_t pi = 0; pi < config.sample_sizes.size(); ++pi) {
    const std::uint64_t m = config.sample_sizes[pi];
    for (SweepMethod method : methods) {
      if (method != SweepMethod::accurate) {
        const std::uint64_t mc = conventional_samples(m, config.accounting);
        const auto kind = detail::estimation_method_of(method);
        const double pe = worst_case_phase_error(kind, mc, observed, config.eps_pe);
        const double amb = 1.0 - binary_entropy(std::min(pe, 0.5));
        rows.push_back(ResultRow{to_string(method), m, amb, pe, "ok", 0});
      } else {
        const double xi = xi_relative(m, 16, config.eps_pe);
        for (int trial = 0; trial < config.trials_per_point; ++trial) {
          const std::uint64_t seed = detail::derive_seed(config.seed, pi, static_cast<std::uint64_t>(trial));
          const EmpiricalDistribution lm = sample_statistics(lambda_inf, m, seed);
          const OptimizationResult res = min_ambiguity_accurate(lm, xi);
          const double amb =
              res.status == OptimizerStatus::infeasible ? 0.0 : res.value;
          rows.push_back(ResultRow{to_string(method), m, amb, std::nullopt,
                                   to_string(res.status), trial});
        }
      }
    }
  }
  return rows;
}

inline void write_csv(std::ostream& out,
                      const std::vector<ResultRow>& rows) {
  out << "method,m,ambiguity,phase_error_estimate,status,trial\n";
  for (const auto& r : rows) {
    out << r.method << ',' << r.m << ',' << detail::format_double(r.ambiguity)
        << ',';
    if (r.phase_error) out << detail::format_double(*r.phase_error);
    out << ',' << r.status << ',' << r.trial << '\n';
  }
}

inline void write_json(std::ostream& out,
                       const std::vector<ResultRow>& rows) {
  out << "[\n";
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    out << "  {\"method\":\"" << r.method << "\",\"m\":" << r.m
        << ",\"ambiguity\":" << detail::format_double(r.ambiguity)
        << ",\"phase_error_estimate\":";
    if (r.phase_error)
      out << detail::format_double(*r.phase_error);
    else
      out << "null";
    out << ",\"status\":\"" << r.status << "\",\"trial\":" << r.trial << '}'
        << (i + 1 < rows.size() ? "," : "") << '\n';
  }
  out << "]\n";
}

/// Plain-text key=value sweep configuration with '#' comments.
///
/// Keys: channel (depolarizing:Q | amplitude-damping:Q | choi:PATH),
/// sample_sizes (comma separated), eps_pe, methods (comma separated),
/// seed, trials_per_point, accounting (quarter | full).
inline SweepConfig parse_sweep_config(std::istream& in) {
  SweepConfig cfg;
  cfg.methods = {SweepMethod::variational, SweepMethod::relative_entropy,
                 SweepMethod::chernoff, SweepMethod::factorial_moment,
                 SweepMethod::klar};
  bool have_channel = false, have_sizes = false;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    auto trim = [](std::string s) {
      const auto b = s.find_first_not_of(" \t\r");
      const auto e = s.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string{} : s.substr(b, e - b + 1);
    };
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("config line " + std::to_string(lineno) +
                                  ": expected key=value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    auto split = [&](const std::string& s) {
      std::vector<std::string> parts;
      std::istringstream ss(s);
      std::string part;
      while (std::getline(ss, part, ',')) parts.push_back(trim(part));
      return parts;
    };
    if (key == "channel") {
      const auto colon = value.find(':');
      if (colon == std::string::npos)
        throw std::invalid_argument("config: channel needs kind:parameter");
      const std::string kind = value.substr(0, colon);
      const std::string arg = value.substr(colon + 1);
      if (kind == "depolarizing")
        cfg.channel = ChannelSpec::depolarizing(std::stod(arg));
      else if (kind == "amplitude-damping")
        cfg.channel = ChannelSpec::amplitude_damping(std::stod(arg));
      else if (kind == "choi") {
        std::ifstream f(arg);
        if (!f) throw std::invalid_argument("config: choi file not found: " + arg);
        cfg.channel = ChannelSpec::explicit_channel(choi_from_text(f));
      } else
        throw std::invalid_argument("config: unknown channel kind: " + kind);
      have_channel = true;
    } else if (key == "sample_sizes") {
      cfg.sample_sizes.clear();
      for (const auto& p : split(value))
        cfg.sample_sizes.push_back(
            static_cast<std::uint64_t>(std::stod(p)));
      have_sizes = true;
    } else if (key == "eps_pe") {
      cfg.eps_pe = std::stod(value);
    } else if (key == "methods") {
      cfg.methods.clear();
      for (const auto& p : split(value)) {
        const auto m = sweep_method_from(p);
        if (!m) throw std::invalid_argument("config: unknown method: " + p);
        cfg.methods.push_back(*m);
      }
    } else if (key == "seed") {
      cfg.seed = static_cast<std::uint64_t>(std::stoull(value));
    } else if (key == "trials_per_point") {
      cfg.trials_per_point = std::stoi(value);
    } else if (key == "accounting") {
      if (value == "quarter") cfg.accounting = SampleAccounting::quarter;
      else if (value == "full") cfg.accounting = SampleAccounting::full;
      else throw std::invalid_argument("config: accounting must be quarter or full");
    } else {
      throw std::invalid_argument("config: unknown key: " + key);
    }
  }
  if (!have_channel) throw std::invalid_argument("config: missing channel");
  if (!have_sizes) throw std::invalid_argument("config: missing sample_sizes");
  cfg.validate();
  return cfg;
}

}  // namespace finitekey
