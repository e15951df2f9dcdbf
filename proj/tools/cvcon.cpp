// cvcon: command-line front end for stability estimation, bound assembly and
// the Monte Carlo experiments.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "cvcon/config.hpp"
#include "cvcon/errors.hpp"
#include "cvcon/harness.hpp"
#include "cvcon/serialize.hpp"

namespace {

using namespace cvcon;

constexpr int kExitPass = 0;
constexpr int kExitFail = 1;
constexpr int kExitUsage = 2;

struct Flags {
  std::string config;
  std::optional<std::string> out;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> workers;
  std::optional<std::string> format;
};

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string help_footer() {
  std::string text = "\nConfig keys (TOML, or JSON when the file ends in .json):\n";
  for (const auto& key : config_keys()) {
    text += fmt::format("  {:<16} default {:<30} {}\n", key.name, key.default_value, key.help);
  }
  text +=
      "\nEnvironment: CVCON_SEED and CVCON_WORKERS override the config; flags override both.\n"
      "Exit codes: 0 all checks pass, 1 a check failed or a runtime error, 2 bad arguments or config.\n";
  return text;
}

std::uint64_t parse_u64(const std::string& text, const std::string& what) {
  try {
    std::size_t used = 0;
    if (text.empty() || text[0] == '-') throw std::invalid_argument(text);
    const auto value = std::stoull(text, &used, 10);
    if (used != text.size()) throw std::invalid_argument(text);
    return value;
  } catch (const std::exception&) {
    throw UsageError(fmt::format("{}: '{}' is not a non-negative integer", what, text));
  }
}

ExperimentSpec resolve_spec(const Flags& flags) {
  ExperimentSpec spec = load_spec(flags.config);
  if (const char* env = std::getenv("CVCON_SEED")) spec.seed = parse_u64(env, "CVCON_SEED");
  if (const char* env = std::getenv("CVCON_WORKERS")) {
    spec.workers = static_cast<unsigned>(parse_u64(env, "CVCON_WORKERS"));
  }
  if (flags.seed) spec.seed = *flags.seed;
  if (flags.workers) spec.workers = *flags.workers;
  if (flags.out) spec.output = *flags.out;
  if (flags.format) spec.format = *flags.format;
  if (spec.workers < 1) throw UsageError("workers must be at least 1");
  return spec;
}

void emit(const ExperimentSpec& spec, const std::string& stem, const Json& json, const std::string& csv) {
  const std::filesystem::path dir(spec.output);
  if (spec.format == "json" || spec.format == "both") write_text((dir / (stem + ".json")).string(), json.dump(2) + "\n");
  if (spec.format == "csv" || spec.format == "both") write_text((dir / (stem + ".csv")).string(), csv);
}

void phase(const std::string& text) { std::fprintf(stderr, "[phase] %s\n", text.c_str()); }

const char* verdict(bool pass) { return pass ? "PASS" : "FAIL"; }

int cmd_estimate_stability(const ExperimentSpec& spec) {
  validate_spec(spec, "compute-bound");
  phase("stability profiles");
  ProfileCache cache(spec, make_learner(spec), make_loss(spec), make_distribution(spec));
  for (std::size_t k : spec.k) {
    const std::size_t m = spec.n / k;
    cache.get(spec.n - m, m);
    cache.get(spec.n, m);
  }
  cache.get(spec.n, 1);
  const auto profiles = cache.all();
  for (const auto& p : profiles) {
    fmt::print("beta({}, {}): beta_2 = {} (stderr {}){}\n", p.n, p.m, format_double(p.at(2)),
               format_double(p.se_at(2)), p.note.empty() ? "" : " [" + p.note + "]");
  }
  emit(spec, "stability", profiles_bundle(profiles), stability_csv(profiles));
  return kExitPass;
}

int cmd_compute_bound(const ExperimentSpec& spec, const std::string& config_path) {
  validate_spec(spec, "compute-bound");
  if (spec.profiles.empty()) throw UsageError("compute-bound needs the 'profiles' config key");
  std::filesystem::path path(spec.profiles);
  if (path.is_relative() && !std::filesystem::exists(path)) {
    path = std::filesystem::path(config_path).parent_path() / path;
  }
  const auto profiles = read_profiles_bundle(path.string());
  auto find = [&](std::size_t n, std::size_t m) -> std::optional<StabilityProfile> {
    for (const auto& p : profiles) {
      if (p.n == n && p.m == m) return p;
    }
    return std::nullopt;
  };

  phase("bound assembly");
  std::vector<BoundResult> results;
  for (std::size_t k : spec.k) {
    const std::size_t m = spec.n / k;
    const auto prof_nm = find(spec.n - m, m);
    const auto prof_n1 = find(spec.n, 1);
    require(prof_nm.has_value(), fmt::format("profile bundle lacks beta({}, {})", spec.n - m, m));
    require(prof_n1.has_value(), fmt::format("profile bundle lacks beta({}, 1)", spec.n));
    for (double delta : spec.delta) {
      auto r = assemble_from_profiles(*prof_nm, *prof_n1, k, delta, spec.envelope_mode, find(spec.n, m), spec.a_min,
                                      spec.a_max);
      std::string caveats;
      for (const auto& c : r.caveats) caveats += " [" + c + "]";
      fmt::print("k={} delta={} bound={} a*={}{}\n", k, format_double(delta), format_double(r.total),
                 format_double(r.a_used), caveats);
      results.push_back(std::move(r));
    }
  }
  Json list = Json::array();
  for (const auto& r : results) list.push_back(to_json(r));
  Json doc;
  doc["bounds"] = list;
  emit(spec, "bounds", doc, bound_csv(results));
  return kExitPass;
}

int cmd_coverage(const ExperimentSpec& spec) {
  validate_spec(spec, "coverage");
  phase("stability profiles, bound assembly, replications");
  const auto report = run_coverage(spec);
  for (const auto& c : report.cells) {
    fmt::print("k={} delta={} bound={} exceed={}/{} wilson_hi={} mean_delta={} {}\n", c.k, format_double(c.delta),
               format_double(c.bound.total), c.exceed_count, c.replications, format_double(c.wilson.hi),
               format_double(c.mean_delta), verdict(c.pass));
  }
  emit(spec, "coverage", to_json(report), coverage_csv(report));
  return report.pass ? kExitPass : kExitFail;
}

int cmd_decompose(const ExperimentSpec& spec) {
  validate_spec(spec, "decompose");
  phase("stability profiles, replications, term checks");
  const auto report = run_decomposition(spec);
  for (const auto& c : report.cells) {
    for (const auto& t : c.terms) {
      fmt::print("k={} delta={} {} empirical={} bound={} {}\n", c.k, format_double(c.delta), t.name,
                 format_double(t.empirical), format_double(t.bound), verdict(t.pass));
    }
  }
  emit(spec, "decomposition", to_json(report), decomposition_csv(report));
  return report.pass ? kExitPass : kExitFail;
}

int cmd_efron_stein(const ExperimentSpec& spec) {
  validate_spec(spec, "efron-stein-check");
  phase("variance chain, moment inequality, CGF diagnostic");
  const auto report = run_efron_stein(spec);
  const auto& c = report.chain;
  fmt::print("chain var_z={} e_v={} e_v_del={} {}\n", format_double(c.var_z), format_double(c.e_v),
             format_double(c.e_v_del), verdict(c.pass));
  for (const auto& row : report.inequality) {
    fmt::print("moment q={} lhs={} rhs={} {}\n", row.q, format_double(row.lhs), format_double(row.rhs),
               verdict(row.holds));
  }
  if (report.cgf) {
    for (const auto& row : report.cgf->rows) {
      fmt::print("cgf lambda={} margin={} {} (diagnostic)\n", format_double(row.lambda), format_double(row.margin),
                 verdict(row.holds));
    }
  }
  emit(spec, "efron_stein", to_json(report), efron_stein_csv(report));
  return report.pass ? kExitPass : kExitFail;
}

int cmd_scaling(const ExperimentSpec& spec) {
  validate_spec(spec, "scaling");
  phase("scaling sweep");
  const auto report = run_scaling(spec);
  for (const auto& row : report.rows) {
    fmt::print("n={} m={} beta2={} ratio={} halving={}\n", row.n, row.m, format_double(row.beta2),
               format_double(row.ratio), format_double(row.halving));
  }
  fmt::print("spread={}{}\n", format_double(report.spread),
             report.degenerate ? " (degenerate)" : (report.flagged ? " (flagged: > 3)" : ""));
  if (report.rate) {
    fmt::print("rate C1={} C2={} worst_factor={}{}\n", format_double(report.rate->c1), format_double(report.rate->c2),
               format_double(report.rate->worst_factor), report.rate->within_factor4 ? "" : " (flagged: > 4)");
  }
  emit(spec, "scaling", to_json(report), scaling_csv(report));
  return kExitPass;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cross-validation concentration toolkit"};
  app.footer(help_footer());
  app.require_subcommand(1);

  Flags flags;
  const std::vector<std::pair<std::string, std::string>> commands{
      {"estimate-stability", "Estimate the stability profiles a bound needs"},
      {"compute-bound", "Assemble bounds from a stability profile bundle"},
      {"coverage", "Monte Carlo coverage of the high-probability bound"},
      {"decompose", "Compare each deviation term with its own bound"},
      {"efron-stein-check", "Variance chain, moment inequality and CGF diagnostic"},
      {"scaling", "Stability scaling sweep and rate check (diagnostic)"},
  };
  for (const auto& [name, description] : commands) {
    auto* sub = app.add_subcommand(name, description);
    sub->add_option("--config", flags.config, "Experiment config (TOML or JSON)")->required();
    sub->add_option("--out", flags.out, "Output directory");
    sub->add_option("--seed", flags.seed, "Master seed");
    sub->add_option("--workers", flags.workers, "Worker threads")->check(CLI::PositiveNumber);
    sub->add_option("--format", flags.format, "Output format")->check(CLI::IsMember({"csv", "json", "both"}));
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  const std::string command = app.get_subcommands().front()->get_name();
  ExperimentSpec spec;
  try {
    spec = resolve_spec(flags);
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kExitUsage;
  } catch (const UsageError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitUsage;
  }

  try {
    if (command == "estimate-stability") return cmd_estimate_stability(spec);
    if (command == "compute-bound") return cmd_compute_bound(spec, flags.config);
    if (command == "coverage") return cmd_coverage(spec);
    if (command == "decompose") return cmd_decompose(spec);
    if (command == "efron-stein-check") return cmd_efron_stein(spec);
    if (command == "scaling") return cmd_scaling(spec);
  } catch (const ArgumentError& e) {
    std::fprintf(stderr, "argument error: %s\n", e.what());
    return kExitUsage;
  } catch (const UsageError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitUsage;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "runtime error: %s\n", e.what());
    return kExitFail;
  }
  return kExitUsage;
}
