#include "cvcon/config.hpp"

#include <algorithm>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include <fmt/format.h>
#include <json.hpp>
#include <toml.hpp>

#include "cvcon/errors.hpp"

namespace cvcon {

using nlohmann::json;

ConfigError::ConfigError(const std::string& file, std::size_t line, const std::string& message)
    : std::runtime_error(line > 0 ? fmt::format("{}:{}: {}", file, line, message) : fmt::format("{}: {}", file, message)),
      line_(line) {}

const std::vector<ConfigKey>& config_keys() {
  static const std::vector<ConfigKey> keys{
      {"learner", "\"sample_mean\"", "sample_mean | ridge | knn | constant"},
      {"constant_value", "0.5", "constant learner output (label for classification)"},
      {"ridge_lambda", "1.0", "ridge penalty, > 0"},
      {"knn_neighbors", "3", "odd neighbour count"},
      {"distribution", "\"bernoulli\"", "bernoulli | point_mass | uniform | linear_regression | two_class"},
      {"p", "0.5", "Bernoulli parameter"},
      {"value", "0.5", "point-mass location"},
      {"low", "0.0", "uniform lower end"},
      {"high", "1.0", "uniform upper end"},
      {"dim", "2", "feature dimension"},
      {"noise", "0.1", "regression noise half-width"},
      {"separation", "0.5", "class mean shift"},
      {"flip", "0.1", "label flip probability"},
      {"n", "60", "sample size"},
      {"k", "[2, 5, 10]", "fold counts; each must divide n"},
      {"delta", "[0.05]", "confidence levels in (0, 1)"},
      {"q_grid", "[1, 2, 3, 4, 6, 8]", "envelope orders q; profiles carry orders 2 and 4q"},
      {"trials", "100000", "stability Monte Carlo trials"},
      {"bootstrap", "200", "bootstrap resamples for stability standard errors"},
      {"replications", "2000", "coverage and decomposition replications, >= 100"},
      {"es_trials", "10000", "Efron-Stein chain and moment trials"},
      {"inner", "200", "inner redraws per coordinate for E_{-i} Z"},
      {"cgf_trials", "10000", "CGF diagnostic trials, >= 10000"},
      {"seed", "1", "master seed"},
      {"oracle_size", "100000", "holdout size for Monte Carlo true risk"},
      {"envelope_mode", "\"joint\"", "sqrt_only | linear_only | joint"},
      {"a_min", "0.001", "lower end of the a search"},
      {"a_max", "1000000.0", "upper end of the a search"},
      {"scaling_grid", "[[20, 2], [40, 4], [80, 8]]", "(n, m) points for the scaling sweep"},
      {"lambda_grid", "[0.1, 0.25, 0.5, 0.75, 1.0]", "CGF diagnostic lambdas in (0, 1]"},
      {"theta", "0.5", "CGF diagnostic theta; lambda * theta < 1"},
      {"construction", "\"term2\"", "term1 | term2 | mean"},
      {"profiles", "\"\"", "stability bundle JSON for compute-bound"},
      {"output", "\"out\"", "output directory"},
      {"workers", "1", "worker threads"},
      {"format", "\"both\"", "csv | json | both"},
  };
  return keys;
}

namespace {

struct Entry {
  json value;
  std::size_t line = 0;
};

using Entries = std::map<std::string, Entry>;

json toml_to_json(const toml::node& node, const std::string& source, const std::string& key) {
  const auto line = static_cast<std::size_t>(node.source().begin.line);
  if (auto v = node.as_integer()) return v->get();
  if (auto v = node.as_floating_point()) return v->get();
  if (auto v = node.as_boolean()) return v->get();
  if (auto v = node.as_string()) return v->get();
  if (auto arr = node.as_array()) {
    json out = json::array();
    for (const auto& item : *arr) out.push_back(toml_to_json(item, source, key));
    return out;
  }
  throw ConfigError(source, line, fmt::format("key '{}': nested tables and dates are not supported", key));
}

Entries entries_from_toml(const std::string& text, const std::string& source) {
  toml::table table;
  try {
    table = toml::parse(text, source);
  } catch (const toml::parse_error& e) {
    throw ConfigError(source, static_cast<std::size_t>(e.source().begin.line), std::string(e.description()));
  }
  Entries out;
  for (const auto& [key, node] : table) {
    const std::string name(key.str());
    out[name] = {toml_to_json(node, source, name), static_cast<std::size_t>(key.source().begin.line)};
  }
  return out;
}

std::size_t json_key_line(const std::string& text, const std::string& key) {
  const auto pos = text.find(fmt::format("\"{}\"", key));
  if (pos == std::string::npos) return 0;
  return 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(pos), '\n'));
}

Entries entries_from_json(const std::string& text, const std::string& source) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    const auto upto = std::min(e.byte, text.size());
    const auto line = 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(upto), '\n'));
    throw ConfigError(source, line, "invalid JSON");
  }
  if (!doc.is_object()) throw ConfigError(source, 1, "config must be a JSON object");
  Entries out;
  for (const auto& [key, value] : doc.items()) out[key] = {value, json_key_line(text, key)};
  return out;
}

struct Reader {
  const std::string& source;
  const std::string& key;
  const Entry& entry;

  [[noreturn]] void fail(const std::string& what) const {
    throw ConfigError(source, entry.line, fmt::format("key '{}': {}", key, what));
  }

  std::uint64_t as_uint(const json& v) const {
    if (v.is_number_unsigned()) return v.get<std::uint64_t>();
    if (v.is_number_integer()) {
      const auto x = v.get<std::int64_t>();
      if (x < 0) fail("expected a non-negative integer");
      return static_cast<std::uint64_t>(x);
    }
    fail("expected a non-negative integer");
  }

  double as_double(const json& v) const {
    if (!v.is_number()) fail("expected a number");
    return v.get<double>();
  }

  std::string as_string() const {
    if (!entry.value.is_string()) fail("expected a string");
    return entry.value.get<std::string>();
  }

  const json& as_array() const {
    if (!entry.value.is_array()) fail("expected an array");
    return entry.value;
  }
};

using Setter = std::function<void(ExperimentSpec&, const Reader&)>;

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table{
      {"learner", [](ExperimentSpec& s, const Reader& r) { s.learner = r.as_string(); }},
      {"constant_value", [](ExperimentSpec& s, const Reader& r) { s.constant_value = r.as_double(r.entry.value); }},
      {"ridge_lambda", [](ExperimentSpec& s, const Reader& r) { s.ridge_lambda = r.as_double(r.entry.value); }},
      {"knn_neighbors",
       [](ExperimentSpec& s, const Reader& r) { s.knn_neighbors = static_cast<int>(r.as_uint(r.entry.value)); }},
      {"distribution", [](ExperimentSpec& s, const Reader& r) { s.distribution = r.as_string(); }},
      {"p", [](ExperimentSpec& s, const Reader& r) { s.p = r.as_double(r.entry.value); }},
      {"value", [](ExperimentSpec& s, const Reader& r) { s.value = r.as_double(r.entry.value); }},
      {"low", [](ExperimentSpec& s, const Reader& r) { s.low = r.as_double(r.entry.value); }},
      {"high", [](ExperimentSpec& s, const Reader& r) { s.high = r.as_double(r.entry.value); }},
      {"dim", [](ExperimentSpec& s, const Reader& r) { s.dim = r.as_uint(r.entry.value); }},
      {"noise", [](ExperimentSpec& s, const Reader& r) { s.noise = r.as_double(r.entry.value); }},
      {"separation", [](ExperimentSpec& s, const Reader& r) { s.separation = r.as_double(r.entry.value); }},
      {"flip", [](ExperimentSpec& s, const Reader& r) { s.flip = r.as_double(r.entry.value); }},
      {"n", [](ExperimentSpec& s, const Reader& r) { s.n = r.as_uint(r.entry.value); }},
      {"k",
       [](ExperimentSpec& s, const Reader& r) {
         s.k.clear();
         if (r.entry.value.is_array()) {
           for (const auto& v : r.entry.value) s.k.push_back(r.as_uint(v));
         } else {
           s.k.push_back(r.as_uint(r.entry.value));
         }
       }},
      {"delta",
       [](ExperimentSpec& s, const Reader& r) {
         s.delta.clear();
         if (r.entry.value.is_array()) {
           for (const auto& v : r.entry.value) s.delta.push_back(r.as_double(v));
         } else {
           s.delta.push_back(r.as_double(r.entry.value));
         }
       }},
      {"q_grid",
       [](ExperimentSpec& s, const Reader& r) {
         s.q_grid.clear();
         for (const auto& v : r.as_array()) s.q_grid.push_back(static_cast<int>(r.as_uint(v)));
       }},
      {"trials", [](ExperimentSpec& s, const Reader& r) { s.trials = r.as_uint(r.entry.value); }},
      {"bootstrap", [](ExperimentSpec& s, const Reader& r) { s.bootstrap = r.as_uint(r.entry.value); }},
      {"replications", [](ExperimentSpec& s, const Reader& r) { s.replications = r.as_uint(r.entry.value); }},
      {"es_trials", [](ExperimentSpec& s, const Reader& r) { s.es_trials = r.as_uint(r.entry.value); }},
      {"inner", [](ExperimentSpec& s, const Reader& r) { s.inner = r.as_uint(r.entry.value); }},
      {"cgf_trials", [](ExperimentSpec& s, const Reader& r) { s.cgf_trials = r.as_uint(r.entry.value); }},
      {"seed", [](ExperimentSpec& s, const Reader& r) { s.seed = r.as_uint(r.entry.value); }},
      {"oracle_size", [](ExperimentSpec& s, const Reader& r) { s.oracle_size = r.as_uint(r.entry.value); }},
      {"envelope_mode",
       [](ExperimentSpec& s, const Reader& r) {
         try {
           s.envelope_mode = parse_envelope_mode(r.as_string());
         } catch (const ArgumentError& e) {
           r.fail(e.what());
         }
       }},
      {"a_min", [](ExperimentSpec& s, const Reader& r) { s.a_min = r.as_double(r.entry.value); }},
      {"a_max", [](ExperimentSpec& s, const Reader& r) { s.a_max = r.as_double(r.entry.value); }},
      {"scaling_grid",
       [](ExperimentSpec& s, const Reader& r) {
         s.scaling_grid.clear();
         for (const auto& pair : r.as_array()) {
           if (!pair.is_array() || pair.size() != 2) r.fail("expected a list of [n, m] pairs");
           s.scaling_grid.emplace_back(r.as_uint(pair[0]), r.as_uint(pair[1]));
         }
       }},
      {"lambda_grid",
       [](ExperimentSpec& s, const Reader& r) {
         s.lambda_grid.clear();
         for (const auto& v : r.as_array()) s.lambda_grid.push_back(r.as_double(v));
       }},
      {"theta", [](ExperimentSpec& s, const Reader& r) { s.theta = r.as_double(r.entry.value); }},
      {"construction", [](ExperimentSpec& s, const Reader& r) { s.construction = r.as_string(); }},
      {"profiles", [](ExperimentSpec& s, const Reader& r) { s.profiles = r.as_string(); }},
      {"output", [](ExperimentSpec& s, const Reader& r) { s.output = r.as_string(); }},
      {"workers",
       [](ExperimentSpec& s, const Reader& r) { s.workers = static_cast<unsigned>(r.as_uint(r.entry.value)); }},
      {"format",
       [](ExperimentSpec& s, const Reader& r) {
         s.format = r.as_string();
         if (s.format != "csv" && s.format != "json" && s.format != "both") r.fail("expected csv, json or both");
       }},
  };
  return table;
}

ExperimentSpec spec_from_entries(const Entries& entries, const std::string& source) {
  const auto& table = setters();
  for (const auto& [key, entry] : entries) {
    if (!table.count(key)) throw ConfigError(source, entry.line, fmt::format("unknown key '{}'", key));
  }
  ExperimentSpec spec;
  for (const auto& [key, entry] : entries) table.at(key)(spec, Reader{source, key, entry});
  return spec;
}

}  // namespace

ExperimentSpec parse_spec_toml(const std::string& text, const std::string& source) {
  return spec_from_entries(entries_from_toml(text, source), source);
}

ExperimentSpec parse_spec_json(const std::string& text, const std::string& source) {
  return spec_from_entries(entries_from_json(text, source), source);
}

ExperimentSpec load_spec(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(path, 0, "cannot open config file");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  const bool is_json = path.size() >= 5 && path.compare(path.size() - 5, 5, ".json") == 0;
  return is_json ? parse_spec_json(buffer.str(), path) : parse_spec_toml(buffer.str(), path);
}

}  // namespace cvcon
