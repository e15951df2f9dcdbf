#include "cvcon/serialize.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "cvcon/errors.hpp"

namespace cvcon {

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  return fmt::format("{}", x);
}

namespace {

// Non-finite doubles become strings so the JSON stays valid.
Json num(double x) {
  if (std::isfinite(x)) return x;
  return format_double(x);
}

Json order_map(const std::map<int, double>& m) {
  Json out = Json::object();
  for (const auto& [q, v] : m) out[std::to_string(q)] = num(v);
  return out;
}

std::map<int, double> read_order_map(const Json& j) {
  std::map<int, double> out;
  for (const auto& [key, value] : j.items()) out[std::stoi(key)] = value.get<double>();
  return out;
}

Json string_list(const std::vector<std::string>& xs) {
  Json out = Json::array();
  for (const auto& x : xs) out.push_back(x);
  return out;
}

std::string join(const std::vector<std::string>& cells) {
  std::string out;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) out += ',';
    out += cells[i];
  }
  out += '\n';
  return out;
}

std::string csv_text(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

Json to_json(const StabilityProfile& p) {
  Json j;
  j["n"] = p.n;
  j["m"] = p.m;
  j["trials"] = p.trials;
  j["seed"] = p.seed;
  j["grid"] = p.grid;
  j["beta"] = order_map(p.beta);
  j["stderr"] = order_map(p.se);
  j["exact"] = p.exact;
  if (!p.note.empty()) j["note"] = p.note;
  return j;
}

StabilityProfile profile_from_json(const Json& j) {
  try {
    StabilityProfile p;
    p.n = j.at("n").get<std::size_t>();
    p.m = j.at("m").get<std::size_t>();
    p.trials = j.value("trials", std::size_t{0});
    p.seed = j.value("seed", std::uint64_t{0});
    p.beta = read_order_map(j.at("beta"));
    if (j.contains("stderr")) p.se = read_order_map(j.at("stderr"));
    if (j.contains("grid")) {
      p.grid = j.at("grid").get<QGrid>();
    } else {
      for (const auto& [q, v] : p.beta) p.grid.push_back(q);
    }
    p.exact = j.value("exact", false);
    p.note = j.value("note", std::string{});
    for (const auto& [q, v] : p.beta) {
      require(std::isfinite(v) && v >= 0.0, fmt::format("profile ({}, {}) has an invalid beta at order {}", p.n, p.m, q));
    }
    return p;
  } catch (const Json::exception& e) {
    throw ArgumentError(fmt::format("malformed stability profile: {}", e.what()));
  }
}

Json profiles_bundle(const std::vector<StabilityProfile>& profiles) {
  Json list = Json::array();
  for (const auto& p : profiles) list.push_back(to_json(p));
  Json j;
  j["profiles"] = list;
  return j;
}

std::vector<StabilityProfile> read_profiles_bundle(const std::string& path) {
  Json doc;
  try {
    doc = Json::parse(read_text(path));
  } catch (const Json::exception& e) {
    throw ArgumentError(fmt::format("{}: invalid JSON ({})", path, e.what()));
  }
  require(doc.is_object() && doc.contains("profiles") && doc["profiles"].is_array(),
          fmt::format("{}: expected {{\"profiles\": [...]}}", path));
  std::vector<StabilityProfile> out;
  for (const auto& item : doc["profiles"]) out.push_back(profile_from_json(item));
  return out;
}

Json to_json(const MomentEnvelope& e) {
  Json j;
  j["u"] = num(e.u);
  j["w"] = num(e.w);
  j["grid"] = e.grid;
  j["mode"] = to_string(e.mode);
  j["caveat"] = e.caveat;
  return j;
}

Json to_json(const SubGammaParams& p) {
  Json j;
  j["v"] = num(p.v);
  j["c"] = num(p.c);
  return j;
}

Json to_json(const BoundInputs& inp) {
  Json j;
  j["n"] = inp.n;
  j["m"] = inp.m;
  j["k"] = inp.k;
  j["delta"] = num(inp.delta);
  j["beta2_nm"] = num(inp.beta2_nm);
  j["r1"] = num(inp.r1);
  j["r2"] = num(inp.r2);
  j["env1"] = to_json(inp.env1);
  j["env2"] = to_json(inp.env2);
  j["a"] = inp.a ? Json(num(*inp.a)) : Json(nullptr);
  j["a_min"] = num(inp.a_min);
  j["a_max"] = num(inp.a_max);
  return j;
}

Json to_json(const BoundResult& r) {
  Json j;
  j["total"] = num(r.total);
  j["term1"] = num(r.term1);
  j["term2"] = num(r.term2);
  j["term3"] = num(r.term3);
  j["pi1"] = num(r.pi1);
  j["pi2"] = num(r.pi2);
  j["a_used"] = num(r.a_used);
  j["a_heur"] = num(r.a_heur);
  j["v1"] = num(r.v1);
  j["c1"] = num(r.c1);
  j["v2"] = num(r.v2);
  j["c2"] = num(r.c2);
  j["composition_total"] = num(r.composition_total);
  j["composition_gap"] = num(r.composition_gap);
  j["caveats"] = string_list(r.caveats);
  j["inputs"] = to_json(r.inputs);
  return j;
}

Json to_json(const CoverageReport& r) {
  Json cells = Json::array();
  for (const auto& c : r.cells) {
    Json j;
    j["k"] = c.k;
    j["m"] = c.m;
    j["delta"] = num(c.delta);
    j["bound"] = to_json(c.bound);
    j["exceed_count"] = c.exceed_count;
    j["flagged"] = c.flagged;
    j["R"] = c.replications;
    j["exceed_rate"] = num(c.exceed_rate);
    j["wilson_lo"] = num(c.wilson.lo);
    j["wilson_hi"] = num(c.wilson.hi);
    j["mean_delta"] = num(c.mean_delta);
    j["median_delta"] = num(c.median_delta);
    j["q95_delta"] = num(c.q95_delta);
    j["mean_term1"] = num(c.mean_term1);
    j["mean_term2"] = num(c.mean_term2);
    j["term3"] = num(c.term3);
    j["cv_mean"] = num(c.cv_mean);
    j["cv_mean_stderr"] = num(c.cv_mean_se);
    j["reduced_risk_mean"] = num(c.reduced_risk_mean);
    j["reduced_risk_stderr"] = num(c.reduced_risk_se);
    j["cv_sanity"] = c.cv_sanity;
    j["pass"] = c.pass;
    cells.push_back(j);
  }
  Json j;
  j["learner"] = r.learner;
  j["dist"] = r.distribution;
  j["n"] = r.n;
  j["cells"] = cells;
  j["profiles"] = profiles_bundle(r.profiles)["profiles"];
  j["pass"] = r.pass;
  j["failure"] = r.failure;
  return j;
}

Json to_json(const DecompositionReport& r) {
  Json cells = Json::array();
  for (const auto& c : r.cells) {
    Json terms = Json::array();
    for (const auto& t : c.terms) {
      Json tj;
      tj["name"] = t.name;
      tj["empirical"] = num(t.empirical);
      tj["stderr"] = num(t.se);
      tj["bound"] = num(t.bound);
      tj["a"] = num(t.a);
      tj["exact"] = t.exact;
      tj["pass"] = t.pass;
      terms.push_back(tj);
    }
    Json j;
    j["k"] = c.k;
    j["m"] = c.m;
    j["delta"] = num(c.delta);
    j["mean_cv"] = num(c.mean_cv);
    j["mean_risk"] = num(c.mean_risk);
    j["means_exact"] = c.means_exact;
    j["terms"] = terms;
    j["pass"] = c.pass;
    cells.push_back(j);
  }
  Json j;
  j["learner"] = r.learner;
  j["dist"] = r.distribution;
  j["n"] = r.n;
  j["cells"] = cells;
  j["profiles"] = profiles_bundle(r.profiles)["profiles"];
  j["pass"] = r.pass;
  return j;
}

Json to_json(const ScalingReport& r) {
  Json rows = Json::array();
  for (const auto& row : r.rows) {
    Json j;
    j["n"] = row.n;
    j["m"] = row.m;
    j["beta2"] = num(row.beta2);
    j["beta2_stderr"] = num(row.beta2_se);
    j["ratio"] = num(row.ratio);
    j["doubled_beta2"] = num(row.doubled_beta2);
    j["halving"] = num(row.halving);
    rows.push_back(j);
  }
  Json j;
  j["learner"] = r.learner;
  j["dist"] = r.distribution;
  j["rows"] = rows;
  j["spread"] = num(r.spread);
  j["degenerate"] = r.degenerate;
  j["flagged"] = r.flagged;
  if (r.rate) {
    Json rate_rows = Json::array();
    for (const auto& row : r.rate->rows) {
      Json rj;
      rj["n"] = row.n;
      rj["k"] = row.k;
      rj["delta"] = num(row.delta);
      rj["total"] = num(row.total);
      rj["fitted"] = num(row.fitted);
      rj["ratio"] = num(row.ratio);
      rate_rows.push_back(rj);
    }
    Json rate;
    rate["c1"] = num(r.rate->c1);
    rate["c2"] = num(r.rate->c2);
    rate["rows"] = rate_rows;
    rate["worst_factor"] = num(r.rate->worst_factor);
    rate["within_factor4"] = r.rate->within_factor4;
    j["rate"] = rate;
  }
  return j;
}

Json to_json(const EfronSteinReport& r) {
  Json chain;
  chain["var_z"] = num(r.chain.var_z);
  chain["var_z_stderr"] = num(r.chain.var_z_se);
  chain["e_v"] = num(r.chain.e_v);
  chain["e_v_stderr"] = num(r.chain.e_v_se);
  chain["e_v_del"] = num(r.chain.e_v_del);
  chain["e_v_del_stderr"] = num(r.chain.e_v_del_se);
  chain["trials"] = r.chain.trials;
  chain["inner"] = r.chain.inner;
  chain["pass"] = r.chain.pass;

  Json rows = Json::array();
  for (const auto& row : r.inequality) {
    Json j;
    j["q"] = row.q;
    j["lhs"] = num(row.lhs);
    j["lhs_stderr"] = num(row.lhs_se);
    j["rhs"] = num(row.rhs);
    j["rhs_stderr"] = num(row.rhs_se);
    j["holds"] = row.holds;
    rows.push_back(j);
  }

  Json j;
  j["construction"] = r.construction;
  j["n"] = r.n;
  j["k"] = r.k;
  j["chain"] = chain;
  if (!r.inequality.empty()) {
    Json moments;
    moments["grid"] = r.moments.grid;
    moments["norms"] = order_map(r.moments.norms);
    moments["stderr"] = order_map(r.moments.se);
    moments["mean_vdel"] = num(r.moments.mean_vdel);
    moments["mean_vdel_stderr"] = num(r.moments.mean_vdel_se);
    moments["exact"] = r.moments.exact;
    j["moments"] = moments;
    j["profile"] = to_json(r.profile);
    j["multiplier"] = num(r.multiplier);
    j["inequality"] = rows;
  }
  if (r.cgf) {
    Json cgf_rows = Json::array();
    for (const auto& row : r.cgf->rows) {
      Json cj;
      cj["lambda"] = num(row.lambda);
      cj["lhs"] = num(row.lhs);
      cj["lhs_stderr"] = num(row.lhs_se);
      cj["rhs"] = num(row.rhs);
      cj["rhs_stderr"] = num(row.rhs_se);
      cj["margin"] = num(row.margin);
      cj["margin_ci"] = {num(row.margin_ci.lo), num(row.margin_ci.hi)};
      cj["holds"] = row.holds;
      cgf_rows.push_back(cj);
    }
    Json cgf;
    cgf["theta"] = num(r.cgf->theta);
    cgf["trials"] = r.cgf->trials;
    cgf["diagnostic"] = r.cgf->diagnostic;
    cgf["rows"] = cgf_rows;
    j["cgf"] = cgf;
  }
  j["pass"] = r.pass;
  return j;
}

std::string stability_csv(const std::vector<StabilityProfile>& profiles) {
  std::string out = join({"n", "m", "q", "beta", "stderr", "trials", "exact"});
  for (const auto& p : profiles) {
    for (const auto& [q, beta] : p.beta) {
      out += join({std::to_string(p.n), std::to_string(p.m), std::to_string(q), format_double(beta),
                   format_double(p.se_at(q)), std::to_string(p.trials), p.exact ? "true" : "false"});
    }
  }
  return out;
}

std::string bound_csv(const std::vector<BoundResult>& results) {
  std::string out = join({"n", "m", "k", "delta", "a_star", "a_heur", "bound", "term1", "term2", "term3", "pi1",
                          "pi2", "v1", "c1", "v2", "c2", "composition_total", "caveats"});
  for (const auto& r : results) {
    std::string caveats;
    for (std::size_t i = 0; i < r.caveats.size(); ++i) caveats += (i ? "; " : "") + r.caveats[i];
    out += join({std::to_string(r.inputs.n), std::to_string(r.inputs.m), std::to_string(r.inputs.k),
                 format_double(r.inputs.delta), format_double(r.a_used), format_double(r.a_heur),
                 format_double(r.total), format_double(r.term1), format_double(r.term2), format_double(r.term3),
                 format_double(r.pi1), format_double(r.pi2), format_double(r.v1), format_double(r.c1),
                 format_double(r.v2), format_double(r.c2), format_double(r.composition_total), csv_text(caveats)});
  }
  return out;
}

std::string coverage_csv(const CoverageReport& r) {
  std::string out = join({"learner", "dist", "n", "m", "k", "delta", "a_star", "bound", "term1", "term2", "term3",
                          "pi1", "pi2", "exceed_count", "R", "exceed_rate", "wilson_hi", "mean_delta", "q95_delta"});
  for (const auto& c : r.cells) {
    out += join({csv_text(r.learner), csv_text(r.distribution), std::to_string(r.n), std::to_string(c.m),
                 std::to_string(c.k), format_double(c.delta), format_double(c.bound.a_used),
                 format_double(c.bound.total), format_double(c.bound.term1), format_double(c.bound.term2),
                 format_double(c.bound.term3), format_double(c.bound.pi1), format_double(c.bound.pi2),
                 std::to_string(c.exceed_count), std::to_string(c.replications), format_double(c.exceed_rate),
                 format_double(c.wilson.hi), format_double(c.mean_delta), format_double(c.q95_delta)});
  }
  return out;
}

std::string decomposition_csv(const DecompositionReport& r) {
  std::string out = join({"learner", "dist", "n", "m", "k", "delta", "term", "empirical", "stderr", "bound", "a",
                          "exact", "pass"});
  for (const auto& c : r.cells) {
    for (const auto& t : c.terms) {
      out += join({csv_text(r.learner), csv_text(r.distribution), std::to_string(r.n), std::to_string(c.m),
                   std::to_string(c.k), format_double(c.delta), t.name, format_double(t.empirical),
                   format_double(t.se), format_double(t.bound), format_double(t.a), t.exact ? "true" : "false",
                   t.pass ? "true" : "false"});
    }
  }
  return out;
}

std::string scaling_csv(const ScalingReport& r) {
  std::string out = join({"learner", "dist", "n", "m", "beta2", "stderr", "ratio", "doubled_beta2", "halving"});
  for (const auto& row : r.rows) {
    out += join({csv_text(r.learner), csv_text(r.distribution), std::to_string(row.n), std::to_string(row.m),
                 format_double(row.beta2), format_double(row.beta2_se), format_double(row.ratio),
                 format_double(row.doubled_beta2), format_double(row.halving)});
  }
  return out;
}

std::string efron_stein_csv(const EfronSteinReport& r) {
  std::string out = join({"construction", "n", "check", "q", "lhs", "lhs_stderr", "rhs", "rhs_stderr", "holds"});
  const auto& c = r.chain;
  out += join({r.construction, std::to_string(r.n), "var_z<=e_v", "", format_double(c.var_z),
               format_double(c.var_z_se), format_double(c.e_v), format_double(c.e_v_se),
               c.var_z <= c.e_v + 4.0 * std::hypot(c.var_z_se, c.e_v_se) ? "true" : "false"});
  out += join({r.construction, std::to_string(r.n), "e_v<=e_v_del", "", format_double(c.e_v), format_double(c.e_v_se),
               format_double(c.e_v_del), format_double(c.e_v_del_se),
               c.e_v <= c.e_v_del + 4.0 * std::hypot(c.e_v_se, c.e_v_del_se) ? "true" : "false"});
  for (const auto& row : r.inequality) {
    out += join({r.construction, std::to_string(r.n), "moment", std::to_string(row.q), format_double(row.lhs),
                 format_double(row.lhs_se), format_double(row.rhs), format_double(row.rhs_se),
                 row.holds ? "true" : "false"});
  }
  if (r.cgf) {
    for (const auto& row : r.cgf->rows) {
      out += join({r.construction, std::to_string(r.n), "cgf", format_double(row.lambda), format_double(row.lhs),
                   format_double(row.lhs_se), format_double(row.rhs), format_double(row.rhs_se),
                   row.holds ? "true" : "false"});
    }
  }
  return out;
}

void write_text(const std::string& path, const std::string& text) {
  const std::filesystem::path p(path);
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error(fmt::format("cannot write {}", path));
  out << text;
}

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  require(static_cast<bool>(in), fmt::format("cannot open {}", path));
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

}  // namespace cvcon
