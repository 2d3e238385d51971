#ifndef WBGA_HARNESS_HPP
#define WBGA_HARNESS_HPP

#include <algorithm>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <iomanip>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "algorithms.hpp"
#include "diagnostics.hpp"
#include "dictionary.hpp"
#include "report_io.hpp"
#include "schedule.hpp"
#include "space.hpp"

namespace wbga {

/// Flat experiment description. A sweep is the cross product
/// spaces x algorithms x weakness x seeds; a seed replaces the seed of the
/// dictionary, of the target and of the perturbations.
struct ExperimentConfig {
  std::vector<std::string> spaces{"lp:p=2,n=64"};
  std::string dictionary = "dict:random_gauss,N=256,seed=0";
  std::string target = "target:a1,k=16,seed=0";
  std::vector<std::string> algorithms{"wcga"};
  std::vector<std::string> weakness{"const:1"};
  std::string selection = "exact_argmax";
  std::optional<std::string> errors;
  SolverConfig solver;
  int max_m = 100;
  double stop_tol = 1e-12;
  std::vector<std::uint64_t> seeds;  // empty: seeds of the specs are used as given
  std::vector<std::string> bounds;
  std::string output = "wbga_out";
  bool timings = false;

  /// Throws StructuralError naming the offending field.
  void validate() const {
    auto field = [](const std::string& name, auto&& fn) {
      try {
        fn();
      } catch (const StructuralError& e) {
        throw StructuralError("config field '" + name + "': " + e.what());
      }
    };
    if (spaces.empty() || algorithms.empty() || weakness.empty())
      throw StructuralError("config: spaces, algorithms and weakness must be nonempty");
    field("space", [&] {
      for (const auto& s : spaces) parse_space_spec(s);
    });
    field("dictionary", [&] {
      const auto d = parse_spec_string(dictionary, "dict", true);
      if (d.head.empty()) throw StructuralError("dictionary kind missing");
    });
    field("target", [&] { parse_target_spec(target); });
    field("algorithm", [&] {
      for (const auto& a : algorithms) parse_algorithm(a);
    });
    field("weakness", [&] {
      for (const auto& w : weakness) parse_weakness_spec(w);
    });
    field("selection", [&] { parse_selection_rule(selection); });
    field("errors", [&] {
      if (errors) parse_error_spec(*errors);
    });
    field("solver", [&] { solver.validate(); });
    field("bounds", [&] {
      for (const auto& b : bounds) parse_bound_id(b);
    });
    if (max_m < 0) throw StructuralError("config field 'max_m': must be nonnegative");
    if (!(stop_tol >= 0.0)) throw StructuralError("config field 'stop_tol': must be nonnegative");
  }
};

inline json to_json(const ExperimentConfig& c) {
  json j = {{"schema", 1},
            {"spaces", c.spaces},
            {"dictionary", c.dictionary},
            {"target", c.target},
            {"algorithms", c.algorithms},
            {"weakness", c.weakness},
            {"selection", c.selection},
            {"solver", to_json(c.solver)},
            {"max_m", c.max_m},
            {"stop_tol", c.stop_tol},
            {"seeds", c.seeds},
            {"bounds", c.bounds},
            {"output", c.output},
            {"timings", c.timings}};
  j["errors"] = c.errors ? json(*c.errors) : json(nullptr);
  return j;
}

inline ExperimentConfig config_from_json(const json& j) {
  static const std::vector<std::string> known = {
      "schema", "spaces", "space", "dictionary", "target", "algorithms", "algorithm",
      "weakness", "selection", "errors", "solver", "max_m", "stop_tol", "seeds",
      "bounds", "output", "timings"};
  if (!j.is_object()) throw StructuralError("config must be a JSON object");
  for (const auto& [key, _] : j.items())
    if (std::find(known.begin(), known.end(), key) == known.end())
      throw StructuralError("config: unknown field '" + key + "'");
  ExperimentConfig c;
  auto strings = [&](const char* many, const char* one, std::vector<std::string>& dst) {
    if (j.contains(many)) {
      dst = j.at(many).is_array() ? j.at(many).get<std::vector<std::string>>()
                                  : std::vector<std::string>{j.at(many).get<std::string>()};
    } else if (j.contains(one)) {
      dst = {j.at(one).get<std::string>()};
    }
  };
  try {
    strings("spaces", "space", c.spaces);
    strings("algorithms", "algorithm", c.algorithms);
    if (j.contains("weakness")) {
      const auto& w = j.at("weakness");
      c.weakness = w.is_array() ? w.get<std::vector<std::string>>()
                                : std::vector<std::string>{w.get<std::string>()};
    }
    c.dictionary = j.value("dictionary", c.dictionary);
    c.target = j.value("target", c.target);
    c.selection = j.value("selection", c.selection);
    if (j.contains("errors") && !j.at("errors").is_null())
      c.errors = j.at("errors").get<std::string>();
    if (j.contains("solver")) c.solver = solver_from_json(j.at("solver"));
    c.max_m = j.value("max_m", c.max_m);
    c.stop_tol = j.value("stop_tol", c.stop_tol);
    c.seeds = j.value("seeds", c.seeds);
    c.bounds = j.value("bounds", c.bounds);
    c.output = j.value("output", c.output);
    c.timings = j.value("timings", c.timings);
  } catch (const json::exception& e) {
    throw StructuralError(std::string("config: ") + e.what());
  }
  c.validate();
  return c;
}

/// Rewrites the seed field of a flat spec string.
inline std::string with_seed(const std::string& text, const std::string& prefix,
                             std::uint64_t seed) {
  SpecString s = parse_spec_string(text, prefix, true);
  s.values["seed"] = std::to_string(seed);
  std::ostringstream os;
  os << prefix << ":" << s.head;
  for (const auto& [k, v] : s.values) os << "," << k << "=" << v;
  return os.str();
}

/// One concrete run: a single space, algorithm, weakness and seed.
struct RunRequest {
  std::string space;
  std::string dictionary;
  std::string target;
  std::string algorithm;
  std::string weakness;
  std::string selection = "exact_argmax";
  std::optional<std::string> errors;
  SolverConfig solver;
  int max_m = 100;
  double stop_tol = 1e-12;
  std::uint64_t seed = 0;
  bool timings = false;
};

inline RunReport execute(const RunRequest& q) {
  const LpSpace space = parse_space_spec(q.space);
  const Dictionary D = parse_dictionary_spec(space, q.dictionary);
  const TargetSpec ts = parse_target_spec(q.target);
  const Target target = make_target(D, ts);
  const Algorithm algo = parse_algorithm(q.algorithm);
  RunOptions opts;
  opts.rule = parse_selection_rule(q.selection);
  if (q.errors) opts.errors = parse_error_spec(*q.errors);
  if (is_approximate(algo) && !opts.errors)
    throw StructuralError("algorithm '" + q.algorithm + "' needs an error schedule (--errors)");
  opts.seed = q.seed;
  opts.record_timings = q.timings;
  opts.target = &target;
  opts.target_spec = ts.spec();
  return run_greedy(algo, target.f, D, parse_weakness_spec(q.weakness), q.solver, q.max_m,
                    q.stop_tol, opts);
}

inline std::vector<RunRequest> expand(const ExperimentConfig& c) {
  c.validate();
  std::vector<RunRequest> out;
  const std::vector<std::optional<std::uint64_t>> seeds =
      c.seeds.empty() ? std::vector<std::optional<std::uint64_t>>{std::nullopt}
                      : std::vector<std::optional<std::uint64_t>>(c.seeds.begin(), c.seeds.end());
  for (const auto& space : c.spaces)
    for (const auto& algo : c.algorithms)
      for (const auto& w : c.weakness)
        for (const auto& seed : seeds) {
          RunRequest q;
          q.space = space;
          q.dictionary = seed ? with_seed(c.dictionary, "dict", *seed) : c.dictionary;
          q.target = seed ? with_seed(c.target, "target", *seed) : c.target;
          q.algorithm = algo;
          q.weakness = w;
          q.selection = c.selection;
          q.errors = c.errors;
          q.solver = c.solver;
          q.max_m = c.max_m;
          q.stop_tol = c.stop_tol;
          q.seed = seed.value_or(0);
          q.timings = c.timings;
          out.push_back(std::move(q));
        }
  return out;
}

/// Condition audit, Error Reduction Lemma and the requested rate bounds.
inline AuditReport full_audit(const RunReport& r, const std::vector<BoundId>& bounds,
                              const AuditTolerances& tol = {}) {
  AuditReport a = audit_conditions(r, tol);
  a.checks.push_back(check_error_reduction_lemma(r, tol));
  a.merge(verify_rates(r, bounds, tol));
  return a;
}

// ---------------------------------------------------------------------------
// Summary table

namespace detail {

inline double median(std::vector<double> v) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

/// Linear-interpolation quantile.
inline double quantile(std::vector<double> v, double q) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(v.begin(), v.end());
  const double pos = q * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

/// Residual after m iterations; a run that stopped early keeps its last value.
inline std::optional<double> residual_at(const RunReport& r, int m) {
  if (m > r.max_m) return std::nullopt;
  if (r.records.empty()) return r.initial_norm;
  if (m <= static_cast<int>(r.records.size())) return r.records[m - 1].residual_norm;
  if (r.termination == "max_iters") return std::nullopt;
  return r.records.back().residual_norm;
}

}  // namespace detail

inline constexpr int kCheckpoints[] = {10, 25, 50, 100};

struct SummaryRow {
  std::string algorithm;
  int runs = 0;
  std::vector<double> medians;  // one per checkpoint
  double tight_q1 = 0.0, tight_q2 = 0.0, tight_q3 = 0.0;
  int failures = 0;  // runs whose audit failed
};

inline std::vector<SummaryRow> summarize_rows(const std::vector<RunReport>& reports,
                                              const std::vector<AuditReport>& audits = {}) {
  std::vector<SummaryRow> rows;
  std::map<std::string, std::size_t> where;
  std::vector<std::vector<std::vector<double>>> at;
  std::vector<std::vector<double>> ratios;
  for (std::size_t i = 0; i < reports.size(); ++i) {
    const RunReport& r = reports[i];
    auto it = where.find(r.algorithm);
    if (it == where.end()) {
      it = where.emplace(r.algorithm, rows.size()).first;
      SummaryRow row;
      row.algorithm = r.algorithm;
      rows.push_back(row);
      at.emplace_back(std::size(kCheckpoints));
      ratios.emplace_back();
    }
    const std::size_t k = it->second;
    ++rows[k].runs;
    for (std::size_t c = 0; c < std::size(kCheckpoints); ++c)
      if (auto v = detail::residual_at(r, kCheckpoints[c])) at[k][c].push_back(*v);
    if (auto b = default_bound(r)) {
      const auto bounds = bound_series(*b, r);
      for (std::size_t j = 0; j < bounds.size(); ++j)
        ratios[k].push_back(r.records[j].residual_norm / bounds[j]);
    }
    const AuditReport a = i < audits.size() ? audits[i] : full_audit(r, {});
    if (!a.pass()) ++rows[k].failures;
  }
  for (std::size_t k = 0; k < rows.size(); ++k) {
    for (auto& v : at[k]) rows[k].medians.push_back(detail::median(v));
    rows[k].tight_q1 = detail::quantile(ratios[k], 0.25);
    rows[k].tight_q2 = detail::quantile(ratios[k], 0.5);
    rows[k].tight_q3 = detail::quantile(ratios[k], 0.75);
  }
  return rows;
}

inline std::string summarize(const std::vector<RunReport>& reports,
                             const std::vector<AuditReport>& audits = {}) {
  if (reports.empty()) throw std::invalid_argument("summarize: no reports");
  const auto rows = summarize_rows(reports, audits);
  auto cell = [](double x) {
    std::ostringstream os;
    if (std::isnan(x)) {
      os << "-";
    } else {
      os << std::setprecision(4) << std::scientific << x;
    }
    return os.str();
  };
  std::ostringstream os;
  os << std::left << std::setw(8) << "algo" << std::right << std::setw(6) << "runs";
  for (int m : kCheckpoints) os << std::setw(12) << ("m=" + std::to_string(m));
  os << std::setw(12) << "tight_q1" << std::setw(12) << "tight_q2" << std::setw(12) << "tight_q3"
     << std::setw(10) << "failures" << "\n";
  for (const auto& row : rows) {
    os << std::left << std::setw(8) << row.algorithm << std::right << std::setw(6) << row.runs;
    for (double v : row.medians) os << std::setw(12) << cell(v);
    os << std::setw(12) << cell(row.tight_q1) << std::setw(12) << cell(row.tight_q2)
       << std::setw(12) << cell(row.tight_q3) << std::setw(10) << row.failures << "\n";
  }
  return os.str();
}

// ---------------------------------------------------------------------------
// Output locations

/// Relative paths are placed under $WBGA_OUT_DIR when it is set.
inline std::string output_path(const std::string& path) {
  const char* dir = std::getenv("WBGA_OUT_DIR");
  std::filesystem::path p(path);
  if (dir && *dir && p.is_relative()) {
    std::filesystem::create_directories(dir);
    return (std::filesystem::path(dir) / p).string();
  }
  return path;
}

inline std::string sibling_json(const std::string& csv_path) {
  std::filesystem::path p(csv_path);
  p.replace_extension(".json");
  return p.string();
}

}  // namespace wbga

#endif  // WBGA_HARNESS_HPP
