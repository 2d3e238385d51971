#ifndef WBGA_REPORT_IO_HPP
#define WBGA_REPORT_IO_HPP

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>

#include <nlohmann/json.hpp>

#include "algorithms.hpp"
#include "diagnostics.hpp"

namespace wbga {

using json = nlohmann::json;

namespace detail {

inline json num(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

inline double num_or_nan(const json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::numeric_limits<double>::quiet_NaN();
  return j.at(key).get<double>();
}

}  // namespace detail

inline json to_json(const SolverConfig& c) {
  return {{"tol", c.tol},
          {"grad_tol", c.grad_tol},
          {"max_iters", c.max_iters},
          {"bracket_growth", c.bracket_growth},
          {"initial_step", c.initial_step}};
}

inline SolverConfig solver_from_json(const json& j) {
  SolverConfig c;
  c.tol = j.value("tol", c.tol);
  c.grad_tol = j.value("grad_tol", c.grad_tol);
  c.max_iters = j.value("max_iters", c.max_iters);
  c.bracket_growth = j.value("bracket_growth", c.bracket_growth);
  c.initial_step = j.value("initial_step", c.initial_step);
  c.validate();
  return c;
}

inline json to_json(const IterationRecord& r) {
  using detail::num;
  return {{"m", r.m},
          {"selected_index", r.selected_index},
          {"t_m", num(r.t_m)},
          {"gs_lhs", num(r.gs_lhs)},
          {"gs_rhs", num(r.gs_rhs)},
          {"dict_norm", num(r.dict_norm)},
          {"prev_norm", num(r.prev_norm)},
          {"residual_norm", num(r.residual_norm)},
          {"g_norm", num(r.g_norm)},
          {"bo_abs", num(r.bo_abs)},
          {"er_reference", num(r.er_reference)},
          {"lambda", num(r.lambda)},
          {"omega", num(r.omega)},
          {"mu", num(r.mu)},
          {"delta_m", num(r.delta_m)},
          {"achieved_delta", num(r.achieved_delta)},
          {"eta_m", num(r.eta_m)},
          {"eps_m", num(r.eps_m)},
          {"bj_margin", num(r.bj_margin)},
          {"neg_lambda_margin", num(r.neg_lambda_margin)},
          {"dual_choice_value", num(r.dual_choice_value)},
          {"solver_converged", r.solver_converged},
          {"exact", r.exact},
          {"schedule_violation", r.schedule_violation},
          {"wall_ns", r.wall_ns}};
}

inline IterationRecord record_from_json(const json& j) {
  using detail::num_or_nan;
  IterationRecord r;
  r.m = j.at("m").get<int>();
  r.selected_index = j.at("selected_index").get<int>();
  r.t_m = num_or_nan(j, "t_m");
  r.gs_lhs = num_or_nan(j, "gs_lhs");
  r.gs_rhs = num_or_nan(j, "gs_rhs");
  r.dict_norm = num_or_nan(j, "dict_norm");
  r.prev_norm = num_or_nan(j, "prev_norm");
  r.residual_norm = num_or_nan(j, "residual_norm");
  r.g_norm = num_or_nan(j, "g_norm");
  r.bo_abs = num_or_nan(j, "bo_abs");
  r.er_reference = num_or_nan(j, "er_reference");
  r.lambda = num_or_nan(j, "lambda");
  r.omega = num_or_nan(j, "omega");
  r.mu = num_or_nan(j, "mu");
  r.delta_m = num_or_nan(j, "delta_m");
  r.achieved_delta = num_or_nan(j, "achieved_delta");
  r.eta_m = num_or_nan(j, "eta_m");
  r.eps_m = num_or_nan(j, "eps_m");
  r.bj_margin = num_or_nan(j, "bj_margin");
  r.neg_lambda_margin = num_or_nan(j, "neg_lambda_margin");
  r.dual_choice_value = num_or_nan(j, "dual_choice_value");
  r.solver_converged = j.value("solver_converged", true);
  r.exact = j.value("exact", false);
  r.schedule_violation = j.value("schedule_violation", false);
  r.wall_ns = j.value("wall_ns", std::int64_t{0});
  return r;
}

inline json to_json(const RunReport& r) {
  json recs = json::array();
  for (const auto& rec : r.records) recs.push_back(to_json(rec));
  return {{"schema", r.schema},
          {"algorithm", r.algorithm},
          {"space", r.space},
          {"dictionary", r.dictionary},
          {"target",
           {{"spec", r.target},
            {"has_certificate", r.has_certificate},
            {"eps", r.eps},
            {"A", r.a_eps},
            {"noise_norm", r.noise_norm}}},
          {"weakness", r.weakness},
          {"selection", r.selection},
          {"errors", r.errors},
          {"solver", to_json(r.solver)},
          {"max_m", r.max_m},
          {"stop_tol", r.stop_tol},
          {"seed", r.seed},
          {"initial_norm", r.initial_norm},
          {"initial_delta", r.initial_delta},
          {"initial_achieved_delta", r.initial_achieved_delta},
          {"termination", r.termination},
          {"warnings", r.warnings},
          {"records", recs}};
}

inline RunReport report_from_json(const json& j) {
  if (j.value("schema", 0) != 1) throw StructuralError("unsupported report schema");
  RunReport r;
  r.algorithm = j.at("algorithm").get<std::string>();
  r.space = j.at("space").get<std::string>();
  r.dictionary = j.at("dictionary").get<std::string>();
  const json& t = j.at("target");
  r.target = t.value("spec", "");
  r.has_certificate = t.value("has_certificate", false);
  r.eps = t.value("eps", 0.0);
  r.a_eps = t.value("A", 1.0);
  r.noise_norm = t.value("noise_norm", 0.0);
  r.weakness = j.at("weakness").get<std::string>();
  r.selection = j.value("selection", "exact_argmax");
  r.errors = j.value("errors", "");
  r.solver = solver_from_json(j.at("solver"));
  r.max_m = j.at("max_m").get<int>();
  r.stop_tol = j.at("stop_tol").get<double>();
  r.seed = j.value("seed", std::uint64_t{0});
  r.initial_norm = j.at("initial_norm").get<double>();
  r.initial_delta = j.value("initial_delta", 0.0);
  r.initial_achieved_delta = j.value("initial_achieved_delta", 0.0);
  r.termination = j.at("termination").get<std::string>();
  r.warnings = j.value("warnings", std::vector<std::string>{});
  for (const auto& rec : j.at("records")) r.records.push_back(record_from_json(rec));
  return r;
}

inline json to_json(const CheckResult& c) {
  json margins = json::array(), ratios = json::array();
  for (double x : c.margins) margins.push_back(detail::num(x));
  for (double x : c.ratios) ratios.push_back(detail::num(x));
  json j = {{"name", c.name},
            {"applicable", c.applicable},
            {"pass", c.pass()}};
  if (!c.applicable) {
    j["skip_reason"] = c.skip_reason;
    return j;
  }
  j["tol"] = c.tol;
  j["worst_margin"] = detail::num(c.worst);
  j["failures"] = c.failures;
  j["first_failure_m"] = c.first_failure_m;
  j["margins"] = margins;
  if (!c.ratios.empty()) j["tightness"] = ratios;
  return j;
}

inline json to_json(const AuditReport& a) {
  json checks = json::array();
  for (const auto& c : a.checks) checks.push_back(to_json(c));
  return {{"schema", 1}, {"verdict", a.pass() ? "PASS" : "FAIL"}, {"checks", checks}};
}

inline json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw StructuralError(path + ": " + e.what());
  }
}

inline void write_text_file(const std::string& path, const std::string& text) {
  const auto parent = std::filesystem::path(path).parent_path();
  if (!parent.empty()) std::filesystem::create_directories(parent);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out << text;
  if (!out) throw std::runtime_error("write failed for '" + path + "'");
}

inline RunReport load_report(const std::string& path) { return report_from_json(read_json_file(path)); }

inline void save_report(const RunReport& r, const std::string& path) {
  write_text_file(path, to_json(r).dump(1) + "\n");
}

// ---------------------------------------------------------------------------
// CSV

inline std::string format_g17(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

inline constexpr const char* kCsvHeader =
    "m,algo,residual_norm,gs_lhs,gs_rhs,bo_abs,er_reference,t_m,delta_m,eta_m,eps_m,bound_cor52,"
    "wall_ns";

/// One row per iteration. The bound column holds the strongest rate bound that
/// applies to the run and is empty when none does.
inline std::string csv_string(const RunReport& r) {
  std::ostringstream os;
  os << kCsvHeader << "\n";
  std::vector<double> bounds;
  if (auto b = default_bound(r)) bounds = bound_series(*b, r);
  for (std::size_t i = 0; i < r.records.size(); ++i) {
    const auto& rec = r.records[i];
    os << rec.m << ',' << r.algorithm << ',' << format_g17(rec.residual_norm) << ','
       << format_g17(rec.gs_lhs) << ',' << format_g17(rec.gs_rhs) << ',' << format_g17(rec.bo_abs)
       << ',' << format_g17(rec.er_reference) << ',' << format_g17(rec.t_m) << ','
       << format_g17(rec.delta_m) << ',' << format_g17(rec.eta_m) << ','
       << format_g17(rec.eps_m) << ',' << (bounds.empty() ? "" : format_g17(bounds[i])) << ','
       << rec.wall_ns << "\n";
  }
  return os.str();
}

inline void emit_csv(const RunReport& r, const std::string& path) {
  write_text_file(path, csv_string(r));
}

}  // namespace wbga

#endif  // WBGA_REPORT_IO_HPP
