#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "wbga/wbga.hpp"

namespace {

constexpr int kExitFail = 1;
constexpr int kExitUsage = 2;
constexpr int kExitIo = 3;

std::vector<std::uint64_t> parse_seed_list(const std::string& text) {
  std::vector<std::uint64_t> out;
  for (const auto& tok : wbga::split(text, ',')) {
    const auto dash = tok.find('-');
    if (dash != std::string::npos && dash > 0) {
      const auto a = wbga::parse_int(tok.substr(0, dash), "seeds");
      const auto b = wbga::parse_int(tok.substr(dash + 1), "seeds");
      if (a < 0 || b < a) throw wbga::StructuralError("field 'seeds': bad range '" + tok + "'");
      for (auto s = a; s <= b; ++s) out.push_back(static_cast<std::uint64_t>(s));
    } else {
      const auto s = wbga::parse_int(tok, "seeds");
      if (s < 0) throw wbga::StructuralError("field 'seeds': must be nonnegative");
      out.push_back(static_cast<std::uint64_t>(s));
    }
  }
  return out;
}

struct CommonFlags {
  std::string config;
  std::vector<std::string> algos, spaces, weakness;
  std::string dict, target, select, errors, seeds;
  std::optional<int> iters;
  std::optional<double> stop_tol, solver_tol, grad_tol;
  std::optional<int> solver_iters;
  std::vector<std::string> bounds;
  bool timings = false;

  void attach(CLI::App* app, bool many) {
    app->add_option("--config", config, "JSON experiment config");
    app->add_option(many ? "--algos,--algo" : "--algo", algos, "algorithm id(s)")
        ->delimiter(',');
    if (many) {
      app->add_option("--spaces,--space", spaces, "space spec(s), separated by ';'")
          ->delimiter(';');
      app->add_option("--weakness", weakness, "weakness spec(s), separated by ';'")
          ->delimiter(';');
    } else {
      app->add_option("--space", spaces, "space spec lp:p=<real>,n=<int>");
      app->add_option("--weakness", weakness, "const:<t> | pow:<t0>,<a> | list:<...>");
    }
    app->add_option("--dict", dict, "<kind>,N=<int>,seed=<int>");
    app->add_option("--target", target, "a1,k=<int>,seed=<int> | noisy,k=<int>,eps=<real>,seed=<int>");
    app->add_option("--select", select, "exact_argmax | threshold_first");
    app->add_option("--errors", errors, "err:delta=<spec>,eta=<spec>,eps=derived|list:<...>");
    app->add_option("--seeds", seeds, "seed list, e.g. 1-20 or 1,5,9");
    app->add_option("--iters", iters, "maximum number of iterations");
    app->add_option("--stop-tol", stop_tol, "residual norm counted as exact arrival");
    app->add_option("--solver-tol", solver_tol, "solver tolerance on arguments");
    app->add_option("--grad-tol", grad_tol, "projection tolerance on |F_r(phi_k)|");
    app->add_option("--solver-iters", solver_iters, "solver iteration cap");
    app->add_option("--bound", bounds, "rate bound(s) to verify")->delimiter(',');
    app->add_flag("--timings", timings, "record wall-clock time per iteration");
  }

  wbga::ExperimentConfig resolve() const {
    wbga::ExperimentConfig c;
    if (!config.empty()) c = wbga::config_from_json(wbga::read_json_file(config));
    if (!algos.empty()) c.algorithms = algos;
    if (!spaces.empty()) c.spaces = spaces;
    if (!weakness.empty()) c.weakness = weakness;
    if (!dict.empty()) c.dictionary = dict;
    if (!target.empty()) c.target = target;
    if (!select.empty()) c.selection = select;
    if (!errors.empty()) c.errors = errors;
    if (!seeds.empty()) c.seeds = parse_seed_list(seeds);
    if (iters) c.max_m = *iters;
    if (stop_tol) c.stop_tol = *stop_tol;
    if (solver_tol) c.solver.tol = *solver_tol;
    if (grad_tol) c.solver.grad_tol = *grad_tol;
    if (solver_iters) c.solver.max_iters = *solver_iters;
    if (!bounds.empty()) c.bounds = bounds;
    if (timings) c.timings = true;
    c.validate();
    return c;
  }
};

std::vector<wbga::BoundId> bound_ids(const std::vector<std::string>& names) {
  std::vector<wbga::BoundId> out;
  for (const auto& n : names) out.push_back(wbga::parse_bound_id(n));
  return out;
}

void print_audit(const std::string& label, const wbga::AuditReport& a) {
  std::cout << label << ": " << (a.pass() ? "PASS" : "FAIL") << "\n";
  for (const auto& c : a.checks) {
    if (!c.applicable) {
      std::cout << "  " << c.name << ": SKIP (" << c.skip_reason << ")\n";
      continue;
    }
    std::printf("  %s: %s  worst margin %.3e over %zu iterations", c.name.c_str(),
                c.pass() ? "PASS" : "FAIL", c.margins.empty() ? 0.0 : c.worst, c.margins.size());
    if (!c.pass()) std::printf(", %d failures from m=%d", c.failures, c.first_failure_m);
    if (!c.ratios.empty()) {
      std::printf(", tightness q25/q50/q75 %.3f/%.3f/%.3f", wbga::detail::quantile(c.ratios, 0.25),
                  wbga::detail::quantile(c.ratios, 0.5), wbga::detail::quantile(c.ratios, 0.75));
    }
    std::printf("\n");
  }
}

int cmd_run(const CommonFlags& flags, const std::string& out, const std::string& json_out) {
  const wbga::ExperimentConfig c = flags.resolve();
  const auto requests = wbga::expand(c);
  if (requests.size() != 1)
    throw wbga::StructuralError("run expects exactly one configuration; use sweep");
  const wbga::RunReport r = wbga::execute(requests.front());
  const std::string csv_path = wbga::output_path(out);
  const std::string json_path =
      wbga::output_path(json_out.empty() ? wbga::sibling_json(out) : json_out);
  wbga::emit_csv(r, csv_path);
  wbga::save_report(r, json_path);
  std::cout << r.algorithm << ": " << r.records.size() << " iterations, final residual "
            << (r.records.empty() ? r.initial_norm : r.records.back().residual_norm) << " ("
            << r.termination << ")\n"
            << "wrote " << csv_path << " and " << json_path << "\n";
  for (const auto& w : r.warnings) std::cout << "warning: " << w << "\n";
  if (!c.bounds.empty()) {
    const auto a = wbga::full_audit(r, bound_ids(c.bounds));
    print_audit(json_path, a);
    return a.pass() ? 0 : kExitFail;
  }
  return 0;
}

int cmd_sweep(const CommonFlags& flags, const std::string& out_dir) {
  wbga::ExperimentConfig c = flags.resolve();
  if (!out_dir.empty()) c.output = out_dir;
  const std::string dir = wbga::output_path(c.output);
  std::filesystem::create_directories(dir);
  const auto requests = wbga::expand(c);
  const auto bounds = bound_ids(c.bounds);
  std::vector<wbga::RunReport> reports;
  std::vector<wbga::AuditReport> audits;
  int failed = 0;
  for (std::size_t i = 0; i < requests.size(); ++i) {
    const auto& q = requests[i];
    reports.push_back(wbga::execute(q));
    audits.push_back(wbga::full_audit(reports.back(), bounds));
    char stem[64];
    std::snprintf(stem, sizeof stem, "run%04zu_%s_s%llu", i, q.algorithm.c_str(),
                  static_cast<unsigned long long>(q.seed));
    const std::string base = (std::filesystem::path(dir) / stem).string();
    wbga::emit_csv(reports.back(), base + ".csv");
    wbga::save_report(reports.back(), base + ".json");
    if (!audits.back().pass()) {
      ++failed;
      std::cout << stem << ": FAIL (";
      const auto names = audits.back().failing();
      for (std::size_t k = 0; k < names.size(); ++k) std::cout << (k ? ", " : "") << names[k];
      std::cout << ")\n";
    }
  }
  std::cout << wbga::summarize(reports, audits);
  std::cout << requests.size() << " runs, " << failed << " failed audits, output in " << dir
            << "\n";
  return failed == 0 ? 0 : kExitFail;
}

int cmd_audit(const std::vector<std::string>& files, const std::vector<std::string>& bounds,
              const std::string& out) {
  const auto ids = bound_ids(bounds);
  bool all = true;
  wbga::json arr = wbga::json::array();
  for (const auto& f : files) {
    const wbga::RunReport r = wbga::load_report(f);
    const auto a = wbga::full_audit(r, ids);
    print_audit(f, a);
    all = all && a.pass();
    auto j = wbga::to_json(a);
    j["report"] = f;
    arr.push_back(j);
  }
  if (!out.empty())
    wbga::write_text_file(wbga::output_path(out),
                          (files.size() == 1 ? arr[0] : arr).dump(1) + "\n");
  return all ? 0 : kExitFail;
}

int cmd_selftest() {
  const auto results = wbga::run_selftest();
  int failed = 0;
  for (const auto& r : results) {
    std::cout << (r.pass ? "PASS " : "FAIL ") << r.name;
    if (!r.pass) std::cout << ": " << r.detail;
    std::cout << "\n";
    failed += r.pass ? 0 : 1;
  }
  std::cout << results.size() - failed << "/" << results.size() << " selftest checks passed\n";
  return failed == 0 ? 0 : kExitFail;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Weak biorthogonal greedy algorithms over l_p^n"};
  app.require_subcommand(1);

  CommonFlags run_flags, sweep_flags;
  std::string run_out = "run.csv", run_json;
  auto* run = app.add_subcommand("run", "execute one configuration, write CSV and JSON");
  run_flags.attach(run, false);
  run->add_option("--out", run_out, "CSV path; the JSON report goes next to it");
  run->add_option("--json", run_json, "JSON report path");

  std::string sweep_out;
  auto* sweep = app.add_subcommand("sweep", "cross seeds x algorithms x spaces x weakness");
  sweep_flags.attach(sweep, true);
  sweep->add_option("--out", sweep_out, "output directory");

  std::vector<std::string> audit_files, audit_bounds;
  std::string audit_out;
  auto* audit = app.add_subcommand("audit", "check stored reports");
  audit->add_option("reports", audit_files, "JSON run reports")->required();
  audit->add_option("--bound", audit_bounds, "rate bound(s) to verify")->delimiter(',');
  audit->add_option("--out", audit_out, "JSON audit path");

  auto* self = app.add_subcommand("selftest", "run the oracle checks");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    if (*run) return cmd_run(run_flags, run_out, run_json);
    if (*sweep) return cmd_sweep(sweep_flags, sweep_out);
    if (*audit) return cmd_audit(audit_files, audit_bounds, audit_out);
    if (*self) return cmd_selftest();
  } catch (const wbga::StructuralError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::domain_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIo;
  }
  return kExitUsage;
}
