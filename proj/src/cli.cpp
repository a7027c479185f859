/*
 Copyright 2026 The delayq Authors

 Licensed under the Apache License, Version 2.0 (the "License");
 you may not use this file except in compliance with the License.
 You may obtain a copy of the License at

      https://www.apache.org/licenses/LICENSE-2.0

 Unless required by applicable law or agreed to in writing, software
 distributed under the License is distributed on an "AS IS" BASIS,
 WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 See the License for the specific language governing permissions and
 limitations under the License.
*/
#include "delayq/cli.hpp"

#include "delayq/config.hpp"
#include "delayq/io.hpp"
#include "delayq/simulator.hpp"
#include "delayq/synthesis.hpp"
#include "delayq/verifier.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>

#include <filesystem>
#include <map>
#include <optional>
#include <sstream>

namespace delayq {

namespace {

namespace fs = std::filesystem;

struct Flags {
  std::string config;
  std::string out = ".";
  std::optional<std::uint64_t> seed;
  int threads = 1;
};

struct Context {
  RunConfig cfg;
  fs::path out;
  int threads = 1;
  std::ostream& os;
};

/// Files are staged in memory and written only once the command succeeds.
class Outputs {
 public:
  void add(const std::string& name, std::string content) { files_[name] = std::move(content); }
  void commit(const fs::path& dir) const {
    for (const auto& [name, content] : files_) write_file_atomic(dir / name, content);
  }

 private:
  std::map<std::string, std::string> files_;
};

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

ControlLaw law_or_zero(const RunConfig& c) {
  return c.law ? *c.law : ControlLaw::zero(c.sys.r(), c.sys.n(), c.grid().size());
}

InitialFunction initial_or_ones(const RunConfig& c) {
  return c.initial ? *c.initial
                   : InitialFunction::constant(Vector::Ones(c.sys.n()), c.grid().size());
}

ReportOptions report_options(const Context& ctx) {
  ReportOptions o;
  o.seed = ctx.cfg.seed;
  o.suite_size = ctx.cfg.suite_size;
  o.quadrature_tolerance = ctx.cfg.quadrature_tolerance;
  o.residual_tolerance = ctx.cfg.residual_tolerance;
  o.threads = ctx.threads;
  return o;
}

SynthesisOptions synthesis_options(const Context& ctx) {
  SynthesisOptions o;
  o.gain_tolerance = ctx.cfg.gain_tolerance;
  o.residual_tolerance = ctx.cfg.residual_tolerance;
  o.max_iterations = ctx.cfg.max_iterations;
  o.tail_tolerance = ctx.cfg.tail_tolerance;
  o.threads = ctx.threads;
  return o;
}

void print_report(std::ostream& os, const ResidualReport& r) {
  auto line = [&](const char* name, double value, const std::string& tol, bool pass) {
    os << fmt::format("{:<20} {:>24.17g} {:>14} {}\n", name, value, tol, pass ? "pass" : "FAIL");
  };
  const std::string ross = fmt::format("<= {:.3g}", r.tolerances.ross);
  os << fmt::format("{:<20} {:>24} {:>14} {}\n", "check", "value", "tolerance", "verdict");
  line("ross1", r.ross.r1, ross, r.ross.r1 <= r.tolerances.ross);
  line("ross2", r.ross.r2, ross, r.ross.r2 <= r.tolerances.ross);
  line("ross3", r.ross.r3, ross, r.ross.r3 <= r.tolerances.ross);
  line("ross4", r.ross.r4, ross, r.ross.r4 <= r.tolerances.ross);
  line("ross5", r.ross.r5, ross, r.ross.r5 <= r.tolerances.ross);
  line("pi0_symmetry", r.pi0_symmetry, fmt::format("<= {:.3g}", r.tolerances.symmetry),
       r.pi0_symmetry <= r.tolerances.symmetry);
  line("pi0_min_eigenvalue", r.pi0_min_eigenvalue, "> 0", r.pi0_min_eigenvalue > 0.0);
  line("pi2_exchange", r.pi2_exchange, fmt::format("<= {:.3g}", r.tolerances.exchange),
       r.pi2_exchange <= r.tolerances.exchange);
  line("stationarity", r.stationarity, fmt::format("<= {:.3g}", r.tolerances.stationarity),
       r.stationarity_pass());
  line("vj_gap", r.vj_gap, fmt::format("<= {:.3g}", r.vj_bound), r.vj_pass());
  os << fmt::format("{:<20} {:>24}\n", "finite", r.finite ? "yes" : "no");
}

int cmd_simulate(Context& ctx) {
  const RunConfig& c = ctx.cfg;
  const ControlLaw law = law_or_zero(c);
  const InitialFunction phi = initial_or_ones(c);
  const TimeGrid tg = c.time_grid();
  const Trajectory traj = simulate(c.sys, law, phi, tg);
  const CostResult cost = direct_cost(c.sys, c.weights, law, phi, tg);
  std::ostringstream csv;
  write_trajectory_csv(csv, traj);
  Outputs files;
  files.add("trajectory.csv", csv.str());
  files.commit(ctx.out);
  ctx.os << fmt::format("J = {:.17g} (tail bound {:.3g}, horizon {:.6g})\n", cost.cost,
                        cost.tail_bound, tg.horizon());
  return kOk;
}

BellmanMatrices evaluate_law(const Context& ctx, const ControlLaw& law) {
  const RunConfig& c = ctx.cfg;
  const TimeGrid tg = c.time_grid();
  require_admissible(c.sys, law, tg);
  const ClosedLoopSystem cl = close_loop(c.sys, law, c.grid());
  PiOptions po;
  po.tail_tolerance = c.tail_tolerance;
  po.threads = ctx.threads;
  return pi_matrices(cl, fundamental_matrix(cl, tg), weight_kernels(c.weights, law, c.grid()), po);
}

int cmd_evaluate(Context& ctx) {
  const RunConfig& c = ctx.cfg;
  const ControlLaw law = law_or_zero(c);
  const BellmanMatrices pi = evaluate_law(ctx, law);
  const ResidualReport rep = property_report(c.sys, c.weights, law, pi, report_options(ctx));
  Outputs files;
  files.add("pi.json", dump(to_json(pi)));
  files.add("report.json", dump(to_json(rep)));
  files.commit(ctx.out);
  print_report(ctx.os, rep);
  if (!rep.properties_pass()) {
    ctx.os << "symmetry, positivity or exchange check failed\n";
    return kPropertyFailed;
  }
  return kOk;
}

Json trace_summary(const IterationTrace& t) {
  return {{"converged", t.converged},
          {"iterations", static_cast<int>(t.records.size())},
          {"reason", t.reason}};
}

int cmd_synthesize(Context& ctx) {
  const RunConfig& c = ctx.cfg;
  const TimeGrid tg = c.time_grid();
  const SynthesisResult res = policy_iteration(c.sys, c.weights, c.law, tg, synthesis_options(ctx));
  std::ostringstream trace;
  write_trace_csv(trace, res.trace);
  Outputs files;
  files.add("trace.csv", trace.str());
  if (!res.trace.converged) {
    files.commit(ctx.out);
    ctx.os << res.trace.reason << "\n";
    return kNoConvergence;
  }

  // The reported law is the one built from the converged Π.
  const ControlLaw optimal = gain_update(res.pi, c.sys, c.weights);
  ReportOptions ro = report_options(ctx);
  ro.stationarity_law = optimal;
  ro.stationarity_tolerance = 1e-10;
  const ResidualReport rep = property_report(c.sys, c.weights, res.law, res.pi, ro);
  Json report = to_json(rep);
  report["synthesis"] = trace_summary(res.trace);
  files.add("law.json", dump(to_json(optimal, c.grid())));
  files.add("pi.json", dump(to_json(res.pi)));
  files.add("report.json", dump(report));
  files.commit(ctx.out);
  print_report(ctx.os, rep);
  ctx.os << fmt::format("converged after {} iterations\n", res.trace.records.size());
  return rep.all_pass() ? kOk : kNoConvergence;
}

int cmd_ablate(Context& ctx) {
  const RunConfig& c = ctx.cfg;
  const TimeGrid tg = c.time_grid();
  ControlLaw law;
  if (c.law) {
    law = *c.law;
    require_admissible(c.sys, law, tg);
  } else {
    const SynthesisResult res = policy_iteration(c.sys, c.weights, std::nullopt, tg, synthesis_options(ctx));
    if (!res.trace.converged) {
      ctx.os << res.trace.reason << "\n";
      return kNoConvergence;
    }
    law = gain_update(res.pi, c.sys, c.weights);
  }
  AblationOptions ao;
  ao.magnitudes = c.magnitudes;
  ao.directions = c.directions;
  ao.functions = c.initial_functions;
  ao.seed = c.seed;
  ao.threads = ctx.threads;
  const AblationResult res = gamma2_ablation(c.sys, c.weights, law, tg, ao);
  std::ostringstream csv;
  write_ablation_csv(csv, res);
  Outputs files;
  files.add("ablation.csv", csv.str());
  files.commit(ctx.out);
  if (!res.passed()) {
    ctx.os << "ablation falsified: " << res.failure << "\n";
    return kAblationFalsified;
  }
  ctx.os << fmt::format("minimum at zero over {} samples\n", res.samples.size());
  return kOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Bellman functional matrices for LQ control of systems with one state delay",
               "delayq"};
  app.require_subcommand(1);
  Flags flags;
  using Command = int (*)(Context&);
  std::vector<std::pair<CLI::App*, Command>> commands;
  auto add = [&](const char* name, const char* help, Command fn) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("--config", flags.config, "problem file (TOML or JSON)")->required();
    sub->add_option("--out", flags.out, "output directory");
    sub->add_option("--seed", flags.seed, "overrides the config seed");
    sub->add_option("--threads", flags.threads, "worker threads")->check(CLI::PositiveNumber);
    commands.emplace_back(sub, fn);
  };
  add("simulate", "integrate the closed loop and report the cost", cmd_simulate);
  add("evaluate", "compute the Bellman matrices of the configured law", cmd_evaluate);
  add("synthesize", "policy iteration to the optimal law", cmd_synthesize);
  add("ablate", "perturb the optimal law with a concentrated delay gain", cmd_ablate);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kValidation;
  }

  try {
    Context ctx{load_config(flags.config), flags.out, flags.threads, out};
    if (flags.seed) ctx.cfg.seed = *flags.seed;
    for (const auto& [sub, fn] : commands) {
      if (sub->parsed()) return fn(ctx);
    }
    return kValidation;
  } catch (const ValidationError& e) {
    err << "invalid input: " << e.what() << "\n";
    return kValidation;
  } catch (const DivergenceError& e) {
    err << e.what() << "\n";
    return kInadmissible;
  } catch (const HorizonError& e) {
    err << e.what() << "\n";
    return kHorizon;
  } catch (const NonConvergenceError& e) {
    err << e.what() << "\n";
    return kNoConvergence;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kValidation;
  }
}

}  // namespace delayq
