#include "dex/cli.hpp"

#include <algorithm>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>

#include <CLI11.hpp>

#include "dex/cutset_lp.hpp"
#include "dex/dual_solver.hpp"
#include "dex/error.hpp"
#include "dex/io.hpp"
#include "dex/network_code.hpp"

namespace dex::cli {

namespace {

constexpr int kOk = 0;
constexpr int kFailed = 1;
constexpr int kUsage = 2;

struct Options {
  std::string instance_path;
  std::optional<std::uint32_t> field_char;
  std::optional<unsigned> field_degree;
  std::size_t max_iters = 50'000;
  double gap_tol = 1e-3;
  double step_scale = 0;
  std::string theta;
  std::string tie_break;
  std::string trace_path;
  std::string rates;
  std::string solution_path;
  std::string scheme_path;
  std::string output_path;
  std::uint64_t seed = 1;
  std::size_t seeds = 1;
  std::uint64_t max_denominator = 64;
  unsigned ext_degree = 0;
  std::size_t max_attempts = 64;
  bool json = false;
  bool flows = false;
};

StepSchedule parse_theta(const std::string& text) {
  StepSchedule s;
  if (text.empty()) return s;
  if (text.rfind("pow:", 0) == 0) {
    s.family = StepSchedule::Family::power;
    s.a = std::stold(text.substr(4));
  } else {
    std::vector<long double> parts;
    std::stringstream ss(text);
    std::string piece;
    while (std::getline(ss, piece, ',')) parts.push_back(std::stold(piece));
    if (parts.size() != 3) throw std::invalid_argument("--theta expects 'a,b,c' or 'pow:a'");
    s.a = parts[0];
    s.b = parts[1];
    s.c = parts[2];
  }
  s.validate();
  return s;
}

Instance load(const Options& o) {
  return parse_instance(o.instance_path, FieldOverride{o.field_char, o.field_degree});
}

std::vector<std::size_t> tie_break_of(const Options& o) {
  return o.tie_break.empty() ? std::vector<std::size_t>{} : parse_index_list(o.tie_break);
}

SolverConfig config_of(const Options& o) {
  SolverConfig config;
  config.max_iterations = o.max_iters;
  if (!(o.gap_tol >= 0)) throw std::invalid_argument("--gap-tol must be nonnegative");
  config.gap_tolerance = o.gap_tol;
  config.schedule = parse_theta(o.theta);
  if (!(o.step_scale >= 0)) throw std::invalid_argument("--step-scale must be nonnegative");
  config.step_scale = o.step_scale;
  config.tie_break = tie_break_of(o);
  return config;
}

// Explicit rates win over a solution file; otherwise the solver runs.
RateVector rates_of(const Options& o, const Instance& instance, std::ostream& err) {
  RateVector rates;
  if (!o.rates.empty()) {
    rates = parse_rate_list(o.rates);
  } else if (!o.solution_path.empty()) {
    rates = rates_from_solution_json(read_json_file(o.solution_path));
  } else {
    const Solution s = solve(instance, config_of(o));
    if (!s.converged) err << "warning: solver stopped at gap " << to_double(s.gap) << "\n";
    rates = s.rates;
  }
  if (rates.size() != instance.terminal_count()) {
    throw std::invalid_argument("expected " + std::to_string(instance.terminal_count()) + " rates, got " +
                                std::to_string(rates.size()));
  }
  for (const auto& r : rates) {
    if (r < 0) throw std::invalid_argument("rates must be nonnegative");
  }
  return rates;
}

ChunkAllocation allocation_of(const Options& o, const Instance& instance, std::ostream& err) {
  const RateVector rates = rates_of(o, instance, err);
  if (const auto v = violated_cuts(instance, rates); !v.empty()) {
    throw InfeasibleInstance("rates violate cut " + format_set(v.front().subset));
  }
  return rationalize(snap_rates(instance, rates, o.max_denominator), o.max_denominator);
}

DesignOptions design_options_of(const Options& o) {
  return DesignOptions{.extension_degree = o.ext_degree, .seed = o.seed, .max_attempts = o.max_attempts};
}

class Sink {
 public:
  Sink(const std::string& path, std::ostream& fallback) {
    if (!path.empty()) {
      file_.open(path);
      if (!file_) throw std::invalid_argument(path + ": cannot open for writing");
    }
    stream_ = path.empty() ? &fallback : &file_;
  }
  std::ostream& operator*() { return *stream_; }

 private:
  std::ofstream file_;
  std::ostream* stream_;
};

int cmd_solve(const Options& o, std::ostream& out, std::ostream& err) {
  const Instance instance = load(o);
  SolverConfig config = config_of(o);
  std::ofstream trace;
  if (!o.trace_path.empty()) {
    trace.open(o.trace_path);
    if (!trace) throw std::invalid_argument(o.trace_path + ": cannot open for writing");
    config.trace = [&trace](const TraceRecord& r) { trace << trace_to_json(r).dump() << '\n'; };
  }
  const Solution s = solve(instance, config);
  Sink sink(o.output_path, out);
  *sink << solution_to_json(s, instance).dump(2) << '\n';
  if (!s.converged) {
    err << "not converged: gap " << to_double(s.gap) << " after " << s.iterations << " iterations\n";
    return kFailed;
  }
  return kOk;
}

int cmd_oracle(const Options& o, std::ostream& out, std::ostream&) {
  const Instance instance = load(o);
  const CutSetLP lp = build_lp(instance);
  const LpSolution sol = solve_exact(lp);
  Sink sink(o.output_path, out);
  if (o.json) {
    *sink << lp_to_json(lp, sol).dump(2) << '\n';
    return kOk;
  }
  *sink << "constraints: " << lp.constraints.size() << '\n';
  for (const auto& c : lp.constraints) {
    *sink << "  R" << format_set(c.subset) << " >= " << to_string(c.rhs) << "  (user " << c.owner << ")\n";
  }
  *sink << "rates:";
  for (const auto& r : sol.rates) *sink << ' ' << to_string(r);
  *sink << "\noptimum: " << to_string(sol.value) << '\n';
  return kOk;
}

int cmd_verify(const Options& o, std::ostream& out, std::ostream&) {
  const Instance instance = load(o);
  if (o.rates.empty() && o.solution_path.empty()) throw std::invalid_argument("verify needs --rates or --solution");
  std::ostringstream ignored;
  const RateVector rates = rates_of(o, instance, ignored);
  Sink sink(o.output_path, out);
  bool ok = true;
  for (std::size_t i = 0; i < rates.size(); ++i) {
    if (!contains(instance.transmitters(), i) && rates[i] != 0) {
      *sink << "terminal " << i << " is not a transmitter but has rate " << to_string(rates[i]) << '\n';
      ok = false;
    }
  }
  for (const auto& v : violated_cuts(instance, rates)) {
    *sink << "violated " << format_set(v.subset) << ": provided " << to_string(v.provided) << " < required "
          << to_string(v.required) << '\n';
    ok = false;
  }
  *sink << (ok ? "feasible" : "infeasible") << "; objective " << to_string(instance.objective(rates)) << '\n';
  return ok ? kOk : kFailed;
}

int cmd_codegen(const Options& o, std::ostream& out, std::ostream& err) {
  const Instance instance = load(o);
  const ChunkAllocation allocation = allocation_of(o, instance, err);
  const TransmissionScheme scheme = design_transmissions(instance, allocation, design_options_of(o));
  const DecodabilityReport report = verify_decodability(scheme);
  nlohmann::json doc = scheme_to_json(scheme);
  doc["total_rate"] = rational_to_json(allocation.total_rate());
  doc["decodable"] = report.all_decodable();
  Sink sink(o.output_path, out);
  *sink << doc.dump(2) << '\n';
  return report.all_decodable() ? kOk : kFailed;
}

int cmd_simulate(const Options& o, std::ostream& out, std::ostream& err) {
  const Instance instance = load(o);
  std::optional<TransmissionScheme> scheme;
  if (!o.scheme_path.empty()) {
    scheme = scheme_from_json(read_json_file(o.scheme_path), instance);
  } else {
    scheme = design_transmissions(instance, allocation_of(o, instance, err), design_options_of(o));
  }
  if (o.seeds == 0) throw std::invalid_argument("--seeds must be positive");
  Sink sink(o.output_path, out);
  std::size_t passed = 0;
  for (std::size_t k = 0; k < o.seeds; ++k) {
    const auto seed = o.seed + k;
    const SimulationResult result = simulate_exchange(*scheme, seed);
    if (result.success()) {
      ++passed;
      continue;
    }
    for (const auto& u : result.users) {
      if (!u.recovered) *sink << "seed " << seed << ": user " << u.user << (u.unique ? " decoded wrongly" : " ambiguous") << '\n';
    }
  }
  *sink << "recovered " << passed << "/" << o.seeds << '\n';
  return passed == o.seeds ? kOk : kFailed;
}

int cmd_graph(const Options& o, std::ostream& out, std::ostream& err) {
  const Instance instance = load(o);
  const ChunkAllocation allocation = allocation_of(o, instance, err);
  const MulticastGraph graph = build_multicast_graph(instance, allocation);
  Sink sink(o.output_path, out);
  *sink << graph.to_dot();
  if (o.flows) {
    for (auto r : graph.receivers) {
      *sink << "// max-flow S -> " << graph.nodes[r] << " = " << max_flow(graph, graph.source, r) << '\n';
    }
  }
  return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Data exchange with helpers: rate optimization and linear network code design", "dexchange"};
  app.require_subcommand(1);
  Options o;

  auto add_instance = [&](CLI::App* sub) {
    sub->add_option("instance", o.instance_path, "Instance JSON file")->required();
    sub->add_option("--field-char", o.field_char, "Override the field characteristic");
    sub->add_option("--field-degree", o.field_degree, "Override the field extension degree");
    sub->add_option("-o,--output", o.output_path, "Write the result here instead of stdout");
  };
  auto add_solver = [&](CLI::App* sub) {
    sub->add_option("--max-iters", o.max_iters, "Iteration cap")->check(CLI::PositiveNumber);
    sub->add_option("--gap-tol", o.gap_tol, "Stop when primal - dual <= this");
    sub->add_option("--theta", o.theta, "Step size: 'a,b,c' for a/(b+c n), or 'pow:a' for 1/n^a");
    sub->add_option("--step-scale", o.step_scale, "Multiplier on every step (0: 4 max(alpha) / H(all))");
    sub->add_option("--tie-break", o.tie_break, "Comma-separated terminal order for equal weights");
  };
  auto add_rates = [&](CLI::App* sub) {
    sub->add_option("--rates", o.rates, "Comma-separated rates, e.g. 0,1/2,1");
    sub->add_option("--solution", o.solution_path, "Solution JSON from 'solve'");
  };
  auto add_design = [&](CLI::App* sub) {
    sub->add_option("--max-denominator", o.max_denominator, "Largest chunk factor L")->check(CLI::PositiveNumber);
    sub->add_option("--ext-degree", o.ext_degree, "Coding field extension degree (0: automatic)");
    sub->add_option("--seed", o.seed, "Random seed");
    sub->add_option("--max-attempts", o.max_attempts, "Random draws before giving up")->check(CLI::PositiveNumber);
  };

  auto* solve_cmd = app.add_subcommand("solve", "Run the dual subgradient solver");
  add_instance(solve_cmd);
  add_solver(solve_cmd);
  solve_cmd->add_option("--trace", o.trace_path, "Write per-iteration JSON lines here");

  auto* oracle_cmd = app.add_subcommand("oracle", "Solve the cut-set LP exactly");
  add_instance(oracle_cmd);
  oracle_cmd->add_flag("--json", o.json, "Emit JSON");

  auto* verify_cmd = app.add_subcommand("verify", "Check a rate vector against every cut constraint");
  add_instance(verify_cmd);
  add_rates(verify_cmd);

  auto* codegen_cmd = app.add_subcommand("codegen", "Design and verify a random linear code");
  add_instance(codegen_cmd);
  add_solver(codegen_cmd);
  add_rates(codegen_cmd);
  add_design(codegen_cmd);

  auto* simulate_cmd = app.add_subcommand("simulate", "Simulate transmission and decoding");
  add_instance(simulate_cmd);
  add_solver(simulate_cmd);
  add_rates(simulate_cmd);
  add_design(simulate_cmd);
  simulate_cmd->add_option("--scheme", o.scheme_path, "Scheme JSON from 'codegen'");
  simulate_cmd->add_option("--seeds", o.seeds, "Number of independent packet draws");

  auto* graph_cmd = app.add_subcommand("graph", "Emit the multicast network in DOT");
  add_instance(graph_cmd);
  add_solver(graph_cmd);
  add_rates(graph_cmd);
  graph_cmd->add_option("--max-denominator", o.max_denominator, "Largest chunk factor L")
      ->check(CLI::PositiveNumber);
  graph_cmd->add_flag("--flows", o.flows, "Append max-flow values as DOT comments");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (solve_cmd->parsed()) return cmd_solve(o, out, err);
    if (oracle_cmd->parsed()) return cmd_oracle(o, out, err);
    if (verify_cmd->parsed()) return cmd_verify(o, out, err);
    if (codegen_cmd->parsed()) return cmd_codegen(o, out, err);
    if (simulate_cmd->parsed()) return cmd_simulate(o, out, err);
    if (graph_cmd->parsed()) return cmd_graph(o, out, err);
  } catch (const InfeasibleInstance& e) {
    err << "infeasible: " << e.what() << '\n';
    return kFailed;
  } catch (const GuardExceeded& e) {
    err << "too large: " << e.what() << '\n';
    return kUsage;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::domain_error& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    err << "failed: " << e.what() << '\n';
    return kFailed;
  }
  return kUsage;
}

}  // namespace dex::cli
