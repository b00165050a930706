// numpmp command line: instance generation, solving, perturbation,
// statistics, benchmarking, and transit route reports.
//
// Exit codes: 0 converged / success, 2 solver stopped early (max iterations
// or time limit), 1 usage, IO, or validation errors.

#include <chrono>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "numpmp/numpmp.hpp"

namespace {

using namespace numpmp;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitNotConverged = 2;

struct GenerateArgs {
  bool uncongested = false;
  bool congested = false;
  bool transit = false;
  std::int64_t m = 0;
  std::int64_t n = 0;
  double avg = 10.0;
  std::string kind = "log";
  double weight = 1.0;
  std::vector<double> weight_uniform;
  std::uint64_t seed = 0;
  std::string out;
  bool binary = false;
  bool text = false;
  double hot_link_frac = 0.001;
  double hot_stream_frac = 0.10;
  // transit
  std::int32_t stations = 0;
  std::int32_t time_bins = 0;
  double bin_minutes = 5.0;
  std::int64_t edges = 0;
  std::int64_t od_pairs = 0;
  std::int32_t routes_per_od = 1;
  std::int32_t departures = 1;
  double seats = 50.0;
  std::string metadata_out;
};

double mean_route_length(const Problem& p) {
  double total = 0.0;
  for (const Stream& s : p.streams) total += double(s.route.size());
  return total / double(p.n);
}

void print_problem_summary(const Problem& p) {
  std::cout << "m=" << p.m << " n=" << p.n << " nnz=" << p.layout.nnz
            << " mean_route_length=" << mean_route_length(p) << "\n";
}

int cmd_generate(const GenerateArgs& args) {
  int modes = int(args.uncongested) + int(args.congested) + int(args.transit);
  if (modes != 1)
    throw CLI::ValidationError(
        "generate", "pick exactly one of --uncongested, --congested, --transit");
  if (args.out.empty())
    throw CLI::ValidationError("generate", "-o/--out is required");
  ProblemEncoding enc = ProblemEncoding::Auto;
  if (args.binary) enc = ProblemEncoding::Binary;
  if (args.text) enc = ProblemEncoding::Text;

  if (args.transit) {
    TransitSpec spec;
    spec.stations = args.stations;
    spec.time_bins = args.time_bins;
    spec.bin_minutes = args.bin_minutes;
    spec.spatial_edges = args.edges;
    spec.od_pairs = args.od_pairs;
    spec.routes_per_od = args.routes_per_od;
    spec.departures_per_route = args.departures;
    spec.seats = args.seats;
    spec.seed = args.seed;
    auto [problem, meta] = gen_transit(spec);
    write_problem(problem, args.out, enc);
    if (!args.metadata_out.empty()) write_transit_metadata(meta, args.metadata_out);
    for (const std::string& w : meta.warnings)
      std::cerr << "warning: " << w << "\n";
    print_problem_summary(problem);
    std::cout << "transit: edges=" << meta.edges.size()
              << " ods=" << meta.ods.size()
              << " dropped_streams=" << meta.dropped_streams << "\n";
    return kExitOk;
  }

  if (args.m < 1)
    throw CLI::ValidationError("generate", "-m is required and must be >= 1");
  GenSpec spec;
  spec.m = args.m;
  spec.n = args.n;
  spec.avg_links_per_stream = args.avg;
  if (args.kind == "log")
    spec.kind = GenKind::Log;
  else if (args.kind == "lin")
    spec.kind = GenKind::Linear;
  else if (args.kind == "mixed")
    spec.kind = GenKind::Mixed;
  else
    throw CLI::ValidationError("generate", "--kind must be log, lin, or mixed");
  if (!args.weight_uniform.empty()) {
    if (args.weight_uniform.size() != 2)
      throw CLI::ValidationError("generate", "--weight-uniform takes two values");
    spec.weights = WeightDist::uniform(args.weight_uniform[0], args.weight_uniform[1]);
  } else {
    spec.weights = WeightDist::constant(args.weight);
  }
  spec.seed = args.seed;

  Problem problem =
      args.congested
          ? gen_congested(spec, args.hot_link_frac, args.hot_stream_frac)
          : gen_uncongested(spec);
  write_problem(problem, args.out, enc);
  print_problem_summary(problem);
  if (args.congested) {
    std::int64_t hot =
        std::int64_t(std::ceil(args.hot_link_frac * double(problem.m)));
    auto per_link = streams_per_link(problem);
    std::int64_t max_deg = 0;
    for (std::int64_t d : per_link) max_deg = std::max(max_deg, d);
    std::cout << "congested: hot_links=" << hot
              << " max_streams_per_link=" << max_deg << "\n";
  }
  return kExitOk;
}

struct SolveArgs {
  std::string problem_path;
  std::string out;
  std::string trace_path;
  std::string warm_path;
  std::string prune_map_path;
  SolverConfig config;
};

int cmd_solve(const SolveArgs& args) {
  Problem problem = read_problem(args.problem_path);
  PmpSolver solver(problem, args.config);

  Solution sol;
  if (!args.warm_path.empty()) {
    SolutionFileData prior = read_solution(args.warm_path);
    WarmStart warm;
    warm.rho = prior.rho_final;
    if (!args.prune_map_path.empty()) {
      PruneMap map = read_prune_map(args.prune_map_path);
      warm.x0 = map.project_streams(prior.x);
      warm.price = map.project_links(prior.lambda);
    } else {
      warm.x0 = prior.x;
      warm.price = prior.lambda;
    }
    if (std::int64_t(warm.x0.size()) != problem.n)
      throw ValidationError(
          "warm-start solution does not match the problem (" +
          std::to_string(warm.x0.size()) + " rates for n=" +
          std::to_string(problem.n) + "); pass --prune-map for pruned instances");
    sol = solver.solve(warm);
  } else {
    sol = solver.solve();
  }

  if (!args.out.empty()) write_solution(sol, args.config, problem.m, args.out);
  if (!args.trace_path.empty()) write_trace_csv(sol.trace, args.trace_path);
  std::cout << "status=" << to_string(sol.status)
            << " iterations=" << sol.iterations
            << " objective=" << sol.objective << " r_norm=" << sol.r_norm
            << " s_norm=" << sol.s_norm << " rho=" << sol.rho_final << "\n";
  return sol.status == SolveStatus::Converged ? kExitOk : kExitNotConverged;
}

struct PerturbArgs {
  std::string problem_path;
  std::vector<double> degrade_args;
  double fail_p = -1.0;
  bool fail_set = false;
  std::uint64_t seed = 0;
  std::string out;
  std::string map_out;
};

int cmd_perturb(const PerturbArgs& args) {
  const bool do_degrade = !args.degrade_args.empty();
  if (int(do_degrade) + int(args.fail_set) != 1)
    throw CLI::ValidationError("perturb", "pick exactly one of --degrade, --fail");
  if (args.out.empty())
    throw CLI::ValidationError("perturb", "-o/--out is required");
  Problem problem = read_problem(args.problem_path);
  if (do_degrade) {
    if (args.degrade_args.size() != 2)
      throw CLI::ValidationError("perturb", "--degrade takes <p> <factor>");
    const double p = args.degrade_args[0], factor = args.degrade_args[1];
    if (!(p >= 0.0 && p < 1.0))
      throw CLI::ValidationError("perturb", "--degrade probability must be in [0, 1)");
    Problem out = degrade(problem, p, factor, args.seed);
    write_problem(out, args.out);
    print_problem_summary(out);
    return kExitOk;
  }
  if (!(args.fail_p >= 0.0 && args.fail_p < 1.0))
    throw CLI::ValidationError("perturb", "--fail probability must be in [0, 1)");
  auto [pruned, map] = fail_and_prune(problem, args.fail_p, args.seed);
  write_problem(pruned, args.out);
  std::string map_path =
      args.map_out.empty() ? args.out + ".prunemap" : args.map_out;
  write_prune_map(map, map_path);
  print_problem_summary(pruned);
  std::cout << "pruned: links " << problem.m << "->" << pruned.m << " streams "
            << problem.n << "->" << pruned.n << " map=" << map_path << "\n";
  return kExitOk;
}

struct StatsArgs {
  std::string problem_path;
  std::string solution_path;
  std::string out_prefix;
  bool utilization = false;
};

int cmd_stats(const StatsArgs& args) {
  if (args.out_prefix.empty())
    throw CLI::ValidationError("stats", "--out-prefix is required");
  if (args.utilization && args.solution_path.empty())
    throw CLI::ValidationError("stats",
                               "--utilization needs --solution <file>");
  Problem problem = read_problem(args.problem_path);

  auto write_csv = [](const Histogram& h, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write '" + path + "'");
    write_histogram_csv(h, out);
  };
  write_csv(int_histogram(route_lengths(problem)),
            args.out_prefix + "_links_per_stream.csv");
  write_csv(int_histogram(streams_per_link(problem)),
            args.out_prefix + "_streams_per_link.csv");
  if (args.utilization) {
    SolutionFileData sol = read_solution(args.solution_path);
    if (sol.n != problem.n || sol.m != problem.m)
      throw ValidationError("solution dimensions do not match the problem");
    std::vector<double> util = link_utilization(problem, sol.x);
    double hi = 1.0;
    for (double u : util) hi = std::max(hi, u);
    write_csv(real_histogram(util, 20, 0.0, hi),
              args.out_prefix + "_utilization.csv");
  }
  std::cout << "wrote histograms with prefix " << args.out_prefix << "\n";
  return kExitOk;
}

struct BenchArgs {
  std::vector<std::int64_t> sizes;
  std::uint64_t seed = 0;
  double avg = 10.0;
  double timeout = 0.0;
  std::string out;
  SolverConfig config;
};

int cmd_bench(const BenchArgs& args) {
  if (args.sizes.empty())
    throw CLI::ValidationError("bench", "--sizes must list at least one size");
  if (args.out.empty())
    throw CLI::ValidationError("bench", "-o/--out is required");
  std::ofstream out(args.out);
  if (!out) throw IoError("cannot write '" + args.out + "'");
  out << "m,n,nnz,iterations,wall_seconds,status\n";
  for (std::size_t i = 0; i < args.sizes.size(); ++i) {
    GenSpec spec;
    spec.m = args.sizes[i];
    spec.avg_links_per_stream = args.avg;
    spec.seed = args.seed + i;
    Problem problem = gen_uncongested(spec);
    SolverConfig config = args.config;
    config.time_limit = args.timeout;
    PmpSolver solver(problem, config);
    const auto start = std::chrono::steady_clock::now();
    Solution sol = solver.solve();
    const double wall =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
            .count();
    const char* status = sol.status == SolveStatus::Converged ? "converged"
                         : sol.status == SolveStatus::TimeLimit ? "dnf"
                                                                : "maxiters";
    out << problem.m << ',' << problem.n << ',' << problem.layout.nnz << ','
        << sol.iterations << ',' << wall << ',' << status << '\n';
    std::cout << "m=" << problem.m << " status=" << status
              << " iterations=" << sol.iterations << " wall=" << wall << "s\n";
  }
  return kExitOk;
}

struct TransitReportArgs {
  std::string solution_path;
  std::string problem_path;
  std::string metadata_path;
  std::int32_t od = 0;
  std::int32_t t0 = 0;
  std::string out;
};

int cmd_transit_report(const TransitReportArgs& args) {
  if (args.out.empty())
    throw CLI::ValidationError("transit-report", "-o/--out is required");
  Problem problem = read_problem(args.problem_path);
  SolutionFileData sol = read_solution(args.solution_path);
  if (sol.n != problem.n || sol.m != problem.m)
    throw ValidationError("solution dimensions do not match the problem");
  TransitMetadata meta = read_transit_metadata(args.metadata_path);
  std::vector<TransitReportRow> rows;
  try {
    rows = transit_report(problem, sol.x, sol.lambda, meta, args.od, args.t0);
  } catch (const std::invalid_argument& e) {
    throw ValidationError(e.what());
  }
  std::ofstream out(args.out);
  if (!out) throw IoError("cannot write '" + args.out + "'");
  out << "stream,od,route,t0,x,pi,lambda_hat_path\n";
  for (const TransitReportRow& row : rows) {
    out << row.stream << ',' << row.od << ',' << row.route << ',' << row.t0
        << ',' << row.x << ',' << row.pi << ',' << '"';
    for (std::size_t i = 0; i < row.lambda_hat.size(); ++i) {
      if (i) out << ' ';
      out << row.lambda_hat[i];
    }
    out << '"' << '\n';
  }
  std::cout << "wrote " << rows.size() << " route rows for od=" << args.od
            << " t0=" << args.t0 << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Proximal message passing solver for network utility maximization"};
  app.require_subcommand(1);

  GenerateArgs gen_args;
  CLI::App* gen = app.add_subcommand("generate", "Generate a problem instance");
  gen->add_flag("--uncongested", gen_args.uncongested, "Random sparse instance");
  gen->add_flag("--congested", gen_args.congested, "Random instance with hot links");
  gen->add_flag("--transit", gen_args.transit, "Time-expanded transit instance");
  gen->add_option("-m,--links", gen_args.m, "Link count");
  gen->add_option("-n,--streams", gen_args.n, "Stream count (default m/2)");
  gen->add_option("--avg", gen_args.avg, "Average links per stream")
      ->check(CLI::PositiveNumber);
  gen->add_option("--kind", gen_args.kind, "Utility kind: log|lin|mixed");
  gen->add_option("--weight", gen_args.weight, "Constant stream weight");
  gen->add_option("--weight-uniform", gen_args.weight_uniform,
                  "Uniform weight range <a> <b>")->expected(2);
  gen->add_option("--seed", gen_args.seed, "Random seed");
  gen->add_option("-o,--out", gen_args.out, "Output problem file");
  gen->add_flag("--binary", gen_args.binary, "Force the binary container");
  gen->add_flag("--text", gen_args.text, "Force the text format");
  gen->add_option("--hot-link-frac", gen_args.hot_link_frac,
                  "Fraction of links made hot");
  gen->add_option("--hot-stream-frac", gen_args.hot_stream_frac,
                  "Fraction of streams attached to each hot link");
  gen->add_option("--stations", gen_args.stations, "Transit: stations");
  gen->add_option("--time-bins", gen_args.time_bins, "Transit: time bins");
  gen->add_option("--bin-minutes", gen_args.bin_minutes, "Transit: bin length");
  gen->add_option("--edges", gen_args.edges, "Transit: spatial edges");
  gen->add_option("--od-pairs", gen_args.od_pairs, "Transit: OD pairs");
  gen->add_option("--routes-per-od", gen_args.routes_per_od,
                  "Transit: routes per OD");
  gen->add_option("--departures-per-route", gen_args.departures,
                  "Transit: departures per route");
  gen->add_option("--seats", gen_args.seats, "Transit: seats per link");
  gen->add_option("--metadata", gen_args.metadata_out,
                  "Transit: metadata sidecar path");

  SolveArgs solve_args;
  CLI::App* solve = app.add_subcommand("solve", "Solve a problem file");
  solve->add_option("problem", solve_args.problem_path, "Problem file")
      ->required();
  solve->add_option("-o,--out", solve_args.out, "Solution file");
  solve->add_option("--eps-abs", solve_args.config.eps_abs, "Absolute tolerance")
      ->check(CLI::PositiveNumber);
  solve->add_option("--rho0", solve_args.config.rho0, "Initial penalty")
      ->check(CLI::PositiveNumber);
  solve->add_option("--alpha", solve_args.config.alpha,
                    "Over-relaxation in [1, 2]")
      ->check(CLI::Range(1.0, 2.0));
  solve->add_option("--mu", solve_args.config.mu, "Residual balance threshold");
  solve->add_option("--gamma", solve_args.config.gamma, "Penalty scale factor");
  solve->add_option("--rho-interval", solve_args.config.rho_update_interval,
                    "Iterations between penalty updates");
  solve->add_option("--max-iters", solve_args.config.max_iters,
                    "Iteration limit");
  solve->add_option("--trace-every", solve_args.config.trace_every,
                    "Trace sampling interval");
  solve->add_option("--threads", solve_args.config.threads,
                    "Data-parallel width (default NUMPMP_THREADS or 1)");
  solve->add_option("--time-limit", solve_args.config.time_limit,
                    "Wall-clock limit in seconds (0 = none)");
  solve->add_option("--trace", solve_args.trace_path, "Residual trace CSV");
  solve->add_option("--warm-start", solve_args.warm_path,
                    "Prior solution file");
  solve->add_option("--prune-map", solve_args.prune_map_path,
                    "Prune map for warm starts across pruning");

  PerturbArgs perturb_args;
  CLI::App* perturb = app.add_subcommand("perturb", "Degrade or fail links");
  perturb->add_option("problem", perturb_args.problem_path, "Problem file")
      ->required();
  perturb->add_option("--degrade", perturb_args.degrade_args,
                      "Capacity degradation <p> <factor>")->expected(2);
  perturb
      ->add_option("--fail", perturb_args.fail_p,
                   "Link failure probability (prunes affected streams)")
      ->expected(1);
  perturb->add_option("--seed", perturb_args.seed, "Random seed");
  perturb->add_option("-o,--out", perturb_args.out, "Output problem file");
  perturb->add_option("--map-out", perturb_args.map_out,
                      "Prune map path (default <out>.prunemap)");

  StatsArgs stats_args;
  CLI::App* stats = app.add_subcommand("stats", "Histogram CSVs for an instance");
  stats->add_option("problem", stats_args.problem_path, "Problem file")
      ->required();
  stats->add_option("--solution", stats_args.solution_path, "Solution file");
  stats->add_option("--out-prefix", stats_args.out_prefix, "CSV path prefix");
  stats->add_flag("--utilization", stats_args.utilization,
                  "Also emit link utilization (needs --solution)");

  BenchArgs bench_args;
  CLI::App* bench = app.add_subcommand("bench", "Generate/solve wall-clock sweep");
  bench->add_option("--sizes", bench_args.sizes, "Comma-separated link counts")
      ->delimiter(',');
  bench->add_option("--seed", bench_args.seed, "Base seed");
  bench->add_option("--avg", bench_args.avg, "Average links per stream");
  bench->add_option("--timeout", bench_args.timeout,
                    "Per-size wall-clock limit in seconds (DNF rows)");
  bench->add_option("--eps-abs", bench_args.config.eps_abs, "Tolerance");
  bench->add_option("--max-iters", bench_args.config.max_iters, "Iteration cap");
  bench->add_option("--threads", bench_args.config.threads, "Threads");
  bench->add_option("-o,--out", bench_args.out, "Output CSV");

  TransitReportArgs report_args;
  CLI::App* report = app.add_subcommand(
      "transit-report", "Route comparison CSV for one OD and departure");
  report->add_option("solution", report_args.solution_path, "Solution file")
      ->required();
  report->add_option("--problem", report_args.problem_path, "Problem file")
      ->required();
  report->add_option("--metadata", report_args.metadata_path,
                     "Transit metadata file")->required();
  report->add_option("--od", report_args.od, "OD pair id")->required();
  report->add_option("--t0", report_args.t0, "Departure bin");
  report->add_option("-o,--out", report_args.out, "Output CSV");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (gen->parsed()) return cmd_generate(gen_args);
    if (solve->parsed()) return cmd_solve(solve_args);
    if (perturb->parsed()) {
      perturb_args.fail_set = perturb->count("--fail") > 0;
      return cmd_perturb(perturb_args);
    }
    if (stats->parsed()) return cmd_stats(stats_args);
    if (bench->parsed()) return cmd_bench(bench_args);
    if (report->parsed()) return cmd_transit_report(report_args);
  } catch (const CLI::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}
