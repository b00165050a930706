#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "numpmp/gen.hpp"
#include "numpmp/model.hpp"
#include "numpmp/oracle.hpp"
#include "numpmp/solver.hpp"
#include "numpmp/warm.hpp"

namespace numpmp {
namespace {

Problem bipartite_fixture() {
  return build_problem({Stream{0, StreamKind::Log, "", 1.0, {0}},
                        Stream{1, StreamKind::Log, "", 1.0, {1, 2}},
                        Stream{2, StreamKind::Log, "", 1.0, {1}}},
                       {1.0, 1.0, 1.0});
}

// Straight transcription of the plain message passing recursion with a
// per-terminal price vector: p <- prox(p - pbar - u), then pbar, then
// u <- u + pbar. No over-relaxation, fixed rho.
struct PlainPmp {
  explicit PlainPmp(const Problem& problem, double rho_in)
      : prob(problem), rho(rho_in) {
    const TerminalLayout& L = prob.layout;
    p.assign(static_cast<std::size_t>(L.total_terminals), 0.0);
    u.assign(static_cast<std::size_t>(L.total_terminals), 0.0);
    p_bar.assign(static_cast<std::size_t>(prob.m), 0.0);
  }

  void step() {
    const TerminalLayout& L = prob.layout;
    std::vector<double> arg(p.size());
    for (std::size_t t = 0; t < p.size(); ++t)
      arg[t] = p[t] - p_bar[static_cast<std::size_t>(L.terminal_link[t])] - u[t];
    for (const Stream& s : prob.streams) {
      const std::int64_t off = L.stream_offsets[static_cast<std::size_t>(s.id)];
      const std::int64_t tau = std::int64_t(s.route.size());
      double z_sum = 0.0;
      for (std::int64_t i = 0; i < tau; ++i)
        z_sum += arg[static_cast<std::size_t>(off + i)];
      double x = s.kind == StreamKind::Log
                     ? prox_log_scalar(z_sum, s.weight, rho, tau)
                     : prox_linear_nonneg_scalar(z_sum, s.weight, rho, tau);
      for (std::int64_t i = 0; i < tau; ++i)
        p[static_cast<std::size_t>(off + i)] = x;
    }
    for (std::int64_t l = 0; l < prob.m; ++l) {
      const std::int64_t t = L.slack_terminal(l);
      p[static_cast<std::size_t>(t)] =
          std::max(arg[static_cast<std::size_t>(t)],
                   -prob.capacities[static_cast<std::size_t>(l)]);
    }
    compute_link_averages(p, L, 1, p_bar);
    for (std::size_t t = 0; t < u.size(); ++t)
      u[t] += p_bar[static_cast<std::size_t>(L.terminal_link[t])];
  }

  const Problem& prob;
  double rho;
  std::vector<double> p, u, p_bar;
};

SolverConfig plain_config(double rho0) {
  SolverConfig cfg;
  cfg.alpha = 1.0;
  cfg.rho0 = rho0;
  cfg.rho_update_interval = 1000000;  // keep rho fixed
  return cfg;
}

TEST(Solver, SingleLogStreamAnalytic) {
  Problem p = build_problem({Stream{0, StreamKind::Log, "", 1.0, {0}}}, {1.0});
  SolverConfig cfg;
  cfg.eps_abs = 1e-8;
  PmpSolver solver(p, cfg);
  Solution sol = solver.solve();
  EXPECT_EQ(sol.status, SolveStatus::Converged);
  EXPECT_NEAR(sol.x[0], 1.0, 1e-6);
  EXPECT_NEAR(sol.lambda[0], 1.0, 1e-6);
}

TEST(Solver, SingleLinearStreamSaturates) {
  Problem p =
      build_problem({Stream{0, StreamKind::Linear, "", 1.0, {0}}}, {5.0});
  SolverConfig cfg;
  cfg.eps_abs = 1e-8;
  PmpSolver solver(p, cfg);
  Solution sol = solver.solve();
  EXPECT_EQ(sol.status, SolveStatus::Converged);
  EXPECT_NEAR(sol.x[0], 5.0, 1e-5);
  EXPECT_NEAR(sol.objective, 5.0, 1e-5);
}

TEST(Solver, BipartiteFixtureMatchesOracle) {
  Problem p = bipartite_fixture();
  SolverConfig cfg;
  cfg.eps_abs = 1e-7;
  PmpSolver solver(p, cfg);
  Solution sol = solver.solve();
  ASSERT_EQ(sol.status, SolveStatus::Converged);
  OracleSolution ora = solve_barrier(p, 1e-8);
  for (int j = 0; j < 3; ++j)
    EXPECT_NEAR(sol.x[j], ora.x[j], 1e-4 * std::abs(ora.x[j]));
}

TEST(Solver, FirstIterationFromZeroState) {
  // Single log stream, w=1, c=1, rho=1, alpha=1: the prox sees 0 and
  // returns sqrt(4)/2 = 1; the slack projection returns max(0, -1) = 0.
  Problem p = build_problem({Stream{0, StreamKind::Log, "", 1.0, {0}}}, {1.0});
  PmpSolver solver(p, plain_config(1.0));
  SolverState st = solver.cold_state();
  solver.step(st);
  EXPECT_EQ(st.iter, 1);
  EXPECT_DOUBLE_EQ(st.p[0], 1.0);
  EXPECT_DOUBLE_EQ(st.p[1], 0.0);
  EXPECT_DOUBLE_EQ(st.p_bar[0], 0.5);
  EXPECT_DOUBLE_EQ(st.z[0], 0.5);
  EXPECT_DOUBLE_EQ(st.z[1], -0.5);
  EXPECT_DOUBLE_EQ(st.price[0], 0.5);
}

TEST(Solver, Alpha1MatchesPlainTranscription) {
  for (double rho0 : {1.0, 2.0}) {
    Problem p = bipartite_fixture();
    PmpSolver solver(p, plain_config(rho0));
    SolverState st = solver.cold_state();
    PlainPmp ref(p, rho0);
    for (int iter = 0; iter < 100; ++iter) {
      solver.step(st);
      ref.step();
      for (std::size_t t = 0; t < ref.p.size(); ++t)
        ASSERT_EQ(st.p[t], ref.p[t]) << "iter " << iter << " terminal " << t;
      // engine prices are per link and unscaled: price = rho * u, and the
      // per-terminal reference stays uniform across each link's terminals
      for (std::size_t t = 0; t < ref.u.size(); ++t) {
        std::int32_t link = p.layout.terminal_link[t];
        ASSERT_EQ(st.price[static_cast<std::size_t>(link)], rho0 * ref.u[t])
            << "iter " << iter << " terminal " << t;
      }
    }
  }
}

TEST(Solver, FixedPointIsStationary) {
  // Hand-built fixed point of the single-stream instance: x* = 1, s* = 0,
  // price = lambda* = 1.
  Problem p = build_problem({Stream{0, StreamKind::Log, "", 1.0, {0}}}, {1.0});
  for (double alpha : {1.0, 1.6}) {
    SolverConfig cfg;
    cfg.alpha = alpha;
    cfg.rho_update_interval = 1000000;
    PmpSolver solver(p, cfg);
    SolverState st = solver.cold_state();
    st.p = {1.0, -1.0};
    st.z = {1.0, -1.0};
    st.p_bar = {0.0};
    st.price = {1.0};
    auto [r, s] = solver.step(st);
    EXPECT_NEAR(st.p[0], 1.0, 1e-14);
    EXPECT_NEAR(st.p[1], -1.0, 1e-14);
    EXPECT_NEAR(st.z[0], 1.0, 1e-14);
    EXPECT_NEAR(st.z[1], -1.0, 1e-14);
    EXPECT_NEAR(st.price[0], 1.0, 1e-14);
    EXPECT_NEAR(r, 0.0, 1e-14);
    EXPECT_NEAR(s, 0.0, 1e-14);
  }
}

TEST(Solver, NonFiniteStateReportsIterationNumber) {
  // An overflowing weight drives the first prox to infinity.
  Problem p =
      build_problem({Stream{0, StreamKind::Log, "", 1e308, {0}}}, {1.0});
  SolverConfig cfg;
  cfg.rho0 = 1e-8;
  PmpSolver solver(p, cfg);
  try {
    solver.solve();
    FAIL() << "expected SolverError";
  } catch (const SolverError& e) {
    EXPECT_NE(std::string(e.what()).find("iteration 1"), std::string::npos);
  }
}

TEST(Solver, LinkWithOnlySlackAveragesToItsFlow) {
  // Link 1 carries nothing but its slack terminal, so |l| = 1 and the
  // average equals the slack flow itself.
  Problem p =
      build_problem({Stream{0, StreamKind::Log, "", 1.0, {0}}}, {1.0, 3.0});
  const TerminalLayout& L = p.layout;
  ASSERT_EQ(L.link_counts[1], 1);
  std::vector<double> flows(static_cast<std::size_t>(L.total_terminals), 0.0);
  flows[static_cast<std::size_t>(L.slack_terminal(1))] = -3.0;
  std::vector<double> p_bar = compute_link_averages(flows, L);
  EXPECT_DOUBLE_EQ(p_bar[1], -3.0);
}

TEST(Solver, ComputeLinkAveragesExamples) {
  Problem p = bipartite_fixture();
  const TerminalLayout& L = p.layout;
  // Terminal order: s0:[0], s1:[1,2], s2:[1], slacks for links 0,1,2.
  // Link 1 carries terminals of streams 1 and 2 plus its slack.
  std::vector<double> flows(static_cast<std::size_t>(L.total_terminals), 0.0);
  flows[1] = 1.0;   // stream 1 on link 1
  flows[3] = 2.0;   // stream 2 on link 1
  flows[static_cast<std::size_t>(L.slack_terminal(1))] = -3.0;
  std::vector<double> p_bar = compute_link_averages(flows, L);
  EXPECT_DOUBLE_EQ(p_bar[1], 0.0);  // balanced link

  std::fill(flows.begin(), flows.end(), 0.0);
  flows[static_cast<std::size_t>(L.slack_terminal(2))] = -1.0;
  p_bar = compute_link_averages(flows, L);
  EXPECT_DOUBLE_EQ(p_bar[2], -0.5);  // single slack flow averaged over |l|=2

  std::fill(flows.begin(), flows.end(), 0.0);
  p_bar = compute_link_averages(flows, L);
  for (double v : p_bar) EXPECT_EQ(v, 0.0);
}

TEST(Solver, ResidualDefinitions) {
  // Single link with |l| = 2: p_bar = 3 replicated gives ||r|| = 3*sqrt(2).
  Problem p = build_problem({Stream{0, StreamKind::Log, "", 1.0, {0}}}, {1.0});
  SolverState cur;
  cur.p = {4.0, 2.0};
  cur.z = {1.0, -1.0};
  cur.p_bar = compute_link_averages(cur.p, p.layout);
  cur.price = {0.0};
  cur.rho = 1.0;
  SolverState prev = cur;
  auto [r, s] = residuals(cur, prev, p.layout);
  EXPECT_DOUBLE_EQ(cur.p_bar[0], 3.0);
  EXPECT_DOUBLE_EQ(r, 3.0 * std::sqrt(2.0));
  EXPECT_DOUBLE_EQ(s, 0.0);  // identical consecutive states

  prev.z = {0.0, -1.0};
  cur.rho = 2.0;
  auto [r2, s2] = residuals(cur, prev, p.layout);
  EXPECT_DOUBLE_EQ(s2, 2.0);  // rho * (z - z_prev)
  EXPECT_DOUBLE_EQ(r2, r);
}

TEST(Solver, StepResidualsMatchFreeFunction) {
  GenSpec spec;
  spec.m = 40;
  spec.n = 20;
  spec.avg_links_per_stream = 4.0;
  spec.kind = GenKind::Mixed;
  spec.seed = 9;
  Problem p = gen_uncongested(spec);
  PmpSolver solver(p, SolverConfig{});
  SolverState st = solver.cold_state();
  for (int iter = 0; iter < 20; ++iter) {
    SolverState prev = st;
    auto [r, s] = solver.step(st);
    auto [r_free, s_free] = residuals(st, prev, p.layout);
    ASSERT_EQ(r, r_free);
    ASSERT_EQ(s, s_free);
  }
}

TEST(Solver, TerminationFormula) {
  TerminalLayout layout;
  layout.total_terminals = 100;
  SolverConfig cfg;
  cfg.eps_abs = 1e-5;  // eps_tol = 1e-4
  EXPECT_TRUE(check_termination(9e-5, 9e-5, layout, cfg));
  EXPECT_FALSE(check_termination(1.1e-4, 9e-5, layout, cfg));
  EXPECT_FALSE(check_termination(9e-5, 1.1e-4, layout, cfg));
  EXPECT_TRUE(check_termination(0.0, 0.0, layout, cfg));
  EXPECT_FALSE(check_termination(1e-4, 0.0, layout, cfg));  // strict
}

TEST(Solver, RhoUpdateBranchesPreserveUnscaledPrice) {
  SolverConfig cfg;  // mu = 2, gamma = 1.1
  SolverState st;
  st.rho = 1.0;
  st.price = {3.3, -0.7};
  const std::vector<double> y_before = st.price;
  const double u_before = st.u(0);

  update_rho(st, 10.0, 1.0, cfg);  // r > mu*s -> rho *= gamma
  EXPECT_DOUBLE_EQ(st.rho, 1.1);
  EXPECT_EQ(st.price, y_before);  // y = rho*u bit-identical
  EXPECT_NEAR(st.u(0), u_before / 1.1, 1e-15);

  update_rho(st, 1.0, 10.0, cfg);  // s > mu*r -> rho /= gamma
  EXPECT_DOUBLE_EQ(st.rho, 1.0);
  EXPECT_EQ(st.price, y_before);

  update_rho(st, 1.0, 1.0, cfg);  // balanced -> unchanged
  EXPECT_DOUBLE_EQ(st.rho, 1.0);
  EXPECT_EQ(st.price, y_before);
}

TEST(Solver, RecoverDualsClampsForReporting) {
  SolverState st;
  st.rho = 2.0;
  st.price = {-0.5, 2.0, 0.0};
  EXPECT_EQ(recover_duals(st), (std::vector<double>{0.0, 2.0, 0.0}));
}

TEST(Solver, ObjectiveExamples) {
  Problem p1 = build_problem({Stream{0, StreamKind::Log, "", 2.0, {0}}}, {5.0});
  EXPECT_NEAR(objective(p1, {std::exp(1.0)}), 2.0, 1e-12);

  Problem p2 = build_problem({Stream{0, StreamKind::Linear, "", 1.0, {0}},
                              Stream{1, StreamKind::Linear, "", 2.0, {1}}},
                             {10.0, 10.0});
  EXPECT_DOUBLE_EQ(objective(p2, {3.0, 4.0}), 11.0);

  Problem p3 = build_problem({Stream{0, StreamKind::Log, "", 1.0, {0}},
                              Stream{1, StreamKind::Linear, "", 1.0, {1}}},
                             {10.0, 10.0});
  EXPECT_DOUBLE_EQ(objective(p3, {1.0, 1.0}), 1.0);
  EXPECT_THROW(objective(p3, {0.0, 1.0}), std::domain_error);
  EXPECT_THROW(objective(p3, {1.0}), std::invalid_argument);
}

TEST(Solver, WarmStartFromOptimumConvergesImmediately) {
  GenSpec spec;
  spec.m = 80;
  spec.n = 40;
  spec.avg_links_per_stream = 4.0;
  spec.seed = 21;
  Problem p = gen_uncongested(spec);
  SolverConfig cfg;
  cfg.eps_abs = 1e-7;
  PmpSolver solver(p, cfg);
  Solution cold = solver.solve();
  ASSERT_EQ(cold.status, SolveStatus::Converged);

  WarmStart warm{cold.x, cold.lambda_raw, cold.rho_final};
  Solution rerun = solver.solve(warm);
  EXPECT_EQ(rerun.status, SolveStatus::Converged);
  EXPECT_LE(rerun.iterations, 5);
}

TEST(Solver, WarmStartValidation) {
  Problem p = bipartite_fixture();
  PmpSolver solver(p, SolverConfig{});
  EXPECT_THROW(solver.warm_state(WarmStart{{1.0, 1.0}, {}, 0.0}),
               std::invalid_argument);
  EXPECT_THROW(solver.warm_state(WarmStart{{1.0, 0.0, 1.0}, {}, 0.0}),
               std::domain_error);  // log stream needs x0 > 0
  EXPECT_THROW(solver.warm_state(WarmStart{{1.0, 1.0, 1.0}, {0.1}, 0.0}),
               std::invalid_argument);  // price length
}

TEST(Solver, WarmStartSlackFlows) {
  // Per-link slack flows are s - c with s = max(c - Rx0, 0).
  Problem p = bipartite_fixture();
  std::vector<double> x0{0.25, 0.5, 0.75};
  SolverState st = warm_start_from(x0, p, 1.0);
  const TerminalLayout& L = p.layout;
  EXPECT_DOUBLE_EQ(st.p[static_cast<std::size_t>(L.slack_terminal(0))], -0.25);
  EXPECT_DOUBLE_EQ(st.p[static_cast<std::size_t>(L.slack_terminal(1))], -1.0);
  EXPECT_DOUBLE_EQ(st.p[static_cast<std::size_t>(L.slack_terminal(2))], -0.5);
  // copies are p - pbar and the stored average is consistent
  for (std::int64_t t = 0; t < L.total_terminals; ++t)
    EXPECT_DOUBLE_EQ(
        st.z[static_cast<std::size_t>(t)],
        st.p[static_cast<std::size_t>(t)] -
            st.p_bar[static_cast<std::size_t>(L.terminal_link[t])]);
  // over-saturated link 1 (load 1.25 > c = 1) clamps s at 0
}

TEST(Solver, NonBindingLinkDualVanishes) {
  // One stream over two links, c = (1, 5): only link 0 binds.
  Problem p =
      build_problem({Stream{0, StreamKind::Log, "", 1.0, {0, 1}}}, {1.0, 5.0});
  SolverConfig cfg;
  cfg.eps_abs = 1e-8;
  PmpSolver solver(p, cfg);
  Solution sol = solver.solve();
  ASSERT_EQ(sol.status, SolveStatus::Converged);
  EXPECT_NEAR(sol.x[0], 1.0, 1e-5);
  EXPECT_NEAR(sol.lambda[0], 1.0, 1e-3);
  EXPECT_NEAR(sol.lambda[1], 0.0, 1e-3);
}

TEST(Solver, MaxItersStatusIsReturnedNotThrown) {
  Problem p = bipartite_fixture();
  SolverConfig cfg;
  cfg.max_iters = 3;
  cfg.eps_abs = 1e-12;
  PmpSolver solver(p, cfg);
  Solution sol = solver.solve();
  EXPECT_EQ(sol.status, SolveStatus::MaxIters);
  EXPECT_EQ(sol.iterations, 3);
}

TEST(Solver, TraceContract) {
  GenSpec spec;
  spec.m = 60;
  spec.n = 30;
  spec.seed = 4;
  Problem p = gen_uncongested(spec);
  SolverConfig cfg;
  cfg.eps_abs = 1e-6;
  cfg.trace_every = 10;
  PmpSolver solver(p, cfg);
  Solution sol = solver.solve();
  ASSERT_FALSE(sol.trace.empty());
  for (std::size_t i = 1; i < sol.trace.size(); ++i)
    EXPECT_LT(sol.trace[i - 1].iter, sol.trace[i].iter);
  // final row always reflects the terminal residuals exactly
  EXPECT_EQ(sol.trace.back().iter, sol.iterations);
  EXPECT_EQ(sol.trace.back().r_norm, sol.r_norm);
  EXPECT_EQ(sol.trace.back().s_norm, sol.s_norm);
  for (std::size_t i = 0; i + 1 < sol.trace.size(); ++i)
    EXPECT_EQ(sol.trace[i].iter % 10, 0);
}

TEST(Solver, ConvergedRunsAreFeasibleWithinTolerance) {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    GenSpec spec;
    spec.m = 100;
    spec.n = 50;
    spec.avg_links_per_stream = 5.0;
    spec.kind = GenKind::Mixed;
    spec.weights = WeightDist::uniform(0.5, 1.5);
    spec.seed = seed;
    Problem p = gen_uncongested(spec);
    SolverConfig cfg;
    cfg.eps_abs = 1e-6;
    PmpSolver solver(p, cfg);
    Solution sol = solver.solve();
    ASSERT_EQ(sol.status, SolveStatus::Converged);
    const double eps_tol =
        cfg.eps_abs * std::sqrt(double(p.layout.total_terminals));
    std::vector<double> load(static_cast<std::size_t>(p.m), 0.0);
    for (const Stream& s : p.streams)
      for (std::int32_t link : s.route)
        load[static_cast<std::size_t>(link)] +=
            sol.x[static_cast<std::size_t>(s.id)];
    for (std::int64_t i = 0; i < p.m; ++i) {
      double violation = load[static_cast<std::size_t>(i)] +
                         sol.s[static_cast<std::size_t>(i)] -
                         p.capacities[static_cast<std::size_t>(i)];
      EXPECT_LE(std::abs(violation), 10.0 * eps_tol);
    }
    for (double xj : sol.x) EXPECT_GE(xj, -cfg.eps_abs);
    for (double li : sol.lambda) EXPECT_GE(li, 0.0);
  }
}

TEST(Solver, ComplementarySlackness) {
  for (std::uint64_t seed : {41u, 42u}) {
    GenSpec spec;
    spec.m = 120;
    spec.n = 60;
    spec.avg_links_per_stream = 5.0;
    spec.seed = seed;
    Problem p = gen_uncongested(spec);
    SolverConfig cfg;
    cfg.eps_abs = 1e-6;
    PmpSolver solver(p, cfg);
    Solution sol = solver.solve();
    ASSERT_EQ(sol.status, SolveStatus::Converged);
    double cross = 0.0, lambda_l1 = 0.0, c_max = 0.0;
    for (std::int64_t i = 0; i < p.m; ++i) {
      cross += sol.lambda[static_cast<std::size_t>(i)] *
               sol.s[static_cast<std::size_t>(i)];
      lambda_l1 += sol.lambda[static_cast<std::size_t>(i)];
      c_max = std::max(c_max, p.capacities[static_cast<std::size_t>(i)]);
    }
    EXPECT_LE(cross, 1e-2 * lambda_l1 * c_max);
  }
}

TEST(Solver, ThreadCountDoesNotChangeResults) {
  GenSpec spec;
  spec.m = 150;
  spec.n = 75;
  spec.seed = 33;
  Problem p = gen_uncongested(spec);
  SolverConfig cfg1;
  cfg1.eps_abs = 1e-6;
  cfg1.threads = 1;
  SolverConfig cfg2 = cfg1;
  cfg2.threads = 2;
  PmpSolver s1(p, cfg1), s2(p, cfg2);
  Solution a = s1.solve(), b = s2.solve();
  EXPECT_EQ(a.iterations, b.iterations);
  EXPECT_EQ(a.x, b.x);
  EXPECT_EQ(a.lambda, b.lambda);
  EXPECT_EQ(a.r_norm, b.r_norm);
  EXPECT_EQ(a.s_norm, b.s_norm);
}

TEST(Solver, ExtensionStreamsSolveThroughRegistry) {
  ExtensionRegistry registry;
  ProxExtension ext;
  ext.name = "alpha2";
  ext.derivative = [](double x, double w) { return w / (x * x); };
  ext.domain_lb = 0.0;
  ext.value = [](double x, double w) { return -w / x; };
  registry.add(ext);

  // alpha2 stream alone on one link saturates it: x* = c, lambda = w/c^2.
  Problem p = build_problem(
      {Stream{0, StreamKind::Extension, "alpha2", 1.0, {0}}}, {2.0});
  SolverConfig cfg;
  cfg.eps_abs = 1e-8;
  PmpSolver solver(p, cfg, &registry);
  Solution sol = solver.solve();
  ASSERT_EQ(sol.status, SolveStatus::Converged);
  EXPECT_NEAR(sol.x[0], 2.0, 1e-5);
  EXPECT_NEAR(sol.lambda[0], 0.25, 1e-4);
  EXPECT_NEAR(sol.objective, -0.5, 1e-4);

  // unregistered extension is rejected up front
  Problem q = build_problem(
      {Stream{0, StreamKind::Extension, "mystery", 1.0, {0}}}, {1.0});
  EXPECT_THROW(PmpSolver(q, cfg, &registry), SolverError);
}

TEST(Solver, WarmStartRecipesAfterPerturbation) {
  GenSpec spec;
  spec.m = 400;
  spec.n = 200;
  spec.avg_links_per_stream = 6.0;
  spec.seed = 55;
  Problem base = gen_uncongested(spec);
  SolverConfig cfg;
  cfg.eps_abs = 1e-6;
  PmpSolver base_solver(base, cfg);
  Solution sol0 = base_solver.solve();
  ASSERT_EQ(sol0.status, SolveStatus::Converged);

  Problem degraded = degrade(base, 0.25, 0.5, 56);
  WarmStart dw = warm_start_after_degrade(base, degraded, sol0);
  EXPECT_EQ(std::int64_t(dw.x0.size()), degraded.n);
  EXPECT_EQ(std::int64_t(dw.price.size()), degraded.m);
  EXPECT_GE(dw.rho, sol0.rho_final);  // worst cut raises the carried penalty
  PmpSolver deg_solver(degraded, cfg);
  Solution warm = deg_solver.solve(dw);
  EXPECT_EQ(warm.status, SolveStatus::Converged);

  auto [pruned, map] = fail_and_prune(base, 0.25, 57);
  WarmStart pw = warm_start_after_prune(pruned, map, sol0);
  EXPECT_EQ(std::int64_t(pw.x0.size()), pruned.n);
  EXPECT_EQ(std::int64_t(pw.price.size()), pruned.m);
  for (double x : pw.x0) EXPECT_GT(x, 0.0);  // log rates stay positive
  PmpSolver pruned_solver(pruned, cfg);
  Solution pwarm = pruned_solver.solve(pw);
  EXPECT_EQ(pwarm.status, SolveStatus::Converged);
}

TEST(Solver, ConfigValidation) {
  Problem p = bipartite_fixture();
  SolverConfig bad;
  bad.alpha = 2.5;
  EXPECT_THROW(PmpSolver(p, bad), std::invalid_argument);
  bad = SolverConfig{};
  bad.eps_abs = 0.0;
  EXPECT_THROW(PmpSolver(p, bad), std::invalid_argument);
  bad = SolverConfig{};
  bad.mu = 1.0;
  EXPECT_THROW(PmpSolver(p, bad), std::invalid_argument);
}

}  // namespace
}  // namespace numpmp
