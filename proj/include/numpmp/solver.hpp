#ifndef NUMPMP_SOLVER_HPP_
#define NUMPMP_SOLVER_HPP_

#include <chrono>
#include <cmath>
#include <cstdint>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "numpmp/common.hpp"
#include "numpmp/model.hpp"
#include "numpmp/parallel.hpp"
#include "numpmp/prox.hpp"

namespace numpmp {

struct SolverConfig {
  double eps_abs = 1e-5;
  double rho0 = 1.0;
  double alpha = 1.6;   // over-relaxation, in [1, 2]
  double mu = 2.0;      // residual-balance threshold
  double gamma = 1.1;   // rho scaling factor
  std::int64_t rho_update_interval = 50;
  std::int64_t max_iters = 50000;
  std::int64_t trace_every = 10;
  int threads = 0;           // 0 -> default_threads()
  double time_limit = 0.0;   // wall seconds; 0 disables
};

inline void validate_config(const SolverConfig& c) {
  auto fail = [](const std::string& msg) { throw std::invalid_argument(msg); };
  if (!(c.eps_abs > 0.0)) fail("eps_abs must be > 0");
  if (!(c.rho0 > 0.0)) fail("rho0 must be > 0");
  if (!(c.alpha >= 1.0 && c.alpha <= 2.0)) fail("alpha must be in [1, 2]");
  if (!(c.mu > 1.0)) fail("mu must be > 1");
  if (!(c.gamma > 1.0)) fail("gamma must be > 1");
  if (c.rho_update_interval < 1) fail("rho_update_interval must be >= 1");
  if (c.max_iters < 1) fail("max_iters must be >= 1");
  if (c.trace_every < 1) fail("trace_every must be >= 1");
  if (c.threads < 0) fail("threads must be >= 0");
  if (c.time_limit < 0.0) fail("time_limit must be >= 0");
}

// Per-iteration state. Flows p and copies z live in terminal space; the
// link averages and prices live in link space. The dual is stored as the
// unscaled price y = rho*u (uniform over a link's terminals), so the
// residual-balancing rescale u <- (rho_old/rho_new) u leaves it untouched
// bit for bit; the scaled price is the view u = price/rho.
struct SolverState {
  std::vector<double> p;      // terminal flows, length J
  std::vector<double> z;      // terminal copies, length J
  std::vector<double> p_bar;  // link averages, length m
  std::vector<double> price;  // unscaled link prices y = rho*u, length m
  double rho = 1.0;
  std::int64_t iter = 0;

  double u(std::int64_t link) const {
    return price[static_cast<std::size_t>(link)] / rho;
  }
};

struct TraceRecord {
  std::int64_t iter;
  double r_norm;
  double s_norm;
  double rho;
  double objective;
};

using ConvergenceTrace = std::vector<TraceRecord>;

enum class SolveStatus { Converged, MaxIters, TimeLimit };

inline const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::Converged: return "converged";
    case SolveStatus::MaxIters: return "maxiters";
    case SolveStatus::TimeLimit: return "timelimit";
  }
  return "?";
}

struct Solution {
  std::vector<double> x;           // stream rates, length n
  std::vector<double> s;           // link slacks max(c - Rx, 0), length m
  std::vector<double> lambda;      // shadow prices, clamped at 0
  std::vector<double> lambda_raw;  // unclamped rho*u for diagnostics
  double objective = 0.0;
  SolveStatus status = SolveStatus::MaxIters;
  std::int64_t iterations = 0;
  double r_norm = 0.0;
  double s_norm = 0.0;
  double rho_final = 0.0;
  ConvergenceTrace trace;
};

// Warm-start data: a prior allocation, optionally the prior unscaled link
// prices (lambda/rho scaled back up, i.e. y) and the prior final rho.
struct WarmStart {
  std::vector<double> x0;
  std::vector<double> price;  // empty -> start prices at zero
  double rho = 0.0;           // 0 -> use config rho0
};

// p_bar_l = mean of all terminal flows incident to link l, slack included.
// Segmented reduction over the link-major layout; each link's sum is formed
// in ascending terminal order regardless of threading.
inline void compute_link_averages(const std::vector<double>& p,
                                  const TerminalLayout& layout, int threads,
                                  std::vector<double>& p_bar) {
  const std::int64_t m = std::int64_t(layout.link_counts.size());
  p_bar.resize(static_cast<std::size_t>(m));
  parallel_for(m, threads, [&](std::int64_t lo, std::int64_t hi) {
    for (std::int64_t l = lo; l < hi; ++l) {
      double acc = 0.0;
      for (std::int64_t k = layout.link_offsets[static_cast<std::size_t>(l)];
           k < layout.link_offsets[static_cast<std::size_t>(l) + 1]; ++k)
        acc += p[static_cast<std::size_t>(
            layout.link_terminals[static_cast<std::size_t>(k)])];
      p_bar[static_cast<std::size_t>(l)] =
          acc / layout.link_counts[static_cast<std::size_t>(l)];
    }
  });
}

inline std::vector<double> compute_link_averages(const std::vector<double>& p,
                                                 const TerminalLayout& layout) {
  std::vector<double> p_bar;
  compute_link_averages(p, layout, 1, p_bar);
  return p_bar;
}

// Primal and dual residual norms for consecutive states. r is the link
// average replicated over each link's terminals, so ||r||^2 = sum |l| pbar^2;
// s is rho*(z - z_prev) per terminal, which reduces to the plain PMP dual
// residual at alpha = 1.
inline std::pair<double, double> residuals(const SolverState& state,
                                           const SolverState& prev,
                                           const TerminalLayout& layout) {
  const std::int64_t m = std::int64_t(layout.link_counts.size());
  double r2 = deterministic_sum(m, 1, [&](std::int64_t l) {
    double v = state.p_bar[static_cast<std::size_t>(l)];
    return static_cast<double>(layout.link_counts[static_cast<std::size_t>(l)]) *
           v * v;
  });
  double s2 = deterministic_sum(layout.total_terminals, 1, [&](std::int64_t j) {
    double d = state.rho * (state.z[static_cast<std::size_t>(j)] -
                            prev.z[static_cast<std::size_t>(j)]);
    return d * d;
  });
  return {std::sqrt(r2), std::sqrt(s2)};
}

// Both norms strictly below eps_tol = eps_abs * sqrt(J).
inline bool check_termination(double r_norm, double s_norm,
                              const TerminalLayout& layout,
                              const SolverConfig& config) {
  const double eps_tol =
      config.eps_abs * std::sqrt(static_cast<double>(layout.total_terminals));
  return r_norm < eps_tol && s_norm < eps_tol;
}

// Residual balancing. Because the state stores the unscaled price, changing
// rho here *is* the rescale u <- (rho_old/rho_new) u with y preserved
// exactly.
inline void update_rho(SolverState& state, double r_norm, double s_norm,
                       const SolverConfig& config) {
  if (r_norm > config.mu * s_norm)
    state.rho *= config.gamma;
  else if (s_norm > config.mu * r_norm)
    state.rho /= config.gamma;
}

// Link shadow prices lambda = rho*u = y, clamped at 0 for reporting.
inline std::vector<double> recover_duals(const SolverState& state) {
  std::vector<double> lambda(state.price.size());
  for (std::size_t l = 0; l < lambda.size(); ++l)
    lambda[l] = std::max(state.price[l], 0.0);
  return lambda;
}

// Total utility U(x). Extension streams contribute only when their
// registered utility carries a value callable.
inline double objective(const Problem& problem, const std::vector<double>& x,
                        const ExtensionRegistry* extensions = nullptr) {
  if (x.size() != problem.streams.size())
    throw std::invalid_argument("objective: x length mismatch");
  double total = 0.0;
  for (const Stream& s : problem.streams) {
    const double xj = x[static_cast<std::size_t>(s.id)];
    switch (s.kind) {
      case StreamKind::Log:
        if (!(xj > 0.0))
          throw std::domain_error("objective: log stream " +
                                  std::to_string(s.id) +
                                  " has non-positive rate");
        total += s.weight * std::log(xj);
        break;
      case StreamKind::Linear:
        total += s.weight * xj;
        break;
      case StreamKind::Extension: {
        const ProxExtension* ext =
            extensions ? extensions->find(s.extension) : nullptr;
        if (ext && ext->value) total += ext->value(xj, s.weight);
        break;
      }
    }
  }
  return total;
}

// Terminal flows from a prior allocation: x0 replicated along each route,
// slack flows s - c with s = max(c - R x0, 0), copies z = p - p_bar.
// Prices start at zero; PmpSolver::warm_state layers carried prices on top.
inline SolverState warm_start_from(const std::vector<double>& x0,
                                   const Problem& problem, double rho0 = 1.0) {
  if (std::int64_t(x0.size()) != problem.n)
    throw std::invalid_argument("warm start: x0 length does not match n");
  for (const Stream& s : problem.streams)
    if (s.kind == StreamKind::Log &&
        !(x0[static_cast<std::size_t>(s.id)] > 0.0))
      throw std::domain_error("warm start: log stream " +
                              std::to_string(s.id) +
                              " needs a positive rate");
  const TerminalLayout& L = problem.layout;
  SolverState st;
  st.rho = rho0;
  st.iter = 0;
  st.p.assign(static_cast<std::size_t>(L.total_terminals), 0.0);
  std::vector<double> load(static_cast<std::size_t>(problem.m), 0.0);
  for (const Stream& s : problem.streams) {
    const double xj = x0[static_cast<std::size_t>(s.id)];
    std::int64_t off = L.stream_offsets[static_cast<std::size_t>(s.id)];
    for (std::size_t i = 0; i < s.route.size(); ++i) {
      st.p[static_cast<std::size_t>(off) + i] = xj;
      load[static_cast<std::size_t>(s.route[i])] += xj;
    }
  }
  for (std::int64_t l = 0; l < problem.m; ++l) {
    double slack = std::max(
        problem.capacities[static_cast<std::size_t>(l)] -
            load[static_cast<std::size_t>(l)],
        0.0);
    st.p[static_cast<std::size_t>(L.slack_terminal(l))] =
        slack - problem.capacities[static_cast<std::size_t>(l)];
  }
  compute_link_averages(st.p, L, 1, st.p_bar);
  st.z.resize(static_cast<std::size_t>(L.total_terminals));
  for (std::int64_t j = 0; j < L.total_terminals; ++j)
    st.z[static_cast<std::size_t>(j)] =
        st.p[static_cast<std::size_t>(j)] -
        st.p_bar[static_cast<std::size_t>(
            L.terminal_link[static_cast<std::size_t>(j)])];
  st.price.assign(static_cast<std::size_t>(problem.m), 0.0);
  return st;
}

// Bulk-synchronous PMP engine. One step runs, in order: batched prox
// updates per type group plus the slack projection, the link averaging,
// the (over-relaxed) z update, and the price update. All reductions use a
// fixed chunked order, so results are bit-identical across thread counts.
class PmpSolver {
 public:
  explicit PmpSolver(const Problem& problem, SolverConfig config = {},
                     const ExtensionRegistry* extensions = nullptr)
      : prob_(problem), cfg_(config), ext_(extensions) {
    validate_config(cfg_);
    if (cfg_.threads == 0) cfg_.threads = default_threads();
    std::vector<Violation> vs = validate(prob_);
    if (!vs.empty()) throw ValidationError(detail::violations_message(vs));
    groups_ = group_streams(prob_);
    group_ext_.resize(groups_.size(), nullptr);
    for (std::size_t g = 0; g < groups_.size(); ++g) {
      if (groups_[g].kind != StreamKind::Extension) continue;
      const ProxExtension* ext =
          ext_ ? ext_->find(groups_[g].extension) : nullptr;
      if (!ext)
        throw SolverError("no extension registered for utility '" +
                          groups_[g].extension + "'");
      group_ext_[g] = ext;
    }
    x_buf_.assign(static_cast<std::size_t>(prob_.n), 0.0);
    u_buf_.assign(static_cast<std::size_t>(prob_.m), 0.0);
  }

  const Problem& problem() const { return prob_; }
  const SolverConfig& config() const { return cfg_; }
  const std::vector<TypeGroup>& groups() const { return groups_; }

  SolverState cold_state() const {
    const TerminalLayout& L = prob_.layout;
    SolverState st;
    st.p.assign(static_cast<std::size_t>(L.total_terminals), 0.0);
    st.z.assign(static_cast<std::size_t>(L.total_terminals), 0.0);
    st.p_bar.assign(static_cast<std::size_t>(prob_.m), 0.0);
    st.price.assign(static_cast<std::size_t>(prob_.m), 0.0);
    st.rho = cfg_.rho0;
    st.iter = 0;
    return st;
  }

  SolverState warm_state(const WarmStart& warm) const {
    double rho0 = warm.rho > 0.0 ? warm.rho : cfg_.rho0;
    SolverState st = warm_start_from(warm.x0, prob_, rho0);
    if (!warm.price.empty()) {
      if (std::int64_t(warm.price.size()) != prob_.m)
        throw std::invalid_argument("warm start: price length mismatch");
      st.price = warm.price;
    }
    return st;
  }

  // One iteration; returns (r_norm, s_norm) of the new state. Matches
  // residuals(state_after, state_before, layout) bit for bit.
  std::pair<double, double> step(SolverState& st) {
    const TerminalLayout& L = prob_.layout;
    const std::int64_t m = prob_.m;
    const int threads = cfg_.threads;
    const double rho = st.rho;
    const double alpha = cfg_.alpha;

    parallel_for(m, threads, [&](std::int64_t lo, std::int64_t hi) {
      for (std::int64_t l = lo; l < hi; ++l)
        u_buf_[static_cast<std::size_t>(l)] =
            st.price[static_cast<std::size_t>(l)] / rho;
    });

    // Stream prox updates, batched per type group; prox point z - u.
    for (std::size_t g = 0; g < groups_.size(); ++g) {
      const TypeGroup& grp = groups_[g];
      const ProxExtension* ext = group_ext_[g];
      const std::int64_t tau = grp.tau;
      const std::int64_t count = std::int64_t(grp.members.size());
      parallel_for(count, threads, [&](std::int64_t klo, std::int64_t khi) {
        for (std::int64_t k = klo; k < khi; ++k) {
          const std::int64_t sid = grp.members[static_cast<std::size_t>(k)];
          const std::int64_t off =
              L.stream_offsets[static_cast<std::size_t>(sid)];
          double z_sum = 0.0;
          for (std::int64_t i = 0; i < tau; ++i) {
            const std::int64_t t = off + i;
            z_sum += st.z[static_cast<std::size_t>(t)] -
                     u_buf_[static_cast<std::size_t>(
                         L.terminal_link[static_cast<std::size_t>(t)])];
          }
          const double w = grp.weights[static_cast<std::size_t>(k)];
          double x;
          switch (grp.kind) {
            case StreamKind::Log:
              x = prox_log_scalar(z_sum, w, rho, tau);
              break;
            case StreamKind::Linear:
              x = prox_linear_nonneg_scalar(z_sum, w, rho, tau);
              break;
            default:
              x = prox_extension_scalar(*ext, z_sum, w, rho, tau);
          }
          x_buf_[static_cast<std::size_t>(sid)] = x;
          for (std::int64_t i = 0; i < tau; ++i)
            st.p[static_cast<std::size_t>(off + i)] = x;
        }
      });
    }
    // Slack projection, one terminal per link.
    parallel_for(m, threads, [&](std::int64_t lo, std::int64_t hi) {
      for (std::int64_t l = lo; l < hi; ++l) {
        const std::int64_t t = L.slack_terminal(l);
        const double v = st.z[static_cast<std::size_t>(t)] -
                         u_buf_[static_cast<std::size_t>(l)];
        st.p[static_cast<std::size_t>(t)] =
            std::max(v, -prob_.capacities[static_cast<std::size_t>(l)]);
      }
    });

    compute_link_averages(st.p, L, threads, st.p_bar);
    const double r2 = deterministic_sum(m, threads, [&](std::int64_t l) {
      double v = st.p_bar[static_cast<std::size_t>(l)];
      return static_cast<double>(
                 L.link_counts[static_cast<std::size_t>(l)]) *
             v * v;
    });

    // Over-relaxed copy update; at alpha = 1 this is z = p - p_bar, the
    // plain message passing recursion.
    const double s2 =
        deterministic_sum(L.total_terminals, threads, [&](std::int64_t j) {
          const double z_old = st.z[static_cast<std::size_t>(j)];
          const double z_new =
              alpha * (st.p[static_cast<std::size_t>(j)] -
                       st.p_bar[static_cast<std::size_t>(
                           L.terminal_link[static_cast<std::size_t>(j)])]) +
              (1.0 - alpha) * z_old;
          st.z[static_cast<std::size_t>(j)] = z_new;
          const double d = rho * (z_new - z_old);
          return d * d;
        });

    parallel_for(m, threads, [&](std::int64_t lo, std::int64_t hi) {
      for (std::int64_t l = lo; l < hi; ++l)
        st.price[static_cast<std::size_t>(l)] +=
            rho * (alpha * st.p_bar[static_cast<std::size_t>(l)]);
    });

    st.iter += 1;
    return {std::sqrt(r2), std::sqrt(s2)};
  }

  Solution solve() { return run(cold_state()); }

  Solution solve(const WarmStart& warm) { return run(warm_state(warm)); }

  // State of the last finished run, for post-hoc residual checks.
  const SolverState& final_state() const { return final_state_; }
  const std::vector<double>& final_prev_z() const { return final_prev_z_; }

 private:
  double current_objective() const {
    double total = 0.0;
    for (const Stream& s : prob_.streams) {
      const double xj = x_buf_[static_cast<std::size_t>(s.id)];
      switch (s.kind) {
        case StreamKind::Log:
          total += s.weight * std::log(xj);
          break;
        case StreamKind::Linear:
          total += s.weight * xj;
          break;
        case StreamKind::Extension: {
          const ProxExtension* ext = ext_ ? ext_->find(s.extension) : nullptr;
          if (ext && ext->value) total += ext->value(xj, s.weight);
          break;
        }
      }
    }
    return total;
  }

  Solution run(SolverState st) {
    using Clock = std::chrono::steady_clock;
    const auto start = Clock::now();
    const TerminalLayout& L = prob_.layout;

    Solution sol;
    sol.status = SolveStatus::MaxIters;
    double r_norm = 0.0, s_norm = 0.0;

    for (std::int64_t iter = 1; iter <= cfg_.max_iters; ++iter) {
      final_prev_z_ = st.z;
      auto [r, s] = step(st);
      r_norm = r;
      s_norm = s;
      if (!std::isfinite(r_norm) || !std::isfinite(s_norm))
        throw SolverError("non-finite state at iteration " +
                          std::to_string(iter));

      if (check_termination(r_norm, s_norm, L, cfg_)) {
        sol.status = SolveStatus::Converged;
        break;
      }
      if (iter % cfg_.trace_every == 0)
        sol.trace.push_back(
            TraceRecord{iter, r_norm, s_norm, st.rho, current_objective()});
      if (cfg_.time_limit > 0.0) {
        const double elapsed =
            std::chrono::duration<double>(Clock::now() - start).count();
        if (elapsed > cfg_.time_limit) {
          sol.status = SolveStatus::TimeLimit;
          break;
        }
      }
      if (iter % cfg_.rho_update_interval == 0)
        update_rho(st, r_norm, s_norm, cfg_);
    }

    // Final trace sample, always recorded at termination.
    if (sol.trace.empty() || sol.trace.back().iter != st.iter)
      sol.trace.push_back(
          TraceRecord{st.iter, r_norm, s_norm, st.rho, current_objective()});

    sol.iterations = st.iter;
    sol.r_norm = r_norm;
    sol.s_norm = s_norm;
    sol.rho_final = st.rho;

    sol.x = x_buf_;
    for (double& v : sol.x)
      if (v < 0.0 && -v < cfg_.eps_abs) v = 0.0;  // tiny negatives only
    std::vector<double> load(static_cast<std::size_t>(prob_.m), 0.0);
    for (const Stream& s : prob_.streams)
      for (std::int32_t link : s.route)
        load[static_cast<std::size_t>(link)] +=
            sol.x[static_cast<std::size_t>(s.id)];
    sol.s.resize(static_cast<std::size_t>(prob_.m));
    for (std::int64_t l = 0; l < prob_.m; ++l)
      sol.s[static_cast<std::size_t>(l)] =
          std::max(prob_.capacities[static_cast<std::size_t>(l)] -
                       load[static_cast<std::size_t>(l)],
                   0.0);
    sol.lambda = recover_duals(st);
    sol.lambda_raw = st.price;
    sol.objective = objective(prob_, sol.x, ext_);

    final_state_ = std::move(st);
    return sol;
  }

  const Problem& prob_;
  SolverConfig cfg_;
  const ExtensionRegistry* ext_;
  std::vector<TypeGroup> groups_;
  std::vector<const ProxExtension*> group_ext_;
  std::vector<double> x_buf_;
  std::vector<double> u_buf_;
  SolverState final_state_;
  std::vector<double> final_prev_z_;
};

}  // namespace numpmp

#endif  // NUMPMP_SOLVER_HPP_
