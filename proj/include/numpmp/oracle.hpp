#ifndef NUMPMP_ORACLE_HPP_
#define NUMPMP_ORACLE_HPP_

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "numpmp/common.hpp"
#include "numpmp/model.hpp"

namespace numpmp {

// Verification-only reference solution from the dense barrier solver.
struct OracleSolution {
  std::vector<double> x;
  std::vector<double> lambda;
  double objective = 0.0;
  double barrier_mu_final = 0.0;
};

namespace detail {

// Golden-section minimization of a unimodal phi over [lo, hi], refined to
// the given bracket width. Evaluation happens in extended precision: the
// comparison noise floor of golden section is sqrt(eps * |phi| / phi''),
// which plain doubles would leave near the 1e-8 scale this oracle vouches
// for.
template <class Phi>
long double golden_min(Phi&& phi, long double lo, long double hi,
                       long double tol) {
  const long double invphi = (std::sqrt(5.0L) - 1.0L) / 2.0L;
  long double a = lo, b = hi;
  long double x1 = b - invphi * (b - a);
  long double x2 = a + invphi * (b - a);
  long double f1 = phi(x1), f2 = phi(x2);
  for (int it = 0; it < 500 && b - a > tol; ++it) {
    if (f1 <= f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - invphi * (b - a);
      f1 = phi(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + invphi * (b - a);
      f2 = phi(x2);
    }
  }
  return 0.5L * (a + b);
}

template <class NegUtility>
double prox_oracle_core(NegUtility&& neg_utility, double domain_lb, double rho,
                        double z_sum, std::int64_t tau) {
  const long double rho_l = rho, z_l = z_sum, tau_l = tau;
  auto phi = [&](long double x) {
    return neg_utility(x) + 0.5L * rho_l * (tau_l * x * x - 2.0L * x * z_l);
  };
  long double lo, hi;
  if (std::isfinite(domain_lb)) {
    lo = static_cast<long double>(domain_lb) + 1e-14L;
    long double h = 1.0L;
    long double b = lo + h;
    int guard = 0;
    while (phi(b + h) < phi(b)) {
      h *= 2.0L;
      b += h;
      if (++guard > 200)
        throw OracleError("prox oracle: bracket expansion failed");
    }
    hi = b + h;
  } else {
    long double h = 1.0L;
    const long double f0 = phi(0.0L);
    int guard = 0;
    while (phi(-h) <= f0 || phi(h) <= f0) {
      h *= 2.0L;
      if (++guard > 200)
        throw OracleError("prox oracle: bracket expansion failed");
    }
    lo = -h;
    hi = h;
  }
  return static_cast<double>(golden_min(phi, lo, hi, 1e-10L));
}

}  // namespace detail

// Brute-force scalar prox: minimizes -U(x) + (rho/2)(tau x^2 - 2 x z_sum)
// by golden-section search, independent of the closed forms it checks.
// domain_lb is the open lower bound of dom U (use -inf for all of R).
inline double prox_oracle_1d(const std::function<double(double)>& neg_utility,
                             double domain_lb, double rho, double z_sum,
                             std::int64_t tau) {
  return detail::prox_oracle_core(
      [&](long double x) {
        return static_cast<long double>(neg_utility(static_cast<double>(x)));
      },
      domain_lb, rho, z_sum, tau);
}

inline double prox_oracle_1d(StreamKind kind, double w, double rho,
                             double z_sum, std::int64_t tau) {
  const long double w_l = w;
  switch (kind) {
    case StreamKind::Log:
      return detail::prox_oracle_core(
          [w_l](long double x) { return -w_l * std::log(x); }, 0.0, rho, z_sum,
          tau);
    case StreamKind::Linear:
      return detail::prox_oracle_core([w_l](long double x) { return -w_l * x; },
                                      -std::numeric_limits<double>::infinity(),
                                      rho, z_sum, tau);
    default:
      throw OracleError("prox oracle: pass the utility callable for extensions");
  }
}

// Dense log-barrier solver for small instances: minimizes
//   -sum U_j(x_j) - (1/t) sum_i log s_i - (1/t) sum_{linear j} log x_j
// with s = c - Rx, by Newton with backtracking, t increasing geometrically
// until m_total/t < tol. Duals are lambda_i = 1/(t s_i). Test infrastructure
// only; capped at 2000 links/streams of dense algebra.
inline OracleSolution solve_barrier(const Problem& prob, double tol) {
  if (prob.m > 2000 || prob.n > 2000)
    throw OracleError("barrier oracle capped at m, n <= 2000");
  if (!(tol > 0.0)) throw OracleError("barrier oracle needs tol > 0");
  const std::int64_t m = prob.m, n = prob.n;

  std::vector<char> is_linear(static_cast<std::size_t>(n), 0);
  std::int64_t n_linear = 0;
  for (const Stream& s : prob.streams) {
    if (s.kind == StreamKind::Extension)
      throw OracleError("barrier oracle supports log and linear streams only");
    if (s.kind == StreamKind::Linear) {
      is_linear[static_cast<std::size_t>(s.id)] = 1;
      ++n_linear;
    }
  }

  Eigen::MatrixXd R = Eigen::MatrixXd::Zero(m, n);
  for (const Stream& s : prob.streams)
    for (std::int32_t link : s.route) R(link, s.id) = 1.0;
  Eigen::VectorXd c(m);
  for (std::int64_t i = 0; i < m; ++i)
    c(i) = prob.capacities[static_cast<std::size_t>(i)];
  Eigen::VectorXd w(n);
  for (const Stream& s : prob.streams) w(s.id) = s.weight;

  // Strictly feasible start: half of each stream's fair share of its
  // tightest link.
  Eigen::VectorXd per_link_users = R.rowwise().sum().cwiseMax(1.0);
  Eigen::VectorXd x(n);
  for (const Stream& s : prob.streams) {
    double v = std::numeric_limits<double>::infinity();
    for (std::int32_t link : s.route)
      v = std::min(v, c(link) / per_link_users(link));
    x(s.id) = 0.5 * v;
  }

  const double m_total = static_cast<double>(m + n_linear);

  // Centering objective in the standard scaling t*f0 + phi, so the Newton
  // decrement pins the slacks to relative accuracy at every t.
  auto barrier_value = [&](const Eigen::VectorXd& xv, double t) {
    Eigen::VectorXd s = c - R * xv;
    if ((s.array() <= 0.0).any())
      return std::numeric_limits<double>::infinity();
    double f = 0.0;
    for (std::int64_t j = 0; j < n; ++j) {
      if (xv(j) <= 0.0) return std::numeric_limits<double>::infinity();
      if (is_linear[static_cast<std::size_t>(j)])
        f += -t * w(j) * xv(j) - std::log(xv(j));
      else
        f += -t * w(j) * std::log(xv(j));
    }
    f -= s.array().log().sum();
    return f;
  };

  auto feasible = [&](const Eigen::VectorXd& xv) {
    if ((xv.array() <= 0.0).any()) return false;
    Eigen::VectorXd s = c - R * xv;
    return !(s.array() <= 0.0).any();
  };

  double t = 1.0;
  Eigen::VectorXd s = c - R * x;
  for (int stage = 0;; ++stage) {
    if (stage > 80) throw OracleError("barrier oracle: too many stages");
    // Newton centering at this t. Once the decrement enters the quadratic
    // region, take full steps guarded only by feasibility: at large t the
    // objective values are ~t*|f0|, so Armijo comparisons would drown in
    // rounding noise long before the decrement target is met. Near the
    // factorization accuracy floor the decrement stops improving; a small
    // residual decrement there only perturbs the duals at the sqrt(dec^2)
    // relative level, so a stalled centering is accepted below 1e-6.
    bool centered = false;
    double best_dec2 = std::numeric_limits<double>::infinity();
    int best_it = 0;
    for (int it = 0; it < 400; ++it) {
      s = c - R * x;
      Eigen::VectorXd inv_s = s.cwiseInverse();
      Eigen::VectorXd grad = R.transpose() * inv_s;
      Eigen::VectorXd hdiag(n);
      for (std::int64_t j = 0; j < n; ++j) {
        if (is_linear[static_cast<std::size_t>(j)]) {
          grad(j) += -t * w(j) - 1.0 / x(j);
          hdiag(j) = 1.0 / (x(j) * x(j));
        } else {
          grad(j) += -t * w(j) / x(j);
          hdiag(j) = t * w(j) / (x(j) * x(j));
        }
      }
      Eigen::MatrixXd H =
          R.transpose() * inv_s.array().square().matrix().asDiagonal() * R;
      H.diagonal() += hdiag;
      // Jacobi scaling tames the diagonal spread from squeezed variables.
      Eigen::VectorXd d_scale = H.diagonal().cwiseSqrt();
      Eigen::VectorXd d_inv = d_scale.cwiseInverse();
      Eigen::MatrixXd Hs = d_inv.asDiagonal() * H * d_inv.asDiagonal();
      Eigen::LDLT<Eigen::MatrixXd> ldlt(Hs);
      if (ldlt.info() != Eigen::Success)
        throw OracleError("barrier oracle: Hessian factorization failed");
      Eigen::VectorXd dx =
          d_inv.asDiagonal() * ldlt.solve(-(d_inv.asDiagonal() * grad));
      const double decrement2 = -grad.dot(dx);
      if (decrement2 / 2.0 <= 1e-10) {
        centered = true;
        break;
      }
      if (decrement2 < 0.5 * best_dec2) {
        best_dec2 = decrement2;
        best_it = it;
      }
      if (it - best_it > 40) {  // numerical floor reached
        centered = decrement2 <= 1e-6;
        break;
      }
      if (decrement2 <= 0.25) {
        double step_size = 1.0;
        int half = 0;
        while (half < 80 && !feasible(x + step_size * dx)) {
          step_size *= 0.5;
          ++half;
        }
        if (half == 80)
          throw OracleError("barrier oracle: feasibility backtracking failed");
        x += step_size * dx;
        continue;
      }
      // Damped phase: backtrack to feasibility, then Armijo.
      const double f0 = barrier_value(x, t);
      double step_size = 1.0;
      bool accepted = false;
      for (int half = 0; half < 80; ++half) {
        Eigen::VectorXd cand = x + step_size * dx;
        double fc = barrier_value(cand, t);
        if (fc <= f0 + 0.25 * step_size * grad.dot(dx)) {
          x = cand;
          accepted = true;
          break;
        }
        step_size *= 0.5;
      }
      if (!accepted)
        throw OracleError("barrier oracle: line search failed (t=" +
                          std::to_string(t) + ")");
    }
    if (!centered)
      throw OracleError("barrier oracle: Newton did not converge");
    if (m_total / t < tol) break;
    t *= 10.0;
  }

  OracleSolution out;
  out.barrier_mu_final = m_total / t;
  s = c - R * x;
  out.x.assign(x.data(), x.data() + n);
  out.lambda.resize(static_cast<std::size_t>(m));
  for (std::int64_t i = 0; i < m; ++i)
    out.lambda[static_cast<std::size_t>(i)] = 1.0 / (t * s(i));
  out.objective = 0.0;
  for (const Stream& str : prob.streams)
    out.objective += str.kind == StreamKind::Log
                         ? str.weight * std::log(x(str.id))
                         : str.weight * x(str.id);
  return out;
}

}  // namespace numpmp

#endif  // NUMPMP_ORACLE_HPP_
