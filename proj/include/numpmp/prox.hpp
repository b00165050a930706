#ifndef NUMPMP_PROX_HPP_
#define NUMPMP_PROX_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "numpmp/common.hpp"

namespace numpmp {

// Batched prox evaluation point: z_columns[i][k] is the i-th terminal of the
// k-th stream in the batch (the columns of Z stacked per terminal).
struct ProxInput {
  std::vector<std::vector<double>> z_columns;
  std::vector<double> weights;
  double rho = 1.0;
};

// prox of -w*log(x): minimizer of -w log x + (rho/2) sum_i (x - z_i)^2.
// Always strictly positive; the rationalized form avoids cancellation for
// large negative z sums.
inline double prox_log_scalar(double z_sum, double w, double rho,
                              std::int64_t tau) {
  if (!(w > 0.0))
    throw std::domain_error("prox_log requires weight > 0");
  const double d = 4.0 * w * static_cast<double>(tau) / rho;
  if (z_sum >= 0.0)
    return (z_sum + std::sqrt(z_sum * z_sum + d)) / (2.0 * static_cast<double>(tau));
  return d / (2.0 * static_cast<double>(tau) *
              (std::sqrt(z_sum * z_sum + d) - z_sum));
}

// prox of -w*x. Not clamped at zero; the solver uses the nonnegative
// variant below, which carries the rate constraint x >= 0.
inline double prox_linear_scalar(double z_sum, double w, double rho,
                                 std::int64_t tau) {
  return (z_sum + w / rho) / static_cast<double>(tau);
}

// prox of -w*x + I{x >= 0}, the linear-utility stream cost inside the
// solver. Without the indicator the splitting solves a relaxation that is
// unbounded whenever sacrificing a low-weight stream frees capacity for a
// heavier one.
inline double prox_linear_nonneg_scalar(double z_sum, double w, double rho,
                                        std::int64_t tau) {
  return std::max(prox_linear_scalar(z_sum, w, rho, tau), 0.0);
}

// Extension utility: concave, twice differentiable U with derivative
// U'(x; w). The prox is solved from the stationarity condition
// -U'(x) + rho*(tau*x - sum z) = 0 by safeguarded root finding.
struct ProxExtension {
  std::string name;
  std::function<double(double x, double w)> derivative;
  std::optional<double> domain_lb;  // open lower bound of dom U
  // Optional utility value, used only when reporting objectives.
  std::function<double(double x, double w)> value;
};

// Spot-samples the derivative to confirm it is non-increasing, as the prox
// root finding assumes. Throws std::invalid_argument otherwise.
inline void validate_extension(const ProxExtension& ext) {
  if (ext.name.empty())
    throw std::invalid_argument("extension needs a name");
  if (!ext.derivative)
    throw std::invalid_argument("extension '" + ext.name +
                                "' needs a derivative");
  const double lb = ext.domain_lb.value_or(
      -std::numeric_limits<double>::infinity());
  std::vector<double> xs;
  if (std::isfinite(lb)) {
    for (double off : {1e-6, 1e-3, 1e-2, 0.1, 0.5, 1.0, 2.0, 5.0, 10.0, 100.0})
      xs.push_back(lb + off);
  } else {
    xs = {-100.0, -10.0, -1.0, -0.1, 0.0, 0.1, 1.0, 10.0, 100.0};
  }
  for (double w : {1.0, 2.5}) {
    double prev = ext.derivative(xs.front(), w);
    for (std::size_t i = 1; i < xs.size(); ++i) {
      double cur = ext.derivative(xs[i], w);
      double slack = 1e-9 * std::max(1.0, std::abs(prev));
      if (cur > prev + slack)
        throw std::invalid_argument(
            "extension '" + ext.name +
            "' derivative is not non-increasing (utility not concave)");
      prev = cur;
    }
  }
}

namespace detail {

// Safeguarded secant/bisection for the increasing function
// g(x) = rho*(tau*x - z_sum) - U'(x), bracketed by doubling away from the
// linear-prox starting point. Absolute tolerance 1e-10 on x.
inline double extension_root(const ProxExtension& ext, double z_sum, double w,
                             double rho, std::int64_t tau) {
  const double lb = ext.domain_lb.value_or(
      -std::numeric_limits<double>::infinity());
  auto g = [&](double x) {
    return rho * (static_cast<double>(tau) * x - z_sum) - ext.derivative(x, w);
  };

  double x0 = prox_linear_scalar(z_sum, w, rho, tau);
  if (std::isfinite(lb) && x0 <= lb)
    x0 = lb + std::max(1e-8, 1e-8 * std::abs(lb)) + 1.0;

  double lo = x0, hi = x0;
  double glo = g(lo), ghi = glo;
  double step = std::max(1.0, 0.5 * std::abs(x0));
  int guard = 0;
  while (glo > 0.0) {  // march left toward the domain boundary
    if (++guard > 200)
      throw SolverError("extension prox '" + ext.name +
                        "': no root below starting point");
    double cand = std::isfinite(lb) ? lb + 0.5 * (lo - lb) : lo - step;
    step *= 2.0;
    hi = lo;
    ghi = glo;
    lo = cand;
    glo = g(lo);
  }
  step = std::max(1.0, 0.5 * std::abs(x0));
  guard = 0;
  while (ghi < 0.0) {  // march right
    if (++guard > 200)
      throw SolverError("extension prox '" + ext.name +
                        "': bracket expansion failed");
    lo = hi;
    glo = ghi;
    hi += step;
    step *= 2.0;
    ghi = g(hi);
  }
  constexpr double kTol = 1e-10;
  for (int it = 0; it < 600 && hi - lo > kTol; ++it) {
    double mid;
    if (ghi != glo) {
      mid = lo - glo * (hi - lo) / (ghi - glo);  // secant
      double margin = 0.1 * (hi - lo);
      if (!(mid > lo + margin) || !(mid < hi - margin))
        mid = 0.5 * (lo + hi);
    } else {
      mid = 0.5 * (lo + hi);
    }
    double gm = g(mid);
    if (gm == 0.0) return mid;
    if (gm < 0.0) {
      lo = mid;
      glo = gm;
    } else {
      hi = mid;
      ghi = gm;
    }
  }
  return 0.5 * (lo + hi);
}

inline void check_batch(const ProxInput& in, std::int64_t tau) {
  if (tau < 1) throw std::invalid_argument("prox batch requires tau >= 1");
  if (!(in.rho > 0.0)) throw std::invalid_argument("prox requires rho > 0");
  if (std::int64_t(in.z_columns.size()) != tau)
    throw std::invalid_argument("prox batch expects tau z columns");
  for (const auto& col : in.z_columns)
    if (col.size() != in.weights.size())
      throw std::invalid_argument("prox batch column length mismatch");
}

template <class Kernel>
std::vector<double> batch_apply(const ProxInput& in, std::int64_t tau,
                                Kernel&& kernel) {
  check_batch(in, tau);
  const std::size_t count = in.weights.size();
  std::vector<double> out(count);
  for (std::size_t k = 0; k < count; ++k) {
    double z_sum = 0.0;
    for (std::int64_t i = 0; i < tau; ++i)
      z_sum += in.z_columns[static_cast<std::size_t>(i)][k];
    out[k] = kernel(z_sum, in.weights[k]);
  }
  return out;
}

}  // namespace detail

inline double prox_extension_scalar(const ProxExtension& ext, double z_sum,
                                    double w, double rho, std::int64_t tau) {
  return detail::extension_root(ext, z_sum, w, rho, tau);
}

inline std::vector<double> prox_log(const ProxInput& in, std::int64_t tau) {
  return detail::batch_apply(in, tau, [&](double z_sum, double w) {
    return prox_log_scalar(z_sum, w, in.rho, tau);
  });
}

inline std::vector<double> prox_linear(const ProxInput& in, std::int64_t tau) {
  return detail::batch_apply(in, tau, [&](double z_sum, double w) {
    return prox_linear_scalar(z_sum, w, in.rho, tau);
  });
}

inline std::vector<double> prox_extension(const ProxExtension& ext,
                                          const ProxInput& in,
                                          std::int64_t tau) {
  std::size_t k = 0;
  try {
    return detail::batch_apply(in, tau, [&](double z_sum, double w) {
      double x = prox_extension_scalar(ext, z_sum, w, in.rho, tau);
      ++k;
      return x;
    });
  } catch (const SolverError& e) {
    std::ostringstream msg;
    msg << e.what() << " (batch stream " << k << ")";
    throw SolverError(msg.str());
  }
}

// Projection onto { p : p + c >= 0 }, elementwise max(z, -c). Idempotent.
inline std::vector<double> prox_slack(const std::vector<double>& z,
                                      const std::vector<double>& capacities) {
  if (z.size() != capacities.size())
    throw std::invalid_argument("prox_slack length mismatch");
  std::vector<double> out(z.size());
  for (std::size_t i = 0; i < z.size(); ++i)
    out[i] = std::max(z[i], -capacities[i]);
  return out;
}

// Named extension utilities available to a solve. Insertion validates the
// concavity contract by spot-sampling.
class ExtensionRegistry {
 public:
  void add(ProxExtension ext) {
    validate_extension(ext);
    map_[ext.name] = std::move(ext);
  }
  const ProxExtension* find(const std::string& name) const {
    auto it = map_.find(name);
    return it == map_.end() ? nullptr : &it->second;
  }
  bool empty() const { return map_.empty(); }

 private:
  std::map<std::string, ProxExtension> map_;
};

}  // namespace numpmp

#endif  // NUMPMP_PROX_HPP_
