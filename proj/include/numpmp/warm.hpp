#ifndef NUMPMP_WARM_HPP_
#define NUMPMP_WARM_HPP_

#include <algorithm>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "numpmp/gen.hpp"
#include "numpmp/model.hpp"
#include "numpmp/solver.hpp"
#include "numpmp/transit.hpp"

namespace numpmp {

// Warm-start recipes for the two perturbation workflows. Both carry the
// prior duals and penalty; the corrections below are what make the carried
// point track the perturbed optimum instead of the old one.

// After capacity degradation: shrink each rate into the tightest capacity
// cut on its route, scale prices on degraded links by the inverse cut (a
// degraded bottleneck's price grows as 1/factor), and raise the carried
// penalty by the worst cut, since the dual scale of the perturbed problem
// grows with it.
inline WarmStart warm_start_after_degrade(const Problem& before,
                                          const Problem& after,
                                          const Solution& prior) {
  if (before.m != after.m || before.n != after.n)
    throw std::invalid_argument(
        "degrade warm start: problems differ in structure");
  std::vector<double> ratio(static_cast<std::size_t>(after.m));
  double worst_cut = 1.0;
  for (std::int64_t l = 0; l < after.m; ++l) {
    ratio[static_cast<std::size_t>(l)] =
        after.capacities[static_cast<std::size_t>(l)] /
        before.capacities[static_cast<std::size_t>(l)];
    worst_cut = std::min(worst_cut, ratio[static_cast<std::size_t>(l)]);
  }
  WarmStart warm;
  warm.x0 = prior.x;
  for (const Stream& s : after.streams) {
    double cut = 1.0;
    for (std::int32_t link : s.route)
      cut = std::min(cut, ratio[static_cast<std::size_t>(link)]);
    warm.x0[static_cast<std::size_t>(s.id)] *= cut;
    if (s.kind == StreamKind::Log &&
        !(warm.x0[static_cast<std::size_t>(s.id)] > 0.0))
      warm.x0[static_cast<std::size_t>(s.id)] = 1e-8;
  }
  warm.price = prior.lambda_raw;
  for (std::int64_t l = 0; l < after.m; ++l)
    warm.price[static_cast<std::size_t>(l)] /= ratio[static_cast<std::size_t>(l)];
  warm.rho = prior.rho_final / worst_cut;
  return warm;
}

// After link failure and pruning: project rates and prices onto the
// survivors, damp prices by the surviving load share (freed capacity
// lowers them), and re-center log rates on the corrected path prices.
inline WarmStart warm_start_after_prune(const Problem& pruned,
                                        const PruneMap& map,
                                        const Solution& prior) {
  WarmStart warm;
  warm.x0 = map.project_streams(prior.x);
  warm.price = map.project_links(prior.lambda_raw);
  if (std::int64_t(warm.x0.size()) != pruned.n ||
      std::int64_t(warm.price.size()) != pruned.m)
    throw std::invalid_argument("prune warm start: map does not fit problem");

  std::vector<double> load(static_cast<std::size_t>(pruned.m), 0.0);
  for (const Stream& s : pruned.streams)
    for (std::int32_t link : s.route)
      load[static_cast<std::size_t>(link)] +=
          warm.x0[static_cast<std::size_t>(s.id)];
  for (std::int64_t l = 0; l < pruned.m; ++l)
    warm.price[static_cast<std::size_t>(l)] *=
        std::min(1.0, load[static_cast<std::size_t>(l)] /
                          pruned.capacities[static_cast<std::size_t>(l)]);

  std::vector<double> clamped(warm.price.size());
  for (std::size_t l = 0; l < warm.price.size(); ++l)
    clamped[l] = std::max(warm.price[l], 0.0);
  std::vector<double> pi = path_prices(pruned, clamped);
  for (const Stream& s : pruned.streams) {
    if (s.kind != StreamKind::Log) continue;
    const double pij = pi[static_cast<std::size_t>(s.id)];
    if (pij > 1e-10)
      warm.x0[static_cast<std::size_t>(s.id)] = s.weight / pij;
    if (!(warm.x0[static_cast<std::size_t>(s.id)] > 0.0))
      warm.x0[static_cast<std::size_t>(s.id)] = 1e-8;
  }
  warm.rho = prior.rho_final;
  return warm;
}

}  // namespace numpmp

#endif  // NUMPMP_WARM_HPP_
