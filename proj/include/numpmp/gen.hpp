#ifndef NUMPMP_GEN_HPP_
#define NUMPMP_GEN_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "numpmp/common.hpp"
#include "numpmp/model.hpp"
#include "numpmp/rng.hpp"

namespace numpmp {

enum class GenKind { Log, Linear, Mixed };

// Stream weight distribution: a constant or uniform(a, b).
struct WeightDist {
  enum class Kind { Constant, Uniform } kind = Kind::Constant;
  double a = 1.0;
  double b = 1.0;

  static WeightDist constant(double w) { return {Kind::Constant, w, w}; }
  static WeightDist uniform(double lo, double hi) {
    return {Kind::Uniform, lo, hi};
  }
  double sample(Rng& rng) const {
    return kind == Kind::Constant ? a : rng.uniform(a, b);
  }
};

struct GenSpec {
  std::int64_t m = 0;
  std::int64_t n = 0;  // 0 -> m/2
  double avg_links_per_stream = 10.0;
  GenKind kind = GenKind::Log;
  WeightDist weights = WeightDist::constant(1.0);
  std::uint64_t seed = 0;

  std::int64_t stream_count() const { return n > 0 ? n : std::max<std::int64_t>(1, m / 2); }
};

namespace detail {

inline void check_spec(const GenSpec& spec) {
  if (spec.m < 1) throw GenError("generator spec: m must be >= 1");
  if (spec.stream_count() < 1) throw GenError("generator spec: n must be >= 1");
  if (!(spec.avg_links_per_stream >= 1.0))
    throw GenError("generator spec: avg_links_per_stream must be >= 1");
  if (spec.weights.kind == WeightDist::Kind::Uniform &&
      !(spec.weights.a <= spec.weights.b))
    throw GenError("generator spec: weight range inverted");
}

// Draw order is fixed: per stream (route length, links, kind, weight), then
// per link capacity. Route length is 1 + Poisson(avg - 1), capped at m;
// links are a uniform subset without replacement; capacities uniform(0.5, 1.5).
inline std::vector<Stream> draw_streams(const GenSpec& spec, Rng& rng) {
  const std::int64_t n = spec.stream_count();
  std::vector<Stream> streams(static_cast<std::size_t>(n));
  for (std::int64_t j = 0; j < n; ++j) {
    Stream& s = streams[static_cast<std::size_t>(j)];
    std::int64_t len = 1 + rng.poisson(spec.avg_links_per_stream - 1.0);
    if (len > spec.m) len = spec.m;
    s.route = rng.sample_without_replacement(spec.m, len);
    switch (spec.kind) {
      case GenKind::Log: s.kind = StreamKind::Log; break;
      case GenKind::Linear: s.kind = StreamKind::Linear; break;
      case GenKind::Mixed:
        s.kind = rng.bernoulli(0.5) ? StreamKind::Log : StreamKind::Linear;
        break;
    }
    s.weight = spec.weights.sample(rng);
  }
  return streams;
}

inline std::vector<double> draw_capacities(const GenSpec& spec, Rng& rng) {
  std::vector<double> c(static_cast<std::size_t>(spec.m));
  for (double& v : c) v = rng.uniform(0.5, 1.5);
  return c;
}

}  // namespace detail

// Random link-route structure with mean route length avg_links_per_stream.
// Pure function of the spec; identical specs give bit-identical problems.
inline Problem gen_uncongested(const GenSpec& spec) {
  detail::check_spec(spec);
  Rng rng(spec.seed);
  std::vector<Stream> streams = detail::draw_streams(spec, rng);
  std::vector<double> capacities = detail::draw_capacities(spec, rng);
  return build_problem(std::move(streams), std::move(capacities));
}

// Uncongested base plus hot links: ceil(hot_link_fraction * m) links are
// each added to a Bernoulli(hot_stream_fraction) subset of the streams,
// skipping streams that already use the link. Produces the heavy tail in
// the streams-per-link distribution.
inline Problem gen_congested(const GenSpec& spec,
                             double hot_link_fraction = 0.001,
                             double hot_stream_fraction = 0.10) {
  detail::check_spec(spec);
  if (!(hot_link_fraction > 0.0 && hot_link_fraction <= 1.0))
    throw GenError("hot_link_fraction must be in (0, 1]");
  if (!(hot_stream_fraction > 0.0 && hot_stream_fraction <= 1.0))
    throw GenError("hot_stream_fraction must be in (0, 1]");
  Rng rng(spec.seed);
  std::vector<Stream> streams = detail::draw_streams(spec, rng);
  std::vector<double> capacities = detail::draw_capacities(spec, rng);

  const std::int64_t hot_count = static_cast<std::int64_t>(
      std::ceil(hot_link_fraction * static_cast<double>(spec.m)));
  std::vector<std::int32_t> hot_links =
      rng.sample_without_replacement(spec.m, std::min(hot_count, spec.m));
  for (std::int32_t link : hot_links) {
    for (Stream& s : streams) {
      if (!rng.bernoulli(hot_stream_fraction)) continue;
      if (std::binary_search(s.route.begin(), s.route.end(), link)) continue;
      s.route.insert(
          std::upper_bound(s.route.begin(), s.route.end(), link), link);
    }
  }
  return build_problem(std::move(streams), std::move(capacities));
}

// Capacity degradation: each link independently keeps c_i or drops to
// factor * c_i with probability p_degrade. Structure unchanged.
inline Problem degrade(const Problem& problem, double p_degrade = 0.25,
                       double factor = 0.5, std::uint64_t seed = 0) {
  if (!(p_degrade >= 0.0 && p_degrade <= 1.0))
    throw GenError("degrade: probability must be in [0, 1]");
  if (!(factor > 0.0 && factor <= 1.0))
    throw GenError("degrade: factor must be in (0, 1]");
  Problem out = problem;
  Rng rng(seed);
  for (double& c : out.capacities)
    if (rng.bernoulli(p_degrade)) c *= factor;
  return out;
}

// Dense reindexing maps from a pruning pass. -1 marks a removed entity.
struct PruneMap {
  std::vector<std::int32_t> link_map;    // old link -> new link or -1
  std::vector<std::int64_t> stream_map;  // old stream -> new stream or -1

  std::vector<std::int64_t> removed_streams() const {
    std::vector<std::int64_t> out;
    for (std::int64_t j = 0; j < std::int64_t(stream_map.size()); ++j)
      if (stream_map[static_cast<std::size_t>(j)] < 0) out.push_back(j);
    return out;
  }

  // Projects per-stream data (e.g. a prior allocation) onto the survivors.
  std::vector<double> project_streams(const std::vector<double>& v) const {
    if (v.size() != stream_map.size())
      throw std::invalid_argument("prune map: stream vector length mismatch");
    std::vector<double> out;
    for (std::size_t j = 0; j < v.size(); ++j)
      if (stream_map[j] >= 0) out.push_back(v[j]);
    return out;
  }

  // Projects per-link data (e.g. prior prices) onto the surviving links.
  std::vector<double> project_links(const std::vector<double>& v) const {
    if (v.size() != link_map.size())
      throw std::invalid_argument("prune map: link vector length mismatch");
    std::vector<double> out;
    for (std::size_t l = 0; l < v.size(); ++l)
      if (link_map[l] >= 0) out.push_back(v[l]);
    return out;
  }
};

// Link failure: each link fails independently with probability p_fail. A
// failed link loses its row and takes every stream traversing it along;
// survivors are reindexed densely.
inline std::pair<Problem, PruneMap> fail_and_prune(const Problem& problem,
                                                   double p_fail = 0.25,
                                                   std::uint64_t seed = 0) {
  if (!(p_fail >= 0.0 && p_fail < 1.0))
    throw GenError("fail_and_prune: probability must be in [0, 1)");
  Rng rng(seed);
  std::vector<char> failed(static_cast<std::size_t>(problem.m), 0);
  for (auto& f : failed) f = rng.bernoulli(p_fail) ? 1 : 0;

  PruneMap map;
  map.link_map.assign(static_cast<std::size_t>(problem.m), -1);
  std::int32_t next_link = 0;
  std::vector<double> capacities;
  for (std::int64_t l = 0; l < problem.m; ++l) {
    if (failed[static_cast<std::size_t>(l)]) continue;
    map.link_map[static_cast<std::size_t>(l)] = next_link++;
    capacities.push_back(problem.capacities[static_cast<std::size_t>(l)]);
  }
  if (next_link == 0) throw GenError("fail_and_prune: all links failed");

  map.stream_map.assign(static_cast<std::size_t>(problem.n), -1);
  std::vector<Stream> streams;
  std::int64_t next_stream = 0;
  for (const Stream& s : problem.streams) {
    bool hit = false;
    for (std::int32_t link : s.route)
      if (failed[static_cast<std::size_t>(link)]) {
        hit = true;
        break;
      }
    if (hit) continue;
    Stream copy = s;
    for (std::int32_t& link : copy.route)
      link = map.link_map[static_cast<std::size_t>(link)];
    map.stream_map[static_cast<std::size_t>(s.id)] = next_stream;
    copy.id = next_stream++;
    streams.push_back(std::move(copy));
  }
  if (streams.empty())
    throw GenError("fail_and_prune: no stream survived the failures");
  return {build_problem(std::move(streams), std::move(capacities)), map};
}

}  // namespace numpmp

#endif  // NUMPMP_GEN_HPP_
