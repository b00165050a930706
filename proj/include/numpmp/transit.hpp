#ifndef NUMPMP_TRANSIT_HPP_
#define NUMPMP_TRANSIT_HPP_

#include <algorithm>
#include <cstdint>
#include <deque>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "numpmp/common.hpp"
#include "numpmp/model.hpp"
#include "numpmp/rng.hpp"

namespace numpmp {

// Time-expanded transit network. Links are time-stamped spatial edges with
// index e*T + t; every link takes one time bin and carries `seats` units.
struct TransitSpec {
  std::int32_t stations = 0;       // S
  std::int32_t time_bins = 0;      // T
  double bin_minutes = 5.0;        // delta t
  std::int64_t spatial_edges = 0;  // |E|, cycle + random extras
  std::int64_t od_pairs = 0;
  std::int32_t routes_per_od = 1;
  std::int32_t departures_per_route = 1;
  double seats = 50.0;
  std::uint64_t seed = 0;
};

struct TransitOd {
  std::int32_t origin = 0;
  std::int32_t dest = 0;
  std::vector<std::vector<std::int32_t>> routes;  // spatial edge sequences
};

struct TransitStreamInfo {
  std::int32_t od = 0;     // index into ods
  std::int32_t route = 0;  // index into ods[od].routes
  std::int32_t t0 = 0;     // departure bin
};

struct TransitMetadata {
  std::int32_t stations = 0;
  std::int32_t time_bins = 0;
  double bin_minutes = 5.0;
  double seats = 50.0;
  std::vector<std::pair<std::int32_t, std::int32_t>> edges;  // from, to
  std::vector<TransitOd> ods;
  std::vector<TransitStreamInfo> streams;  // one per problem stream, in order
  std::int64_t dropped_streams = 0;        // arrival past the horizon
  std::vector<std::string> warnings;

  std::int64_t link_id(std::int32_t edge, std::int32_t t) const {
    return std::int64_t(edge) * time_bins + t;
  }
};

namespace detail {

// BFS shortest path (unit weights) honoring masks; neighbors are scanned in
// adjacency order, so ties break deterministically. Returns node path or
// empty when unreachable.
inline std::vector<std::int32_t> bfs_path(
    const std::vector<std::vector<std::pair<std::int32_t, std::int32_t>>>& adj,
    std::int32_t src, std::int32_t dst, const std::vector<char>& node_banned,
    const std::set<std::pair<std::int32_t, std::int32_t>>& edge_banned) {
  const std::int32_t n = static_cast<std::int32_t>(adj.size());
  std::vector<std::int32_t> parent(static_cast<std::size_t>(n), -2);
  std::deque<std::int32_t> queue;
  parent[static_cast<std::size_t>(src)] = -1;
  queue.push_back(src);
  while (!queue.empty()) {
    std::int32_t v = queue.front();
    queue.pop_front();
    if (v == dst) break;
    for (const auto& [to, edge] : adj[static_cast<std::size_t>(v)]) {
      if (node_banned[static_cast<std::size_t>(to)]) continue;
      if (edge_banned.count({v, to})) continue;
      if (parent[static_cast<std::size_t>(to)] != -2) continue;
      parent[static_cast<std::size_t>(to)] = v;
      queue.push_back(to);
    }
  }
  if (parent[static_cast<std::size_t>(dst)] == -2) return {};
  std::vector<std::int32_t> path;
  for (std::int32_t v = dst; v != -1; v = parent[static_cast<std::size_t>(v)])
    path.push_back(v);
  std::reverse(path.begin(), path.end());
  return path;
}

// Yen's algorithm for up to k loop-free shortest paths (unit weights),
// deterministic candidate ordering by (length, node sequence).
inline std::vector<std::vector<std::int32_t>> k_shortest_paths(
    const std::vector<std::vector<std::pair<std::int32_t, std::int32_t>>>& adj,
    std::int32_t src, std::int32_t dst, std::int32_t k) {
  std::vector<std::vector<std::int32_t>> found;
  std::vector<char> no_ban(adj.size(), 0);
  std::set<std::pair<std::int32_t, std::int32_t>> no_edges;
  std::vector<std::int32_t> first = bfs_path(adj, src, dst, no_ban, no_edges);
  if (first.empty()) return found;
  found.push_back(std::move(first));

  auto cmp = [](const std::vector<std::int32_t>& a,
                const std::vector<std::int32_t>& b) {
    if (a.size() != b.size()) return a.size() < b.size();
    return a < b;
  };
  std::set<std::vector<std::int32_t>, decltype(cmp)> candidates(cmp);

  while (static_cast<std::int32_t>(found.size()) < k) {
    const std::vector<std::int32_t>& last = found.back();
    for (std::size_t spur = 0; spur + 1 < last.size(); ++spur) {
      std::vector<std::int32_t> root(last.begin(),
                                     last.begin() + std::ptrdiff_t(spur) + 1);
      std::set<std::pair<std::int32_t, std::int32_t>> banned_edges;
      for (const auto& path : found) {
        if (path.size() > spur + 1 &&
            std::equal(root.begin(), root.end(), path.begin()))
          banned_edges.insert({path[spur], path[spur + 1]});
      }
      std::vector<char> banned_nodes(adj.size(), 0);
      for (std::size_t i = 0; i < spur; ++i)
        banned_nodes[static_cast<std::size_t>(root[i])] = 1;
      std::vector<std::int32_t> tail =
          bfs_path(adj, root.back(), dst, banned_nodes, banned_edges);
      if (tail.empty()) continue;
      root.pop_back();
      root.insert(root.end(), tail.begin(), tail.end());
      if (std::find(found.begin(), found.end(), root) == found.end())
        candidates.insert(std::move(root));
    }
    if (candidates.empty()) break;
    found.push_back(*candidates.begin());
    candidates.erase(candidates.begin());
  }
  return found;
}

}  // namespace detail

// Builds the time-expanded problem: a strongly connected random directed
// spatial graph (a random cycle guarantees connectivity, extra random edges
// fill up to |E|), OD pairs with loop-free k-shortest spatial routes, one
// stream per (OD, route, departure bin). Departures are evenly spaced over
// the horizon; streams whose arrival would pass T-1 are dropped. All
// streams have log utility with weight 1.
inline std::pair<Problem, TransitMetadata> gen_transit(const TransitSpec& spec) {
  const std::int32_t S = spec.stations;
  const std::int32_t T = spec.time_bins;
  const std::int64_t E = spec.spatial_edges;
  if (S < 2) throw GenError("transit spec: stations must be >= 2");
  if (T < 1) throw GenError("transit spec: time_bins must be >= 1");
  if (!(spec.bin_minutes > 0.0))
    throw GenError("transit spec: bin_minutes must be > 0");
  if (E < S) throw GenError("transit spec: need at least S edges for strong connectivity");
  if (E > std::int64_t(S) * (S - 1))
    throw GenError("transit spec: more edges than ordered station pairs");
  if (spec.od_pairs < 1 || spec.od_pairs > std::int64_t(S) * (S - 1))
    throw GenError("transit spec: od_pairs out of range");
  if (spec.routes_per_od < 1)
    throw GenError("transit spec: routes_per_od must be >= 1");
  if (spec.departures_per_route < 1)
    throw GenError("transit spec: departures_per_route must be >= 1");
  if (!(spec.seats > 0.0)) throw GenError("transit spec: seats must be > 0");

  Rng rng(spec.seed);
  TransitMetadata meta;
  meta.stations = S;
  meta.time_bins = T;
  meta.bin_minutes = spec.bin_minutes;
  meta.seats = spec.seats;

  // Random permutation cycle, then distinct random extra edges.
  std::vector<std::int32_t> perm(static_cast<std::size_t>(S));
  for (std::int32_t v = 0; v < S; ++v) perm[static_cast<std::size_t>(v)] = v;
  for (std::int32_t i = S - 1; i > 0; --i) {
    std::int64_t j = rng.uniform_int(i + 1);
    std::swap(perm[static_cast<std::size_t>(i)],
              perm[static_cast<std::size_t>(j)]);
  }
  std::set<std::pair<std::int32_t, std::int32_t>> edge_set;
  for (std::int32_t i = 0; i < S; ++i) {
    std::int32_t from = perm[static_cast<std::size_t>(i)];
    std::int32_t to = perm[static_cast<std::size_t>((i + 1) % S)];
    meta.edges.emplace_back(from, to);
    edge_set.insert({from, to});
  }
  int guard = 0;
  while (std::int64_t(meta.edges.size()) < E) {
    std::int32_t from = static_cast<std::int32_t>(rng.uniform_int(S));
    std::int32_t to = static_cast<std::int32_t>(rng.uniform_int(S));
    if (from == to || edge_set.count({from, to})) {
      if (++guard > 100 * S * S)
        throw GenError("transit spec: could not place the requested edges");
      continue;
    }
    meta.edges.emplace_back(from, to);
    edge_set.insert({from, to});
  }

  std::vector<std::vector<std::pair<std::int32_t, std::int32_t>>> adj(
      static_cast<std::size_t>(S));
  for (std::int32_t e = 0; e < std::int32_t(meta.edges.size()); ++e)
    adj[static_cast<std::size_t>(meta.edges[static_cast<std::size_t>(e)].first)]
        .emplace_back(meta.edges[static_cast<std::size_t>(e)].second, e);
  for (auto& nbrs : adj) std::sort(nbrs.begin(), nbrs.end());

  std::set<std::pair<std::int32_t, std::int32_t>> od_set;
  guard = 0;
  while (std::int64_t(od_set.size()) < spec.od_pairs) {
    std::int32_t o = static_cast<std::int32_t>(rng.uniform_int(S));
    std::int32_t d = static_cast<std::int32_t>(rng.uniform_int(S));
    if (o == d || od_set.count({o, d})) {
      if (++guard > 100 * S * S)
        throw GenError("transit spec: could not place the requested OD pairs");
      continue;
    }
    od_set.insert({o, d});
    TransitOd od;
    od.origin = o;
    od.dest = d;
    std::vector<std::vector<std::int32_t>> paths =
        detail::k_shortest_paths(adj, o, d, spec.routes_per_od);
    if (paths.empty()) {
      std::ostringstream warn;
      warn << "OD " << o << "->" << d << " is disconnected; skipped";
      meta.warnings.push_back(warn.str());
      continue;
    }
    if (std::int32_t(paths.size()) < spec.routes_per_od) {
      std::ostringstream warn;
      warn << "OD " << o << "->" << d << " has only " << paths.size()
           << " distinct routes";
      meta.warnings.push_back(warn.str());
    }
    for (const auto& path : paths) {
      std::vector<std::int32_t> edges;
      for (std::size_t i = 0; i + 1 < path.size(); ++i) {
        const auto& nbrs = adj[static_cast<std::size_t>(path[i])];
        auto pos = std::lower_bound(
            nbrs.begin(), nbrs.end(),
            std::make_pair(path[i + 1], std::int32_t(-1)));
        edges.push_back(pos->second);
      }
      od.routes.push_back(std::move(edges));
    }
    meta.ods.push_back(std::move(od));
  }
  if (meta.ods.empty())
    throw GenError("transit spec: no usable OD pair");

  // One stream per (OD, route, departure); evenly spaced departures.
  std::vector<Stream> streams;
  for (std::int32_t odi = 0; odi < std::int32_t(meta.ods.size()); ++odi) {
    const TransitOd& od = meta.ods[static_cast<std::size_t>(odi)];
    for (std::int32_t r = 0; r < std::int32_t(od.routes.size()); ++r) {
      const auto& route = od.routes[static_cast<std::size_t>(r)];
      for (std::int32_t d = 0; d < spec.departures_per_route; ++d) {
        std::int32_t t0 = static_cast<std::int32_t>(
            (std::int64_t(d) * T) / spec.departures_per_route);
        if (t0 + std::int32_t(route.size()) - 1 > T - 1) {
          ++meta.dropped_streams;
          continue;
        }
        Stream s;
        s.kind = StreamKind::Log;
        s.weight = 1.0;
        for (std::size_t i = 0; i < route.size(); ++i)
          s.route.push_back(static_cast<std::int32_t>(
              meta.link_id(route[i], t0 + static_cast<std::int32_t>(i))));
        streams.push_back(std::move(s));
        meta.streams.push_back(TransitStreamInfo{odi, r, t0});
      }
    }
  }
  if (streams.empty())
    throw GenError("transit spec: every stream fell outside the horizon");

  const std::int64_t m = std::int64_t(meta.edges.size()) * T;
  std::vector<double> capacities(static_cast<std::size_t>(m), spec.seats);
  return {build_problem(std::move(streams), std::move(capacities)), meta};
}

// Path price pi_j = sum of link prices along stream j's route.
inline std::vector<double> path_prices(const Problem& problem,
                                       const std::vector<double>& lambda) {
  if (std::int64_t(lambda.size()) != problem.m)
    throw std::invalid_argument("path_prices: lambda length mismatch");
  std::vector<double> pi(static_cast<std::size_t>(problem.n), 0.0);
  for (const Stream& s : problem.streams) {
    double total = 0.0;
    for (std::int32_t link : s.route)
      total += lambda[static_cast<std::size_t>(link)];
    pi[static_cast<std::size_t>(s.id)] = total;
  }
  return pi;
}

// Per-link prices along each selected stream's route, normalized by the
// maximum price over the union of those routes (all values in [0, 1]).
inline std::vector<std::vector<double>> normalized_route_prices(
    const Problem& problem, const std::vector<double>& lambda,
    const std::vector<std::int64_t>& stream_ids) {
  double max_price = 0.0;
  for (std::int64_t sid : stream_ids)
    for (std::int32_t link : problem.streams[static_cast<std::size_t>(sid)].route)
      max_price = std::max(max_price, lambda[static_cast<std::size_t>(link)]);
  std::vector<std::vector<double>> out;
  for (std::int64_t sid : stream_ids) {
    std::vector<double> row;
    for (std::int32_t link : problem.streams[static_cast<std::size_t>(sid)].route)
      row.push_back(max_price > 0.0
                        ? lambda[static_cast<std::size_t>(link)] / max_price
                        : 0.0);
    out.push_back(std::move(row));
  }
  return out;
}

// Route-comparison rows for one (OD, departure bin): allocated flow, path
// price, and the normalized per-link price sequence of each route. CSV via
// the cli module.
struct TransitReportRow {
  std::int64_t stream = 0;
  std::int32_t od = 0;
  std::int32_t route = 0;
  std::int32_t t0 = 0;
  double x = 0.0;
  double pi = 0.0;
  std::vector<double> lambda_hat;
};

inline std::vector<TransitReportRow> transit_report(
    const Problem& problem, const std::vector<double>& x,
    const std::vector<double>& lambda, const TransitMetadata& meta,
    std::int32_t od, std::int32_t t0) {
  if (std::int64_t(meta.streams.size()) != problem.n)
    throw std::invalid_argument("transit report: metadata does not match problem");
  if (od < 0 || od >= std::int32_t(meta.ods.size())) {
    std::ostringstream msg;
    msg << "unknown OD id " << od << "; available: 0.."
        << meta.ods.size() - 1;
    throw std::invalid_argument(msg.str());
  }
  std::vector<std::int64_t> selected;
  for (std::int64_t j = 0; j < std::int64_t(meta.streams.size()); ++j) {
    const TransitStreamInfo& info = meta.streams[static_cast<std::size_t>(j)];
    if (info.od == od && info.t0 == t0) selected.push_back(j);
  }
  std::vector<std::vector<double>> hats =
      normalized_route_prices(problem, lambda, selected);
  std::vector<double> pi = path_prices(problem, lambda);
  std::vector<TransitReportRow> rows;
  for (std::size_t i = 0; i < selected.size(); ++i) {
    const std::int64_t sid = selected[i];
    const TransitStreamInfo& info =
        meta.streams[static_cast<std::size_t>(sid)];
    TransitReportRow row;
    row.stream = sid;
    row.od = info.od;
    row.route = info.route;
    row.t0 = info.t0;
    row.x = x[static_cast<std::size_t>(sid)];
    row.pi = pi[static_cast<std::size_t>(sid)];
    row.lambda_hat = std::move(hats[i]);
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace numpmp

#endif  // NUMPMP_TRANSIT_HPP_
