#ifndef NUMPMP_MODEL_HPP_
#define NUMPMP_MODEL_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <sstream>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "numpmp/common.hpp"

namespace numpmp {

enum class StreamKind : std::uint8_t { Log = 0, Linear = 1, Extension = 2 };

inline const char* to_string(StreamKind k) {
  switch (k) {
    case StreamKind::Log: return "log";
    case StreamKind::Linear: return "lin";
    case StreamKind::Extension: return "ext";
  }
  return "?";
}

// A traffic stream: a fixed route through distinct links plus a concave
// utility U(x) = w*log(x), U(x) = w*x, or a registered extension utility.
// Slack streams are not represented here; one is implied per link.
struct Stream {
  std::int64_t id = -1;
  StreamKind kind = StreamKind::Log;
  std::string extension;  // utility name when kind == Extension
  double weight = 1.0;
  std::vector<std::int32_t> route;  // distinct link ids, order preserved
};

// Terminal bookkeeping for the bipartite stream/link view. Terminals are
// numbered stream-major: stream 0's route terminals first, then stream 1's,
// ..., followed by one slack terminal per link. J = nnz + m.
//
// Two layouts of the same incidence are kept: terminal -> link (gather
// direction, used by the prox updates) and link -> terminals as CSR
// segments (scatter/reduce direction, used by the link averaging).
struct TerminalLayout {
  std::int64_t total_terminals = 0;  // J
  std::int64_t nnz = 0;              // traffic terminals
  std::vector<std::int64_t> stream_offsets;   // n+1; terminals of stream j
  std::vector<std::int32_t> terminal_link;    // J
  std::vector<std::int64_t> link_offsets;     // m+1
  std::vector<std::int64_t> link_terminals;   // J, ascending per link
  std::vector<std::int32_t> link_counts;      // m, |l| including slack

  std::int64_t slack_terminal(std::int64_t link) const { return nnz + link; }
};

struct Problem {
  std::int64_t m = 0;  // links
  std::int64_t n = 0;  // traffic streams
  std::vector<double> capacities;
  std::vector<Stream> streams;
  TerminalLayout layout;
};

struct Violation {
  std::string entity;  // "stream" | "link" | "problem"
  std::int64_t id = -1;
  std::string rule;
  std::string message;
};

// Checks every model invariant. Returns violations instead of throwing so
// callers can report all of them at once.
inline std::vector<Violation> validate(const Problem& p) {
  std::vector<Violation> out;
  auto add = [&](const std::string& entity, std::int64_t id,
                 const std::string& rule, const std::string& msg) {
    out.push_back(Violation{entity, id, rule, msg});
  };

  if (p.m <= 0) add("problem", -1, "link-count", "m must be >= 1");
  if (p.n <= 0) add("problem", -1, "stream-count", "n must be >= 1");
  if (std::int64_t(p.capacities.size()) != p.m)
    add("problem", -1, "capacity-length",
        "capacities length does not match m");
  if (std::int64_t(p.streams.size()) != p.n)
    add("problem", -1, "stream-length", "stream list length does not match n");

  for (std::int64_t i = 0; i < std::int64_t(p.capacities.size()); ++i) {
    double c = p.capacities[static_cast<std::size_t>(i)];
    if (!(c > 0.0) || !std::isfinite(c)) {
      std::ostringstream msg;
      msg << "link " << i << " has non-positive capacity " << c;
      add("link", i, "positive-capacity", msg.str());
    }
  }

  std::int64_t nnz = 0;
  for (std::int64_t j = 0; j < std::int64_t(p.streams.size()); ++j) {
    const Stream& s = p.streams[static_cast<std::size_t>(j)];
    if (s.id != j)
      add("stream", j, "dense-ids", "stream ids must be dense 0..n-1");
    if (s.route.empty())
      add("stream", j, "non-empty-route", "route must contain a link");
    std::vector<std::int32_t> sorted = s.route;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
      std::ostringstream msg;
      msg << "stream " << j << " visits a link twice";
      add("stream", j, "distinct-links", msg.str());
    }
    for (std::int32_t link : s.route) {
      if (link < 0 || std::int64_t(link) >= p.m) {
        std::ostringstream msg;
        msg << "stream " << j << " references link " << link
            << " outside [0, " << p.m << ")";
        add("stream", j, "link-in-range", msg.str());
      }
    }
    if (!std::isfinite(s.weight)) {
      add("stream", j, "finite-weight", "weight must be finite");
    } else if (s.kind == StreamKind::Log) {
      if (!(s.weight > 0.0))
        add("stream", j, "positive-log-weight",
            "log-utility stream requires weight > 0");
    } else {
      if (s.weight < 0.0)
        add("stream", j, "nonnegative-weight", "weight must be >= 0");
    }
    if (s.kind == StreamKind::Extension && s.extension.empty())
      add("stream", j, "extension-name", "extension stream needs a name");
    nnz += std::int64_t(s.route.size());
  }

  const TerminalLayout& L = p.layout;
  if (L.total_terminals != 0 || L.nnz != 0) {  // layout present
    if (L.nnz != nnz)
      add("problem", -1, "incidence-nnz",
          "incidence nonzero count does not equal sum of route lengths");
    if (L.total_terminals != nnz + p.m)
      add("problem", -1, "terminal-count", "J must equal nnz + m");
    std::int64_t count_sum = 0;
    for (std::int32_t c : L.link_counts) {
      count_sum += c;
      if (c < 1)
        add("problem", -1, "slack-terminal",
            "every link carries at least its slack terminal");
    }
    if (!L.link_counts.empty() && count_sum != L.total_terminals)
      add("problem", -1, "count-sum", "sum of |l| must equal J");
  }
  return out;
}

namespace detail {

inline TerminalLayout build_layout(const std::vector<Stream>& streams,
                                   std::int64_t m) {
  TerminalLayout L;
  const std::int64_t n = std::int64_t(streams.size());
  L.stream_offsets.assign(static_cast<std::size_t>(n) + 1, 0);
  for (std::int64_t j = 0; j < n; ++j)
    L.stream_offsets[static_cast<std::size_t>(j) + 1] =
        L.stream_offsets[static_cast<std::size_t>(j)] +
        std::int64_t(streams[static_cast<std::size_t>(j)].route.size());
  L.nnz = L.stream_offsets[static_cast<std::size_t>(n)];
  L.total_terminals = L.nnz + m;

  L.terminal_link.assign(static_cast<std::size_t>(L.total_terminals), 0);
  for (std::int64_t j = 0; j < n; ++j) {
    std::int64_t off = L.stream_offsets[static_cast<std::size_t>(j)];
    const auto& route = streams[static_cast<std::size_t>(j)].route;
    for (std::size_t i = 0; i < route.size(); ++i)
      L.terminal_link[static_cast<std::size_t>(off) + i] = route[i];
  }
  for (std::int64_t l = 0; l < m; ++l)
    L.terminal_link[static_cast<std::size_t>(L.nnz + l)] =
        static_cast<std::int32_t>(l);

  L.link_counts.assign(static_cast<std::size_t>(m), 0);
  for (std::int64_t t = 0; t < L.total_terminals; ++t)
    ++L.link_counts[static_cast<std::size_t>(
        L.terminal_link[static_cast<std::size_t>(t)])];

  L.link_offsets.assign(static_cast<std::size_t>(m) + 1, 0);
  for (std::int64_t l = 0; l < m; ++l)
    L.link_offsets[static_cast<std::size_t>(l) + 1] =
        L.link_offsets[static_cast<std::size_t>(l)] +
        L.link_counts[static_cast<std::size_t>(l)];

  L.link_terminals.assign(static_cast<std::size_t>(L.total_terminals), 0);
  std::vector<std::int64_t> cursor(L.link_offsets.begin(),
                                   L.link_offsets.end() - 1);
  for (std::int64_t t = 0; t < L.total_terminals; ++t) {
    std::int32_t l = L.terminal_link[static_cast<std::size_t>(t)];
    L.link_terminals[static_cast<std::size_t>(cursor[static_cast<std::size_t>(l)]++)] = t;
  }
  return L;
}

inline std::string violations_message(const std::vector<Violation>& vs) {
  std::ostringstream msg;
  msg << "invalid problem:";
  std::size_t shown = 0;
  for (const Violation& v : vs) {
    if (shown++ == 8) {
      msg << " ... (" << vs.size() - 8 << " more)";
      break;
    }
    msg << " [" << v.rule << ": " << v.message << "]";
  }
  return msg.str();
}

}  // namespace detail

// Validates the inputs, assigns dense stream ids, and constructs the
// incidence layouts. Slack streams are implicit (one per link) and never
// appear in the stream list.
inline Problem build_problem(std::vector<Stream> streams,
                             std::vector<double> capacities) {
  if (streams.empty()) throw ValidationError("stream list is empty");
  if (capacities.empty()) throw ValidationError("capacity list is empty");
  Problem p;
  p.m = std::int64_t(capacities.size());
  p.n = std::int64_t(streams.size());
  p.capacities = std::move(capacities);
  p.streams = std::move(streams);
  for (std::int64_t j = 0; j < p.n; ++j)
    p.streams[static_cast<std::size_t>(j)].id = j;

  std::vector<Violation> vs = validate(p);
  if (!vs.empty()) throw ValidationError(detail::violations_message(vs));

  p.layout = detail::build_layout(p.streams, p.m);
  vs = validate(p);
  if (!vs.empty()) throw ValidationError(detail::violations_message(vs));
  return p;
}

// Traffic streams batched by (utility kind, terminal count) for vectorized
// prox evaluation. terminal_links[i][k] is the link of terminal i of the
// group's k-th member, which reproduces the incidence exactly.
struct TypeGroup {
  StreamKind kind = StreamKind::Log;
  std::string extension;
  std::int32_t tau = 0;
  std::vector<std::int64_t> members;  // stream ids, ascending
  std::vector<double> weights;
  std::vector<std::vector<std::int32_t>> terminal_links;
};

// Partition of the traffic streams, ordered by ascending tau, then kind
// (Log < Linear < Extension), then first member id. The slack streams form
// one implicit group handled directly by the solver.
inline std::vector<TypeGroup> group_streams(const Problem& p) {
  using Key = std::tuple<std::int32_t, int, std::string>;
  std::map<Key, TypeGroup> grouped;
  for (const Stream& s : p.streams) {
    Key key{static_cast<std::int32_t>(s.route.size()),
            static_cast<int>(s.kind),
            s.kind == StreamKind::Extension ? s.extension : std::string()};
    TypeGroup& g = grouped[key];
    if (g.members.empty()) {
      g.kind = s.kind;
      g.extension = std::get<2>(key);
      g.tau = std::get<0>(key);
      g.terminal_links.resize(static_cast<std::size_t>(g.tau));
    }
    g.members.push_back(s.id);
    g.weights.push_back(s.weight);
    for (std::size_t i = 0; i < s.route.size(); ++i)
      g.terminal_links[i].push_back(s.route[i]);
  }
  std::vector<TypeGroup> out;
  out.reserve(grouped.size());
  for (auto& [key, g] : grouped) out.push_back(std::move(g));
  std::sort(out.begin(), out.end(), [](const TypeGroup& a, const TypeGroup& b) {
    if (a.tau != b.tau) return a.tau < b.tau;
    if (a.kind != b.kind) return static_cast<int>(a.kind) < static_cast<int>(b.kind);
    return a.members.front() < b.members.front();
  });
  return out;
}

}  // namespace numpmp

#endif  // NUMPMP_MODEL_HPP_
