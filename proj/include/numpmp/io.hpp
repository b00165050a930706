#ifndef NUMPMP_IO_HPP_
#define NUMPMP_IO_HPP_

#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "numpmp/common.hpp"
#include "numpmp/gen.hpp"
#include "numpmp/model.hpp"
#include "numpmp/solver.hpp"
#include "numpmp/transit.hpp"

namespace numpmp {

// Problem files: text "NUMP 1 <m> <n>" followed by the capacities line and
// one route line per stream, or the binary container "NUMPB 1" used for
// large instances. Both round-trip bit exactly (text via 17 significant
// digits).
enum class ProblemEncoding { Auto, Text, Binary };

namespace detail {

inline std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline double parse_double(const std::string& tok, std::int64_t line) {
  char* end = nullptr;
  double v = std::strtod(tok.c_str(), &end);
  if (end == tok.c_str() || *end != '\0') {
    std::ostringstream msg;
    msg << "parse error at line " << line << ": expected a number, got '"
        << tok << "'";
    throw IoError(msg.str());
  }
  return v;
}

inline std::int64_t parse_int(const std::string& tok, std::int64_t line) {
  char* end = nullptr;
  long long v = std::strtoll(tok.c_str(), &end, 10);
  if (end == tok.c_str() || *end != '\0') {
    std::ostringstream msg;
    msg << "parse error at line " << line << ": expected an integer, got '"
        << tok << "'";
    throw IoError(msg.str());
  }
  return static_cast<std::int64_t>(v);
}

class LineReader {
 public:
  explicit LineReader(const std::string& path) : in_(path), path_(path) {
    if (!in_) throw IoError("cannot open '" + path + "'");
  }
  // Next line split on spaces; throws when the file ends early.
  std::vector<std::string> next_tokens() {
    std::string line;
    if (!std::getline(in_, line)) {
      std::ostringstream msg;
      msg << "parse error at line " << lineno_ + 1 << ": unexpected end of '"
          << path_ << "'";
      throw IoError(msg.str());
    }
    ++lineno_;
    std::vector<std::string> toks;
    std::istringstream split(line);
    std::string tok;
    while (split >> tok) toks.push_back(tok);
    return toks;
  }
  bool at_end() {
    std::string line;
    while (std::getline(in_, line)) {
      ++lineno_;
      std::istringstream split(line);
      std::string tok;
      if (split >> tok) return false;
    }
    return true;
  }
  std::int64_t line() const { return lineno_; }

 private:
  std::ifstream in_;
  std::string path_;
  std::int64_t lineno_ = 0;
};

// Binary helpers: explicit little-endian encoding.
inline void put_u64(std::ostream& out, std::uint64_t v) {
  unsigned char buf[8];
  for (int i = 0; i < 8; ++i) buf[i] = static_cast<unsigned char>(v >> (8 * i));
  out.write(reinterpret_cast<const char*>(buf), 8);
}
inline std::uint64_t get_u64(std::istream& in, const std::string& path) {
  unsigned char buf[8];
  if (!in.read(reinterpret_cast<char*>(buf), 8))
    throw IoError("truncated binary problem file '" + path + "'");
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= std::uint64_t(buf[i]) << (8 * i);
  return v;
}
inline void put_f64(std::ostream& out, double v) {
  std::uint64_t bits;
  std::memcpy(&bits, &v, 8);
  put_u64(out, bits);
}
inline double get_f64(std::istream& in, const std::string& path) {
  std::uint64_t bits = get_u64(in, path);
  double v;
  std::memcpy(&v, &bits, 8);
  return v;
}

}  // namespace detail

inline void write_problem(const Problem& problem, const std::string& path,
                          ProblemEncoding encoding = ProblemEncoding::Auto) {
  bool binary = encoding == ProblemEncoding::Binary ||
                (encoding == ProblemEncoding::Auto && problem.m >= 1000000);
  if (binary) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write '" + path + "'");
    out << "NUMPB 1\n";
    detail::put_u64(out, static_cast<std::uint64_t>(problem.m));
    detail::put_u64(out, static_cast<std::uint64_t>(problem.n));
    for (double c : problem.capacities) detail::put_f64(out, c);
    for (const Stream& s : problem.streams) {
      out.put(static_cast<char>(s.kind));
      if (s.kind == StreamKind::Extension) {
        detail::put_u64(out, s.extension.size());
        out.write(s.extension.data(),
                  static_cast<std::streamsize>(s.extension.size()));
      }
      detail::put_f64(out, s.weight);
      detail::put_u64(out, s.route.size());
      for (std::int32_t link : s.route)
        detail::put_u64(out, static_cast<std::uint64_t>(link));
    }
    if (!out) throw IoError("write failed on '" + path + "'");
    return;
  }
  std::ofstream out(path);
  if (!out) throw IoError("cannot write '" + path + "'");
  out << "NUMP 1 " << problem.m << ' ' << problem.n << '\n';
  for (std::int64_t i = 0; i < problem.m; ++i) {
    if (i) out << ' ';
    out << detail::fmt_double(problem.capacities[static_cast<std::size_t>(i)]);
  }
  out << '\n';
  for (const Stream& s : problem.streams) {
    if (s.kind == StreamKind::Extension)
      out << "ext:" << s.extension;
    else
      out << to_string(s.kind);
    out << ' ' << detail::fmt_double(s.weight) << ' ' << s.route.size();
    for (std::int32_t link : s.route) out << ' ' << link;
    out << '\n';
  }
  if (!out) throw IoError("write failed on '" + path + "'");
}

inline Problem read_problem(const std::string& path) {
  // Sniff the magic.
  {
    std::ifstream probe(path, std::ios::binary);
    if (!probe) throw IoError("cannot open '" + path + "'");
    char magic[8] = {};
    probe.read(magic, 8);
    if (probe.gcount() >= 8 && std::memcmp(magic, "NUMPB 1\n", 8) == 0) {
      std::ifstream in(path, std::ios::binary);
      in.seekg(8);
      const std::int64_t m =
          static_cast<std::int64_t>(detail::get_u64(in, path));
      const std::int64_t n =
          static_cast<std::int64_t>(detail::get_u64(in, path));
      if (m < 1 || n < 1) throw IoError("binary problem header out of range");
      std::vector<double> capacities(static_cast<std::size_t>(m));
      for (double& c : capacities) c = detail::get_f64(in, path);
      std::vector<Stream> streams(static_cast<std::size_t>(n));
      for (Stream& s : streams) {
        int kind = in.get();
        if (kind < 0) throw IoError("truncated binary problem file '" + path + "'");
        if (kind > 2) throw IoError("unknown stream kind in '" + path + "'");
        s.kind = static_cast<StreamKind>(kind);
        if (s.kind == StreamKind::Extension) {
          std::uint64_t len = detail::get_u64(in, path);
          s.extension.resize(len);
          if (!in.read(s.extension.data(), static_cast<std::streamsize>(len)))
            throw IoError("truncated binary problem file '" + path + "'");
        }
        s.weight = detail::get_f64(in, path);
        std::uint64_t route_len = detail::get_u64(in, path);
        s.route.resize(route_len);
        for (std::int32_t& link : s.route)
          link = static_cast<std::int32_t>(detail::get_u64(in, path));
      }
      return build_problem(std::move(streams), std::move(capacities));
    }
  }

  detail::LineReader reader(path);
  std::vector<std::string> head = reader.next_tokens();
  if (head.size() != 4 || head[0] != "NUMP")
    throw IoError("parse error at line 1: expected 'NUMP 1 <m> <n>'");
  if (detail::parse_int(head[1], 1) != 1)
    throw IoError("parse error at line 1: unsupported problem format version");
  const std::int64_t m = detail::parse_int(head[2], 1);
  const std::int64_t n = detail::parse_int(head[3], 1);
  if (m < 1 || n < 1)
    throw IoError("parse error at line 1: m and n must be >= 1");

  std::vector<std::string> caps = reader.next_tokens();
  if (std::int64_t(caps.size()) != m) {
    std::ostringstream msg;
    msg << "parse error at line 2: expected " << m << " capacities, got "
        << caps.size();
    throw IoError(msg.str());
  }
  std::vector<double> capacities(static_cast<std::size_t>(m));
  for (std::int64_t i = 0; i < m; ++i)
    capacities[static_cast<std::size_t>(i)] =
        detail::parse_double(caps[static_cast<std::size_t>(i)], 2);

  std::vector<Stream> streams(static_cast<std::size_t>(n));
  for (std::int64_t j = 0; j < n; ++j) {
    std::vector<std::string> toks = reader.next_tokens();
    const std::int64_t line = reader.line();
    if (toks.size() < 3) {
      std::ostringstream msg;
      msg << "parse error at line " << line
          << ": expected '<kind> <weight> <k> <links...>'";
      throw IoError(msg.str());
    }
    Stream& s = streams[static_cast<std::size_t>(j)];
    if (toks[0] == "log") {
      s.kind = StreamKind::Log;
    } else if (toks[0] == "lin") {
      s.kind = StreamKind::Linear;
    } else if (toks[0].rfind("ext:", 0) == 0 && toks[0].size() > 4) {
      s.kind = StreamKind::Extension;
      s.extension = toks[0].substr(4);
    } else {
      std::ostringstream msg;
      msg << "parse error at line " << line << ": unknown stream kind '"
          << toks[0] << "'";
      throw IoError(msg.str());
    }
    s.weight = detail::parse_double(toks[1], line);
    const std::int64_t route_len = detail::parse_int(toks[2], line);
    if (route_len < 0 || std::int64_t(toks.size()) != 3 + route_len) {
      std::ostringstream msg;
      msg << "parse error at line " << line << ": expected " << route_len
          << " link ids, got " << toks.size() - 3;
      throw IoError(msg.str());
    }
    s.route.resize(static_cast<std::size_t>(route_len));
    for (std::int64_t i = 0; i < route_len; ++i)
      s.route[static_cast<std::size_t>(i)] = static_cast<std::int32_t>(
          detail::parse_int(toks[static_cast<std::size_t>(3 + i)], line));
  }
  if (!reader.at_end()) {
    std::ostringstream msg;
    msg << "parse error at line " << reader.line()
        << ": trailing content after " << n << " streams";
    throw IoError(msg.str());
  }
  return build_problem(std::move(streams), std::move(capacities));
}

// Solution files: "NUMS 1 <m> <n> <status> <iters> <objective>", n rate
// lines, m "lambda s" lines, then the final rho and a config echo.
struct SolutionFileData {
  std::int64_t m = 0;
  std::int64_t n = 0;
  SolveStatus status = SolveStatus::MaxIters;
  std::int64_t iterations = 0;
  double objective = 0.0;
  std::vector<double> x;
  std::vector<double> lambda;
  std::vector<double> s;
  double rho_final = 0.0;
  std::string config_echo;
};

inline void write_solution(const Solution& sol, const SolverConfig& config,
                           std::int64_t m, const std::string& path) {
  if (std::int64_t(sol.lambda.size()) != m || std::int64_t(sol.s.size()) != m)
    throw std::invalid_argument("write_solution: per-link lengths do not match m");
  std::ofstream out(path);
  if (!out) throw IoError("cannot write '" + path + "'");
  out << "NUMS 1 " << m << ' ' << sol.x.size() << ' ' << to_string(sol.status)
      << ' ' << sol.iterations << ' ' << detail::fmt_double(sol.objective)
      << '\n';
  for (double v : sol.x) out << detail::fmt_double(v) << '\n';
  for (std::int64_t i = 0; i < m; ++i)
    out << detail::fmt_double(sol.lambda[static_cast<std::size_t>(i)]) << ' '
        << detail::fmt_double(sol.s[static_cast<std::size_t>(i)]) << '\n';
  out << "rho " << detail::fmt_double(sol.rho_final) << '\n';
  out << "config eps_abs " << detail::fmt_double(config.eps_abs) << " rho0 "
      << detail::fmt_double(config.rho0) << " alpha "
      << detail::fmt_double(config.alpha) << " mu "
      << detail::fmt_double(config.mu) << " gamma "
      << detail::fmt_double(config.gamma) << " rho_interval "
      << config.rho_update_interval << " max_iters " << config.max_iters
      << '\n';
  if (!out) throw IoError("write failed on '" + path + "'");
}

inline SolutionFileData read_solution(const std::string& path) {
  detail::LineReader reader(path);
  std::vector<std::string> head = reader.next_tokens();
  if (head.size() != 7 || head[0] != "NUMS")
    throw IoError(
        "parse error at line 1: expected 'NUMS 1 <m> <n> <status> <iters> "
        "<objective>'");
  if (detail::parse_int(head[1], 1) != 1)
    throw IoError("parse error at line 1: unsupported solution format version");
  SolutionFileData data;
  data.m = detail::parse_int(head[2], 1);
  data.n = detail::parse_int(head[3], 1);
  if (data.m < 0 || data.n < 0)
    throw IoError("parse error at line 1: negative dimensions");
  if (head[4] == "converged")
    data.status = SolveStatus::Converged;
  else if (head[4] == "maxiters")
    data.status = SolveStatus::MaxIters;
  else if (head[4] == "timelimit")
    data.status = SolveStatus::TimeLimit;
  else
    throw IoError("parse error at line 1: unknown status '" + head[4] + "'");
  data.iterations = detail::parse_int(head[5], 1);
  data.objective = detail::parse_double(head[6], 1);

  data.x.resize(static_cast<std::size_t>(data.n));
  for (std::int64_t j = 0; j < data.n; ++j) {
    std::vector<std::string> toks = reader.next_tokens();
    if (toks.size() != 1) {
      std::ostringstream msg;
      msg << "parse error at line " << reader.line()
          << ": expected one rate value";
      throw IoError(msg.str());
    }
    data.x[static_cast<std::size_t>(j)] =
        detail::parse_double(toks[0], reader.line());
  }
  data.lambda.resize(static_cast<std::size_t>(data.m));
  data.s.resize(static_cast<std::size_t>(data.m));
  for (std::int64_t i = 0; i < data.m; ++i) {
    std::vector<std::string> toks = reader.next_tokens();
    if (toks.size() != 2) {
      std::ostringstream msg;
      msg << "parse error at line " << reader.line()
          << ": expected '<lambda> <s>'";
      throw IoError(msg.str());
    }
    data.lambda[static_cast<std::size_t>(i)] =
        detail::parse_double(toks[0], reader.line());
    data.s[static_cast<std::size_t>(i)] =
        detail::parse_double(toks[1], reader.line());
  }
  std::vector<std::string> rho_line = reader.next_tokens();
  if (rho_line.size() != 2 || rho_line[0] != "rho") {
    std::ostringstream msg;
    msg << "parse error at line " << reader.line() << ": expected 'rho <value>'";
    throw IoError(msg.str());
  }
  data.rho_final = detail::parse_double(rho_line[1], reader.line());
  std::vector<std::string> cfg_line = reader.next_tokens();
  if (cfg_line.empty() || cfg_line[0] != "config") {
    std::ostringstream msg;
    msg << "parse error at line " << reader.line() << ": expected 'config ...'";
    throw IoError(msg.str());
  }
  std::ostringstream echo;
  for (std::size_t i = 1; i < cfg_line.size(); ++i) {
    if (i > 1) echo << ' ';
    echo << cfg_line[i];
  }
  data.config_echo = echo.str();
  return data;
}

// Trace CSV: iter,r_norm,s_norm,rho,objective with full-precision values.
inline void write_trace_csv(const ConvergenceTrace& trace,
                            const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write '" + path + "'");
  out << "iter,r_norm,s_norm,rho,objective\n";
  for (const TraceRecord& rec : trace)
    out << rec.iter << ',' << detail::fmt_double(rec.r_norm) << ','
        << detail::fmt_double(rec.s_norm) << ',' << detail::fmt_double(rec.rho)
        << ',' << detail::fmt_double(rec.objective) << '\n';
  if (!out) throw IoError("write failed on '" + path + "'");
}

// Prune map sidecar: "NUMF 1 <m_old> <n_old>", the link map line, and the
// stream map line (-1 marks removed entities).
inline void write_prune_map(const PruneMap& map, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write '" + path + "'");
  out << "NUMF 1 " << map.link_map.size() << ' ' << map.stream_map.size()
      << '\n';
  for (std::size_t i = 0; i < map.link_map.size(); ++i)
    out << (i ? " " : "") << map.link_map[i];
  out << '\n';
  for (std::size_t i = 0; i < map.stream_map.size(); ++i)
    out << (i ? " " : "") << map.stream_map[i];
  out << '\n';
  if (!out) throw IoError("write failed on '" + path + "'");
}

inline PruneMap read_prune_map(const std::string& path) {
  detail::LineReader reader(path);
  std::vector<std::string> head = reader.next_tokens();
  if (head.size() != 4 || head[0] != "NUMF")
    throw IoError("parse error at line 1: expected 'NUMF 1 <m> <n>'");
  if (detail::parse_int(head[1], 1) != 1)
    throw IoError("parse error at line 1: unsupported prune map version");
  const std::int64_t m = detail::parse_int(head[2], 1);
  const std::int64_t n = detail::parse_int(head[3], 1);
  PruneMap map;
  std::vector<std::string> links = reader.next_tokens();
  if (std::int64_t(links.size()) != m)
    throw IoError("parse error at line 2: link map length mismatch");
  for (const std::string& tok : links)
    map.link_map.push_back(static_cast<std::int32_t>(detail::parse_int(tok, 2)));
  std::vector<std::string> streams = reader.next_tokens();
  if (std::int64_t(streams.size()) != n)
    throw IoError("parse error at line 3: stream map length mismatch");
  for (const std::string& tok : streams)
    map.stream_map.push_back(detail::parse_int(tok, 3));
  return map;
}

// Transit metadata sidecar (NUMT 1): spatial edges, OD routes as edge-id
// sequences, and the (od, route, t0) triple behind each stream.
inline void write_transit_metadata(const TransitMetadata& meta,
                                   const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write '" + path + "'");
  out << "NUMT 1 " << meta.stations << ' ' << meta.time_bins << ' '
      << meta.edges.size() << ' ' << meta.ods.size() << ' '
      << meta.streams.size() << '\n';
  out << detail::fmt_double(meta.bin_minutes) << ' '
      << detail::fmt_double(meta.seats) << ' ' << meta.dropped_streams << '\n';
  for (const auto& [from, to] : meta.edges) out << from << ' ' << to << '\n';
  for (const TransitOd& od : meta.ods) {
    out << od.origin << ' ' << od.dest << ' ' << od.routes.size() << '\n';
    for (const auto& route : od.routes) {
      out << route.size();
      for (std::int32_t e : route) out << ' ' << e;
      out << '\n';
    }
  }
  for (const TransitStreamInfo& info : meta.streams)
    out << info.od << ' ' << info.route << ' ' << info.t0 << '\n';
  if (!out) throw IoError("write failed on '" + path + "'");
}

inline TransitMetadata read_transit_metadata(const std::string& path) {
  detail::LineReader reader(path);
  std::vector<std::string> head = reader.next_tokens();
  if (head.size() != 7 || head[0] != "NUMT")
    throw IoError(
        "parse error at line 1: expected 'NUMT 1 <S> <T> <E> <ods> <streams>'");
  if (detail::parse_int(head[1], 1) != 1)
    throw IoError("parse error at line 1: unsupported metadata version");
  TransitMetadata meta;
  meta.stations = static_cast<std::int32_t>(detail::parse_int(head[2], 1));
  meta.time_bins = static_cast<std::int32_t>(detail::parse_int(head[3], 1));
  const std::int64_t n_edges = detail::parse_int(head[4], 1);
  const std::int64_t n_ods = detail::parse_int(head[5], 1);
  const std::int64_t n_streams = detail::parse_int(head[6], 1);

  std::vector<std::string> extra = reader.next_tokens();
  if (extra.size() != 3)
    throw IoError("parse error at line 2: expected '<bin_minutes> <seats> "
                  "<dropped>'");
  meta.bin_minutes = detail::parse_double(extra[0], 2);
  meta.seats = detail::parse_double(extra[1], 2);
  meta.dropped_streams = detail::parse_int(extra[2], 2);

  for (std::int64_t e = 0; e < n_edges; ++e) {
    std::vector<std::string> toks = reader.next_tokens();
    if (toks.size() != 2)
      throw IoError("parse error at line " + std::to_string(reader.line()) +
                    ": expected '<from> <to>'");
    meta.edges.emplace_back(
        static_cast<std::int32_t>(detail::parse_int(toks[0], reader.line())),
        static_cast<std::int32_t>(detail::parse_int(toks[1], reader.line())));
  }
  for (std::int64_t k = 0; k < n_ods; ++k) {
    std::vector<std::string> toks = reader.next_tokens();
    if (toks.size() != 3)
      throw IoError("parse error at line " + std::to_string(reader.line()) +
                    ": expected '<origin> <dest> <routes>'");
    TransitOd od;
    od.origin = static_cast<std::int32_t>(detail::parse_int(toks[0], reader.line()));
    od.dest = static_cast<std::int32_t>(detail::parse_int(toks[1], reader.line()));
    const std::int64_t n_routes = detail::parse_int(toks[2], reader.line());
    for (std::int64_t r = 0; r < n_routes; ++r) {
      std::vector<std::string> rt = reader.next_tokens();
      const std::int64_t line = reader.line();
      if (rt.empty())
        throw IoError("parse error at line " + std::to_string(line) +
                      ": expected a route");
      const std::int64_t len = detail::parse_int(rt[0], line);
      if (std::int64_t(rt.size()) != 1 + len)
        throw IoError("parse error at line " + std::to_string(line) +
                      ": route length mismatch");
      std::vector<std::int32_t> route;
      for (std::int64_t i = 0; i < len; ++i)
        route.push_back(static_cast<std::int32_t>(
            detail::parse_int(rt[static_cast<std::size_t>(1 + i)], line)));
      od.routes.push_back(std::move(route));
    }
    meta.ods.push_back(std::move(od));
  }
  for (std::int64_t j = 0; j < n_streams; ++j) {
    std::vector<std::string> toks = reader.next_tokens();
    if (toks.size() != 3)
      throw IoError("parse error at line " + std::to_string(reader.line()) +
                    ": expected '<od> <route> <t0>'");
    meta.streams.push_back(TransitStreamInfo{
        static_cast<std::int32_t>(detail::parse_int(toks[0], reader.line())),
        static_cast<std::int32_t>(detail::parse_int(toks[1], reader.line())),
        static_cast<std::int32_t>(detail::parse_int(toks[2], reader.line()))});
  }
  return meta;
}

}  // namespace numpmp

#endif  // NUMPMP_IO_HPP_
