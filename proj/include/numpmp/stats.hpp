#ifndef NUMPMP_STATS_HPP_
#define NUMPMP_STATS_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <ostream>
#include <stdexcept>
#include <vector>

#include "numpmp/model.hpp"

namespace numpmp {

// edges has counts.size() + 1 entries; bin i covers [edges[i], edges[i+1]).
struct Histogram {
  std::vector<double> edges;
  std::vector<std::int64_t> counts;
};

// Unit-width bins over the observed integer range.
inline Histogram int_histogram(const std::vector<std::int64_t>& values) {
  Histogram h;
  if (values.empty()) return h;
  auto [lo_it, hi_it] = std::minmax_element(values.begin(), values.end());
  const std::int64_t lo = *lo_it, hi = *hi_it;
  h.counts.assign(static_cast<std::size_t>(hi - lo + 1), 0);
  for (std::int64_t v : values) ++h.counts[static_cast<std::size_t>(v - lo)];
  for (std::int64_t e = lo; e <= hi + 1; ++e)
    h.edges.push_back(static_cast<double>(e));
  return h;
}

inline Histogram real_histogram(const std::vector<double>& values, int bins,
                                double lo, double hi) {
  if (bins < 1 || !(hi > lo))
    throw std::invalid_argument("real_histogram: bad binning");
  Histogram h;
  h.counts.assign(static_cast<std::size_t>(bins), 0);
  for (int b = 0; b <= bins; ++b)
    h.edges.push_back(lo + (hi - lo) * b / bins);
  for (double v : values) {
    int b = static_cast<int>(std::floor((v - lo) / (hi - lo) * bins));
    if (b < 0) b = 0;
    if (b >= bins) b = bins - 1;  // closed top bin
    ++h.counts[static_cast<std::size_t>(b)];
  }
  return h;
}

inline std::vector<std::int64_t> route_lengths(const Problem& p) {
  std::vector<std::int64_t> out;
  out.reserve(p.streams.size());
  for (const Stream& s : p.streams) out.push_back(std::int64_t(s.route.size()));
  return out;
}

// Traffic streams per link (slack terminals excluded): the row counts of R.
inline std::vector<std::int64_t> streams_per_link(const Problem& p) {
  std::vector<std::int64_t> out(static_cast<std::size_t>(p.m), 0);
  for (const Stream& s : p.streams)
    for (std::int32_t link : s.route) ++out[static_cast<std::size_t>(link)];
  return out;
}

// (Rx)_i / c_i per link for a solved allocation.
inline std::vector<double> link_utilization(const Problem& p,
                                            const std::vector<double>& x) {
  if (x.size() != p.streams.size())
    throw std::invalid_argument("link_utilization: x length mismatch");
  std::vector<double> load(static_cast<std::size_t>(p.m), 0.0);
  for (const Stream& s : p.streams)
    for (std::int32_t link : s.route)
      load[static_cast<std::size_t>(link)] += x[static_cast<std::size_t>(s.id)];
  for (std::int64_t i = 0; i < p.m; ++i)
    load[static_cast<std::size_t>(i)] /= p.capacities[static_cast<std::size_t>(i)];
  return load;
}

inline void write_histogram_csv(const Histogram& h, std::ostream& out) {
  out << "bin_lo,bin_hi,count\n";
  for (std::size_t b = 0; b < h.counts.size(); ++b)
    out << h.edges[b] << ',' << h.edges[b + 1] << ',' << h.counts[b] << '\n';
}

}  // namespace numpmp

#endif  // NUMPMP_STATS_HPP_
