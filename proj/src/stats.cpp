#include "exitctl/stats.hpp"

#include <algorithm>

namespace exitctl {

void RunningStats::merge(const RunningStats& o) {
  if (o.n == 0) return;
  if (n == 0) {
    *this = o;
    return;
  }
  const double na = static_cast<double>(n), nb = static_cast<double>(o.n);
  const double nt = na + nb;
  const double delta = o.mean - mean;
  mean += delta * nb / nt;
  m2 += o.m2 + delta * delta * na * nb / nt;
  n += o.n;
}

void RunningCovariance::add(double x, double y) {
  ++n;
  const double dx = x - mean_x;
  mean_x += dx / static_cast<double>(n);
  const double dy = y - mean_y;
  mean_y += dy / static_cast<double>(n);
  m2_x += dx * (x - mean_x);
  m2_y += dy * (y - mean_y);
  c_xy += dx * (y - mean_y);
}

void RunningCovariance::merge(const RunningCovariance& o) {
  if (o.n == 0) return;
  if (n == 0) {
    *this = o;
    return;
  }
  const double na = static_cast<double>(n), nb = static_cast<double>(o.n);
  const double nt = na + nb;
  const double dx = o.mean_x - mean_x, dy = o.mean_y - mean_y;
  mean_x += dx * nb / nt;
  mean_y += dy * nb / nt;
  m2_x += o.m2_x + dx * dx * na * nb / nt;
  m2_y += o.m2_y + dy * dy * na * nb / nt;
  c_xy += o.c_xy + dx * dy * na * nb / nt;
  n += o.n;
}

EstimatorResult to_result(const RunningStats& s, std::size_t n_discarded) {
  return {s.mean, s.variance(), s.std_error(), s.n, n_discarded};
}

RunningStats accumulate(std::span<const double> values) {
  RunningStats total;
  for (std::size_t start = 0; start < values.size(); start += kMergeChunk) {
    RunningStats chunk;
    const std::size_t stop = std::min(values.size(), start + kMergeChunk);
    for (std::size_t i = start; i < stop; ++i) chunk.add(values[i]);
    total.merge(chunk);
  }
  return total;
}

EstimatorResult summarize(std::span<const double> values, std::size_t n_discarded) {
  return to_result(accumulate(values), n_discarded);
}

}  // namespace exitctl
