#pragma once

#include <cmath>
#include <cstddef>
#include <span>

namespace exitctl {

// Welford accumulator; merge() is Chan's pairwise update, so any fixed merge
// tree gives the same bits every run.
struct RunningStats {
  std::size_t n = 0;
  double mean = 0.0;
  double m2 = 0.0;

  void add(double x) {
    ++n;
    const double delta = x - mean;
    mean += delta / static_cast<double>(n);
    m2 += delta * (x - mean);
  }
  void merge(const RunningStats& o);
  // Unbiased sample variance; zero for fewer than two samples.
  double variance() const { return n > 1 ? m2 / static_cast<double>(n - 1) : 0.0; }
  double std_error() const { return n > 0 ? std::sqrt(variance() / static_cast<double>(n)) : 0.0; }
};

struct RunningCovariance {
  std::size_t n = 0;
  double mean_x = 0.0, mean_y = 0.0;
  double m2_x = 0.0, m2_y = 0.0, c_xy = 0.0;

  void add(double x, double y);
  void merge(const RunningCovariance& o);
  double covariance() const { return n > 1 ? c_xy / static_cast<double>(n - 1) : 0.0; }
};

struct EstimatorResult {
  double mean = 0.0;
  double variance = 0.0;
  double std_error = 0.0;
  std::size_t n_samples = 0;
  std::size_t n_discarded = 0;
};

// Fixed chunk length for order-independent reductions.
inline constexpr std::size_t kMergeChunk = 4096;

EstimatorResult to_result(const RunningStats& s, std::size_t n_discarded = 0);
RunningStats accumulate(std::span<const double> values);
EstimatorResult summarize(std::span<const double> values, std::size_t n_discarded = 0);

inline double combined_se(const EstimatorResult& a, const EstimatorResult& b) {
  return std::sqrt(a.std_error * a.std_error + b.std_error * b.std_error);
}

}  // namespace exitctl
