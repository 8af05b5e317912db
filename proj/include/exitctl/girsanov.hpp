#pragma once

#include "exitctl/sampler.hpp"
#include "exitctl/stats.hpp"

#include <functional>
#include <optional>

namespace exitctl {

struct GirsanovWeight {
  double log_weight = 0.0;
  double weight = 1.0;
  bool underflow = false;  // weight rounded to zero although log_weight is finite
};

// exp(M - QV/2), kept in log form.
GirsanovWeight exp_martingale_weight(double M_tau, double QV_tau);

struct KValue {
  double value = 0.0;
  int alpha = 0;
  double sigma = 1.0;
};

// W + QV_u / (2 sigma) + alpha M_u / sigma.
KValue k_estimator(const PathStats& stats, double sigma, int alpha);

// Which recorded martingale plays M^{u'}: the sampling control itself, or probe i.
struct ReweightSource {
  std::optional<std::size_t> probe;
  static ReweightSource control() { return {}; }
  static ReweightSource probe_field(std::size_t i) { return {i}; }
};

struct WeightedEstimate : EstimatorResult {
  double effective_sample_size = 0.0;
  double mean_weight = 0.0;
  std::size_t n_underflow = 0;
};

// Mean over exited paths of integrand * exp(sign * M^{u'} - QV^{u'}/2). With
// the batch sampled under u + u' and sign = -1 this is an expectation under u.
WeightedEstimate reweighted_expectation(const BatchStats& batch, const std::function<double(const PathStats&)>& integrand,
                                        ReweightSource source = ReweightSource::control(), double sign = -1.0);

struct KazamakiBound {
  double bound = 0.0;
  bool satisfied = false;
};

// bound = 2 sigma_p (sqrt(p) - 1)^2 / p; satisfied when |phi|_inf^2 <= bound.
KazamakiBound kazamaki_bound(double phi_sup_norm, double sigma_p, double p);

}  // namespace exitctl
