#include "exitctl/girsanov.hpp"

#include <cmath>
#include <stdexcept>

namespace exitctl {

GirsanovWeight exp_martingale_weight(double M_tau, double QV_tau) {
  if (!(QV_tau >= 0.0)) throw std::invalid_argument("quadratic variation must be nonnegative");
  GirsanovWeight w;
  w.log_weight = M_tau - 0.5 * QV_tau;
  w.weight = std::exp(w.log_weight);
  w.underflow = w.weight == 0.0 && std::isfinite(w.log_weight);
  return w;
}

KValue k_estimator(const PathStats& stats, double sigma, int alpha) {
  if (!stats.exited) throw std::invalid_argument("k_estimator: path did not exit");
  if (alpha != 0 && alpha != 1) throw std::invalid_argument("k_estimator: alpha must be 0 or 1");
  if (!(sigma > 0.0)) throw std::invalid_argument("k_estimator: sigma must be positive");
  const double v = stats.W + stats.QV_u / (2.0 * sigma) + (alpha ? stats.M_u / sigma : 0.0);
  return {v, alpha, sigma};
}

WeightedEstimate reweighted_expectation(const BatchStats& batch, const std::function<double(const PathStats&)>& integrand,
                                        ReweightSource source, double sign) {
  if (batch.n_exited == 0) throw std::invalid_argument("reweighted_expectation: empty batch");
  if (source.probe && *source.probe >= batch.probe_count)
    throw std::out_of_range("reweighted_expectation: probe index out of range");
  std::vector<double> values, weights;
  values.reserve(batch.n_exited);
  weights.reserve(batch.n_exited);
  std::size_t underflow = 0;
  for (const auto& p : batch.paths) {
    if (!p.exited) continue;
    double M = p.M_u, QV = p.QV_u;
    if (source.probe) M = p.M_probe[*source.probe], QV = p.qv_probe(*source.probe, *source.probe);
    const auto w = exp_martingale_weight(sign * M, QV);
    underflow += w.underflow ? 1 : 0;
    weights.push_back(w.weight);
    values.push_back(integrand(p) * w.weight);
  }
  WeightedEstimate out;
  static_cast<EstimatorResult&>(out) = summarize(values, batch.n_discarded);
  const RunningStats ws = accumulate(weights);
  double sum_w = 0.0, sum_w2 = 0.0;
  for (double w : weights) sum_w += w, sum_w2 += w * w;
  out.effective_sample_size = sum_w2 > 0 ? sum_w * sum_w / sum_w2 : 0.0;
  out.mean_weight = ws.mean;
  out.n_underflow = underflow;
  return out;
}

KazamakiBound kazamaki_bound(double phi_sup_norm, double sigma_p, double p) {
  if (!(p > 1.0)) throw std::invalid_argument("kazamaki_bound: p must exceed 1");
  if (!(sigma_p > 0.0)) throw std::invalid_argument("kazamaki_bound: sigma_p must be positive");
  if (phi_sup_norm < 0.0) throw std::invalid_argument("kazamaki_bound: sup norm must be nonnegative");
  const double r = std::sqrt(p) - 1.0;
  KazamakiBound k;
  k.bound = 2.0 * sigma_p * r * r / p;
  k.satisfied = phi_sup_norm * phi_sup_norm <= k.bound;
  return k;
}

}  // namespace exitctl
