#include "exitctl/variation.hpp"

#include "exitctl/csv.hpp"
#include "exitctl/girsanov.hpp"

#include <cmath>
#include <stdexcept>

namespace exitctl {

namespace {

void require_probe(const BatchStats& batch, std::size_t i) {
  if (i >= batch.probe_count)
    throw std::out_of_range("probe index " + std::to_string(i) + " out of range (batch has " +
                            std::to_string(batch.probe_count) + " probes)");
}

void require_nonempty(const BatchStats& batch) {
  if (batch.n_exited == 0) throw std::invalid_argument("empty batch");
}

}  // namespace

EstimatorResult estimate_functional(const BatchStats& batch, double sigma) {
  require_nonempty(batch);
  return summarize(batch.collect([&](const PathStats& p) { return k_estimator(p, sigma, 0).value; }),
                   batch.n_discarded);
}

FirstVariation estimate_first_variation(const BatchStats& batch, double sigma, std::size_t i, FirstVariationForm form) {
  require_nonempty(batch);
  require_probe(batch, i);
  const auto compact = batch.collect([&](const PathStats& p) { return k_estimator(p, sigma, 1).value * p.M_probe[i]; });
  const auto hform = batch.collect([&](const PathStats& p) {
    return k_estimator(p, sigma, 0).value * p.M_probe[i] + p.CV_u_probe[i] / sigma;
  });
  std::vector<double> diff(compact.size());
  for (std::size_t k = 0; k < diff.size(); ++k) diff[k] = compact[k] - hform[k];

  FirstVariation out;
  switch (form) {
    case FirstVariationForm::compact:
      static_cast<EstimatorResult&>(out) = summarize(compact, batch.n_discarded);
      break;
    case FirstVariationForm::h_form:
      static_cast<EstimatorResult&>(out) = summarize(hform, batch.n_discarded);
      break;
    case FirstVariationForm::centered: {
      const double k1 = accumulate(batch.collect([&](const PathStats& p) { return k_estimator(p, sigma, 1).value; })).mean;
      static_cast<EstimatorResult&>(out) = summarize(
          batch.collect([&](const PathStats& p) { return (k_estimator(p, sigma, 1).value - k1) * p.M_probe[i]; }),
          batch.n_discarded);
      break;
    }
  }
  out.compact_mean = accumulate(compact).mean;
  out.h_form_mean = accumulate(hform).mean;
  const RunningStats d = accumulate(diff);
  out.discrepancy = std::abs(d.mean);
  out.discrepancy_se = d.std_error();
  return out;
}

double second_variation_sample(const PathStats& p, double sigma, std::size_t i, std::size_t j) {
  const double k0 = k_estimator(p, sigma, 0).value;
  const double mi = p.M_probe[i], mj = p.M_probe[j];
  // Written symmetric in (i, j) so swapping the indices gives identical bits.
  return k0 * (mi * mj) + (p.qv_probe(i, j) + (mj * p.CV_u_probe[i] + mi * p.CV_u_probe[j])) / sigma;
}

EstimatorResult estimate_second_variation(const BatchStats& batch, double sigma, std::size_t i, std::size_t j) {
  require_nonempty(batch);
  require_probe(batch, i);
  require_probe(batch, j);
  return summarize(batch.collect([&](const PathStats& p) { return second_variation_sample(p, sigma, i, j); }),
                   batch.n_discarded);
}

GradHess estimate_gradient_hessian(const BatchStats& batch, double sigma, FirstVariationForm form) {
  require_nonempty(batch);
  const std::size_t n = batch.probe_count;
  GradHess gh;
  gh.n = n;
  gh.grad.resize(n);
  gh.grad_se.resize(n);
  gh.hess.assign(n * n, 0.0);
  gh.hess_se.assign(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const auto g = estimate_first_variation(batch, sigma, i, form);
    gh.grad[i] = g.mean;
    gh.grad_se[i] = g.std_error;
    for (std::size_t j = i; j < n; ++j) {
      const auto h = estimate_second_variation(batch, sigma, i, j);
      gh.hess[i * n + j] = gh.hess[j * n + i] = h.mean;
      gh.hess_se[i * n + j] = gh.hess_se[j * n + i] = h.std_error;
    }
  }
  return gh;
}

namespace {

struct Combined {
  double M = 0.0, QV = 0.0, CV = 0.0;
};

Combined combine(const PathStats& p, std::span<const double> z) {
  const std::size_t m = p.M_probe.size();
  Combined c;
  for (std::size_t i = 0; i < m; ++i) {
    c.M += z[i] * p.M_probe[i];
    c.CV += z[i] * p.CV_u_probe[i];
    for (std::size_t j = 0; j < m; ++j) c.QV += z[i] * z[j] * p.QV_probe[i * m + j];
  }
  return c;
}

void require_length(const BatchStats& batch, std::span<const double> z) {
  if (z.size() != batch.probe_count) throw std::invalid_argument("direction length differs from probe count");
}

}  // namespace

EstimatorResult estimate_quadratic_form(const BatchStats& batch, double sigma, std::span<const double> z) {
  require_nonempty(batch);
  require_length(batch, z);
  return summarize(batch.collect([&](const PathStats& p) {
                     const Combined c = combine(p, z);
                     return k_estimator(p, sigma, 0).value * c.M * c.M + (c.QV + 2.0 * c.M * c.CV) / sigma;
                   }),
                   batch.n_discarded);
}

EstimatorResult estimate_combined_qv(const BatchStats& batch, std::span<const double> z) {
  require_nonempty(batch);
  require_length(batch, z);
  return summarize(batch.collect([&](const PathStats& p) { return combine(p, z).QV; }), batch.n_discarded);
}

EstimatorResult estimate_coercivity_margin(const BatchStats& batch, double sigma, std::span<const double> z,
                                           double gamma) {
  require_nonempty(batch);
  require_length(batch, z);
  return summarize(batch.collect([&](const PathStats& p) {
                     const Combined c = combine(p, z);
                     const double hzz = k_estimator(p, sigma, 0).value * c.M * c.M + (c.QV + 2.0 * c.M * c.CV) / sigma;
                     return hzz - gamma * c.QV;
                   }),
                   batch.n_discarded);
}

FdGradient fd_gradient_oracle(const ProblemSpec& spec, const BasisPtr& basis, const ControlVector& a, double sigma,
                              double delta, const SimConfig& cfg, std::size_t n_traj) {
  if (!(delta > 0.0)) throw std::invalid_argument("fd_gradient_oracle: delta must be positive");
  const std::size_t n = basis->size();
  if (a.size() != n) throw std::invalid_argument("fd_gradient_oracle: coefficient length mismatch");
  FdGradient out;
  out.value.resize(n);
  out.se.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    ControlVector plus = a, minus = a;
    plus.a[i] += delta;
    minus.a[i] -= delta;
    const auto bp = sample_batch(spec, BasisController(basis, plus, false), cfg, n_traj);
    const auto bm = sample_batch(spec, BasisController(basis, minus, false), cfg, n_traj);
    std::vector<double> d;
    d.reserve(n_traj);
    for (std::size_t k = 0; k < n_traj; ++k) {
      const PathStats &p = bp.paths[k], &q = bm.paths[k];
      if (!p.exited || !q.exited) continue;
      d.push_back((k_estimator(p, sigma, 0).value - k_estimator(q, sigma, 0).value) / (2.0 * delta));
    }
    if (d.empty()) throw std::runtime_error("fd_gradient_oracle: no paired exits");
    const auto r = summarize(d);
    out.value[i] = r.mean;
    out.se[i] = r.std_error;
  }
  return out;
}

void write_gradient_csv(const GradHess& gh, const std::filesystem::path& path) {
  CsvWriter w(path);
  w.header({"i", "value", "se"});
  for (std::size_t i = 0; i < gh.n; ++i) {
    w << std::uint64_t{i} << gh.grad[i] << gh.grad_se[i];
    w.end_row();
  }
}

void write_hessian_csv(const GradHess& gh, const std::filesystem::path& path) {
  CsvWriter w(path);
  w.header({"i", "j", "value", "se"});
  for (std::size_t i = 0; i < gh.n; ++i)
    for (std::size_t j = 0; j < gh.n; ++j) {
      w << std::uint64_t{i} << std::uint64_t{j} << gh.hess[i * gh.n + j] << gh.hess_se[i * gh.n + j];
      w.end_row();
    }
}

}  // namespace exitctl
