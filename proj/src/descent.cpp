#include "exitctl/descent.hpp"

#include "exitctl/csv.hpp"
#include "exitctl/girsanov.hpp"
#include "exitctl/rng.hpp"

#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <stdexcept>

namespace exitctl {

ConvexityCertificate check_convexity_preconditions(const ProblemSpec& spec, const std::vector<Point>& boundary_grid) {
  if (boundary_grid.empty()) throw std::invalid_argument("convexity check: empty boundary grid");
  double kmin = std::numeric_limits<double>::infinity();
  for (const auto& y : boundary_grid) kmin = std::min(kmin, spec.terminal_cost->value(y));
  ConvexityCertificate c;
  c.gamma = kmin - 1.0 / spec.sigma;
  c.satisfied = c.gamma > 0.0;
  c.suggested_shift = std::max(0.0, -c.gamma);
  return c;
}

CoercivityEstimate estimate_coercivity_constant(const ProblemSpec& spec, const BasisPtr& basis,
                                                const std::vector<ControlVector>& samples, const SimConfig& cfg,
                                                std::size_t n_traj) {
  if (samples.empty()) throw std::invalid_argument("coercivity estimate: no coefficient samples");
  CoercivityEstimate best;
  best.value = std::numeric_limits<double>::infinity();
  for (std::size_t s = 0; s < samples.size(); ++s) {
    const auto batch = sample_batch(spec, BasisController(basis, samples[s], true), cfg, n_traj);
    for (std::size_t i = 0; i < batch.probe_count; ++i) {
      const auto r = summarize(batch.collect([&](const PathStats& p) { return p.qv_probe(i, i); }));
      if (r.mean < best.value) best = {r.mean, r.std_error, s, i};
    }
  }
  return best;
}

std::optional<ControlVector> DescentTrace::averaged() const {
  if (average_count == 0) return std::nullopt;
  ControlVector a{average_sum};
  for (double& v : a.a) v /= static_cast<double>(average_count);
  return a;
}

std::uint64_t iteration_seed(const DescentConfig& cfg, std::size_t iter) {
  return cfg.seed_policy == SeedPolicy::frozen ? cfg.seed : mix_seed(cfg.seed ^ static_cast<std::uint64_t>(iter));
}

namespace {

double norm(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

}  // namespace

DescentTrace run_descent(const ProblemSpec& spec, const BasisPtr& basis, const DescentConfig& dcfg, const SimConfig& sim) {
  const std::size_t n = basis->size();
  if (dcfg.a0.size() != n) throw std::invalid_argument("descent: a0 length differs from basis size");
  if (dcfg.n_traj == 0) throw std::invalid_argument("descent: n_traj must be positive");
  if (!(dcfg.step.h > 0.0)) throw std::invalid_argument("descent: step size must be positive");
  if (dcfg.step.kind == StepSchedule::Kind::backtracking && !(dcfg.step.shrink > 0.0 && dcfg.step.shrink < 1.0))
    throw std::invalid_argument("descent: shrink must lie in (0, 1)");

  DescentTrace trace;
  const auto cert = check_convexity_preconditions(spec, spec.domain->boundary_samples(default_grid_resolution(spec.dimension)));
  if (!cert.satisfied) {
    const std::string msg = "convexity constant gamma = " + format_double(cert.gamma) +
                            " <= 0; shift kappa_t by " + format_double(cert.suggested_shift);
    if (!dcfg.allow_nonconvex) throw std::invalid_argument(msg + " or allow a nonconvex run explicitly");
    trace.warnings.push_back(msg);
  }

  trace.average_sum = dcfg.average_sum.empty() ? std::vector<double>(n, 0.0) : dcfg.average_sum;
  trace.average_count = dcfg.average_count;
  ControlVector a = dcfg.a0;
  std::size_t increases = 0;
  const auto t_start = std::chrono::steady_clock::now();
  trace.status = "max_iter";

  for (std::size_t l = dcfg.start_iter;; ++l) {
    SimConfig cfg = sim;
    cfg.seed = iteration_seed(dcfg, l);
    const auto batch = sample_batch(spec, BasisController(basis, a, true), cfg, dcfg.n_traj);
    for (const auto& w : batch.warnings) trace.warnings.push_back("iteration " + std::to_string(l) + ": " + w);

    DescentRecord rec;
    rec.iter = l;
    rec.a = a.a;
    const auto phi = estimate_functional(batch, spec.sigma);
    rec.phi_hat = phi.mean;
    rec.phi_se = phi.std_error;
    rec.grad.resize(n);
    rec.grad_se.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      const auto g = estimate_first_variation(batch, spec.sigma, i, dcfg.form);
      rec.grad[i] = g.mean;
      rec.grad_se[i] = g.std_error;
    }
    rec.grad_norm = norm(rec.grad);
    double se2 = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      if (rec.grad_norm > 0) se2 += std::pow(rec.grad[i] / rec.grad_norm * rec.grad_se[i], 2);
    rec.grad_norm_se = std::sqrt(se2);
    rec.variance_k1 = summarize(batch.collect([&](const PathStats& p) { return k_estimator(p, spec.sigma, 1).value; })).variance;

    if (dcfg.averaging_start > 0 && l >= dcfg.averaging_start) {
      for (std::size_t i = 0; i < n; ++i) trace.average_sum[i] += a.a[i];
      ++trace.average_count;
    }

    if (!trace.records.empty()) {
      const auto& prev = trace.records.back();
      const double noise = 3.0 * std::hypot(prev.phi_se, rec.phi_se);
      increases = rec.phi_hat > prev.phi_hat + noise ? increases + 1 : 0;
    }
    const bool converged = l >= dcfg.min_iter && rec.grad_norm <= dcfg.grad_tol + 3.0 * rec.grad_norm_se;
    const bool last = l >= dcfg.start_iter + dcfg.n_iter;
    rec.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
    trace.records.push_back(rec);

    if (increases >= 5) {
      trace.status = "diverged";
      trace.diagnostic = "functional estimate increased beyond noise for 5 consecutive iterations; reduce the step size";
      break;
    }
    if (converged) {
      trace.status = "converged";
      break;
    }
    if (last) break;

    const double g2 = rec.grad_norm * rec.grad_norm;
    double h = dcfg.step.h;
    ControlVector next = a;
    if (dcfg.step.kind == StepSchedule::Kind::fixed) {
      for (std::size_t i = 0; i < n; ++i) next.a[i] = a.a[i] - h * rec.grad[i];
    } else {
      bool accepted = false;
      for (std::size_t b = 0; b <= dcfg.step.max_backtracks; ++b, h *= dcfg.step.shrink) {
        for (std::size_t i = 0; i < n; ++i) next.a[i] = a.a[i] - h * rec.grad[i];
        // Same seeds as the gradient batch: the comparison is noise-free in frozen mode.
        const auto trial = sample_batch(spec, BasisController(basis, next, false), cfg, dcfg.n_traj);
        if (estimate_functional(trial, spec.sigma).mean <= rec.phi_hat - dcfg.step.c1 * h * g2) {
          accepted = true;
          break;
        }
      }
      if (!accepted) {
        trace.status = "stalled";
        trace.diagnostic = "line search found no sufficient decrease";
        break;
      }
    }
    trace.records.back().step = h;
    a = std::move(next);
  }
  return trace;
}

ConvergenceReport convergence_diagnostics(const DescentTrace& trace, double gamma, double m_x,
                                          const ControlVector& a_inf) {
  if (trace.records.size() < 3) throw std::invalid_argument("convergence diagnostics need at least 3 iterates");
  ConvergenceReport r;
  r.bound = gamma * m_x;
  std::vector<double> t, y;
  double elapsed = 0.0, dmax = 0.0;
  for (const auto& rec : trace.records) {
    if (rec.a.size() != a_inf.size()) throw std::invalid_argument("a_inf length differs from iterates");
    double d2 = 0.0;
    for (std::size_t i = 0; i < rec.a.size(); ++i) d2 += (rec.a[i] - a_inf.a[i]) * (rec.a[i] - a_inf.a[i]);
    dmax = std::max(dmax, d2);
    if (d2 > 0.0) {
      t.push_back(elapsed);
      y.push_back(std::log(d2));
    }
    elapsed += rec.step;
  }
  if (dmax <= 1e-24 || t.size() < 2) {
    r.trivial = true;
    r.pass = true;
    r.detail = "iterates stay at a_inf";
    return r;
  }
  const double n = static_cast<double>(t.size());
  double st = 0, sy = 0, stt = 0, sty = 0;
  for (std::size_t i = 0; i < t.size(); ++i) st += t[i], sy += y[i], stt += t[i] * t[i], sty += t[i] * y[i];
  const double den = n * stt - st * st;
  const double slope = den != 0.0 ? (n * sty - st * sy) / den : 0.0;
  r.fitted_rate = -slope;
  r.pass = slope < 0.0 && r.bound > 0.0 && r.fitted_rate >= r.bound / 5.0 && r.fitted_rate <= 5.0 * r.bound;
  r.detail = "fitted rate " + format_double(r.fitted_rate) + ", bound gamma*m_x " + format_double(r.bound);
  return r;
}

void write_trace_csv(const DescentTrace& trace, const std::filesystem::path& path) {
  CsvWriter w(path);
  const std::size_t n = trace.records.empty() ? 0 : trace.records.front().a.size();
  std::vector<std::string> cols{"iter"};
  for (std::size_t i = 0; i < n; ++i) cols.push_back("a_" + std::to_string(i + 1));
  for (const char* c : {"phi_hat", "phi_se", "grad_norm", "step"}) cols.emplace_back(c);
  w.header(cols);
  for (const auto& r : trace.records) {
    w << std::uint64_t{r.iter};
    for (double v : r.a) w << v;
    w << r.phi_hat << r.phi_se << r.grad_norm << r.step;
    w.end_row();
  }
}

void write_checkpoint(const DescentTrace& trace, const DescentConfig& dcfg, const std::filesystem::path& path) {
  if (trace.records.empty()) throw std::invalid_argument("checkpoint: empty trace");
  const auto& last = trace.records.back();
  nlohmann::json j;
  j["iter"] = last.iter;
  j["a"] = last.a;
  j["seed"] = dcfg.seed;
  j["seed_policy"] = dcfg.seed_policy == SeedPolicy::frozen ? "frozen" : "fresh";
  j["status"] = trace.status;
  // The running average excludes the last iterate, which a resumed run adds again.
  std::vector<double> sum = trace.average_sum;
  std::size_t count = trace.average_count;
  if (dcfg.averaging_start > 0 && last.iter >= dcfg.averaging_start && count > 0) {
    for (std::size_t i = 0; i < sum.size(); ++i) sum[i] -= last.a[i];
    --count;
  }
  j["average_sum"] = sum;
  j["average_count"] = count;
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << j.dump(2) << "\n";
}

DescentConfig resume_from_checkpoint(const DescentConfig& dcfg, const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read checkpoint " + path.string());
  const auto j = nlohmann::json::parse(in);
  DescentConfig out = dcfg;
  out.a0.a = j.at("a").get<std::vector<double>>();
  out.start_iter = j.at("iter").get<std::size_t>();
  out.seed = j.at("seed").get<std::uint64_t>();
  out.seed_policy = j.at("seed_policy").get<std::string>() == "frozen" ? SeedPolicy::frozen : SeedPolicy::fresh;
  out.average_sum = j.at("average_sum").get<std::vector<double>>();
  out.average_count = j.at("average_count").get<std::size_t>();
  return out;
}

}  // namespace exitctl
