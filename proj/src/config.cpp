#include "exitctl/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>

namespace exitctl {

using nlohmann::json;

std::size_t edit_distance(std::string_view a, std::string_view b) {
  std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

std::optional<std::string> suggest_key(std::string_view key, const std::vector<std::string>& candidates) {
  std::optional<std::string> best;
  std::size_t best_d = std::max<std::size_t>(2, key.size() / 3) + 1;
  for (const auto& c : candidates) {
    const std::size_t d = edit_distance(key, c);
    if (d < best_d) {
      best_d = d;
      best = c;
    }
  }
  return best;
}

namespace {

std::string join_ptr(const std::string& base, const std::string& key) { return base + "/" + key; }

// Reads one JSON object, records the effective value of every field it is
// asked for into `out`, and rejects keys nobody asked for.
class Node {
 public:
  Node(const json& in, std::string ptr, json& out) : in_(in), ptr_(std::move(ptr)), out_(out) {
    if (!in_.is_object()) throw ConfigError(ptr_.empty() ? "/" : ptr_, "expected an object");
    if (!out_.is_object()) out_ = json::object();
  }

  const std::string& ptr() const { return ptr_; }
  bool has(const std::string& key) const { return in_.contains(key) && !in_.at(key).is_null(); }
  std::string path(const std::string& key) const { return join_ptr(ptr_, key); }

  // Older or descriptive names that map to a real key, used only for suggestions.
  void alias(std::string name, std::string target) { aliases_[std::move(name)] = std::move(target); }

  double number(const std::string& key, double def) {
    seen_.insert(key);
    double v = def;
    if (has(key)) {
      const json& j = in_.at(key);
      if (!j.is_number()) throw ConfigError(path(key), "expected a number");
      v = j.get<double>();
      if (!std::isfinite(v)) throw ConfigError(path(key), "must be finite");
    }
    out_[key] = v;
    return v;
  }

  std::optional<double> optional_number(const std::string& key) {
    seen_.insert(key);
    if (!has(key)) {
      out_[key] = nullptr;
      return std::nullopt;
    }
    return number(key, 0.0);
  }

  std::uint64_t unsigned_int(const std::string& key, std::uint64_t def) {
    seen_.insert(key);
    std::uint64_t v = def;
    if (has(key)) {
      const json& j = in_.at(key);
      if (!j.is_number_integer()) throw ConfigError(path(key), "expected a non-negative integer");
      if (!j.is_number_unsigned() && j.get<std::int64_t>() < 0)
        throw ConfigError(path(key), "expected a non-negative integer");
      v = j.get<std::uint64_t>();
    }
    out_[key] = v;
    return v;
  }

  bool boolean(const std::string& key, bool def) {
    seen_.insert(key);
    bool v = def;
    if (has(key)) {
      const json& j = in_.at(key);
      if (!j.is_boolean()) throw ConfigError(path(key), "expected true or false");
      v = j.get<bool>();
    }
    out_[key] = v;
    return v;
  }

  std::string choice(const std::string& key, const std::string& def, const std::vector<std::string>& allowed) {
    seen_.insert(key);
    std::string v = def;
    if (has(key)) {
      const json& j = in_.at(key);
      if (!j.is_string()) throw ConfigError(path(key), "expected a string");
      v = j.get<std::string>();
      if (std::find(allowed.begin(), allowed.end(), v) == allowed.end()) {
        std::string msg = "unknown value '" + v + "'; expected one of";
        for (const auto& a : allowed) msg += " " + a;
        if (auto s = suggest_key(v, allowed)) msg += "; did you mean '" + *s + "'?";
        throw ConfigError(path(key), msg);
      }
    }
    out_[key] = v;
    return v;
  }

  std::optional<std::string> optional_string(const std::string& key) {
    seen_.insert(key);
    if (!has(key)) {
      out_[key] = nullptr;
      return std::nullopt;
    }
    const json& j = in_.at(key);
    if (!j.is_string()) throw ConfigError(path(key), "expected a string");
    out_[key] = j.get<std::string>();
    return j.get<std::string>();
  }

  std::string string(const std::string& key, const std::string& def) {
    auto v = optional_string(key);
    out_[key] = v.value_or(def);
    return v.value_or(def);
  }

  std::vector<double> numbers(const std::string& key, std::vector<double> def) {
    seen_.insert(key);
    std::vector<double> v = std::move(def);
    if (has(key)) {
      const json& j = in_.at(key);
      if (!j.is_array()) throw ConfigError(path(key), "expected an array of numbers");
      v.clear();
      for (std::size_t i = 0; i < j.size(); ++i) {
        if (!j[i].is_number()) throw ConfigError(path(key) + "/" + std::to_string(i), "expected a number");
        v.push_back(j[i].get<double>());
      }
    }
    out_[key] = v;
    return v;
  }

  std::optional<std::vector<double>> optional_numbers(const std::string& key) {
    seen_.insert(key);
    if (!has(key)) {
      out_[key] = nullptr;
      return std::nullopt;
    }
    return numbers(key, {});
  }

  std::vector<std::uint64_t> unsigned_ints(const std::string& key, std::vector<std::uint64_t> def) {
    seen_.insert(key);
    std::vector<std::uint64_t> v = std::move(def);
    if (has(key)) {
      const json& j = in_.at(key);
      if (!j.is_array()) throw ConfigError(path(key), "expected an array of integers");
      v.clear();
      for (std::size_t i = 0; i < j.size(); ++i) {
        const json& e = j[i];
        if (!e.is_number_integer() || (!e.is_number_unsigned() && e.get<std::int64_t>() < 0))
          throw ConfigError(path(key) + "/" + std::to_string(i), "expected a non-negative integer");
        v.push_back(e.get<std::uint64_t>());
      }
    }
    out_[key] = v;
    return v;
  }

  // Nested object; absent or null reads as {}.
  Node child(const std::string& key) {
    seen_.insert(key);
    static const json empty = json::object();
    const json& sub = has(key) ? in_.at(key) : empty;
    return Node(sub, path(key), out_[key]);
  }

  void finish() const {
    for (const auto& [key, value] : in_.items()) {
      if (seen_.count(key)) continue;
      std::vector<std::string> candidates(seen_.begin(), seen_.end());
      std::string msg = "unknown key '" + key + "'";
      std::optional<std::string> s = suggest_key(key, candidates);
      std::string via;
      std::vector<std::string> alias_names;
      for (const auto& [name, target] : aliases_) alias_names.push_back(name);
      if (auto a = suggest_key(key, alias_names)) {
        if (!s || edit_distance(key, *a) < edit_distance(key, *s)) {
          s = aliases_.at(*a);
          via = " (" + *a + ")";
        }
      }
      if (s) msg += "; did you mean '" + *s + "'" + via + "?";
      throw ConfigError(path(key), msg);
    }
  }

 private:
  const json& in_;
  std::string ptr_;
  json& out_;
  std::set<std::string> seen_;
  std::map<std::string, std::string> aliases_;
};

void require(bool ok, const std::string& ptr, const std::string& msg) {
  if (!ok) throw ConfigError(ptr, msg);
}

void require_size(const std::vector<double>& v, std::size_t d, const std::string& ptr) {
  require(v.size() == d, ptr, "expected " + std::to_string(d) + " entries, got " + std::to_string(v.size()));
}

ScalarFieldPtr parse_cost(Node n, std::size_t d, double default_value) {
  const std::string kind = n.choice("kind", "constant", {"constant", "polynomial"});
  ScalarFieldPtr field;
  if (kind == "constant") {
    field = std::make_shared<ConstantScalarField>(n.number("value", default_value));
  } else {
    const double c = n.number("constant", 0.0);
    auto lin = n.numbers("linear", std::vector<double>(d, 0.0));
    auto quad = n.numbers("quadratic", std::vector<double>(d, 0.0));
    require_size(lin, d, n.path("linear"));
    require_size(quad, d, n.path("quadratic"));
    field = std::make_shared<PolynomialScalarField>(c, lin, quad);
  }
  n.finish();
  return field;
}

DomainPtr parse_domain(Node n, std::size_t d) {
  const std::string shape = n.choice("shape", "box", {"box", "interval", "ball"});
  std::shared_ptr<Domain> dom;
  if (shape == "ball") {
    auto c = n.numbers("center", std::vector<double>(d, 0.0));
    require_size(c, d, n.path("center"));
    const double r = n.number("radius", 1.0);
    require(r > 0, n.path("radius"), "must be positive");
    dom = std::make_shared<BallDomain>(c, r);
  } else {
    require(shape == "box" || d == 1, n.path("shape"), "interval requires dimension 1");
    auto lo = n.numbers("lower", std::vector<double>(d, 0.0));
    auto hi = n.numbers("upper", std::vector<double>(d, 1.0));
    require_size(lo, d, n.path("lower"));
    require_size(hi, d, n.path("upper"));
    for (std::size_t k = 0; k < d; ++k)
      require(lo[k] < hi[k], n.path("upper") + "/" + std::to_string(k), "must exceed lower");
    dom = std::make_shared<BoxDomain>(lo, hi);
  }
  const double tol = n.number("tolerance", 1e-9);
  require(tol >= 0, n.path("tolerance"), "must be non-negative");
  dom->set_tolerance(tol);
  n.finish();
  return dom;
}

PotentialPtr parse_potential(Node n, std::size_t d) {
  const std::string kind = n.choice("kind", "zero", {"zero", "quadratic", "double_well_1d", "grid"});
  std::shared_ptr<Potential> pot;
  if (kind == "zero") {
    pot = std::make_shared<ZeroPotential>(d);
  } else if (kind == "quadratic") {
    auto k = n.numbers("stiffness", std::vector<double>(d, 1.0));
    auto c = n.numbers("center", std::vector<double>(d, 0.0));
    require_size(k, d, n.path("stiffness"));
    require_size(c, d, n.path("center"));
    pot = std::make_shared<QuadraticPotential>(k, c);
  } else if (kind == "double_well_1d") {
    require(d == 1, n.path("kind"), "double_well_1d requires dimension 1");
    const double height = n.number("height", 1.0);
    const double a = n.number("a", 1.0);
    pot = std::make_shared<DoubleWellPotential>(height, a);
  } else {
    auto file = n.optional_string("path");
    require(file.has_value(), n.path("path"), "grid potential needs a CSV path");
    try {
      pot = GridPotential::from_csv(*file, d);
    } catch (const std::exception& e) {
      throw ConfigError(n.path("path"), e.what());
    }
  }
  Node g = n.child("growth");
  const bool has_growth = n.has("growth");
  const double k0 = g.number("k0", 0.0);
  const double k1 = g.number("k1", 0.0);
  g.finish();
  if (has_growth) pot->set_growth({k0, k1});
  n.finish();
  return pot;
}

std::vector<std::size_t> to_sizes(const std::vector<std::uint64_t>& v) { return {v.begin(), v.end()}; }

BasisPtr parse_basis(Node n, const Domain& domain, std::size_t d) {
  const std::string kind = n.choice("kind", "gaussian", {"gaussian", "bspline", "compact", "monomial"});
  BasisPtr basis;
  if (kind == "gaussian" || kind == "compact") {
    auto counts = to_sizes(n.unsigned_ints("counts", std::vector<std::uint64_t>(d, 8)));
    require(counts.size() == d, n.path("counts"), "expected one count per axis");
    for (std::size_t k = 0; k < d; ++k)
      require(counts[k] >= 1, n.path("counts") + "/" + std::to_string(k), "must be at least 1");
    if (kind == "gaussian") {
      const auto layout = n.choice("layout", "nodes", {"nodes", "cells"}) == "cells" ? CentreLayout::cells
                                                                                    : CentreLayout::nodes;
      // Default: the centre spacing along the first axis.
      const double w = n.number("width", centre_spacing(domain.lower()[0], domain.upper()[0], counts[0], layout));
      require(w > 0, n.path("width"), "must be positive");
      basis = make_gaussian_basis(domain, counts, w, layout);
    } else {
      basis = make_disjoint_basis(domain, counts);
    }
  } else if (kind == "bspline") {
    require(d == 1, n.path("kind"), "bspline basis requires dimension 1");
    const auto count = n.unsigned_int("count", 8);
    require(count >= 1, n.path("count"), "must be at least 1");
    basis = make_bspline_basis(domain.lower()[0], domain.upper()[0], count);
  } else {
    auto powers = n.unsigned_ints("powers", {1, 2});
    require(!powers.empty(), n.path("powers"), "must not be empty");
    std::vector<BasisFunctionPtr> fns;
    for (std::size_t k = 0; k < d; ++k)
      for (std::size_t p = 0; p < powers.size(); ++p) {
        require(powers[p] >= 1, n.path("powers") + "/" + std::to_string(p), "must be at least 1");
        fns.push_back(std::make_shared<Monomial>(d, k, static_cast<int>(powers[p])));
      }
    basis = std::make_shared<BasisSet>(d, std::move(fns));
  }
  n.finish();
  return basis;
}

FirstVariationForm parse_form(Node& n, const std::string& key, const std::string& def) {
  const std::string f = n.choice(key, def, {"compact", "h_form", "centered"});
  if (f == "h_form") return FirstVariationForm::h_form;
  if (f == "centered") return FirstVariationForm::centered;
  return FirstVariationForm::compact;
}

}  // namespace

ExperimentConfig parse_config(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError("/", std::string("malformed JSON: ") + e.what());
  }
  return parse_config_document(doc);
}

ExperimentConfig parse_config_document(const json& doc) {
  ExperimentConfig cfg;
  json out = json::object();
  Node root(doc, "", out);

  // problem ---------------------------------------------------------------
  {
    Node p = root.child("problem");
    p.alias("temperature", "epsilon");
    p.alias("noise", "epsilon");
    p.alias("x0", "start");
    const auto d = p.unsigned_int("dimension", 1);
    require(d >= 1, p.path("dimension"), "must be at least 1");
    auto& spec = cfg.problem;
    spec.dimension = d;
    spec.epsilon = p.number("epsilon", 0.5);
    require(spec.epsilon > 0, p.path("epsilon"), "must be positive");
    spec.sigma = p.number("sigma", 1.0);
    require(spec.sigma > 0, p.path("sigma"), "must be positive");
    spec.domain = parse_domain(p.child("domain"), d);
    Point centre(d);
    const Point lo = spec.domain->lower(), hi = spec.domain->upper();
    for (std::size_t k = 0; k < d; ++k) centre[k] = 0.5 * (lo[k] + hi[k]);
    spec.start = p.numbers("start", centre);
    require_size(spec.start, d, p.path("start"));
    require(spec.domain->contains(spec.start), p.path("start"), "must lie inside the domain");
    spec.potential = parse_potential(p.child("potential"), d);
    spec.running_cost = parse_cost(p.child("running_cost"), d, 1.0);
    spec.terminal_cost = parse_cost(p.child("terminal_cost"), d, 1.5);
    p.finish();
  }
  const std::size_t d = cfg.problem.dimension;

  // basis -----------------------------------------------------------------
  cfg.basis = parse_basis(root.child("basis"), *cfg.problem.domain, d);
  {
    const ValidationReport rep = validate_problem(cfg.problem, cfg.basis.get());
    for (const auto& c : rep.checks) {
      if (c.passed) continue;
      std::string where = "/problem";
      if (c.name.rfind("basis_", 0) == 0) where = "/basis";
      throw ConfigError(where, c.name + ": " + c.detail);
    }
  }

  // sim -------------------------------------------------------------------
  {
    Node s = root.child("sim");
    cfg.sim.dt = s.number("dt", 1e-3);
    require(cfg.sim.dt > 0, s.path("dt"), "must be positive");
    cfg.sim.max_steps = s.unsigned_int("max_steps", 10'000'000);
    require(cfg.sim.max_steps >= 1, s.path("max_steps"), "must be at least 1");
    cfg.sim.seed = s.unsigned_int("seed", 1);
    cfg.sim.exit_interpolation = s.boolean("exit_interpolation", true);
    cfg.sim.bridge_correction = s.boolean("bridge_correction", true);
    cfg.n_traj = s.unsigned_int("n_traj", 1000);
    require(cfg.n_traj >= 2, s.path("n_traj"), "must be at least 2");
    s.finish();
  }

  // control ---------------------------------------------------------------
  {
    Node c = root.child("control");
    cfg.control.kind = c.choice("kind", "zero", {"zero", "basis", "oracle", "constant"});
    cfg.control.coefficients = c.numbers("coefficients", std::vector<double>(cfg.basis->size(), 0.0));
    require_size(cfg.control.coefficients, cfg.basis->size(), c.path("coefficients"));
    cfg.control.value = c.numbers("value", std::vector<double>(d, 0.0));
    require_size(cfg.control.value, d, c.path("value"));
    cfg.control.pde_h = c.number("pde_h", d == 1 ? 1e-3 : 2e-2);
    require(cfg.control.pde_h > 0, c.path("pde_h"), "must be positive");
    c.finish();
  }

  // estimate --------------------------------------------------------------
  {
    Node e = root.child("estimate");
    cfg.estimate.form = parse_form(e, "form", "compact");
    cfg.estimate.hessian = e.boolean("hessian", true);
    e.finish();
  }

  // descent ---------------------------------------------------------------
  {
    Node n = root.child("descent");
    auto& dc = cfg.descent;
    dc.a0.a = n.numbers("a0", std::vector<double>(cfg.basis->size(), 0.0));
    require_size(dc.a0.a, cfg.basis->size(), n.path("a0"));
    dc.n_iter = n.unsigned_int("n_iter", 50);
    dc.n_traj = n.unsigned_int("n_traj", 1000);
    require(dc.n_traj >= 2, n.path("n_traj"), "must be at least 2");
    {
      Node st = n.child("step");
      const std::string kind = st.choice("kind", "fixed", {"fixed", "backtracking"});
      dc.step.kind = kind == "fixed" ? StepSchedule::Kind::fixed : StepSchedule::Kind::backtracking;
      dc.step.h = st.number("h", 0.1);
      require(dc.step.h > 0, st.path("h"), "must be positive");
      dc.step.shrink = st.number("shrink", 0.5);
      require(dc.step.shrink > 0 && dc.step.shrink < 1, st.path("shrink"), "must lie in (0, 1)");
      dc.step.c1 = st.number("c1", 1e-4);
      require(dc.step.c1 >= 0 && dc.step.c1 < 1, st.path("c1"), "must lie in [0, 1)");
      dc.step.max_backtracks = st.unsigned_int("max_backtracks", 20);
      st.finish();
    }
    dc.grad_tol = n.number("grad_tol", 1e-3);
    require(dc.grad_tol > 0, n.path("grad_tol"), "must be positive");
    dc.min_iter = n.unsigned_int("min_iter", 0);
    dc.seed_policy = n.choice("seed_policy", "fresh", {"fresh", "frozen"}) == "fresh" ? SeedPolicy::fresh
                                                                                        : SeedPolicy::frozen;
    dc.seed = n.unsigned_int("seed", cfg.sim.seed);
    dc.form = parse_form(n, "form", "compact");
    dc.averaging_start = n.unsigned_int("averaging_start", 0);
    dc.allow_nonconvex = n.boolean("allow_nonconvex", false);
    if (auto r = n.optional_string("resume")) cfg.resume = *r;
    n.finish();
  }

  // pde -------------------------------------------------------------------
  {
    Node n = root.child("pde");
    cfg.pde.h = n.number("h", d == 1 ? 1e-3 : 2e-2);
    require(cfg.pde.h > 0, n.path("h"), "must be positive");
    cfg.pde.mgf_threshold = n.boolean("mgf_threshold", false);
    cfg.pde.mgf_lambda = n.optional_number("mgf_lambda");
    n.finish();
  }

  // verify ----------------------------------------------------------------
  {
    Node n = root.child("verify");
    auto ids = n.unsigned_ints("criteria", {1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11});
    for (std::size_t i = 0; i < ids.size(); ++i) {
      require(ids[i] >= 1 && ids[i] <= 11, n.path("criteria") + "/" + std::to_string(i), "criteria are 1..11");
      cfg.verify.criteria.push_back(static_cast<int>(ids[i]));
    }
    n.finish();
  }

  cfg.output_dir = root.string("output_dir", "out");
  root.finish();
  cfg.resolved = std::move(out);
  return cfg;
}

void override_seed(ExperimentConfig& cfg, std::uint64_t seed) {
  cfg.sim.seed = seed;
  cfg.descent.seed = seed;
  cfg.resolved["sim"]["seed"] = seed;
  cfg.resolved["descent"]["seed"] = seed;
}

void override_output_dir(ExperimentConfig& cfg, const std::filesystem::path& dir) {
  cfg.output_dir = dir;
  cfg.resolved["output_dir"] = dir.string();
}

void write_resolved_config(const ExperimentConfig& cfg) {
  std::filesystem::create_directories(cfg.output_dir);
  const auto path = cfg.output_dir / "config.resolved.json";
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write " + path.string());
  f << cfg.resolved.dump(2) << '\n';
}

}  // namespace exitctl
