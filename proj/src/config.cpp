#include "heatchain/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <fmt/core.h>
#include <yaml-cpp/yaml.h>

namespace heatchain {

namespace {

int line_of(const YAML::Node& node) { return node.Mark().line + 1; }

// A YAML mapping that remembers which keys were read, so unknown keys can be rejected.
class Section {
 public:
  Section(YAML::Node node, std::string path, const std::filesystem::path& file)
      : node_(std::move(node)), path_(std::move(path)), file_(file) {
    if (node_ && !node_.IsNull() && !node_.IsMap()) fail_here("expected a mapping");
  }

  bool has(const std::string& key) {
    used_.insert(key);
    return node_ && node_.IsMap() && node_[key] && !node_[key].IsNull();
  }

  YAML::Node raw(const std::string& key) {
    used_.insert(key);
    if (!node_ || !node_.IsMap()) return YAML::Node();
    return node_[key];
  }

  template <class T>
  T get(const std::string& key, T fallback) {
    if (!has(key)) return fallback;
    return convert<T>(node_[key], key);
  }

  template <class T>
  T require(const std::string& key) {
    if (!has(key)) fail_here(fmt::format("missing required key '{}'", qualified(key)));
    return convert<T>(node_[key], key);
  }

  Section child(const std::string& key) { return Section(raw(key), qualified(key), file_); }

  Vec vec(const std::string& key) {
    const auto v = require<std::vector<double>>(key);
    return Eigen::Map<const Vec>(v.data(), static_cast<Eigen::Index>(v.size()));
  }

  [[noreturn]] void fail(const std::string& key, const std::string& msg) const {
    const YAML::Node n = node_ && node_.IsMap() && node_[key] ? node_[key] : node_;
    throw ConfigError(fmt::format("{}:{}: {}: {}", file_.string(), n ? line_of(n) : 0, qualified(key), msg));
  }

  [[noreturn]] void fail_here(const std::string& msg) const {
    throw ConfigError(fmt::format("{}:{}: {}: {}", file_.string(), node_ ? line_of(node_) : 0,
                                  path_.empty() ? "<root>" : path_, msg));
  }

  void finish() const {
    if (!node_ || !node_.IsMap()) return;
    for (const auto& kv : node_) {
      const auto key = kv.first.as<std::string>();
      if (!used_.count(key)) {
        throw ConfigError(
            fmt::format("{}:{}: unknown key '{}'", file_.string(), line_of(kv.first), qualified(key)));
      }
    }
  }

  std::string qualified(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }
  const std::filesystem::path& file() const { return file_; }

 private:
  template <class T>
  T convert(const YAML::Node& n, const std::string& key) const {
    try {
      return n.as<T>();
    } catch (const YAML::Exception&) {
      fail(key, "value has the wrong type");
    }
  }

  YAML::Node node_;
  std::string path_;
  std::filesystem::path file_;
  std::set<std::string> used_;
};

void check(bool ok, Section& s, const std::string& key, const std::string& msg) {
  if (!ok) s.fail(key, msg);
}

SdeScheme parse_scheme(Section& s, const std::string& key, SdeScheme fallback) {
  const auto name = s.get<std::string>(key, "");
  if (name.empty()) return fallback;
  if (name == "euler-maruyama") return SdeScheme::euler_maruyama;
  if (name == "semi-implicit") return SdeScheme::semi_implicit;
  s.fail(key, fmt::format("unknown scheme '{}' (euler-maruyama or semi-implicit)", name));
}

PotentialSpec parse_potential(Section s) {
  PotentialSpec spec;
  const auto kind = s.require<std::string>("kind");
  try {
    spec.kind = parse_potential_kind(kind);
  } catch (const std::exception& e) {
    s.fail("kind", e.what());
  }
  spec.coeffs = s.require<std::vector<double>>("coeffs");
  s.finish();
  return spec;
}

StartSpec parse_start(const YAML::Node& node, const std::string& path, const std::filesystem::path& file) {
  StartSpec out;
  if (node.IsSequence()) {
    const auto v = node.as<std::vector<double>>();
    out.point = Eigen::Map<const Vec>(v.data(), static_cast<Eigen::Index>(v.size()));
    return out;
  }
  Section s(node, path, file);
  if (s.has("critical")) {
    out.critical = s.get<int>("critical", 0);
    check(*out.critical >= 0, s, "critical", "must be >= 0");
  }
  if (s.has("point")) out.point = s.vec("point");
  if (s.has("offset")) out.offset = s.vec("offset");
  if (out.critical.has_value() == (out.point.size() > 0)) s.fail_here("give exactly one of 'critical' or 'point'");
  s.finish();
  return out;
}

StartSpec start_at(Section& s, const std::string& key, StartSpec fallback) {
  const YAML::Node n = s.raw(key);
  if (!n || n.IsNull()) return fallback;
  try {
    return parse_start(n, s.qualified(key), s.file());
  } catch (const YAML::Exception&) {
    s.fail(key, "expected a list of numbers or a mapping with 'critical'/'point'");
  }
}

StartSpec lowest_critical() {
  StartSpec s;
  s.critical = 0;
  return s;
}

ModelParams parse_model(Section s) {
  const int n = s.require<int>("n");
  const int d = s.get<int>("d", 1);
  check(n >= 2, s, "n", "must be >= 2");
  check(d >= 1, s, "d", "must be >= 1");
  const double gamma = s.require<double>("gamma");
  check(gamma > 0.0 && std::isfinite(gamma), s, "gamma", "must be positive");
  const double lambda2 = s.require<double>("lambda2");
  check(lambda2 > 0.0 && std::isfinite(lambda2), s, "lambda2", "must be positive");
  const double eps = s.get<double>("eps", 0.0);
  check(eps >= 0.0 && std::isfinite(eps), s, "eps", "must be >= 0");
  const double eta = s.get<double>("eta", 0.0);
  check(std::abs(eta) < 1.0, s, "eta", fmt::format("|eta| must be < 1, got {}", eta));
  const PotentialSpec u1 = parse_potential(s.child("u1"));
  const PotentialSpec u2 = parse_potential(s.child("u2"));
  ModelParams::Options opts;
  opts.convexity_box = s.get<double>("convexity_box", opts.convexity_box);
  opts.convexity_grid = s.get<int>("convexity_grid", opts.convexity_grid);
  s.finish();
  try {
    return ModelParams::make(n, d, u1, u2, gamma, lambda2, eps, eta, opts);
  } catch (const std::invalid_argument& e) {
    s.fail_here(e.what());
  }
}

CriticalSection parse_critical(Section s) {
  CriticalSection c;
  c.box = s.get<double>("box", c.box);
  c.per_axis = s.get<int>("per_axis", c.per_axis);
  check(c.box > 0.0, s, "box", "must be positive");
  check(c.per_axis >= 1, s, "per_axis", "must be >= 1");
  c.options.newton_tol = s.get<double>("newton_tol", c.options.newton_tol);
  c.options.dedup_radius = s.get<double>("dedup_radius", c.options.dedup_radius);
  c.options.max_newton_steps = s.get<int>("max_newton_steps", c.options.max_newton_steps);
  c.options.degenerate_tol = s.get<double>("degenerate_tol", c.options.degenerate_tol);
  c.omega.horizon = s.get<double>("omega_horizon", c.omega.horizon);
  c.omega.h = s.get<double>("omega_h", c.omega.h);
  c.omega.capture_radius = s.get<double>("capture_radius", c.omega.capture_radius);
  s.finish();
  return c;
}

SdeSection parse_sde(Section s) {
  SdeSection c;
  c.scheme = parse_scheme(s, "scheme", c.scheme);
  c.h = s.get<double>("h", c.h);
  check(c.h > 0.0, s, "h", "must be positive");
  c.T = s.get<double>("T", c.T);
  check(c.T > 0.0, s, "T", "must be positive");
  c.thin = s.get<int>("thin", c.thin);
  check(c.thin >= 1, s, "thin", "must be >= 1");
  c.replicas = s.get<int>("replicas", c.replicas);
  check(c.replicas >= 1, s, "replicas", "must be >= 1");
  c.blowup_bound = s.get<double>("blowup_bound", c.blowup_bound);
  c.x0 = start_at(s, "x0", lowest_critical());
  if (s.has("hitting")) {
    Section hs = s.child("hitting");
    c.hitting_target = hs.require<std::string>("target");
    c.hitting_horizon = hs.get<double>("horizon", c.hitting_horizon);
    c.hitting_count = hs.get<int>("count", 100);
    check(c.hitting_count >= 1, hs, "count", "must be >= 1");
    hs.finish();
  }
  s.finish();
  return c;
}

RegionSpec parse_region(const YAML::Node& node, const std::string& path, const std::filesystem::path& file) {
  Section s(node, path, file);
  RegionSpec r;
  r.name = s.require<std::string>("name");
  const auto kind = s.require<std::string>("kind");
  if (kind == "box") {
    r.kind = Region::Kind::box;
    r.lower = s.vec("lower");
    r.upper = s.vec("upper");
    check(r.lower.size() == r.upper.size(), s, "upper", "lower and upper differ in length");
  } else if (kind == "ball") {
    r.kind = Region::Kind::ball;
    r.center = start_at(s, "center", StartSpec{});
    if (!r.center->critical && r.center->point.size() == 0) s.fail("center", "missing");
    r.radius = s.require<double>("radius");
    check(r.radius > 0.0, s, "radius", "must be positive");
    r.coords = s.get<std::vector<int>>("coords", {});
  } else if (kind == "ellipsoid") {
    r.kind = Region::Kind::ellipsoid;
    r.center = start_at(s, "center", StartSpec{});
    if (!r.center->critical && r.center->point.size() == 0) s.fail("center", "missing");
    r.coords = s.require<std::vector<int>>("coords");
    const auto rows = s.require<std::vector<std::vector<double>>>("shape");
    const auto k = static_cast<Eigen::Index>(r.coords.size());
    check(k > 0, s, "coords", "must not be empty");
    check(static_cast<Eigen::Index>(rows.size()) == k, s, "shape", "needs one row per coordinate");
    r.shape = Mat(k, k);
    for (Eigen::Index i = 0; i < k; ++i) {
      check(static_cast<Eigen::Index>(rows[i].size()) == k, s, "shape", "needs one column per coordinate");
      for (Eigen::Index j = 0; j < k; ++j) r.shape(i, j) = rows[i][j];
    }
    check(r.shape.isApprox(r.shape.transpose(), 1e-12), s, "shape", "must be symmetric");
    check(Eigen::LLT<Mat>(r.shape).info() == Eigen::Success, s, "shape", "must be positive definite");
  } else if (kind == "everything") {
    r.kind = Region::Kind::everything;
  } else {
    s.fail("kind", fmt::format("unknown region kind '{}' (box, ball, ellipsoid or everything)", kind));
  }
  r.complement = s.get<bool>("complement", false);
  s.finish();
  return r;
}

PairOptions parse_mam(Section s) {
  PairOptions p;
  p.T_grid = s.get<std::vector<double>>("T_grid", p.T_grid);
  check(!p.T_grid.empty(), s, "T_grid", "must not be empty");
  for (double T : p.T_grid) check(T > 0.0, s, "T_grid", "horizons must be positive");
  p.N = s.get<int>("N", p.N);
  check(p.N >= 2, s, "N", "must be >= 2");
  p.max_dt = s.get<double>("max_dt", p.max_dt);
  check(p.max_dt > 0.0, s, "max_dt", "must be positive");
  p.refine = s.get<bool>("refine", p.refine);
  p.check_warm_start = s.get<bool>("check_warm_start", p.check_warm_start);
  p.triangle_closure = s.get<bool>("triangle_closure", p.triangle_closure);
  if (s.has("cold_inits")) {
    p.cold_inits.clear();
    for (const auto& name : s.get<std::vector<std::string>>("cold_inits", {})) {
      try {
        const MamInit init = parse_mam_init(name);
        if (init == MamInit::warm_start) s.fail("cold_inits", "warm-start is not a cold initialisation");
        p.cold_inits.push_back(init);
      } catch (const std::invalid_argument& e) {
        s.fail("cold_inits", e.what());
      }
    }
    check(!p.cold_inits.empty(), s, "cold_inits", "must not be empty");
  }
  const auto method = s.get<std::string>("method", "shooting");
  if (method == "shooting") {
    p.mam.method = MamMethod::shooting;
  } else if (method == "transcription") {
    p.mam.method = MamMethod::transcription;
  } else {
    s.fail("method", fmt::format("unknown method '{}' (shooting or transcription)", method));
  }
  p.mam.penalty_schedule = s.get<std::vector<double>>("penalty_schedule", p.mam.penalty_schedule);
  p.mam.gap_tol = s.get<double>("gap_tol", p.mam.gap_tol);
  p.mam.max_iterations = s.get<int>("max_iterations", p.mam.max_iterations);
  p.mam.gradient_tol = s.get<double>("gradient_tol", p.mam.gradient_tol);
  p.mam.defect_weights = s.get<std::vector<double>>("defect_weights", p.mam.defect_weights);
  p.mam.lm_iterations = s.get<int>("lm_iterations", p.mam.lm_iterations);
  p.mam.polish_penalties = s.get<std::vector<double>>("polish_penalties", p.mam.polish_penalties);
  s.finish();
  return p;
}

QuasipotentialSection parse_quasipotential(Section s) {
  QuasipotentialSection q;
  const YAML::Node points = s.raw("points");
  if (points && !points.IsNull()) {
    if (!points.IsSequence()) s.fail("points", "expected a list");
    for (std::size_t i = 0; i < points.size(); ++i) {
      q.points.push_back(parse_start(points[i], fmt::format("{}[{}]", s.qualified("points"), i), s.file()));
    }
  }
  if (s.has("grid")) {
    Section g = s.child("grid");
    TargetGrid grid;
    grid.coords = g.require<std::vector<int>>("coords");
    grid.lower = g.vec("lower");
    grid.upper = g.vec("upper");
    const auto k = static_cast<Eigen::Index>(grid.coords.size());
    check(k > 0, g, "coords", "must not be empty");
    check(grid.lower.size() == k && grid.upper.size() == k, g, "upper", "lower/upper need one entry per coordinate");
    grid.per_axis = g.get<int>("per_axis", grid.per_axis);
    check(grid.per_axis >= 1, g, "per_axis", "must be >= 1");
    grid.base = start_at(g, "base", lowest_critical());
    g.finish();
    q.grid = grid;
  }
  s.finish();
  return q;
}

ActionSection parse_action(Section s) {
  ActionSection a;
  a.T = s.get<double>("T", a.T);
  check(a.T > 0.0, s, "T", "must be positive");
  a.N = s.get<int>("N", a.N);
  check(a.N >= 2, s, "N", "must be >= 2");
  a.modes = s.get<int>("modes", a.modes);
  check(a.modes >= 1, s, "modes", "must be >= 1");
  a.amplitude = s.get<double>("amplitude", a.amplitude);
  a.x0 = start_at(s, "x0", lowest_critical());
  a.control_csv = s.get<std::string>("control_csv", "");
  if (s.has("minimize")) {
    Section ms = s.child("minimize");
    a.minimize_from = start_at(ms, "from", lowest_critical());
    if (!ms.has("to")) ms.fail_here("missing required key 'to'");
    a.minimize_to = start_at(ms, "to", StartSpec{});
    ms.finish();
  }
  s.finish();
  return a;
}

std::vector<double> eps_grid(Section& s, const std::string& key) {
  auto grid = s.require<std::vector<double>>(key);
  check(!grid.empty(), s, key, "must not be empty");
  for (std::size_t i = 0; i < grid.size(); ++i) {
    check(grid[i] > 0.0, s, key, "temperatures must be positive");
    if (i > 0) check(grid[i] < grid[i - 1], s, key, "must be strictly decreasing");
  }
  return grid;
}

SamplingOptions parse_sampling(Section& s, SamplingOptions o) {
  o.T_sample = s.get<double>("T_sample", o.T_sample);
  check(o.T_sample > 0.0, s, "T_sample", "must be positive");
  o.h = s.get<double>("h", o.h);
  check(o.h > 0.0, s, "h", "must be positive");
  o.replicas = s.get<int>("replicas", o.replicas);
  check(o.replicas >= 1, s, "replicas", "must be >= 1");
  o.scheme = parse_scheme(s, "scheme", o.scheme);
  o.blowup_bound = s.get<double>("blowup_bound", o.blowup_bound);
  o.decorrelation_time = s.get<double>("decorrelation_time", o.decorrelation_time);
  return o;
}

MeasureSection parse_measure(Section s) {
  MeasureSection m;
  m.eps_grid = eps_grid(s, "eps_grid");
  m.regions = s.require<std::vector<std::string>>("regions");
  const auto estimators = s.get<std::vector<std::string>>("estimators", {"direct"});
  m.direct = m.cycle = false;
  for (const auto& e : estimators) {
    if (e == "direct") {
      m.direct = true;
    } else if (e == "cycle") {
      m.cycle = true;
    } else {
      s.fail("estimators", fmt::format("unknown estimator '{}' (direct or cycle)", e));
    }
  }
  m.sampling = parse_sampling(s, m.sampling);
  if (s.has("burn_in")) m.burn_in = s.get<double>("burn_in", 0.0);
  if (s.has("x0")) m.x0 = start_at(s, "x0", lowest_critical());
  m.bootstrap = s.get<int>("bootstrap", m.bootstrap);
  if (s.has("cycle")) {
    Section c = s.child("cycle");
    auto& o = m.cycle_options;
    o.rho = c.get<double>("rho", o.rho);
    o.rho_prime = c.get<double>("rho_prime", o.rho_prime);
    check(o.rho > 0.0 && o.rho_prime > o.rho, c, "rho_prime", "need 0 < rho < rho_prime");
    o.cycles = c.get<int>("cycles", o.cycles);
    o.cycle_horizon = c.get<double>("cycle_horizon", o.cycle_horizon);
    o.max_timeout_fraction = c.get<double>("max_timeout_fraction", o.max_timeout_fraction);
    c.finish();
  }
  m.cycle_options.h = m.sampling.h;
  m.cycle_options.replicas = m.sampling.replicas;
  m.cycle_options.scheme = m.sampling.scheme;
  m.cycle_options.blowup_bound = m.sampling.blowup_bound;
  if (s.has("kramers")) {
    Section k = s.child("kramers");
    KramersSection ks;
    ks.from = start_at(k, "from", lowest_critical());
    ks.target = k.require<std::string>("target");
    ks.eps_grid = eps_grid(k, "eps_grid");
    ks.h = k.get<double>("h", ks.h);
    ks.replicas = k.get<int>("replicas", ks.replicas);
    check(ks.replicas >= 2, k, "replicas", "must be >= 2");
    ks.horizon = k.get<double>("horizon", ks.horizon);
    ks.scheme = parse_scheme(k, "scheme", ks.scheme);
    k.finish();
    m.kramers = ks;
  }
  s.finish();
  return m;
}

VerifySection parse_verify(Section s) {
  VerifySection v;
  v.etas = s.get<std::vector<double>>("etas", {});
  for (double eta : v.etas) check(std::abs(eta) < 1.0, s, "etas", "|eta| must be < 1");
  v.controls = s.get<int>("controls", v.controls);
  check(v.controls >= 1, s, "controls", "must be >= 1");
  v.control_T = s.get<double>("control_T", v.control_T);
  v.control_modes = s.get<int>("control_modes", v.control_modes);
  v.control_amplitude = s.get<double>("control_amplitude", v.control_amplitude);
  v.start_box = s.get<double>("start_box", v.start_box);
  v.segments = s.get<std::vector<int>>("segments", v.segments);
  check(v.segments.size() >= 2, s, "segments", "need at least two grid sizes");
  v.sweep_segments = s.get<std::vector<int>>("sweep_segments", v.sweep_segments);
  v.min_order = s.get<double>("min_order", v.min_order);
  v.sandwich_slack = s.get<double>("sandwich_slack", v.sandwich_slack);
  v.equilibrium_tol = s.get<double>("equilibrium_tol", v.equilibrium_tol);
  v.balance_tol = s.get<double>("balance_tol", v.balance_tol);
  v.entropy = s.get<bool>("entropy", v.entropy);
  if (s.has("entropy_sampling")) {
    Section e = s.child("entropy_sampling");
    v.entropy_sampling = parse_sampling(e, v.entropy_sampling);
    v.entropy_sampling.T_burn = e.get<double>("burn_in", v.entropy_sampling.T_burn);
    e.finish();
  }
  s.finish();
  return v;
}

void check_start(const StartSpec& s, const ModelParams& m, const std::string& what) {
  if (s.point.size() > 0 && s.point.size() != m.dim()) {
    throw ConfigError(fmt::format("{}: point has {} entries, the state has {}", what, s.point.size(), m.dim()));
  }
  if (s.offset.size() > 0 && s.offset.size() != m.dim()) {
    throw ConfigError(fmt::format("{}: offset has {} entries, the state has {}", what, s.offset.size(), m.dim()));
  }
}

}  // namespace

State StartSpec::resolve(const ModelParams& m, const std::vector<CriticalSet>& sets) const {
  Vec x;
  if (critical) {
    if (*critical >= static_cast<int>(sets.size())) {
      throw ConfigError(fmt::format("critical set {} requested but only {} found", *critical, sets.size()));
    }
    x = sets[static_cast<std::size_t>(*critical)].point.vec();
  } else {
    x = point;
  }
  if (x.size() != m.dim()) throw ConfigError(fmt::format("state has {} entries, expected {}", x.size(), m.dim()));
  if (offset.size() == x.size()) x += offset;
  return State(m.n, m.d, std::move(x));
}

Region RegionSpec::resolve(const ModelParams& m, const std::vector<CriticalSet>& sets) const {
  Region r = Region::everything();
  switch (kind) {
    case Region::Kind::box:
      if (lower.size() != m.dim()) throw ConfigError(fmt::format("region '{}': box needs {} bounds", name, m.dim()));
      r = Region::box(lower, upper);
      break;
    case Region::Kind::ball: {
      const Vec c = center->resolve(m, sets).vec();
      for (int k : coords) {
        if (k < 0 || k >= m.dim()) throw ConfigError(fmt::format("region '{}': coordinate {} out of range", name, k));
      }
      r = Region::ball(c, radius, coords);
      break;
    }
    case Region::Kind::ellipsoid: {
      const Vec c = center->resolve(m, sets).vec();
      for (int k : coords) {
        if (k < 0 || k >= m.dim()) throw ConfigError(fmt::format("region '{}': coordinate {} out of range", name, k));
      }
      r = Region::ellipsoid(c, shape, coords);
      break;
    }
    case Region::Kind::everything:
      break;
  }
  return complement ? r.complement() : r;
}

const RegionSpec& ExperimentConfig::region(const std::string& name) const {
  for (const auto& r : regions) {
    if (r.name == name) return r;
  }
  throw ConfigError(fmt::format("unknown region '{}'", name));
}

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

ExperimentConfig parse_config_text(const std::string& text, const std::filesystem::path& source) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    throw ConfigError(fmt::format("{}:{}: {}", source.string(), e.mark.line + 1, e.msg));
  }
  Section s(root, "", source);
  ExperimentConfig cfg;
  cfg.source = source;
  cfg.hash = fnv1a64(text);
  cfg.seed = s.get<std::uint64_t>("seed", 0);
  cfg.out = s.get<std::string>("out", "out");
  if (!s.has("model")) s.fail_here("missing required section 'model'");
  cfg.model = parse_model(s.child("model"));
  cfg.critical = parse_critical(s.child("critical"));
  cfg.sde = parse_sde(s.child("sde"));
  const YAML::Node regions = s.raw("regions");
  if (regions && !regions.IsNull()) {
    if (!regions.IsSequence()) s.fail("regions", "expected a list");
    std::set<std::string> names;
    for (std::size_t i = 0; i < regions.size(); ++i) {
      RegionSpec r = parse_region(regions[i], fmt::format("regions[{}]", i), source);
      if (!names.insert(r.name).second) s.fail("regions", fmt::format("duplicate region name '{}'", r.name));
      cfg.regions.push_back(std::move(r));
    }
  }
  cfg.mam = parse_mam(s.child("mam"));
  cfg.quasipotential = parse_quasipotential(s.child("quasipotential"));
  cfg.action = parse_action(s.child("action"));
  if (s.has("measure")) cfg.measure = parse_measure(s.child("measure"));
  cfg.verify = parse_verify(s.child("verify"));
  s.finish();

  const ModelParams& m = cfg.model;
  check_start(cfg.sde.x0, m, "sde.x0");
  check_start(cfg.action.x0, m, "action.x0");
  for (const auto& p : cfg.quasipotential.points) check_start(p, m, "quasipotential.points");
  if (cfg.quasipotential.grid) {
    for (int k : cfg.quasipotential.grid->coords) {
      if (k < 0 || k >= m.dim()) throw ConfigError(fmt::format("quasipotential.grid.coords: {} out of range", k));
    }
  }
  for (const auto& r : cfg.regions) {
    if (r.kind == Region::Kind::box && r.lower.size() != m.dim()) {
      throw ConfigError(fmt::format("regions: box '{}' needs {} bounds, got {}", r.name, m.dim(), r.lower.size()));
    }
  }
  if (!cfg.sde.hitting_target.empty()) cfg.region(cfg.sde.hitting_target);
  for (const auto& name : cfg.measure.regions) cfg.region(name);
  if (cfg.measure.kramers) cfg.region(cfg.measure.kramers->target);
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(fmt::format("cannot read config '{}'", path.string()));
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str(), path);
}

std::vector<State> resolve_targets(const ExperimentConfig& cfg, const std::vector<CriticalSet>& sets) {
  const ModelParams& m = cfg.model;
  std::vector<State> out;
  for (const auto& p : cfg.quasipotential.points) out.push_back(p.resolve(m, sets));
  if (const auto& g = cfg.quasipotential.grid) {
    const State base = g->base.resolve(m, sets);
    const int k = static_cast<int>(g->coords.size());
    std::vector<int> idx(static_cast<std::size_t>(k), 0);
    while (true) {
      Vec x = base.vec();
      for (int a = 0; a < k; ++a) {
        const double s = g->per_axis == 1 ? 0.5 : static_cast<double>(idx[a]) / (g->per_axis - 1);
        x[g->coords[a]] = g->lower[a] + s * (g->upper[a] - g->lower[a]);
      }
      out.emplace_back(m.n, m.d, std::move(x));
      int a = k - 1;
      while (a >= 0 && ++idx[a] == g->per_axis) idx[a--] = 0;
      if (a < 0) break;
    }
  }
  return out;
}

}  // namespace heatchain
