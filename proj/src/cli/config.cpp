#include "config.hpp"

#include <cmath>
#include <fstream>
#include <map>

namespace mppgeo::cli {

namespace {

std::string type_name(const json& j) { return j.type_name(); }

[[noreturn]] void fail(const std::string& path, const std::string& what) { throw ConfigError(path + ": " + what); }

double as_number(const json& j, const std::string& path) {
  if (!j.is_number()) fail(path, "expected a number, got " + type_name(j));
  const double v = j.get<double>();
  if (!std::isfinite(v)) fail(path, "must be finite");
  return v;
}

Vec as_vector(const json& j, const std::string& path) {
  if (!j.is_array()) fail(path, "expected an array of numbers");
  Vec v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i)
    v[static_cast<Eigen::Index>(i)] = as_number(j[i], path + "[" + std::to_string(i) + "]");
  return v;
}

Mat as_matrix(const json& j, const std::string& path) {
  if (!j.is_array() || j.empty()) fail(path, "expected a nonempty array of rows");
  const std::size_t cols = j[0].is_array() ? j[0].size() : 0;
  if (cols == 0) fail(path, "rows must be nonempty arrays");
  Mat m(static_cast<Eigen::Index>(j.size()), static_cast<Eigen::Index>(cols));
  for (std::size_t r = 0; r < j.size(); ++r) {
    const Vec row = as_vector(j[r], path + "[" + std::to_string(r) + "]");
    if (static_cast<std::size_t>(row.size()) != cols) fail(path, "rows have different lengths");
    m.row(static_cast<Eigen::Index>(r)) = row.transpose();
  }
  return m;
}

const std::map<std::string, std::set<std::string>>& command_sections() {
  static const std::map<std::string, std::set<std::string>> sections{
      {"mpp", {"manifold", "frame", "momentum"}},
      {"sweep", {"manifold", "frame", "momentum", "sweep"}},
      {"shoot", {"manifold", "frame", "target", "shooting"}},
      {"landmarks", {"landmarks", "shooting"}},
      {"estimate", {"manifold", "estimate", "shooting"}},
  };
  return sections;
}

ManifoldConfig parse_manifold(ObjectReader r) {
  ManifoldConfig c;
  c.type = r.string("type");
  if (c.type == "plane") {
    c.dim = r.integer("dim", 2);
    if (c.dim < 1) fail(r.child_path("dim"), "must be >= 1");
  } else if (c.type == "landmarks") {
    c.landmarks = r.integer("count");
    c.ambient = r.integer("ambient", 2);
    c.sigma = r.number("sigma", 0.5);
    if (c.landmarks < 1 || c.ambient < 1 || c.sigma <= 0) fail(r.child_path("count"), "invalid landmark manifold");
  } else {
    try {
      c.surface.kind = parse_surface_kind(c.type);
    } catch (const Error& e) {
      fail(r.child_path("type"), e.what());
    }
    c.surface.radius = r.number("radius", 1.0);
    if (r.has("axes")) {
      const Vec a = r.vector("axes");
      if (a.size() != 3) fail(r.child_path("axes"), "expected three semi-axes");
      c.surface.axes = {a[0], a[1], a[2]};
    }
    try {
      c.surface.validate();
    } catch (const Error& e) {
      fail(r.child_path("type"), e.what());
    }
  }
  r.finish();
  return c;
}

FrameConfig parse_frame(ObjectReader r) {
  FrameConfig c;
  c.x = r.vector("x");
  c.u = r.matrix("u");
  c.lambda = r.number("lambda", 0.0);
  c.orthonormal_basis = r.boolean("orthonormal_basis", false);
  r.finish();
  return c;
}

MomentumConfig parse_momentum(ObjectReader r) {
  MomentumConfig c;
  if (r.has("xi_x")) c.xi_x = r.vector("xi_x");
  if (r.has("velocity")) c.velocity = r.vector("velocity");
  if (c.xi_x.has_value() == c.velocity.has_value()) fail("momentum", "give exactly one of xi_x or velocity");
  if (r.has("xi_u")) c.xi_u = r.matrix("xi_u");
  r.finish();
  return c;
}

SweepConfig parse_sweep(ObjectReader r) {
  SweepConfig c;
  const std::string kind = r.string("kind");
  if (kind == "rotation") {
    c.kind = SweepConfig::Kind::kRotation;
    c.from = r.number("from", 0.0);
    c.to = r.number("to", M_PI / 2.0);
  } else if (kind == "vertical") {
    c.kind = SweepConfig::Kind::kVertical;
    c.from = r.number("from");
    c.to = r.number("to");
    c.direction = r.matrix("direction");
  } else {
    fail(r.child_path("kind"), "expected rotation or vertical");
  }
  c.count = r.integer("count");
  if (c.count < 1) fail(r.child_path("count"), "must be >= 1");
  r.finish();
  return c;
}

void parse_shooting(ObjectReader r, ShootingOptions& s) {
  s.restarts = r.integer("restarts", s.restarts);
  s.lm.tolerance = r.number("tolerance", s.lm.tolerance);
  s.lm.max_iterations = r.integer("max_iterations", s.lm.max_iterations);
  s.perturbation = r.number("perturbation", s.perturbation);
  if (s.restarts < 1) fail(r.child_path("restarts"), "must be >= 1");
  if (s.lm.tolerance <= 0) fail(r.child_path("tolerance"), "must be positive");
  if (s.lm.max_iterations < 0) fail(r.child_path("max_iterations"), "must be >= 0");
  r.finish();
}

LandmarkConfig parse_landmarks(ObjectReader r) {
  LandmarkConfig c;
  c.sigma = r.number("sigma", 0.5);
  c.source = r.points("source");
  c.target = r.points("target");
  if (c.source.size() != c.target.size()) fail(r.child_path("target"), "source and target sizes differ");
  const int amb = static_cast<int>(c.source.front().size());
  for (const auto* set : {&c.source, &c.target})
    for (const Vec& p : *set)
      if (p.size() != amb) fail(r.child_path("source"), "landmarks must share one ambient dimension");
  c.frame_scale = r.has("frame_scale") ? r.vector("frame_scale") : Vec::Ones(amb);
  if (c.frame_scale.size() != amb) fail(r.child_path("frame_scale"), "one scale per ambient axis");
  c.lambda = r.number("lambda", 0.0);
  c.compare_isotropic = r.boolean("compare_isotropic", true);
  if (r.has("grid")) {
    ObjectReader g = r.object("grid");
    c.grid_lines = g.integer("lines", c.grid_lines);
    c.grid_padding = g.number("padding", c.grid_padding);
    if (c.grid_lines < 2) fail(g.child_path("lines"), "must be >= 2");
    g.finish();
  }
  if (c.sigma <= 0) fail(r.child_path("sigma"), "must be positive");
  r.finish();
  return c;
}

EstimateConfig parse_estimate(ObjectReader r) {
  EstimateConfig c;
  const std::string method = r.string("method");
  if (method == "frechet") c.method = EstimateConfig::Method::kFrechet;
  else if (method == "mle") c.method = EstimateConfig::Method::kMle;
  else fail(r.child_path("method"), "expected frechet or mle");
  if (r.has("data") == r.has("sample")) fail("estimate", "give exactly one of data or sample");
  if (r.has("data")) c.data = r.points("data");
  if (r.has("sample")) {
    ObjectReader s = r.object("sample");
    SampleConfig sc;
    sc.n = s.integer("n");
    sc.mean = s.vector("mean");
    if (s.has("factor")) sc.factor = s.matrix("factor");
    else sc.factor = s.number("std", 1.0) * Mat::Identity(sc.mean.size(), sc.mean.size());
    if (sc.n < 1) fail(s.child_path("n"), "must be >= 1");
    if (sc.factor.rows() != sc.mean.size()) fail(s.child_path("factor"), "rows must match the mean");
    s.finish();
    c.sample = sc;
  }
  if (c.method == EstimateConfig::Method::kFrechet) {
    if (r.has("section")) {
      ObjectReader s = r.object("section");
      c.section_u = s.matrix("u");
      c.section_orthonormal = s.boolean("orthonormal_basis", true);
      c.section_lambda = s.number("lambda", 0.0);
      s.finish();
    }
  } else {
    c.k = r.integer("k", 0);
    c.lambda = r.number("lambda", 0.0);
  }
  c.options.max_iterations = r.integer("max_iterations", c.options.max_iterations);
  c.options.simplex_tolerance = r.number("simplex_tolerance", c.options.simplex_tolerance);
  c.options.initial_step = r.number("initial_step", c.options.initial_step);
  c.options.rank_guard = r.number("rank_guard", c.options.rank_guard);
  c.options.parallel = r.boolean("parallel", c.options.parallel);
  if (c.options.max_iterations < 1) fail(r.child_path("max_iterations"), "must be >= 1");
  if (c.options.simplex_tolerance <= 0) fail(r.child_path("simplex_tolerance"), "must be positive");
  r.finish();
  return c;
}

}  // namespace

ObjectReader::ObjectReader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
  if (!j_.is_object()) fail(path_, "expected an object, got " + type_name(j_));
}

bool ObjectReader::has(const std::string& key) const { return j_.contains(key); }

const json& ObjectReader::at(const std::string& key) {
  if (!j_.contains(key)) fail(child_path(key), "missing required key");
  seen_.insert(key);
  return j_.at(key);
}

const json& ObjectReader::raw(const std::string& key) { return at(key); }

double ObjectReader::number(const std::string& key) { return as_number(at(key), child_path(key)); }

double ObjectReader::number(const std::string& key, double fallback) { return has(key) ? number(key) : fallback; }

int ObjectReader::integer(const std::string& key) {
  const json& v = at(key);
  if (!v.is_number_integer()) fail(child_path(key), "expected an integer");
  return v.get<int>();
}

int ObjectReader::integer(const std::string& key, int fallback) { return has(key) ? integer(key) : fallback; }

std::uint64_t ObjectReader::unsigned_integer(const std::string& key, std::uint64_t fallback) {
  if (!has(key)) return fallback;
  const json& v = at(key);
  if (!v.is_number_unsigned()) fail(child_path(key), "expected a nonnegative integer");
  return v.get<std::uint64_t>();
}

bool ObjectReader::boolean(const std::string& key, bool fallback) {
  if (!has(key)) return fallback;
  const json& v = at(key);
  if (!v.is_boolean()) fail(child_path(key), "expected true or false");
  return v.get<bool>();
}

std::string ObjectReader::string(const std::string& key) {
  const json& v = at(key);
  if (!v.is_string()) fail(child_path(key), "expected a string");
  return v.get<std::string>();
}

std::string ObjectReader::string(const std::string& key, const std::string& fallback) {
  return has(key) ? string(key) : fallback;
}

Vec ObjectReader::vector(const std::string& key) { return as_vector(at(key), child_path(key)); }

Mat ObjectReader::matrix(const std::string& key) { return as_matrix(at(key), child_path(key)); }

std::vector<Vec> ObjectReader::points(const std::string& key) {
  const Mat m = matrix(key);
  std::vector<Vec> out;
  for (int r = 0; r < m.rows(); ++r) out.push_back(m.row(r).transpose());
  return out;
}

ObjectReader ObjectReader::object(const std::string& key) { return ObjectReader(at(key), child_path(key)); }

void ObjectReader::finish() const {
  for (auto it = j_.begin(); it != j_.end(); ++it)
    if (!seen_.count(it.key())) fail(child_path(it.key()), "unknown key");
}

ExperimentConfig parse_config(const std::string& command, const json& j, const Overrides& overrides) {
  const auto sections = command_sections().find(command);
  if (sections == command_sections().end()) throw ConfigError("unknown command '" + command + "'");
  ObjectReader r(j, "config");
  for (auto it = j.begin(); it != j.end(); ++it) {
    const std::string& key = it.key();
    if (key != "description" && key != "seed" && key != "integrator" && !sections->second.count(key))
      fail("config." + key, "unknown key for command " + command);
  }

  ExperimentConfig c;
  c.source = j;
  c.description = r.string("description", "");
  c.seed = r.unsigned_integer("seed", 0);
  c.integrator = {Scheme::kRk4, 1000, 1.0};
  if (r.has("integrator")) {
    ObjectReader ir = r.object("integrator");
    try {
      c.integrator.scheme = parse_scheme(ir.string("scheme", "rk4"));
    } catch (const Error& e) {
      fail(ir.child_path("scheme"), e.what());
    }
    c.integrator.steps = ir.integer("steps", c.integrator.steps);
    c.integrator.t_end = ir.number("t_end", c.integrator.t_end);
    ir.finish();
  }
  if (overrides.seed) c.seed = *overrides.seed;
  if (overrides.steps) c.integrator.steps = *overrides.steps;
  if (overrides.scheme) c.integrator.scheme = *overrides.scheme;
  try {
    c.integrator.validate();
  } catch (const Error& e) {
    fail("config.integrator", e.what());
  }

  const auto& need = sections->second;
  auto required = [&](const std::string& key) {
    if (!r.has(key)) fail("config." + key, "required for command " + command);
  };
  if (need.count("manifold")) {
    required("manifold");
    c.manifold = parse_manifold(r.object("manifold"));
  }
  if (need.count("frame")) {
    required("frame");
    c.frame = parse_frame(r.object("frame"));
  }
  if (need.count("momentum")) {
    required("momentum");
    c.momentum = parse_momentum(r.object("momentum"));
  }
  if (need.count("sweep")) {
    required("sweep");
    c.sweep = parse_sweep(r.object("sweep"));
  }
  if (need.count("target")) {
    required("target");
    c.target = r.vector("target");
  }
  if (need.count("landmarks")) {
    required("landmarks");
    c.landmarks = parse_landmarks(r.object("landmarks"));
  }
  if (need.count("estimate")) {
    required("estimate");
    c.estimate = parse_estimate(r.object("estimate"));
  }
  c.shooting.integrator = c.integrator;
  c.shooting.seed = c.seed;
  if (c.estimate) c.shooting.restarts = c.estimate->options.shooting.restarts;
  if (r.has("shooting")) parse_shooting(r.object("shooting"), c.shooting);
  if (c.estimate) c.estimate->options.shooting = c.shooting;
  r.finish();
  return c;
}

ExperimentConfig load_config(const std::string& command, const std::string& path, const Overrides& overrides) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config is not valid JSON: " + std::string(e.what()));
  }
  return parse_config(command, j, overrides);
}

ManifoldPtr build_manifold(const ManifoldConfig& c) {
  if (c.type == "plane") return std::make_shared<EuclideanSpace>(c.dim);
  if (c.type == "landmarks") return std::make_shared<LandmarkManifold>(c.landmarks, c.ambient, c.sigma);
  return make_surface(c.surface);
}

Mat orthonormal_basis(const ChartManifold& M, const Vec& x) {
  Eigen::SelfAdjointEigenSolver<Mat> es(M.metric(x));
  return es.eigenvectors() * es.eigenvalues().cwiseSqrt().cwiseInverse().asDiagonal() * es.eigenvectors().transpose();
}

FramePoint build_frame(const ChartManifold& M, const FrameConfig& c) {
  const int d = M.dim();
  if (c.x.size() != d) fail("config.frame.x", "expected " + std::to_string(d) + " coordinates");
  if (c.u.rows() != d || c.u.cols() > d) fail("config.frame.u", "expected a d×k matrix with d = " + std::to_string(d));
  if (!M.in_domain(c.x)) fail("config.frame.x", "outside the chart domain");
  FramePoint s{c.x, c.orthonormal_basis ? Mat(orthonormal_basis(M, c.x) * c.u) : c.u, c.lambda};
  try {
    s.validate();
  } catch (const Error& e) {
    fail("config.frame", e.what());
  }
  return s;
}

CotangentState build_state(const ChartManifold& M, const FramePoint& s, const MomentumConfig& c) {
  const int d = s.d(), k = s.k();
  CotangentState z;
  z.point = s;
  z.xi_u = c.xi_u.value_or(Mat::Zero(d, k));
  if (z.xi_u.rows() != d || z.xi_u.cols() != k) fail("config.momentum.xi_u", "expected a d×k matrix");
  if (c.xi_x) {
    if (c.xi_x->size() != d) fail("config.momentum.xi_x", "expected " + std::to_string(d) + " entries");
    z.xi_x = *c.xi_x;
    return z;
  }
  if (c.velocity->size() != d) fail("config.momentum.velocity", "expected " + std::to_string(d) + " entries");
  // p = W⁻¹v is the horizontal part; ξ_x adds back the vertical contribution.
  const CometricBlocks B = cometric_blocks(M, s);
  const Vec xi_u_flat = Eigen::Map<const Vec>(z.xi_u.data(), d * k);
  z.xi_x = B.W.ldlt().solve(*c.velocity) + B.gamma_frame.transpose() * xi_u_flat;
  return z;
}

}  // namespace mppgeo::cli
