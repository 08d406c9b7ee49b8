#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <future>
#include <ostream>
#include <random>
#include <thread>

#include "config.hpp"
#include "svg.hpp"

namespace mppgeo::cli {

namespace {

namespace fs = std::filesystem;

/// Integration ended early or produced no usable output.
class IntegrationFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Solver finished without meeting its tolerance; artifacts are written first.
class SolverFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------- output

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

json to_json(const Vec& v) {
  json a = json::array();
  for (int i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

json to_json(const Mat& m) {
  json a = json::array();
  for (int r = 0; r < m.rows(); ++r) a.push_back(to_json(Vec(m.row(r).transpose())));
  return a;
}

json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

void write_json(const fs::path& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

/// Columns: t, x_i, u_i_a (column-major), xi_x_i, xi_u_i_a (column-major), H.
void write_trajectory_csv(const fs::path& path, const Trajectory& tr, int d, int k) {
  std::ostringstream o;
  o << "t";
  for (int i = 0; i < d; ++i) o << ",x_" << i;
  for (int a = 0; a < k; ++a)
    for (int i = 0; i < d; ++i) o << ",u_" << i << '_' << a;
  for (int i = 0; i < d; ++i) o << ",xi_x_" << i;
  for (int a = 0; a < k; ++a)
    for (int i = 0; i < d; ++i) o << ",xi_u_" << i << '_' << a;
  o << ",H\n";
  for (std::size_t n = 0; n < tr.size(); ++n) {
    o << num(tr.t[n]);
    for (int i = 0; i < tr.z[n].size(); ++i) o << ',' << num(tr.z[n][i]);
    o << ',' << num(n < tr.hamiltonian.size() ? tr.hamiltonian[n] : std::nan("")) << '\n';
  }
  write_text(path, o.str());
}

/// Columns: t, x_i, v_i.
void write_geodesic_csv(const fs::path& path, const Trajectory& tr, int d) {
  std::ostringstream o;
  o << "t";
  for (int i = 0; i < d; ++i) o << ",x_" << i;
  for (int i = 0; i < d; ++i) o << ",v_" << i;
  o << '\n';
  for (std::size_t n = 0; n < tr.size(); ++n) {
    o << num(tr.t[n]);
    for (int i = 0; i < tr.z[n].size(); ++i) o << ',' << num(tr.z[n][i]);
    o << '\n';
  }
  write_text(path, o.str());
}

json integrator_json(const IntegratorConfig& c) {
  return {{"scheme", to_string(c.scheme)}, {"steps", c.steps}, {"t_end", c.t_end}};
}

json meta_header(const std::string& command, const ExperimentConfig& c) {
  return {{"command", command},
          {"description", c.description},
          {"seed", c.seed},
          {"integrator", integrator_json(c.integrator)},
          {"config", c.source}};
}

// ---------------------------------------------------------------- analysis

std::vector<Vec> base_points(const Trajectory& tr, int d) {
  std::vector<Vec> out;
  for (const Vec& z : tr.z) out.push_back(z.head(d));
  return out;
}

double sup_distance(const std::vector<Vec>& a, const std::vector<Vec>& b) {
  const std::size_t n = std::min(a.size(), b.size());
  double m = 0.0;
  for (std::size_t i = 0; i < n; ++i) m = std::max(m, (a[i] - b[i]).norm());
  return m;
}

/// Largest distance of s(t) from the chord t/T · s(T).
double straightness_defect(const std::vector<Vec>& s, const std::vector<double>& t) {
  if (s.size() < 2) return 0.0;
  const Vec end = s.back();
  const double T = t.back();
  double m = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) m = std::max(m, (s[i] - (t[i] / T) * end).norm());
  return m;
}

struct MppReport {
  Trajectory tr;
  int d = 0;
  int k = 0;
  double lambda = 0.0;
  double h_drift = 0.0;
  double h_relative_drift = 0.0;
  double horizontality = std::nan("");
  Trajectory geodesic;
  double geodesic_sup_distance = std::nan("");
  std::vector<Vec> antidev_mpp;
  std::vector<Vec> antidev_geodesic;
  std::string antidev_note;
};

/// Integrates from z0 and collects the diagnostics shared by mpp and sweep.
MppReport run_mpp(const ChartManifold& M, const CotangentState& z0, const IntegratorConfig& cfg) {
  MppReport r;
  r.d = z0.point.d();
  r.k = z0.point.k();
  r.lambda = z0.point.lambda;
  r.tr = integrate_mpp(M, z0, cfg);
  const double H0 = r.tr.hamiltonian.empty() ? 0.0 : r.tr.hamiltonian.front();
  for (double h : r.tr.hamiltonian) r.h_drift = std::max(r.h_drift, std::abs(h - H0));
  r.h_relative_drift = r.h_drift / std::max(std::abs(H0), 1e-300);
  if (!r.tr.ok() || r.tr.size() < 6) return r;

  r.horizontality = horizontality_residual(M, frame_path_from_mpp(M, r.tr, r.k, r.lambda));
  const Vec z_flat = z0.flatten();
  const Vec v0 = mpp_rhs(M, z_flat, r.k, r.lambda).head(r.d);
  r.geodesic = riemannian_geodesic(M, z0.point.x, v0, cfg);
  if (r.geodesic.ok()) r.geodesic_sup_distance = sup_distance(base_points(r.tr, r.d), base_points(r.geodesic, r.d));

  if (r.k != r.d) {
    r.antidev_note = "anti-development needs a full frame (k = d)";
    return r;
  }
  try {
    SampledPath path;
    for (std::size_t n = 0; n < r.tr.size(); ++n) {
      path.t.push_back(r.tr.t[n]);
      path.x.push_back(r.tr.z[n].head(r.d));
      path.v.push_back(mpp_rhs(M, r.tr.z[n], r.k, r.lambda).head(r.d));
    }
    r.antidev_mpp = antidevelop(M, z0.point.u, path);
    if (r.geodesic.ok()) {
      SampledPath g;
      for (std::size_t n = 0; n < r.geodesic.size(); ++n) {
        g.t.push_back(r.geodesic.t[n]);
        g.x.push_back(r.geodesic.z[n].head(r.d));
        g.v.push_back(r.geodesic.z[n].tail(r.d));
      }
      r.antidev_geodesic = antidevelop(M, z0.point.u, g);
    }
  } catch (const Error& e) {
    r.antidev_note = e.what();
  }
  return r;
}

json report_json(const MppReport& r) {
  json j{{"status", to_string(r.tr.status)},
         {"message", r.tr.message},
         {"samples", r.tr.size()},
         {"hamiltonian_initial", r.tr.hamiltonian.empty() ? json(nullptr) : json(r.tr.hamiltonian.front())},
         {"hamiltonian_drift", r.h_drift},
         {"hamiltonian_relative_drift", r.h_relative_drift},
         {"horizontality_residual", finite_or_null(r.horizontality)},
         {"geodesic_sup_distance", finite_or_null(r.geodesic_sup_distance)},
         {"diagnostics", r.tr.diagnostics}};
  if (!r.tr.ok()) j["exit_time"] = r.tr.exit_time;
  if (!r.tr.z.empty()) j["endpoint"] = to_json(Vec(r.tr.back().head(r.d)));
  if (!r.antidev_mpp.empty()) {
    j["antidevelopment_endpoint"] = to_json(r.antidev_mpp.back());
    j["antidevelopment_straightness_defect"] = straightness_defect(r.antidev_mpp, r.tr.t);
  }
  if (!r.antidev_geodesic.empty())
    j["geodesic_antidevelopment_straightness_defect"] = straightness_defect(r.antidev_geodesic, r.geodesic.t);
  if (!r.antidev_note.empty()) j["antidevelopment_note"] = r.antidev_note;
  return j;
}

// ---------------------------------------------------------------- plotting

std::vector<Point2> chart_curve(const std::vector<Vec>& xs, int i = 0, int j = 1) {
  std::vector<Point2> out;
  for (const Vec& x : xs) out.emplace_back(x[i], x.size() > j ? x[j] : 0.0);
  return out;
}

std::vector<Point2> time_curve(const std::vector<double>& t, const std::vector<Vec>& xs) {
  std::vector<Point2> out;
  for (std::size_t n = 0; n < xs.size(); ++n) out.emplace_back(t[n], xs[n][0]);
  return out;
}

std::vector<Point2> projected_curve(const ChartManifold& M, const std::vector<Vec>& xs) {
  std::vector<Point2> out;
  for (const Vec& x : xs) {
    const Vec X = M.embed(x);
    out.push_back(project(X[0], X[1], X[2]));
  }
  return out;
}

/// Embedded chart grid around the given paths.
void add_wireframe(Panel& p, const ChartManifold& M, const std::vector<std::vector<Vec>>& paths) {
  Vec lo = Vec::Constant(2, 1e300), hi = Vec::Constant(2, -1e300);
  for (const auto& path : paths)
    for (const Vec& x : path) {
      lo = lo.cwiseMin(x);
      hi = hi.cwiseMax(x);
    }
  if (!(lo[0] <= hi[0])) return;
  const Vec pad = ((hi - lo) * 0.3).cwiseMax(0.3);
  lo -= pad;
  hi += pad;
  const int lines = 9, samples = 40;
  const Style style{palette::kGrid, 0.6, false, 0.8};
  for (int axis = 0; axis < 2; ++axis)
    for (int l = 0; l < lines; ++l) {
      std::vector<Point2> pts;
      for (int s = 0; s <= samples; ++s) {
        Vec x(2);
        x[axis] = lo[axis] + (hi[axis] - lo[axis]) * l / (lines - 1);
        x[1 - axis] = lo[1 - axis] + (hi[1 - axis] - lo[1 - axis]) * s / samples;
        if (!M.in_domain(x)) continue;
        const Vec X = M.embed(x);
        pts.push_back(project(X[0], X[1], X[2]));
      }
      p.line(std::move(pts), style);
    }
}

struct Curve {
  std::vector<Vec> chart;
  std::vector<double> t;
  Style style;
  std::string label;
};

/// Chart panel, embedded panel when the manifold has one, landmark tracks
/// for landmark manifolds.
void add_path_panels(Figure& fig, const ChartManifold& M, const std::vector<Curve>& curves) {
  const auto* L = dynamic_cast<const LandmarkManifold*>(&M);
  Panel& chart = fig.add_panel(L ? "landmark trajectories" : "chart coordinates");
  for (const Curve& c : curves) {
    if (c.chart.empty()) continue;
    if (L && L->amb() >= 2) {
      for (int i = 0; i < L->landmarks(); ++i) chart.line(chart_curve(c.chart, i * L->amb(), i * L->amb() + 1), c.style);
    } else if (M.dim() == 1) {
      chart.line(time_curve(c.t, c.chart), c.style);
    } else {
      chart.line(chart_curve(c.chart), c.style);
    }
    if (!c.label.empty()) chart.legend.push_back({c.label, c.style.color});
  }
  if (M.ambient_dim() == 3 && M.dim() == 2) {
    Panel& emb = fig.add_panel("embedded (orthographic)");
    emb.axes = false;
    std::vector<std::vector<Vec>> paths;
    for (const Curve& c : curves) paths.push_back(c.chart);
    add_wireframe(emb, M, paths);
    for (const Curve& c : curves)
      if (!c.chart.empty()) emb.line(projected_curve(M, c.chart), c.style);
  }
}

void add_antidevelopment_panel(Figure& fig, const std::vector<std::pair<std::vector<Vec>, Style>>& curves,
                               const std::vector<LegendEntry>& legend) {
  Panel& p = fig.add_panel("anti-development in R^d");
  for (const auto& [s, style] : curves)
    if (!s.empty()) p.line(chart_curve(s), style);
  p.legend = legend;
}

fs::path prepare_out(const std::string& out_dir) {
  fs::path out(out_dir);
  std::error_code ec;
  fs::create_directories(out, ec);
  if (ec) throw ConfigError("cannot create output directory '" + out_dir + "': " + ec.message());
  return out;
}

template <typename Fn>
auto run_parallel(std::size_t n, Fn fn) {
  using R = decltype(fn(std::size_t{0}));
  std::vector<R> out;
  if (n < 2 || std::thread::hardware_concurrency() < 2) {
    for (std::size_t i = 0; i < n; ++i) out.push_back(fn(i));
    return out;
  }
  std::vector<std::future<R>> jobs;
  for (std::size_t i = 0; i < n; ++i) jobs.push_back(std::async(std::launch::async, fn, i));
  for (auto& j : jobs) out.push_back(j.get());
  return out;
}

// ---------------------------------------------------------------- commands

void cmd_mpp(const ExperimentConfig& c, const fs::path& out) {
  const ManifoldPtr M = build_manifold(*c.manifold);
  const FramePoint s = build_frame(*M, *c.frame);
  const CotangentState z0 = build_state(*M, s, *c.momentum);
  const MppReport r = run_mpp(*M, z0, c.integrator);

  write_trajectory_csv(out / "trajectory.csv", r.tr, r.d, r.k);
  json meta = meta_header("mpp", c);
  meta["manifold"] = M->name();
  meta["initial_state"] = {{"x", to_json(s.x)},         {"u", to_json(s.u)},
                           {"lambda", s.lambda},        {"xi_x", to_json(z0.xi_x)},
                           {"xi_u", to_json(z0.xi_u)}};
  meta["result"] = report_json(r);
  write_json(out / "meta.json", meta);

  Figure fig("Most probable path on " + M->name());
  const std::vector<Curve> curves{
      {base_points(r.tr, r.d), r.tr.t, {palette::kMpp, 2.0}, "MPP"},
      {base_points(r.geodesic, r.d), r.geodesic.t, {palette::kGeodesic, 1.5, true}, "Riemannian geodesic"}};
  add_path_panels(fig, *M, curves);
  if (!r.antidev_mpp.empty() && r.d >= 2)
    add_antidevelopment_panel(fig, {{r.antidev_mpp, {palette::kMpp, 2.0}}, {r.antidev_geodesic, {palette::kGeodesic, 1.5}}},
                              {{"MPP", palette::kMpp}, {"geodesic", palette::kGeodesic}});
  fig.save((out / "plot.svg").string());

  if (!r.tr.ok()) throw IntegrationFailure("integration stopped at t = " + num(r.tr.exit_time) + ": " + r.tr.message);
}

void cmd_sweep(const ExperimentConfig& c, const fs::path& out) {
  const ManifoldPtr M = build_manifold(*c.manifold);
  const FramePoint s0 = build_frame(*M, *c.frame);
  const SweepConfig& sw = *c.sweep;
  const int d = s0.d(), k = s0.k();
  if (sw.kind == SweepConfig::Kind::kRotation && d < 2) throw ConfigError("config.sweep: rotation needs d >= 2");
  if (sw.kind == SweepConfig::Kind::kVertical && (sw.direction.rows() != d || sw.direction.cols() != k))
    throw ConfigError("config.sweep.direction: expected a d×k matrix");

  std::vector<double> params(sw.count);
  for (int i = 0; i < sw.count; ++i)
    params[i] = sw.count == 1 ? sw.from : sw.from + (sw.to - sw.from) * i / (sw.count - 1);

  // Rotation acts on the frame in a g-orthonormal basis at x.
  const Mat E = orthonormal_basis(*M, s0.x);
  const Mat E_inv = E.inverse();
  auto member_state = [&](double param) {
    FramePoint s = s0;
    MomentumConfig m = *c.momentum;
    if (sw.kind == SweepConfig::Kind::kRotation) {
      Mat R = Mat::Identity(d, d);
      R(0, 0) = std::cos(param);
      R(0, 1) = -std::sin(param);
      R(1, 0) = std::sin(param);
      R(1, 1) = std::cos(param);
      s.u = E * R * E_inv * s0.u;
    } else {
      m.xi_u = m.xi_u.value_or(Mat::Zero(d, k)) + param * sw.direction;
    }
    return build_state(*M, s, m);
  };
  std::vector<CotangentState> states;
  for (double p : params) states.push_back(member_state(p));

  struct Member {
    MppReport report;
    std::string error;
  };
  const std::vector<Member> members = run_parallel(states.size(), [&](std::size_t i) {
    Member m;
    try {
      m.report = run_mpp(*M, states[i], c.integrator);
    } catch (const Error& e) {
      m.error = e.what();
    }
    return m;
  });

  json list = json::array();
  int failures = 0;
  std::vector<std::vector<Vec>> paths;
  for (std::size_t i = 0; i < members.size(); ++i) {
    const Member& m = members[i];
    char name[32];
    std::snprintf(name, sizeof name, "member_%03zu.csv", i);
    json entry{{"index", i}, {"parameter", params[i]}, {"file", name}};
    if (!m.error.empty()) {
      entry["status"] = "failure";
      entry["message"] = m.error;
      ++failures;
    } else {
      write_trajectory_csv(out / name, m.report.tr, d, k);
      entry["xi_x"] = to_json(states[i].xi_x);
      entry["xi_u"] = to_json(states[i].xi_u);
      entry["u"] = to_json(states[i].point.u);
      entry.update(report_json(m.report));
      if (!m.report.tr.ok()) ++failures;
      paths.push_back(base_points(m.report.tr, d));
    }
    list.push_back(entry);
  }
  double pairwise = 0.0;
  for (std::size_t a = 0; a < paths.size(); ++a)
    for (std::size_t b = a + 1; b < paths.size(); ++b) pairwise = std::max(pairwise, sup_distance(paths[a], paths[b]));

  json meta = meta_header("sweep", c);
  meta["manifold"] = M->name();
  meta["kind"] = sw.kind == SweepConfig::Kind::kRotation ? "rotation" : "vertical";
  meta["members"] = list;
  meta["failures"] = failures;
  meta["max_pairwise_sup_distance"] = pairwise;
  write_json(out / "meta.json", meta);

  Figure fig(std::string(sw.kind == SweepConfig::Kind::kRotation ? "Frame rotation" : "Vertical momentum") +
             " sweep on " + M->name());
  std::vector<Curve> curves;
  std::vector<std::pair<std::vector<Vec>, Style>> anti;
  for (std::size_t i = 0; i < members.size(); ++i) {
    if (!members[i].error.empty()) continue;
    const Style st{palette::family(i), 1.6};
    curves.push_back({base_points(members[i].report.tr, d), members[i].report.tr.t, st, "p = " + num(params[i]).substr(0, 6)});
    anti.push_back({members[i].report.antidev_mpp, st});
  }
  add_path_panels(fig, *M, curves);
  fig.save((out / "plot.svg").string());
  Figure afig("Anti-developments of the sweep");
  add_antidevelopment_panel(afig, anti, {});
  afig.save((out / "antidevelopment.svg").string());

  if (failures > 0) throw IntegrationFailure(std::to_string(failures) + " sweep member(s) failed");
}

json shooting_json(const ShootingResult& r) {
  json restarts = json::array();
  for (const RestartRecord& rec : r.restarts)
    restarts.push_back({{"residual", rec.residual},
                        {"energy", finite_or_null(rec.energy)},
                        {"converged", rec.converged},
                        {"iterations", rec.iterations},
                        {"xi0", to_json(rec.xi0)}});
  return {{"converged", r.converged},   {"residual", r.residual},           {"energy", r.energy},
          {"xi0", to_json(r.xi0)},      {"selected_restart", r.selected_restart}, {"restarts", restarts}};
}

void cmd_shoot(const ExperimentConfig& c, const fs::path& out) {
  const ManifoldPtr M = build_manifold(*c.manifold);
  const FramePoint s = build_frame(*M, *c.frame);
  const Vec& y = *c.target;
  if (y.size() != M->dim()) throw ConfigError("config.target: expected " + std::to_string(M->dim()) + " coordinates");
  if (!M->in_domain(y)) throw ConfigError("config.target: outside the chart domain");
  const int d = s.d(), k = s.k();

  const ShootingResult r = shoot_mpp(*M, {s, y}, c.shooting);
  const Vec v = riemannian_log(*M, s.x, y, c.shooting);
  const Trajectory geo = riemannian_geodesic(*M, s.x, v, c.integrator);

  write_trajectory_csv(out / "trajectory.csv", r.trajectory, d, k);
  write_geodesic_csv(out / "geodesic.csv", geo, d);
  json meta = meta_header("shoot", c);
  meta["manifold"] = M->name();
  meta["start"] = {{"x", to_json(s.x)}, {"u", to_json(s.u)}, {"lambda", s.lambda}};
  meta["target"] = to_json(y);
  meta["result"] = shooting_json(r);
  meta["geodesic"] = {{"initial_velocity", to_json(v)},
                      {"energy", v.dot(M->metric(s.x) * v)},
                      {"endpoint_error", geo.ok() ? json((geo.back().head(d) - y).norm()) : json(nullptr)}};
  meta["sup_distance_to_geodesic"] = geo.ok() ? json(sup_distance(base_points(r.trajectory, d), base_points(geo, d)))
                                              : json(nullptr);
  write_json(out / "meta.json", meta);

  Figure fig("Minimizing normal MPP between two points on " + M->name());
  add_path_panels(fig, *M,
                  {{base_points(r.trajectory, d), r.trajectory.t, {palette::kMpp, 2.0}, "MPP"},
                   {base_points(geo, d), geo.t, {palette::kGeodesic, 1.5, true}, "Riemannian geodesic"}});
  fig.panel(0).markers = {{chart_curve({s.x})[0], palette::kSource}, {chart_curve({y})[0], palette::kTarget}};
  fig.save((out / "plot.svg").string());

  if (!r.converged)
    throw SolverFailure("shooting did not converge: best residual " + num(r.residual) + " after " +
                        std::to_string(r.restarts.size()) + " start(s)");
}

Vec flatten_points(const std::vector<Vec>& pts) {
  const int amb = static_cast<int>(pts.front().size());
  Vec x(static_cast<Eigen::Index>(pts.size()) * amb);
  for (std::size_t i = 0; i < pts.size(); ++i) x.segment(static_cast<Eigen::Index>(i) * amb, amb) = pts[i];
  return x;
}

/// Advects points by the kernel-interpolated landmark velocity along tr.
std::vector<Vec> advect(const LandmarkManifold& L, const Trajectory& tr, int k, double lambda, std::vector<Vec> pts) {
  const int N = L.landmarks(), amb = L.amb(), d = L.dim();
  auto weights = [&](const Vec& z) {
    const Vec p = z.head(d);
    const Vec pdot = mpp_rhs(L, z, k, lambda).head(d);
    Mat K(N, N);
    for (int i = 0; i < N; ++i)
      for (int j = 0; j < N; ++j) K(i, j) = L.kernel(p.segment(i * amb, amb), p.segment(j * amb, amb));
    const Mat V = Eigen::Map<const Mat>(pdot.data(), amb, N).transpose();
    return std::pair<Vec, Mat>(p, K.ldlt().solve(V));
  };
  auto velocity = [&](const std::pair<Vec, Mat>& w, const Vec& y) {
    Vec v = Vec::Zero(amb);
    for (int i = 0; i < N; ++i) v += L.kernel(y, w.first.segment(i * amb, amb)) * w.second.row(i).transpose();
    return v;
  };
  auto w0 = weights(tr.z.front());
  for (std::size_t n = 0; n + 1 < tr.size(); ++n) {
    const double h = tr.t[n + 1] - tr.t[n];
    const auto w1 = weights(tr.z[n + 1]);
    for (Vec& y : pts) {
      const Vec k1 = velocity(w0, y);
      const Vec k2 = velocity(w1, y + h * k1);
      y += 0.5 * h * (k1 + k2);
    }
    w0 = w1;
  }
  return pts;
}

void cmd_landmarks(const ExperimentConfig& c, const fs::path& out) {
  const LandmarkConfig& lc = *c.landmarks;
  const int N = static_cast<int>(lc.source.size()), amb = static_cast<int>(lc.source.front().size());
  const LandmarkManifold L(N, amb, lc.sigma);
  const Vec x0 = flatten_points(lc.source), y = flatten_points(lc.target);
  try {
    L.check_distinct(x0);
    L.check_distinct(y);
  } catch (const SingularMetricError& e) {
    throw ConfigError(std::string("config.landmarks: ") + e.what());
  }
  const int d = L.dim();
  const Mat E = orthonormal_basis(L, x0);
  Vec scales(d);
  for (int i = 0; i < N; ++i) scales.segment(i * amb, amb) = lc.frame_scale;
  const FramePoint s{x0, E * scales.asDiagonal(), lc.lambda};
  const ShootingResult r = shoot_mpp(L, {s, y}, c.shooting);

  json meta = meta_header("landmarks", c);
  meta["manifold"] = "landmarks";
  meta["result"] = shooting_json(r);
  write_trajectory_csv(out / "trajectory.csv", r.trajectory, d, d);

  std::optional<ShootingResult> iso;
  if (lc.compare_isotropic) {
    iso = shoot_mpp(L, {{x0, E, 0.0}, y}, c.shooting);
    write_trajectory_csv(out / "isotropic.csv", iso->trajectory, d, d);
    meta["isotropic"] = shooting_json(*iso);
    meta["sup_distance_to_isotropic"] = sup_distance(base_points(r.trajectory, d), base_points(iso->trajectory, d));
  }

  Figure fig("Landmark matching");
  std::vector<Curve> curves{{base_points(r.trajectory, d), r.trajectory.t, {palette::kMpp, 2.0}, "anisotropic MPP"}};
  if (iso) curves.push_back({base_points(iso->trajectory, d), iso->trajectory.t, {palette::kGeodesic, 1.5, true}, "isotropic geodesic"});
  add_path_panels(fig, L, curves);
  auto add_landmark_markers = [&](Panel& p) {
    if (amb < 2) return;
    for (int i = 0; i < N; ++i) {
      p.markers.push_back({Point2(lc.source[i][0], lc.source[i][1]), palette::kSource});
      p.markers.push_back({Point2(lc.target[i][0], lc.target[i][1]), palette::kTarget});
    }
  };
  add_landmark_markers(fig.panel(0));

  if (amb == 2 && r.trajectory.ok()) {
    Panel& grid_panel = fig.add_panel("deformed grid at t = 1");
    Vec lo = x0.head(2), hi = x0.head(2);
    for (const auto* set : {&lc.source, &lc.target})
      for (const Vec& p : *set) {
        lo = lo.cwiseMin(p);
        hi = hi.cwiseMax(p);
      }
    lo.array() -= lc.grid_padding;
    hi.array() += lc.grid_padding;
    const int lines = lc.grid_lines, samples = 4 * lc.grid_lines;
    std::vector<Vec> pts;
    for (int axis = 0; axis < 2; ++axis)
      for (int l = 0; l < lines; ++l)
        for (int q = 0; q <= samples; ++q) {
          Vec p(2);
          p[axis] = lo[axis] + (hi[axis] - lo[axis]) * l / (lines - 1);
          p[1 - axis] = lo[1 - axis] + (hi[1 - axis] - lo[1 - axis]) * q / samples;
          pts.push_back(p);
        }
    const std::vector<Vec> moved = advect(L, r.trajectory, d, lc.lambda, pts);
    std::ostringstream csv;
    csv << "line,x0,y0,x1,y1\n";
    double displacement = 0.0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      csv << i / (samples + 1) << ',' << num(pts[i][0]) << ',' << num(pts[i][1]) << ',' << num(moved[i][0]) << ','
          << num(moved[i][1]) << '\n';
      displacement = std::max(displacement, (moved[i] - pts[i]).norm());
    }
    write_text(out / "grid.csv", csv.str());
    meta["grid_max_displacement"] = displacement;
    for (int l = 0; l < 2 * lines; ++l) {
      std::vector<Point2> line;
      for (int q = 0; q <= samples; ++q) {
        const Vec& p = moved[static_cast<std::size_t>(l * (samples + 1) + q)];
        line.emplace_back(p[0], p[1]);
      }
      grid_panel.line(std::move(line), {palette::kGrid, 0.8});
    }
    for (int i = 0; i < N; ++i) grid_panel.line(chart_curve(base_points(r.trajectory, d), 2 * i, 2 * i + 1), {palette::kMpp, 1.5});
    add_landmark_markers(grid_panel);
  }
  write_json(out / "meta.json", meta);
  fig.save((out / "plot.svg").string());

  if (!r.converged) throw SolverFailure("landmark matching did not converge: residual " + num(r.residual));
}

std::vector<Vec> estimate_data(const ExperimentConfig& c, int d) {
  const EstimateConfig& e = *c.estimate;
  std::vector<Vec> data = e.data;
  if (e.sample) {
    std::mt19937_64 rng(c.seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    for (int i = 0; i < e.sample->n; ++i) {
      Vec z(e.sample->factor.cols());
      for (int j = 0; j < z.size(); ++j) z[j] = normal(rng);
      data.push_back(e.sample->mean + e.sample->factor * z);
    }
  }
  for (std::size_t i = 0; i < data.size(); ++i)
    if (data[i].size() != d)
      throw ConfigError("config.estimate: data point " + std::to_string(i) + " has the wrong dimension");
  return data;
}

void write_objective_log(const fs::path& path, const std::vector<ObjectiveLogEntry>& log) {
  std::ostringstream o;
  o << "iteration,objective,simplex_size\n";
  for (const ObjectiveLogEntry& e : log) o << e.iteration << ',' << num(e.objective) << ',' << num(e.simplex_size) << '\n';
  write_text(path, o.str());
}

void cmd_estimate(const ExperimentConfig& c, const fs::path& out) {
  const ManifoldPtr M = build_manifold(*c.manifold);
  const EstimateConfig& e = *c.estimate;
  const int d = M->dim();
  const std::vector<Vec> data = estimate_data(c, d);
  for (std::size_t i = 0; i < data.size(); ++i)
    if (!M->in_domain(data[i])) throw ConfigError("config.estimate: data point " + std::to_string(i) + " outside the chart domain");
  {
    std::ostringstream o;
    o << "index";
    for (int i = 0; i < d; ++i) o << ",x_" << i;
    o << '\n';
    for (std::size_t n = 0; n < data.size(); ++n) {
      o << n;
      for (int i = 0; i < d; ++i) o << ',' << num(data[n][i]);
      o << '\n';
    }
    write_text(out / "data.csv", o.str());
  }
  Vec mean = Vec::Zero(d);
  for (const Vec& y : data) mean += y;
  mean /= static_cast<double>(data.size());

  json meta = meta_header("estimate", c);
  meta["manifold"] = M->name();
  meta["data_count"] = data.size();
  meta["coordinate_mean"] = to_json(mean);
  Figure fig("Estimate on " + M->name());
  Panel& panel = fig.add_panel("data and estimate");
  for (const Vec& y : data) panel.markers.push_back({chart_curve({y})[0], palette::kData, 2.5});

  bool converged = false;
  std::vector<ObjectiveLogEntry> log;
  std::string failure;
  try {
    if (e.method == EstimateConfig::Method::kFrechet) {
      const Mat U = e.section_u.size() ? e.section_u : Mat::Identity(d, d);
      if (U.rows() != d || U.cols() > d) throw ConfigError("config.estimate.section.u: expected a d×k matrix");
      const Section section = [&](const Vec& x) {
        return FramePoint{x, e.section_orthonormal ? Mat(orthonormal_basis(*M, x) * U) : U, e.section_lambda};
      };
      const FrechetResult r = frechet_mean_fm(*M, data, section, e.options);
      converged = r.converged;
      log = r.log;
      meta["method"] = "frechet";
      meta["result"] = {{"x", to_json(r.x)},
                        {"objective", r.objective},
                        {"distances", r.distances},
                        {"converged", r.converged},
                        {"iterations", r.log.size()}};
      panel.markers.push_back({chart_curve({r.x})[0], palette::kMpp, 5.0});
    } else {
      const int k = e.k > 0 ? e.k : d;
      const MleResult r = mle_mean_covariance(*M, data, k, e.lambda, e.options);
      converged = r.converged;
      log = r.log;
      meta["method"] = "mle";
      meta["result"] = {{"x", to_json(r.x)},
                        {"u", to_json(r.u)},
                        {"u_ut", to_json(Mat(r.u * r.u.transpose()))},
                        {"lambda", r.lambda},
                        {"objective", r.objective},
                        {"distances", r.distances},
                        {"converged", r.converged},
                        {"iterations", r.log.size()}};
      meta["calibration"] = "flat chart, k = d: u u^T = 2 x sample covariance (1/N normalization)";
      panel.markers.push_back({chart_curve({r.x})[0], palette::kMpp, 5.0});
      if (d == 2) {
        // Frame image of the unit circle, scaled back to one standard deviation.
        std::vector<Point2> ellipse;
        for (int q = 0; q <= 96; ++q) {
          const double a = 2 * M_PI * q / 96;
          Vec w = Vec::Zero(k);
          w[0] = std::cos(a);
          if (k > 1) w[1] = std::sin(a);
          const Vec p = r.x + r.u * w / std::sqrt(2.0);
          ellipse.emplace_back(p[0], p[1]);
        }
        panel.line(std::move(ellipse), {palette::kMpp, 1.5});
        for (int a = 0; a < k; ++a) {
          const Vec tip = r.x + r.u.col(a) / std::sqrt(2.0);
          panel.line({chart_curve({r.x})[0], chart_curve({tip})[0]}, {palette::kGeodesic, 2.0});
        }
      }
    }
  } catch (const ShootingFailure& ex) {
    failure = ex.what();
    meta["failure"] = {{"kind", "shooting"}, {"index", ex.index()}, {"message", failure}};
  } catch (const CovarianceCollapse& ex) {
    failure = ex.what();
    meta["failure"] = {{"kind", "covariance_collapse"}, {"message", failure}};
  }
  write_objective_log(out / "objective_log.csv", log);
  write_json(out / "meta.json", meta);
  fig.save((out / "plot.svg").string());
  if (!failure.empty()) throw SolverFailure(failure);
  if (!converged) throw SolverFailure("Nelder–Mead stopped before reaching the simplex tolerance");
}

int report(std::ostream& err, int code, const std::string& kind, const std::string& message) {
  err << json{{"error", kind}, {"code", code}, {"message", message}}.dump() << '\n';
  return code;
}

}  // namespace

int run(const std::string& command, const std::string& config_path, const std::string& out_dir,
        const Overrides& overrides, std::ostream& err) {
  try {
    const ExperimentConfig c = load_config(command, config_path, overrides);
    const fs::path out = prepare_out(out_dir);
    if (command == "mpp") cmd_mpp(c, out);
    else if (command == "sweep") cmd_sweep(c, out);
    else if (command == "shoot") cmd_shoot(c, out);
    else if (command == "landmarks") cmd_landmarks(c, out);
    else cmd_estimate(c, out);
    return kOk;
  } catch (const ConfigError& e) {
    return report(err, kConfigError, "config", e.what());
  } catch (const SolverFailure& e) {
    return report(err, kSolverError, "solver", e.what());
  } catch (const ShootingFailure& e) {
    return report(err, kSolverError, "solver", e.what());
  } catch (const CovarianceCollapse& e) {
    return report(err, kSolverError, "solver", e.what());
  } catch (const IntegrationFailure& e) {
    return report(err, kIntegrationError, "integration", e.what());
  } catch (const ChartDomainError& e) {
    return report(err, kIntegrationError, "integration", e.what());
  } catch (const DegenerateFrameError& e) {
    return report(err, kConfigError, "config", e.what());
  } catch (const InvalidArgument& e) {
    return report(err, kConfigError, "config", e.what());
  } catch (const std::exception& e) {
    return report(err, kIntegrationError, "integration", e.what());
  }
}

}  // namespace mppgeo::cli
