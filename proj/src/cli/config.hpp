#pragma once

#include <json.hpp>

#include <optional>
#include <set>
#include <string>
#include <vector>

#include "mppgeo/cli.hpp"
#include "mppgeo/estimators.hpp"
#include "mppgeo/landmarks.hpp"
#include "mppgeo/surfaces.hpp"

namespace mppgeo::cli {

using nlohmann::json;

/// Typed access to one JSON object; finish() rejects keys never asked for.
class ObjectReader {
 public:
  ObjectReader(const json& j, std::string path);

  bool has(const std::string& key) const;
  const json& raw(const std::string& key);
  double number(const std::string& key);
  double number(const std::string& key, double fallback);
  int integer(const std::string& key);
  int integer(const std::string& key, int fallback);
  std::uint64_t unsigned_integer(const std::string& key, std::uint64_t fallback);
  bool boolean(const std::string& key, bool fallback);
  std::string string(const std::string& key);
  std::string string(const std::string& key, const std::string& fallback);
  Vec vector(const std::string& key);
  /// Row-major nested arrays → matrix.
  Mat matrix(const std::string& key);
  std::vector<Vec> points(const std::string& key);
  ObjectReader object(const std::string& key);
  std::string child_path(const std::string& key) const { return path_ + "." + key; }
  void finish() const;

 private:
  const json& at(const std::string& key);

  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

struct ManifoldConfig {
  std::string type;
  SurfaceSpec surface;
  int dim = 2;
  int landmarks = 0;
  int ambient = 2;
  double sigma = 0.5;
};

/// Frame at x; with `orthonormal_basis` the given u is expressed in a
/// g-orthonormal basis at x and mapped to chart components.
struct FrameConfig {
  Vec x;
  Mat u;
  double lambda = 0.0;
  bool orthonormal_basis = false;
};

/// Initial momentum given either directly as ξ_x or through the initial
/// velocity v, in which case ξ_x = W⁻¹v + Γ_fᵀξ_u.
struct MomentumConfig {
  std::optional<Vec> xi_x;
  std::optional<Vec> velocity;
  std::optional<Mat> xi_u;
};

struct SweepConfig {
  enum class Kind { kRotation, kVertical } kind = Kind::kRotation;
  int count = 1;
  double from = 0.0;
  double to = 0.0;
  Mat direction;
};

struct LandmarkConfig {
  double sigma = 0.5;
  std::vector<Vec> source;
  std::vector<Vec> target;
  /// Per ambient axis, in the g-orthonormal basis.
  Vec frame_scale;
  double lambda = 0.0;
  int grid_lines = 15;
  double grid_padding = 0.5;
  bool compare_isotropic = true;
};

struct SampleConfig {
  int n = 20;
  Vec mean;
  Mat factor;
};

struct EstimateConfig {
  enum class Method { kFrechet, kMle } method = Method::kFrechet;
  std::vector<Vec> data;
  std::optional<SampleConfig> sample;
  /// Section frame for the Fréchet mean, applied at every x.
  Mat section_u;
  bool section_orthonormal = true;
  double section_lambda = 0.0;
  int k = 0;
  double lambda = 0.0;
  EstimatorOptions options;
};

struct ExperimentConfig {
  json source;
  std::string description;
  std::uint64_t seed = 0;
  IntegratorConfig integrator;
  std::optional<ManifoldConfig> manifold;
  std::optional<FrameConfig> frame;
  std::optional<MomentumConfig> momentum;
  std::optional<SweepConfig> sweep;
  std::optional<Vec> target;
  ShootingOptions shooting;
  std::optional<LandmarkConfig> landmarks;
  std::optional<EstimateConfig> estimate;
};

/// Parses and validates the config for `command`, applying overrides.
ExperimentConfig load_config(const std::string& command, const std::string& path, const Overrides& overrides);
ExperimentConfig parse_config(const std::string& command, const json& j, const Overrides& overrides);

ManifoldPtr build_manifold(const ManifoldConfig& c);
/// Chart frame for a FrameConfig, validated against the manifold.
FramePoint build_frame(const ChartManifold& M, const FrameConfig& c);
/// E with EᵀgE = I: the symmetric inverse square root of g at x.
Mat orthonormal_basis(const ChartManifold& M, const Vec& x);
CotangentState build_state(const ChartManifold& M, const FramePoint& s, const MomentumConfig& c);

}  // namespace mppgeo::cli
