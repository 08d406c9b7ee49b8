#pragma once

// Frame bundle states, the anisotropic cometric on T*F^kM and the Hamiltonian
// flow of normal most probable paths.
//
// Index conventions: frame vector γ has components u(h, γ); the frame-frame
// Christoffel contraction Γ^{hγ}_j = Γ^h_ji u^i_γ is stored as a dk×d matrix
// with row h + d·γ, matching the column-major flattening of u and ξ_u.

#include <vector>

#include "mppgeo/geometry.hpp"

namespace mppgeo {

/// Base point x with a rank-k frame u (columns are frame vectors) and the
/// isotropic weight λ of the low-rank cometric.
struct FramePoint {
  static constexpr double kDefaultRankTolerance = 1e-12;

  Vec x;
  Mat u;
  double lambda = 0.0;

  int d() const { return static_cast<int>(x.size()); }
  int k() const { return static_cast<int>(u.cols()); }
  /// Throws DegenerateFrameError or InvalidArgument when the invariants fail.
  void validate(double rank_tolerance = kDefaultRankTolerance) const;
};

double smallest_singular_value(const Mat& u);

/// Offsets into the flat state [x | u | ξ_x | ξ_u], u and ξ_u column-major.
struct StateLayout {
  int d;
  int k;

  int size() const { return 2 * (d + d * k); }
  int x() const { return 0; }
  int u() const { return d; }
  int xi_x() const { return d + d * k; }
  int xi_u() const { return 2 * d + d * k; }
};

struct CotangentState {
  FramePoint point;
  Vec xi_x;
  Mat xi_u;

  StateLayout layout() const { return {point.d(), point.k()}; }
  Vec flatten() const;
  static CotangentState unflatten(const Vec& z, int d, int k, double lambda);
  /// Momentum vector [ξ_x | ξ_u column-major].
  Vec momentum() const;
};

struct CometricBlocks {
  Mat W;
  Mat Gxx;
  Mat Gxu;
  Mat Gux;
  Mat Guu;
  /// dk×d, row h + d·γ: Γ^{hγ}_j
  Mat gamma_frame;

  /// (d + dk)² block matrix [[Gxx, Gxu], [Gux, Guu]].
  Mat assembled() const;
};

Mat frame_christoffel(const GeometryJet& J, const Mat& u);

/// Dispatches to the full-rank blocks when k = d and λ = 0.
CometricBlocks cometric_blocks(const ChartManifold& M, const FramePoint& s);
CometricBlocks cometric_blocks_full_rank(const GeometryJet& J, const Mat& u);
CometricBlocks cometric_blocks_low_rank(const GeometryJet& J, const Mat& u, double lambda);

/// H = ½ ξᵀ G ξ over the assembled blocks.
double hamiltonian(const ChartManifold& M, const CotangentState& z);
double hamiltonian(const ChartManifold& M, const Vec& z, int k, double lambda);

/// Horizontal part p_j = ξ_j − Γ^{hγ}_j ξ_hγ of the covector.
Vec horizontal_covector(const GeometryJet& J, const Vec& z, int k);

/// Hamiltonian vector field of the normal MPP equations. The full-rank form
/// drops the λ terms; the low-rank form carries ½λ ∂_l g^ij p_i p_j.
Vec mpp_rhs(const ChartManifold& M, const Vec& z, int k, double lambda);
Vec mpp_rhs_full_rank(const GeometryJet& J, const Vec& z, int k);
Vec mpp_rhs_low_rank(const GeometryJet& J, const Vec& z, int k, double lambda);

struct MppOptions {
  /// Use the low-rank equations even when k = d and λ = 0.
  bool force_low_rank = false;
  double rank_tolerance = FramePoint::kDefaultRankTolerance;
};

/// Integrates the MPP flow from z0, recording H at every sample and adding a
/// diagnostic the first time the frame becomes degenerate.
Trajectory integrate_mpp(const ChartManifold& M, const CotangentState& z0, const IntegratorConfig& cfg,
                         const MppOptions& opts = {});

VectorField mpp_field(const ChartManifold& M, int k, double lambda, bool force_low_rank = false);

/// Sampled path in the frame bundle with explicit velocities. Repeated times
/// mark velocity kinks.
struct FramePath {
  std::vector<double> t;
  std::vector<Vec> x;
  std::vector<Vec> xdot;
  std::vector<Mat> u;
  /// May be empty; then estimated from the samples.
  std::vector<Mat> udot;

  std::size_t size() const { return t.size(); }
  SampledPath base_path() const;
};

/// Samples of the base path, the frame and their velocities from an MPP run.
FramePath frame_path_from_mpp(const ChartManifold& M, const Trajectory& tr, int k, double lambda);

/// Piecewise-linear driver s_t in R^d through the knots, s_0 = 0.
struct PiecewiseLinearPath {
  std::vector<double> t;
  std::vector<Vec> s;

  void validate(int d) const;
};

/// Development ẋ = u ṡ, u̇ = −Γ(ẋ) u with `steps_per_segment` RK4 steps per
/// driver segment. Knots appear twice, once per adjacent segment.
FramePath develop(const ChartManifold& M, const FramePoint& u0, const PiecewiseLinearPath& s,
                  int steps_per_segment = 50);

/// Anti-development ṡ = u_t⁻¹ ẋ_t with u_t the parallel transport of u0.
/// Returns s at every sample of the path.
std::vector<Vec> antidevelop(const ChartManifold& M, const Mat& u0, SampledPath path, int substeps = 4);

/// max_t ‖u̇ + Γ(ẋ)u‖_F.
double horizontality_residual(const ChartManifold& M, const FramePath& path);

/// Trapezoidal ∫ W_ij ẋ^i ẋ^j dt with W = u uᵀ + λ g⁻¹. Throws InvalidArgument
/// when the path is not horizontal to `tolerance`.
double sub_riemannian_energy(const ChartManifold& M, const FramePath& path, double lambda,
                             double horizontality_tolerance = 1e-4);

/// Frame-coordinate covariant acceleration u⁻¹∇_ẋ ẋ along an MPP with k = d
/// and λ = 0, evaluated two ways.
struct CovariantAcceleration {
  std::vector<double> t;
  /// d/dt of the frame coordinates uᵀp by five-point differencing.
  std::vector<Vec> from_frame_coordinates;
  /// Curvature contraction ξ_hγ [R(u_α, ẋ)u_γ]^h.
  std::vector<Vec> from_curvature;
};

CovariantAcceleration covariant_acceleration(const ChartManifold& M, const Trajectory& tr, int k, double lambda);

}  // namespace mppgeo
