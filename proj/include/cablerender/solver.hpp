#pragma once

// Bounded cable-tension distribution.
//
// Given a structure matrix A (3 x m) and a desired force f, find tensions t
// with A·t = f and t_min <= t <= t_max. The feasible set is the intersection
// of the tension box with the equilibrium affine subspace {t : A·t = f}.
// solve() runs Dykstra's alternating projections between the two sets, which
// converges to the Euclidean projection of the start point onto the
// intersection. Starting from t_min on every cable therefore yields the
// minimum-tension solution. When the intersection is empty the box iterates
// settle on the box point nearest to the equilibrium subspace.

#include <Eigen/Core>
#include <span>
#include <string_view>
#include <variant>

#include "cablerender/geometry.hpp"
#include "cablerender/simd/kernels.hpp"

namespace cablerender {

using TensionVector = Eigen::VectorXd;

inline constexpr double kWrenchFeasibleResidual = 1e-7;  // N

struct MinTensionStart {};
struct CustomStart {
  TensionVector tensions;
};
using StartMode = std::variant<MinTensionStart, CustomStart>;

struct SolverConfig {
  int max_iterations = 2000;
  /// Newtons. Applied to the per-sweep displacement and to the equilibrium
  /// residual.
  double tolerance = 1e-8;
  StartMode start_mode = MinTensionStart{};

  void validate() const;
};

enum class SolveStatus { FeasibleExact, NearestFeasible, IterationCap };

std::string_view to_string(SolveStatus s) noexcept;

struct SolveResult {
  TensionVector tensions;
  Vec3 rendered_force = Vec3::Zero();
  double force_residual = 0.0;  // ||A·t - f||
  SolveStatus status = SolveStatus::IterationCap;
  /// Loop passes. A stretch of stalled sweeps skipped in one step counts once.
  int iterations = 0;
};

TensionVector project_box(const TensionVector& t, const TensionBounds& bounds);
TensionVector project_box(const TensionVector& t, std::span<const TensionBounds> bounds);

/// Orthogonal projection onto {t : A·t = f'}, f' being f projected onto
/// range(A). Rank-deficient A is handled through the pseudoinverse of A·Aᵀ.
TensionVector project_equilibrium(const TensionVector& t, const StructureMatrix& a,
                                  const Vec3& f);

/// Orthonormal basis of null(A), one basis vector per column (m x (m - rank)).
Eigen::MatrixXd null_space_basis(const StructureMatrix& a);

SolveResult solve(const StructureMatrix& a, const Vec3& f, const TensionBounds& bounds,
                  const SolverConfig& config = {});
SolveResult solve(const StructureMatrix& a, const Vec3& f,
                  std::span<const TensionBounds> cable_bounds,
                  const SolverConfig& config = {});

/// Same as solve() but pinned to a specific kernel table.
SolveResult solve_with(const simd::KernelTable& kernels, const StructureMatrix& a,
                       const Vec3& f, std::span<const TensionBounds> cable_bounds,
                       const SolverConfig& config = {});

/// True iff some box-feasible t renders f within 1e-7 N.
bool is_wrench_feasible(const StructureMatrix& a, const Vec3& f,
                        const TensionBounds& bounds);
bool is_wrench_feasible(const StructureMatrix& a, const Vec3& f,
                        std::span<const TensionBounds> cable_bounds);

}  // namespace cablerender
