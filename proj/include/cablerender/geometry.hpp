#pragma once

#include <Eigen/Core>
#include <optional>
#include <string>
#include <vector>

namespace cablerender {

using Vec3 = Eigen::Vector3d;

inline constexpr double kAnchorCoincidenceTol = 1e-9;   // m
inline constexpr double kEndEffectorDegenerateTol = 1e-6;  // m
inline constexpr double kRankRelativeThreshold = 1e-9;

/// Allowable cable tension interval in newtons. Cables only pull, and stay
/// taut above t_min.
struct TensionBounds {
  double t_min = 0.5;
  double t_max = 6.0;

  /// Throws std::invalid_argument unless 0 <= t_min < t_max (both finite).
  void validate() const;
  friend bool operator==(const TensionBounds&, const TensionBounds&) = default;
};

struct ModuleAnchor {
  std::string id;
  Vec3 position = Vec3::Zero();
  /// Per-module override of the layout-wide bounds.
  std::optional<TensionBounds> bounds;

  friend bool operator==(const ModuleAnchor&, const ModuleAnchor&) = default;
};

/// Ordered set of actuation modules. Construction validates: at least one
/// anchor, unique ids, finite positions, no two anchors within 1e-9 m.
class ModuleLayout {
 public:
  ModuleLayout(std::vector<ModuleAnchor> anchors, TensionBounds bounds = {});

  const std::vector<ModuleAnchor>& anchors() const { return anchors_; }
  const TensionBounds& bounds() const { return bounds_; }
  std::size_t size() const { return anchors_.size(); }

  /// Effective bounds of each cable, index-aligned with anchors().
  std::vector<TensionBounds> cable_bounds() const;

  friend bool operator==(const ModuleLayout&, const ModuleLayout&) = default;

 private:
  std::vector<ModuleAnchor> anchors_;
  TensionBounds bounds_;
};

/// 3 x m map from cable tensions to the net force on the end effector.
/// Column i is the unit vector from the end effector toward anchor i.
class StructureMatrix {
 public:
  /// Throws std::invalid_argument if any column is not unit norm within 1e-12.
  explicit StructureMatrix(Eigen::Matrix3Xd columns);

  const Eigen::Matrix3Xd& matrix() const { return columns_; }
  std::size_t cables() const { return static_cast<std::size_t>(columns_.cols()); }
  Vec3 column(std::size_t i) const { return columns_.col(static_cast<Eigen::Index>(i)); }

  /// Net force A·t.
  Vec3 apply(const Eigen::VectorXd& tensions) const;

 private:
  Eigen::Matrix3Xd columns_;
};

/// Unit vectors from ee toward each anchor. Throws DegenerateGeometry when ee
/// lies within 1e-6 m of an anchor.
std::vector<Vec3> cable_directions(const ModuleLayout& layout, const Vec3& ee);

StructureMatrix structure_matrix(const ModuleLayout& layout, const Vec3& ee);

/// Numerical rank with singular values below 1e-9 * sigma_max treated as zero.
int actuation_rank(const StructureMatrix& a);

}  // namespace cablerender
