#include "cablerender/geometry.hpp"

#include <Eigen/SVD>
#include <cmath>
#include <set>
#include <stdexcept>

#include "cablerender/errors.hpp"

namespace cablerender {

void TensionBounds::validate() const {
  if (!std::isfinite(t_min) || !std::isfinite(t_max) || t_min < 0.0 ||
      !(t_min < t_max)) {
    throw std::invalid_argument("tension bounds must satisfy 0 <= t_min < t_max");
  }
}

ModuleLayout::ModuleLayout(std::vector<ModuleAnchor> anchors, TensionBounds bounds)
    : anchors_(std::move(anchors)), bounds_(bounds) {
  if (anchors_.empty()) throw std::invalid_argument("layout needs at least one anchor");
  bounds_.validate();
  std::set<std::string> ids;
  for (const auto& a : anchors_) {
    if (!a.position.allFinite()) {
      throw std::invalid_argument("anchor '" + a.id + "' has a non-finite position");
    }
    if (!ids.insert(a.id).second) {
      throw std::invalid_argument("duplicate anchor id '" + a.id + "'");
    }
    if (a.bounds) a.bounds->validate();
  }
  for (std::size_t i = 0; i < anchors_.size(); ++i) {
    for (std::size_t j = i + 1; j < anchors_.size(); ++j) {
      if ((anchors_[i].position - anchors_[j].position).norm() <= kAnchorCoincidenceTol) {
        throw DegenerateGeometry("anchors '" + anchors_[i].id + "' and '" +
                                 anchors_[j].id + "' coincide");
      }
    }
  }
}

std::vector<TensionBounds> ModuleLayout::cable_bounds() const {
  std::vector<TensionBounds> out;
  out.reserve(anchors_.size());
  for (const auto& a : anchors_) out.push_back(a.bounds.value_or(bounds_));
  return out;
}

StructureMatrix::StructureMatrix(Eigen::Matrix3Xd columns) : columns_(std::move(columns)) {
  if (columns_.cols() == 0) throw std::invalid_argument("structure matrix has no columns");
  for (Eigen::Index i = 0; i < columns_.cols(); ++i) {
    if (!columns_.col(i).allFinite() || std::abs(columns_.col(i).norm() - 1.0) > 1e-12) {
      throw std::invalid_argument("structure matrix columns must be unit vectors");
    }
  }
}

Vec3 StructureMatrix::apply(const Eigen::VectorXd& tensions) const {
  if (tensions.size() != columns_.cols()) {
    throw std::invalid_argument("tension vector length does not match cable count");
  }
  return columns_ * tensions;
}

std::vector<Vec3> cable_directions(const ModuleLayout& layout, const Vec3& ee) {
  if (!ee.allFinite()) throw std::invalid_argument("end-effector position must be finite");
  std::vector<Vec3> dirs;
  dirs.reserve(layout.size());
  for (const auto& a : layout.anchors()) {
    const Vec3 d = a.position - ee;
    const double len = d.norm();
    if (len <= kEndEffectorDegenerateTol) {
      throw DegenerateGeometry("end effector coincides with anchor '" + a.id + "'");
    }
    dirs.push_back(d / len);
  }
  return dirs;
}

StructureMatrix structure_matrix(const ModuleLayout& layout, const Vec3& ee) {
  const auto dirs = cable_directions(layout, ee);
  Eigen::Matrix3Xd cols(3, static_cast<Eigen::Index>(dirs.size()));
  for (std::size_t i = 0; i < dirs.size(); ++i) cols.col(static_cast<Eigen::Index>(i)) = dirs[i];
  return StructureMatrix(std::move(cols));
}

int actuation_rank(const StructureMatrix& a) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a.matrix());
  const auto& s = svd.singularValues();
  if (s.size() == 0 || s(0) == 0.0) return 0;
  int rank = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    if (s(i) > kRankRelativeThreshold * s(0)) ++rank;
  }
  return rank;
}

}  // namespace cablerender
