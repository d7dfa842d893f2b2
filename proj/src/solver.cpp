#include "cablerender/solver.hpp"

#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <vector>

namespace cablerender {

void SolverConfig::validate() const {
  if (max_iterations < 1) throw std::invalid_argument("max_iterations must be >= 1");
  if (!(tolerance > 0.0) || !std::isfinite(tolerance)) {
    throw std::invalid_argument("tolerance must be positive");
  }
}

std::string_view to_string(SolveStatus s) noexcept {
  switch (s) {
    case SolveStatus::FeasibleExact: return "FeasibleExact";
    case SolveStatus::NearestFeasible: return "NearestFeasible";
    case SolveStatus::IterationCap: return "IterationCap";
  }
  return "Unknown";
}

namespace {

// (A·Aᵀ)⁺ via the SVD of A: U·S⁻²·Uᵀ over the retained singular values.
Eigen::Matrix3d gram_pseudoinverse(const Eigen::Matrix3Xd& a) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeFullU);
  const auto& s = svd.singularValues();
  Eigen::Matrix3d m = Eigen::Matrix3d::Zero();
  if (s.size() == 0 || s(0) == 0.0) return m;
  const double cutoff = kRankRelativeThreshold * s(0);
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    if (s(i) > cutoff) {
      const Eigen::Vector3d u = svd.matrixU().col(i);
      m += (u * u.transpose()) / (s(i) * s(i));
    }
  }
  return m;
}

// Projection onto the equilibrium subspace with A stored row-wise for the
// kernels.
class EquilibriumProjector {
 public:
  EquilibriumProjector(const simd::KernelTable& k, const StructureMatrix& a, const Vec3& f)
      : k_(k), m_(a.cables()), f_(f), gram_pinv_(gram_pseudoinverse(a.matrix())) {
    for (int r = 0; r < 3; ++r) {
      rows_[r].resize(m_);
      for (std::size_t i = 0; i < m_; ++i) {
        rows_[r][i] = a.matrix()(r, static_cast<Eigen::Index>(i));
      }
    }
  }

  Vec3 force(const double* t) const {
    return {k_.dot(rows_[0].data(), t, m_), k_.dot(rows_[1].data(), t, m_),
            k_.dot(rows_[2].data(), t, m_)};
  }

  void project(const double* t, double* out) const {
    const Vec3 lambda = gram_pinv_ * (force(t) - f_);
    k_.sub_combination3(t, rows_[0].data(), rows_[1].data(), rows_[2].data(),
                        lambda.x(), lambda.y(), lambda.z(), out, m_);
  }

 private:
  const simd::KernelTable& k_;
  std::size_t m_;
  Vec3 f_;
  Eigen::Matrix3d gram_pinv_;
  std::vector<double> rows_[3];
};

constexpr double kSeparationGapFactor = 100.0;
constexpr int kPolishInterval = 32;
constexpr double kStallRelativeEps = 1e-13;

// With the box iterate y stalled, each further sweep adds (x - y) to the box
// correction. The stall is permanent when that increment pushes every clamped
// cable deeper into its bound and leaves free cables unchanged. y is then the
// box point nearest the equilibrium subspace: x - y lies in the normal cone of
// the box at y and is normal to the subspace.
bool stall_is_permanent(std::span<const double> x, std::span<const double> y,
                        std::span<const double> lo, std::span<const double> hi,
                        double tol) {
  double gap = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) gap = std::max(gap, std::abs(x[i] - y[i]));
  // Near-zero gap means the sets touch and the iterates are still closing in.
  if (gap <= kSeparationGapFactor * tol) return false;
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double step = x[i] - y[i];
    if (y[i] <= lo[i]) {
      if (step > tol) return false;
    } else if (y[i] >= hi[i]) {
      if (step < -tol) return false;
    } else if (std::abs(step) > tol) {
      return false;
    }
  }
  return true;
}

// Number of upcoming sweeps guaranteed to leave the box iterate unchanged,
// given a sweep that just left it unchanged. While y is frozen the equilibrium
// iterate x is frozen too, so each such sweep only adds (x - y) to the
// correction of the clamped cables. Free cables may wobble by a few ulps
// (eps). The count is conservative by one sweep and is 0 when nothing
// would ever release (that case is left to the separation test).
long stalled_sweeps(std::span<const double> x, std::span<const double> y,
                    std::span<const double> corr, std::span<const double> lo,
                    std::span<const double> hi, double eps) {
  double sweeps = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double step = x[i] - y[i];
    const double z = x[i] + corr[i];
    if (y[i] <= lo[i]) {
      if (step > 0.0) sweeps = std::min(sweeps, std::floor((lo[i] - z) / step));
    } else if (y[i] >= hi[i]) {
      if (step < 0.0) sweeps = std::min(sweeps, std::floor((hi[i] - z) / step));
    } else if (std::abs(step) > eps) {
      return 0;
    }
  }
  if (!std::isfinite(sweeps) || sweeps < 1.0) return 0;
  return static_cast<long>(std::min(sweeps, 1e15));
}

// Active-set finish. Reads which cables sit on a bound in the current box
// iterate, solves the reduced least-distance problem for the free cables
// exactly, and accepts the result only if it is feasible and satisfies the
// KKT sign conditions of min ||t - start||^2 over box ∩ {A·t = f}. Dykstra
// approaches the projection linearly, and the rate degrades badly when the
// equilibrium subspace runs nearly parallel to an active face.
//
// Only attempted with >= 3 free cables of full row rank, where the multiplier
// of the equality constraint is unique.
std::optional<std::vector<double>> polish(const Eigen::Matrix3Xd& a, const Vec3& f,
                                          std::span<const double> start,
                                          std::span<const double> y,
                                          std::span<const double> lo,
                                          std::span<const double> hi, double tol) {
  const std::size_t m = y.size();
  std::vector<Eigen::Index> free_idx;
  Vec3 rhs = f;
  for (std::size_t i = 0; i < m; ++i) {
    const auto col = static_cast<Eigen::Index>(i);
    if (y[i] <= lo[i] || y[i] >= hi[i]) {
      rhs -= a.col(col) * y[i];
    } else {
      free_idx.push_back(col);
    }
  }
  if (free_idx.size() < 3) return std::nullopt;

  const auto k = static_cast<Eigen::Index>(free_idx.size());
  Eigen::Matrix3Xd af(3, k);
  Eigen::VectorXd sf(k);
  for (Eigen::Index j = 0; j < k; ++j) {
    af.col(j) = a.col(free_idx[static_cast<std::size_t>(j)]);
    sf(j) = start[static_cast<std::size_t>(free_idx[static_cast<std::size_t>(j)])];
  }
  Eigen::JacobiSVD<Eigen::Matrix3Xd> svd(af);
  const auto& sv = svd.singularValues();
  if (!(sv(2) > kRankRelativeThreshold * sv(0))) return std::nullopt;

  const Eigen::Matrix3d gram = af * af.transpose();
  const Vec3 lambda = gram.ldlt().solve(af * sf - rhs);
  const Eigen::VectorXd tf = sf - af.transpose() * lambda;

  std::vector<double> t(y.begin(), y.end());
  for (Eigen::Index j = 0; j < k; ++j) {
    const auto i = static_cast<std::size_t>(free_idx[static_cast<std::size_t>(j)]);
    if (tf(j) < lo[i] || tf(j) > hi[i]) return std::nullopt;
    t[i] = tf(j);
  }
  const Eigen::Map<const Eigen::VectorXd> tv(t.data(), static_cast<Eigen::Index>(m));
  if ((a * tv - f).norm() > tol) return std::nullopt;
  for (std::size_t i = 0; i < m; ++i) {
    const auto col = static_cast<Eigen::Index>(i);
    // Stationarity: t - start + Aᵀλ = μ_lo - μ_hi with μ >= 0.
    const double g = t[i] - start[i] + a.col(col).dot(lambda);
    if (y[i] <= lo[i] && g < -tol) return std::nullopt;
    if (y[i] >= hi[i] && g > tol) return std::nullopt;
  }
  return t;
}

void split_bounds(std::span<const TensionBounds> bounds, std::vector<double>& lo,
                  std::vector<double>& hi) {
  lo.resize(bounds.size());
  hi.resize(bounds.size());
  for (std::size_t i = 0; i < bounds.size(); ++i) {
    bounds[i].validate();
    lo[i] = bounds[i].t_min;
    hi[i] = bounds[i].t_max;
  }
}

}  // namespace

TensionVector project_box(const TensionVector& t, const TensionBounds& bounds) {
  const std::vector<TensionBounds> per_cable(static_cast<std::size_t>(t.size()), bounds);
  return project_box(t, per_cable);
}

TensionVector project_box(const TensionVector& t, std::span<const TensionBounds> bounds) {
  if (static_cast<std::size_t>(t.size()) != bounds.size()) {
    throw std::invalid_argument("bounds count does not match tension vector length");
  }
  std::vector<double> lo, hi;
  split_bounds(bounds, lo, hi);
  TensionVector out(t.size());
  simd::active_kernels().clamp(t.data(), lo.data(), hi.data(), out.data(), bounds.size());
  return out;
}

TensionVector project_equilibrium(const TensionVector& t, const StructureMatrix& a,
                                  const Vec3& f) {
  if (static_cast<std::size_t>(t.size()) != a.cables()) {
    throw std::invalid_argument("tension vector length does not match cable count");
  }
  EquilibriumProjector proj(simd::active_kernels(), a, f);
  TensionVector out(t.size());
  proj.project(t.data(), out.data());
  return out;
}

Eigen::MatrixXd null_space_basis(const StructureMatrix& a) {
  const Eigen::Index m = a.matrix().cols();
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a.matrix(), Eigen::ComputeFullV);
  const int rank = actuation_rank(a);
  return svd.matrixV().rightCols(m - rank);
}

SolveResult solve_with(const simd::KernelTable& k, const StructureMatrix& a, const Vec3& f,
                       std::span<const TensionBounds> cable_bounds,
                       const SolverConfig& config) {
  config.validate();
  if (!f.allFinite()) throw std::invalid_argument("desired force must be finite");
  const std::size_t m = a.cables();
  if (cable_bounds.size() != m) {
    throw std::invalid_argument("bounds count does not match cable count");
  }
  std::vector<double> lo, hi;
  split_bounds(cable_bounds, lo, hi);

  // y: box iterate, x: equilibrium iterate, corr: Dykstra correction for the
  // box. The affine set needs no correction since its correction term is
  // always normal to it.
  std::vector<double> y(m), x(m), corr(m, 0.0);
  if (const auto* custom = std::get_if<CustomStart>(&config.start_mode)) {
    if (static_cast<std::size_t>(custom->tensions.size()) != m ||
        !custom->tensions.allFinite()) {
      throw std::invalid_argument("custom start must be finite with one entry per cable");
    }
    for (std::size_t i = 0; i < m; ++i) y[i] = custom->tensions(static_cast<Eigen::Index>(i));
  } else {
    y = lo;
  }
  const std::vector<double> start = y;
  std::vector<signed char> active(m, 0), prev_active(m, 2);

  const EquilibriumProjector proj(k, a, f);
  const double tol = config.tolerance;
  const double stall_eps =
      kStallRelativeEps * std::max(1.0, *std::max_element(hi.begin(), hi.end()));
  double residual = std::numeric_limits<double>::infinity();
  bool converged = false;
  bool separated = false;
  int it = 0;
  while (it < config.max_iterations) {
    ++it;
    proj.project(y.data(), x.data());
    const double disp = k.box_correction_step(x.data(), corr.data(), y.data(), lo.data(),
                                              hi.data(), m);
    const double prev = residual;
    residual = (proj.force(y.data()) - f).norm();
    if (it % kPolishInterval == 0 && residual > tol) {
      for (std::size_t i = 0; i < m; ++i) {
        active[i] = y[i] <= lo[i] ? -1 : (y[i] >= hi[i] ? 1 : 0);
      }
      if (active == prev_active) {
        if (auto exact = polish(a.matrix(), f, start, y, lo, hi, tol)) {
          y = std::move(*exact);
          converged = true;
          break;
        }
      }
      prev_active = active;
    }
    if (disp > tol) continue;
    if (residual <= tol) {
      converged = true;
      break;
    }
    // A flat residual alone is not evidence of infeasibility: Dykstra's box
    // iterate can sit still for many sweeps while the correction builds up.
    if (std::abs(residual - prev) <= tol / 10.0 && stall_is_permanent(x, y, lo, hi, tol)) {
      converged = true;
      separated = true;
      break;
    }
    if (disp <= stall_eps) {
      const long skip = stalled_sweeps(x, y, corr, lo, hi, stall_eps);
      if (skip > 0) {
        const double n = static_cast<double>(skip);
        for (std::size_t i = 0; i < m; ++i) {
          if (y[i] <= lo[i] || y[i] >= hi[i]) corr[i] += n * (x[i] - y[i]);
        }
      }
    }
  }

  SolveResult out;
  out.tensions = Eigen::Map<const TensionVector>(y.data(), static_cast<Eigen::Index>(m));
  out.rendered_force = a.matrix() * out.tensions;
  out.force_residual = (out.rendered_force - f).norm();
  out.iterations = it;
  if (out.force_residual <= tol) {
    out.status = SolveStatus::FeasibleExact;
  } else if (converged && separated) {
    out.status = SolveStatus::NearestFeasible;
  } else {
    out.status = SolveStatus::IterationCap;
  }
  return out;
}

SolveResult solve(const StructureMatrix& a, const Vec3& f,
                  std::span<const TensionBounds> cable_bounds, const SolverConfig& config) {
  return solve_with(simd::active_kernels(), a, f, cable_bounds, config);
}

SolveResult solve(const StructureMatrix& a, const Vec3& f, const TensionBounds& bounds,
                  const SolverConfig& config) {
  const std::vector<TensionBounds> per_cable(a.cables(), bounds);
  return solve(a, f, per_cable, config);
}

bool is_wrench_feasible(const StructureMatrix& a, const Vec3& f,
                        std::span<const TensionBounds> cable_bounds) {
  return solve(a, f, cable_bounds).force_residual <= kWrenchFeasibleResidual;
}

bool is_wrench_feasible(const StructureMatrix& a, const Vec3& f, const TensionBounds& bounds) {
  const std::vector<TensionBounds> per_cable(a.cables(), bounds);
  return is_wrench_feasible(a, f, per_cable);
}

}  // namespace cablerender
