#include <doctest.h>

#include <cstring>
#include <random>

#include "cablerender/simulation.hpp"
#include "cablerender/solver.hpp"
#include "oracles/qp_oracle.hpp"
#include "test_support.hpp"

using namespace cablerender;
using testing_support::identity_layout;
using testing_support::layout_from;

namespace {

constexpr double kLo = 0.5;
constexpr double kHi = 6.0;

Eigen::VectorXd filled(Eigen::Index m, double v) { return Eigen::VectorXd::Constant(m, v); }

StructureMatrix identity_a() { return structure_matrix(identity_layout(), Vec3::Zero()); }

StructureMatrix bench_a() {
  const auto bench = default_bench_layout();
  return structure_matrix(bench.layout, bench.end_effector);
}

void check_in_box(const Eigen::VectorXd& t, double lo = kLo, double hi = kHi) {
  for (Eigen::Index i = 0; i < t.size(); ++i) {
    CHECK(t(i) >= lo - 1e-12);
    CHECK(t(i) <= hi + 1e-12);
  }
}

Eigen::VectorXd oracle_solution(const StructureMatrix& a, const Vec3& f, const Eigen::VectorXd& start) {
  const auto m = static_cast<Eigen::Index>(a.cables());
  const auto t = oracle::min_distance_qp(a.matrix(), f, start, filled(m, kLo), filled(m, kHi));
  REQUIRE(t.has_value());
  return *t;
}

}  // namespace

TEST_CASE("project_box examples") {
  Eigen::VectorXd t(3);
  t << -0.2, 3.0, 7.5;
  Eigen::VectorXd expect(3);
  expect << 0.5, 3.0, 6.0;
  CHECK(project_box(t, TensionBounds{}) == expect);

  Eigen::VectorXd inside(2);
  inside << 1.0, 1.0;
  CHECK(project_box(inside, TensionBounds{}) == inside);
  Eigen::VectorXd edge(2);
  edge << 6.0, 0.5;
  CHECK(project_box(edge, TensionBounds{}) == edge);

  const std::vector<TensionBounds> per{{0.5, 6.0}, {1.0, 2.0}, {0.0, 10.0}};
  CHECK(project_box(t, per) == Eigen::Vector3d(0.5, 2.0, 7.5));
  CHECK_THROWS_AS(project_box(inside, per), std::invalid_argument);
}

TEST_CASE("project_box is idempotent") {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-10.0, 10.0);
  for (int trial = 0; trial < 100; ++trial) {
    Eigen::VectorXd t(7);
    for (auto& v : t) v = u(rng);
    const auto once = project_box(t, TensionBounds{});
    CHECK(project_box(once, TensionBounds{}) == once);
    check_in_box(once);
  }
}

TEST_CASE("project_equilibrium examples") {
  CHECK(project_equilibrium(Eigen::Vector3d(4, -2, 9), identity_a(), Vec3(1, 1, 1))
            .isApprox(Eigen::Vector3d(1, 1, 1)));

  Eigen::Matrix3Xd single(3, 1);
  single << 1, 0, 0;
  Eigen::VectorXd t(1);
  t << 5.0;
  CHECK(std::abs(project_equilibrium(t, StructureMatrix(single), Vec3(2, 0, 0))(0) - 2.0) < 1e-14);

  const auto a = bench_a();
  const Vec3 f(0, 1.5, 0);
  const Eigen::VectorXd start = filled(4, kLo);
  const Eigen::VectorXd p = project_equilibrium(start, a, f);
  CHECK((a.apply(p) - f).norm() <= 1e-12);
  const Eigen::MatrixXd null = null_space_basis(a);
  REQUIRE(null.cols() == 1);
  CHECK(std::abs(null.col(0).dot(p - start)) <= 1e-12);
  CHECK((p - oracle::affine_projection_kkt(a.matrix(), f, start)).lpNorm<Eigen::Infinity>() <= 1e-12);
}

TEST_CASE("project_equilibrium matches the KKT oracle on random layouts") {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(-4.0, 8.0);
  for (int trial = 0; trial < 200; ++trial) {
    const int m = 3 + trial % 6;
    const auto a = structure_matrix(testing_support::random_sphere_layout(rng, m), Vec3::Zero());
    Eigen::VectorXd t(m);
    for (auto& v : t) v = u(rng);
    const Vec3 f(u(rng), u(rng), u(rng));
    const auto p = project_equilibrium(t, a, f);
    const auto q = oracle::affine_projection_kkt(a.matrix(), f, t);
    CHECK((p - q).lpNorm<Eigen::Infinity>() <= 1e-10);
  }
}

TEST_CASE("project_equilibrium on a rank-deficient matrix lands on the least-squares set") {
  const auto a = structure_matrix(layout_from({Vec3(1, 0, 0), Vec3(-1, 0, 0)}), Vec3::Zero());
  const Eigen::Vector2d t(3.0, 1.0);
  const Eigen::VectorXd p = project_equilibrium(t, a, Vec3(1.0, 2.0, 0.0));
  // Only the x component is reachable; the y request is dropped.
  CHECK(std::abs(a.apply(p).x() - 1.0) <= 1e-12);
  CHECK(std::abs((p - t).sum()) <= 1e-12);
}

TEST_CASE("null_space_basis examples") {
  CHECK(null_space_basis(identity_a()).cols() == 0);

  const auto pair = structure_matrix(layout_from({Vec3(1, 0, 0), Vec3(-1, 0, 0)}), Vec3::Zero());
  const Eigen::MatrixXd n = null_space_basis(pair);
  REQUIRE(n.cols() == 1);
  CHECK(std::abs(std::abs(n(0, 0)) - std::sqrt(0.5)) <= 1e-12);
  CHECK(std::abs(n(0, 0) - n(1, 0)) <= 1e-12);

  CHECK(null_space_basis(bench_a()).cols() == 1);

  std::mt19937_64 rng(3);
  for (int m = 3; m <= 10; ++m) {
    const auto a = structure_matrix(testing_support::random_sphere_layout(rng, m), Vec3::Zero());
    const Eigen::MatrixXd b = null_space_basis(a);
    CHECK(b.cols() == m - 3);
    CHECK((a.matrix() * b).norm() <= 1e-12);
    CHECK((b.transpose() * b - Eigen::MatrixXd::Identity(b.cols(), b.cols())).norm() <= 1e-12);
  }
}

TEST_CASE("solve examples") {
  const auto id = identity_a();
  const SolveResult inside = solve(id, Vec3(1, 1, 1), TensionBounds{});
  CHECK(inside.status == SolveStatus::FeasibleExact);
  CHECK((inside.tensions - filled(3, 1.0)).lpNorm<Eigen::Infinity>() <= 1e-9);

  const SolveResult away = solve(id, Vec3(-1, 0, 0), TensionBounds{});
  CHECK(away.status == SolveStatus::NearestFeasible);
  CHECK((away.tensions - filled(3, 0.5)).lpNorm<Eigen::Infinity>() <= 1e-12);
  CHECK((away.rendered_force - Vec3(0.5, 0.5, 0.5)).norm() <= 1e-12);
  CHECK(std::abs(away.force_residual - std::sqrt(1.5 * 1.5 + 0.5)) <= 1e-12);

  const auto a = bench_a();
  for (const Vec3& f : {Vec3(0, 1.5, 0), Vec3(0, 0, 1.5)}) {
    CAPTURE(f.transpose());
    const SolveResult r = solve(a, f, TensionBounds{});
    CHECK(r.status == SolveStatus::FeasibleExact);
    CHECK((r.tensions - oracle_solution(a, f, filled(4, kLo))).lpNorm<Eigen::Infinity>() <= 1e-6);
    check_in_box(r.tensions);
  }
}

TEST_CASE("is_wrench_feasible examples") {
  const auto id = identity_a();
  CHECK(is_wrench_feasible(id, Vec3(1, 1, 1), TensionBounds{}));
  CHECK_FALSE(is_wrench_feasible(id, Vec3(-1, 0, 0), TensionBounds{}));
  CHECK_FALSE(is_wrench_feasible(id, Vec3(10, 0.5, 0.5), TensionBounds{}));
}

TEST_CASE("solver config validation") {
  SolverConfig c;
  c.max_iterations = 0;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c = {};
  c.tolerance = 0.0;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c = {};
  c.start_mode = CustomStart{filled(2, 1.0)};
  CHECK_THROWS_AS(solve(identity_a(), Vec3(1, 1, 1), TensionBounds{}, c), std::invalid_argument);
  c.start_mode = CustomStart{Eigen::Vector3d(1.0, NAN, 1.0)};
  CHECK_THROWS_AS(solve(identity_a(), Vec3(1, 1, 1), TensionBounds{}, c), std::invalid_argument);
}

TEST_CASE("iteration cap is reported and the result stays in the box") {
  const auto a = bench_a();
  SolverConfig c;
  c.max_iterations = 1;
  const SolveResult r = solve(a, Vec3(0.3, 1.2, 0.4), TensionBounds{}, c);
  CHECK(r.iterations == 1);
  CHECK(r.status != SolveStatus::NearestFeasible);
  check_in_box(r.tensions);
}

TEST_CASE("oracle equivalence on random feasible instances") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> interior(0.6, 5.9);
  double worst = 0.0;
  for (int trial = 0; trial < 300; ++trial) {
    const int m = 3 + trial % 6;
    const auto a = structure_matrix(testing_support::random_sphere_layout(rng, m), Vec3::Zero());
    Eigen::VectorXd star(m);
    for (auto& v : star) v = interior(rng);
    const Vec3 f = a.apply(star);
    const SolveResult r = solve(a, f, TensionBounds{});
    CHECK(r.status == SolveStatus::FeasibleExact);
    CHECK(r.force_residual <= 1e-7);
    const auto o = oracle_solution(a, f, filled(m, kLo));
    worst = std::max(worst, (r.tensions - o).lpNorm<Eigen::Infinity>());
    check_in_box(r.tensions);
  }
  CHECK(worst <= 1e-5);
}

TEST_CASE("per-cable bounds are honoured") {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    const int m = 4 + trial % 4;
    const auto a = structure_matrix(testing_support::random_sphere_layout(rng, m), Vec3::Zero());
    std::vector<TensionBounds> bounds;
    Eigen::VectorXd lo(m), hi(m), star(m);
    for (int i = 0; i < m; ++i) {
      lo(i) = 0.2 + u(rng);
      hi(i) = lo(i) + 0.5 + 4.0 * u(rng);
      star(i) = lo(i) + (hi(i) - lo(i)) * (0.05 + 0.9 * u(rng));
      bounds.push_back({lo(i), hi(i)});
    }
    const Vec3 f = a.apply(star);
    const SolveResult r = solve(a, f, bounds);
    CHECK(r.status == SolveStatus::FeasibleExact);
    for (int i = 0; i < m; ++i) {
      CHECK(r.tensions(i) >= lo(i) - 1e-12);
      CHECK(r.tensions(i) <= hi(i) + 1e-12);
    }
    const auto o = oracle::min_distance_qp(a.matrix(), f, lo, lo, hi);
    REQUIRE(o.has_value());
    CHECK((r.tensions - *o).lpNorm<Eigen::Infinity>() <= 1e-5);
  }
}

TEST_CASE("custom start returns the projection of that start") {
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> interior(0.6, 5.9);
  for (int trial = 0; trial < 60; ++trial) {
    const int m = 4 + trial % 3;
    const auto a = structure_matrix(testing_support::random_sphere_layout(rng, m), Vec3::Zero());
    Eigen::VectorXd star(m), start(m);
    for (auto& v : star) v = interior(rng);
    for (auto& v : start) v = interior(rng);
    SolverConfig c;
    c.start_mode = CustomStart{start};
    const SolveResult r = solve(a, a.apply(star), TensionBounds{}, c);
    CHECK(r.status == SolveStatus::FeasibleExact);
    CHECK((r.tensions - oracle_solution(a, a.apply(star), start)).lpNorm<Eigen::Infinity>() <= 1e-5);
  }
}

TEST_CASE("minimum-tension start beats every other feasible point") {
  std::mt19937_64 rng(14);
  std::uniform_real_distribution<double> interior(0.8, 5.5);
  std::normal_distribution<double> g;
  for (int trial = 0; trial < 20; ++trial) {
    const int m = 4 + trial % 5;
    const auto a = structure_matrix(testing_support::random_sphere_layout(rng, m), Vec3::Zero());
    Eigen::VectorXd star(m);
    for (auto& v : star) v = interior(rng);
    const Vec3 f = a.apply(star);
    const SolveResult r = solve(a, f, TensionBounds{});
    REQUIRE(r.status == SolveStatus::FeasibleExact);
    const Eigen::VectorXd floor = filled(m, kLo);
    const double best = (r.tensions - floor).norm();
    const Eigen::MatrixXd null = null_space_basis(a);
    int checked = 0;
    while (checked < 100) {
      Eigen::VectorXd coeffs(null.cols());
      for (auto& c : coeffs) c = g(rng);
      const Eigen::VectorXd candidate = star + null * coeffs * 0.5;
      if (candidate.minCoeff() < kLo || candidate.maxCoeff() > kHi) continue;
      ++checked;
      CHECK(best <= (candidate - floor).norm() + 1e-9);
    }
  }
}

TEST_CASE("nearest-feasible contract on the identity layout") {
  const auto a = identity_a();
  std::mt19937_64 rng(15);
  std::uniform_real_distribution<double> box(kLo, kHi);
  for (const Vec3& f : {Vec3(-1, 0, 0), Vec3(-2, 3, -1), Vec3(9, 9, 9), Vec3(0, 0, -0.1)}) {
    const SolveResult r = solve(a, f, TensionBounds{});
    CHECK(r.status == SolveStatus::NearestFeasible);
    check_in_box(r.tensions);
    const auto ls = oracle::box_least_squares(a.matrix(), f, filled(3, kLo), filled(3, kHi));
    CHECK(std::abs(r.force_residual - (a.apply(ls) - f).norm()) <= 1e-9);
    for (int i = 0; i < 1000; ++i) {
      const Eigen::Vector3d t(box(rng), box(rng), box(rng));
      CHECK(r.force_residual <= (a.apply(t) - f).norm() + 1e-9);
    }
  }
}

TEST_CASE("infeasible requests stay in the box and settle on a nearest point") {
  std::mt19937_64 rng(16);
  std::normal_distribution<double> g;
  for (int trial = 0; trial < 150; ++trial) {
    const int m = 3 + trial % 6;
    const auto a = structure_matrix(testing_support::random_sphere_layout(rng, m), Vec3::Zero());
    const Vec3 f = Vec3(g(rng), g(rng), g(rng)) * 40.0;
    const SolveResult r = solve(a, f, TensionBounds{});
    CHECK(r.status != SolveStatus::IterationCap);
    check_in_box(r.tensions);
    CHECK(std::abs((a.apply(r.tensions) - f).norm() - r.force_residual) <= 1e-12);
  }
}

TEST_CASE("well-distributed layouts render every small force") {
  std::vector<std::vector<Vec3>> layouts = {
      {Vec3(1, 1, 1), Vec3(1, -1, -1), Vec3(-1, 1, -1), Vec3(-1, -1, 1)},
      {Vec3(1, 0, 0), Vec3(-1, 0, 0), Vec3(0, 1, 0), Vec3(0, -1, 0), Vec3(0, 0, 1), Vec3(0, 0, -1)},
  };
  std::vector<Vec3> cube;
  for (int i = 0; i < 8; ++i) cube.emplace_back(i & 1 ? 1 : -1, i & 2 ? 1 : -1, i & 4 ? 1 : -1);
  layouts.push_back(cube);

  std::mt19937_64 rng(17);
  const auto directions = sphere_samples(182, 0.1);
  for (const auto& points : layouts) {
    for (int rot = 0; rot < 3; ++rot) {
      const Eigen::Matrix3d r = rot == 0 ? Eigen::Matrix3d::Identity() : testing_support::random_rotation(rng);
      std::vector<Vec3> rotated;
      for (const auto& p : points) rotated.push_back(r * p);
      const auto a = structure_matrix(layout_from(rotated), Vec3::Zero());
      int ok = 0;
      for (const auto& f : directions) ok += is_wrench_feasible(a, f, TensionBounds{});
      CHECK(ok == 182);
    }
  }

  const auto a = bench_a();
  int ok = 0;
  for (const auto& f : directions) ok += is_wrench_feasible(a, f, TensionBounds{});
  CHECK(ok == 182);
}

TEST_CASE("identical inputs give bitwise-identical results") {
  std::mt19937_64 rng(18);
  std::uniform_real_distribution<double> interior(0.6, 5.9);
  for (int trial = 0; trial < 30; ++trial) {
    const int m = 3 + trial % 6;
    const auto a = structure_matrix(testing_support::random_sphere_layout(rng, m), Vec3::Zero());
    Eigen::VectorXd star(m);
    for (auto& v : star) v = interior(rng);
    const Vec3 f = a.apply(star) * (trial % 2 ? 1.0 : 3.0);
    const SolveResult r1 = solve(a, f, TensionBounds{});
    const SolveResult r2 = solve(a, f, TensionBounds{});
    CHECK(std::memcmp(r1.tensions.data(), r2.tensions.data(), sizeof(double) * m) == 0);
    CHECK(std::memcmp(r1.rendered_force.data(), r2.rendered_force.data(), sizeof(double) * 3) == 0);
    CHECK(std::memcmp(&r1.force_residual, &r2.force_residual, sizeof(double)) == 0);
    CHECK(r1.status == r2.status);
    CHECK(r1.iterations == r2.iterations);
  }
}

TEST_CASE("single cable layout") {
  const auto a = structure_matrix(layout_from({Vec3(0, 0, 1)}), Vec3::Zero());
  const SolveResult pull = solve(a, Vec3(0, 0, 2), TensionBounds{});
  CHECK(pull.status == SolveStatus::FeasibleExact);
  CHECK(std::abs(pull.tensions(0) - 2.0) <= 1e-9);

  const SolveResult push = solve(a, Vec3(0, 0, -2), TensionBounds{});
  CHECK(push.status == SolveStatus::NearestFeasible);
  CHECK(push.tensions(0) == 0.5);
}
