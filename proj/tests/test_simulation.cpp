#include <doctest.h>

#include <cmath>
#include <cstring>
#include <numbers>
#include <random>

#include "cablerender/errors.hpp"
#include "cablerender/simulation.hpp"
#include "test_support.hpp"

using namespace cablerender;

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

std::array<Vec3, 3> basis(double r) { return {r * Vec3::UnitX(), r * Vec3::UnitY(), r * Vec3::UnitZ()}; }

bool same_bits(const Vec3& a, const Vec3& b) { return std::memcmp(a.data(), b.data(), 3 * sizeof(double)) == 0; }

}  // namespace

TEST_CASE("sphere_samples examples") {
  const auto one = sphere_samples(1, 1.5);
  REQUIRE(one.size() == 1);
  CHECK(std::abs(one[0].norm() - 1.5) <= 1e-12);

  const auto two = sphere_samples(2, 1.0);
  REQUIRE(two.size() == 2);
  for (const auto& p : two) CHECK(std::abs(p.norm() - 1.0) <= 1e-12);
  CHECK(two[0].dot(two[1]) < 0.0);

  const auto many = sphere_samples(182, 1.5);
  REQUIRE(many.size() == 182);
  Vec3 mean = Vec3::Zero();
  for (const auto& p : many) {
    CHECK(std::abs(p.norm() - 1.5) <= 1e-12);
    mean += p;
  }
  mean /= 182.0;
  CHECK(mean.norm() < 0.05 * 1.5);

  CHECK_THROWS_AS(sphere_samples(0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(sphere_samples(5, 0.0), std::invalid_argument);
}

TEST_CASE("sphere_samples is deterministic") {
  const auto a = sphere_samples(182, 1.5);
  const auto b = sphere_samples(182, 1.5);
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(same_bits(a[i], b[i]));
}

TEST_CASE("sphere_samples cover both hemispheres evenly") {
  const auto pts = sphere_samples(1000, 1.0);
  int upper = 0;
  for (const auto& p : pts) upper += p.z() > 0.0;
  CHECK(upper == 500);
}

TEST_CASE("canonical directions") {
  const auto dirs = canonical_directions();
  for (std::size_t i = 0; i < dirs.size(); ++i) {
    CHECK(std::abs(dirs[i].norm() - 1.0) <= 1e-15);
    for (std::size_t j = i + 1; j < dirs.size(); ++j) CHECK((dirs[i] - dirs[j]).norm() > 0.1);
  }
}

TEST_CASE("angle_error examples") {
  CHECK(angle_error(Vec3(1, 0, 0), Vec3(0, 1, 0)) == doctest::Approx(90.0).epsilon(1e-14));
  CHECK(angle_error(Vec3(1, 0, 0), Vec3(2, 0, 0)) == doctest::Approx(0.0));
  CHECK(angle_error(Vec3(1, 0, 0), Vec3(-1, 0, 0)) == doctest::Approx(180.0).epsilon(1e-14));
  CHECK(angle_error(Vec3(1, 1e-9, 0), Vec3(1, 0, 0)) == doctest::Approx(1e-9 / kDeg).epsilon(1e-6));
  CHECK_THROWS_AS(angle_error(Vec3::Zero(), Vec3(1, 0, 0)), ZeroVector);
  CHECK_THROWS_AS(angle_error(Vec3(1, 0, 0), Vec3(1e-13, 0, 0)), ZeroVector);
}

TEST_CASE("magnitude_error examples") {
  CHECK(magnitude_error(Vec3(1.84, 0, 0), Vec3(0, 1.5, 0)) == doctest::Approx(0.34).epsilon(1e-12));
  CHECK(magnitude_error(Vec3(1, 2, 3), Vec3(1, 2, 3)) == 0.0);
  CHECK(magnitude_error(Vec3(3, 4, 0), Vec3(0, 0, 5)) == 0.0);
}

TEST_CASE("align_z_rotation recovers synthetic rotations") {
  const auto d = basis(1.5);
  CHECK(std::abs(align_z_rotation(d, d)) <= 1e-15);

  std::array<Vec3, 3> m;
  for (std::size_t i = 0; i < 3; ++i) m[i] = rotation_z(-30.0 * kDeg) * d[i];
  CHECK(std::abs(align_z_rotation(d, m) - 30.0 * kDeg) <= 1e-9);

  for (double deg = -180.0; deg < 180.0; deg += 7.5) {
    for (std::size_t i = 0; i < 3; ++i) m[i] = rotation_z(-deg * kDeg) * d[i];
    const double got = align_z_rotation(d, m);
    const double diff = std::remainder(got - deg * kDeg, 2.0 * std::numbers::pi);
    CHECK(std::abs(diff) <= 1e-9);
  }
}

TEST_CASE("align_z_rotation under sensor noise") {
  std::mt19937_64 rng(31);
  std::normal_distribution<double> noise(0.0, 0.01);
  const auto d = basis(1.5);
  int within = 0;
  for (int trial = 0; trial < 100; ++trial) {
    std::array<Vec3, 3> m;
    for (std::size_t i = 0; i < 3; ++i) {
      m[i] = rotation_z(-30.0 * kDeg) * d[i] + Vec3(noise(rng), noise(rng), noise(rng));
    }
    within += std::abs(align_z_rotation(d, m) - 30.0 * kDeg) <= 1.0 * kDeg;
  }
  CHECK(within >= 95);
}

TEST_CASE("align_z_rotation rejects bases with no planar content") {
  const std::array<Vec3, 3> vertical{Vec3::UnitZ(), Vec3::UnitZ() * 2.0, Vec3::UnitZ()};
  CHECK_THROWS_AS(align_z_rotation(vertical, vertical), DegenerateInput);
  const std::array<Vec3, 3> bad{Vec3(NAN, 0, 0), Vec3::UnitY(), Vec3::UnitZ()};
  CHECK_THROWS_AS(align_z_rotation(bad, bad), DegenerateInput);
}

TEST_CASE("default bench layout") {
  const auto bench = default_bench_layout();
  REQUIRE(bench.layout.size() == 4);
  CHECK(actuation_rank(structure_matrix(bench.layout, bench.end_effector)) == 3);
  const auto& an = bench.layout.anchors();
  const double d01 = (an[0].position - an[1].position).norm();
  const double d12 = (an[1].position - an[2].position).norm();
  const double d20 = (an[2].position - an[0].position).norm();
  CHECK(std::abs(d01 - d12) <= 1e-12);
  CHECK(std::abs(d12 - d20) <= 1e-12);
  CHECK((an[3].position - bench.end_effector - Vec3(0, 0, 2.0)).norm() <= 1e-12);
  // The end effector sits above the centroid of the triangle.
  const Vec3 centroid = (an[0].position + an[1].position + an[2].position) / 3.0;
  CHECK((bench.end_effector - centroid - Vec3(0, 0, 0.3)).norm() <= 1e-12);
}

TEST_CASE("ideal plant replicates the bench sweep") {
  const auto bench = default_bench_layout();
  const auto report = run_validation(bench.layout, bench.end_effector, {}, IdealPlant{});
  REQUIRE(report.records.size() == 182);
  CHECK(report.aggregates.fraction_within_45deg == 1.0);
  CHECK(report.aggregates.feasible_count > 0);
  CHECK(report.aggregates.mean_angle_error_feasible <= 0.5);
  CHECK(report.aggregates.mean_magnitude_error_feasible <= 0.01);
  CHECK(report.frame_correction == 0.0);
  for (const auto& r : report.records) {
    CHECK(r.angle_error >= 0.0);
    CHECK(r.angle_error <= 180.0);
    CHECK(r.magnitude_error >= 0.0);
    if (r.feasible) {
      CHECK(r.angle_error <= 0.5);
      CHECK(r.magnitude_error <= 0.01);
    }
  }
}

TEST_CASE("a single overhead module renders its own direction exactly") {
  const auto layout = testing_support::layout_from({Vec3(0, 0, 2)});
  const auto a = structure_matrix(layout, Vec3::Zero());
  const SolveResult r = solve(a, Vec3(0, 0, 1.5), TensionBounds{});
  CHECK(r.status == SolveStatus::FeasibleExact);
  CHECK((r.rendered_force - Vec3(0, 0, 1.5)).norm() <= 1e-9);
  CHECK(angle_error(Vec3(0, 0, 1.5), r.rendered_force) <= 1e-6);

  const auto report = run_validation(layout, Vec3::Zero(), {}, IdealPlant{});
  CHECK(report.aggregates.fraction_within_45deg < 1.0);
  for (const auto& rec : report.records) {
    if (rec.feasible) CHECK(rec.angle_error <= 0.5);
  }
}

TEST_CASE("noisy plant smoke run") {
  const auto bench = default_bench_layout();
  ValidationProtocol p;
  p.samples_per_hold = 50;
  const NoisyPlant plant{0.3, 5.0 * kDeg, 0.1, 42};
  const auto report = run_validation(bench.layout, bench.end_effector, p, plant);
  const auto& g = report.aggregates;
  CHECK(g.mean_angle_error > 0.0);
  CHECK(std::isfinite(g.mean_angle_error));
  CHECK(std::isfinite(g.max_angle_error));
  CHECK(std::isfinite(g.mean_measured_magnitude));
  CHECK(std::isfinite(g.mean_magnitude_error));
  CHECK(g.fraction_within_45deg >= 0.0);
  CHECK(g.fraction_within_45deg <= 1.0);
  // The basis pass should undo most of the injected sensor rotation.
  CHECK(std::abs(report.frame_correction + 5.0 * kDeg) <= 2.0 * kDeg);
}

TEST_CASE("report aggregates are recomputable from records") {
  const auto bench = default_bench_layout();
  ValidationProtocol p;
  p.samples_per_hold = 20;
  for (const PlantModel& plant : {PlantModel{IdealPlant{}}, PlantModel{NoisyPlant{0.2, 0.05, 0.05, 7}}}) {
    const auto report = run_validation(bench.layout, bench.end_effector, p, plant);
    CHECK(compute_aggregates(report.records) == report.aggregates);
  }
  CHECK(compute_aggregates({}) == ReportAggregates{});
}

TEST_CASE("noisy runs are reproducible per seed") {
  const auto bench = default_bench_layout();
  ValidationProtocol p;
  p.sample_count = 40;
  p.samples_per_hold = 30;
  const auto r1 = run_validation(bench.layout, bench.end_effector, p, NoisyPlant{0.3, 0.1, 0.1, 42});
  const auto r2 = run_validation(bench.layout, bench.end_effector, p, NoisyPlant{0.3, 0.1, 0.1, 42});
  const auto r3 = run_validation(bench.layout, bench.end_effector, p, NoisyPlant{0.3, 0.1, 0.1, 43});
  bool differs = false;
  for (std::size_t i = 0; i < r1.records.size(); ++i) {
    CHECK(same_bits(r1.records[i].measured, r2.records[i].measured));
    differs |= !same_bits(r1.records[i].measured, r3.records[i].measured);
  }
  CHECK(differs);
}

TEST_CASE("protocol and plant validation") {
  ValidationProtocol p;
  p.sphere_radius = 0.0;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  p = {};
  p.samples_per_hold = 0;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  CHECK_THROWS_AS(validate(PlantModel{NoisyPlant{-1.0, 0.0, 0.0, 1}}), std::invalid_argument);
  CHECK_THROWS_AS(validate(PlantModel{NoisyPlant{0.1, NAN, 0.0, 1}}), std::invalid_argument);
}

TEST_CASE("workspace feasibility fractions") {
  const auto bench = default_bench_layout();
  CHECK(feasible_direction_fraction(bench.layout, bench.end_effector) == 1.0);
  CHECK(feasible_direction_fraction(bench.layout, Vec3(0, 0, 5.0)) < 1.0);
  CHECK(feasible_direction_fraction(bench.layout, bench.layout.anchors()[0].position) == 0.0);

  const auto single = testing_support::layout_from({Vec3(0, 0, 2)});
  for (const Vec3& p : {Vec3(0, 0, 0), Vec3(1, 1, 1), Vec3(-2, 0, 5), Vec3(0, 0, 1.999)}) {
    CHECK(feasible_direction_fraction(single, p) <= 1.0 / 26.0);
  }
}
