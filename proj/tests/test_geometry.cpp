// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>

#include "irsbeam/geometry.hpp"
#include "irsbeam/rng.hpp"

using namespace irsbeam;

TEST_SUITE_BEGIN("geometry");

TEST_CASE("cosine wrap arithmetic") {
  CHECK(cos_sub(CosAngle(0.5), CosAngle(0.7)).value() == doctest::Approx(-0.2).epsilon(1e-12));
  CHECK(cos_sub(CosAngle(-0.9), CosAngle(0.3)).value() == doctest::Approx(0.8).epsilon(1e-12));
  CHECK(cos_add(CosAngle(0.9), CosAngle(0.9)).value() == doctest::Approx(-0.2).epsilon(1e-12));

  Pcg32 rng(11, 0);
  for (int i = 0; i < 10000; ++i) {
    const CosAngle a(rng.uniform(-1.0, 1.0));
    const CosAngle b(rng.uniform(-1.0, 1.0));
    CHECK(cos_sub(a, a).value() == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(cos_add(a, CosAngle(0.0)).value() == doctest::Approx(a.value()).epsilon(1e-15));
    const double s = cos_sub(a, b).value();
    REQUIRE(s >= -1.0);
    REQUIRE(s < 1.0);
    CHECK(std::abs(CosAngle::wrap(cos_add(cos_sub(a, b), b).value() - a.value())) < 1e-12);
  }
  // exact boundary folds onto -1
  CHECK(CosAngle(1.0).value() == doctest::Approx(-1.0));
}

TEST_CASE("steering vector values and inner products") {
  const Eigen::VectorXcd a2 = steering_vector(2, CosAngle(0.0));
  CHECK(std::abs(a2(0) - std::complex<double>(1, 0)) < 1e-15);
  CHECK(std::abs(a2(1) - std::complex<double>(1, 0)) < 1e-15);

  const Eigen::VectorXcd a4 = steering_vector(4, CosAngle(0.5));
  CHECK(std::abs(a4(0) - std::complex<double>(1, 0)) < 1e-12);
  CHECK(std::abs(a4(1) - std::complex<double>(0, 1)) < 1e-12);
  CHECK(std::abs(a4(2) - std::complex<double>(-1, 0)) < 1e-12);
  CHECK(std::abs(a4(3) - std::complex<double>(0, -1)) < 1e-12);

  Pcg32 rng(12, 0);
  for (int i = 0; i < 200; ++i) {
    const int n = 2 + static_cast<int>(rng.next_u32() % 30);
    const CosAngle psi1(rng.uniform(-1.0, 1.0));
    const CosAngle psi2(rng.uniform(-1.0, 1.0));
    const Eigen::VectorXcd a = steering_vector(n, psi1);
    for (int k = 0; k < n; ++k) CHECK(std::abs(std::abs(a(k)) - 1.0) < 1e-12);
    CHECK(a.dot(a).real() == doctest::Approx(double(n)).epsilon(1e-14));

    // Dirichlet-kernel magnitude of the cross product.
    const double delta = cos_sub(psi2, psi1).value();
    const double direct = std::abs(a.dot(steering_vector(n, psi2)));
    const double x = 3.14159265358979323846 * delta / 2.0;
    const double closed = std::abs(std::sin(x) ) < 1e-12
                              ? double(n)
                              : std::abs(std::sin(n * x) / std::sin(x));
    CHECK(direct == doctest::Approx(closed).epsilon(1e-9));
  }
}

TEST_CASE("cosine of direction") {
  const CosAngle c = cosine_of_direction({0, 0, 1.2}, {10, 0, 3.5}, {1, 0, 0});
  CHECK(c.value() == doctest::Approx(-10.0 / std::sqrt(100.0 + 5.29)).epsilon(1e-12));

  // collinear: clamped strictly below 1
  const CosAngle on_axis = cosine_of_direction({5, 0, 0}, {0, 0, 0}, {1, 0, 0});
  CHECK(on_axis.value() < 1.0);
  CHECK(on_axis.value() > 1.0 - 1e-12);

  const CosAngle perp = cosine_of_direction({0, 7, 0}, {0, 0, 0}, {1, 0, 0});
  CHECK(perp.value() == doctest::Approx(0.0).epsilon(1e-15));

  CHECK_THROWS(cosine_of_direction({1, 2, 3}, {1, 2, 3}, {1, 0, 0}));
}

TEST_CASE("segment vs box") {
  const Box box({0, 0, 0}, {1, 1, 1});
  CHECK(segment_intersects_box({-5, 0, 0}, {5, 0, 0}, box));
  CHECK_FALSE(segment_intersects_box({-5, 3, 0}, {5, 3, 0}, box));
  // grazing a face counts as blocked
  CHECK(segment_intersects_box({-5, 1.0, 0}, {5, 1.0, 0}, box));
  CHECK(segment_intersects_box({-5, 1.0 + 0.9e-12, 0}, {5, 1.0 + 0.9e-12, 0}, box));

  // agreement with dense point sampling
  Pcg32 rng(13, 0);
  for (int i = 0; i < 1000; ++i) {
    const Vec3 a{rng.uniform(-4, 4), rng.uniform(-4, 4), rng.uniform(-4, 4)};
    const Vec3 b{rng.uniform(-4, 4), rng.uniform(-4, 4), rng.uniform(-4, 4)};
    if (norm(a - b) < 1e-9) continue;
    const Box random_box({rng.uniform(-2, 2), rng.uniform(-2, 2), rng.uniform(-2, 2)},
                         {rng.uniform(0.2, 1.5), rng.uniform(0.2, 1.5), rng.uniform(0.2, 1.5)});
    bool sampled_hit = false;
    for (int s = 0; s < 10000 && !sampled_hit; ++s) {
      const Vec3 p = a + (b - a) * ((s + 0.5) / 10000.0);
      sampled_hit = std::abs(p.x - random_box.center.x) <= random_box.half_extents.x &&
                    std::abs(p.y - random_box.center.y) <= random_box.half_extents.y &&
                    std::abs(p.z - random_box.center.z) <= random_box.half_extents.z;
    }
    if (sampled_hit) CHECK(segment_intersects_box(a, b, random_box));
    // the slab test may see thin corner clips that sampling misses; only the
    // sampled-hit direction is a hard requirement
  }
}

TEST_CASE("construction guards") {
  CHECK_THROWS(ArrayGeometry(0, {1, 0, 0}));
  CHECK_THROWS(ArrayGeometry(4, {0, 0, 0}));
  CHECK_THROWS(Box({0, 0, 0}, {1, 0, 1}));
  CHECK(ArrayGeometry(4, {0, 0, 2}).direction.z == doctest::Approx(1.0));
}

TEST_SUITE_END();
