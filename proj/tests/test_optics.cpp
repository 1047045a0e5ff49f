#include <cmath>
#include <limits>
#include <numbers>

#include <gtest/gtest.h>

#include "litho/error.hpp"
#include "litho/optics.hpp"
#include "oracles.hpp"

namespace op = litho::optics;

TEST(Bessel, ValuesAtOrigin) {
  EXPECT_DOUBLE_EQ(op::bessel_j0(0.0), 1.0);
  EXPECT_DOUBLE_EQ(op::bessel_j1(0.0), 0.0);
}

TEST(Bessel, MatchesHighPrecisionSeriesAcrossAllRegimes) {
  for (double x = -39.5; x <= 40.0; x += 0.173) {
    EXPECT_NEAR(op::bessel_j0(x), oracle::bessel_j(0, std::abs(x)), 1e-10) << x;
    const double j1 = oracle::bessel_j(1, std::abs(x));
    EXPECT_NEAR(op::bessel_j1(x), x < 0 ? -j1 : j1, 1e-10) << x;
  }
  // regime boundaries
  for (double x : {11.999999, 12.0, 12.000001, 24.999999, 25.0, 25.000001}) {
    EXPECT_NEAR(op::bessel_j0(x), oracle::bessel_j(0, x), 1e-10) << x;
    EXPECT_NEAR(op::bessel_j1(x), oracle::bessel_j(1, x), 1e-10) << x;
  }
}

TEST(Bessel, RejectsBadInput) {
  EXPECT_THROW(op::bessel_j(2, 1.0), litho::Error);
  EXPECT_THROW(op::bessel_j0(std::numeric_limits<double>::quiet_NaN()), litho::Error);
  EXPECT_THROW(op::bessel_j1(std::numeric_limits<double>::infinity()), litho::Error);
}

TEST(Bessel, FirstZeroOfJ1) {
  // bisection on the high-precision series, independent of the library
  double lo = 3.0, hi = 4.5;
  for (int i = 0; i < 100; ++i) {
    const double mid = 0.5 * (lo + hi);
    (oracle::bessel_j(1, mid) > 0) == (oracle::bessel_j(1, lo) > 0) ? lo = mid : hi = mid;
  }
  EXPECT_NEAR(op::bessel_j1_zero(1), 0.5 * (lo + hi), 1e-9);
  EXPECT_NEAR(op::bessel_j1(3.8317059702), 0.0, 1e-8);
  EXPECT_THROW(op::bessel_j1_zero(0), litho::Error);
}

TEST(Bessel, J1ZerosAreSignChangesOfTheOracle) {
  for (int n = 1; n <= 10; ++n) {
    const double z = op::bessel_j1_zero(n);
    EXPECT_LT(oracle::bessel_j(1, z - 1e-6) * oracle::bessel_j(1, z + 1e-6), 0.0) << n;
  }
}

TEST(MinPitch, DirectDivision) {
  op::LithoSystem euv;
  EXPECT_NEAR(op::min_pitch(euv), 13.5 / 0.35, 1e-12);
  op::LithoSystem duv{.wavelength_nm = 193.0, .numerical_aperture = 1.35, .refraction_index = 1.44};
  EXPECT_NEAR(op::min_pitch(duv), 142.96296, 1e-4);
  op::LithoSystem bad{.numerical_aperture = 0.0};
  EXPECT_THROW(op::min_pitch(bad), litho::Error);
}

TEST(Airy, ProfileLimitAndZero) {
  EXPECT_DOUBLE_EQ(op::airy_profile(0.0), 1.0);
  EXPECT_NEAR(op::airy_profile(1e-9), 1.0, 1e-12);
  EXPECT_NEAR(op::airy_profile(op::bessel_j1_zero(1)), 0.0, 1e-9);
  const double j = oracle::bessel_j(1, 19.0);
  EXPECT_NEAR(op::airy_profile(19.0), std::pow(2.0 * j / 19.0, 2), 1e-12);
}

TEST(Airy, IntensityUsesSystemArgument) {
  op::LithoSystem sys;
  sys.center_intensity = 2.5;
  EXPECT_DOUBLE_EQ(op::airy_intensity(sys, 0.0), 2.5);
  // pupil radius chosen so that k r sin(theta) = 19 at sin(theta) = 0.5
  sys.pupil_radius_nm = 19.0 / (sys.wavenumber() * 0.5);
  const double j = oracle::bessel_j(1, 19.0);
  EXPECT_NEAR(op::airy_intensity(sys, 0.5), 2.5 * std::pow(2.0 * j / 19.0, 2), 1e-12);
  EXPECT_THROW(op::airy_intensity(sys, 1.5), litho::Error);
  EXPECT_THROW(op::airy_intensity(sys, -0.1), litho::Error);
}

TEST(EncircledEnergy, KnownValues) {
  EXPECT_DOUBLE_EQ(op::encircled_energy_at(0.0), 0.0);
  EXPECT_NEAR(op::encircled_energy_at(19.0), 0.9673, 0.005);
  const double j0 = oracle::bessel_j(0, 19.0), j1 = oracle::bessel_j(1, 19.0);
  EXPECT_NEAR(op::encircled_energy_at(19.0), 1.0 - j0 * j0 - j1 * j1, 1e-10);
  const double p50 = op::encircled_energy_at(50.0);
  EXPECT_GT(p50, 0.97);
  EXPECT_LT(p50, 1.0);
}

TEST(EncircledEnergy, IncreasesOverTheDarkRings) {
  // at zeros of J1 the enclosed energy is 1 - J0^2 and climbs ring by ring
  double prev = 0.0;
  for (int n = 1; n <= 15; ++n) {
    const double p = op::encircled_energy_at(op::bessel_j1_zero(n));
    EXPECT_GT(p, prev) << n;
    prev = p;
  }
}

TEST(EncircledEnergy, SystemForm) {
  op::LithoSystem sys;
  sys.pupil_radius_nm = 19.0 / sys.wavenumber();
  EXPECT_NEAR(op::encircled_energy(sys, 1.0), op::encircled_energy_at(19.0), 1e-12);
}

TEST(IsolationDistance, PaperSettingAndScaling) {
  op::LithoSystem sys;
  const double d = op::isolation_distance(sys);
  EXPECT_NEAR(d, 233.357142857, 1e-6);
  EXPECT_DOUBLE_EQ(op::snap_down(d), 230.0);
  op::LithoSystem wide = sys;
  wide.numerical_aperture = 0.7;
  EXPECT_NEAR(op::isolation_distance(wide), d / 2, 1e-9);
  op::LithoSystem longer = sys;
  longer.wavelength_nm = 27.0;
  EXPECT_NEAR(op::isolation_distance(longer), 2 * d, 1e-9);
}

TEST(IsolationDistance, IsTheDiameterWhereTheArgumentReachesNineteen) {
  // sin(theta) = NA at k r sin(theta) = 19 gives r; D is about 2 r
  op::LithoSystem sys;
  const double r = 19.0 / (sys.wavenumber() * sys.numerical_aperture);
  EXPECT_NEAR(op::isolation_distance(sys) / (2 * r), 1.0, 1e-3);
}

TEST(SnapDown, Grid) {
  EXPECT_DOUBLE_EQ(op::snap_down(239.9), 230.0);
  EXPECT_DOUBLE_EQ(op::snap_down(240.0), 240.0);
  EXPECT_DOUBLE_EQ(op::snap_down(233.36, 5.0), 230.0);
  EXPECT_THROW(op::snap_down(10.0, 0.0), litho::Error);
}
