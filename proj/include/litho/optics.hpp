#pragma once

// Lithography proximity formulas: resolution pitch, Airy-disk intensity and
// encircled energy of a contact hole, and the isolation distance that sizes
// clip margins.

namespace litho::optics {

/// Imaging system parameters. Lengths are in nanometers.
struct LithoSystem {
  double wavelength_nm = 13.5;
  double numerical_aperture = 0.35;
  double refraction_index = 1.0;
  double pupil_radius_nm = 1.0;
  double center_intensity = 1.0;

  /// Throws Error{config} when an invariant does not hold.
  void validate() const;

  double wavenumber() const;  // 2*pi / wavelength
};

/// Bessel function of the first kind, orders 0 and 1.
///
/// Power series for |x| <= 12, Miller backward recurrence up to |x| <= 25 and
/// the Hankel asymptotic expansion beyond. Absolute error stays below 1e-10.
double bessel_j(int order, double x);

inline double bessel_j0(double x) { return bessel_j(0, x); }
inline double bessel_j1(double x) { return bessel_j(1, x); }

/// Smallest printable pitch, lambda / NA.
double min_pitch(const LithoSystem& sys);

/// Normalized Airy profile (2 J1(x) / x)^2, with the x -> 0 limit of 1.
double airy_profile(double x);

/// Fraction of diffracted energy inside radius x: 1 - J0(x)^2 - J1(x)^2.
double encircled_energy_at(double x);

/// I(theta) = (2 J1(x)/x)^2 * I0 with x = k r sin(theta).
double airy_intensity(const LithoSystem& sys, double sin_theta);

/// P(theta) = 1 - J0(x)^2 - J1(x)^2 with x = k r sin(theta).
double encircled_energy(const LithoSystem& sys, double sin_theta);

/// Distance beyond which two shapes no longer interact, 6.05 * lambda / NA.
double isolation_distance(const LithoSystem& sys);

/// Rounds a length down onto a grid (the 10 nm design grid by default).
double snap_down(double length_nm, double grid_nm = 10.0);

/// The n-th positive zero of J1 (n >= 1), located by bracketing + bisection.
double bessel_j1_zero(int n);

}  // namespace litho::optics
