#include "litho/optics.hpp"

#include <cmath>
#include <numbers>

#include "litho/error.hpp"

namespace litho::optics {
namespace {

constexpr double kSeriesLimit = 12.0;
constexpr double kRecurrenceLimit = 25.0;

double series(int order, double x) {
  const double half = 0.5 * x;
  const double q = -half * half;
  double term = order == 0 ? 1.0 : half;
  double sum = term;
  for (int m = 1; m < 200; ++m) {
    term *= q / (static_cast<double>(m) * static_cast<double>(m + order));
    sum += term;
    if (std::abs(term) < 1e-18 * std::max(1.0, std::abs(sum)) && m > 2) break;
  }
  return sum;
}

// Miller's algorithm: recur downward from an order far above x and normalize
// with the identity J0 + 2 * sum_k J_{2k} = 1.
double backward_recurrence(int order, double x) {
  int start = static_cast<int>(x + 30.0 + 2.0 * std::sqrt(40.0 * x));
  start += start % 2;
  double next = 0.0;
  double current = 1e-30;
  double j0 = 0.0;
  double j1 = 0.0;
  double norm = 0.0;
  for (int n = start; n >= 1; --n) {
    const double prev = 2.0 * n / x * current - next;
    next = current;
    current = prev;  // J_{n-1}
    if (n - 1 == 1) j1 = current;
    if ((n - 1) % 2 == 0 && n - 1 > 0) norm += 2.0 * current;
    if (std::abs(current) > 1e250) {
      current *= 1e-250;
      next *= 1e-250;
      norm *= 1e-250;
      j1 *= 1e-250;
    }
  }
  j0 = current;
  norm += j0;
  return order == 0 ? j0 / norm : j1 / norm;
}

double hankel_asymptotic(int order, double x) {
  const double mu = 4.0 * order * order;
  double p = 1.0;
  double q = 0.0;
  double term = 1.0;
  double last = 1.0;
  for (int k = 1; k < 200; ++k) {
    const double odd = 2.0 * k - 1.0;
    term *= (mu - odd * odd) / (k * 8.0 * x);
    if (std::abs(term) > std::abs(last) || std::abs(term) < 1e-18) break;
    last = term;
    // k odd feeds Q, k even feeds P; signs alternate within each series
    switch (k % 4) {
      case 1: q += term; break;
      case 2: p -= term; break;
      case 3: q -= term; break;
      case 0: p += term; break;
    }
  }
  const double chi = x - (0.5 * order + 0.25) * std::numbers::pi;
  return std::sqrt(2.0 / (std::numbers::pi * x)) * (p * std::cos(chi) - q * std::sin(chi));
}

double argument(const LithoSystem& sys, double sin_theta, const char* op) {
  sys.validate();
  if (!std::isfinite(sin_theta) || sin_theta < 0.0 || sin_theta > 1.0) {
    throw Error(ErrorKind::domain, "optics", op, "sin_theta must lie in [0, 1]");
  }
  return sys.wavenumber() * sys.pupil_radius_nm * sin_theta;
}

}  // namespace

void LithoSystem::validate() const {
  if (!(wavelength_nm > 0.0)) {
    throw Error(ErrorKind::config, "optics", "LithoSystem", "wavelength must be positive");
  }
  if (!(refraction_index > 0.0)) {
    throw Error(ErrorKind::config, "optics", "LithoSystem", "refraction index must be positive");
  }
  if (!(numerical_aperture > 0.0) || numerical_aperture > refraction_index) {
    throw Error(ErrorKind::config, "optics", "LithoSystem",
                "numerical aperture must lie in (0, refraction_index]");
  }
  if (!(pupil_radius_nm > 0.0)) {
    throw Error(ErrorKind::config, "optics", "LithoSystem", "pupil radius must be positive");
  }
  if (!(center_intensity > 0.0)) {
    throw Error(ErrorKind::config, "optics", "LithoSystem", "center intensity must be positive");
  }
}

double LithoSystem::wavenumber() const { return 2.0 * std::numbers::pi / wavelength_nm; }

double bessel_j(int order, double x) {
  if (order != 0 && order != 1) {
    throw Error(ErrorKind::domain, "optics", "bessel_j", "only orders 0 and 1 are supported");
  }
  if (!std::isfinite(x)) {
    throw Error(ErrorKind::domain, "optics", "bessel_j", "argument must be finite");
  }
  const double sign = (order == 1 && x < 0.0) ? -1.0 : 1.0;
  const double ax = std::abs(x);
  if (ax <= kSeriesLimit) return sign * series(order, ax);
  if (ax <= kRecurrenceLimit) return sign * backward_recurrence(order, ax);
  return sign * hankel_asymptotic(order, ax);
}

double min_pitch(const LithoSystem& sys) {
  sys.validate();
  return sys.wavelength_nm / sys.numerical_aperture;
}

double airy_profile(double x) {
  if (std::abs(x) < 1e-8) return 1.0 - x * x / 4.0;
  const double ratio = 2.0 * bessel_j1(x) / x;
  return ratio * ratio;
}

double encircled_energy_at(double x) {
  const double j0 = bessel_j0(x);
  const double j1 = bessel_j1(x);
  return 1.0 - j0 * j0 - j1 * j1;
}

double airy_intensity(const LithoSystem& sys, double sin_theta) {
  const double x = argument(sys, sin_theta, "airy_intensity");
  if (sin_theta == 0.0) return sys.center_intensity;
  return airy_profile(x) * sys.center_intensity;
}

double encircled_energy(const LithoSystem& sys, double sin_theta) {
  return encircled_energy_at(argument(sys, sin_theta, "encircled_energy"));
}

double isolation_distance(const LithoSystem& sys) {
  sys.validate();
  return 6.05 * sys.wavelength_nm / sys.numerical_aperture;
}

double snap_down(double length_nm, double grid_nm) {
  if (!(grid_nm > 0.0)) {
    throw Error(ErrorKind::domain, "optics", "snap_down", "grid must be positive");
  }
  return std::floor(length_nm / grid_nm + 1e-9) * grid_nm;
}

double bessel_j1_zero(int n) {
  if (n < 1) throw Error(ErrorKind::domain, "optics", "bessel_j1_zero", "n must be >= 1");
  // McMahon's expansion gives a guess well inside the bracket
  const double beta = (n + 0.25) * std::numbers::pi;
  const double guess = beta - 3.0 / (8.0 * beta);
  double lo = guess - 0.5;
  double hi = guess + 0.5;
  double flo = bessel_j1(lo);
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    const double fmid = bessel_j1(mid);
    if ((fmid < 0.0) == (flo < 0.0)) {
      lo = mid;
      flo = fmid;
    } else {
      hi = mid;
    }
    if (hi - lo < 1e-15) break;
  }
  return 0.5 * (lo + hi);
}

}  // namespace litho::optics
