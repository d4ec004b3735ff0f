#pragma once

#include <complex>
#include <numbers>

namespace dga {

using cplx = std::complex<double>;

inline constexpr cplx I{0.0, 1.0};

inline constexpr double c0 = 299792458.0;
inline constexpr double mu0 = 4.0e-7 * std::numbers::pi;
inline constexpr double eps0 = 1.0 / (mu0 * c0 * c0);
/* sqrt(mu0/eps0) == mu0*c0 */
inline constexpr double eta0 = mu0 * c0;

inline constexpr double angular_frequency(double f) { return 2.0 * std::numbers::pi * f; }
inline constexpr double wavenumber(double f) { return angular_frequency(f) / c0; }
inline constexpr double wavelength(double f) { return c0 / f; }

} // namespace dga
