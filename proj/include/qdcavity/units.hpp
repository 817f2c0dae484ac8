#ifndef QDCAVITY_UNITS_HPP
#define QDCAVITY_UNITS_HPP

// Unit conventions used throughout the library:
//   angular frequencies and rates   rad/ns, 1/ns
//   ordinary frequencies/detunings  GHz
//   wavelengths                     nm
//   lengths                         um
//   optical powers                  pW

#include <numbers>

namespace qdcavity::units
{

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kSpeedOfLight_m_per_s = 299792458.0;
inline constexpr double kSpeedOfLight_nm_per_ns = 299792458.0;
inline constexpr double kSpeedOfLight_um_per_ns = 299792.458;
inline constexpr double kHbar_J_s = 1.054571817e-34;

constexpr double ghz_to_rad_per_ns(double f_ghz) { return 2.0 * kPi * f_ghz; }
constexpr double rad_per_ns_to_ghz(double omega) { return omega / (2.0 * kPi); }

constexpr double wavelength_nm_to_omega(double lambda_nm) { return 2.0 * kPi * kSpeedOfLight_nm_per_ns / lambda_nm; }
constexpr double omega_to_wavelength_nm(double omega) { return 2.0 * kPi * kSpeedOfLight_nm_per_ns / omega; }

constexpr double degrees_to_radians(double deg) { return deg * kPi / 180.0; }

} // namespace qdcavity::units

#endif
