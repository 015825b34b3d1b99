#pragma once

// The library works in natural units: hbar = c = 1 and times in units of a
// reference time tau0. Conversion to SI happens only when results are
// reported.

namespace casimir {

inline constexpr double kHbar = 1.054571817e-34;         // J s (CODATA 2018, exact)
inline constexpr double kSpeedOfLight = 299792458.0;     // m / s

enum class UnitSystem { Natural, SI };

struct Units {
  UnitSystem system = UnitSystem::Natural;
  double tau0 = 1.0;  // seconds per time unit when system == SI

  // Seconds (SI) or tau0 (natural) per internal time unit.
  double time_scale() const noexcept { return system == UnitSystem::SI ? tau0 : 1.0; }
  // Newton per internal force unit hbar / (c tau0^2).
  double force_scale() const noexcept {
    return system == UnitSystem::SI ? kHbar / (kSpeedOfLight * tau0 * tau0) : 1.0;
  }
  double frequency_scale() const noexcept { return 1.0 / time_scale(); }
};

}  // namespace casimir
