#pragma once

#include <optional>
#include <stdexcept>
#include <vector>

namespace qpm {

// Waveguide frame: x horizontal (width), y vertical depth (air at y < 0),
// z propagation.  The KTP crystallographic axes (xc, yc, zc) map onto the
// waveguide axes (z, x, y).
enum class Axis { X = 0, Y = 1, Z = 2 };

// quasi-TE: electric field along x, dominant magnetic component h_y.
// quasi-TM: electric field along y, dominant magnetic component h_x.
enum class Polarization { TE, TM };

// SHG polarization configurations: type 0 = TM+TM->TM, type I = TE+TE->TM,
// type II = TE+TM->TE.
enum class ShgType { Type0, TypeI, TypeII };

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Window {
  double x_min = -15.0, x_max = 15.0;
  double y_min = -5.0, y_max = 40.0;
};

struct WaveguideGeometry {
  double width_um = 5.0;    // w
  double depth_um = 10.0;   // h, erfc depth scale
  double length_mm = 10.5;  // L, poled device length
  Window window;

  double length_um() const { return length_mm * 1.0e3; }
  // Throws ConfigError if the window fails to contain the core plus an air band.
  void validate() const;
};

// Depth dependence of the index increment.  Decay = erfc(y/h), maximum at
// the surface, decaying into the substrate (diffusion profile).  AsPrinted =
// erfc(-y/h), kept selectable for comparison with the literature formula.
enum class DepthProfile { Decay, AsPrinted };

// n^2 = a + b / (1 - c/lambda^2) - d lambda^2, lambda in micrometers.
struct SellmeierCoeffs {
  double a = 0, b = 0, c = 0, d = 0;
  double index(double lambda_um) const;
};

// Anisotropic substrate dispersion plus surface index increments.
// Substrate indices come from Sellmeier fits of the crystal axes, re-pinned
// by a wavelength-linear correction so the tabulated 400/800 nm values are
// reproduced exactly.  Increments interpolate linearly between the two
// tabulated wavelengths.
class DispersionModel {
 public:
  static DispersionModel ktp_default();

  // Substrate index n_xi0(lambda).  Throws std::domain_error outside [350,1100] nm.
  double substrate_index(Axis wg_axis, double lambda_nm) const;
  // Surface increment Delta n_xi(lambda).
  double surface_increment(Axis wg_axis, double lambda_nm) const;

  // Full profile n_xi(x, y) of the air/core/substrate system.
  double refractive_index(Axis wg_axis, double lambda_nm, double x_um, double y_um,
                          const WaveguideGeometry& geom,
                          DepthProfile profile = DepthProfile::Decay) const;

  // True when the axis carries a pinned calibration (n_z does not; it rides
  // on the Sellmeier fit alone and is flagged in diagnostics).
  bool axis_pinned(Axis wg_axis) const { return axes_[static_cast<int>(wg_axis)].pinned; }

  void set_sellmeier(Axis wg_axis, const SellmeierCoeffs& c, bool keep_pins);
  void set_increments(Axis wg_axis, double dn_400, double dn_800);

  static constexpr double lambda_min_nm = 350.0;
  static constexpr double lambda_max_nm = 1100.0;

 private:
  struct AxisModel {
    SellmeierCoeffs sellmeier;
    bool pinned = false;
    double pin_offset = 0.0;  // n += pin_offset + pin_slope * lambda_um
    double pin_slope = 0.0;
    double dn_400 = 0.0, dn_800 = 0.0;
  };
  AxisModel axes_[3];
  void repin(AxisModel& ax, double n_400, double n_800);
  static void check_lambda(double lambda_nm);
};

// Periodic poling of the nonlinear coefficient: dichotomic +-1 modulation
// with period Lambda_PM and the given positive-domain fraction.
struct PolingSpec {
  double period_um = 7.62;
  double duty_ratio = 0.5;
  std::vector<int> harmonic_orders = {1, 2, 3};
  void validate() const;
};

// |c_M| of the Fourier decomposition of the unit dichotomic modulation,
// |c_M| = 2 |sin(pi M duty)| / (pi M).  Duty 0.5 kills all even harmonics.
double poling_harmonic_amplitude(const PolingSpec& spec, int harmonic);

// Nonzero d elements in the crystal frame [pm/V] and the selector from SHG
// type to the active element (type 0 -> d33; types I and II -> d32, the
// latter via Kleinman symmetry d24 = d32).
struct NonlinearTensor {
  double d33_pm_per_volt = 10.7;
  double d32_pm_per_volt = 2.65;
  double element(ShgType type) const;
};

const char* axis_name(Axis a);
const char* polarization_name(Polarization p);
const char* shg_type_name(ShgType t);

}  // namespace qpm
