#include "qpmshg/materials.hpp"

#include <cmath>

namespace qpm {

void WaveguideGeometry::validate() const {
  if (width_um <= 0 || depth_um <= 0 || length_mm <= 0)
    throw ConfigError("waveguide dimensions must be positive");
  const Window& win = window;
  if (win.x_min >= win.x_max || win.y_min >= win.y_max)
    throw ConfigError("window is empty");
  const double half_w = 0.5 * width_um;
  if (win.x_min > -half_w - 0.5 || win.x_max < half_w + 0.5)
    throw ConfigError("window does not contain the core column plus margin");
  if (win.y_min > -0.5)
    throw ConfigError("window has no air band below y = 0");
  if (win.y_max < 1.2 * depth_um)
    throw ConfigError("window too shallow for the diffusion tail");
}

double SellmeierCoeffs::index(double lambda_um) const {
  const double l2 = lambda_um * lambda_um;
  const double n2 = a + b / (1.0 - c / l2) - d * l2;
  return std::sqrt(n2);
}

void DispersionModel::check_lambda(double lambda_nm) {
  if (!(lambda_nm >= lambda_min_nm && lambda_nm <= lambda_max_nm))
    throw std::domain_error("wavelength outside the dispersion model domain [350, 1100] nm");
}

DispersionModel DispersionModel::ktp_default() {
  DispersionModel m;
  // Fan et al. flux-grown KTP fits, crystal axes xc, yc, zc.
  const SellmeierCoeffs ktp_xc{2.16747, 0.83733, 0.04611, 0.01713};
  const SellmeierCoeffs ktp_yc{2.19229, 0.83547, 0.04970, 0.01621};
  const SellmeierCoeffs ktp_zc{2.25411, 1.06543, 0.05486, 0.02140};
  // Waveguide frame: x <- yc, y <- zc, z <- xc.
  m.axes_[static_cast<int>(Axis::X)].sellmeier = ktp_yc;
  m.axes_[static_cast<int>(Axis::Y)].sellmeier = ktp_zc;
  m.axes_[static_cast<int>(Axis::Z)].sellmeier = ktp_xc;
  // Substrate values used in the modal analysis, pinned exactly.
  m.repin(m.axes_[static_cast<int>(Axis::X)], 1.84435, 1.75719);
  m.repin(m.axes_[static_cast<int>(Axis::Y)], 1.96775, 1.84546);
  m.set_increments(Axis::X, 0.018, 0.009);
  m.set_increments(Axis::Y, 0.019, 0.013);
  m.set_increments(Axis::Z, 0.0, 0.0);
  return m;
}

void DispersionModel::repin(AxisModel& ax, double n_400, double n_800) {
  ax.pin_offset = 0.0;
  ax.pin_slope = 0.0;
  const double r400 = n_400 - ax.sellmeier.index(0.4);
  const double r800 = n_800 - ax.sellmeier.index(0.8);
  ax.pin_slope = (r800 - r400) / 0.4;
  ax.pin_offset = r400 - ax.pin_slope * 0.4;
  ax.pinned = true;
}

void DispersionModel::set_sellmeier(Axis wg_axis, const SellmeierCoeffs& c, bool keep_pins) {
  AxisModel& ax = axes_[static_cast<int>(wg_axis)];
  if (keep_pins && ax.pinned) {
    const double n_400 = substrate_index(wg_axis, 400.0);
    const double n_800 = substrate_index(wg_axis, 800.0);
    ax.sellmeier = c;
    repin(ax, n_400, n_800);
  } else {
    ax.sellmeier = c;
    ax.pinned = false;
    ax.pin_offset = ax.pin_slope = 0.0;
  }
}

void DispersionModel::set_increments(Axis wg_axis, double dn_400, double dn_800) {
  AxisModel& ax = axes_[static_cast<int>(wg_axis)];
  ax.dn_400 = dn_400;
  ax.dn_800 = dn_800;
}

double DispersionModel::substrate_index(Axis wg_axis, double lambda_nm) const {
  check_lambda(lambda_nm);
  const AxisModel& ax = axes_[static_cast<int>(wg_axis)];
  const double lambda_um = lambda_nm * 1.0e-3;
  return ax.sellmeier.index(lambda_um) + ax.pin_offset + ax.pin_slope * lambda_um;
}

double DispersionModel::surface_increment(Axis wg_axis, double lambda_nm) const {
  check_lambda(lambda_nm);
  const AxisModel& ax = axes_[static_cast<int>(wg_axis)];
  // Small perturbation; linear between the two tabulated wavelengths.
  return ax.dn_400 + (ax.dn_800 - ax.dn_400) * (lambda_nm - 400.0) / 400.0;
}

double DispersionModel::refractive_index(Axis wg_axis, double lambda_nm, double x_um,
                                         double y_um, const WaveguideGeometry& geom,
                                         DepthProfile profile) const {
  check_lambda(lambda_nm);
  if (y_um < 0.0) return 1.0;  // air above the chip
  const double n0 = substrate_index(wg_axis, lambda_nm);
  const double half_w = 0.5 * geom.width_um;
  if (x_um < -half_w || x_um > half_w) return n0;
  const double t = y_um / geom.depth_um;
  const double g = (profile == DepthProfile::Decay) ? std::erfc(t) : std::erfc(-t);
  return n0 + surface_increment(wg_axis, lambda_nm) * g;
}

void PolingSpec::validate() const {
  if (period_um <= 0) throw ConfigError("poling period must be positive");
  if (!(duty_ratio > 0.0 && duty_ratio < 1.0))
    throw ConfigError("poling duty ratio must lie in (0, 1)");
  for (int m : harmonic_orders)
    if (m < 1) throw ConfigError("poling harmonic orders must be >= 1");
}

double poling_harmonic_amplitude(const PolingSpec& spec, int harmonic) {
  if (harmonic < 1) throw std::domain_error("poling harmonic must be >= 1");
  spec.validate();
  const double pi = 3.14159265358979323846;
  return 2.0 * std::fabs(std::sin(pi * harmonic * spec.duty_ratio)) / (pi * harmonic);
}

double NonlinearTensor::element(ShgType type) const {
  switch (type) {
    case ShgType::Type0:
      return d33_pm_per_volt;
    case ShgType::TypeI:
    case ShgType::TypeII:
      return d32_pm_per_volt;
  }
  throw std::domain_error("unknown SHG type");
}

const char* axis_name(Axis a) {
  switch (a) {
    case Axis::X: return "x";
    case Axis::Y: return "y";
    case Axis::Z: return "z";
  }
  return "?";
}

const char* polarization_name(Polarization p) {
  return p == Polarization::TE ? "TE" : "TM";
}

const char* shg_type_name(ShgType t) {
  switch (t) {
    case ShgType::Type0: return "0";
    case ShgType::TypeI: return "I";
    case ShgType::TypeII: return "II";
  }
  return "?";
}

}  // namespace qpm
