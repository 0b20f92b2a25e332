#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "qpmshg/oracles.hpp"

using namespace qpm;
using namespace qpm::oracle;

TEST_CASE("three-layer slab reproduces the symmetric dispersion relation") {
  // core n = 1.86, cladding n = 1.845, thickness 5 um, lambda = 0.8 um, TE0
  const std::vector<SlabLayer> stack = {{0, 1.845, 1.0}, {5.0, 1.86, 1.0}, {0, 1.845, 1.0}};
  const auto neff = slab_effective_index(stack, 800.0, 0);
  REQUIRE(neff.has_value());
  CHECK(*neff > 1.845);
  CHECK(*neff < 1.86);
  // independent check of the even-mode transcendental: kappa tan(kappa d/2) = gamma
  const double k0 = 2 * M_PI / 0.8;
  const double kap = k0 * std::sqrt(1.86 * 1.86 - *neff * *neff);
  const double gam = k0 * std::sqrt(*neff * *neff - 1.845 * 1.845);
  CHECK(kap * std::tan(kap * 2.5) == doctest::Approx(gam).epsilon(1e-6));
}

TEST_CASE("slab limits: no confinement and the bulk limit") {
  const std::vector<SlabLayer> flat = {{0, 1.86, 1.0}, {5.0, 1.86, 1.0}, {0, 1.86, 1.0}};
  CHECK(!slab_effective_index(flat, 800.0, 0).has_value());

  const std::vector<SlabLayer> thick = {{0, 1.845, 1.0}, {500.0, 1.86, 1.0}, {0, 1.845, 1.0}};
  const auto neff = slab_effective_index(thick, 800.0, 0);
  REQUIRE(neff.has_value());
  CHECK(1.86 - *neff < 1e-6);
}

TEST_CASE("slab mode ordering counts down from the top") {
  const std::vector<SlabLayer> stack = {{0, 1.80, 1.0}, {8.0, 1.86, 1.0}, {0, 1.80, 1.0}};
  const auto m0 = slab_effective_index(stack, 800.0, 0);
  const auto m1 = slab_effective_index(stack, 800.0, 1);
  const auto m2 = slab_effective_index(stack, 800.0, 2);
  REQUIRE((m0 && m1 && m2));
  CHECK(*m0 > *m1);
  CHECK(*m1 > *m2);
}

TEST_CASE("marcatili approximation: bounds and w<->h symmetry") {
  const auto a = marcatili_rect_index(5.0, 4.0, 1.85, 1.84, 800.0, 0, 0);
  REQUIRE(a.has_value());
  CHECK(*a > 1.84);
  CHECK(*a < 1.85);
  const auto b = marcatili_rect_index(4.0, 5.0, 1.85, 1.84, 800.0, 0, 0);
  CHECK(*a == doctest::Approx(*b).epsilon(1e-12));
  const auto mn = marcatili_rect_index(5.0, 4.0, 1.85, 1.84, 800.0, 1, 0);
  const auto nm = marcatili_rect_index(4.0, 5.0, 1.85, 1.84, 800.0, 0, 1);
  REQUIRE((mn && nm));
  CHECK(*mn == doctest::Approx(*nm).epsilon(1e-12));
  // far below cutoff
  CHECK(!marcatili_rect_index(0.2, 0.2, 1.85, 1.84, 800.0, 1, 1).has_value());
}

TEST_CASE("autoconvolution: bandwidth relation, line bookkeeping, symmetry") {
  const double w0 = 2 * M_PI / 0.8;
  const double dw_fwhm = 2 * M_PI * 0.010 / (0.8 * 0.8);  // 10 nm at 800 nm
  const double sigma = dw_fwhm / (2 * std::sqrt(2 * std::log(2.0)));
  const int n = 4001;
  std::vector<double> omega(n);
  std::vector<std::complex<double>> amp(n);
  for (int i = 0; i < n; ++i) {
    omega[i] = w0 - 4 * dw_fwhm + 8 * dw_fwhm * i / (n - 1);
    amp[i] = std::exp(-std::pow(omega[i] - w0, 2) / (4 * sigma * sigma));
  }
  const auto ac = autoconvolution_spectrum(omega, amp);
  // FWHM in wavelength: expect pump_fwhm / (2 sqrt 2)
  std::vector<double> lam(ac.omega2.size()), inten(ac.omega2.size());
  for (size_t i = 0; i < lam.size(); ++i) {
    lam[i] = 2 * M_PI / ac.omega2[ac.omega2.size() - 1 - i] * 1e3;
    inten[i] = ac.intensity[ac.omega2.size() - 1 - i];
  }
  CHECK(fwhm_of_samples(lam, inten) ==
        doctest::Approx(10.0 / (2 * std::sqrt(2.0))).epsilon(0.02));
  // symmetry of the SH spectrum for a real symmetric pump
  for (size_t i = 0; i < ac.intensity.size(); ++i)
    CHECK(ac.intensity[i] ==
          doctest::Approx(ac.intensity[ac.intensity.size() - 1 - i]).epsilon(1e-9));
}

TEST_CASE("two-line pump produces the three pairwise sum-frequency lines") {
  const double w0 = 2 * M_PI / 0.8;
  const double dl = 2 * M_PI * 0.005 / (0.8 * 0.8);  // 5 nm split
  const double sw = dl / 40;                         // narrow lines
  const int n = 6001;
  std::vector<double> omega(n);
  std::vector<std::complex<double>> amp(n);
  for (int i = 0; i < n; ++i) {
    omega[i] = w0 - 2 * dl + 4 * dl * i / (n - 1);
    amp[i] = std::exp(-std::pow(omega[i] - (w0 - dl), 2) / (2 * sw * sw)) +
             std::exp(-std::pow(omega[i] - (w0 + dl), 2) / (2 * sw * sw));
  }
  const auto ac = autoconvolution_spectrum(omega, amp);
  const double peak = *std::max_element(ac.intensity.begin(), ac.intensity.end());
  int lines = 0;
  bool above = false;
  for (double v : ac.intensity) {
    if (v > 0.1 * peak && !above) {
      ++lines;
      above = true;
    }
    if (v < 0.05 * peak) above = false;
  }
  CHECK(lines == 3);
}

TEST_CASE("dichotomic DFT magnitudes match the closed form") {
  for (double duty : {0.5, 0.75, 0.25, 0.375}) {
    for (int m = 1; m <= 5; ++m) {
      const double analytic = 2.0 * std::fabs(std::sin(M_PI * m * duty)) / (M_PI * m);
      CHECK(std::fabs(dichotomic_fourier_magnitude(duty, m) - analytic) < 1e-6);
    }
  }
}

TEST_CASE("fwhm measurement on a known gaussian") {
  const int n = 2001;
  std::vector<double> x(n), y(n);
  for (int i = 0; i < n; ++i) {
    x[i] = -5.0 + 10.0 * i / (n - 1);
    y[i] = std::exp(-0.5 * x[i] * x[i]);
  }
  CHECK(fwhm_of_samples(x, y) == doctest::Approx(2 * std::sqrt(2 * std::log(2.0))).epsilon(1e-4));
}
