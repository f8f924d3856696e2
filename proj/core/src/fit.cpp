#include "cmlab/fit.hpp"

#include <algorithm>
#include <cmath>

#include "cmlab/common.hpp"

namespace cmlab {

FitResult fit_power_law(const std::vector<double>& xs,
                        const std::vector<double>& ys) {
  CMLAB_REQUIRE(xs.size() == ys.size(), "fit_power_law: size mismatch");
  CMLAB_REQUIRE(xs.size() >= 16, "fit_power_law: need at least 16 points");
  double xmin = xs[0], xmax = xs[0];
  for (std::size_t i = 0; i < xs.size(); ++i) {
    CMLAB_REQUIRE(std::isfinite(xs[i]) && xs[i] > 0.0 &&
                      std::isfinite(ys[i]) && ys[i] > 0.0,
                  "fit_power_law: data must be positive and finite");
    xmin = std::min(xmin, xs[i]);
    xmax = std::max(xmax, xs[i]);
  }
  CMLAB_REQUIRE(xmax >= 10.0 * xmin, "fit_power_law: span at least one decade");

  const double n = static_cast<double>(xs.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double lx = std::log(xs[i]), ly = std::log(ys[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  FitResult r;
  r.exponent = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  const double intercept = (sy - r.exponent * sx) / n;
  r.prefactor = std::exp(intercept);
  double ss_res = 0, ss_tot = 0;
  const double ymean = sy / n;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double ly = std::log(ys[i]);
    const double fit = intercept + r.exponent * std::log(xs[i]);
    ss_res += (ly - fit) * (ly - fit);
    ss_tot += (ly - ymean) * (ly - ymean);
  }
  r.r_squared = ss_tot > 0.0 ? std::clamp(1.0 - ss_res / ss_tot, 0.0, 1.0) : 1.0;
  r.window_lo = xmin;
  r.window_hi = xmax;
  return r;
}

namespace {

// Fornberg weight recursion: weights of the m-th derivative at z over nodes x.
std::vector<double> fornberg_weights(double z, const double* x, int n, int m) {
  std::vector<std::vector<double>> c(n, std::vector<double>(m + 1, 0.0));
  double c1 = 1.0;
  double c4 = x[0] - z;
  c[0][0] = 1.0;
  for (int i = 1; i < n; ++i) {
    const int mn = std::min(i, m);
    double c2 = 1.0;
    const double c5 = c4;
    c4 = x[i] - z;
    for (int j = 0; j < i; ++j) {
      const double c3 = x[i] - x[j];
      c2 *= c3;
      if (j == i - 1) {
        for (int k = mn; k >= 1; --k) {
          c[i][k] = c1 * (k * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
        }
        c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
      }
      for (int k = mn; k >= 1; --k) {
        c[j][k] = (c4 * c[j][k] - k * c[j][k - 1]) / c3;
      }
      c[j][0] = c4 * c[j][0] / c3;
    }
    c1 = c2;
  }
  std::vector<double> w(n);
  for (int i = 0; i < n; ++i) w[i] = c[i][m];
  return w;
}

}  // namespace

std::vector<double> fd_derivative(const std::vector<double>& x,
                                  const std::vector<double>& f, int stencil) {
  const std::size_t n = x.size();
  CMLAB_REQUIRE(f.size() == n, "fd_derivative: size mismatch");
  CMLAB_REQUIRE(stencil >= 3 && stencil % 2 == 1,
                "fd_derivative: stencil must be odd and >= 3");
  CMLAB_REQUIRE(n >= static_cast<std::size_t>(stencil),
                "fd_derivative: too few samples for the stencil");
  for (std::size_t i = 1; i < n; ++i) {
    CMLAB_REQUIRE(x[i] > x[i - 1], "fd_derivative: nodes must increase");
  }
  std::vector<double> out(n);
  const int half = stencil / 2;
  for (std::size_t i = 0; i < n; ++i) {
    const long lo = std::clamp<long>(static_cast<long>(i) - half, 0,
                                     static_cast<long>(n) - stencil);
    const auto w = fornberg_weights(x[i], x.data() + lo, stencil, 1);
    double d = 0.0;
    for (int j = 0; j < stencil; ++j) d += w[j] * f[lo + j];
    out[i] = d;
  }
  return out;
}

}  // namespace cmlab
