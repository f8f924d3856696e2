#include "cmlab/conserved.hpp"

#include <algorithm>
#include <cmath>

#include "cmlab/common.hpp"
#include "cmlab/ops.hpp"

namespace cmlab {

double mass(const Field& v) { return integrate_real(abs2(v)); }

double momentum(const Field& v) {
  return std::imag(integrate(conj(v) * derivative(v)));
}

double energy_gauge(const Field& v) {
  const Field dv = derivative(v) + 0.5 * (hilbert(abs2(v)) * v);
  const double nrm = l2_norm(dv);
  return 0.5 * nrm * nrm;
}

double energy_chiral(const Field& u) {
  const Field du = derivative(u) - iu * (szego(abs2(u)) * u);
  const double nrm = l2_norm(du);
  return 0.5 * nrm * nrm;
}

double momentum_chiral(const Field& u) {
  const Field a2 = abs2(u);
  const double quartic = integrate_real(a2 * a2);
  return std::imag(integrate(conj(u) * derivative(u))) - 0.5 * quartic;
}

std::vector<double> hierarchy(const Field& v, int j_max) {
  CMLAB_REQUIRE(j_max >= 0 && j_max <= 2 * kLMax,
                "hierarchy: j_max out of range");
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(j_max) + 1);
  Field w = v;
  out.push_back(inner_r(w, v));
  for (int j = 1; j <= j_max; ++j) {
    w = d_tilde_v(v, w);
    out.push_back(inner_r(w, v));
  }
  return out;
}

double chirality_deficit(const Field& u) { return l2_norm(u - szego(u)); }

double relative_drift(double now, double initial) {
  return std::abs(now - initial) / std::max(std::abs(initial), 1e-14);
}

ConservedReport conserved_report(double t, const Field& v, int j_max,
                                 const Field* chiral_of) {
  ConservedReport r;
  r.t = t;
  r.mass = mass(v);
  r.energy_gauge = energy_gauge(v);
  r.momentum = momentum(v);
  r.hierarchy = hierarchy(v, j_max);
  r.chirality_deficit = chirality_deficit(chiral_of ? *chiral_of : v);
  return r;
}

}  // namespace cmlab
