#include "cmlab/ops.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace cmlab {

namespace {

void require_same_grid(const Field& a, const Field& b, const char* who) {
  CMLAB_REQUIRE(a.grid == b.grid, std::string(who) + ": grid mismatch");
}

// Repeated first-order spectral derivative; avoids the single-call order cap
// for ladder depths j-1 > 8.
Field dpow(Field f, int j) {
  for (int i = 0; i < j; ++i) f = derivative(f);
  return f;
}

}  // namespace

Field soliton_q(const GridSpec& g) {
  return make_field(g, [](double x) {
    return Complex{std::sqrt(2.0) / std::sqrt(1.0 + x * x), 0.0};
  });
}

Field soliton_chiral(const GridSpec& g) {
  return make_field(g, [](double x) { return std::sqrt(2.0) / Complex{x, 1.0}; });
}

Field d_v(const Field& v, const Field& f) {
  require_same_grid(v, f, "d_v");
  return derivative(f) + 0.5 * (hilbert(abs2(v)) * f);
}

Field d_tilde_v(const Field& v, const Field& f) {
  require_same_grid(v, f, "d_tilde_v");
  return derivative(f) + 0.5 * (v * hilbert(conj(v) * f));
}

Field d_tilde_pow(const Field& v, const Field& f, int j) {
  CMLAB_REQUIRE(j >= 0 && j <= 2 * kLMax, "d_tilde_pow: j out of range");
  Field out = f;
  for (int i = 0; i < j; ++i) out = d_tilde_v(v, out);
  return out;
}

Field l_v(const Field& v, const Field& f) {
  require_same_grid(v, f, "l_v");
  return derivative(f) + 0.5 * (hilbert(abs2(v)) * f) +
         v * hilbert(real_part(conj(v) * f));
}

Field l_v_star(const Field& v, const Field& f) {
  require_same_grid(v, f, "l_v_star");
  return 0.5 * (hilbert(abs2(v)) * f) - derivative(f) -
         v * hilbert(real_part(conj(v) * f));
}

Field l_q(const Field& f) { return l_v(soliton_q(f.grid), f); }

Field l_q_star(const Field& f) { return l_v_star(soliton_q(f.grid), f); }

Field n_v(const Field& v, const Field& eps) {
  require_same_grid(v, eps, "n_v");
  return eps * hilbert(real_part(conj(v) * eps)) +
         0.5 * ((v + eps) * hilbert(abs2(eps)));
}

Field h_v(const Field& v, const Field& f) {
  require_same_grid(v, f, "h_v");
  const Field vv = abs2(v);
  return 0.25 * ((vv * vv) * f) - derivative(f, 2) - v * abs_d(conj(v) * f);
}

Field b_q(const Field& f) {
  const Field w = mul_japanese_bracket(f, -1.0);
  return mul_x(w) - hilbert(w);
}

Field b_q_star(const Field& f) {
  return mul_japanese_bracket(mul_x(f) + hilbert(f), -1.0);
}

Field a_q(const Field& f) { return derivative(b_q(f)); }

Field a_q_star(const Field& f) {
  return Complex{-1.0, 0.0} * b_q_star(derivative(f));
}

Field cal_l(int j, const Field& f) {
  CMLAB_REQUIRE(j >= 1 && j <= 2 * kLMax, "cal_l: j out of range");
  // First component on Re f.
  const Field w = mul_japanese_bracket(real_part(f), -1.0);
  const Field first = dpow(w + derivative(mul_x(w)), j - 1) - hilbert(dpow(w, j));
  // Second component on Im f.
  const Field u = mul_japanese_bracket(
      derivative(mul_japanese_bracket(imag_part(f), 1.0)), -2.0);
  const Field second = dpow(mul_x(u), j - 1) - hilbert(dpow(u, j - 1));
  return first + iu * second;
}

Field scaling_gen(const Field& f, double s) {
  return Complex{0.5 - s, 0.0} * f + mul_x(derivative(f));
}

double coercivity_probe(const GridSpec& g, std::uint64_t seed, int trials) {
  CMLAB_REQUIRE(trials > 0, "coercivity_probe: trials must be positive");
  const Field q = soliton_q(g);
  const Field k1 = scaling_gen(q);  // LambdaQ
  const Field k2 = iu * q;          // iQ
  const double n1 = inner_r(k1, k1);
  const double n2 = inner_r(k2, k2);
  double best = std::numeric_limits<double>::infinity();
  for (int t = 0; t < trials; ++t) {
    Field v = random_smooth_field(g, seed + static_cast<std::uint64_t>(t));
    v -= Complex{inner_r(v, k1) / n1, 0.0} * k1;
    v -= Complex{inner_r(v, k2) / n2, 0.0} * k2;
    const double denom = norm_adapted(v, 1);
    if (denom > 0.0) best = std::min(best, l2_norm(l_q(v)) / denom);
  }
  return best;
}

}  // namespace cmlab
