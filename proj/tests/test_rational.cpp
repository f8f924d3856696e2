// Exact-arithmetic checks for the rational calculus around Q = sqrt(2)<y>^{-1}.
// Everything here is algebra on coefficients; tolerances only absorb rounding.
#include "doctest.h"

#include <cmath>

#include "cmlab/rational.hpp"

using namespace cmlab;
using namespace cmlab::rat;

namespace {

const double kSqrt2 = std::sqrt(2.0);

double diff_norm(const Rat& a, const Rat& b) {
  Rat d = a - b;
  return d.max_abs_coeff();
}

double diff_norm(const RatW& a, const RatW& b) {
  return std::max(diff_norm(a.a, b.a), diff_norm(a.b, b.b));
}

double diff_norm(const CRat& a, const CRat& b) {
  return std::max(diff_norm(a.re, b.re), diff_norm(a.im, b.im));
}

double diff_norm(const CRatW& a, const CRatW& b) {
  return std::max(diff_norm(a.re, b.re), diff_norm(a.im, b.im));
}

CRatW real_profile(const RatW& f) { return {f, RatW{}}; }
CRatW imag_profile(const RatW& f) { return {RatW{}, f}; }

}  // namespace

TEST_CASE("poly eval / derivative / divrem") {
  Poly p({1.0, 0.0, 3.0, 2.0});  // 1 + 3y^2 + 2y^3
  CHECK(p.eval(2.0) == doctest::Approx(1 + 12 + 16).epsilon(1e-15));
  Poly dp = p.derivative();
  CHECK(dp.eval(2.0) == doctest::Approx(6 * 2 + 6 * 4).epsilon(1e-15));
  Poly q, r;
  divrem_bracket2(p, &q, &r);
  // p = q(1+y^2) + r, checked at sample points
  for (double y : {0.3, -1.7, 2.5}) {
    CHECK(q.eval(y) * (1 + y * y) + r.eval(y) ==
          doctest::Approx(p.eval(y)).epsilon(1e-14));
  }
  CHECK(r.degree() <= 1);
}

TEST_CASE("rat normalize keeps values") {
  // y^4/(1+y^2)^2 should normalize with head 1
  Rat f = Rat::over_bracket2(Poly::monomial(4), 2);
  for (double y : {0.0, 1.0, -2.2, 7.5}) {
    double u = 1.0 / (1 + y * y);
    CHECK(f.eval(y) == doctest::Approx(y * y * y * y * u * u).epsilon(1e-14));
  }
  CHECK(f.head.degree() == 0);
  CHECK(f.head.eval(0) == doctest::Approx(1.0));
}

TEST_CASE("hilbert: base identities at first pole order") {
  // H[1/(1+y^2)] = y/(1+y^2) and H[y/(1+y^2)] = -1/(1+y^2)
  CHECK(diff_norm(hilbert(u_m(1)), v_m(1)) < 1e-15);
  CHECK(diff_norm(hilbert(v_m(1)), (-1.0) * u_m(1)) < 1e-15);
}

TEST_CASE("hilbert: arctan-kernel pair at second pole order") {
  // H[2y^2/(1+y^2)^2] = (y^3-y)/(1+y^2)^2
  Rat lhs = hilbert(Rat::over_bracket2(Poly({0.0, 0.0, 2.0}), 2));
  Rat rhs = Rat::over_bracket2(Poly({0.0, -1.0, 0.0, 1.0}), 2);
  CHECK(diff_norm(lhs, rhs) < 1e-14);
  // H[2y^3/(1+y^2)^2] = -(3y^2+1)/(1+y^2)^2
  Rat lhs2 = hilbert(Rat::over_bracket2(Poly({0.0, 0.0, 0.0, 2.0}), 2));
  Rat rhs2 = Rat::over_bracket2(Poly({-1.0, 0.0, -3.0}), 2);
  CHECK(diff_norm(lhs2, rhs2) < 1e-14);
}

TEST_CASE("hilbert: involution and growth guard") {
  // H^2 = -I on decaying rationals
  Rat f = u_m(2) + 3.0 * v_m(3) - 0.5 * v_m(1);
  CHECK(diff_norm(hilbert(hilbert(f)), (-1.0) * f) < 1e-13);
  // polynomial growth is rejected
  CHECK_THROWS_AS(hilbert(Rat(Poly::monomial(1))), NumericsError);
  // constants are annihilated
  CHECK(hilbert(Rat::constant(3.0)).is_zero(1e-15));
}

TEST_CASE("soliton basics: Q, derivative, Q^3") {
  RatW q = soliton_q();
  CHECK(q.eval(0.0) == doctest::Approx(kSqrt2));
  CHECK(q.eval(1.0) == doctest::Approx(1.0));
  // d/dy (yQ) = Q^3/2
  RatW yq = poly_times_q(Poly::monomial(1));
  RatW q3 = q * (q * q);
  CHECK(diff_norm(derivative(yq), 0.5 * q3) < 1e-14);
  // D_Q Q = Q' + (1/2)H(Q^2) Q = 0
  RatW q2 = q * q;  // Q^2 has no w component
  CHECK(q2.b.is_zero());
  RatW dq = derivative(q) + (0.5 * hilbert(q2.a)) * q;
  CHECK(dq.is_zero(1e-14));
}

TEST_CASE("B_Q closed forms") {
  RatW q = soliton_q();
  RatW yq = poly_times_q(Poly::monomial(1));
  // B_Q Q = 0, B_Q(yQ) = sqrt(2)
  CHECK(b_q(real_profile(q)).re.is_zero(1e-14));
  Rat bq_yq = b_q(real_profile(yq)).re;
  CHECK(diff_norm(bq_yq, Rat::constant(kSqrt2)) < 1e-14);
  // B_Q(yQ^3) = sqrt(2) <y>^{-2}
  RatW yq3 = Rat(Poly::monomial(1)) * (q * (q * q));
  CHECK(diff_norm(b_q(real_profile(yq3)).re, kSqrt2 * u_m(1)) < 1e-14);
}

TEST_CASE("A_Q kernel = span{Q, yQ}") {
  CHECK(a_q(real_profile(soliton_q())).re.is_zero(1e-14));
  CHECK(a_q(real_profile(poly_times_q(Poly::monomial(1)))).re.is_zero(1e-14));
  // and not, e.g., y^2 Q
  CHECK_FALSE(a_q(real_profile(poly_times_q(Poly::monomial(2)))).re.is_zero(1e-6));
}

TEST_CASE("B_Q B_Q^* = I on decaying rationals") {
  Rat h = u_m(1) + 3.0 * v_m(2) - 2.0 * u_m(3);
  CRat hh{h, 0.25 * v_m(1)};
  CHECK(diff_norm(b_q(b_q_star(hh)), hh) < 1e-13);
}

TEST_CASE("B_Q^* B_Q = I - (2pi)^{-1} Q (Q, .)_r") {
  // f = <y>^{-2} Q: (Q, f)_r = 2 int (1+y^2)^{-2} = pi, so expect f - Q/2.
  RatW f = u_m(1) * soliton_q();
  CRatW lhs = b_q_star(b_q(real_profile(f)));
  RatW expect = f - 0.5 * soliton_q();
  CHECK(diff_norm(lhs, real_profile(expect)) < 1e-14);
}

TEST_CASE("scaling generator and L_Q kernel") {
  RatW q = soliton_q();
  // Lambda Q = (1/2 + y d/dy) Q = (1/2)(1-y^2)<y>^{-2} Q
  CRatW lam_q = scaling_gen(real_profile(q));
  RatW expect = (0.5 * (Rat(Poly({1.0, 0.0, -1.0})) * u_m(1))) * q;
  CHECK(diff_norm(lam_q, real_profile(expect)) < 1e-14);
  // L_Q(iQ) = 0 and L_Q(Lambda Q) = 0
  CHECK(l_q(imag_profile(q)).is_zero(1e-14));
  CHECK(l_q(lam_q).is_zero(1e-13));
}

TEST_CASE("H_Q = A_Q^* A_Q = -tilde D_Q tilde D_Q") {
  // Inputs must decay for every intermediate Hilbert transform to stay in
  // the algebra (growing p(y)Q leaves the exact domain of tilde D_Q).
  CRatW f{(u_m(1) + 2.0 * v_m(1)) * soliton_q(),
          (v_m(2) - 0.5 * u_m(1)) * soliton_q()};
  CRatW via_h = h_q(f);
  CRatW via_a = a_q_star(a_q(f));
  CRatW via_d = Complex(-1.0, 0.0) * d_tilde_q(d_tilde_q(f));
  CHECK(diff_norm(via_h, via_a) < 1e-12);
  CHECK(diff_norm(via_h, via_d) < 1e-12);
  // tilde D_Q Q = 0
  CHECK(d_tilde_q(real_profile(soliton_q())).is_zero(1e-14));
}

TEST_CASE("cal_l agrees with the composition d^{j-1} B_Q L_Q") {
  CRatW f{poly_times_q(Poly({0.5, 0.0, 1.0})),  // (1/2 + y^2) Q
          poly_times_q(Poly({0.0, 1.0, 0.0, 0.25}))};
  for (int j = 1; j <= 5; ++j) {
    CRat composed = b_q(l_q(f));
    for (int it = 0; it < j - 1; ++it) composed = derivative(composed);
    CHECK(diff_norm(cal_l(j, f), composed) < 1e-11);
  }
}

TEST_CASE("kernel ladder of cal_l and the diagonal constant") {
  // L_n^1(y^{m-1}(1+y^2)Q) = 0 and L_n^2(y^{m+1}Q) = 0 for 1 <= m <= n-1;
  // at m = n both equal sqrt(2) (n+1) (n-1)!.
  for (int n = 1; n <= 6; ++n) {
    for (int m = 1; m < n; ++m) {
      Poly pm = Poly::monomial(m - 1) * Poly({1.0, 0.0, 1.0});
      CRat r1 = cal_l(n, real_profile(poly_times_q(pm)));
      CHECK(r1.re.is_zero(1e-10));
      CRat r2 = cal_l(n, imag_profile(poly_times_q(Poly::monomial(m + 1))));
      CHECK(r2.im.is_zero(1e-10));
    }
    double pnn = kSqrt2 * (n + 1);
    for (int t = 1; t < n; ++t) pnn *= t;  // sqrt(2)(n+1)(n-1)!
    Poly pm = Poly::monomial(n - 1) * Poly({1.0, 0.0, 1.0});
    CRat d1 = cal_l(n, real_profile(poly_times_q(pm)));
    CHECK(diff_norm(d1.re, Rat::constant(pnn)) < 1e-10 * pnn);
    CRat d2 = cal_l(n, imag_profile(poly_times_q(Poly::monomial(n + 1))));
    CHECK(diff_norm(d2.im, Rat::constant(pnn)) < 1e-10 * pnn);
  }
}

TEST_CASE("sampling matches pointwise evaluation") {
  GridSpec g;
  g.n = 64;
  g.box_len = 32.0;
  RatW q = soliton_q();
  Field fq = sample(q, g);
  for (size_t j = 0; j < g.n; j += 7) {
    double y = g.x(j);
    CHECK(fq.v[j].real() == doctest::Approx(kSqrt2 / std::sqrt(1 + y * y)));
    CHECK(fq.v[j].imag() == 0.0);
  }
}
