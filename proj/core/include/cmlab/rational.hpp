#pragma once
// Exact calculus on the algebra generated by rational functions and
// <y>^{-1} = (1+y^2)^{-1/2}.  Everything the soliton Q = sqrt(2)<y>^{-1}
// generates under d/dy, multiplication, and the Hilbert transform lives in
//
//     A = R + R*w,   w = <y>^{-1},  w^2 = 1/(1+y^2) in R,
//
// where R is the space of rational functions whose only poles sit at +-i.
// Elements of R are kept canonical: a polynomial head plus tail terms
// (a_m + b_m y)/(1+y^2)^m.  The Hilbert transform is evaluated exactly by
// partial fractions at the poles, so operator identities can be checked to
// rounding error instead of discretization error.

#include <array>
#include <vector>

#include "cmlab/common.hpp"
#include "cmlab/grid.hpp"

namespace cmlab::rat {

// Dense real polynomial, ascending coefficients.  c empty == zero.
struct Poly {
  std::vector<double> c;

  Poly() = default;
  explicit Poly(std::vector<double> coeffs) : c(std::move(coeffs)) { trim(); }
  static Poly constant(double a);
  static Poly monomial(int n, double a = 1.0);

  int degree() const { return static_cast<int>(c.size()) - 1; }
  bool is_zero(double tol = 0.0) const;
  double max_abs() const;
  void trim(double tol = 0.0);

  double eval(double y) const;
  Poly derivative() const;
};

Poly operator+(const Poly& a, const Poly& b);
Poly operator-(const Poly& a, const Poly& b);
Poly operator*(const Poly& a, const Poly& b);
Poly operator*(double s, const Poly& a);

// Divide p by (1+y^2): p = q*(1+y^2) + r with deg r <= 1.
void divrem_bracket2(const Poly& p, Poly* q, Poly* r);

// head(y) + sum_m tail[m-1](y) / (1+y^2)^m, canonical when deg tail[m-1] <= 1.
struct Rat {
  Poly head;
  std::vector<Poly> tail;

  Rat() = default;
  explicit Rat(Poly h) : head(std::move(h)) {}
  // num / (1+y^2)^m  (m >= 0), canonicalized.
  static Rat over_bracket2(Poly num, int m);
  static Rat constant(double a);

  bool is_zero(double tol = 0.0) const;
  double max_abs_coeff() const;
  void normalize();

  double eval(double y) const;
};

Rat operator+(const Rat& a, const Rat& b);
Rat operator-(const Rat& a, const Rat& b);
Rat operator*(const Rat& a, const Rat& b);
Rat operator*(double s, const Rat& a);

Rat derivative(const Rat& f);
Rat mul_y(const Rat& f);

// Exact Hilbert transform on R.  Requires the head to be constant after
// normalization (H annihilates constants); throws NumericsError otherwise.
Rat hilbert(const Rat& f);

// u_m = 1/(1+y^2)^m and v_m = y/(1+y^2)^m as canonical Rats.
Rat u_m(int m);
Rat v_m(int m);

// f = a + b*w with w = <y>^{-1}.
struct RatW {
  Rat a;  // rational component
  Rat b;  // coefficient of w

  bool is_zero(double tol = 0.0) const { return a.is_zero(tol) && b.is_zero(tol); }
  double eval(double y) const;
};

RatW operator+(const RatW& f, const RatW& g);
RatW operator-(const RatW& f, const RatW& g);
RatW operator*(double s, const RatW& f);
RatW operator*(const Rat& r, const RatW& f);
RatW operator*(const RatW& f, const RatW& g);

RatW derivative(const RatW& f);
// <y>^{-1} * f  (stays in the algebra: w*(a + b w) = b/(1+y^2) + a w).
RatW bracket_inv(const RatW& f);
// <y> * f; only defined when the rational component vanishes.
Rat bracket_times(const RatW& f);

// Q = sqrt(2) <y>^{-1} and friends.
RatW soliton_q();          // Q
RatW poly_times_q(const Poly& p);  // p(y) Q

// Complex elements as real/imaginary pairs (all operators used here are
// R-linear, so pairs of real elements suffice).
struct CRat {
  Rat re, im;
  Complex eval(double y) const { return {re.eval(y), im.eval(y)}; }
};
struct CRatW {
  RatW re, im;
  bool is_zero(double tol = 0.0) const { return re.is_zero(tol) && im.is_zero(tol); }
  Complex eval(double y) const { return {re.eval(y), im.eval(y)}; }
};

CRat operator+(const CRat& f, const CRat& g);
CRat operator-(const CRat& f, const CRat& g);
CRat operator*(Complex s, const CRat& f);
CRatW operator+(const CRatW& f, const CRatW& g);
CRatW operator-(const CRatW& f, const CRatW& g);
CRatW operator*(Complex s, const CRatW& f);

CRat derivative(const CRat& f);
CRatW derivative(const CRatW& f);
CRat hilbert(const CRat& f);

// ---- soliton-centered operators, exact ----------------------------------
// All of these expect inputs whose RatW components are pure multiples of w
// (i.e. p(y) Q shapes); they throw NumericsError if the input leaves the
// domain on which the expressions stay inside the algebra.

// L_Q f = f' + (1/2) H(Q^2) f + Q H(Re(conj(Q) f))
CRatW l_q(const CRatW& f);
// B_Q f = (y - H) <y>^{-1} f
CRat b_q(const CRatW& f);
// B_Q^* h = <y>^{-1} (y + H) h
CRatW b_q_star(const CRat& h);
// A_Q = d/dy . B_Q ,  A_Q^* = -B_Q^* . d/dy
CRat a_q(const CRatW& f);
CRatW a_q_star(const CRat& h);
// tilde D_Q f = f' + (1/2) Q H(Q f)   (componentwise in re/im)
CRatW d_tilde_q(const CRatW& f);
// H_Q f = -f'' + (1/4) Q^4 f - Q |D|(Q f),  |D| = H d/dy
CRatW h_q(const CRatW& f);
// Generator (1/2 - s + y d/dy); Lambda = lambda_s with s = 0.
CRatW scaling_gen(const CRatW& f, double s = 0.0);

// cal_L_j: acts as L_j^1 on the real part and L_j^2 on the imaginary part,
//   L_j^1 a = d^{j-1}[ u + (y u)' ] - H d^j u,          u = <y>^{-1} a,
//   L_j^2 c = d^{j-1}[ y <y>^{-2} (⟨y⟩c)' ] - H d^{j-1}[ <y>^{-2} (⟨y⟩c)' ].
CRat cal_l(int j, const CRatW& f);

// Sample on a grid (real part only for Rat/RatW).
Field sample(const Rat& f, const GridSpec& g);
Field sample(const RatW& f, const GridSpec& g);
Field sample(const CRat& f, const GridSpec& g);
Field sample(const CRatW& f, const GridSpec& g);

}  // namespace cmlab::rat
