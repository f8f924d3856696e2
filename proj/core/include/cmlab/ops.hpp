#pragma once
// Operator calculus on grid fields: solitons, covariant derivatives, the
// linearized operators and their adjoints, the conjugated A_Q/B_Q family,
// the ladder operators cal_l, and scaling generators.
//
// Everything here is a left-to-right composition of spectral_grid primitives;
// no simplification is applied. Identity checks live in the tests and in the
// verify-identities harness, which report interior-window residuals.

#include <cstdint>
#include <string>

#include "cmlab/grid.hpp"

namespace cmlab {

// Hierarchy depth cap. Iterated applications of d_tilde_v lose effective
// digits as the symbol grows; 2*kLMax stays within f64 headroom at n=4096.
inline constexpr int kLMax = 6;

// Sampled closed forms: Q = sqrt(2)<x>^{-1} and the chiral R = sqrt(2)/(x+i).
Field soliton_q(const GridSpec& g);
Field soliton_chiral(const GridSpec& g);

// D_v f = f' + (1/2) H(|v|^2) f
Field d_v(const Field& v, const Field& f);
// D~_v f = f' + (1/2) v H(conj(v) f)
Field d_tilde_v(const Field& v, const Field& f);
// D~_v^j f by iteration; requires 0 <= j <= 2*kLMax.
Field d_tilde_pow(const Field& v, const Field& f, int j);

// Linearization of v -> D_v v at v, and its adjoint for (.,.)_r:
//   L_v f  =  f' + (1/2)H(|v|^2)f + v H(Re(conj(v) f))
//   L_v* f = -f' + (1/2)H(|v|^2)f - v H(Re(conj(v) f))
Field l_v(const Field& v, const Field& f);
Field l_v_star(const Field& v, const Field& f);
Field l_q(const Field& f);  // v = Q sampled on f's grid
Field l_q_star(const Field& f);

// Nonlinear remainder in D_{v+e}(v+e) = D_v v + L_v e + N_v(e):
//   N_v(e) = e H(Re(conj(v) e)) + (1/2)(v+e) H(|e|^2)
Field n_v(const Field& v, const Field& eps);

// Lax operator H_v f = -f'' + (1/4)|v|^4 f - v |D|(conj(v) f).
Field h_v(const Field& v, const Field& f);

// B_Q = (x - H)<x>^{-1},  B_Q* = <x>^{-1}(x + H),  A_Q = d/dx B_Q,
// A_Q* = -B_Q* d/dx.
Field b_q(const Field& f);
Field b_q_star(const Field& f);
Field a_q(const Field& f);
Field a_q_star(const Field& f);

// Ladder operator, componentwise cal_l^1 on Re f plus i cal_l^2 on Im f:
//   cal_l^1 f = d^{j-1}(1 + d y)(<y>^{-1}f) - H d^j (<y>^{-1}f)
//   cal_l^2 g = d^{j-1}[ y<y>^{-2} d(<y>g) ] - H d^{j-1}[ <y>^{-2} d(<y>g) ]
// Requires 1 <= j <= 2*kLMax. Meaningful for inputs whose bracket-weighted
// intermediates stay decaying (soliton-weighted or band-limited fields);
// polynomially growing inputs belong to the exact path in rational.hpp,
// where the same operator acts on closed forms without a seam.
Field cal_l(int j, const Field& f);

// Scaling generator Lambda_s f = (1/2 - s + x d/dx) f; Lambda = Lambda_0.
Field scaling_gen(const Field& f, double s = 0.0);

// min of ||L_Q v|| / ||v||_{H^1_adapted} over `trials` random smooth fields
// projected off span{iQ, LambdaQ}. Diagnostic only: the continuum coercivity
// constant is not known, so no threshold is attached.
double coercivity_probe(const GridSpec& g, std::uint64_t seed, int trials);

// Row format for the verify-identities harness.
struct OperatorReport {
  std::string name;
  double residual_l2 = 0.0;  // relative residual over the interior window
  double window = 0.0;       // window half-width used
  GridSpec grid;
};

}  // namespace cmlab
