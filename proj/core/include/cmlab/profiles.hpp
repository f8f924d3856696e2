#pragma once
// Blow-up profiles and initial data: the generalized-kernel corrections
// T_{2k-1}, their sources P_{2k-1}, the kernel elements of the linearized
// operators, smooth cutoffs, the orthogonality functionals Z_k, and the
// initial-data builder.

#include <array>

#include "cmlab/grid.hpp"
#include "cmlab/rational.hpp"

namespace cmlab {

// Scaling / phase / profile amplitudes (lambda, gamma, b_k, eta_k).  Also
// used for ring-decorated initial values -- same structure, distinct
// instance.
struct ModParams {
  int L = 1;
  double lambda = 1.0;
  double gamma = 0.0;
  std::vector<double> b;    // length L
  std::vector<double> eta;  // length L
};

void validate(const ModParams& p);

// Initial-data recipe: v0 = [Q + sum_j T_{2j-1}(b_j, eta_j) chi_{delta/lambda}
// + eps0]_{lambda, gamma}.  An empty eps0 means zero.
struct InitConfig {
  ModParams params;
  double delta_ring = 4.0;  // cutoff scale, must satisfy delta/lambda >= 4
  Field eps0;
  double s0 = 1.0;
};

void validate(const InitConfig& cfg, const GridSpec& g);

// p_k(y) = (1+(-1)^k)/2 + y^2
Field p_poly(int k, const GridSpec& g);

// T_{2k-1} and P_{2k-1}.  Exact forms first (closed rational calculus), grid
// samples second.  Note the eta-sign: the ladder identity
// cal_L_{2k-1} T_{2k-1} = B_Q P_{2k-1} forces
//   T_{2k-1} = -((-i)^{k-1}/(4k(2k-2)!)) (i b y^{2k-2} p_k Q
//                                          + eta y^{2k-2} p_{k-1} Q),
// i.e. T_1 = -i b (y^2/4) Q - eta ((1+y^2)/4) Q.
rat::CRatW t_profile_exact(int k, double bk, double etak);
rat::CRatW p_profile_exact(int k, double bk, double etak);
Field t_profile(int k, double bk, double etak, const GridSpec& g);
Field p_profile(int k, double bk, double etak, const GridSpec& g);

// K_1 = LambdaQ, K_2 = iQ, K_3 = iy^2 Q, K_4 = (1+y^2)Q, K*_1 = iyQ,
// K*_2 = yQ.
struct KernelElements {
  Field k1, k2, k3, k4;
  Field k1_ring, k2_ring;
};
KernelElements kernel_elements(const GridSpec& g);

// Smooth even cutoff: 1 on |x| <= R, 0 on |x| >= 2R, built from the
// psi-ratio transition chi(t) = psi(2-t)/(psi(2-t)+psi(t-1)), psi(t)=e^{-1/t}.
// Requires 2R < box_len/2.
Field cutoff_chi(double R, const GridSpec& g);

// Compactly supported duals: (K_j, Z_k)_r = delta_jk plus the transversality
// moments (i y^{2m+2} Q, Z_k)_r = (y^{2m}(1+y^2) Q, Z_k)_r = 0 for
// m = 1..l_max-1.  Solved least-norm over a 24-atom bump dictionary
// supported in |y| <= 10.
std::array<Field, 4> zk_basis(const GridSpec& g, int l_max = 3);

struct InitReport {
  double regime_ratio = 0.0;  // b1^L / lambda^{2L-1/2}
  bool in_regime = false;     // within [1/1.1, 1.1]
  double mass_minus_2pi = 0.0;
};

Field initial_data(const InitConfig& cfg, const GridSpec& g);
InitReport initial_data_report(const InitConfig& cfg, const GridSpec& g);

}  // namespace cmlab
