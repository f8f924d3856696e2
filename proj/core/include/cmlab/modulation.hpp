#pragma once
// The finite-dimensional modulation system: dynamical laws for (b, eta,
// lambda, gamma), the special power-law solution, fluctuation linearization
// with its diagonalization, adaptive trajectory integration, explicit
// lambda/gamma reconstruction, rate fitting, and shooting into the trapped
// regime.

#include <cstddef>
#include <vector>

#include "cmlab/fit.hpp"

namespace cmlab {

inline constexpr int kOdeLMax = 8;

struct OdeState {
  double s = 1.0;            // renormalized time
  std::vector<double> b;     // length L
  std::vector<double> eta;   // length L
  double lambda = 1.0;
  double gamma = 0.0;
  double t = 0.0;            // physical time, dt = lambda^2 ds
};
void validate(const OdeState& st);

struct OdeDeriv {
  std::vector<double> db, deta;
  double dlambda = 0.0, dgamma = 0.0, dt = 0.0;
};

// (b_k)_s = b_{k+1} - (2k - 1/2) b_1 b_k - (1/2) eta_1 eta_k
// (eta_k)_s = eta_{k+1} - (2k - 1/2) b_1 eta_k + (1/2) eta_1 b_k
// lambda_s = -b_1 lambda,  gamma_s = eta_1 / 2,  t_s = lambda^2
// (b_{L+1} = eta_{L+1} = 0)
OdeDeriv rhs(const OdeState& st);

// c_1 = 2L/(4L-1), c_{k+1} = -((L-k)/(4L-1)) c_k
std::vector<double> special_c(int L);

// b_k = c_k / s^k, eta = 0, lambda = s^{-2L/(4L-1)}, gamma = 0, t = 0
OdeState special_solution(int L, double s);

// admissible default: min(0.02, 1/(16(4L-1))), strictly below the
// 1/(8(4L-1)) ceiling for every L
double default_kappa(int L);

struct SquareMat {
  int n = 0;
  std::vector<double> a;  // row-major n*n
  double at(int i, int j) const { return a[static_cast<std::size_t>(i) * n + j]; }
  double& at(int i, int j) { return a[static_cast<std::size_t>(i) * n + j]; }
};
std::vector<double> mat_apply(const SquareMat& m, const std::vector<double>& x);

// Fluctuation linearization blocks and their diagonalizers.  Rows of p (resp.
// q_mat) are unit-norm left eigenvectors of m_u (resp. m_v), ordered so that
// p * m_u * p_inv = diag(d_u) with d_u = {-1, 2/(4L-1), ..., L/(4L-1)} and
// d_v = {1/(4L-1), ..., L/(4L-1)}.
struct SystemMatrices {
  int L = 0;
  SquareMat m_u, m_v;
  SquareMat p, q_mat;
  SquareMat p_inv, q_inv;
  std::vector<double> d_u, d_v;
};
SystemMatrices matrices(int L);  // 1 <= L <= 8

// U_k = s^k (b_k - c_k/s^k), V_k = s^k eta_k; cal_u = P U, cal_v = Q V
struct FluctState {
  double s = 0.0;
  std::vector<double> u, v;
  std::vector<double> cal_u, cal_v;
};
FluctState fluctuation(const OdeState& st, const SystemMatrices& m);
FluctState fluctuation(const OdeState& st, int L);

using Trajectory = std::vector<OdeState>;

struct StepControl {
  double rel_tol = 1e-10;
  double abs_tol = 1e-13;
  double h_init = 0.0;         // 0 = automatic
  double max_rel_step = 0.05;  // h <= max_rel_step * max(s, 1e-3)
  std::size_t max_steps = 2'000'000;
};

// Embedded 4(5) pair with PI-free step control; throws NumericsError on
// step-size underflow (blow-up-adjacent stiffness).
Trajectory integrate(const OdeState& s0, double s_end,
                     const StepControl& ctl = {});
// Same integrator, but records exactly `samples` states at uniform
// (log_spacing: geometric) s values, first = s0, last = s_end.
Trajectory integrate_sampled(const OdeState& s0, double s_end,
                             std::size_t samples, bool log_spacing = false,
                             const StepControl& ctl = {});

// max over the interior of |s U_s - M_U U|_inf + |s V_s - M_V V|_inf; the
// derivative is taken with 9-point stencils on the trajectory's s-samples,
// the interior drops the one-sided ends
double fluctuation_rhs_check(const Trajectory& traj, const SystemMatrices& m);

struct LambdaGamma {
  double lambda = 0.0;
  double gamma = 0.0;
};

// lambda^{1/2} e^{-i gamma} = (T-t)^L + i d_0 + sum_{k=1}^{L-1} (c_k + i d_k)
// (T-t)^k; c has length L-1 (c_1..c_{L-1}), d has length L (d_0..d_{L-1}).
// lambda = |z|^2, gamma = -arg z; throws NumericsError at a zero of z.
LambdaGamma closed_form_lambda_gamma(double t_final, int L,
                                     const std::vector<double>& c,
                                     const std::vector<double>& d, double t);

struct LambdaGammaPath {
  std::vector<double> s;       // strictly increasing
  std::vector<double> lambda;  // positive
  std::vector<double> gamma;
};

// Reads the hierarchy backwards off a sampled (lambda, gamma)(s) path:
//   b_1 = -(log lambda)_s, eta_1 = 2 gamma_s,
//   b_{k+1} = (b_k)_s + (2k-1/2) b_1 b_k + (1/2) eta_1 eta_k,
//   eta_{k+1} = (eta_k)_s + (2k-1/2) b_1 eta_k - (1/2) eta_1 b_k.
// Rows run k = 1..L+1; the k = L+1 row is the closure residual, summarized
// over the interior window [margin, size - margin).
struct HierarchyRecovery {
  std::vector<double> s;
  std::vector<std::vector<double>> b, eta;  // L+1 rows over the path samples
  std::size_t margin = 0;
  double closure_residual = 0.0;  // max interior (|b_{L+1}| + |eta_{L+1}|) / max|b_1|^{L+1}
};
// `stencil` is the finite-difference width handed to fd_derivative; wider
// stencils push the truncation floor down at the cost of a larger end margin.
HierarchyRecovery hierarchy_from_lambda_gamma(const LambdaGammaPath& path,
                                              int L, int stencil = 9);

// Rate reconstruction from a trajectory: lambda vs s over the last decade,
// blow-up time T = t_end + integral of the fitted lambda(s)^2 tail, lambda vs
// (T - t) over the whole run.  exponent_sensitivity is the change of the
// (T-t)-exponent when T moves by 10% of the extrapolated tail.
struct RateFit {
  FitResult lambda_s;
  FitResult lambda_t;
  double t_blowup = 0.0;
  double tail_correction = 0.0;
  double exponent_sensitivity = 0.0;
};
RateFit rate_fit(const Trajectory& traj);

// Trapping bounds: |calU_1| <= u1_factor s^{-kappa}; the Euclidean norm of
// (calU_2..calU_L, calV_1..calV_L) <= ball_factor s^{-kappa}; the ratio
// b_1^L / lambda^{2L-1/2} inside [ratio_lo, ratio_hi].
struct TrapBounds {
  double kappa = 0.02;
  double u1_factor = 10.0;
  double ball_factor = 1.01;
  double ratio_lo = 0.5;
  double ratio_hi = 2.0;
};
TrapBounds trap_bounds(int L);

// Initial state with calU_1(s0) = stable_u1, the 2L-1 unstable coordinates
// (calU_2..calU_L, calV_1..calV_L) as given, and lambda = b_1^{2L/(4L-1)}
// (ratio exactly 1).
OdeState state_from_unstable(const SystemMatrices& m, double s0,
                             double stable_u1,
                             const std::vector<double>& unstable);

struct TrapResult {
  double horizon = 0.0;  // last s at which all bounds held
  bool reached = false;  // horizon == s_end
  OdeState last;         // first violating state (or the final state)
};
TrapResult trap_horizon(const OdeState& init, const SystemMatrices& m,
                        double s_end, const TrapBounds& tb,
                        const StepControl& ctl = {});

struct ShootResult {
  std::vector<double> unstable;  // found coordinates, length 2L-1
  double horizon = 0.0;
  bool trapped = false;
  std::size_t evaluations = 0;
};

// L = 1: bisection over the single unstable coordinate calV_1(s0) on a
// deliberately asymmetric bracket, driven by the sign of calV_1 at exit.
// L >= 2: compass search over the 2L-1 coordinates maximizing the horizon
// within the evaluation budget.  Trapping horizon target is 100 * s0.
ShootResult shoot_trapped(int L, double s0, double stable_u1, double tol,
                          std::size_t budget = 400);

// Integrates an offset trajectory until it leaves the trapping region (or
// s_cap) and fits the growth of the unstable-coordinate norm against s.
struct ExitFit {
  double exit_s = 0.0;
  bool exited = false;
  FitResult growth;
};
ExitFit exit_rate(int L, double s0, double stable_u1,
                  const std::vector<double>& unstable, double s_cap = 1e12);

}  // namespace cmlab
