#include "cmlab/modulation.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <complex>

#include "cmlab/common.hpp"

namespace cmlab {

namespace {

bool finite_all(const std::vector<double>& v) {
  for (double x : v) {
    if (!std::isfinite(x)) return false;
  }
  return true;
}

}  // namespace

void validate(const OdeState& st) {
  const std::size_t len = st.b.size();
  CMLAB_REQUIRE(len >= 1 && len <= static_cast<std::size_t>(kOdeLMax),
                "OdeState: L out of range");
  CMLAB_REQUIRE(st.eta.size() == len, "OdeState: b/eta length mismatch");
  CMLAB_REQUIRE(st.lambda > 0.0 && std::isfinite(st.lambda),
                "OdeState: lambda must be positive");
  CMLAB_REQUIRE(std::isfinite(st.s) && std::isfinite(st.gamma) &&
                    std::isfinite(st.t) && finite_all(st.b) &&
                    finite_all(st.eta),
                "OdeState: entries must be finite");
}

OdeDeriv rhs(const OdeState& st) {
  validate(st);
  const int L = static_cast<int>(st.b.size());
  OdeDeriv d;
  d.db.resize(L);
  d.deta.resize(L);
  const double b1 = st.b[0];
  const double e1 = st.eta[0];
  for (int k = 1; k <= L; ++k) {
    const double b_next = k < L ? st.b[k] : 0.0;
    const double e_next = k < L ? st.eta[k] : 0.0;
    const double ck = 2.0 * k - 0.5;
    d.db[k - 1] = b_next - ck * b1 * st.b[k - 1] - 0.5 * e1 * st.eta[k - 1];
    d.deta[k - 1] = e_next - ck * b1 * st.eta[k - 1] + 0.5 * e1 * st.b[k - 1];
  }
  d.dlambda = -b1 * st.lambda;
  d.dgamma = 0.5 * e1;
  d.dt = st.lambda * st.lambda;
  return d;
}

std::vector<double> special_c(int L) {
  CMLAB_REQUIRE(L >= 1 && L <= kOdeLMax, "special_c: L out of range");
  std::vector<double> c(L);
  const double den = 4.0 * L - 1.0;
  c[0] = 2.0 * L / den;
  for (int k = 1; k < L; ++k) c[k] = -((L - k) / den) * c[k - 1];
  return c;
}

OdeState special_solution(int L, double s) {
  CMLAB_REQUIRE(s > 0.0 && std::isfinite(s), "special_solution: s must be > 0");
  const auto c = special_c(L);
  OdeState st;
  st.s = s;
  st.b.resize(L);
  st.eta.assign(L, 0.0);
  for (int k = 1; k <= L; ++k) st.b[k - 1] = c[k - 1] / std::pow(s, k);
  st.lambda = std::pow(s, -2.0 * L / (4.0 * L - 1.0));
  return st;
}

double default_kappa(int L) {
  CMLAB_REQUIRE(L >= 1 && L <= kOdeLMax, "default_kappa: L out of range");
  return std::min(0.02, 1.0 / (16.0 * (4.0 * L - 1.0)));
}

std::vector<double> mat_apply(const SquareMat& m, const std::vector<double>& x) {
  CMLAB_REQUIRE(x.size() == static_cast<std::size_t>(m.n),
                "apply: dimension mismatch");
  std::vector<double> y(m.n, 0.0);
  for (int i = 0; i < m.n; ++i) {
    for (int j = 0; j < m.n; ++j) y[i] += m.at(i, j) * x[j];
  }
  return y;
}

namespace {

SquareMat from_eigen(const Eigen::MatrixXd& m) {
  SquareMat out;
  out.n = static_cast<int>(m.rows());
  out.a.resize(static_cast<std::size_t>(out.n) * out.n);
  for (int i = 0; i < out.n; ++i) {
    for (int j = 0; j < out.n; ++j) out.at(i, j) = m(i, j);
  }
  return out;
}

// Rows of the returned matrix are unit left eigenvectors of m for the given
// (distinct) eigenvalues, computed as SVD null vectors of (m^T - d I).
Eigen::MatrixXd left_eigenvectors(const Eigen::MatrixXd& m,
                                  const std::vector<double>& d) {
  const int n = static_cast<int>(m.rows());
  Eigen::MatrixXd p(n, n);
  for (int i = 0; i < n; ++i) {
    Eigen::MatrixXd shifted =
        m.transpose() - d[i] * Eigen::MatrixXd::Identity(n, n);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(shifted, Eigen::ComputeFullV);
    if (svd.singularValues()(n - 1) > 1e-8 * (1.0 + m.norm())) {
      throw NumericsError(
          "matrices: expected eigenvalue is not in the spectrum "
          "(construction bug)");
    }
    Eigen::VectorXd row = svd.matrixV().col(n - 1);
    int imax = 0;
    for (int j = 1; j < n; ++j) {
      if (std::abs(row(j)) > std::abs(row(imax))) imax = j;
    }
    if (row(imax) < 0.0) row = -row;
    p.row(i) = row.transpose();
  }
  return p;
}

}  // namespace

SystemMatrices matrices(int L) {
  CMLAB_REQUIRE(L >= 1 && L <= kOdeLMax, "matrices: L out of range");
  const auto c = special_c(L);
  const double den = 4.0 * L - 1.0;

  Eigen::MatrixXd mu = Eigen::MatrixXd::Zero(L, L);
  Eigen::MatrixXd mv = Eigen::MatrixXd::Zero(L, L);
  mu(0, 0) = -(2.0 * L + 1.0) / den;
  mv(0, 0) = (2.0 * L - 1.0) / den;
  for (int k = 2; k <= L; ++k) {
    mu(k - 1, 0) = -(2.0 * k - 0.5) * c[k - 1];
    mv(k - 1, 0) = 0.5 * c[k - 1];
    mu(k - 1, k - 1) = (L - k) / den;
    mv(k - 1, k - 1) = (L - k) / den;
  }
  for (int i = 0; i + 1 < L; ++i) {
    mu(i, i + 1) = 1.0;
    mv(i, i + 1) = 1.0;
  }

  SystemMatrices out;
  out.L = L;
  out.d_u.resize(L);
  out.d_v.resize(L);
  out.d_u[0] = -1.0;
  for (int k = 2; k <= L; ++k) out.d_u[k - 1] = k / den;
  for (int k = 1; k <= L; ++k) out.d_v[k - 1] = k / den;

  const Eigen::MatrixXd p = left_eigenvectors(mu, out.d_u);
  const Eigen::MatrixXd q = left_eigenvectors(mv, out.d_v);

  // the diagonalization invariant: P m_u = D_U P (ditto V)
  const Eigen::VectorXd du =
      Eigen::Map<const Eigen::VectorXd>(out.d_u.data(), L);
  const Eigen::VectorXd dv =
      Eigen::Map<const Eigen::VectorXd>(out.d_v.data(), L);
  const double res_u = (p * mu - du.asDiagonal() * p).cwiseAbs().maxCoeff();
  const double res_v = (q * mv - dv.asDiagonal() * q).cwiseAbs().maxCoeff();
  if (res_u > 1e-10 || res_v > 1e-10) {
    throw NumericsError("matrices: diagonalization residual exceeds 1e-10");
  }

  out.m_u = from_eigen(mu);
  out.m_v = from_eigen(mv);
  out.p = from_eigen(p);
  out.q_mat = from_eigen(q);
  out.p_inv = from_eigen(p.inverse());
  out.q_inv = from_eigen(q.inverse());
  return out;
}

FluctState fluctuation(const OdeState& st, const SystemMatrices& m) {
  validate(st);
  const int L = m.L;
  CMLAB_REQUIRE(static_cast<int>(st.b.size()) == L,
                "fluctuation: state/matrix L mismatch");
  CMLAB_REQUIRE(st.s > 0.0, "fluctuation: s must be > 0");
  const auto c = special_c(L);
  FluctState f;
  f.s = st.s;
  f.u.resize(L);
  f.v.resize(L);
  for (int k = 1; k <= L; ++k) {
    const double sk = std::pow(st.s, k);
    // written so the special solution maps to exactly zero
    f.u[k - 1] = sk * (st.b[k - 1] - c[k - 1] / sk);
    f.v[k - 1] = sk * st.eta[k - 1];
  }
  f.cal_u = mat_apply(m.p, f.u);
  f.cal_v = mat_apply(m.q_mat, f.v);
  return f;
}

FluctState fluctuation(const OdeState& st, int L) {
  return fluctuation(st, matrices(L));
}

// ---- embedded 4(5) integrator ------------------------------------------

namespace {

void flat_rhs(int L, const double* y, double* dy) {
  const double b1 = y[0];
  const double e1 = y[L];
  for (int k = 1; k <= L; ++k) {
    const double b_next = k < L ? y[k] : 0.0;
    const double e_next = k < L ? y[L + k] : 0.0;
    const double ck = 2.0 * k - 0.5;
    dy[k - 1] = b_next - ck * b1 * y[k - 1] - 0.5 * e1 * y[L + k - 1];
    dy[L + k - 1] = e_next - ck * b1 * y[L + k - 1] + 0.5 * e1 * y[k - 1];
  }
  const double lam = y[2 * L];
  dy[2 * L] = -b1 * lam;
  dy[2 * L + 1] = 0.5 * e1;
  dy[2 * L + 2] = lam * lam;
}

OdeState unflatten(int L, double s, const std::vector<double>& y) {
  OdeState st;
  st.s = s;
  st.b.assign(y.begin(), y.begin() + L);
  st.eta.assign(y.begin() + L, y.begin() + 2 * L);
  st.lambda = y[2 * L];
  st.gamma = y[2 * L + 1];
  st.t = y[2 * L + 2];
  return st;
}

// Dormand–Prince 5(4) coefficients
constexpr double kA[7][6] = {
    {},
    {1.0 / 5},
    {3.0 / 40, 9.0 / 40},
    {44.0 / 45, -56.0 / 15, 32.0 / 9},
    {19372.0 / 6561, -25360.0 / 2187, 64448.0 / 6561, -212.0 / 729},
    {9017.0 / 3168, -355.0 / 33, 46732.0 / 5247, 49.0 / 176, -5103.0 / 18656},
    {35.0 / 384, 0.0, 500.0 / 1113, 125.0 / 192, -2187.0 / 6784, 11.0 / 84},
};
constexpr double kB5[7] = {35.0 / 384,      0.0,         500.0 / 1113,
                           125.0 / 192,     -2187.0 / 6784, 11.0 / 84, 0.0};
constexpr double kB4[7] = {5179.0 / 57600,  0.0,           7571.0 / 16695,
                           393.0 / 640,     -92097.0 / 339200,
                           187.0 / 2100,    1.0 / 40};

// One trial step; fills ynew and the scaled error estimate.
double dp_step(int L, const std::vector<double>& y, double h,
               std::vector<double>& ynew, const StepControl& ctl) {
  const std::size_t dim = y.size();
  std::vector<std::vector<double>> k(7, std::vector<double>(dim));
  std::vector<double> tmp(dim);
  flat_rhs(L, y.data(), k[0].data());
  for (int stage = 1; stage < 7; ++stage) {
    for (std::size_t i = 0; i < dim; ++i) {
      double acc = 0.0;
      for (int j = 0; j < stage; ++j) acc += kA[stage][j] * k[j][i];
      tmp[i] = y[i] + h * acc;
    }
    flat_rhs(L, tmp.data(), k[stage].data());
  }
  double err2 = 0.0;
  for (std::size_t i = 0; i < dim; ++i) {
    double y5 = 0.0, y4 = 0.0;
    for (int j = 0; j < 7; ++j) {
      y5 += kB5[j] * k[j][i];
      y4 += kB4[j] * k[j][i];
    }
    ynew[i] = y[i] + h * y5;
    const double sc =
        ctl.abs_tol +
        ctl.rel_tol * std::max(std::abs(y[i]), std::abs(ynew[i]));
    const double e = h * (y5 - y4) / sc;
    err2 += e * e;
  }
  return std::sqrt(err2 / static_cast<double>(dim));
}

// Core loop; on_accept(state) -> keep going?  Also invoked for the initial
// state.  `targets` (optional, increasing) clamps steps to land exactly.
template <class Cb>
void run_integrator(const OdeState& start, double s_end, const StepControl& ctl,
                    const std::vector<double>* targets, Cb&& on_accept) {
  validate(start);
  CMLAB_REQUIRE(s_end > start.s, "integrate: s_end must exceed s0");
  CMLAB_REQUIRE(ctl.rel_tol > 0.0 && ctl.abs_tol > 0.0 &&
                    ctl.max_rel_step > 0.0,
                "integrate: tolerances must be positive");
  const int L = static_cast<int>(start.b.size());
  std::vector<double> y(2 * L + 3);
  std::copy(start.b.begin(), start.b.end(), y.begin());
  std::copy(start.eta.begin(), start.eta.end(), y.begin() + L);
  y[2 * L] = start.lambda;
  y[2 * L + 1] = start.gamma;
  y[2 * L + 2] = start.t;

  double s = start.s;
  if (!on_accept(unflatten(L, s, y))) return;

  std::size_t next_target = 0;
  if (targets) {
    while (next_target < targets->size() && (*targets)[next_target] <= s) {
      ++next_target;
    }
  }

  double h = ctl.h_init > 0.0 ? ctl.h_init : 1e-3 * std::max(s, 1e-3);
  std::vector<double> ynew(y.size());
  for (std::size_t step = 0; step < ctl.max_steps; ++step) {
    if (s >= s_end) return;
    h = std::min(h, ctl.max_rel_step * std::max(s, 1e-3));
    h = std::min(h, s_end - s);
    bool hit_target = false;
    if (targets && next_target < targets->size() &&
        s + h >= (*targets)[next_target]) {
      h = (*targets)[next_target] - s;
      hit_target = true;
    }
    if (!(h > 1e-14 * std::max(s, 1.0))) {
      throw NumericsError(
          "integrate: step-size underflow (blow-up-adjacent stiffness)");
    }
    const double err = dp_step(L, y, h, ynew, ctl);
    if (err <= 1.0) {
      s = hit_target ? (*targets)[next_target] : s + h;
      if (hit_target) ++next_target;
      y.swap(ynew);
      CMLAB_REQUIRE(std::isfinite(y[2 * L]) && y[2 * L] > 0.0,
                    "integrate: lambda left the positive cone");
      if (!on_accept(unflatten(L, s, y))) return;
    }
    const double fac =
        std::clamp(0.9 * std::pow(std::max(err, 1e-10), -0.2), 0.2, 5.0);
    h *= fac;
  }
  throw NumericsError("integrate: step budget exhausted");
}

}  // namespace

Trajectory integrate(const OdeState& s0, double s_end, const StepControl& ctl) {
  Trajectory out;
  run_integrator(s0, s_end, ctl, nullptr, [&](const OdeState& st) {
    out.push_back(st);
    return true;
  });
  return out;
}

Trajectory integrate_sampled(const OdeState& s0, double s_end,
                             std::size_t samples, bool log_spacing,
                             const StepControl& ctl) {
  CMLAB_REQUIRE(samples >= 2, "integrate_sampled: need at least 2 samples");
  std::vector<double> targets(samples);
  for (std::size_t i = 0; i < samples; ++i) {
    const double f = static_cast<double>(i) / (samples - 1);
    targets[i] = log_spacing ? s0.s * std::pow(s_end / s0.s, f)
                             : s0.s + f * (s_end - s0.s);
  }
  targets.back() = s_end;
  Trajectory out;
  std::size_t want = 0;
  run_integrator(s0, s_end, ctl, &targets, [&](const OdeState& st) {
    if (want < targets.size() &&
        std::abs(st.s - targets[want]) <= 1e-9 * std::max(st.s, 1.0)) {
      out.push_back(st);
      ++want;
    }
    return true;
  });
  CMLAB_REQUIRE(out.size() == samples, "integrate_sampled: missed a target");
  return out;
}

double fluctuation_rhs_check(const Trajectory& traj, const SystemMatrices& m) {
  const std::size_t n = traj.size();
  CMLAB_REQUIRE(n >= 32, "fluctuation_rhs_check: trajectory too short");
  const int L = m.L;
  std::vector<double> s(n);
  std::vector<std::vector<double>> u(L, std::vector<double>(n));
  std::vector<std::vector<double>> v(L, std::vector<double>(n));
  for (std::size_t i = 0; i < n; ++i) {
    const FluctState f = fluctuation(traj[i], m);
    s[i] = f.s;
    for (int k = 0; k < L; ++k) {
      u[k][i] = f.u[k];
      v[k][i] = f.v[k];
    }
  }
  std::vector<std::vector<double>> du(L), dv(L);
  for (int k = 0; k < L; ++k) {
    du[k] = fd_derivative(s, u[k]);
    dv[k] = fd_derivative(s, v[k]);
  }
  double worst = 0.0;
  for (std::size_t i = 4; i + 4 < n; ++i) {
    for (int k = 0; k < L; ++k) {
      double mu_u = 0.0, mv_v = 0.0;
      for (int j = 0; j < L; ++j) {
        mu_u += m.m_u.at(k, j) * u[j][i];
        mv_v += m.m_v.at(k, j) * v[j][i];
      }
      worst = std::max(worst, std::abs(s[i] * du[k][i] - mu_u));
      worst = std::max(worst, std::abs(s[i] * dv[k][i] - mv_v));
    }
  }
  return worst;
}

LambdaGamma closed_form_lambda_gamma(double t_final, int L,
                                     const std::vector<double>& c,
                                     const std::vector<double>& d, double t) {
  CMLAB_REQUIRE(L >= 1 && L <= kOdeLMax, "closed_form: L out of range");
  CMLAB_REQUIRE(c.size() == static_cast<std::size_t>(L - 1),
                "closed_form: c must hold c_1..c_{L-1}");
  CMLAB_REQUIRE(d.size() == static_cast<std::size_t>(L),
                "closed_form: d must hold d_0..d_{L-1}");
  CMLAB_REQUIRE(std::isfinite(t) && std::isfinite(t_final) && t < t_final,
                "closed_form: require t < T");
  const double u = t_final - t;
  std::complex<double> z(std::pow(u, L), d[0]);
  for (int k = 1; k <= L - 1; ++k) {
    z += std::complex<double>(c[k - 1], d[k]) * std::pow(u, k);
  }
  if (std::abs(z) == 0.0) {
    throw NumericsError("closed_form: polynomial vanishes (degeneracy)");
  }
  return {std::norm(z), -std::arg(z)};
}

HierarchyRecovery hierarchy_from_lambda_gamma(const LambdaGammaPath& path,
                                              int L, int stencil) {
  CMLAB_REQUIRE(L >= 1 && L <= kOdeLMax, "hierarchy: L out of range");
  CMLAB_REQUIRE(stencil >= 5 && stencil % 2 == 1,
                "hierarchy: stencil must be odd and at least 5");
  const std::size_t n = path.s.size();
  CMLAB_REQUIRE(path.lambda.size() == n && path.gamma.size() == n,
                "hierarchy: column length mismatch");
  // each derivative level widens the zone whose values trace back to
  // one-sided end stencils; keep the scored window clear of all of it
  const std::size_t margin =
      static_cast<std::size_t>(stencil / 2 + 2) * static_cast<std::size_t>(L + 1);
  CMLAB_REQUIRE(n >= 2 * margin + 16, "hierarchy: path too short");
  std::vector<double> llog(n), gam(n);
  for (std::size_t i = 0; i < n; ++i) {
    CMLAB_REQUIRE(path.lambda[i] > 0.0 && std::isfinite(path.lambda[i]) &&
                      std::isfinite(path.gamma[i]),
                  "hierarchy: lambda must be positive and finite");
    llog[i] = std::log(path.lambda[i]);
  }
  gam[0] = path.gamma[0];
  for (std::size_t i = 1; i < n; ++i) {
    double g = path.gamma[i];
    while (g - gam[i - 1] > pi) g -= 2.0 * pi;
    while (g - gam[i - 1] < -pi) g += 2.0 * pi;
    gam[i] = g;
  }

  HierarchyRecovery out;
  out.s = path.s;
  out.margin = margin;
  out.b.assign(L + 1, std::vector<double>(n));
  out.eta.assign(L + 1, std::vector<double>(n));
  {
    const auto dl = fd_derivative(path.s, llog, stencil);
    const auto dg = fd_derivative(path.s, gam, stencil);
    for (std::size_t i = 0; i < n; ++i) {
      out.b[0][i] = -dl[i];
      out.eta[0][i] = 2.0 * dg[i];
    }
  }
  for (int k = 1; k <= L; ++k) {
    const auto dbk = fd_derivative(path.s, out.b[k - 1], stencil);
    const auto dek = fd_derivative(path.s, out.eta[k - 1], stencil);
    const double ck = 2.0 * k - 0.5;
    for (std::size_t i = 0; i < n; ++i) {
      const double b1 = out.b[0][i], e1 = out.eta[0][i];
      out.b[k][i] = dbk[i] + ck * b1 * out.b[k - 1][i] +
                    0.5 * e1 * out.eta[k - 1][i];
      out.eta[k][i] = dek[i] + ck * b1 * out.eta[k - 1][i] -
                      0.5 * e1 * out.b[k - 1][i];
    }
  }
  double res = 0.0, b1max = 0.0;
  for (std::size_t i = margin; i + margin < n; ++i) {
    res = std::max(res, std::abs(out.b[L][i]) + std::abs(out.eta[L][i]));
  }
  // normalize by the full-path |b_1| peak: the margins exist to keep
  // end-stencil noise out of the residual, not to shrink the path's own
  // characteristic scale (a flat path would otherwise score 0/0)
  for (std::size_t i = 0; i < n; ++i) {
    b1max = std::max(b1max, std::abs(out.b[0][i]));
  }
  out.closure_residual = b1max > 0.0 ? res / std::pow(b1max, L + 1) : res;
  return out;
}

RateFit rate_fit(const Trajectory& traj) {
  CMLAB_REQUIRE(traj.size() >= 32, "rate_fit: trajectory too short");
  const double s_end = traj.back().s;
  std::vector<double> xs, ys;
  for (const OdeState& st : traj) {
    if (st.s >= 0.05 * s_end) {
      xs.push_back(st.s);
      ys.push_back(st.lambda);
    }
  }
  RateFit r;
  r.lambda_s = fit_power_law(xs, ys);
  const double p = r.lambda_s.exponent;
  CMLAB_REQUIRE(2.0 * p + 1.0 < -1e-9,
                "rate_fit: lambda(s)^2 tail is not integrable");
  const double a = r.lambda_s.prefactor;
  r.tail_correction =
      a * a * std::pow(s_end, 2.0 * p + 1.0) / (-(2.0 * p + 1.0));
  r.t_blowup = traj.back().t + r.tail_correction;

  const auto fit_against = [&](double t_b) {
    std::vector<double> us, ls;
    for (const OdeState& st : traj) {
      if (t_b - st.t > 0.0) {
        us.push_back(t_b - st.t);
        ls.push_back(st.lambda);
      }
    }
    return fit_power_law(us, ls);
  };
  r.lambda_t = fit_against(r.t_blowup);
  r.lambda_t.t_estimate = r.t_blowup;
  const double dt = 0.1 * r.tail_correction;
  const double e_hi = fit_against(r.t_blowup + dt).exponent;
  const double e_lo = fit_against(r.t_blowup - dt).exponent;
  r.exponent_sensitivity =
      std::max(std::abs(e_hi - r.lambda_t.exponent),
               std::abs(e_lo - r.lambda_t.exponent));
  return r;
}

TrapBounds trap_bounds(int L) {
  TrapBounds tb;
  tb.kappa = default_kappa(L);
  return tb;
}

OdeState state_from_unstable(const SystemMatrices& m, double s0,
                             double stable_u1,
                             const std::vector<double>& unstable) {
  const int L = m.L;
  CMLAB_REQUIRE(s0 > 0.0 && std::isfinite(s0),
                "state_from_unstable: s0 must be > 0");
  CMLAB_REQUIRE(unstable.size() == static_cast<std::size_t>(2 * L - 1),
                "state_from_unstable: need 2L-1 coordinates");
  std::vector<double> cal_u(L, 0.0), cal_v(L, 0.0);
  cal_u[0] = stable_u1;
  for (int i = 1; i < L; ++i) cal_u[i] = unstable[i - 1];
  for (int i = 0; i < L; ++i) cal_v[i] = unstable[L - 1 + i];
  const auto u = mat_apply(m.p_inv, cal_u);
  const auto v = mat_apply(m.q_inv, cal_v);
  const auto c = special_c(L);
  OdeState st;
  st.s = s0;
  st.b.resize(L);
  st.eta.resize(L);
  for (int k = 1; k <= L; ++k) {
    st.b[k - 1] = (c[k - 1] + u[k - 1]) / std::pow(s0, k);
    st.eta[k - 1] = v[k - 1] / std::pow(s0, k);
  }
  CMLAB_REQUIRE(st.b[0] > 0.0, "state_from_unstable: b_1 left the cone");
  // ratio b_1^L / lambda^{2L-1/2} = 1 by construction
  st.lambda = std::pow(st.b[0], 2.0 * L / (4.0 * L - 1.0));
  return st;
}

namespace {

bool trap_ok(const OdeState& st, const SystemMatrices& m,
             const TrapBounds& tb) {
  const FluctState f = fluctuation(st, m);
  const double cap = std::pow(st.s, -tb.kappa);
  if (std::abs(f.cal_u[0]) > tb.u1_factor * cap) return false;
  double nrm2 = 0.0;
  for (int i = 1; i < m.L; ++i) nrm2 += f.cal_u[i] * f.cal_u[i];
  for (int i = 0; i < m.L; ++i) nrm2 += f.cal_v[i] * f.cal_v[i];
  if (std::sqrt(nrm2) > tb.ball_factor * cap) return false;
  if (!(st.b[0] > 0.0)) return false;
  const double ratio =
      std::pow(st.b[0], m.L) / std::pow(st.lambda, 2.0 * m.L - 0.5);
  return ratio >= tb.ratio_lo && ratio <= tb.ratio_hi;
}

}  // namespace

TrapResult trap_horizon(const OdeState& init, const SystemMatrices& m,
                        double s_end, const TrapBounds& tb,
                        const StepControl& ctl) {
  TrapResult res;
  res.last = init;
  res.horizon = init.s;
  if (!trap_ok(init, m, tb)) return res;
  run_integrator(init, s_end, ctl, nullptr, [&](const OdeState& st) {
    if (!trap_ok(st, m, tb)) {
      res.last = st;
      return false;
    }
    res.horizon = st.s;
    res.last = st;
    return true;
  });
  res.reached = res.horizon >= s_end;
  return res;
}

ShootResult shoot_trapped(int L, double s0, double stable_u1, double tol,
                          std::size_t budget) {
  CMLAB_REQUIRE(L >= 1 && L <= 3, "shoot_trapped: L <= 3 for this budget");
  CMLAB_REQUIRE(s0 > 0.0 && tol > 0.0, "shoot_trapped: bad arguments");
  const SystemMatrices m = matrices(L);
  const TrapBounds tb = trap_bounds(L);
  const double s_end = 100.0 * s0;
  const double rad = tb.ball_factor * std::pow(s0, -tb.kappa);

  ShootResult res;
  res.unstable.assign(2 * L - 1, 0.0);
  const auto eval = [&](const std::vector<double>& x) {
    ++res.evaluations;
    return trap_horizon(state_from_unstable(m, s0, stable_u1, x), m, s_end,
                        tb);
  };

  if (L == 1) {
    // asymmetric bracket so the root is interior, not the first midpoint
    double lo = -rad, hi = 0.61 * rad;
    double best_x = 0.0, best_h = 0.0;
    while (res.evaluations < budget) {
      const double mid = 0.5 * (lo + hi);
      const TrapResult tr = eval({mid});
      if (tr.horizon > best_h) {
        best_h = tr.horizon;
        best_x = mid;
      }
      if (tr.reached) {
        res.unstable = {mid};
        res.horizon = tr.horizon;
        res.trapped = true;
        return res;
      }
      const FluctState f = fluctuation(tr.last, m);
      (f.cal_v[0] > 0.0 ? hi : lo) = mid;
      if (hi - lo < tol * rad) break;
    }
    res.unstable = {best_x};
    res.horizon = best_h;
    res.trapped = false;
    return res;
  }

  // compass search maximizing the horizon
  std::vector<double> x(2 * L - 1, 0.0);
  TrapResult best = eval(x);
  double step = 0.25 * rad;
  while (!best.reached && step > tol * rad &&
         res.evaluations + 2 * x.size() <= budget) {
    std::vector<double> best_cand;
    TrapResult best_tr = best;
    for (std::size_t i = 0; i < x.size(); ++i) {
      for (double sg : {1.0, -1.0}) {
        std::vector<double> cand = x;
        cand[i] += sg * step;
        double nrm2 = 0.0;
        for (double ci : cand) nrm2 += ci * ci;
        if (std::sqrt(nrm2) > rad) continue;
        const TrapResult tr = eval(cand);
        if (tr.horizon > best_tr.horizon) {
          best_tr = tr;
          best_cand = cand;
        }
      }
    }
    if (best_cand.empty()) {
      step *= 0.5;
    } else {
      x = best_cand;
      best = best_tr;
    }
  }
  res.unstable = x;
  res.horizon = best.horizon;
  res.trapped = best.reached;
  return res;
}

ExitFit exit_rate(int L, double s0, double stable_u1,
                  const std::vector<double>& unstable, double s_cap) {
  const SystemMatrices m = matrices(L);
  const TrapBounds tb = trap_bounds(L);
  const OdeState init = state_from_unstable(m, s0, stable_u1, unstable);
  std::vector<double> ss, nn;
  ExitFit out;
  out.exit_s = s_cap;
  run_integrator(init, s_cap, StepControl{}, nullptr,
                 [&](const OdeState& st) {
                   if (!trap_ok(st, m, tb)) {
                     out.exit_s = st.s;
                     out.exited = true;
                     return false;
                   }
                   const FluctState f = fluctuation(st, m);
                   double nrm2 = 0.0;
                   for (int i = 1; i < L; ++i) nrm2 += f.cal_u[i] * f.cal_u[i];
                   for (int i = 0; i < L; ++i) nrm2 += f.cal_v[i] * f.cal_v[i];
                   // skip the initial transient before fitting
                   if (st.s >= 2.0 * s0 && nrm2 > 0.0) {
                     ss.push_back(st.s);
                     nn.push_back(std::sqrt(nrm2));
                   }
                   return true;
                 });
  out.growth = fit_power_law(ss, nn);
  return out;
}

}  // namespace cmlab
