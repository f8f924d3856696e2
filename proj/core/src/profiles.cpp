#include "cmlab/profiles.hpp"

#include <Eigen/Dense>
#include <cmath>

#include "cmlab/common.hpp"
#include "cmlab/conserved.hpp"
#include "cmlab/ops.hpp"

namespace cmlab {

namespace {

double factorial(int n) {
  double f = 1.0;
  for (int i = 2; i <= n; ++i) f *= static_cast<double>(i);
  return f;
}

Complex pow_minus_i(int n) {
  Complex a{1.0, 0.0};
  for (int i = 0; i < n; ++i) a *= Complex{0.0, -1.0};
  return a;
}

rat::Poly p_poly_exact(int k) {
  // p_k(y) = (1+(-1)^k)/2 + y^2
  return rat::Poly({k % 2 == 0 ? 1.0 : 0.0, 0.0, 1.0});
}

bool finite_all(const std::vector<double>& v) {
  for (double x : v)
    if (!std::isfinite(x)) return false;
  return true;
}

}  // namespace

void validate(const ModParams& p) {
  CMLAB_REQUIRE(p.L >= 1 && p.L <= kLMax, "ModParams: L out of range");
  CMLAB_REQUIRE(p.lambda > 0.0 && std::isfinite(p.lambda),
                "ModParams: lambda must be positive and finite");
  CMLAB_REQUIRE(std::isfinite(p.gamma), "ModParams: gamma must be finite");
  const auto len = static_cast<std::size_t>(p.L);
  CMLAB_REQUIRE(p.b.size() == len && p.eta.size() == len,
                "ModParams: b and eta must have length L");
  CMLAB_REQUIRE(finite_all(p.b) && finite_all(p.eta),
                "ModParams: b and eta entries must be finite");
}

void validate(const InitConfig& cfg, const GridSpec& g) {
  validate(cfg.params);
  validate(g);
  CMLAB_REQUIRE(std::isfinite(cfg.s0), "InitConfig: s0 must be finite");
  CMLAB_REQUIRE(cfg.delta_ring > 0.0 && std::isfinite(cfg.delta_ring),
                "InitConfig: delta_ring must be positive");
  const double R = cfg.delta_ring / cfg.params.lambda;
  CMLAB_REQUIRE(R >= 4.0, "InitConfig: delta_ring/lambda must be >= 4");
  // cutoff must fit the rescaled (y-side) box: 2(delta/lambda) < (box/lambda)/2
  CMLAB_REQUIRE(2.0 * cfg.delta_ring < 0.5 * g.box_len,
                "InitConfig: cutoff exceeds box");
  if (!cfg.eps0.v.empty()) {
    CMLAB_REQUIRE(cfg.eps0.grid.n == g.n &&
                      std::abs(cfg.eps0.grid.box_len -
                               g.box_len / cfg.params.lambda) <
                          1e-9 * g.box_len,
                  "InitConfig: eps0 must live on the rescaled grid");
    for (const Complex& z : cfg.eps0.v)
      CMLAB_REQUIRE(std::isfinite(z.real()) && std::isfinite(z.imag()),
                    "InitConfig: eps0 must be finite");
    const double bound = std::pow(cfg.params.lambda, 10.0 * cfg.params.L);
    CMLAB_REQUIRE(norm_hs(cfg.eps0, 2.0 * cfg.params.L) <= bound * (1.0 + 1e-12),
                  "InitConfig: eps0 exceeds the H^{2L} smallness bound");
  }
}

Field p_poly(int k, const GridSpec& g) {
  CMLAB_REQUIRE(k >= 0, "p_poly: k must be >= 0");
  return rat::sample(rat::Rat(p_poly_exact(k)), g);
}

rat::CRatW t_profile_exact(int k, double bk, double etak) {
  CMLAB_REQUIRE(k >= 1 && k <= kLMax, "t_profile: k out of range");
  const double s = 1.0 / (4.0 * k * factorial(2 * k - 2));
  const Complex alpha = pow_minus_i(k - 1);
  const Complex c1 = -alpha * iu * bk * s;  // times y^{2k-2} p_k Q
  const Complex c2 = -alpha * etak * s;     // times y^{2k-2} p_{k-1} Q
  const rat::Poly mon = rat::Poly::monomial(2 * k - 2);
  const rat::RatW w1 = rat::poly_times_q(mon * p_poly_exact(k));
  const rat::RatW w2 = rat::poly_times_q(mon * p_poly_exact(k - 1));
  rat::CRatW t;
  t.re = c1.real() * w1 + c2.real() * w2;
  t.im = c1.imag() * w1 + c2.imag() * w2;
  return t;
}

rat::CRatW p_profile_exact(int k, double bk, double etak) {
  CMLAB_REQUIRE(k >= 1 && k <= kLMax, "p_profile: k out of range");
  const Complex coef =
      -(iu * bk + etak) * pow_minus_i(k - 1) * 0.5;  // times y Q
  const rat::RatW yq = rat::poly_times_q(rat::Poly::monomial(1));
  rat::CRatW p;
  p.re = coef.real() * yq;
  p.im = coef.imag() * yq;
  return p;
}

Field t_profile(int k, double bk, double etak, const GridSpec& g) {
  return rat::sample(t_profile_exact(k, bk, etak), g);
}

Field p_profile(int k, double bk, double etak, const GridSpec& g) {
  return rat::sample(p_profile_exact(k, bk, etak), g);
}

KernelElements kernel_elements(const GridSpec& g) {
  KernelElements ke;
  const rat::RatW q = rat::soliton_q();
  // LambdaQ = (1-y^2)/(2(1+y^2)) Q
  const rat::Rat lam_pre =
      rat::Rat::over_bracket2(rat::Poly({0.5, 0.0, -0.5}), 1);
  ke.k1 = rat::sample(lam_pre * q, g);
  ke.k2 = iu * rat::sample(q, g);
  ke.k3 = iu * rat::sample(rat::poly_times_q(rat::Poly::monomial(2)), g);
  ke.k4 = rat::sample(rat::poly_times_q(rat::Poly({1.0, 0.0, 1.0})), g);
  ke.k1_ring = iu * rat::sample(rat::poly_times_q(rat::Poly::monomial(1)), g);
  ke.k2_ring = rat::sample(rat::poly_times_q(rat::Poly::monomial(1)), g);
  return ke;
}

Field cutoff_chi(double R, const GridSpec& g) {
  CMLAB_REQUIRE(R > 0.0 && std::isfinite(R), "cutoff_chi: R must be positive");
  CMLAB_REQUIRE(2.0 * R < 0.5 * g.box_len, "cutoff_chi: cutoff exceeds box");
  auto psi = [](double t) { return t > 0.0 ? std::exp(-1.0 / t) : 0.0; };
  Field chi(g);
  for (std::size_t j = 0; j < g.n; ++j) {
    const double u = std::abs(g.x(j)) / R;
    double val;
    if (u <= 1.0) {
      val = 1.0;
    } else if (u >= 2.0) {
      val = 0.0;
    } else {
      const double a = psi(2.0 - u), b = psi(u - 1.0);
      val = a / (a + b);
    }
    chi[j] = Complex{val, 0.0};
  }
  return chi;
}

std::array<Field, 4> zk_basis(const GridSpec& g, int l_max) {
  CMLAB_REQUIRE(l_max >= 1 && l_max <= kLMax, "zk_basis: l_max out of range");

  // dictionary: chi_5 y^{2a} and i chi_5 y^{2a}, a = 0..11 (support |y|<=10)
  const Field chi5 = cutoff_chi(5.0, g);
  std::vector<Field> atoms;
  atoms.reserve(24);
  for (int pass = 0; pass < 2; ++pass) {
    for (int a = 0; a < 12; ++a) {
      Field atom(g);
      for (std::size_t j = 0; j < g.n; ++j) {
        const double y = g.x(j);
        atom[j] = chi5[j] * std::pow(y, 2 * a);
      }
      if (pass == 1) atom = iu * atom;
      const double nrm = l2_norm(atom);
      atoms.push_back(Complex{1.0 / nrm, 0.0} * atom);
    }
  }
  // Orthonormalize in field space (modified Gram-Schmidt, two sweeps).  The
  // raw monomial atoms are nearly collinear at high degree; solving in an
  // orthonormal span keeps the coefficient vector the size of ||Z_k|| and
  // the constraint residuals at the double-precision quadrature floor.
  for (std::size_t a = 0; a < atoms.size(); ++a) {
    for (int sweep = 0; sweep < 2; ++sweep)
      for (std::size_t p = 0; p < a; ++p)
        atoms[a] = atoms[a] - Complex{inner_r(atoms[a], atoms[p]), 0.0} * atoms[p];
    atoms[a] = Complex{1.0 / l2_norm(atoms[a]), 0.0} * atoms[a];
  }

  // constraint rows: duality against K_1..K_4, then the higher moments
  // (i y^{2m+2} Q, .)_r and (y^{2m}(1+y^2) Q, .)_r for m = 1..l_max-1
  const KernelElements ke = kernel_elements(g);
  std::vector<Field> rows = {ke.k1, ke.k2, ke.k3, ke.k4};
  for (int m = 1; m <= l_max - 1; ++m) {
    rows.push_back(
        iu * rat::sample(rat::poly_times_q(rat::Poly::monomial(2 * m + 2)), g));
    rat::Poly weight = rat::Poly::monomial(2 * m) +
                       rat::Poly::monomial(2 * m + 2);  // y^{2m}(1+y^2)
    rows.push_back(rat::sample(rat::poly_times_q(weight), g));
  }

  const int nr = static_cast<int>(rows.size());
  Eigen::MatrixXd M(nr, 24);
  for (int i = 0; i < nr; ++i)
    for (int a = 0; a < 24; ++a) M(i, a) = inner_r(rows[static_cast<std::size_t>(i)], atoms[static_cast<std::size_t>(a)]);

  // scale rows to unit norm for conditioning
  Eigen::VectorXd row_scale(nr);
  for (int i = 0; i < nr; ++i) {
    row_scale(i) = M.row(i).norm();
    CMLAB_REQUIRE(row_scale(i) > 0.0, "zk_basis: degenerate constraint row");
    M.row(i) /= row_scale(i);
  }

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(M, Eigen::ComputeThinU | Eigen::ComputeThinV);
  if (svd.singularValues()(nr - 1) <
      1e-10 * svd.singularValues()(0)) {
    throw NumericsError("zk_basis: constraint matrix is singular (dictionary too small)");
  }

  std::array<Field, 4> z{Field(g), Field(g), Field(g), Field(g)};
  for (int k = 0; k < 4; ++k) {
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(nr);
    rhs(k) = 1.0 / row_scale(k);
    Eigen::VectorXd c = svd.solve(rhs);  // least-norm solution
    // the moment rows are nearly collinear; two rounds of iterative
    // refinement push the constraint residual from ~5e-10 to solver noise
    for (int it = 0; it < 2; ++it) c += svd.solve(rhs - M * c);
    Field acc(g);
    for (int a = 0; a < 24; ++a)
      acc = acc + Complex{c(a), 0.0} * atoms[static_cast<std::size_t>(a)];
    z[static_cast<std::size_t>(k)] = acc;
  }
  return z;
}

// The bracket [f]_{lambda,gamma} is applied exactly: samples of the rescaled
// field at x_j are samples of the unscaled field at y_j = x_j/lambda on the
// companion grid {n, box/lambda}, so no resampling is involved.
Field initial_data(const InitConfig& cfg, const GridSpec& g) {
  validate(cfg, g);
  const ModParams& p = cfg.params;
  GridSpec gy;
  gy.n = g.n;
  gy.box_len = g.box_len / p.lambda;

  Field core = rat::sample(rat::soliton_q(), gy);
  double amp = 0.0;
  for (int j = 0; j < p.L; ++j)
    amp += std::abs(p.b[static_cast<std::size_t>(j)]) +
           std::abs(p.eta[static_cast<std::size_t>(j)]);
  if (amp > 0.0) {
    const Field chi = cutoff_chi(cfg.delta_ring / p.lambda, gy);
    Field tsum(gy);
    for (int j = 1; j <= p.L; ++j)
      tsum = tsum + t_profile(j, p.b[static_cast<std::size_t>(j - 1)],
                              p.eta[static_cast<std::size_t>(j - 1)], gy);
    core = core + tsum * chi;
  }
  if (!cfg.eps0.v.empty()) {
    Field e = cfg.eps0;
    e.grid = gy;  // box lengths agree to 1e-9 rel (validated); retag exactly
    core = core + e;
  }

  Field out(g);
  const Complex pref = std::polar(1.0 / std::sqrt(p.lambda), p.gamma);
  for (std::size_t j = 0; j < g.n; ++j) out[j] = pref * core[j];
  return out;
}

InitReport initial_data_report(const InitConfig& cfg, const GridSpec& g) {
  InitReport r;
  const Field v0 = initial_data(cfg, g);
  const ModParams& p = cfg.params;
  const double b1 = p.b.empty() ? 0.0 : p.b[0];
  r.regime_ratio = std::pow(b1, p.L) /
                   std::pow(p.lambda, 2.0 * p.L - 0.5);
  r.in_regime = r.regime_ratio >= 1.0 / 1.1 && r.regime_ratio <= 1.1;
  r.mass_minus_2pi = mass(v0) - 2.0 * pi;
  return r;
}

}  // namespace cmlab
