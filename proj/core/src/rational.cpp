#include "cmlab/rational.hpp"

#include <cmath>
#include <complex>
#include <mutex>

namespace cmlab::rat {

namespace {

constexpr double kTrimTol = 0.0;  // exact zeros only; ops preserve them

double binom(int n, int k) {
  if (k < 0 || k > n) return 0.0;
  double r = 1.0;
  for (int t = 1; t <= k; ++t) r = r * (n - k + t) / t;
  return r;
}

}  // namespace

// ---------------------------------------------------------------- Poly ----

Poly Poly::constant(double a) {
  Poly p;
  if (a != 0.0) p.c = {a};
  return p;
}

Poly Poly::monomial(int n, double a) {
  CMLAB_REQUIRE(n >= 0, "monomial degree must be >= 0");
  Poly p;
  if (a != 0.0) {
    p.c.assign(static_cast<size_t>(n) + 1, 0.0);
    p.c.back() = a;
  }
  return p;
}

bool Poly::is_zero(double tol) const {
  for (double x : c)
    if (std::abs(x) > tol) return false;
  return true;
}

double Poly::max_abs() const {
  double m = 0.0;
  for (double x : c) m = std::max(m, std::abs(x));
  return m;
}

void Poly::trim(double tol) {
  while (!c.empty() && std::abs(c.back()) <= tol) c.pop_back();
}

double Poly::eval(double y) const {
  double r = 0.0;
  for (size_t i = c.size(); i-- > 0;) r = r * y + c[i];
  return r;
}

Poly Poly::derivative() const {
  Poly d;
  if (c.size() > 1) {
    d.c.resize(c.size() - 1);
    for (size_t i = 1; i < c.size(); ++i) d.c[i - 1] = c[i] * static_cast<double>(i);
  }
  d.trim(kTrimTol);
  return d;
}

Poly operator+(const Poly& a, const Poly& b) {
  Poly r;
  r.c.resize(std::max(a.c.size(), b.c.size()), 0.0);
  for (size_t i = 0; i < a.c.size(); ++i) r.c[i] += a.c[i];
  for (size_t i = 0; i < b.c.size(); ++i) r.c[i] += b.c[i];
  r.trim(kTrimTol);
  return r;
}

Poly operator-(const Poly& a, const Poly& b) { return a + (-1.0 * b); }

Poly operator*(const Poly& a, const Poly& b) {
  Poly r;
  if (a.c.empty() || b.c.empty()) return r;
  r.c.assign(a.c.size() + b.c.size() - 1, 0.0);
  for (size_t i = 0; i < a.c.size(); ++i)
    for (size_t j = 0; j < b.c.size(); ++j) r.c[i + j] += a.c[i] * b.c[j];
  r.trim(kTrimTol);
  return r;
}

Poly operator*(double s, const Poly& a) {
  Poly r = a;
  for (double& x : r.c) x *= s;
  r.trim(kTrimTol);
  return r;
}

void divrem_bracket2(const Poly& p, Poly* q, Poly* r) {
  std::vector<double> w = p.c;
  q->c.assign(w.size() > 2 ? w.size() - 2 : 0, 0.0);
  for (size_t i = w.size(); i-- > 2;) {
    const double lead = w[i];
    q->c[i - 2] += lead;
    w[i - 2] -= lead;
    w[i] = 0.0;
  }
  if (w.size() > 2) w.resize(2);
  r->c = std::move(w);
  q->trim(kTrimTol);
  r->trim(kTrimTol);
}

// ----------------------------------------------------------------- Rat ----

Rat Rat::over_bracket2(Poly num, int m) {
  CMLAB_REQUIRE(m >= 0, "pole order must be >= 0");
  Rat f;
  if (m == 0) {
    f.head = std::move(num);
  } else {
    f.tail.resize(static_cast<size_t>(m));
    f.tail.back() = std::move(num);
  }
  f.normalize();
  return f;
}

Rat Rat::constant(double a) { return Rat(Poly::constant(a)); }

bool Rat::is_zero(double tol) const {
  if (!head.is_zero(tol)) return false;
  for (const Poly& p : tail)
    if (!p.is_zero(tol)) return false;
  return true;
}

double Rat::max_abs_coeff() const {
  double m = head.max_abs();
  for (const Poly& p : tail) m = std::max(m, p.max_abs());
  return m;
}

void Rat::normalize() {
  for (size_t m = tail.size(); m-- > 0;) {
    if (tail[m].degree() <= 1) continue;
    Poly q, r;
    divrem_bracket2(tail[m], &q, &r);
    tail[m] = std::move(r);
    if (m == 0)
      head = head + q;
    else
      tail[m - 1] = tail[m - 1] + q;
  }
  while (!tail.empty() && tail.back().is_zero(kTrimTol)) tail.pop_back();
  head.trim(kTrimTol);
}

double Rat::eval(double y) const {
  double r = head.eval(y);
  const double u = 1.0 / (1.0 + y * y);
  double up = 1.0;
  for (const Poly& p : tail) {
    up *= u;
    r += p.eval(y) * up;
  }
  return r;
}

Rat operator+(const Rat& a, const Rat& b) {
  Rat r;
  r.head = a.head + b.head;
  r.tail.resize(std::max(a.tail.size(), b.tail.size()));
  for (size_t i = 0; i < a.tail.size(); ++i) r.tail[i] = r.tail[i] + a.tail[i];
  for (size_t i = 0; i < b.tail.size(); ++i) r.tail[i] = r.tail[i] + b.tail[i];
  r.normalize();
  return r;
}

Rat operator-(const Rat& a, const Rat& b) { return a + (-1.0 * b); }

Rat operator*(const Rat& a, const Rat& b) {
  Rat r;
  r.head = a.head * b.head;
  r.tail.resize(a.tail.size() + b.tail.size());
  for (size_t i = 0; i < a.tail.size(); ++i) {
    r.tail[i] = r.tail[i] + b.head * a.tail[i];
    for (size_t j = 0; j < b.tail.size(); ++j)
      r.tail[i + j + 1] = r.tail[i + j + 1] + a.tail[i] * b.tail[j];
  }
  for (size_t j = 0; j < b.tail.size(); ++j) r.tail[j] = r.tail[j] + a.head * b.tail[j];
  r.normalize();
  return r;
}

Rat operator*(double s, const Rat& a) {
  Rat r = a;
  r.head = s * r.head;
  for (Poly& p : r.tail) p = s * p;
  r.normalize();
  return r;
}

Rat derivative(const Rat& f) {
  Rat r;
  r.head = f.head.derivative();
  r.tail.resize(f.tail.size() + 1);
  for (size_t i = 0; i < f.tail.size(); ++i) {
    const int m = static_cast<int>(i) + 1;
    r.tail[i] = r.tail[i] + f.tail[i].derivative();
    // d/dy (1+y^2)^{-m} = -2 m y (1+y^2)^{-m-1}
    r.tail[i + 1] = r.tail[i + 1] + (-2.0 * m) * (Poly::monomial(1) * f.tail[i]);
  }
  r.normalize();
  return r;
}

Rat mul_y(const Rat& f) {
  Rat r;
  const Poly y = Poly::monomial(1);
  r.head = y * f.head;
  r.tail.resize(f.tail.size());
  for (size_t i = 0; i < f.tail.size(); ++i) r.tail[i] = y * f.tail[i];
  r.normalize();
  return r;
}

// ------------------------------------------------------- exact Hilbert ----

namespace {

// H[(a+by)/(1+y^2)^m] via partial fractions over the poles +-i:
//   f = sum_j alpha_j/(y-i)^j + conj(alpha_j)/(y+i)^j,
//   H[1/(y-i)^j] = i/(y-i)^j,  H[1/(y+i)^j] = -i/(y+i)^j,
// then each pair c/(y-i)^j + conj(c)/(y+i)^j = 2 Re[c (y+i)^j]/(1+y^2)^j.
// Returns the pair (H u_m, H v_m).
std::array<Rat, 2> hilbert_pair(int m) {
  using Cplx = std::complex<double>;
  const Cplx I(0.0, 1.0);
  // Series of (z+2i)^{-m} around z=0: d_t = (2i)^{-m-t} (-1)^t C(m+t-1,t).
  std::vector<Cplx> d(static_cast<size_t>(m));
  for (int t = 0; t < m; ++t) {
    const Cplx pw = std::pow(2.0 * I, -(m + t));
    d[static_cast<size_t>(t)] = pw * ((t % 2 == 0) ? 1.0 : -1.0) * binom(m + t - 1, t);
  }
  std::array<Rat, 2> out;
  for (int which = 0; which < 2; ++which) {
    Rat acc;
    for (int j = 1; j <= m; ++j) {
      // alpha_j = coeff of z^{m-j} in N(i+z) (z+2i)^{-m}; N = 1 or y = i + z.
      const int t = m - j;
      Cplx alpha = (which == 0) ? d[static_cast<size_t>(t)]
                                : I * d[static_cast<size_t>(t)] +
                                      (t > 0 ? d[static_cast<size_t>(t - 1)] : Cplx(0.0));
      const Cplx c = I * alpha;  // Hilbert multiplies the (y-i) part by i
      Poly num;
      num.c.assign(static_cast<size_t>(j) + 1, 0.0);
      for (int tt = 0; tt <= j; ++tt) {
        const Cplx ipow = std::pow(I, j - tt);
        num.c[static_cast<size_t>(tt)] = 2.0 * (c * ipow).real() * binom(j, tt);
      }
      num.trim(kTrimTol);
      acc = acc + Rat::over_bracket2(num, j);
    }
    out[static_cast<size_t>(which)] = acc;
  }
  return out;
}

std::vector<std::array<Rat, 2>>& hilbert_table() {
  static std::vector<std::array<Rat, 2>> table;
  return table;
}
std::mutex g_hilbert_mutex;

}  // namespace

Rat u_m(int m) { return Rat::over_bracket2(Poly::constant(1.0), m); }
Rat v_m(int m) { return Rat::over_bracket2(Poly::monomial(1), m); }

Rat hilbert(const Rat& f) {
  Rat g = f;
  g.normalize();
  if (g.head.degree() > 0)
    throw NumericsError("hilbert: operand grows polynomially");
  CMLAB_REQUIRE(g.tail.size() <= 48, "hilbert: pole order out of range");
  Rat out;  // H(const) = 0
  std::lock_guard<std::mutex> lock(g_hilbert_mutex);
  auto& table = hilbert_table();
  while (table.size() < g.tail.size())
    table.push_back(hilbert_pair(static_cast<int>(table.size()) + 1));
  for (size_t i = 0; i < g.tail.size(); ++i) {
    const Poly& p = g.tail[i];
    const double a = p.c.empty() ? 0.0 : p.c[0];
    const double b = p.c.size() > 1 ? p.c[1] : 0.0;
    if (a != 0.0) out = out + a * table[i][0];
    if (b != 0.0) out = out + b * table[i][1];
  }
  return out;
}

// ---------------------------------------------------------------- RatW ----

double RatW::eval(double y) const {
  return a.eval(y) + b.eval(y) / std::sqrt(1.0 + y * y);
}

RatW operator+(const RatW& f, const RatW& g) { return {f.a + g.a, f.b + g.b}; }
RatW operator-(const RatW& f, const RatW& g) { return {f.a - g.a, f.b - g.b}; }
RatW operator*(double s, const RatW& f) { return {s * f.a, s * f.b}; }
RatW operator*(const Rat& r, const RatW& f) { return {r * f.a, r * f.b}; }

RatW operator*(const RatW& f, const RatW& g) {
  // (a1 + b1 w)(a2 + b2 w), w^2 = 1/(1+y^2)
  return {f.a * g.a + u_m(1) * (f.b * g.b), f.a * g.b + f.b * g.a};
}

RatW derivative(const RatW& f) {
  // w' = -y (1+y^2)^{-1} w
  return {derivative(f.a), derivative(f.b) - mul_y(u_m(1) * f.b)};
}

RatW bracket_inv(const RatW& f) { return {u_m(1) * f.b, f.a}; }

Rat bracket_times(const RatW& f) {
  if (!f.a.is_zero(1e-12 * std::max(1.0, f.a.max_abs_coeff())))
    throw NumericsError("bracket_times: rational component must vanish");
  return f.b;
}

RatW soliton_q() { return {Rat{}, Rat::constant(std::sqrt(2.0))}; }

RatW poly_times_q(const Poly& p) { return {Rat{}, std::sqrt(2.0) * Rat(p)}; }

// ------------------------------------------------------------- complex ----

CRat operator+(const CRat& f, const CRat& g) { return {f.re + g.re, f.im + g.im}; }
CRat operator-(const CRat& f, const CRat& g) { return {f.re - g.re, f.im - g.im}; }
CRat operator*(Complex s, const CRat& f) {
  return {s.real() * f.re - s.imag() * f.im, s.real() * f.im + s.imag() * f.re};
}
CRatW operator+(const CRatW& f, const CRatW& g) { return {f.re + g.re, f.im + g.im}; }
CRatW operator-(const CRatW& f, const CRatW& g) { return {f.re - g.re, f.im - g.im}; }
CRatW operator*(Complex s, const CRatW& f) {
  return {s.real() * f.re - s.imag() * f.im, s.real() * f.im + s.imag() * f.re};
}

CRat derivative(const CRat& f) { return {derivative(f.re), derivative(f.im)}; }
CRatW derivative(const CRatW& f) { return {derivative(f.re), derivative(f.im)}; }
CRat hilbert(const CRat& f) { return {hilbert(f.re), hilbert(f.im)}; }

// ---------------------------------------------- soliton-based operators ----

namespace {

// H(Q h) for h in the algebra; Q h must land in R (pure-w input h).
Rat hilbert_q_times(const RatW& h) {
  const RatW qh = soliton_q() * h;
  if (!qh.b.is_zero(1e-12 * std::max(1.0, qh.b.max_abs_coeff())))
    throw NumericsError("operand leaves the rational algebra under H(Q .)");
  return hilbert(qh.a);
}

Rat h_q2() { return 2.0 * v_m(1); }  // H(Q^2) = 2y/(1+y^2)

}  // namespace

CRatW l_q(const CRatW& f) {
  const Rat half_hq2 = 0.5 * h_q2();
  // real part: a' + (1/2)H(Q^2) a + Q H(Q a)
  RatW re = derivative(f.re) + half_hq2 * f.re;
  re = re + RatW{Rat{}, std::sqrt(2.0) * hilbert_q_times(f.re)};
  // imaginary part: c' + (1/2)H(Q^2) c
  RatW im = derivative(f.im) + half_hq2 * f.im;
  return {re, im};
}

namespace {

Rat b_q_component(const RatW& f) {
  const RatW g = bracket_inv(f);
  if (!g.b.is_zero(1e-12 * std::max(1.0, g.b.max_abs_coeff())))
    throw NumericsError("b_q: <y>^{-1} f leaves the rational subspace");
  return mul_y(g.a) - hilbert(g.a);
}

RatW b_q_star_component(const Rat& h) { return {Rat{}, mul_y(h) + hilbert(h)}; }

}  // namespace

CRat b_q(const CRatW& f) { return {b_q_component(f.re), b_q_component(f.im)}; }

CRatW b_q_star(const CRat& h) {
  return {b_q_star_component(h.re), b_q_star_component(h.im)};
}

CRat a_q(const CRatW& f) { return derivative(b_q(f)); }

CRatW a_q_star(const CRat& h) {
  const CRat dh = derivative(h);
  CRatW r = b_q_star(dh);
  return Complex(-1.0, 0.0) * r;
}

CRatW d_tilde_q(const CRatW& f) {
  auto comp = [](const RatW& g) {
    return derivative(g) + RatW{Rat{}, 0.5 * std::sqrt(2.0) * hilbert_q_times(g)};
  };
  return {comp(f.re), comp(f.im)};
}

CRatW h_q(const CRatW& f) {
  const Rat q4 = Rat::over_bracket2(Poly::constant(4.0), 2);  // Q^4
  auto comp = [&](const RatW& g) {
    const RatW lap = derivative(derivative(g));
    // |D|(Q g) = H d/dy (Q g); Q g is rational for pure-w g.
    const RatW qg = soliton_q() * g;
    if (!qg.b.is_zero(1e-12 * std::max(1.0, qg.b.max_abs_coeff())))
      throw NumericsError("h_q: Q g leaves the rational subspace");
    const Rat absd = hilbert(derivative(qg.a));
    return (-1.0) * lap + (0.25 * q4) * g - RatW{Rat{}, std::sqrt(2.0) * absd};
  };
  return {comp(f.re), comp(f.im)};
}

CRatW scaling_gen(const CRatW& f, double s) {
  auto comp = [&](const RatW& g) {
    return (0.5 - s) * g + RatW{mul_y(derivative(g).a), mul_y(derivative(g).b)};
  };
  return {comp(f.re), comp(f.im)};
}

CRat cal_l(int j, const CRatW& f) {
  CMLAB_REQUIRE(j >= 1 && j <= 24, "cal_l: order out of range");
  // L_j^1 on the real part
  const RatW uw = bracket_inv(f.re);
  if (!uw.b.is_zero(1e-12 * std::max(1.0, uw.b.max_abs_coeff())))
    throw NumericsError("cal_l: <y>^{-1} Re f leaves the rational subspace");
  const Rat u = uw.a;
  Rat t1 = u + derivative(mul_y(u));
  for (int it = 0; it < j - 1; ++it) t1 = derivative(t1);
  Rat du = u;
  for (int it = 0; it < j; ++it) du = derivative(du);
  const Rat re = t1 - hilbert(du);
  // L_j^2 on the imaginary part
  const Rat g = bracket_times(f.im);  // <y> Im f
  const Rat inner = u_m(1) * derivative(g);
  Rat t2 = mul_y(inner);
  Rat t3 = inner;
  for (int it = 0; it < j - 1; ++it) {
    t2 = derivative(t2);
    t3 = derivative(t3);
  }
  const Rat im = t2 - hilbert(t3);
  return {re, im};
}

// -------------------------------------------------------------- sample ----

namespace {
template <class F>
Field sample_impl(const F& f, const GridSpec& g) {
  Field out = zeros(g);
  for (size_t j = 0; j < g.n; ++j) out.v[j] = Complex(f.eval(g.x(j)));
  return out;
}
}  // namespace

Field sample(const Rat& f, const GridSpec& g) { return sample_impl(f, g); }
Field sample(const RatW& f, const GridSpec& g) { return sample_impl(f, g); }

Field sample(const CRat& f, const GridSpec& g) {
  Field out = zeros(g);
  for (size_t j = 0; j < g.n; ++j) out.v[j] = f.eval(g.x(j));
  return out;
}

Field sample(const CRatW& f, const GridSpec& g) {
  Field out = zeros(g);
  for (size_t j = 0; j < g.n; ++j) out.v[j] = f.eval(g.x(j));
  return out;
}

}  // namespace cmlab::rat
