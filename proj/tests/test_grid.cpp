// Spectral layer: transforms, multipliers, norms, modulation, serialization.
#include "doctest.h"

#include <cmath>
#include <sstream>

#include "cmlab/grid.hpp"

using namespace cmlab;

namespace {

Field soliton(const GridSpec& g) {
  return make_field(g, [](double x) {
    return Complex(std::sqrt(2.0) / std::sqrt(1.0 + x * x), 0.0);
  });
}

double max_diff(const Field& a, const Field& b) {
  double m = 0.0;
  for (size_t j = 0; j < a.size(); ++j) m = std::max(m, std::abs(a.v[j] - b.v[j]));
  return m;
}

double max_diff_window(const Field& a, const Field& b, double radius) {
  double m = 0.0;
  for (size_t j = 0; j < a.size(); ++j) {
    if (std::abs(a.grid.x(j)) > radius) continue;
    m = std::max(m, std::abs(a.v[j] - b.v[j]));
  }
  return m;
}

}  // namespace

TEST_CASE("grid indexing") {
  GridSpec g;  // defaults: n=4096, box 256
  CHECK(g.h() == doctest::Approx(0.0625));
  CHECK(g.x(0) == doctest::Approx(-128.0));
  CHECK(g.x(g.n / 2) == doctest::Approx(0.0));
  CHECK(g.signed_index(0) == 0);
  CHECK(g.signed_index(1) == 1);
  CHECK(g.signed_index(g.n - 1) == -1);
  CHECK(g.signed_index(g.n / 2) == -static_cast<long>(g.n) / 2);
  CHECK(g.k(1) == doctest::Approx(2.0 * pi / 256.0));
}

TEST_CASE("fft round trip and Parseval") {
  GridSpec g;
  Field f = random_smooth_field(g, 7);
  Spectrum s = to_spectrum(f);
  Field back = to_field(s);
  CHECK(max_diff(f, back) < 1e-13);
  // Parseval with unnormalized forward DFT: ||f||^2 = (box/n^2) sum |c|^2
  double lhs = l2_norm(f) * l2_norm(f);
  double rhs = 0.0;
  for (const Complex& c : s.c) rhs += std::norm(c);
  rhs *= g.box_len / (static_cast<double>(g.n) * static_cast<double>(g.n));
  CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
  // constant c -> k=0 coefficient c*n
  Field ones = make_field(g, [](double) { return Complex(2.5, -1.0); });
  Spectrum s1 = to_spectrum(ones);
  CHECK(std::abs(s1.c[0] - Complex(2.5, -1.0) * static_cast<double>(g.n)) <
        1e-9 * static_cast<double>(g.n));
}

TEST_CASE("derivative: exact on waves, closed form for Q'") {
  GridSpec g;
  const double k0 = 2.0 * pi * 12.0 / g.box_len;
  Field wave = make_field(g, [&](double x) { return std::exp(Complex(0, k0 * x)); });
  Field dw = derivative(wave);
  Field expect = Complex(0, k0) * wave;
  CHECK(max_diff(dw, expect) < 1e-12 * k0);

  // Q'(x) = -sqrt(2) x <x>^{-3}; spec tolerance 1e-6 on the |x|<=64 window
  Field q = soliton(g);
  Field dq = derivative(q);
  Field dq_exact = make_field(g, [](double x) {
    return Complex(-std::sqrt(2.0) * x / std::pow(1.0 + x * x, 1.5), 0.0);
  });
  CHECK(max_diff_window(dq, dq_exact, 64.0) < 1e-6);

  CHECK_THROWS(derivative(q, 9));
}

TEST_CASE("hilbert: waves, involution, arctan identity") {
  GridSpec g;
  const double k0 = 2.0 * pi * 9.0 / g.box_len;
  Field c = make_field(g, [&](double x) { return Complex(std::cos(k0 * x), 0.0); });
  Field s = make_field(g, [&](double x) { return Complex(std::sin(k0 * x), 0.0); });
  CHECK(max_diff(hilbert(c), s) < 1e-13);
  CHECK(max_diff(hilbert(s), Complex(-1.0, 0.0) * c) < 1e-13);

  // H^2 = -(I - mean)
  Field f = random_smooth_field(g, 3);
  Complex mu = integrate(f) * (1.0 / g.box_len);
  Field hh = hilbert(hilbert(f));
  Field expect = Complex(-1.0, 0.0) * f;
  for (auto& z : expect.v) z += mu;
  CHECK(max_diff(hh, expect) < 1e-12);

  // |D| = H . d/dx
  Field a1 = abs_d(f);
  Field a2 = hilbert(derivative(f));
  CHECK(max_diff(a1, a2) < 1e-12 * sup_norm(a1));

  // H(Q^2) = x Q^2. The image 2x/(1+x^2) has 1/x tails the periodic box
  // cannot carry, so the interior error is periodization-dominated:
  // ~6.7e-3 sup-relative at box 256, quartering per box doubling (the
  // window stays |x|<=64 while the images recede).
  auto hq2_rel = [](double box, size_t n) {
    GridSpec gg;
    gg.n = n;
    gg.box_len = box;
    Field q = soliton(gg);
    Field hq2 = hilbert(abs2(q));
    Field xq2 = mul_x(abs2(q));
    return max_diff_window(hq2, xq2, 64.0) / sup_norm_window(xq2, 64.0);
  };
  const double r256 = hq2_rel(256.0, 4096);
  const double r512 = hq2_rel(512.0, 8192);
  CHECK(r256 < 8e-3);
  CHECK(r512 < 0.35 * r256);  // >= first-order decay under box doubling
}

TEST_CASE("szego projector conventions") {
  GridSpec g;
  const double k0 = 2.0 * pi * 5.0 / g.box_len;
  Field c = make_field(g, [&](double x) { return Complex(std::cos(k0 * x), 0.0); });
  // Pi_+ cos(kx) = e^{ikx}/2
  Field pc = szego(c);
  Field expect = make_field(g, [&](double x) { return 0.5 * std::exp(Complex(0, k0 * x)); });
  CHECK(max_diff(pc, expect) < 1e-13);
  // k=0 carries weight 1/2
  Field ones = make_field(g, [](double) { return Complex(3.0, 0.0); });
  CHECK(max_diff(szego(ones), Complex(0.5, 0.0) * ones) < 1e-13);
}

TEST_CASE("dealias keeps low third, kills high modes") {
  GridSpec g;
  g.n = 256;
  g.box_len = 64.0;
  const long keep = 40, kill = 100;  // n/3 = 85.3
  Field lo = make_field(g, [&](double x) {
    return std::exp(Complex(0, 2.0 * pi * keep * x / g.box_len));
  });
  Field hi = make_field(g, [&](double x) {
    return std::exp(Complex(0, 2.0 * pi * kill * x / g.box_len));
  });
  CHECK(max_diff(dealias_23(lo), lo) < 1e-13);
  CHECK(sup_norm(dealias_23(hi)) < 1e-13);
}

TEST_CASE("product identity for mean-zero band-limited fields") {
  // fg = Hf Hg - H(f Hg + Hf g), exact at band <= n/3 (no aliasing).
  GridSpec g;
  Field f = real_part(random_smooth_field(g, 11));
  Field h = real_part(random_smooth_field(g, 12));
  // remove means
  double mf = mean(f), mh = mean(h);
  for (auto& z : f.v) z -= mf;
  for (auto& z : h.v) z -= mh;
  Field lhs = f * h;
  Field rhs = hilbert(f) * hilbert(h) - hilbert(f * hilbert(h) + hilbert(f) * h);
  CHECK(max_diff(lhs, rhs) < 1e-10);
}

TEST_CASE("commutator [x, H] f = pi^{-1} int f on compact bumps") {
  // Two error sources: periodic-kernel correction O((pi d/L)^2/3) and bump
  // aliasing. Box 65536 with h=1/8 and radius 6 puts both below ~4e-7
  // relative on the |x| <= 16 probe window.
  GridSpec g;
  g.n = 1 << 19;
  g.box_len = 65536.0;
  Field f = bump_field(g, 0.0, 6.0, Complex(1.3, 0.0));
  double target = integrate_real(f) / pi;
  Field comm = mul_x(hilbert(f)) - hilbert(mul_x(f));
  double worst = 0.0;
  for (size_t j = 0; j < g.n; ++j) {
    if (std::abs(g.x(j)) > 16.0) continue;
    worst = std::max(worst, std::abs(comm.v[j].real() - target));
  }
  CHECK(worst / std::abs(target) < 1e-6);
}

TEST_CASE("integrals and norms of Q against closed forms") {
  GridSpec g;
  Field q = soliton(g);
  // mass over the box: int_{-128}^{128} 2/(1+x^2) = 4 atan(128)
  const double mass_window = 4.0 * std::atan(128.0);
  CHECK(std::abs(inner_r(q, q) - mass_window) < 1e-8);
  CHECK(std::abs(integrate_real(abs2(q)) - mass_window) < 1e-8);
  // trivia: (f, if)_r = 0
  CHECK(inner_r(q, Complex(0, 1) * q) == doctest::Approx(0.0));

  // norm_adapted(Q,1)^2 = ||Q'||^2 + ||<x>^{-1}Q||^2 over the box:
  //   int x^2/(1+x^2)^3 = x/(8(1+x^2)) - x/(4(1+x^2)^2) + atan(x)/8
  //   int 1/(1+x^2)^2   = x/(2(1+x^2)) + atan(x)/2
  const double a = 128.0, a2 = 1.0 + a * a;
  const double i_qp = 2.0 * (a / (8.0 * a2) - a / (4.0 * a2 * a2) + std::atan(a) / 8.0);
  const double i_wq = 2.0 * (a / (2.0 * a2) + std::atan(a) / 2.0);
  const double expect = 2.0 * i_qp + 2.0 * i_wq;  // integrands carry the factor 2
  const double got = std::pow(norm_adapted(q, 1), 2.0);
  CHECK(std::abs(got - expect) < 1e-8);

  CHECK(norm_hs(q, 0.0) == doctest::Approx(l2_norm(q)).epsilon(1e-13));
  CHECK(norm_adapted(q, 0) == doctest::Approx(l2_norm(q)).epsilon(1e-13));
}

TEST_CASE("antiderivative from the left edge") {
  GridSpec g;
  Field q2 = abs2(soliton(g));
  Field F = antiderivative_from_left(q2);
  // int_{-128}^x 2/(1+t^2) dt = 2 atan(x) + 2 atan(128)
  Field expect = make_field(g, [](double x) {
    return Complex(2.0 * std::atan(x) + 2.0 * std::atan(128.0), 0.0);
  });
  CHECK(max_diff(F, expect) < 1e-8);
  CHECK(std::abs(F.v[0].real()) < 1e-10);  // starts at zero
}

TEST_CASE("modulate: phase/translation exact on band-limited data") {
  GridSpec g;
  g.n = 1024;
  g.box_len = 128.0;
  const double k0 = 2.0 * pi * 7.0 / g.box_len;
  Field wave = make_field(g, [&](double x) { return std::exp(Complex(0, k0 * x)); });
  Field m = modulate(wave, 1.0, 0.7, 3.25);
  Field expect = make_field(g, [&](double x) {
    return std::exp(Complex(0, 0.7)) * std::exp(Complex(0, k0 * (x - 3.25)));
  });
  // Samples whose source point (x - x0) leaves the box are blanked (line
  // semantics); compare on the remainder and pin the blanks to zero.
  double worst = 0.0;
  for (size_t j = 0; j < g.n; ++j) {
    const double src = g.x(j) - 3.25;
    if (src < -0.5 * g.box_len || src >= 0.5 * g.box_len) {
      CHECK(m.v[j] == Complex(0.0, 0.0));
    } else {
      worst = std::max(worst, std::abs(m.v[j] - expect.v[j]));
    }
  }
  CHECK(worst < 1e-12);
}

TEST_CASE("modulate: scaling against the closed form") {
  GridSpec g;
  g.n = 1 << 15;
  g.box_len = 2048.0;
  Field q = soliton(g);
  Field m = modulate(q, 2.0, pi / 2.0, 0.0);
  Field expect = make_field(g, [](double x) {
    double qv = std::sqrt(2.0) / std::sqrt(1.0 + 0.25 * x * x);
    return Complex(0.0, qv / std::sqrt(2.0));  // e^{i pi/2} 2^{-1/2} Q(x/2)
  });
  CHECK(max_diff_window(m, expect, 64.0) < 1e-8);
}

TEST_CASE("modulate: unitarity on well-contained data") {
  // (Q at lambda=2 loses box mass through the 1/x tail, so test unitarity
  // on a compactly contained smooth field instead.)
  GridSpec g;
  g.n = 4096;
  g.box_len = 256.0;
  Field f = random_smooth_field(g, 21, 2.0);
  Field m = modulate(f, 0.5, 1.1, 2.0);
  CHECK(l2_norm(m) == doctest::Approx(l2_norm(f)).epsilon(1e-10));
}

TEST_CASE("interp at nodes and between nodes") {
  GridSpec g;
  g.n = 512;
  g.box_len = 64.0;
  const double k0 = 2.0 * pi * 6.0 / g.box_len;
  Field wave = make_field(g, [&](double x) { return std::exp(Complex(0, k0 * x)); });
  CHECK(std::abs(interp_at(wave, g.x(37)) - wave.v[37]) < 1e-12);
  const double xm = g.x(100) + 0.37 * g.h();
  CHECK(std::abs(interp_at(wave, xm) - std::exp(Complex(0, k0 * xm))) < 1e-11);
}

TEST_CASE("binary serialization round trip") {
  GridSpec g;
  g.n = 128;
  g.box_len = 16.0;
  Field f = random_smooth_field(g, 99);
  std::stringstream ss;
  write_binary(f, ss);
  Field back = read_binary(ss);
  CHECK(back.grid == f.grid);
  REQUIRE(back.size() == f.size());
  for (size_t j = 0; j < f.size(); ++j) CHECK(back.v[j] == f.v[j]);
}

TEST_CASE("csv writer emits one row per sample") {
  GridSpec g;
  g.n = 16;
  g.box_len = 4.0;
  Field f = make_field(g, [](double x) { return Complex(x, -x); });
  std::stringstream ss;
  write_csv(f, ss);
  std::string line;
  size_t rows = 0;
  bool header = false;
  while (std::getline(ss, line)) {
    if (rows == 0 && line.find("x,") == 0) header = true;
    ++rows;
  }
  CHECK(header);
  CHECK(rows == g.n + 1);
}

TEST_CASE("random fields: determinism, realness, normalization") {
  GridSpec g;
  Field a = random_smooth_field(g, 42);
  Field b = random_smooth_field(g, 42);
  REQUIRE(a.size() == b.size());
  for (size_t j = 0; j < a.size(); ++j) CHECK(a.v[j] == b.v[j]);
  Field c = random_smooth_field(g, 43);
  CHECK(max_diff(a, c) > 1e-3);  // different seed, different field
  Field r = random_smooth_field(g, 7, 1.0, /*complex_valued=*/false);
  for (size_t j = 0; j < r.size(); ++j) REQUIRE(r.v[j].imag() == 0.0);
  CHECK(l2_norm(a) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(spectral_tail_fraction(a) < 1e-10);
}

TEST_CASE("bump field support and smoothness") {
  GridSpec g;
  Field f = bump_field(g, 2.0, 3.0, Complex(2.0, 0.0));
  // C-infinity but not analytic: trig interpolation converges like the
  // spectral tail (~2e-9 here), not to machine precision.
  CHECK(std::abs(interp_at(f, 2.0) - Complex(2.0, 0.0)) < 1e-6);
  CHECK(sup_norm_window(f, 64.0) == doctest::Approx(2.0));
  for (size_t j = 0; j < g.n; ++j) {
    if (std::abs(g.x(j) - 2.0) >= 3.0) CHECK(f.v[j] == Complex(0.0, 0.0));
  }
  CHECK(spectral_tail_fraction(f) < 1e-7);
}

TEST_CASE("pointwise helpers") {
  GridSpec g;
  g.n = 256;
  g.box_len = 32.0;
  Field f = random_smooth_field(g, 5);
  Field w = mul_japanese_bracket(f, -2.0);
  Field back = mul_japanese_bracket(w, 2.0);
  CHECK(max_diff(f, back) < 1e-13);
  Field xf = mul_x(f);
  for (size_t j = 0; j < g.n; j += 31)
    CHECK(std::abs(xf.v[j] - f.v[j] * g.x(j)) < 1e-15 * (1.0 + std::abs(g.x(j))));
}
