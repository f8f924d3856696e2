#include "cmlab/grid.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <iostream>
#include <map>
#include <memory>
#include <mutex>
#include <ostream>
#include <random>

namespace cmlab {

void validate(const GridSpec& g) {
  CMLAB_REQUIRE(g.n >= 8 && (g.n & (g.n - 1)) == 0, "grid: n must be a power of two >= 8");
  CMLAB_REQUIRE(g.box_len > 0.0 && std::isfinite(g.box_len), "grid: box_len must be positive");
}

namespace {

struct PlanEntry {
  fftw_complex* buf_in = nullptr;
  fftw_complex* buf_out = nullptr;
  fftw_plan fwd{};
  fftw_plan bwd{};
  std::mutex mtx;

  explicit PlanEntry(std::size_t n) {
    buf_in = fftw_alloc_complex(n);
    buf_out = fftw_alloc_complex(n);
    // FFTW_ESTIMATE: deterministic plan selection, no wisdom dependence
    fwd = fftw_plan_dft_1d(static_cast<int>(n), buf_in, buf_out, FFTW_FORWARD, FFTW_ESTIMATE);
    bwd = fftw_plan_dft_1d(static_cast<int>(n), buf_in, buf_out, FFTW_BACKWARD, FFTW_ESTIMATE);
  }
  ~PlanEntry() {
    fftw_destroy_plan(fwd);
    fftw_destroy_plan(bwd);
    fftw_free(buf_in);
    fftw_free(buf_out);
  }
};

PlanEntry& plan_for(std::size_t n) {
  static std::mutex map_mtx;
  static std::map<std::size_t, std::unique_ptr<PlanEntry>> plans;
  std::lock_guard lock(map_mtx);
  auto& e = plans[n];
  if (!e) e = std::make_unique<PlanEntry>(n);
  return *e;
}

void run_fft(const std::vector<Complex>& in, std::vector<Complex>& out, std::size_t n, bool forward) {
  auto& e = plan_for(n);
  std::lock_guard lock(e.mtx);
  std::memcpy(e.buf_in, in.data(), n * sizeof(Complex));
  fftw_execute(forward ? e.fwd : e.bwd);
  out.resize(n);
  std::memcpy(out.data(), e.buf_out, n * sizeof(Complex));
}

// e^{2πi t}; caller keeps |t| modest (reduced by integer splitting where needed)
inline Complex exp2pi(double t) {
  const double a = 2.0 * pi * t;
  return {std::cos(a), std::sin(a)};
}

}  // namespace

Field make_field(const GridSpec& g, const std::function<Complex(double)>& f) {
  Field out(g);
  for (std::size_t j = 0; j < g.n; ++j) out[j] = f(g.x(j));
  return out;
}

Field zeros(const GridSpec& g) { return Field(g); }

Spectrum to_spectrum(const Field& f) {
  validate(f.grid);
  CMLAB_REQUIRE(f.v.size() == f.grid.n, "to_spectrum: field/grid size mismatch");
  Spectrum s;
  s.grid = f.grid;
  run_fft(f.v, s.c, f.grid.n, true);
  return s;
}

Field to_field(const Spectrum& s) {
  CMLAB_REQUIRE(s.c.size() == s.grid.n, "to_field: spectrum/grid size mismatch");
  Field f(s.grid);
  run_fft(s.c, f.v, s.grid.n, false);
  const double inv = 1.0 / static_cast<double>(s.grid.n);
  for (auto& z : f.v) z *= inv;
  return f;
}

// ---- pointwise algebra ----

namespace {
void check_same(const Field& a, const Field& b, const char* who) {
  CMLAB_REQUIRE(a.grid == b.grid, std::string(who) + ": grid mismatch");
}
}  // namespace

Field operator+(const Field& a, const Field& b) {
  check_same(a, b, "operator+");
  Field out = a;
  for (std::size_t j = 0; j < out.size(); ++j) out[j] += b[j];
  return out;
}
Field operator-(const Field& a, const Field& b) {
  check_same(a, b, "operator-");
  Field out = a;
  for (std::size_t j = 0; j < out.size(); ++j) out[j] -= b[j];
  return out;
}
Field operator*(const Field& a, const Field& b) {
  check_same(a, b, "operator*");
  Field out = a;
  for (std::size_t j = 0; j < out.size(); ++j) out[j] *= b[j];
  return out;
}
Field operator*(Complex s, const Field& a) {
  Field out = a;
  for (auto& z : out.v) z *= s;
  return out;
}
Field& operator+=(Field& a, const Field& b) {
  check_same(a, b, "operator+=");
  for (std::size_t j = 0; j < a.size(); ++j) a[j] += b[j];
  return a;
}
Field& operator-=(Field& a, const Field& b) {
  check_same(a, b, "operator-=");
  for (std::size_t j = 0; j < a.size(); ++j) a[j] -= b[j];
  return a;
}
Field conj(const Field& a) {
  Field out = a;
  for (auto& z : out.v) z = std::conj(z);
  return out;
}
Field real_part(const Field& a) {
  Field out = a;
  for (auto& z : out.v) z = Complex{z.real(), 0.0};
  return out;
}
Field imag_part(const Field& a) {
  Field out = a;
  for (auto& z : out.v) z = Complex{z.imag(), 0.0};
  return out;
}
Field abs2(const Field& a) {
  Field out = a;
  for (auto& z : out.v) z = Complex{std::norm(z), 0.0};
  return out;
}
Field apply(const Field& a, const std::function<Complex(double, Complex)>& fn) {
  Field out = a;
  for (std::size_t j = 0; j < out.size(); ++j) out[j] = fn(a.grid.x(j), a[j]);
  return out;
}
Field mul_x(const Field& a) {
  Field out = a;
  for (std::size_t j = 0; j < out.size(); ++j) out[j] *= a.grid.x(j);
  return out;
}
Field mul_japanese_bracket(const Field& a, double power) {
  Field out = a;
  for (std::size_t j = 0; j < out.size(); ++j) {
    const double x = a.grid.x(j);
    out[j] *= std::pow(1.0 + x * x, 0.5 * power);
  }
  return out;
}

// ---- spectral multipliers ----

namespace {
Field apply_symbol(const Field& f, const std::function<Complex(double, bool)>& symbol) {
  Spectrum s = to_spectrum(f);
  const std::size_t n = s.grid.n;
  for (std::size_t m = 0; m < n; ++m) {
    const bool nyquist = (m == n / 2);
    s.c[m] *= symbol(s.grid.k(m), nyquist);
  }
  return to_field(s);
}
}  // namespace

Field derivative(const Field& f, int order) {
  CMLAB_REQUIRE(order >= 1 && order <= 8, "derivative: order must be in [1,8]");
  return apply_symbol(f, [order](double k, bool nyq) -> Complex {
    if (nyq && (order % 2 == 1)) return 0.0;  // odd multiplier: zero Nyquist
    Complex ik{0.0, k};
    Complex p = 1.0;
    for (int r = 0; r < order; ++r) p *= ik;
    return p;
  });
}

Field hilbert(const Field& f) {
  return apply_symbol(f, [](double k, bool nyq) -> Complex {
    if (nyq || k == 0.0) return 0.0;
    return k > 0.0 ? Complex{0.0, -1.0} : Complex{0.0, 1.0};
  });
}

Field abs_d(const Field& f) {
  return apply_symbol(f, [](double k, bool nyq) -> Complex {
    if (nyq) return 0.0;  // match H∂x exactly
    return std::abs(k);
  });
}

Field szego(const Field& f) {
  return apply_symbol(f, [](double k, bool nyq) -> Complex {
    if (nyq) return 0.0;
    if (k == 0.0) return 0.5;
    return k > 0.0 ? 1.0 : 0.0;
  });
}

Field dealias_23(const Field& f) {
  Spectrum s = to_spectrum(f);
  const long cut = static_cast<long>(s.grid.n) / 3;
  for (std::size_t m = 0; m < s.c.size(); ++m)
    if (std::labs(s.grid.signed_index(m)) > cut) s.c[m] = 0.0;
  return to_field(s);
}

double spectral_tail_fraction(const Field& f) {
  Spectrum s = to_spectrum(f);
  const long n = static_cast<long>(s.grid.n);
  double total = 0.0, tail = 0.0;
  for (std::size_t m = 0; m < s.c.size(); ++m) {
    const long mm = std::labs(s.grid.signed_index(m));
    const double p = std::norm(s.c[m]);
    total += p;
    if (mm >= n / 4 && mm <= n / 3) tail += p;
  }
  return total > 0.0 ? tail / total : 0.0;
}

// ---- quadrature and norms ----

double integrate_real(const Field& f) {
  double acc = 0.0;
  for (const auto& z : f.v) acc += z.real();
  return acc * f.grid.h();
}
Complex integrate(const Field& f) {
  Complex acc = 0.0;
  for (const auto& z : f.v) acc += z;
  return acc * f.grid.h();
}
double inner_r(const Field& f, const Field& g) {
  check_same(f, g, "inner_r");
  double acc = 0.0;
  for (std::size_t j = 0; j < f.size(); ++j)
    acc += f[j].real() * g[j].real() + f[j].imag() * g[j].imag();
  return acc * f.grid.h();
}
double l2_norm(const Field& f) { return std::sqrt(std::max(0.0, inner_r(f, f))); }
double sup_norm(const Field& f) {
  double m = 0.0;
  for (const auto& z : f.v) m = std::max(m, std::abs(z));
  return m;
}
double l2_norm_window(const Field& f, double radius) {
  double acc = 0.0;
  for (std::size_t j = 0; j < f.size(); ++j)
    if (std::abs(f.grid.x(j)) <= radius) acc += std::norm(f[j]);
  return std::sqrt(acc * f.grid.h());
}
double sup_norm_window(const Field& f, double radius) {
  double m = 0.0;
  for (std::size_t j = 0; j < f.size(); ++j)
    if (std::abs(f.grid.x(j)) <= radius) m = std::max(m, std::abs(f[j]));
  return m;
}
double mean(const Field& f, double* imag) {
  Complex s = integrate(f);
  s /= f.grid.box_len;
  if (imag) *imag = s.imag();
  return s.real();
}

double norm_hs(const Field& f, double s) {
  CMLAB_REQUIRE(std::abs(s) <= 16.0, "norm_hs: |s| must be <= 16");
  Spectrum sp = to_spectrum(f);
  const double scale = f.grid.box_len / (static_cast<double>(f.grid.n) * static_cast<double>(f.grid.n));
  double acc = 0.0;
  for (std::size_t m = 0; m < sp.c.size(); ++m) {
    const double k = sp.grid.k(m);
    acc += std::pow(1.0 + k * k, s) * std::norm(sp.c[m]);
  }
  return std::sqrt(acc * scale);
}

double norm_adapted(const Field& f, int k) {
  CMLAB_REQUIRE(k >= 0 && k <= 8, "norm_adapted: k must be in [0,8]");
  double acc = 0.0;
  for (int j = 0; j <= k; ++j) {
    Field d = (k - j) > 0 ? derivative(f, k - j) : f;
    Field w = mul_japanese_bracket(d, -static_cast<double>(j));
    const double nrm = l2_norm(w);
    acc += nrm * nrm;
  }
  return std::sqrt(acc);
}

Field antiderivative_from_left(const Field& f) {
  Spectrum s = to_spectrum(f);
  const std::size_t n = s.grid.n;
  const Complex mu_c = s.c[0] / static_cast<double>(n);  // mean of f
  s.c[0] = 0.0;
  for (std::size_t m = 1; m < n; ++m) {
    if (m == n / 2) {
      s.c[m] = 0.0;
      continue;
    }
    s.c[m] /= Complex{0.0, s.grid.k(m)};
  }
  Field g = to_field(s);
  const Complex g_left = g[0];  // grid starts at x = -box/2
  Field out(f.grid);
  for (std::size_t j = 0; j < n; ++j)
    out[j] = g[j] - g_left + mu_c * (f.grid.x(j) + 0.5 * f.grid.box_len);
  return out;
}

// ---- modulate (Bluestein fractional DFT) ----

namespace {

// phase e^{iπσ q²/n} with q² split as n·f + r to keep fmod arguments small
inline Complex chirp_phase(double sigma, long q, long n, double sign) {
  const long long q2 = static_cast<long long>(q) * static_cast<long long>(q);
  const long long f = q2 / n;
  const long long r = q2 % n;
  double t = 0.5 * (std::fmod(sigma * static_cast<double>(f), 2.0) +
                    sigma * static_cast<double>(r) / static_cast<double>(n));
  return exp2pi(sign * t);
}

// g_i = Σ_{p=0}^{n-1} a_p e^{2πi σ p i / n},  i = 0..n-1, via Bluestein
std::vector<Complex> bluestein(const std::vector<Complex>& a, double sigma) {
  const long n = static_cast<long>(a.size());
  const std::size_t N = 2 * static_cast<std::size_t>(n);  // n is a power of two
  std::vector<Complex> u(N, Complex{}), w(N, Complex{});
  for (long p = 0; p < n; ++p) u[p] = a[p] * chirp_phase(sigma, p, n, +1.0);
  // kernel b_l = e^{-iπσ l²/n}, l = -(n-1)..(n-1), wrapped into length N
  for (long l = 0; l < n; ++l) w[l] = chirp_phase(sigma, l, n, -1.0);
  for (long l = 1; l < n; ++l) w[N - static_cast<std::size_t>(l)] = chirp_phase(sigma, l, n, -1.0);
  std::vector<Complex> U, W;
  run_fft(u, U, N, true);
  run_fft(w, W, N, true);
  for (std::size_t j = 0; j < N; ++j) U[j] *= W[j];
  std::vector<Complex> conv;
  run_fft(U, conv, N, false);
  std::vector<Complex> g(n);
  const double inv = 1.0 / static_cast<double>(N);
  for (long i = 0; i < n; ++i) g[i] = conv[i] * inv * chirp_phase(sigma, i, n, +1.0);
  return g;
}

}  // namespace

Field modulate(const Field& f, double lambda, double gamma, double x0) {
  CMLAB_REQUIRE(lambda > 0.0 && std::isfinite(lambda), "modulate: lambda must be positive");
  const GridSpec& g = f.grid;
  const long n = static_cast<long>(g.n);
  const double L = g.box_len;
  const double sigma = 1.0 / lambda;

  // warn once if the rescaled sampling set leaves the box while f has edge mass
  const double reach = 0.5 * L * sigma + std::abs(x0) * sigma;
  if (reach > 0.5 * L * (1.0 + 1e-12)) {
    double edge = 0.0, tot = 0.0;
    for (std::size_t j = 0; j < g.n; ++j) {
      const double p = std::norm(f[j]);
      tot += p;
      if (std::abs(g.x(j)) > 0.45 * L) edge += p;
    }
    if (tot > 0.0 && edge / tot > 1e-10) {
      static std::once_flag warned;
      std::call_once(warned, [] {
        std::cerr << "[cmlab] modulate: rescaled support leaves the box; periodic images bleed in\n";
      });
    }
  }

  Spectrum sp = to_spectrum(f);
  // a_p = c_{m'} e^{2πi m' β / n}, m' = p - n/2, β in grid units
  const double beta = (0.5 * L * (1.0 - sigma) - x0 * sigma) / g.h();
  const double beta_int = std::floor(beta);
  const double beta_frac = beta - beta_int;
  std::vector<Complex> a(static_cast<std::size_t>(n));
  for (long p = 0; p < n; ++p) {
    const long mp = p - n / 2;
    const std::size_t m = static_cast<std::size_t>(mp >= 0 ? mp : mp + n);
    // m'·β/n mod 1, with the integer part of β handled exactly
    const long long mi = (static_cast<long long>(mp) * static_cast<long long>(beta_int)) %
                         static_cast<long long>(n);
    const double t = (static_cast<double>(mi) + static_cast<double>(mp) * beta_frac) /
                     static_cast<double>(n);
    a[static_cast<std::size_t>(p)] = sp.c[m] * exp2pi(t);
  }
  std::vector<Complex> gvals = bluestein(a, sigma);
  Field out(g);
  const Complex pref = std::polar(1.0 / std::sqrt(lambda), gamma) / static_cast<double>(n);
  for (long i = 0; i < n; ++i) {
    // e^{-iπ σ i} factor from the signed-index shift
    const double t = -0.5 * sigma * static_cast<double>(i);
    out[static_cast<std::size_t>(i)] =
        pref * gvals[static_cast<std::size_t>(i)] * exp2pi(std::fmod(t, 1.0));
  }
  // Line semantics: f is only known on [-L/2, L/2). Where the source point
  // (x - x0)/lambda falls outside, the periodic synthesis would show a
  // shrunken alias copy (certain for lambda < 1); blank those samples.
  for (long i = 0; i < n; ++i) {
    const double src = (g.x(static_cast<std::size_t>(i)) - x0) * sigma;
    if (src < -0.5 * L || src >= 0.5 * L) out[static_cast<std::size_t>(i)] = Complex{};
  }
  return out;
}

Complex interp_at(const Field& f, double x) {
  Spectrum sp = to_spectrum(f);
  const std::size_t n = sp.grid.n;
  const double u = (x + 0.5 * f.grid.box_len) / f.grid.h();
  Complex acc = 0.0;
  for (std::size_t m = 0; m < n; ++m) {
    if (m == n / 2) continue;  // drop Nyquist for symmetry
    const double mp = static_cast<double>(sp.grid.signed_index(m));
    acc += sp.c[m] * exp2pi(std::fmod(mp * u / static_cast<double>(n), 1.0));
  }
  return acc / static_cast<double>(n);
}

// ---- serialization ----

namespace {
constexpr char kMagic[8] = {'C', 'M', 'L', 'A', 'B', 'F', '0', '1'};
}

void write_csv(const Field& f, std::ostream& os) {
  os << "x,re,im\n";
  char buf[96];
  for (std::size_t j = 0; j < f.size(); ++j) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", f.grid.x(j), f[j].real(), f[j].imag());
    os << buf;
  }
}

void write_binary(const Field& f, std::ostream& os) {
  os.write(kMagic, 8);
  const std::uint64_t n = f.grid.n;
  os.write(reinterpret_cast<const char*>(&n), 8);
  os.write(reinterpret_cast<const char*>(&f.grid.box_len), 8);
  os.write(reinterpret_cast<const char*>(f.v.data()),
           static_cast<std::streamsize>(f.size() * sizeof(Complex)));
}

Field read_binary(std::istream& is) {
  char magic[8];
  is.read(magic, 8);
  CMLAB_REQUIRE(is.good() && std::memcmp(magic, kMagic, 8) == 0, "read_binary: bad magic");
  std::uint64_t n = 0;
  double box = 0.0;
  is.read(reinterpret_cast<char*>(&n), 8);
  is.read(reinterpret_cast<char*>(&box), 8);
  GridSpec g{static_cast<std::size_t>(n), box};
  validate(g);
  Field f(g);
  is.read(reinterpret_cast<char*>(f.v.data()), static_cast<std::streamsize>(n * sizeof(Complex)));
  CMLAB_REQUIRE(is.good(), "read_binary: truncated payload");
  return f;
}

// ---- deterministic random fields ----

Field random_smooth_field(const GridSpec& g, std::uint64_t seed, double width, bool complex_valued) {
  validate(g);
  std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ull);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  auto gauss = [&]() {
    // Box–Muller; avoids implementation-defined std::normal_distribution
    double u1 = 0.0;
    do { u1 = uni(rng); } while (u1 <= 1e-300);
    const double u2 = uni(rng);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * pi * u2);
  };
  Spectrum s;
  s.grid = g;
  s.c.assign(g.n, Complex{});
  const long kmax = static_cast<long>(g.n) / 8;
  for (long mp = -kmax; mp <= kmax; ++mp) {
    const std::size_t m = static_cast<std::size_t>(mp >= 0 ? mp : mp + static_cast<long>(g.n));
    const double k = 2.0 * pi * static_cast<double>(mp) / g.box_len;
    const double amp = std::exp(-0.5 * (k * width) * (k * width));
    s.c[m] = amp * Complex{gauss(), gauss()};
  }
  if (!complex_valued) {
    for (long mp = 1; mp <= kmax; ++mp) {
      const std::size_t mpos = static_cast<std::size_t>(mp);
      const std::size_t mneg = static_cast<std::size_t>(static_cast<long>(g.n) - mp);
      s.c[mneg] = std::conj(s.c[mpos]);
    }
    s.c[0] = Complex{s.c[0].real(), 0.0};
  }
  Field f = to_field(s);
  if (!complex_valued) {
    // kill rounding dust so callers can rely on exact realness
    for (Complex& z : f.v) z = Complex{z.real(), 0.0};
  }
  const double nrm = l2_norm(f);
  if (nrm > 0.0) f = Complex{1.0 / nrm, 0.0} * f;
  return f;
}

Field bump_field(const GridSpec& g, double center, double radius, Complex amplitude) {
  CMLAB_REQUIRE(radius > 0.0, "bump_field: radius must be positive");
  return make_field(g, [&](double x) -> Complex {
    const double u = (x - center) / radius;
    if (std::abs(u) >= 1.0) return 0.0;
    return amplitude * std::exp(1.0 - 1.0 / (1.0 - u * u));
  });
}

}  // namespace cmlab
