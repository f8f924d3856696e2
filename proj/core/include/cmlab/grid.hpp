#pragma once

// Periodic Fourier collocation layer: grids, fields, spectra, the standard
// multipliers (d/dx, Hilbert transform, |D|, Szegő projector), quadrature,
// norms, and exact band-limited rescaling [f]_{λ,γ,x0}.
//
// Conventions (fixed, also exercised by tests):
//   * grid points  x_j = -box_len/2 + j*h,  h = box_len/n,  n a power of two;
//   * forward transform is the unnormalized DFT  c_m = Σ_j f_j e^{-2πi jm/n}
//     (a constant field c has k=0 coefficient c*n); inverse divides by n;
//   * mode m carries wavenumber k = 2π m'/box_len with signed index
//     m' ∈ [-n/2, n/2); the Nyquist row m' = -n/2 is zeroed by every odd
//     multiplier (∂x, H, |D|) so real fields stay real and |D| = H∂x exactly;
//   * H has symbol -i·sgn(k) with sgn(0) = 0; Π+ keeps k>0 and half of k=0.

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <vector>

#include "cmlab/common.hpp"

namespace cmlab {

struct GridSpec {
  std::size_t n = 4096;
  double box_len = 256.0;

  double h() const { return box_len / static_cast<double>(n); }
  double x(std::size_t j) const { return -0.5 * box_len + h() * static_cast<double>(j); }
  // signed mode index for storage row m
  long signed_index(std::size_t m) const {
    return m < n / 2 ? static_cast<long>(m) : static_cast<long>(m) - static_cast<long>(n);
  }
  double k(std::size_t m) const { return 2.0 * pi * static_cast<double>(signed_index(m)) / box_len; }
  bool operator==(const GridSpec&) const = default;
};

// n must be a power of two and box_len > 0; throws otherwise.
void validate(const GridSpec& g);

struct Field {
  GridSpec grid;
  std::vector<Complex> v;

  Field() = default;
  explicit Field(const GridSpec& g) : grid(g), v(g.n, Complex{}) { validate(g); }
  std::size_t size() const { return v.size(); }
  Complex& operator[](std::size_t j) { return v[j]; }
  const Complex& operator[](std::size_t j) const { return v[j]; }
};

struct Spectrum {
  GridSpec grid;
  std::vector<Complex> c;  // FFT storage order, unnormalized forward DFT
};

Field make_field(const GridSpec& g, const std::function<Complex(double)>& f);
Field zeros(const GridSpec& g);

// ---- transforms -----------------------------------------------------------

Spectrum to_spectrum(const Field& f);
Field to_field(const Spectrum& s);

// ---- pointwise algebra ----------------------------------------------------

Field operator+(const Field& a, const Field& b);
Field operator-(const Field& a, const Field& b);
Field operator*(const Field& a, const Field& b);  // pointwise
Field operator*(Complex s, const Field& a);
Field& operator+=(Field& a, const Field& b);
Field& operator-=(Field& a, const Field& b);
Field conj(const Field& a);
Field real_part(const Field& a);
Field imag_part(const Field& a);  // Im f as a real field
Field abs2(const Field& a);       // |f|^2
Field apply(const Field& a, const std::function<Complex(double, Complex)>& fn);

// multiply by x, <x>^p (p may be negative), sampled on the grid
Field mul_x(const Field& a);
Field mul_japanese_bracket(const Field& a, double power);

// ---- spectral multipliers -------------------------------------------------

Field derivative(const Field& f, int order = 1);  // order ≤ 8
Field hilbert(const Field& f);                    // symbol -i·sgn(k), sgn(0)=0
Field abs_d(const Field& f);                      // symbol |k|, equals H∂x
Field szego(const Field& f);                      // Π+: 1_{k>0} + ½·1_{k=0}
Field dealias_23(const Field& f);                 // zero |m'| > n/3

// fraction of spectral mass in the band just below the 2/3 cutoff,
// Σ_{n/4 ≤ |m'| ≤ n/3} |c|² / Σ |c|²  — resolution monitor for runs
double spectral_tail_fraction(const Field& f);

// ---- quadrature, inner products, norms -------------------------------------

double integrate_real(const Field& f);     // h·Σ Re f
Complex integrate(const Field& f);         // h·Σ f
double inner_r(const Field& f, const Field& g);  // Re ∫ f ḡ
double l2_norm(const Field& f);
double sup_norm(const Field& f);
double l2_norm_window(const Field& f, double radius);   // ‖f‖_{L²(|x|≤radius)}
double sup_norm_window(const Field& f, double radius);
double mean(const Field& f, double* imag_part = nullptr);

double norm_hs(const Field& f, double s);        // ‖<D>^s f‖, |s| ≤ 16
// adapted norm ‖f‖²_{Ḣ^k} = Σ_{j=0}^k ‖<x>^{-j} ∂^{k-j} f‖²,  k ≤ 8
double norm_adapted(const Field& f, int k);

// spectral antiderivative: F(x) = ∫_{-box/2}^{x} f, mean handled as a linear
// ramp; exact for band-limited periodic f up to the mean term
Field antiderivative_from_left(const Field& f);

// ---- modulation map --------------------------------------------------------

// [f]_{λ,γ,x0}(x) = e^{iγ} λ^{-1/2} f((x-x0)/λ), evaluated on the same grid by
// exact band-limited (Bluestein/chirp-z) interpolation of f.
// Warns once on stderr if the rescaled sampling set leaves the box while f
// carries non-negligible mass near the edges. Output samples whose source
// point (x - x0)/lambda falls outside [-box/2, box/2) are set to zero: f is
// treated as a line function known only inside the box, so shrunken periodic
// alias copies (which appear for lambda < 1) are suppressed.
Field modulate(const Field& f, double lambda, double gamma, double x0);

// band-limited interpolant of f at one arbitrary point (O(n) per call)
Complex interp_at(const Field& f, double x);

// ---- serialization ---------------------------------------------------------

void write_csv(const Field& f, std::ostream& os);               // x, re, im
void write_binary(const Field& f, std::ostream& os);            // LE f64 pairs + header
Field read_binary(std::istream& is);

// ---- deterministic random fields -------------------------------------------

// band-limited random field: coefficients ~ e^{-(k·width)²/2} with seeded
// Gaussian amplitudes (Box–Muller over mt19937_64; identical across runs)
Field random_smooth_field(const GridSpec& g, std::uint64_t seed, double width = 1.0,
                          bool complex_valued = true);

// C_c^∞ bump supported on |x-center| ≤ radius (exp(1-1/(1-u²)) profile)
Field bump_field(const GridSpec& g, double center, double radius, Complex amplitude);

}  // namespace cmlab
