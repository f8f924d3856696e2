#pragma once
// Conserved quantities of the gauged and ungauged flows, the Lax hierarchy
// pairings, and drift bookkeeping used by the evolution monitor.

#include <vector>

#include "cmlab/grid.hpp"

namespace cmlab {

// M = ∫|v|^2, P = ∫ Im(conj(v) v_x), E(v) = (1/2)∫|v_x + (1/2)H(|v|^2)v|^2.
double mass(const Field& v);
double momentum(const Field& v);
double energy_gauge(const Field& v);

// Ungauged-side functionals:
//   E~(u) = (1/2)∫|u_x - i P_+(|u|^2)u|^2
//   P~(u) = ∫ Im(conj(u) u_x) - (1/2)∫|u|^4
double energy_chiral(const Field& u);
double momentum_chiral(const Field& u);

// I_j = (D~_v^j v, v)_r for j = 0..j_max (j_max <= 12). I_0 is the mass by
// the same quadrature; sign pattern: I_{2k} = (-1)^k ||D~_v^k v||^2.
std::vector<double> hierarchy(const Field& v, int j_max);

// ||u - P_+ u||_{L^2}: distance to the positive-frequency half-line.
double chirality_deficit(const Field& u);

// |now - initial| / max(|initial|, 1e-14): scale-free drift with a floor for
// vanishing invariants (e.g. E(Q) = 0).
double relative_drift(double now, double initial);

// One monitoring row. `chiral_of` supplies the field whose chirality deficit
// is reported (the ungauged side during G-CM runs); defaults to v itself.
struct ConservedReport {
  double t = 0.0;
  double mass = 0.0;
  double energy_gauge = 0.0;
  double momentum = 0.0;
  std::vector<double> hierarchy;  // I_0..I_{j_max}
  double chirality_deficit = 0.0;
};

ConservedReport conserved_report(double t, const Field& v, int j_max,
                                 const Field* chiral_of = nullptr);

}  // namespace cmlab
