#pragma once

#include <complex>
#include <cstdint>
#include <string>
#include <vector>

#include "conelab/metric.hpp"

namespace conelab {

using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using Complex = std::complex<double>;

// Clifford module for the form diag(-1 x r, +1 x s), with X.Y + Y.X = -2 g(X,Y).
// The first r generators are time-like. <phi, psi> = psi^H H phi.
struct CliffordRep {
  int r = 0;
  int s = 0;
  std::size_t N = 1;
  std::vector<CMatrix> gammas;
  CMatrix hermitian_form;

  std::size_t dim() const { return static_cast<std::size_t>(r + s); }
  double eta(std::size_t a) const { return static_cast<int>(a) < r ? -1.0 : 1.0; }

  Complex pairing(const CVector& phi, const CVector& psi) const;
  // Largest entry of gamma_a gamma_b + gamma_b gamma_a + 2 g_ab Id.
  double clifford_residual() const;
  // Largest |<gamma_a x, y> - (-1)^{r+1} <x, gamma_a y>| as a matrix identity.
  double adjoint_residual() const;
  // Eigenvalue counts of the hermitian form (negative, positive).
  Signature form_signature() const;
};

// Pauli tensor-product generators; odd n adds the chirality element. DimensionTooLarge if r+s > 10.
CliffordRep build_rep(int r, int s);

// Lowered components c_a = i^{r+1} <phi, gamma_a phi> in the orthonormal frame of the rep.
// NonRealCurrent if an imaginary part exceeds 1e-10 max(1, |phi|^2).
Vector dirac_current_frame(const CliffordRep& rep, const CVector& phi);

// Dirac current as a coordinate vector for the metric g at a point. The frame is the
// eigenbasis of g, negative directions first. InvalidArgument on a signature mismatch.
Vector dirac_current(const CliffordRep& rep, const CVector& phi, const Matrix& g_point);

// g(V, V) for frame components (raised by the diagonal form).
double current_norm(const CliffordRep& rep, const Vector& c);

// (phi, psi)_T = <T.phi, psi> for the first generator T.
Complex t_form(const CliffordRep& rep, const CVector& phi, const CVector& psi);

struct LorentzSplit {
  CVector plus;
  CVector minus;
  CMatrix TN;   // gamma_T gamma_N
};

// Eigen-projections of phi for T.N with T = e_0 and N a unit space-like frame vector.
LorentzSplit lorentz_split(const CliffordRep& rep, const CVector& phi, const Vector& N);

struct CausalityReport {
  double max_norm = -kInf;            // max g(V, V)
  double identity_residual = 0.0;     // |g(V,V) + 4 (phi+,phi+)_T (phi-,phi-)_T|
  double orthogonality_residual = 0.0;// |<T.phi+, phi->|
  double min_form_eigenvalue = 0.0;   // of (.,.)_T
  std::size_t trials = 0;
};

// Random spinors on a Lorentzian rep (1, n-1). FormNotPositive if (.,.)_T is not definite.
CausalityReport causality_check(const CliffordRep& rep, std::size_t n_trials, std::uint64_t seed = kDefaultSeed);

// Identity check for a single spinor (N taken along the spatial part of V, or e_1 if that vanishes).
CausalityReport causality_single(const CliffordRep& rep, const CVector& phi);

// Spin lift cos(theta/2) + sin(theta/2) gamma_a gamma_b of a rotation in the (a, b) plane.
CMatrix spin_rotation(const CliffordRep& rep, std::size_t a, std::size_t b, double theta);

struct KillingWarpCheck {
  double ode_residual = 0.0;    // max |f'' + 4 eps lambda_hat^2 f|
  std::vector<double> s;
  std::vector<double> lambda_sq;  // lambda_hat^2 f^2 + (eps/4) f'^2
  bool constant = false;          // max - min < 1e-8
  double spread = 0.0;
};

// f is a 1 -> 1 chart function; lambda_hat^2 must be real (Killing numbers 0, +-1/2, +-i/2).
KillingWarpCheck killing_warp_check(const ChartFunction& f, int epsilon, Complex lambda_hat, Interval range = {-2.0, 2.0},
                                    std::size_t grid = 201);

}  // namespace conelab
