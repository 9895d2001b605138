#include <cmath>

#include "conelab/clifford_spin.hpp"
#include "conelab/errors.hpp"
#include "doctest.h"

using namespace conelab;

namespace {

CVector random_spinor(Rng& rng, std::size_t n) {
  CVector v(static_cast<Eigen::Index>(n));
  for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = Complex(rng.normal(), rng.normal());
  return v;
}

}  // namespace

TEST_CASE("build_rep: sizes and relations for all signatures up to dimension 10") {
  for (int n = 1; n <= 10; ++n)
    for (int r = 0; r <= n; ++r) {
      const CliffordRep rep = build_rep(r, n - r);
      CHECK(rep.N == (std::size_t{1} << (n / 2)));
      CHECK(rep.gammas.size() == static_cast<std::size_t>(n));
      CHECK(rep.clifford_residual() < 1e-12);
      CHECK(rep.adjoint_residual() < 1e-12);
      const CMatrix& H = rep.hermitian_form;
      CHECK((H - H.adjoint()).cwiseAbs().maxCoeff() < 1e-14);
      const Signature sig = rep.form_signature();
      if (r == 0) {
        CHECK(sig.negative == 0);
      } else if (!(n % 2 == 1 && r == n)) {
        // neutral; the odd negative-definite case r = n has H proportional to Id
        CHECK(sig.negative == sig.positive);
      }
    }
  CHECK_THROWS_AS(build_rep(3, 8), Error);
  try {
    build_rep(0, 11);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::DimensionTooLarge);
  }
}

TEST_CASE("build_rep: small cases") {
  const CliffordRep e2 = build_rep(0, 2);
  CHECK(e2.N == 2);
  CHECK(e2.clifford_residual() < 1e-12);

  // (1,3): <X.phi, psi> = +<phi, X.psi> checked on random spinors.
  const CliffordRep l4 = build_rep(1, 3);
  CHECK(l4.N == 4);
  Rng rng(1);
  for (int k = 0; k < 5; ++k) {
    const CVector phi = random_spinor(rng, 4), psi = random_spinor(rng, 4);
    for (const auto& g : l4.gammas) CHECK(std::abs(l4.pairing(g * phi, psi) - l4.pairing(phi, g * psi)) < 1e-12);
  }

  // (1,1): (T.N)^2 = Id.
  const CliffordRep l2 = build_rep(1, 1);
  const CMatrix TN = l2.gammas[0] * l2.gammas[1];
  CHECK((TN * TN - CMatrix::Identity(2, 2)).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("dirac_current") {
  const CliffordRep rep = build_rep(1, 3);
  const Matrix eta = Vector(Eigen::Vector4d(-1, 1, 1, 1)).asDiagonal();
  CHECK(dirac_current(rep, CVector::Zero(4), eta).norm() == 0.0);

  // Basis spinor e_1: V_a = i^2 <phi, gamma_a phi>, raised by eta.
  CVector e1 = CVector::Zero(4);
  e1(0) = 1.0;
  const Vector V = dirac_current(rep, e1, eta);
  for (std::size_t a = 0; a < 4; ++a) {
    const Complex direct = -(rep.gammas[a] * e1).dot(rep.hermitian_form * e1);
    CHECK(std::abs(direct.imag()) < 1e-14);
    CHECK(V(static_cast<Eigen::Index>(a)) == doctest::Approx(rep.eta(a) * direct.real()).epsilon(1e-12));
  }

  Rng rng(2);
  const CVector phi = random_spinor(rng, 4);
  const Vector v1 = dirac_current(rep, phi, eta);
  const Vector v2 = dirac_current(rep, 2.0 * phi, eta);
  CHECK((v2 - 4.0 * v1).cwiseAbs().maxCoeff() < 1e-12);

  // A non-diagonal metric of the same signature: g(V, X) equals the frame formula.
  Matrix g = eta;
  g(0, 1) = g(1, 0) = 0.3;
  g(2, 3) = g(3, 2) = -0.2;
  const Vector Vg = dirac_current(rep, phi, g);
  Eigen::SelfAdjointEigenSolver<Matrix> es(g);
  const Vector c = dirac_current_frame(rep, phi);
  for (Eigen::Index a = 0; a < 4; ++a) {
    const Vector Ea = es.eigenvectors().col(a) / std::sqrt(std::abs(es.eigenvalues()(a)));
    CHECK(Ea.dot(g * Vg) == doctest::Approx(c(a)).epsilon(1e-10));
  }
  CHECK_THROWS_AS(dirac_current(rep, phi, Matrix::Identity(4, 4)), Error);
}

TEST_CASE("causality_check") {
  const CliffordRep rep = build_rep(1, 3);
  const CausalityReport rpt = causality_check(rep, 10000, 3);
  CHECK(rpt.trials == 10000);
  CHECK(rpt.max_norm <= 1e-10);
  CHECK(rpt.identity_residual < 1e-9);
  CHECK(rpt.orthogonality_residual < 1e-10);
  CHECK(rpt.min_form_eigenvalue > 0.0);

  for (int n = 2; n <= 10; ++n) {
    const CausalityReport r = causality_check(build_rep(1, n - 1), 200, 4 + n);
    CHECK(r.max_norm <= 1e-10);
    CHECK(r.identity_residual < 1e-9);
  }

  // (1,1): spinors in the T.N eigenspaces.
  const CliffordRep l2 = build_rep(1, 1);
  const CMatrix TN = l2.gammas[0] * l2.gammas[1];
  Eigen::SelfAdjointEigenSolver<CMatrix> es(0.5 * (TN + TN.adjoint()));
  CVector minus = es.eigenvectors().col(0), plus = es.eigenvectors().col(1);
  plus /= std::sqrt(t_form(l2, plus, plus).real());
  minus /= std::sqrt(t_form(l2, minus, minus).real());
  const Vector vp = dirac_current_frame(l2, plus);
  CHECK(std::abs(current_norm(l2, vp)) < 1e-12);  // phi- = 0: light-like
  CHECK(vp.norm() > 0.5);
  const CVector both = plus + minus;
  const CausalityReport one = causality_single(l2, both);
  CHECK(current_norm(l2, dirac_current_frame(l2, both)) == doctest::Approx(-4.0).epsilon(1e-12));
  CHECK(one.identity_residual < 1e-12);

  CHECK_THROWS_AS(causality_check(build_rep(0, 4), 5, 1), Error);
}

TEST_CASE("killing_warp_check") {
  const auto cosh_f = scalar_function(1, [](auto x) { return cosh(x[0]); });
  const auto exp_f = scalar_function(1, [](auto x) { return exp(x[0]); });
  const auto one_f = scalar_function(1, [](auto x) { return 0.0 * x[0] + 1.0; });

  const KillingWarpCheck a = killing_warp_check(cosh_f, -1, 0.5);
  CHECK(a.ode_residual < 1e-12);
  CHECK(a.constant);
  for (double l : a.lambda_sq) CHECK(l == doctest::Approx(0.25).epsilon(1e-12));

  const KillingWarpCheck b = killing_warp_check(exp_f, -1, 0.5);
  CHECK(b.ode_residual < 1e-12);
  CHECK(b.constant);
  for (double l : b.lambda_sq) CHECK(std::abs(l) < 1e-12);

  for (int eps : {-1, 1}) {
    const KillingWarpCheck c = killing_warp_check(one_f, eps, 0.0);
    CHECK(c.ode_residual == 0.0);
    CHECK(c.constant);
    CHECK(c.lambda_sq.front() == 0.0);
  }

  // Imaginary Killing number with eps = +1: f'' = f again.
  const KillingWarpCheck d = killing_warp_check(cosh_f, 1, Complex(0.0, 0.5));
  CHECK(d.ode_residual < 1e-12);
  CHECK(d.constant);

  // Wrong warp: residual and a varying profile.
  const KillingWarpCheck w = killing_warp_check(cosh_f, 1, 0.5);
  CHECK(w.ode_residual > 1.0);
  CHECK_FALSE(w.constant);
  CHECK_THROWS_AS(killing_warp_check(cosh_f, 1, Complex(0.5, 0.5)), Error);
}

TEST_CASE("property: Dirac current is equivariant under spatial rotations") {
  Rng rng(7);
  for (int n : {3, 4, 5, 6}) {
    const CliffordRep rep = build_rep(1, n - 1);
    for (int trial = 0; trial < 10; ++trial) {
      const std::size_t a = 1 + rng.index(static_cast<std::size_t>(n - 1));
      std::size_t b = 1 + rng.index(static_cast<std::size_t>(n - 1));
      if (b == a) b = a == 1 ? 2 : 1;
      const double th = rng.uniform(-3.0, 3.0);
      const CVector phi = random_spinor(rng, rep.N);
      const CMatrix S = spin_rotation(rep, a, b, th);
      const Vector c = dirac_current_frame(rep, phi);
      const Vector cr = dirac_current_frame(rep, S * phi);
      Vector expect = c;
      const auto ia = static_cast<Eigen::Index>(a), ib = static_cast<Eigen::Index>(b);
      expect(ia) = std::cos(th) * c(ia) - std::sin(th) * c(ib);
      expect(ib) = std::sin(th) * c(ia) + std::cos(th) * c(ib);
      CHECK((cr - expect).cwiseAbs().maxCoeff() / std::max(1.0, c.norm()) < 1e-8);
      // S preserves the hermitian form.
      const CVector psi = random_spinor(rng, rep.N);
      CHECK(std::abs(rep.pairing(S * phi, S * psi) - rep.pairing(phi, psi)) < 1e-10);
    }
  }
}
