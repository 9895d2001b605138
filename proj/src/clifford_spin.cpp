#include "conelab/clifford_spin.hpp"

#include <algorithm>
#include <cmath>

#include "conelab/errors.hpp"

namespace conelab {

namespace {

constexpr int kMaxDim = 10;
const Complex I1(0.0, 1.0);

Eigen::Index ix(std::size_t i) { return static_cast<Eigen::Index>(i); }

CMatrix kron(const CMatrix& a, const CMatrix& b) {
  CMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j) out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

CMatrix pauli(int k) {
  CMatrix m(2, 2);
  if (k == 1) m << 0, 1, 1, 0;
  if (k == 2) m << 0, -I1, I1, 0;
  if (k == 3) m << 1, 0, 0, -1;
  return m;
}

// n Hermitian, pairwise anticommuting matrices squaring to Id.
std::vector<CMatrix> euclidean_generators(int n) {
  const int m = n / 2;
  std::vector<CMatrix> out;
  auto chain = [m](int pos, int k) {
    CMatrix acc = CMatrix::Identity(1, 1);
    for (int j = 0; j < m; ++j) {
      const CMatrix f = j < pos ? pauli(3) : (j == pos ? pauli(k) : CMatrix(CMatrix::Identity(2, 2)));
      acc = kron(acc, f);
    }
    return acc;
  };
  for (int pos = 0; pos < m; ++pos) {
    out.push_back(chain(pos, 1));
    out.push_back(chain(pos, 2));
  }
  if (n % 2 == 1) out.push_back(chain(m, 0));  // product of sigma_3 only
  return out;
}

Complex ipow(int k) {
  switch (((k % 4) + 4) % 4) {
    case 0: return 1.0;
    case 1: return I1;
    case 2: return -1.0;
    default: return -I1;
  }
}

}  // namespace

Complex CliffordRep::pairing(const CVector& phi, const CVector& psi) const {
  return psi.dot(hermitian_form * phi);  // Eigen's dot conjugates the left factor
}

double CliffordRep::clifford_residual() const {
  double worst = 0.0;
  const auto id = CMatrix::Identity(ix(N), ix(N));
  for (std::size_t a = 0; a < gammas.size(); ++a)
    for (std::size_t b = 0; b < gammas.size(); ++b) {
      CMatrix m = gammas[a] * gammas[b] + gammas[b] * gammas[a];
      if (a == b) m += 2.0 * eta(a) * id;
      worst = std::max(worst, m.cwiseAbs().maxCoeff());
    }
  return worst;
}

double CliffordRep::adjoint_residual() const {
  // <g x, y> = y^H H g x and <x, g y> = y^H g^H H x.
  const double sign = (r + 1) % 2 == 0 ? 1.0 : -1.0;
  double worst = 0.0;
  for (const auto& g : gammas)
    worst = std::max(worst, (hermitian_form * g - sign * g.adjoint() * hermitian_form).cwiseAbs().maxCoeff());
  return worst;
}

Signature CliffordRep::form_signature() const {
  Eigen::SelfAdjointEigenSolver<CMatrix> es(hermitian_form);
  Signature sig;
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
    if (es.eigenvalues()(i) < 0) ++sig.negative;
    else ++sig.positive;
  }
  return sig;
}

CliffordRep build_rep(int r, int s) {
  if (r < 0 || s < 0 || r + s == 0) throw Error(ErrorCode::InvalidArgument, "signature needs r, s >= 0 and r + s > 0");
  if (r + s > kMaxDim) throw Error(ErrorCode::DimensionTooLarge, "r + s = " + std::to_string(r + s) + " exceeds 10");
  CliffordRep rep;
  rep.r = r;
  rep.s = s;
  const auto base = euclidean_generators(r + s);
  rep.N = static_cast<std::size_t>(base[0].rows());
  for (int a = 0; a < r + s; ++a) rep.gammas.push_back(a < r ? base[a] : CMatrix(I1 * base[a]));

  // H = c Gamma_1 ... Gamma_r, made Hermitian by c.
  CMatrix H = CMatrix::Identity(ix(rep.N), ix(rep.N));
  for (int a = 0; a < r; ++a) H = H * base[a];
  if ((r * (r - 1) / 2) % 2 == 1) H *= I1;
  rep.hermitian_form = H;
  return rep;
}

Vector dirac_current_frame(const CliffordRep& rep, const CVector& phi) {
  const Complex pre = ipow(rep.r + 1);
  Vector c(ix(rep.dim()));
  const double scale = std::max(1.0, phi.squaredNorm());
  for (std::size_t a = 0; a < rep.dim(); ++a) {
    const Complex v = pre * rep.pairing(phi, rep.gammas[a] * phi);
    if (std::abs(v.imag()) > 1e-10 * scale)
      throw Error(ErrorCode::NonRealCurrent, "imaginary part " + std::to_string(v.imag()) + " in the Dirac current");
    c(ix(a)) = v.real();
  }
  return c;
}

double current_norm(const CliffordRep& rep, const Vector& c) {
  double acc = 0.0;
  for (std::size_t a = 0; a < rep.dim(); ++a) acc += rep.eta(a) * c(ix(a)) * c(ix(a));
  return acc;
}

Vector dirac_current(const CliffordRep& rep, const CVector& phi, const Matrix& g_point) {
  if (static_cast<std::size_t>(g_point.rows()) != rep.dim())
    throw Error(ErrorCode::InvalidArgument, "metric dimension differs from the rep");
  Eigen::SelfAdjointEigenSolver<Matrix> es(g_point);
  const Vector lam = es.eigenvalues();  // ascending: negatives first
  int neg = 0;
  for (Eigen::Index i = 0; i < lam.size(); ++i) {
    if (std::abs(lam(i)) < kDegeneracyTol) throw Error(ErrorCode::DegenerateMetric, "degenerate metric");
    if (lam(i) < 0) ++neg;
  }
  if (neg != rep.r) throw Error(ErrorCode::InvalidArgument, "metric signature differs from the rep");
  Matrix E(g_point.rows(), g_point.cols());  // columns: orthonormal frame
  for (Eigen::Index i = 0; i < lam.size(); ++i) E.col(i) = es.eigenvectors().col(i) / std::sqrt(std::abs(lam(i)));
  const Vector c = dirac_current_frame(rep, phi);
  Vector up(c.size());
  for (std::size_t a = 0; a < rep.dim(); ++a) up(ix(a)) = rep.eta(a) * c(ix(a));
  return E * up;
}

Complex t_form(const CliffordRep& rep, const CVector& phi, const CVector& psi) {
  return rep.pairing(rep.gammas[0] * phi, psi);
}

LorentzSplit lorentz_split(const CliffordRep& rep, const CVector& phi, const Vector& N) {
  CMatrix gN = CMatrix::Zero(ix(rep.N), ix(rep.N));
  for (std::size_t a = 1; a < rep.dim(); ++a) gN += N(ix(a)) * rep.gammas[a];
  LorentzSplit out;
  out.TN = rep.gammas[0] * gN;
  out.plus = 0.5 * (phi + out.TN * phi);
  out.minus = 0.5 * (phi - out.TN * phi);
  return out;
}

namespace {

double min_t_form_eigenvalue(const CliffordRep& rep) {
  const CMatrix F = rep.hermitian_form * rep.gammas[0];
  Eigen::SelfAdjointEigenSolver<CMatrix> es(0.5 * (F + F.adjoint()));
  return es.eigenvalues().minCoeff();
}

void require_lorentzian(const CliffordRep& rep) {
  if (rep.r != 1 || rep.s < 1) throw Error(ErrorCode::InvalidArgument, "causality check needs signature (1, n-1)");
}

void accumulate(const CliffordRep& rep, const CVector& phi, CausalityReport& out) {
  const Vector c = dirac_current_frame(rep, phi);
  const double gvv = current_norm(rep, c);
  Vector N = Vector::Zero(c.size());
  N.tail(c.size() - 1) = c.tail(c.size() - 1);
  if (N.norm() < 1e-12) {
    N.setZero();
    N(1) = 1.0;
  } else {
    N /= N.norm();
  }
  const LorentzSplit sp = lorentz_split(rep, phi, N);
  const double pp = t_form(rep, sp.plus, sp.plus).real();
  const double mm = t_form(rep, sp.minus, sp.minus).real();
  const double scale = std::max(1.0, phi.squaredNorm() * phi.squaredNorm());
  out.max_norm = std::max(out.max_norm, gvv);
  out.identity_residual = std::max(out.identity_residual, std::abs(gvv + 4.0 * pp * mm) / scale);
  out.orthogonality_residual =
      std::max(out.orthogonality_residual, std::abs(rep.pairing(rep.gammas[0] * sp.plus, sp.minus)) /
                                               std::max(1.0, phi.squaredNorm()));
  ++out.trials;
}

}  // namespace

CausalityReport causality_single(const CliffordRep& rep, const CVector& phi) {
  require_lorentzian(rep);
  CausalityReport out;
  out.min_form_eigenvalue = min_t_form_eigenvalue(rep);
  if (out.min_form_eigenvalue <= 0.0) throw Error(ErrorCode::FormNotPositive, "(.,.)_T is not positive definite");
  accumulate(rep, phi, out);
  return out;
}

CausalityReport causality_check(const CliffordRep& rep, std::size_t n_trials, std::uint64_t seed) {
  require_lorentzian(rep);
  CausalityReport out;
  out.min_form_eigenvalue = min_t_form_eigenvalue(rep);
  if (out.min_form_eigenvalue <= 0.0) throw Error(ErrorCode::FormNotPositive, "(.,.)_T is not positive definite");
  Rng rng(seed);
  for (std::size_t t = 0; t < n_trials; ++t) {
    CVector phi(ix(rep.N));
    for (Eigen::Index i = 0; i < phi.size(); ++i) phi(i) = Complex(rng.normal(), rng.normal());
    accumulate(rep, phi, out);
  }
  return out;
}

CMatrix spin_rotation(const CliffordRep& rep, std::size_t a, std::size_t b, double theta) {
  if (a >= rep.dim() || b >= rep.dim() || a == b) throw Error(ErrorCode::InvalidArgument, "rotation plane indices");
  return std::cos(0.5 * theta) * CMatrix::Identity(ix(rep.N), ix(rep.N)) +
         std::sin(0.5 * theta) * rep.gammas[a] * rep.gammas[b];
}

KillingWarpCheck killing_warp_check(const ChartFunction& f, int epsilon, Complex lambda_hat, Interval range,
                                    std::size_t grid) {
  const Complex l2c = lambda_hat * lambda_hat;
  if (std::abs(l2c.imag()) > 1e-15) throw Error(ErrorCode::InvalidArgument, "lambda_hat^2 must be real");
  const double l2 = l2c.real();
  KillingWarpCheck out;
  double lo = kInf, hi = -kInf;
  for (std::size_t i = 0; i < grid; ++i) {
    const double s = range.lo + range.width() * static_cast<double>(i) / static_cast<double>(std::max<std::size_t>(grid - 1, 1));
    const Vector x = Vector::Constant(1, s);
    const double fv = f.value(x)(0);
    const double f1 = f.jacobian(x)(0, 0);
    const double f2 = f.hessians(x)[0](0, 0);
    out.ode_residual = std::max(out.ode_residual, std::abs(f2 + 4.0 * epsilon * l2 * fv));
    const double lam = l2 * fv * fv + 0.25 * epsilon * f1 * f1;
    out.s.push_back(s);
    out.lambda_sq.push_back(lam);
    lo = std::min(lo, lam);
    hi = std::max(hi, lam);
  }
  out.spread = hi - lo;
  out.constant = out.spread < 1e-8;
  return out;
}

}  // namespace conelab
