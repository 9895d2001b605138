#include "conelab/holonomy.hpp"

#include <algorithm>
#include <cmath>
#include <complex>

#include "conelab/errors.hpp"

namespace conelab {

namespace {

using Idx = Eigen::Index;

constexpr double kSpanTol = 1e-7;

// Orthonormal basis of the column span (Euclidean), rank by SVD.
Matrix orth(const Matrix& a) {
  if (a.cols() == 0) return Matrix(a.rows(), 0);
  Eigen::JacobiSVD<Matrix> svd(a, Eigen::ComputeThinU);
  Idx rank = 0;
  for (Idx i = 0; i < svd.singularValues().size(); ++i)
    if (svd.singularValues()[i] > kSpanTol) ++rank;
  return svd.matrixU().leftCols(rank);
}

// Orthonormal basis of {x : a x = 0}.
Matrix kernel(const Matrix& a, double tol = kSpanTol) {
  const Idx n = a.cols();
  if (a.rows() == 0) return Matrix::Identity(n, n);
  Eigen::JacobiSVD<Matrix> svd(a, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  Idx rank = 0;
  for (Idx i = 0; i < sv.size(); ++i)
    if (sv[i] > tol) ++rank;
  return svd.matrixV().rightCols(n - rank);
}

Matrix projector(const Matrix& q) { return q * q.transpose(); }

bool same_space(const Matrix& a, const Matrix& b) {
  return a.cols() == b.cols() && (projector(a) - projector(b)).cwiseAbs().maxCoeff() < 1e-6;
}

// Smallest subspace containing `seed` that every operator maps into itself.
Matrix krylov_closure(const Matrix& seed, const std::vector<Matrix>& ops) {
  Matrix q = orth(seed);
  const Idx n = seed.rows();
  bool grew = true;
  while (grew && q.cols() < n && q.cols() > 0) {
    grew = false;
    for (const Matrix& m : ops) {
      for (Idx c = 0; c < q.cols() && q.cols() < n; ++c) {
        Vector r = m * q.col(c);
        r -= q * (q.transpose() * r);
        r -= q * (q.transpose() * r);
        const double nr = r.norm();
        if (nr > kSpanTol) {
          q.conservativeResize(Eigen::NoChange, q.cols() + 1);
          q.col(q.cols() - 1) = r / nr;
          grew = true;
        }
      }
    }
  }
  return q;
}

Matrix intersect(const Matrix& a, const Matrix& b) {
  if (a.cols() == 0 || b.cols() == 0) return Matrix(a.rows(), 0);
  Matrix ab(a.rows(), a.cols() + b.cols());
  ab << a, -b;
  const Matrix k = kernel(ab);
  return orth(a * k.topRows(a.cols()));
}

Matrix sum(const Matrix& a, const Matrix& b) {
  Matrix ab(a.rows(), a.cols() + b.cols());
  ab << a, b;
  return orth(ab);
}

// g-orthogonal complement
Matrix complement(const Matrix& q, const Matrix& g) { return kernel(q.transpose() * g); }

std::size_t degeneracy(const Matrix& q, const Matrix& g) {
  const Matrix gram = q.transpose() * g * q;
  Eigen::JacobiSVD<Matrix> svd(gram);
  std::size_t rank = 0;
  for (Idx i = 0; i < svd.singularValues().size(); ++i)
    if (svd.singularValues()[i] > kGramRankTol) ++rank;
  return static_cast<std::size_t>(q.cols()) - rank;
}

std::vector<Matrix> normalised(std::span<const Matrix> algebra) {
  std::vector<Matrix> out;
  for (const Matrix& a : algebra) {
    const double n = a.norm();
    if (n > 1e-12) out.push_back(a / n);
  }
  return out;
}

// Group elements enter as G - I, unnormalised: small loops give small but
// accurate generators, and normalising would amplify transport error.
std::vector<Matrix> group_generators(std::span<const Matrix> group) {
  std::vector<Matrix> out;
  for (const Matrix& g : group) {
    Matrix d = g - Matrix::Identity(g.rows(), g.cols());
    if (d.norm() > 1e-6) out.push_back(std::move(d));
  }
  return out;
}

Matrix transport_matrix(const MetricField& field, const Curve& c) {
  const auto n = static_cast<Idx>(field.dim());
  return parallel_transport(field, c, Matrix::Identity(n, n), 1e-10).frame;
}

std::uint64_t derive(std::uint64_t seed, std::uint64_t stream) {
  return seed ^ (0x9E3779B97F4A7C15ULL * (stream + 1));
}

}  // namespace

std::string to_string(HolonomyClass c) {
  switch (c) {
    case HolonomyClass::Irreducible: return "irreducible";
    case HolonomyClass::Decomposable: return "decomposable";
    case HolonomyClass::IndecomposableWithNullSubspace: return "indecomposable-with-null-subspace";
  }
  return "?";
}

HolonomySample holonomy_sample(const MetricField& field, const Point& basepoint, std::size_t n_loops,
                               std::uint64_t seed) {
  if (n_loops < 1) throw Error(ErrorCode::InvalidArgument, "n_loops must be at least 1");
  const auto& chart = field.chart();
  chart.require(basepoint);
  const std::size_t n = field.dim();
  if (n < 2) throw Error(ErrorCode::InvalidArgument, "loops need at least two coordinates");
  HolonomySample s;
  s.basepoint = basepoint;
  s.metric = metric_eval(field, basepoint);
  s.seed = seed;
  Rng rng(derive(seed, 0));
  std::size_t misses = 0;
  while (s.elements.size() < n_loops) {
    std::size_t i = rng.index(n);
    std::size_t j = rng.index(n - 1);
    if (j >= i) ++j;
    const double a = rng.sign() * rng.log_uniform(1e-3, 1.0);
    const double b = rng.sign() * rng.log_uniform(1e-3, 1.0);
    Point far = basepoint;
    far[static_cast<Idx>(i)] += a;
    far[static_cast<Idx>(j)] += b;
    Point c1 = basepoint, c2 = basepoint;
    c1[static_cast<Idx>(i)] += a;
    c2[static_cast<Idx>(j)] += b;
    // box domain: corners inside means the rectangle is inside
    if (!chart.contains(far) || !chart.contains(c1) || !chart.contains(c2)) {
      ++s.resampled_loops;
      if (++misses > 1000) throw Error(ErrorCode::OutOfDomain, "no admissible loop found at the basepoint");
      continue;
    }
    try {
      s.elements.push_back(transport_matrix(field, Curve::rectangle(basepoint, i, j, a, b)));
    } catch (const Error& e) {
      if (e.code() != ErrorCode::OutOfDomain && e.code() != ErrorCode::DegenerateMetric) throw;
      ++s.resampled_loops;
      if (++misses > 1000) throw;
    }
  }
  return s;
}

std::vector<Matrix> ambrose_singer_sample(const MetricField& field, const Point& basepoint, std::size_t n_probes,
                                          std::uint64_t seed) {
  field.chart().require(basepoint);
  const auto n = static_cast<Idx>(field.dim());
  Rng rng(seed);
  std::vector<Matrix> out;
  while (out.size() < n_probes) {
    const Point q = field.chart().sample(rng);
    Vector x(n), y(n);
    for (Idx k = 0; k < n; ++k) x[k] = rng.normal();
    for (Idx k = 0; k < n; ++k) y[k] = rng.normal();
    const Matrix p = transport_matrix(field, Curve::polyline({basepoint, q}));
    const Matrix r = riemann(field, q).endomorphism(x, y);
    out.push_back(p.partialPivLu().solve(r * p));
  }
  return out;
}

HolonomySample sample_holonomy(const MetricField& field, const Point& basepoint, std::size_t n_loops,
                               std::size_t n_probes, std::uint64_t seed) {
  HolonomySample s = holonomy_sample(field, basepoint, n_loops, seed);
  s.algebra = ambrose_singer_sample(field, basepoint, n_probes, derive(seed, 1));
  s.held_out = ambrose_singer_sample(field, basepoint, 10, derive(seed, 2));
  return s;
}

double group_residual(const HolonomySample& s) {
  double r = 0.0;
  for (const Matrix& g : s.elements) r = std::max(r, (g.transpose() * s.metric * g - s.metric).cwiseAbs().maxCoeff());
  return r;
}

double algebra_residual(const HolonomySample& s) {
  double r = 0.0;
  for (const Matrix& a : s.algebra) r = std::max(r, (a.transpose() * s.metric + s.metric * a).cwiseAbs().maxCoeff());
  return r;
}

double invariance_residual(const Matrix& basis, std::span<const Matrix> algebra, std::span<const Matrix> group) {
  const Matrix q = orth(basis);
  const Matrix out_proj = Matrix::Identity(q.rows(), q.rows()) - projector(q);
  double r = 0.0;
  for (const Matrix& a : normalised(algebra)) r = std::max(r, (out_proj * a * q).cwiseAbs().maxCoeff());
  for (const Matrix& g : group) r = std::max(r, (out_proj * g * q).cwiseAbs().maxCoeff());
  return r;
}

SubspaceReport invariant_subspace_analysis(const HolonomySample& sample) {
  if (sample.algebra.empty()) throw Error(ErrorCode::InconclusiveSample, "algebra sample is empty");
  const Matrix& g = sample.metric;
  const Idx n = g.rows();

  std::vector<Matrix> ops = normalised(sample.algebra);
  for (Matrix& m : group_generators(sample.elements)) ops.push_back(std::move(m));

  SubspaceReport rep;
  rep.sample_size = sample.algebra.size() + sample.elements.size();
  rep.held_out = sample.held_out.size();

  std::vector<Matrix> found;
  auto add = [&](const Matrix& q) {
    if (q.cols() == 0 || q.cols() >= n) return false;
    for (const Matrix& f : found)
      if (same_space(f, q)) return false;
    found.push_back(q);
    return true;
  };

  // fixed vectors
  Matrix stacked(static_cast<Idx>(ops.size()) * n, n);
  for (std::size_t k = 0; k < ops.size(); ++k) stacked.middleRows(static_cast<Idx>(k) * n, n) = ops[k];
  const Matrix fixed = ops.empty() ? Matrix::Identity(n, n) : kernel(stacked);
  if (fixed.cols() == n) {
    // trivial action: every line is invariant, report a g-orthogonal basis
    Eigen::SelfAdjointEigenSolver<Matrix> es(g);
    for (Idx k = 0; k < n; ++k) add(es.eigenvectors().col(k));
  } else {
    add(fixed);
    for (Idx k = 0; k < fixed.cols(); ++k) add(fixed.col(k));
  }

  // eigenvectors of generic combinations, closed under the operators
  Rng rng(derive(sample.seed, 3));
  for (int trial = 0; trial < 4 && !ops.empty(); ++trial) {
    Matrix c = Matrix::Zero(n, n);
    for (const Matrix& m : ops) c += rng.normal() * m;
    Eigen::EigenSolver<Matrix> es(c);
    for (Idx k = 0; k < n; ++k) {
      const Eigen::VectorXcd v = es.eigenvectors().col(k);
      Matrix seed(n, 2);
      seed.col(0) = v.real();
      seed.col(1) = v.imag();
      add(krylov_closure(seed, ops));
      add(krylov_closure(v.real(), ops));
    }
  }

  // lattice operations: complements, intersections, sums
  for (int round = 0; round < 2; ++round) {
    const std::size_t count = found.size();
    for (std::size_t a = 0; a < count && found.size() < 64; ++a) add(complement(found[a], g));
    for (std::size_t a = 0; a < count && found.size() < 64; ++a)
      for (std::size_t b = a + 1; b < count && found.size() < 64; ++b) {
        add(intersect(found[a], found[b]));
        add(sum(found[a], found[b]));
      }
  }

  for (const Matrix& q : found) {
    InvariantSubspace s;
    s.basis = q;
    s.dim = static_cast<std::size_t>(q.cols());
    s.invariance_residual = invariance_residual(q, sample.algebra, sample.elements);
    if (s.invariance_residual >= kInvarianceTol) continue;
    const double h = invariance_residual(q, sample.held_out);
    if (h >= kInvarianceTol) continue;
    rep.held_out_residual = std::max(rep.held_out_residual, h);
    s.degeneracy = degeneracy(q, g);
    rep.subspaces.push_back(std::move(s));
  }
  std::stable_sort(rep.subspaces.begin(), rep.subspaces.end(),
                   [](const InvariantSubspace& a, const InvariantSubspace& b) {
                     if (a.dim != b.dim) return a.dim < b.dim;
                     return a.degeneracy > b.degeneracy;
                   });

  rep.classification = HolonomyClass::Irreducible;
  for (const auto& s : rep.subspaces) {
    if (s.degeneracy == 0) {
      rep.classification = HolonomyClass::Decomposable;
      break;
    }
    rep.classification = HolonomyClass::IndecomposableWithNullSubspace;
  }
  return rep;
}

std::string BergerEntry::row() const {
  if (algebra == ambient) return algebra;
  return algebra + " ⊂ " + ambient;
}

std::vector<BergerEntry> berger_candidates(int t, int s) {
  if (t < 0 || s < 0) throw Error(ErrorCode::InvalidArgument, "signature entries must be non-negative");
  auto so = [](int a, int b) {
    return a == 0 ? "so(" + std::to_string(b) + ")" : "so(" + std::to_string(a) + "," + std::to_string(b) + ")";
  };
  std::vector<BergerEntry> out{{so(t, s), so(t, s)}};
  // rows of the list; each is matched in (t,s) and with t and s swapped
  auto match = [&](int a, int b) { return (a == t && b == s) || (a == s && b == t); };
  const std::string amb = so(t, s);
  if (t % 2 == 0 && s % 2 == 0 && t + s > 0) {
    const std::string pq = std::to_string(t / 2) + "," + std::to_string(s / 2);
    out.push_back({"u(" + pq + ")", amb});
    out.push_back({"su(" + pq + ")", amb});
  }
  if (t % 4 == 0 && s % 4 == 0 && t + s > 0) {
    out.push_back({"sp(" + std::to_string(t / 4) + "," + std::to_string(s / 4) + ")", amb});
  }
  if (t == s && t > 0) out.push_back({"so(" + std::to_string(t) + ",C)", amb});
  if (match(7, 7)) out.push_back({"g2^C", amb});
  if (match(8, 8)) out.push_back({"spin(7,C)", amb});
  if (match(0, 7)) out.push_back({"g2", amb});
  if (match(0, 8)) out.push_back({"spin(7)", amb});
  if (match(3, 4)) out.push_back({"g2(2)", amb});
  if (match(4, 4)) out.push_back({"spin(3,4)", amb});
  return out;
}

}  // namespace conelab
