#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "conelab/geodesic.hpp"
#include "conelab/metric.hpp"

namespace conelab {

struct HolonomySample {
  Point basepoint;
  Matrix metric;                 // g at the basepoint
  std::vector<Matrix> elements;  // loop transports (group)
  std::vector<Matrix> algebra;   // P^-1 R_q(X,Y) P (Ambrose-Singer)
  std::vector<Matrix> held_out;  // fresh algebra elements for validation only
  std::uint64_t seed = 0;
  std::size_t resampled_loops = 0;
};

// Transports around coordinate rectangles at the basepoint with log-uniform
// side lengths in [1e-3, 1]; rectangles leaving the chart are redrawn and counted.
HolonomySample holonomy_sample(const MetricField& field, const Point& basepoint, std::size_t n_loops,
                               std::uint64_t seed);

// P^-1 R_q(X,Y) P over random q in the sampling box, straight paths from the
// basepoint and random X, Y.
std::vector<Matrix> ambrose_singer_sample(const MetricField& field, const Point& basepoint, std::size_t n_probes,
                                          std::uint64_t seed);

// Loops, algebra probes and 10 held-out probes from one seed.
HolonomySample sample_holonomy(const MetricField& field, const Point& basepoint, std::size_t n_loops,
                               std::size_t n_probes, std::uint64_t seed);

// max |G^T g G - g| over elements
double group_residual(const HolonomySample& s);
// max |A^T g + g A| over algebra elements
double algebra_residual(const HolonomySample& s);

enum class HolonomyClass { Irreducible, Decomposable, IndecomposableWithNullSubspace };
std::string to_string(HolonomyClass c);

struct InvariantSubspace {
  Matrix basis;                // orthonormal columns (Euclidean)
  std::size_t dim = 0;
  std::size_t degeneracy = 0;  // dim - rank(Gram)
  double invariance_residual = 0.0;
  bool totally_null() const { return degeneracy == dim; }
};

struct SubspaceReport {
  std::vector<InvariantSubspace> subspaces;
  HolonomyClass classification = HolonomyClass::Irreducible;
  std::size_t sample_size = 0;  // operators used; a negative verdict holds at this size only
  std::size_t held_out = 0;
  double held_out_residual = 0.0;
};

inline constexpr double kGramRankTol = 1e-7;
inline constexpr double kInvarianceTol = 1e-5;

// Throws InconclusiveSample when the algebra sample is empty.
SubspaceReport invariant_subspace_analysis(const HolonomySample& sample);

// max over operators of |(I - Q Q^T) M Q|; algebra elements are normalised.
double invariance_residual(const Matrix& basis, std::span<const Matrix> algebra, std::span<const Matrix> group = {});

struct BergerEntry {
  std::string algebra;
  std::string ambient;
  std::string row() const;
};

// Entries of the irreducible time-like cone holonomy list whose ambient
// signature is (t, s) or (s, t); so(t,s) always comes first.
std::vector<BergerEntry> berger_candidates(int t, int s);

}  // namespace conelab
