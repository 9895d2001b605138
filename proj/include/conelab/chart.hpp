#pragma once

#include <Eigen/Dense>

#include <limits>
#include <span>
#include <string>
#include <vector>

#include "conelab/rng.hpp"

namespace conelab {

using Point = Eigen::VectorXd;
using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// Open interval (lo, hi); either end may be infinite.
struct Interval {
  double lo = -kInf;
  double hi = kInf;

  bool contains(double x) const { return x > lo && x < hi; }
  bool bounded() const { return std::isfinite(lo) && std::isfinite(hi); }
  double width() const { return hi - lo; }
};

// One coordinate chart with an open box domain. `sampling` is a finite box
// inside the domain used by randomized checks.
class CoordinateChart {
 public:
  CoordinateChart() = default;
  CoordinateChart(std::vector<std::string> names, std::vector<Interval> domain,
                  std::vector<Interval> sampling = {});

  std::size_t dim() const { return names_.size(); }
  const std::vector<std::string>& names() const { return names_; }
  const std::vector<Interval>& domain() const { return domain_; }
  const std::vector<Interval>& sampling() const { return sampling_; }

  bool contains(std::span<const double> x) const;
  bool contains(const Point& p) const { return contains(std::span<const double>(p.data(), p.size())); }

  // Throws OutOfDomain.
  void require(const Point& p) const;

  Point sample(Rng& rng) const;
  std::vector<Point> samples(std::size_t n, std::uint64_t seed) const;

  // Prepend/append coordinates (cone and warped constructions add one in front).
  CoordinateChart prepend(const std::string& name, Interval domain, Interval sampling) const;
  CoordinateChart concat(const CoordinateChart& other) const;

 private:
  std::vector<std::string> names_;
  std::vector<Interval> domain_;
  std::vector<Interval> sampling_;
};

// Default finite sampling window for a domain interval.
Interval default_sampling(const Interval& domain);

inline std::span<const double> as_span(const Eigen::VectorXd& v) { return {v.data(), static_cast<std::size_t>(v.size())}; }

}  // namespace conelab
