#include "conelab/chart.hpp"

#include <sstream>

#include "conelab/errors.hpp"

namespace conelab {

Interval default_sampling(const Interval& domain) {
  if (domain.bounded()) {
    double pad = 0.1 * domain.width();
    return {domain.lo + pad, domain.hi - pad};
  }
  if (std::isfinite(domain.lo)) return {domain.lo + 0.5, domain.lo + 2.0};
  if (std::isfinite(domain.hi)) return {domain.hi - 2.0, domain.hi - 0.5};
  return {-1.0, 1.0};
}

CoordinateChart::CoordinateChart(std::vector<std::string> names, std::vector<Interval> domain,
                                 std::vector<Interval> sampling)
    : names_(std::move(names)), domain_(std::move(domain)), sampling_(std::move(sampling)) {
  if (names_.empty() || names_.size() != domain_.size()) {
    throw Error(ErrorCode::InvalidArgument, "chart needs one domain interval per coordinate");
  }
  for (const auto& iv : domain_) {
    if (!(iv.lo < iv.hi)) throw Error(ErrorCode::InvalidArgument, "empty coordinate interval");
  }
  if (sampling_.empty()) {
    for (const auto& iv : domain_) sampling_.push_back(default_sampling(iv));
  }
  if (sampling_.size() != domain_.size()) {
    throw Error(ErrorCode::InvalidArgument, "sampling box has wrong dimension");
  }
  for (std::size_t i = 0; i < dim(); ++i) {
    const auto& s = sampling_[i];
    const auto& d = domain_[i];
    if (!s.bounded() || s.lo < d.lo || s.hi > d.hi || !(s.lo < s.hi)) {
      throw Error(ErrorCode::InvalidArgument, "sampling box for '" + names_[i] + "' not inside domain");
    }
  }
}

bool CoordinateChart::contains(std::span<const double> x) const {
  if (x.size() != dim()) return false;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!std::isfinite(x[i]) || !domain_[i].contains(x[i])) return false;
  }
  return true;
}

void CoordinateChart::require(const Point& p) const {
  if (contains(p)) return;
  std::ostringstream os;
  os << "point (";
  for (Eigen::Index i = 0; i < p.size(); ++i) os << (i ? ", " : "") << p[i];
  os << ") outside chart domain";
  throw Error(ErrorCode::OutOfDomain, os.str());
}

Point CoordinateChart::sample(Rng& rng) const {
  Point p(static_cast<Eigen::Index>(dim()));
  for (std::size_t i = 0; i < dim(); ++i) p[static_cast<Eigen::Index>(i)] = rng.uniform(sampling_[i].lo, sampling_[i].hi);
  return p;
}

std::vector<Point> CoordinateChart::samples(std::size_t n, std::uint64_t seed) const {
  Rng rng(seed);
  std::vector<Point> out;
  out.reserve(n);
  for (std::size_t k = 0; k < n; ++k) out.push_back(sample(rng));
  return out;
}

CoordinateChart CoordinateChart::prepend(const std::string& name, Interval domain, Interval sampling) const {
  std::vector<std::string> names{name};
  std::vector<Interval> dom{domain};
  std::vector<Interval> smp{sampling};
  names.insert(names.end(), names_.begin(), names_.end());
  dom.insert(dom.end(), domain_.begin(), domain_.end());
  smp.insert(smp.end(), sampling_.begin(), sampling_.end());
  return {names, dom, smp};
}

CoordinateChart CoordinateChart::concat(const CoordinateChart& other) const {
  auto names = names_;
  auto dom = domain_;
  auto smp = sampling_;
  names.insert(names.end(), other.names_.begin(), other.names_.end());
  dom.insert(dom.end(), other.domain_.begin(), other.domain_.end());
  smp.insert(smp.end(), other.sampling_.begin(), other.sampling_.end());
  return {names, dom, smp};
}

}  // namespace conelab
