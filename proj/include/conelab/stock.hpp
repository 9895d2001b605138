#pragma once

// Ready-made metrics used by tests, the acceptance suite and the CLI.

#include <string>
#include <vector>

#include "conelab/metric.hpp"
#include "conelab/warped.hpp"

namespace conelab::stock {

MetricField euclidean(std::size_t n);
// -dx^2 + dy^2
MetricField minkowski2();
// d theta^2 on the real line (universal cover of the circle)
MetricField circle();
// round unit sphere in stereographic coordinates: 4 (dx^2 + dy^2) / (1 + x^2 + y^2)^2
MetricField round_sphere(std::vector<std::string> names = {"x", "y"});
// curvature -1 upper half plane: (dx^2 + dy^2) / y^2
MetricField hyperbolic_halfplane(std::vector<std::string> names = {"x", "y"});
// flat metric on the fundamental box (0, 2 pi)^2 of a 2-torus
MetricField flat_torus(std::vector<std::string> names = {"x", "y"});

// ds^2 + e^{-2s} g_N  (eps = -1, f = e^{-s})
WarpedSpec horosphere_spec(const MetricField& gN);
MetricField horosphere(const MetricField& gN);
// ds^2 + cosh^2(s) g_N  (eps = -1, f = cosh)
WarpedSpec cosh_spec(const MetricField& gN);
MetricField cosh_warped(const MetricField& gN);
// -dt^2 + cosh^2(t) d theta^2
MetricField de_sitter2();

// g1 (+) g2 on the concatenated chart
MetricField product(const MetricField& g1, const MetricField& g2);

struct Named {
  std::string name;
  MetricField field;
};
// Six metrics with non-trivial Christoffels, used by cross-mode checks.
std::vector<Named> cross_mode_suite();

}  // namespace conelab::stock
