#pragma once

#include <Eigen/Dense>

#include <functional>
#include <memory>
#include <span>
#include <type_traits>
#include <utility>
#include <vector>

#include "conelab/dual.hpp"

namespace conelab {

// A map R^in -> R^out that can be evaluated on doubles and on first/second
// order dual numbers. Built from one generic callable, so the value and the
// derivatives come from the same code path.
//
// The callable receives std::span<const T> and returns std::vector<T>.
class ChartFunction {
 public:
  ChartFunction() = default;

  template <class F>
  ChartFunction(std::size_t in_dim, std::size_t out_dim, F f)
      : in_(in_dim),
        out_(out_dim),
        f0_([f](std::span<const double> x) { return std::vector<double>(f(x)); }),
        f1_([f](std::span<const Dual1> x) { return std::vector<Dual1>(f(x)); }),
        f2_([f](std::span<const Dual2> x) { return std::vector<Dual2>(f(x)); }) {}

  bool valid() const { return static_cast<bool>(f0_); }
  std::size_t in_dim() const { return in_; }
  std::size_t out_dim() const { return out_; }

  std::vector<double> operator()(std::span<const double> x) const { return f0_(x); }
  std::vector<Dual1> operator()(std::span<const Dual1> x) const { return f1_(x); }
  std::vector<Dual2> operator()(std::span<const Dual2> x) const { return f2_(x); }

  Eigen::VectorXd value(const Eigen::VectorXd& x) const;

  // out x in matrix of first partials, exact.
  Eigen::MatrixXd jacobian(const Eigen::VectorXd& x) const;

  // hess[o](k,l) = d^2 f_o / dx_k dx_l, exact.
  std::vector<Eigen::MatrixXd> hessians(const Eigen::VectorXd& x) const;

 private:
  std::size_t in_ = 0;
  std::size_t out_ = 0;
  std::function<std::vector<double>(std::span<const double>)> f0_;
  std::function<std::vector<Dual1>(std::span<const Dual1>)> f1_;
  std::function<std::vector<Dual2>(std::span<const Dual2>)> f2_;
};

template <class Span>
using scalar_of = std::remove_cv_t<typename Span::element_type>;

// Scalar wrapper: f(x) returns a single T.
template <class F>
ChartFunction scalar_function(std::size_t in_dim, F f) {
  return ChartFunction(in_dim, 1, [f](auto x) {
    using T = scalar_of<decltype(x)>;
    return std::vector<T>{f(x)};
  });
}

}  // namespace conelab
