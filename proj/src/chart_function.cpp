#include "conelab/chart_function.hpp"

namespace conelab {

Eigen::VectorXd ChartFunction::value(const Eigen::VectorXd& x) const {
  auto y = f0_(std::span<const double>(x.data(), static_cast<std::size_t>(x.size())));
  return Eigen::Map<const Eigen::VectorXd>(y.data(), static_cast<Eigen::Index>(y.size()));
}

Eigen::MatrixXd ChartFunction::jacobian(const Eigen::VectorXd& x) const {
  const auto n = static_cast<std::size_t>(x.size());
  Eigen::MatrixXd jac(static_cast<Eigen::Index>(out_), x.size());
  std::vector<Dual1> arg(n);
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t i = 0; i < n; ++i) arg[i] = Dual1(x[static_cast<Eigen::Index>(i)], i == k ? 1.0 : 0.0);
    auto y = f1_(arg);
    for (std::size_t o = 0; o < out_; ++o) jac(static_cast<Eigen::Index>(o), static_cast<Eigen::Index>(k)) = y[o].d;
  }
  return jac;
}

std::vector<Eigen::MatrixXd> ChartFunction::hessians(const Eigen::VectorXd& x) const {
  const auto n = static_cast<std::size_t>(x.size());
  std::vector<Eigen::MatrixXd> hess(out_, Eigen::MatrixXd::Zero(x.size(), x.size()));
  std::vector<Dual2> arg(n);
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t l = k; l < n; ++l) {
      for (std::size_t i = 0; i < n; ++i) {
        double xi = x[static_cast<Eigen::Index>(i)];
        arg[i] = Dual2(Dual1(xi, i == l ? 1.0 : 0.0), Dual1(i == k ? 1.0 : 0.0, 0.0));
      }
      auto y = f2_(arg);
      for (std::size_t o = 0; o < out_; ++o) {
        double v = y[o].d.d;
        hess[o](static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(l)) = v;
        hess[o](static_cast<Eigen::Index>(l), static_cast<Eigen::Index>(k)) = v;
      }
    }
  }
  return hess;
}

}  // namespace conelab
