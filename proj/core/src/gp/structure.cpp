#include "phslab/gp/structure.hpp"

#include <cmath>

namespace phslab::gp {

double softplus(double v) {
  return v > 30.0 ? v : std::log1p(std::exp(v));
}

double softplus_inverse(double y) {
  if (!(y > 0.0)) throw InvalidArgument("softplus_inverse: argument must be positive");
  return y > 30.0 ? y : std::log(std::expm1(y));
}

double logistic(double v) { return 1.0 / (1.0 + std::exp(-v)); }

Mat MicroactuatorStructure::interconnection(const Vec&, const Vec&) const {
  Mat J = Mat::Zero(3, 3);
  J(0, 1) = 1.0;
  J(1, 0) = -1.0;
  return J;
}

Mat MicroactuatorStructure::dissipation(const Vec&, const Vec& phi) const {
  Mat R = Mat::Zero(3, 3);
  R(1, 1) = damping(phi);
  R(2, 2) = 1.0 / resistance(phi);
  return R;
}

Mat MicroactuatorStructure::io_matrix(const Vec&, const Vec& phi) const {
  Mat G = Mat::Zero(3, 1);
  G(2, 0) = 1.0 / resistance(phi);
  return G;
}

Mat MicroactuatorStructure::structure_derivative(const Vec&, const Vec& phi, int k) const {
  Mat d = Mat::Zero(3, 3);
  if (k == 0) {
    d(1, 1) = -logistic(phi(0));
  } else {
    const double r = resistance(phi);
    d(2, 2) = logistic(phi(1)) / (r * r);
  }
  return d;
}

Mat MicroactuatorStructure::io_derivative(const Vec&, const Vec& phi, int k) const {
  Mat d = Mat::Zero(3, 1);
  if (k == 1) {
    const double r = resistance(phi);
    d(2, 0) = -logistic(phi(1)) / (r * r);
  }
  return d;
}

Vec MicroactuatorStructure::params_for(double damping, double resistance) {
  Vec phi(2);
  phi << softplus_inverse(damping), softplus_inverse(resistance);
  return phi;
}

ConstantStructure::ConstantStructure(Mat J, Mat R, Mat G)
    : J_(std::move(J)), R_(std::move(R)), G_(std::move(G)) {
  const auto n = J_.rows();
  if (J_.cols() != n || R_.rows() != n || R_.cols() != n || G_.rows() != n) {
    throw InvalidArgument("ConstantStructure: inconsistent dimensions");
  }
  if ((J_ + J_.transpose()).cwiseAbs().maxCoeff() > 1e-12) {
    throw InvalidArgument("ConstantStructure: J must be skew-symmetric");
  }
}

Mat ConstantStructure::structure_derivative(const Vec&, const Vec&, int) const {
  throw InvalidArgument("ConstantStructure has no parameters");
}

Mat ConstantStructure::io_derivative(const Vec&, const Vec&, int) const {
  throw InvalidArgument("ConstantStructure has no parameters");
}

StructureEstimate microactuator_structure(double damping, double resistance) {
  return {std::make_shared<MicroactuatorStructure>(),
          MicroactuatorStructure::params_for(damping, resistance)};
}

StructureEstimate constant_structure(const Mat& J, const Mat& R, const Mat& G) {
  return {std::make_shared<ConstantStructure>(J, R, G), Vec(0)};
}

}  // namespace phslab::gp
