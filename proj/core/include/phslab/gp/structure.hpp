#pragma once

#include <memory>
#include <string>
#include <vector>

#include "phslab/common.hpp"

namespace phslab::gp {

/// Parametric family for the estimated structure matrices J_hat(x|phi),
/// R_hat(x|phi) and G_hat(x|phi). Parameters are unconstrained reals; each
/// family maps them so that J_hat is skew and R_hat is PSD for every value.
class StructureFamily {
 public:
  virtual ~StructureFamily() = default;

  [[nodiscard]] virtual std::string name() const = 0;
  [[nodiscard]] virtual int dim_state() const = 0;
  [[nodiscard]] virtual int dim_input() const = 0;
  [[nodiscard]] virtual int num_params() const = 0;
  [[nodiscard]] virtual std::vector<std::string> param_names() const = 0;

  [[nodiscard]] virtual Mat interconnection(const Vec& x, const Vec& phi) const = 0;
  [[nodiscard]] virtual Mat dissipation(const Vec& x, const Vec& phi) const = 0;
  [[nodiscard]] virtual Mat io_matrix(const Vec& x, const Vec& phi) const = 0;

  /// d(J_hat - R_hat)/d phi_k.
  [[nodiscard]] virtual Mat structure_derivative(const Vec& x, const Vec& phi, int k) const = 0;
  /// d G_hat / d phi_k.
  [[nodiscard]] virtual Mat io_derivative(const Vec& x, const Vec& phi, int k) const = 0;

  /// J_hat - R_hat.
  [[nodiscard]] Mat structure(const Vec& x, const Vec& phi) const {
    return interconnection(x, phi) - dissipation(x, phi);
  }
};

/// A family together with its current parameter vector.
struct StructureEstimate {
  std::shared_ptr<const StructureFamily> family;
  Vec params;

  [[nodiscard]] int dim_state() const { return family->dim_state(); }
  [[nodiscard]] int dim_input() const { return family->dim_input(); }
  [[nodiscard]] Mat interconnection(const Vec& x) const { return family->interconnection(x, params); }
  [[nodiscard]] Mat dissipation(const Vec& x) const { return family->dissipation(x, params); }
  [[nodiscard]] Mat io_matrix(const Vec& x) const { return family->io_matrix(x, params); }
  [[nodiscard]] Mat structure(const Vec& x) const { return family->structure(x, params); }
};

double softplus(double v);
double softplus_inverse(double y);
double logistic(double v);

/// Microactuator structure: J = [[0,1,0],[-1,0,0],[0,0,0]],
/// R = diag(0, b, 1/r), G = (0, 0, 1/r)^T with b = softplus(phi_0) and
/// r = softplus(phi_1). The resistance is shared between R and G.
class MicroactuatorStructure final : public StructureFamily {
 public:
  [[nodiscard]] std::string name() const override { return "microactuator"; }
  [[nodiscard]] int dim_state() const override { return 3; }
  [[nodiscard]] int dim_input() const override { return 1; }
  [[nodiscard]] int num_params() const override { return 2; }
  [[nodiscard]] std::vector<std::string> param_names() const override {
    return {"damping", "resistance"};
  }
  [[nodiscard]] Mat interconnection(const Vec& x, const Vec& phi) const override;
  [[nodiscard]] Mat dissipation(const Vec& x, const Vec& phi) const override;
  [[nodiscard]] Mat io_matrix(const Vec& x, const Vec& phi) const override;
  [[nodiscard]] Mat structure_derivative(const Vec& x, const Vec& phi, int k) const override;
  [[nodiscard]] Mat io_derivative(const Vec& x, const Vec& phi, int k) const override;

  /// Raw parameter vector for physical (damping, resistance).
  static Vec params_for(double damping, double resistance);
  static double damping(const Vec& phi) { return softplus(phi(0)); }
  static double resistance(const Vec& phi) { return softplus(phi(1)); }
};

/// Fully known constant structure without parameters.
class ConstantStructure final : public StructureFamily {
 public:
  ConstantStructure(Mat J, Mat R, Mat G);

  [[nodiscard]] std::string name() const override { return "constant"; }
  [[nodiscard]] int dim_state() const override { return static_cast<int>(J_.rows()); }
  [[nodiscard]] int dim_input() const override { return static_cast<int>(G_.cols()); }
  [[nodiscard]] int num_params() const override { return 0; }
  [[nodiscard]] std::vector<std::string> param_names() const override { return {}; }
  [[nodiscard]] Mat interconnection(const Vec&, const Vec&) const override { return J_; }
  [[nodiscard]] Mat dissipation(const Vec&, const Vec&) const override { return R_; }
  [[nodiscard]] Mat io_matrix(const Vec&, const Vec&) const override { return G_; }
  [[nodiscard]] Mat structure_derivative(const Vec&, const Vec&, int) const override;
  [[nodiscard]] Mat io_derivative(const Vec&, const Vec&, int) const override;

  [[nodiscard]] const Mat& J() const { return J_; }
  [[nodiscard]] const Mat& R() const { return R_; }
  [[nodiscard]] const Mat& G() const { return G_; }

 private:
  Mat J_, R_, G_;
};

StructureEstimate microactuator_structure(double damping, double resistance);
StructureEstimate constant_structure(const Mat& J, const Mat& R, const Mat& G);

}  // namespace phslab::gp
