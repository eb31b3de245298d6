#pragma once

#include "agepath/dataset.hpp"
#include "agepath/kernel.hpp"
#include "agepath/regularizers.hpp"

#include <memory>
#include <string>
#include <vector>

namespace agepath {

enum class ModelKind { svm, lasso, logistic };

std::string_view to_string(ModelKind m);
ModelKind parse_model(std::string_view s);
Task task_for(ModelKind m);

struct Hyper {
  double C = 1.0;       // svm, logistic
  double alpha = 0.01;  // lasso L1 strength
  Kernel kernel;        // svm

  void validate(ModelKind m) const;
};

// Dataset plus hyperparameters plus whatever can be cached once (the SVM
// kernel). Parameter layout: svm (alpha_1..alpha_n, b); lasso w; logistic (w, b).
class Problem {
 public:
  Problem(ModelKind kind, Dataset ds, Hyper hyper);

  ModelKind kind() const { return kind_; }
  const Dataset& data() const { return *ds_; }
  const Hyper& hyper() const { return hyper_; }
  Eigen::Index n() const { return ds_->n(); }
  Eigen::Index d() const { return ds_->d(); }
  Eigen::Index param_dim() const;
  std::vector<std::string> param_names() const;

  // svm only: K and Q = (y y^T) .* K
  const Matrix& K() const { return *K_; }
  const Matrix& Q() const { return *Q_; }

  Vector losses(const Vector& params) const;
  // svm margins g = 1 - Q alpha - y b
  Vector margins(const Vector& params) const;
  // logistic / lasso linear predictor; svm decision values
  Vector decision(const Vector& params) const;

  double regularizer(const Vector& params) const;
  // SPL objective R(w) + sum v_i l_i + f(v_i, lambda)
  double spl_objective(const Vector& params, const Vector& v, const SpRegularizer& reg,
                       double lambda) const;
  Vector weights(const Vector& params, const SpRegularizer& reg, double lambda) const;
  Vector zero_params() const { return Vector::Zero(param_dim()); }

 private:
  ModelKind kind_;
  std::shared_ptr<const Dataset> ds_;
  Hyper hyper_;
  std::shared_ptr<const Matrix> K_;
  std::shared_ptr<const Matrix> Q_;
};

// log(1 + exp(-m)) without overflow
double log1pexp_neg(double m);
double sigmoid(double m);

}  // namespace agepath
