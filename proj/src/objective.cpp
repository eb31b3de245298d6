#include "agepath/problem.hpp"

#include <algorithm>
#include <cmath>

namespace agepath {

double log1pexp_neg(double m) {
  return m > 0.0 ? std::log1p(std::exp(-m)) : -m + std::log1p(std::exp(m));
}

double sigmoid(double m) {
  if (m >= 0.0) return 1.0 / (1.0 + std::exp(-m));
  const double e = std::exp(m);
  return e / (1.0 + e);
}

std::string_view to_string(ModelKind m) {
  switch (m) {
    case ModelKind::svm: return "svm";
    case ModelKind::lasso: return "lasso";
    case ModelKind::logistic: return "logistic";
  }
  return "?";
}

ModelKind parse_model(std::string_view s) {
  if (s == "svm") return ModelKind::svm;
  if (s == "lasso") return ModelKind::lasso;
  if (s == "logistic") return ModelKind::logistic;
  throw std::invalid_argument("unknown model '" + std::string(s) + "'");
}

Task task_for(ModelKind m) { return m == ModelKind::lasso ? Task::regression : Task::classification; }

void Hyper::validate(ModelKind m) const {
  if (m != ModelKind::lasso && !(C > 0.0 && std::isfinite(C))) throw std::invalid_argument("C must be positive");
  if (m == ModelKind::lasso && !(alpha > 0.0 && std::isfinite(alpha)))
    throw std::invalid_argument("alpha must be positive");
  if (m == ModelKind::svm && kernel.kind == KernelKind::gaussian && !(kernel.gamma > 0.0))
    throw std::invalid_argument("kernel gamma must be positive");
}

Problem::Problem(ModelKind kind, Dataset ds, Hyper hyper)
    : kind_(kind), ds_(std::make_shared<const Dataset>(std::move(ds))), hyper_(hyper) {
  hyper_.validate(kind_);
  if (ds_->task() != task_for(kind_))
    throw std::invalid_argument(std::string(to_string(kind_)) + " needs a " +
                                std::string(to_string(task_for(kind_))) + " dataset");
  if (kind_ == ModelKind::svm) {
    auto K = std::make_shared<Matrix>(kernel_matrix(*ds_, hyper_.kernel));
    auto Q = std::make_shared<Matrix>(*K);
    const Vector& y = ds_->y();
    for (Eigen::Index i = 0; i < Q->rows(); ++i)
      for (Eigen::Index j = 0; j < Q->cols(); ++j) (*Q)(i, j) *= y(i) * y(j);
    K_ = std::move(K);
    Q_ = std::move(Q);
  }
}

Eigen::Index Problem::param_dim() const {
  switch (kind_) {
    case ModelKind::svm: return n() + 1;
    case ModelKind::lasso: return d();
    case ModelKind::logistic: return d() + 1;
  }
  return 0;
}

std::vector<std::string> Problem::param_names() const {
  std::vector<std::string> out;
  if (kind_ == ModelKind::svm) {
    for (Eigen::Index i = 0; i < n(); ++i) out.push_back("alpha_" + std::to_string(i + 1));
    out.emplace_back("b");
    return out;
  }
  for (Eigen::Index j = 0; j < d(); ++j) out.push_back("w_" + std::to_string(j + 1));
  if (kind_ == ModelKind::logistic) out.emplace_back("b");
  return out;
}

Vector Problem::margins(const Vector& p) const {
  const Vector alpha = p.head(n());
  return (Vector::Ones(n()) - Q() * alpha - ds_->y() * p(n())).eval();
}

Vector Problem::decision(const Vector& p) const {
  switch (kind_) {
    case ModelKind::svm: {
      const Vector ay = p.head(n()).cwiseProduct(ds_->y());
      return (K() * ay).array() + p(n());
    }
    case ModelKind::lasso:
      return ds_->X() * p;
    case ModelKind::logistic:
      return (ds_->X() * p.head(d())).array() + p(d());
  }
  return {};
}

Vector Problem::losses(const Vector& p) const {
  if (p.size() != param_dim()) throw std::invalid_argument("losses: parameter vector has wrong length");
  Vector l(n());
  switch (kind_) {
    case ModelKind::svm: {
      const Vector g = margins(p);
      for (Eigen::Index i = 0; i < n(); ++i) l(i) = hyper_.C * std::max(0.0, g(i));
      break;
    }
    case ModelKind::lasso: {
      const Vector r = ds_->X() * p - ds_->y();
      l = r.array().square() / (2.0 * static_cast<double>(n()));
      break;
    }
    case ModelKind::logistic: {
      const Vector f = decision(p);
      for (Eigen::Index i = 0; i < n(); ++i) l(i) = hyper_.C * log1pexp_neg(ds_->y()(i) * f(i));
      break;
    }
  }
  return l;
}

double Problem::regularizer(const Vector& p) const {
  switch (kind_) {
    case ModelKind::svm: {
      const Vector a = p.head(n());
      return 0.5 * a.dot(Q() * a);
    }
    case ModelKind::lasso:
      return hyper_.alpha * p.lpNorm<1>();
    case ModelKind::logistic:
      return 0.5 * p.head(d()).squaredNorm();
  }
  return 0.0;
}

double Problem::spl_objective(const Vector& p, const Vector& v, const SpRegularizer& reg,
                              double lambda) const {
  const Vector l = losses(p);
  double obj = regularizer(p);
  for (Eigen::Index i = 0; i < n(); ++i) obj += v(i) * l(i) + sp_penalty(reg, v(i), lambda);
  return obj;
}

Vector Problem::weights(const Vector& p, const SpRegularizer& reg, double lambda) const {
  const Vector l = losses(p);
  Vector v(n());
  for (Eigen::Index i = 0; i < n(); ++i) v(i) = weight(reg, l(i), lambda);
  return v;
}

}  // namespace agepath
