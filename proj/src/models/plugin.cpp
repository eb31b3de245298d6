#include "agepath/models/plugin.hpp"

#include "agepath/linalg.hpp"
#include "agepath/models/lasso.hpp"
#include "agepath/models/logistic.hpp"
#include "agepath/models/svm.hpp"

#include <algorithm>

namespace agepath {

std::string_view to_string(SetLabel s) {
  switch (s) {
    case SetLabel::E: return "E";
    case SetLabel::M: return "M";
    case SetLabel::D: return "D";
    case SetLabel::EN: return "EN";
    case SetLabel::EZ: return "EZ";
    case SetLabel::EP: return "EP";
    case SetLabel::active: return "A";
    case SetLabel::inactive: return "I";
  }
  return "?";
}

ModelPlugin::ModelPlugin(std::shared_ptr<const Problem> problem, SpRegularizer reg)
    : problem_(std::move(problem)), reg_(reg) {
  reg_.validate();
  if (reg_.family == SpFamily::hard)
    throw std::invalid_argument("the hard regularizer has a piecewise-constant path; use ACS");
}

Vector ModelPlugin::rhs(double lambda, const Vector& x) const {
  if (x.size() == 0) return x;
  const Jacobians J = jacobian(lambda, x);
  const PinvSolution s = pinv_solve_ex(J.Jx, J.Jl);
  rank_deficient = s.rank_deficient;
  return -rhs_scale * s.x;
}

Eigen::Index ModelPlugin::monitor_count() const { return monitors(1.0, pack()).size(); }

double ModelPlugin::partition_violation(double lambda) const {
  const Vector m = monitors(lambda, pack());
  return m.size() ? std::max(0.0, -m.minCoeff()) : 0.0;
}

double ModelPlugin::kkt_residual(double lambda) const {
  return std::max(agepath::kkt_residual(*problem_, reg_, params(), lambda), partition_violation(lambda));
}

double ModelPlugin::region_margin(Region r, double loss, double lambda) const {
  const Thresholds t = thresholds(reg_, lambda);
  switch (r) {
    case Region::E: return t.lower - loss;
    case Region::M: return std::min(loss - t.lower, t.upper - loss);
    case Region::D: return loss - t.upper;
  }
  return 0.0;
}

Region ModelPlugin::region_after(Region r, double loss, double lambda) const {
  if (reg_.family != SpFamily::mixture) return r == Region::E ? Region::D : Region::E;
  if (r != Region::M) return Region::M;
  const Thresholds t = thresholds(reg_, lambda);
  return loss - t.lower <= t.upper - loss ? Region::E : Region::D;
}

std::unique_ptr<ModelPlugin> make_plugin(std::shared_ptr<const Problem> problem, const SpRegularizer& reg) {
  switch (problem->kind()) {
    case ModelKind::svm: return std::make_unique<SvmPlugin>(std::move(problem), reg);
    case ModelKind::lasso: return std::make_unique<LassoPlugin>(std::move(problem), reg);
    case ModelKind::logistic: return std::make_unique<LogitPlugin>(std::move(problem), reg);
  }
  return nullptr;
}

double kkt_residual(const Problem& pb, const SpRegularizer& reg, const Vector& params, double lambda) {
  switch (pb.kind()) {
    case ModelKind::svm: return svm_kkt_residual(pb, reg, params, lambda);
    case ModelKind::lasso: return lasso_kkt_residual(pb, reg, params, lambda);
    case ModelKind::logistic: return logit_kkt_residual(pb, reg, params, lambda);
  }
  return 0.0;
}

Vector decision_function(const Problem& pb, const Vector& params, const Matrix& Xq) {
  if (Xq.cols() != pb.d()) throw std::invalid_argument("predict: query has wrong feature count");
  switch (pb.kind()) {
    case ModelKind::svm: {
      const Matrix Kq = cross_kernel(Xq, pb.data().X(), pb.hyper().kernel);
      const Vector ay = params.head(pb.n()).cwiseProduct(pb.data().y());
      return (Kq * ay).array() + params(pb.n());
    }
    case ModelKind::lasso:
      return Xq * params;
    case ModelKind::logistic:
      return (Xq * params.head(pb.d())).array() + params(pb.d());
  }
  return {};
}

Vector predict(const Problem& pb, const Vector& params, const Matrix& Xq) {
  Vector f = decision_function(pb, params, Xq);
  if (pb.kind() == ModelKind::lasso) return f;
  return f.unaryExpr([](double v) { return v >= 0.0 ? 1.0 : -1.0; });
}

Vector predict_proba(const Problem& pb, const Vector& params, const Matrix& Xq) {
  if (pb.kind() != ModelKind::logistic) throw std::invalid_argument("probabilities need the logistic model");
  return decision_function(pb, params, Xq).unaryExpr([](double v) { return sigmoid(v); });
}

}  // namespace agepath
