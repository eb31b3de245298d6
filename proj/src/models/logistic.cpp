#include "agepath/models/logistic.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace agepath {

double logit_kkt_residual(const Problem& pb, const SpRegularizer& reg, const Vector& params, double lambda) {
  const Eigen::Index d = pb.d();
  const double C = pb.hyper().C;
  const Vector v = pb.weights(params, reg, lambda);
  const Vector f = pb.decision(params);
  const Vector& y = pb.data().y();
  Vector coef(pb.n());
  for (Eigen::Index i = 0; i < pb.n(); ++i) coef(i) = -v(i) * C * sigmoid(-y(i) * f(i)) * y(i);
  Vector grad(d + 1);
  grad.head(d) = params.head(d) + pb.data().X().transpose() * coef;
  grad(d) = coef.sum();
  return grad.lpNorm<Eigen::Infinity>();
}

LogitPlugin::LogitPlugin(std::shared_ptr<const Problem> problem, SpRegularizer reg)
    : ModelPlugin(std::move(problem), reg) {
  if (problem_->kind() != ModelKind::logistic) throw std::invalid_argument("LogitPlugin needs a logistic problem");
  theta_ = Vector::Zero(problem_->d() + 1);
  regions_.assign(static_cast<std::size_t>(problem_->n()), Region::E);
}

void LogitPlugin::reset(const Vector& params, double lambda) {
  if (params.size() != problem_->d() + 1) throw std::invalid_argument("logistic: params must have length d+1");
  theta_ = params;
  const Vector l = problem_->losses(theta_);
  for (Eigen::Index i = 0; i < l.size(); ++i) regions_[static_cast<std::size_t>(i)] = region_of(l(i), lambda);
}

Vector LogitPlugin::kkt_map(double lambda, const Vector& x) const {
  const Eigen::Index d = problem_->d();
  const double C = problem_->hyper().C;
  const Vector f = problem_->decision(x);
  const Vector& y = problem_->data().y();
  Vector coef(problem_->n());
  for (Eigen::Index i = 0; i < coef.size(); ++i) {
    const double m = y(i) * f(i);
    const double v = weight_in(reg_, regions_[static_cast<std::size_t>(i)], C * log1pexp_neg(m), lambda);
    coef(i) = -v * C * sigmoid(-m) * y(i);
  }
  Vector F(d + 1);
  F.head(d) = x.head(d) + problem_->data().X().transpose() * coef;
  F(d) = coef.sum();
  return F;
}

ModelPlugin::Jacobians LogitPlugin::jacobian(double lambda, const Vector& x) const {
  const Eigen::Index d = problem_->d();
  const double C = problem_->hyper().C;
  const Vector f = problem_->decision(x);
  const Vector& y = problem_->data().y();
  const auto& X = problem_->data().X();
  // discarded samples carry zero weight and contribute nothing
  std::vector<Eigen::Index> live;
  for (Eigen::Index i = 0; i < problem_->n(); ++i)
    if (regions_[static_cast<std::size_t>(i)] != Region::D) live.push_back(i);
  const auto na = static_cast<Eigen::Index>(live.size());
  Matrix Z(na, d + 1);
  Vector curv(na), dlam(na);
  for (Eigen::Index k = 0; k < na; ++k) {
    const Eigen::Index i = live[static_cast<std::size_t>(k)];
    Z.row(k).head(d) = X.row(i);
    Z(k, d) = 1.0;
    const double m = y(i) * f(i);
    // one exp serves both sigmoids and the loss
    const double e = std::exp(-std::abs(m));
    const double sp = m >= 0.0 ? 1.0 / (1.0 + e) : e / (1.0 + e);
    const double sn = m >= 0.0 ? e / (1.0 + e) : 1.0 / (1.0 + e);
    const Region r = regions_[static_cast<std::size_t>(i)];
    const double l = C * (std::log1p(e) + std::max(0.0, -m));
    const double v = weight_in(reg_, r, l, lambda);
    const WeightGrads gr = weight_grads_in(reg_, r, l, lambda);
    // grad l = -C sn y z, hess l = C sp sn z z^T
    curv(k) = v * C * sp * sn + gr.d_loss * C * C * sn * sn;
    dlam(k) = -gr.d_lambda * C * sn * y(i);
  }
  Jacobians J;
  J.Jx = Z.transpose() * curv.asDiagonal() * Z;
  J.Jx.topLeftCorner(d, d).diagonal().array() += 1.0;
  J.Jl = Z.transpose() * dlam;
  return J;
}

Vector LogitPlugin::monitors(double lambda, const Vector& x) const {
  const Vector l = problem_->losses(x);
  Vector m(l.size());
  for (Eigen::Index i = 0; i < l.size(); ++i) m(i) = region_margin(regions_[static_cast<std::size_t>(i)], l(i), lambda);
  return m;
}

std::vector<Violator> LogitPlugin::repartition(double lambda, const std::vector<int>& ids) {
  const Vector l = problem_->losses(theta_);
  std::vector<Violator> out;
  for (int id : ids) {
    auto& r = regions_[static_cast<std::size_t>(id)];
    const Region to = region_after(r, l(id), lambda);
    out.push_back({id, false, static_cast<SetLabel>(r), static_cast<SetLabel>(to)});
    r = to;
  }
  return out;
}

std::vector<SetLabel> LogitPlugin::partition() const {
  std::vector<SetLabel> out;
  for (Region r : regions_) out.push_back(static_cast<SetLabel>(r));
  return out;
}

}  // namespace agepath
