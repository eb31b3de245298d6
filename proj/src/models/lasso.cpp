#include "agepath/models/lasso.hpp"

#include <cmath>

namespace agepath {

namespace {
constexpr double kZeroCoef = 1e-8;
}  // namespace

double lasso_kkt_residual(const Problem& pb, const SpRegularizer& reg, const Vector& w, double lambda) {
  const auto& X = pb.data().X();
  const double n = static_cast<double>(pb.n());
  const double alpha = pb.hyper().alpha;
  const Vector v = pb.weights(w, reg, lambda);
  const Vector r = X * w - pb.data().y();
  const Vector c = X.transpose() * v.cwiseProduct(r) / n;
  // a coefficient caught on its way through zero may carry a round-off sign
  const double ztol = kZeroCoef * std::max(1.0, w.lpNorm<Eigen::Infinity>());
  double res = 0.0;
  for (Eigen::Index j = 0; j < w.size(); ++j) {
    const double inactive = std::abs(c(j)) / alpha - 1.0;
    if (w(j) == 0.0) {
      res = std::max(res, inactive);
      continue;
    }
    const double active = std::abs(c(j) + alpha * (w(j) > 0 ? 1.0 : -1.0));
    res = std::max(res, std::abs(w(j)) <= ztol ? std::min(active, std::max(0.0, inactive)) : active);
  }
  return res;
}

LassoPlugin::LassoPlugin(std::shared_ptr<const Problem> problem, SpRegularizer reg)
    : ModelPlugin(std::move(problem), reg) {
  if (problem_->kind() != ModelKind::lasso) throw std::invalid_argument("LassoPlugin needs a lasso problem");
  w_ = Vector::Zero(problem_->d());
  sgn_ = Vector::Zero(problem_->d());
  is_active_.assign(static_cast<std::size_t>(problem_->d()), false);
  regions_.assign(static_cast<std::size_t>(problem_->n()), Region::E);
}

void LassoPlugin::rebuild_active() {
  active_idx_.clear();
  for (Eigen::Index j = 0; j < w_.size(); ++j)
    if (is_active_[static_cast<std::size_t>(j)]) active_idx_.push_back(j);
}

void LassoPlugin::reset(const Vector& params, double lambda) {
  if (params.size() != problem_->d()) throw std::invalid_argument("lasso: params must have length d");
  w_ = params;
  for (Eigen::Index j = 0; j < w_.size(); ++j) {
    is_active_[static_cast<std::size_t>(j)] = w_(j) != 0.0;
    sgn_(j) = w_(j) > 0 ? 1.0 : (w_(j) < 0 ? -1.0 : 0.0);
  }
  rebuild_active();
  const Vector l = problem_->losses(w_);
  for (Eigen::Index i = 0; i < l.size(); ++i) regions_[static_cast<std::size_t>(i)] = region_of(l(i), lambda);
}

Vector LassoPlugin::pack() const {
  Vector x(static_cast<Eigen::Index>(active_idx_.size()));
  for (std::size_t k = 0; k < active_idx_.size(); ++k) x(static_cast<Eigen::Index>(k)) = w_(active_idx_[k]);
  return x;
}

Vector LassoPlugin::expand(const Vector& x) const {
  Vector w = Vector::Zero(w_.size());
  for (std::size_t k = 0; k < active_idx_.size(); ++k) w(active_idx_[k]) = x(static_cast<Eigen::Index>(k));
  return w;
}

void LassoPlugin::unpack(const Vector& x) { w_ = expand(x); }

// (1/n) X^T V r with the region-local weights of the held partition.
Vector LassoPlugin::smooth_grad(double lambda, const Vector& w) const {
  const auto& X = problem_->data().X();
  const double n = static_cast<double>(problem_->n());
  const Vector r = X * w - problem_->data().y();
  Vector vr(r.size());
  for (Eigen::Index i = 0; i < r.size(); ++i) {
    const double l = r(i) * r(i) / (2.0 * n);
    vr(i) = weight_in(reg_, regions_[static_cast<std::size_t>(i)], l, lambda) * r(i);
  }
  return X.transpose() * vr / n;
}

Vector LassoPlugin::kkt_map(double lambda, const Vector& x) const {
  const Vector c = smooth_grad(lambda, expand(x));
  Vector F(x.size());
  for (std::size_t k = 0; k < active_idx_.size(); ++k) {
    const auto j = active_idx_[k];
    F(static_cast<Eigen::Index>(k)) = c(j) + problem_->hyper().alpha * sgn_(j);
  }
  return F;
}

ModelPlugin::Jacobians LassoPlugin::jacobian(double lambda, const Vector& x) const {
  const auto& X = problem_->data().X();
  const double n = static_cast<double>(problem_->n());
  const Eigen::Index p = x.size();
  Matrix XA(problem_->n(), p);
  for (Eigen::Index k = 0; k < p; ++k) XA.col(k) = X.col(active_idx_[static_cast<std::size_t>(k)]);
  const Vector r = XA * x - problem_->data().y();
  Vector curv(r.size()), dlam(r.size());
  for (Eigen::Index i = 0; i < r.size(); ++i) {
    const Region reg_i = regions_[static_cast<std::size_t>(i)];
    const double l = r(i) * r(i) / (2.0 * n);
    const WeightGrads gr = weight_grads_in(reg_, reg_i, l, lambda);
    // d/dw [v(l) r x] = (v + 2 l dv/dl) x x^T, since dl/dw = r x / n
    curv(i) = weight_in(reg_, reg_i, l, lambda) + 2.0 * l * gr.d_loss;
    dlam(i) = gr.d_lambda * r(i);
  }
  Jacobians J;
  J.Jx = XA.transpose() * curv.asDiagonal() * XA / n;
  J.Jl = XA.transpose() * dlam / n;
  return J;
}

Vector LassoPlugin::monitors(double lambda, const Vector& x) const {
  const Vector w = expand(x);
  const auto& X = problem_->data().X();
  const double n = static_cast<double>(problem_->n());
  const Vector r = X * w - problem_->data().y();
  Vector m(problem_->n() + problem_->d());
  for (Eigen::Index i = 0; i < r.size(); ++i)
    m(i) = region_margin(regions_[static_cast<std::size_t>(i)], r(i) * r(i) / (2.0 * n), lambda);
  const Vector c = smooth_grad(lambda, w);
  const double alpha = problem_->hyper().alpha;
  for (Eigen::Index j = 0; j < w.size(); ++j)
    m(problem_->n() + j) = is_active_[static_cast<std::size_t>(j)] ? sgn_(j) * w(j) : 1.0 - std::abs(c(j)) / alpha;
  return m;
}

std::vector<Violator> LassoPlugin::repartition(double lambda, const std::vector<int>& ids) {
  std::vector<Violator> out;
  const Vector l = problem_->losses(w_);
  const Vector c = smooth_grad(lambda, w_);
  for (int id : ids) {
    if (id < problem_->n()) {
      auto& r = regions_[static_cast<std::size_t>(id)];
      const Region to = region_after(r, l(id), lambda);
      out.push_back({id, false, static_cast<SetLabel>(r), static_cast<SetLabel>(to)});
      r = to;
    } else {
      const Eigen::Index j = id - problem_->n();
      auto&& act = is_active_[static_cast<std::size_t>(j)];
      if (act) {
        w_(j) = 0.0;
        sgn_(j) = 0.0;
        act = false;
        out.push_back({j, true, SetLabel::active, SetLabel::inactive});
      } else {
        sgn_(j) = c(j) > 0 ? -1.0 : 1.0;
        act = true;
        out.push_back({j, true, SetLabel::inactive, SetLabel::active});
      }
    }
  }
  rebuild_active();
  return out;
}

std::vector<SetLabel> LassoPlugin::partition() const {
  std::vector<SetLabel> out;
  for (Region r : regions_) out.push_back(static_cast<SetLabel>(r));
  for (bool a : is_active_) out.push_back(a ? SetLabel::active : SetLabel::inactive);
  return out;
}

}  // namespace agepath
