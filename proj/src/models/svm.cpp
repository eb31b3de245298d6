#include "agepath/models/svm.hpp"

#include <algorithm>
#include <cmath>

namespace agepath {

double svm_kkt_residual(const Problem& pb, const SpRegularizer& reg, const Vector& params, double lambda) {
  const Eigen::Index n = pb.n();
  const double C = pb.hyper().C;
  const Vector alpha = params.head(n);
  const Vector g = pb.margins(params);
  const Vector& y = pb.data().y();
  // natural residual of the box-constrained dual with b as the multiplier
  double res = std::abs(y.dot(alpha));
  for (Eigen::Index i = 0; i < n; ++i) {
    const double ub = C * weight(reg, C * std::max(0.0, g(i)), lambda);
    res = std::max(res, std::abs(alpha(i) - std::clamp(alpha(i) + g(i), 0.0, ub)));
  }
  return res;
}

std::vector<SetLabel> svm_partition(const Vector& g, const Vector& losses, double lambda,
                                    const SpRegularizer& reg, double g_tol) {
  std::vector<SetLabel> out(static_cast<std::size_t>(g.size()));
  for (Eigen::Index i = 0; i < g.size(); ++i) {
    const Region r = region(reg, losses(i), lambda);
    SetLabel s = r == Region::M ? SetLabel::M : SetLabel::D;
    if (r == Region::E) s = std::abs(g(i)) <= g_tol ? SetLabel::EZ : (g(i) < 0 ? SetLabel::EN : SetLabel::EP);
    out[static_cast<std::size_t>(i)] = s;
  }
  return out;
}

SvmPlugin::SvmPlugin(std::shared_ptr<const Problem> problem, SpRegularizer reg)
    : ModelPlugin(std::move(problem), reg) {
  if (problem_->kind() != ModelKind::svm) throw std::invalid_argument("SvmPlugin needs an svm problem");
  alpha_ = Vector::Zero(problem_->n());
  sets_.assign(static_cast<std::size_t>(problem_->n()), SetLabel::EN);
}

bool SvmPlugin::is_var(SetLabel s) const {
  if (s == SetLabel::EZ) return true;
  return reg_.family == SpFamily::mixture ? s == SetLabel::M : s == SetLabel::EP;
}

Region SvmPlugin::region_for(SetLabel s) const {
  if (s == SetLabel::M) return Region::M;
  if (s == SetLabel::D) return Region::D;
  return Region::E;
}

void SvmPlugin::rebuild_vars() {
  vars_.clear();
  for (std::size_t i = 0; i < sets_.size(); ++i)
    if (sets_[i] == SetLabel::EZ) vars_.push_back(static_cast<Eigen::Index>(i));
  for (std::size_t i = 0; i < sets_.size(); ++i)
    if (sets_[i] != SetLabel::EZ && is_var(sets_[i])) vars_.push_back(static_cast<Eigen::Index>(i));
}

void SvmPlugin::reset(const Vector& params, double lambda) {
  if (params.size() != problem_->n() + 1) throw std::invalid_argument("svm: params must have length n+1");
  alpha_ = params.head(problem_->n());
  b_ = params(problem_->n());
  sets_ = svm_partition(problem_->margins(params), problem_->losses(params), lambda, reg_);
  rebuild_vars();
}

Vector SvmPlugin::params() const {
  Vector p(problem_->n() + 1);
  p << alpha_, b_;
  return p;
}

Eigen::Index SvmPlugin::state_dim() const { return static_cast<Eigen::Index>(vars_.size()) + 1; }

Vector SvmPlugin::pack() const {
  Vector x(state_dim());
  for (std::size_t k = 0; k < vars_.size(); ++k) x(static_cast<Eigen::Index>(k)) = alpha_(vars_[k]);
  x(x.size() - 1) = b_;
  return x;
}

Vector SvmPlugin::alpha_from(const Vector& x, double* b) const {
  Vector a = alpha_;
  for (std::size_t k = 0; k < vars_.size(); ++k) a(vars_[k]) = x(static_cast<Eigen::Index>(k));
  *b = x(x.size() - 1);
  return a;
}

void SvmPlugin::unpack(const Vector& x) { alpha_ = alpha_from(x, &b_); }

Vector SvmPlugin::kkt_map(double lambda, const Vector& x) const {
  double b = 0.0;
  const Vector a = alpha_from(x, &b);
  const Vector& y = problem_->data().y();
  const double C = problem_->hyper().C;
  const Vector g = Vector::Ones(a.size()) - problem_->Q() * a - y * b;
  Vector F(x.size());
  F(0) = y.dot(a);
  for (std::size_t k = 0; k < vars_.size(); ++k) {
    const auto i = vars_[k];
    const auto row = static_cast<Eigen::Index>(k) + 1;
    if (sets_[static_cast<std::size_t>(i)] == SetLabel::EZ)
      F(row) = g(i);
    else
      F(row) = a(i) - C * weight_in(reg_, region_for(sets_[static_cast<std::size_t>(i)]), C * g(i), lambda);
  }
  return F;
}

ModelPlugin::Jacobians SvmPlugin::jacobian(double lambda, const Vector& x) const {
  double b = 0.0;
  const Vector a = alpha_from(x, &b);
  const Vector& y = problem_->data().y();
  const Matrix& Q = problem_->Q();
  const double C = problem_->hyper().C;
  const auto p = static_cast<Eigen::Index>(vars_.size());
  Jacobians J;
  J.Jx = Matrix::Zero(p + 1, p + 1);
  J.Jl = Vector::Zero(p + 1);
  for (Eigen::Index k = 0; k < p; ++k) J.Jx(0, k) = y(vars_[static_cast<std::size_t>(k)]);
  for (Eigen::Index r = 0; r < p; ++r) {
    const auto i = vars_[static_cast<std::size_t>(r)];
    const SetLabel s = sets_[static_cast<std::size_t>(i)];
    if (s == SetLabel::EZ) {
      for (Eigen::Index k = 0; k < p; ++k) J.Jx(r + 1, k) = -Q(i, vars_[static_cast<std::size_t>(k)]);
      J.Jx(r + 1, p) = -y(i);
      continue;
    }
    const double g = 1.0 - Q.row(i).dot(a) - y(i) * b;
    const WeightGrads gr = weight_grads_in(reg_, region_for(s), C * g, lambda);
    // alpha_i - C v(C g_i); dg_i/dalpha_j = -Q_ij, dg_i/db = -y_i
    for (Eigen::Index k = 0; k < p; ++k) J.Jx(r + 1, k) = C * C * gr.d_loss * Q(i, vars_[static_cast<std::size_t>(k)]);
    J.Jx(r + 1, r) += 1.0;
    J.Jx(r + 1, p) = C * C * gr.d_loss * y(i);
    J.Jl(r + 1) = -C * gr.d_lambda;
  }
  return J;
}

Vector SvmPlugin::monitors(double lambda, const Vector& x) const {
  double b = 0.0;
  const Vector a = alpha_from(x, &b);
  const double C = problem_->hyper().C;
  const Vector g = Vector::Ones(a.size()) - problem_->Q() * a - problem_->data().y() * b;
  const Thresholds t = thresholds(reg_, lambda);
  Vector m(a.size());
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    const double l = C * std::max(0.0, g(i));
    switch (sets_[static_cast<std::size_t>(i)]) {
      case SetLabel::EN: m(i) = -g(i); break;
      case SetLabel::EZ: m(i) = std::min(a(i), C - a(i)); break;
      case SetLabel::EP: m(i) = std::min(g(i), t.lower - l); break;
      case SetLabel::M: m(i) = std::min(l - t.lower, t.upper - l); break;
      case SetLabel::D: m(i) = l - t.upper; break;
      default: m(i) = 1.0;
    }
  }
  return m;
}

std::vector<Violator> SvmPlugin::repartition(double lambda, const std::vector<int>& ids) {
  const double C = problem_->hyper().C;
  const Vector g = problem_->margins(params());
  const Thresholds t = thresholds(reg_, lambda);
  const bool mix = reg_.family == SpFamily::mixture;
  std::vector<Violator> out;
  for (int id : ids) {
    auto& s = sets_[static_cast<std::size_t>(id)];
    const double l = C * std::max(0.0, g(id));
    SetLabel to = s;
    switch (s) {
      case SetLabel::EN:
        to = SetLabel::EZ;
        break;
      case SetLabel::EZ:
        // alpha reached a box end
        if (alpha_(id) <= 0.5 * C) {
          to = SetLabel::EN;
          alpha_(id) = 0.0;
        } else {
          to = SetLabel::EP;
          alpha_(id) = C;
        }
        break;
      case SetLabel::EP:
        if (g(id) <= t.lower - l) {
          to = SetLabel::EZ;
        } else if (mix) {
          to = SetLabel::M;
        } else {
          to = SetLabel::D;
          alpha_(id) = 0.0;
        }
        break;
      case SetLabel::M:
        if (l - t.lower <= t.upper - l) {
          to = SetLabel::EP;
          alpha_(id) = C;
        } else {
          to = SetLabel::D;
          alpha_(id) = 0.0;
        }
        break;
      case SetLabel::D:
        to = mix ? SetLabel::M : SetLabel::EP;
        break;
      default:
        break;
    }
    out.push_back({id, false, s, to});
    s = to;
  }
  rebuild_vars();
  return out;
}

}  // namespace agepath
