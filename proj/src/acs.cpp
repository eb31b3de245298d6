#include "agepath/acs.hpp"

#include "agepath/log.hpp"
#include "agepath/models/plugin.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace agepath {

void AcsConfig::validate() const {
  if (!(inner_tol > 0.0) || !(outer_tol > 0.0)) throw std::invalid_argument("acs tolerances must be positive");
  if (max_outer < 1 || max_inner < 1) throw std::invalid_argument("acs iteration caps must be >= 1");
}

namespace {

double soft(double z, double t) { return z > t ? z - t : (z < -t ? z + t : 0.0); }

// Weighted dual SVM: min 1/2 a'Qa - 1'a, y'a = 0, 0 <= a_i <= C v_i.
FitResult fit_svm(const Problem& pb, const Vector& v, const AcsConfig& cfg, const std::optional<Vector>& warm) {
  const Eigen::Index n = pb.n();
  const Vector& y = pb.data().y();
  const Matrix& K = pb.K();
  const Matrix& Q = pb.Q();
  const Vector U = pb.hyper().C * v;

  FitResult out;
  Vector a = Vector::Zero(n);
  if (warm) {
    a = warm->head(n).cwiseMax(0.0).cwiseMin(U);
    // restore y'a = 0 by shrinking the heavier side
    double excess = y.dot(a);
    for (Eigen::Index i = 0; i < n && std::abs(excess) > 0.0; ++i) {
      if ((excess > 0) != (y(i) > 0)) continue;
      const double take = std::min(a(i), std::abs(excess));
      a(i) -= take;
      excess -= y(i) * take;
    }
  }

  std::vector<Eigen::Index> S;
  for (Eigen::Index i = 0; i < n; ++i)
    if (U(i) > 0.0) S.push_back(i);

  Vector G = Q * a - Vector::Ones(n);
  constexpr double tau = 1e-12;
  double gap = 0.0;
  long it = 0;
  for (; it < cfg.max_inner; ++it) {
    double gmax = -std::numeric_limits<double>::infinity();
    Eigen::Index i = -1;
    for (auto t : S) {
      const bool up = y(t) > 0 ? a(t) < U(t) : a(t) > 0.0;
      if (up && -y(t) * G(t) >= gmax) {
        gmax = -y(t) * G(t);
        i = t;
      }
    }
    double gmax2 = -std::numeric_limits<double>::infinity();
    Eigen::Index j = -1;
    double best = std::numeric_limits<double>::infinity();
    for (auto t : S) {
      const bool low = y(t) > 0 ? a(t) > 0.0 : a(t) < U(t);
      if (!low) continue;
      gmax2 = std::max(gmax2, y(t) * G(t));
      const double diff = gmax + y(t) * G(t);
      if (i >= 0 && diff > 0.0) {
        double quad = K(i, i) + K(t, t) - 2.0 * K(i, t);
        if (quad <= 0.0) quad = tau;
        const double obj = -diff * diff / quad;
        if (obj <= best) {
          best = obj;
          j = t;
        }
      }
    }
    gap = (i < 0 || !std::isfinite(gmax2)) ? 0.0 : gmax + gmax2;
    if (i < 0 || j < 0 || gap < cfg.inner_tol) break;

    const double ai = a(i), aj = a(j);
    const double Ci = U(i), Cj = U(j);
    if (y(i) != y(j)) {
      double quad = K(i, i) + K(j, j) - 2.0 * K(i, j);
      if (quad <= 0.0) quad = tau;
      const double delta = (-G(i) - G(j)) / quad;
      const double diff = a(i) - a(j);
      a(i) += delta;
      a(j) += delta;
      if (diff > 0) {
        if (a(j) < 0) { a(j) = 0; a(i) = diff; }
      } else {
        if (a(i) < 0) { a(i) = 0; a(j) = -diff; }
      }
      if (diff > Ci - Cj) {
        if (a(i) > Ci) { a(i) = Ci; a(j) = Ci - diff; }
      } else {
        if (a(j) > Cj) { a(j) = Cj; a(i) = Cj + diff; }
      }
    } else {
      double quad = K(i, i) + K(j, j) - 2.0 * K(i, j);
      if (quad <= 0.0) quad = tau;
      const double delta = (G(i) - G(j)) / quad;
      const double sum = a(i) + a(j);
      a(i) -= delta;
      a(j) += delta;
      if (sum > Ci) {
        if (a(i) > Ci) { a(i) = Ci; a(j) = sum - Ci; }
      } else {
        if (a(j) < 0) { a(j) = 0; a(i) = sum; }
      }
      if (sum > Cj) {
        if (a(j) > Cj) { a(j) = Cj; a(i) = sum - Cj; }
      } else {
        if (a(i) < 0) { a(i) = 0; a(j) = sum; }
      }
    }
    const double di = a(i) - ai, dj = a(j) - aj;
    G += Q.col(i) * di + Q.col(j) * dj;
  }
  out.iterations = it;
  out.residual = gap;
  out.converged = gap < cfg.inner_tol;

  // intercept from the KKT conditions
  G = Q * a - Vector::Ones(n);
  double lb = -std::numeric_limits<double>::infinity(), ub = std::numeric_limits<double>::infinity();
  double sum_free = 0.0;
  int nfree = 0;
  for (auto t : S) {
    const double yG = y(t) * G(t);
    const bool at_upper = a(t) >= U(t), at_lower = a(t) <= 0.0;
    if (at_upper) {
      if (y(t) > 0) lb = std::max(lb, yG); else ub = std::min(ub, yG);
    } else if (at_lower) {
      if (y(t) > 0) ub = std::min(ub, yG); else lb = std::max(lb, yG);
    } else {
      sum_free += yG;
      ++nfree;
    }
  }
  double rho;
  if (nfree > 0) rho = sum_free / nfree;
  else if (std::isfinite(lb) && std::isfinite(ub)) rho = 0.5 * (lb + ub);
  else if (std::isfinite(lb)) rho = lb;
  else if (std::isfinite(ub)) rho = ub;
  else rho = y.sum() >= 0 ? -1.0 : 1.0;  // no data term: majority label

  out.params.resize(n + 1);
  out.params << a, -rho;
  return out;
}

FitResult fit_lasso(const Problem& pb, const Vector& v, const AcsConfig& cfg, const std::optional<Vector>& warm) {
  const Eigen::MatrixXd X = pb.data().X();  // column access
  const Vector& y = pb.data().y();
  const double n = static_cast<double>(pb.n());
  const double alpha = pb.hyper().alpha;
  const Eigen::Index d = pb.d();

  Vector w = warm ? Vector(*warm) : Vector::Zero(d);
  Vector r = y - X * w;
  Vector a(d);
  for (Eigen::Index j = 0; j < d; ++j) a(j) = X.col(j).cwiseAbs2().dot(v) / n;

  FitResult out;
  long sweep = 0;
  double viol = 0.0;
  for (; sweep < cfg.max_inner; ++sweep) {
    for (Eigen::Index j = 0; j < d; ++j) {
      double wj = 0.0;
      if (a(j) > 0.0) {
        const double rho = X.col(j).cwiseProduct(v).dot(r) / n + a(j) * w(j);
        wj = soft(rho, alpha) / a(j);
      }
      if (wj != w(j)) {
        r -= X.col(j) * (wj - w(j));
        w(j) = wj;
      }
    }
    r = y - X * w;  // limit drift
    const Vector grad = -(X.transpose() * v.cwiseProduct(r)) / n;
    viol = 0.0;
    for (Eigen::Index j = 0; j < d; ++j)
      viol = std::max(viol, w(j) != 0.0 ? std::abs(grad(j) + alpha * (w(j) > 0 ? 1.0 : -1.0))
                                        : std::max(0.0, std::abs(grad(j)) - alpha));
    if (viol <= cfg.inner_tol) break;
  }
  out.params = w;
  out.iterations = sweep + 1;
  out.residual = viol;
  out.converged = viol <= cfg.inner_tol;
  return out;
}

FitResult fit_logistic(const Problem& pb, const Vector& v, const AcsConfig& cfg, const std::optional<Vector>& warm) {
  const Eigen::Index d = pb.d(), n = pb.n();
  const double C = pb.hyper().C;
  const Vector& y = pb.data().y();
  Matrix Z(n, d + 1);
  Z.leftCols(d) = pb.data().X();
  Z.col(d).setOnes();

  FitResult out;
  Vector th = warm ? Vector(*warm) : Vector::Zero(d + 1);
  if (v.maxCoeff() <= 0.0) {
    out.params = Vector::Zero(d + 1);
    return out;
  }
  auto objective = [&](const Vector& t) {
    const Vector f = Z * t;
    double o = 0.5 * t.head(d).squaredNorm();
    for (Eigen::Index i = 0; i < n; ++i)
      if (v(i) > 0.0) o += v(i) * C * log1pexp_neg(y(i) * f(i));
    return o;
  };
  auto gradient = [&](const Vector& t, Vector* curv) {
    const Vector f = Z * t;
    Vector coef(n);
    if (curv) curv->resize(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      const double m = y(i) * f(i);
      coef(i) = -v(i) * C * sigmoid(-m) * y(i);
      if (curv) (*curv)(i) = v(i) * C * sigmoid(m) * sigmoid(-m);
    }
    Vector g = Z.transpose() * coef;
    g.head(d) += t.head(d);
    return g;
  };

  long it = 0;
  Vector curv;
  Vector g = gradient(th, &curv);
  double gn = g.lpNorm<Eigen::Infinity>();
  for (; it < cfg.max_inner && gn > cfg.inner_tol; ++it) {
    Matrix H = Z.transpose() * curv.asDiagonal() * Z;
    H.topLeftCorner(d, d).diagonal().array() += 1.0;
    Eigen::LDLT<Eigen::MatrixXd> ldlt(H);
    Vector step;
    if (ldlt.info() == Eigen::Success && ldlt.isPositive() && ldlt.vectorD().minCoeff() > 1e-14)
      step = -ldlt.solve(g);
    else
      step = -pinv_solve(H, g);
    const double f0 = objective(th);
    const double slope = g.dot(step);
    double t = 1.0;
    Vector cand, gc, cc;
    while (true) {
      cand = th + t * step;
      gc = gradient(cand, &cc);
      const double f1 = objective(cand);
      if (f1 <= f0 + 1e-4 * t * slope || gc.lpNorm<Eigen::Infinity>() < gn) break;
      t *= 0.5;
      if (t < 1e-12) break;
    }
    if (t < 1e-12) break;
    th = cand;
    g = gc;
    curv = cc;
    gn = g.lpNorm<Eigen::Infinity>();
  }
  out.params = th;
  out.iterations = it;
  out.residual = gn;
  out.converged = gn <= cfg.inner_tol;
  return out;
}

// Derivative of the implicit loss by central differences.
double implicit_slope(const SpRegularizer& reg, double loss, double lambda) {
  const double h = 1e-7 * (loss + thresholds(reg, lambda).upper);
  if (loss < h) return (implicit_loss(reg, loss + h, lambda) - implicit_loss(reg, loss, lambda)) / h;
  return (implicit_loss(reg, loss + h, lambda) - implicit_loss(reg, loss - h, lambda)) / (2.0 * h);
}

}  // namespace

FitResult weighted_fit(const Problem& pb, const Vector& v, const AcsConfig& cfg, const std::optional<Vector>& warm) {
  cfg.validate();
  if (v.size() != pb.n()) throw std::invalid_argument("weighted_fit: weight vector has wrong length");
  if (v.minCoeff() < 0.0 || v.maxCoeff() > 1.0) throw std::invalid_argument("weighted_fit: weights must lie in [0,1]");
  if (warm && warm->size() != pb.param_dim()) throw std::invalid_argument("weighted_fit: warm start has wrong length");
  FitResult r;
  switch (pb.kind()) {
    case ModelKind::svm: r = fit_svm(pb, v, cfg, warm); break;
    case ModelKind::lasso: r = fit_lasso(pb, v, cfg, warm); break;
    case ModelKind::logistic: r = fit_logistic(pb, v, cfg, warm); break;
  }
  if (!r.converged)
    log::warn("weighted_fit({}): stopped after {} iterations with residual {:.3e}", to_string(pb.kind()),
              r.iterations, r.residual);
  return r;
}

PartialOptimum acs_solve(const Problem& pb, double lambda, const SpRegularizer& reg, const AcsConfig& cfg,
                         const std::optional<Vector>& init, AcsTrace* trace) {
  cfg.validate();
  reg.validate();
  if (!(lambda > 0.0)) throw std::invalid_argument("acs_solve: lambda must be positive");
  Vector w = init ? *init : pb.zero_params();
  if (w.size() != pb.param_dim() || !w.allFinite()) throw std::invalid_argument("acs_solve: bad initial parameters");

  PartialOptimum out;
  out.lambda = lambda;
  double change = std::numeric_limits<double>::infinity();
  int k = 0;
  for (; k < cfg.max_outer; ++k) {
    const Vector v = pb.weights(w, reg, lambda);
    if (trace) trace->objective.push_back(pb.spl_objective(w, v, reg, lambda));
    FitResult fit = weighted_fit(pb, v, cfg, w);
    out.inner_iters += fit.iterations;
    if (trace) trace->objective.push_back(pb.spl_objective(fit.params, v, reg, lambda));
    change = (fit.params - w).lpNorm<Eigen::Infinity>();
    w = std::move(fit.params);
    if (change <= cfg.outer_tol) break;
  }
  if (change > cfg.outer_tol)
    throw ConvergenceError("acs_solve: no fixed point after " + std::to_string(cfg.max_outer) +
                               " outer iterations at lambda=" + std::to_string(lambda),
                           w, change);
  out.params = w;
  out.weights = pb.weights(w, reg, lambda);
  out.outer_iters = k + 1;
  return out;
}

std::vector<PartialOptimum> acs_grid_path(const Problem& pb, const std::vector<double>& grid,
                                          const SpRegularizer& reg, const AcsConfig& cfg, bool warm_start,
                                          const std::optional<Vector>& init) {
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!(grid[i] > 0.0)) throw std::invalid_argument("acs grid must be positive");
    if (i > 0 && !(grid[i] > grid[i - 1])) throw std::invalid_argument("acs grid must be strictly increasing");
  }
  std::vector<PartialOptimum> out;
  out.reserve(grid.size());
  std::optional<Vector> prev = init;
  for (double lam : grid) {
    try {
      out.push_back(acs_solve(pb, lam, reg, cfg, warm_start || out.empty() ? prev : init));
    } catch (const ConvergenceError& e) {
      throw ConvergenceError(std::string(e.what()) + " (grid point lambda=" + std::to_string(lam) + ")",
                             e.last_iterate(), e.residual());
    }
    prev = out.back().params;
  }
  return out;
}

double implicit_stationarity(const Problem& pb, const Vector& params, double lambda, const SpRegularizer& reg) {
  if (!params.allFinite()) throw std::invalid_argument("implicit_stationarity: params must be finite");
  const Vector l = pb.losses(params);
  const Vector& y = pb.data().y();
  const Eigen::Index n = pb.n(), d = pb.d();
  switch (pb.kind()) {
    case ModelKind::lasso: {
      const Vector r = pb.data().X() * params - y;
      Vector s(n);
      for (Eigen::Index i = 0; i < n; ++i) s(i) = implicit_slope(reg, l(i), lambda) * r(i);
      const Vector grad = pb.data().X().transpose() * s / static_cast<double>(n);
      const double alpha = pb.hyper().alpha;
      double res = 0.0;
      for (Eigen::Index j = 0; j < d; ++j)
        res = std::max(res, params(j) != 0.0 ? std::abs(grad(j) + alpha * (params(j) > 0 ? 1.0 : -1.0))
                                             : std::max(0.0, std::abs(grad(j)) - alpha));
      return res;
    }
    case ModelKind::logistic: {
      const double C = pb.hyper().C;
      const Vector f = pb.decision(params);
      Vector coef(n);
      for (Eigen::Index i = 0; i < n; ++i)
        coef(i) = -implicit_slope(reg, l(i), lambda) * C * sigmoid(-y(i) * f(i)) * y(i);
      Vector grad(d + 1);
      grad.head(d) = params.head(d) + pb.data().X().transpose() * coef;
      grad(d) = coef.sum();
      return grad.lpNorm<Eigen::Infinity>();
    }
    case ModelKind::svm: {
      const double C = pb.hyper().C;
      const Vector g = pb.margins(params);
      const Vector a = params.head(n);
      // hinge subgradient coefficients c_i; on the kink pick the one closest to alpha_i
      Vector c(n);
      for (Eigen::Index i = 0; i < n; ++i) {
        if (g(i) > kGTol) c(i) = C * implicit_slope(reg, l(i), lambda);
        else if (g(i) < -kGTol) c(i) = 0.0;
        else c(i) = std::clamp(a(i), 0.0, C * implicit_slope(reg, 0.0, lambda));
      }
      const Vector delta = a - c;
      const double fnorm = std::sqrt(std::max(0.0, delta.dot(pb.Q() * delta)));
      return std::max(fnorm, std::abs(c.dot(y)));
    }
  }
  return 0.0;
}

std::vector<double> make_grid(double lo, double hi, double step) {
  if (!(step > 0.0) || !(lo < hi)) throw std::invalid_argument("make_grid: need lo < hi and step > 0");
  std::vector<double> g;
  for (long k = 0;; ++k) {
    const double x = lo + static_cast<double>(k) * step;
    if (x > hi - 1e-9 * step) break;
    g.push_back(x);
  }
  g.push_back(hi);
  return g;
}

}  // namespace agepath
