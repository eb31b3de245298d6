#include <doctest.h>

#include "agepath/acs.hpp"
#include "agepath/dataset.hpp"
#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <random>

using namespace agepath;

namespace {

Problem lasso_toy(Eigen::Index n = 20, Eigen::Index d = 3, std::uint64_t seed = 5, double alpha = 0.01) {
  Hyper h;
  h.alpha = alpha;
  return Problem(ModelKind::lasso, synthesize(n, d, Task::regression, seed).data, h);
}

Problem svm_toy(Eigen::Index n = 20, std::uint64_t seed = 5, KernelKind k = KernelKind::linear) {
  Hyper h;
  h.C = 1.0;
  h.kernel.kind = k;
  return Problem(ModelKind::svm, synthesize(n, 2, Task::classification, seed).data, h);
}

Problem logit_toy(Eigen::Index n = 20, std::uint64_t seed = 5) {
  Hyper h;
  h.C = 1.0;
  SynthOptions o;
  o.separation = 1.5;
  return Problem(ModelKind::logistic, synthesize(n, 2, Task::classification, seed, o).data, h);
}

// SVM dual KKT with box [0, C v]
double svm_dual_kkt(const Problem& pb, const Vector& p, const Vector& v) {
  const Vector g = pb.margins(p);
  const double C = pb.hyper().C;
  double worst = std::abs(p.head(pb.n()).dot(pb.data().y()));
  for (Eigen::Index i = 0; i < pb.n(); ++i) {
    const double a = p(i), ub = C * v(i);
    worst = std::max(worst, std::max(0.0, -a));
    worst = std::max(worst, std::max(0.0, a - ub));
    if (a > 1e-12 && a < ub - 1e-12) worst = std::max(worst, std::abs(g(i)));
    if (a <= 1e-12 && ub > 1e-12) worst = std::max(worst, std::max(0.0, g(i)));
    if (a >= ub - 1e-12 && ub > 1e-12) worst = std::max(worst, std::max(0.0, -g(i)));
  }
  return worst;
}

}  // namespace

TEST_CASE("weighted_fit: lasso") {
  const Problem pb = lasso_toy();
  const Matrix& X = pb.data().X();
  const Vector& y = pb.data().y();

  Hyper big = pb.hyper();
  big.alpha = (X.transpose() * y).lpNorm<Eigen::Infinity>() / pb.n() * 1.0001;
  const Problem killed(ModelKind::lasso, pb.data(), big);
  CHECK(weighted_fit(killed, Vector::Ones(pb.n())).params.norm() == 0.0);

  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  for (int t = 0; t < 3; ++t) {
    Vector v = Vector::Ones(pb.n());
    if (t > 0)
      for (auto& x : v) x = U(rng);
    const Vector w = weighted_fit(pb, v).params;
    const Vector ref = oracle::ista_lasso(X, y, v, pb.hyper().alpha);
    CHECK((w - ref).lpNorm<Eigen::Infinity>() <= 1e-6);
  }
}

TEST_CASE("weighted_fit: logistic") {
  const Problem pb = logit_toy();
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  for (int t = 0; t < 3; ++t) {
    Vector v = Vector::Ones(pb.n());
    if (t > 0)
      for (auto& x : v) x = U(rng);
    const Vector th = weighted_fit(pb, v).params;
    const Vector ref = oracle::gd_logistic(pb.data().X(), pb.data().y(), v, pb.hyper().C);
    CHECK((th - ref).lpNorm<Eigen::Infinity>() <= 1e-6);
  }
  CHECK(weighted_fit(pb, Vector::Zero(pb.n())).params.norm() == 0.0);
}

TEST_CASE("weighted_fit: svm") {
  // two separable points
  Matrix X(2, 1);
  X << 1, -1;
  Vector y(2);
  y << 1, -1;
  Hyper h;
  h.C = 10.0;
  h.kernel.kind = KernelKind::linear;
  const Problem two(ModelKind::svm, Dataset(X, y, Task::classification), h);
  const Vector p = weighted_fit(two, Vector::Ones(2)).params;
  CHECK(svm_dual_kkt(two, p, Vector::Ones(2)) <= 1e-8);
  // w = 1, b = 0, alpha = 1/2 each
  CHECK(p(0) == doctest::Approx(0.5).epsilon(1e-8));
  CHECK(p(1) == doctest::Approx(0.5).epsilon(1e-8));
  CHECK(std::abs(p(2)) <= 1e-8);

  for (auto k : {KernelKind::linear, KernelKind::gaussian}) {
    const Problem pb = svm_toy(25, 3, k);
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    Vector v(pb.n());
    for (auto& x : v) x = U(rng);
    v(0) = 0.0;
    const Vector q = weighted_fit(pb, v).params;
    CHECK(svm_dual_kkt(pb, q, v) <= 1e-8);
  }

  // all-zero weights: alpha = 0, b = majority sign
  const Problem pb = svm_toy(7, 4);
  const Vector z = weighted_fit(pb, Vector::Zero(7)).params;
  CHECK(z.head(7).norm() == 0.0);
  CHECK(z(7) == (pb.data().y().sum() >= 0 ? 1.0 : -1.0));
}

TEST_CASE("acs_solve: limits and fixed point") {
  const SpRegularizer lin = SpRegularizer::linear();
  const Problem pb = lasso_toy();

  // huge lambda: every weight saturates at one
  const PartialOptimum big = acs_solve(pb, 1e8, lin);
  CHECK(big.weights.minCoeff() >= 1.0 - 1e-6);
  CHECK((big.params - weighted_fit(pb, Vector::Ones(pb.n())).params).lpNorm<Eigen::Infinity>() <= 1e-6);
  const PartialOptimum hard = acs_solve(pb, 1e8, SpRegularizer::hard());
  CHECK((hard.weights.array() == 1.0).all());
  CHECK((hard.params - weighted_fit(pb, Vector::Ones(pb.n())).params).lpNorm<Eigen::Infinity>() <= 1e-8);

  // tiny lambda: data term vanishes
  const PartialOptimum tiny = acs_solve(pb, 1e-12, lin);
  CHECK(tiny.params.norm() <= 1e-8);

  const PartialOptimum po = acs_solve(pb, 1.0, lin);
  const Vector v2 = pb.weights(po.params, lin, 1.0);
  CHECK((v2 - po.weights).lpNorm<Eigen::Infinity>() <= 1e-10);
  // one more ACS iteration stays put
  const Vector w2 = weighted_fit(pb, v2, {}, po.params).params;
  CHECK((w2 - po.params).lpNorm<Eigen::Infinity>() <= AcsConfig{}.outer_tol);

  CHECK_THROWS_AS(acs_solve(pb, -1.0, lin), std::invalid_argument);
  AcsConfig tight;
  tight.max_outer = 1;
  tight.outer_tol = 1e-300;
  const Problem sv = svm_toy(30, 8);
  try {
    acs_solve(sv, 0.5, SpRegularizer::mixture(0.5), tight);
  } catch (const ConvergenceError& e) {
    CHECK(e.last_iterate().size() == sv.param_dim());
  }
}

TEST_CASE("acs_solve: monotone descent") {
  const std::vector<SpRegularizer> regs = {SpRegularizer::hard(), SpRegularizer::linear(),
                                           SpRegularizer::mixture(0.3)};
  const std::vector<Problem> pbs = {lasso_toy(30, 4, 9), svm_toy(30, 9, KernelKind::gaussian), logit_toy(30, 9)};
  for (const auto& pb : pbs)
    for (const auto& reg : regs)
      for (double lam : {0.05, 0.3, 1.0}) {
        AcsTrace tr;
        acs_solve(pb, lam, reg, {}, std::nullopt, &tr);
        REQUIRE(tr.objective.size() >= 2);
        for (std::size_t k = 1; k < tr.objective.size(); ++k)
          CHECK(tr.objective[k] <= tr.objective[k - 1] + 1e-12 * std::max(1.0, std::abs(tr.objective[k - 1])));
      }
}

TEST_CASE("acs_grid_path") {
  const Problem pb = lasso_toy(30, 3, 2);
  const SpRegularizer lin = SpRegularizer::linear();
  const auto one = acs_grid_path(pb, {0.4}, lin);
  REQUIRE(one.size() == 1);
  CHECK(one[0].params == acs_solve(pb, 0.4, lin).params);

  const auto grid = make_grid(0.1, 2.0, 0.05);
  CHECK(grid.front() == 0.1);
  CHECK(grid.back() == doctest::Approx(2.0));
  const auto warm = acs_grid_path(pb, grid, lin, {}, true);
  const auto cold = acs_grid_path(pb, grid, lin, {}, false);
  long wi = 0, ci = 0;
  for (std::size_t k = 0; k < grid.size(); ++k) {
    wi += warm[k].inner_iters;
    ci += cold[k].inner_iters;
  }
  CHECK(wi < ci);

  // noisy targets put the losses on either side of lambda
  const Problem noisy(ModelKind::lasso, inject_noise(pb.data(), {0.3, NoiseKind::target_perturb, 3}).data, pb.hyper());
  Vector l0 = noisy.losses(weighted_fit(noisy, Vector::Ones(noisy.n())).params);
  std::sort(l0.begin(), l0.end());
  const double lam0 = l0(noisy.n() / 2);
  const auto fine = acs_grid_path(noisy, make_grid(lam0, lam0 * 1.02, lam0 * 1e-4), lin);
  double worst = 0.0;
  for (std::size_t k = 1; k < fine.size(); ++k)
    worst = std::max(worst, (fine[k].params - fine[k - 1].params).lpNorm<Eigen::Infinity>() / (lam0 * 1e-4));
  MESSAGE("max consecutive slope " << worst);
  CHECK(fine.front().weights.minCoeff() < 1.0);
  CHECK(worst <= 1e3);

  CHECK_THROWS_AS(acs_grid_path(pb, {0.5, 0.4}, lin), std::invalid_argument);
}

TEST_CASE("implicit_stationarity") {
  const SpRegularizer lin = SpRegularizer::linear(), mix = SpRegularizer::mixture(0.5);
  for (const auto& pb : {lasso_toy(), logit_toy()}) {
    for (const auto& reg : {lin, mix}) {
      const PartialOptimum po = acs_solve(pb, 0.5, reg);
      CHECK(implicit_stationarity(pb, po.params, 0.5, reg) <= 1e-6);
      Vector q = po.params;
      q(0) += 0.1;
      CHECK(implicit_stationarity(pb, q, 0.5, reg) > 1e-3);
    }
  }
  const Problem sv = svm_toy();
  const PartialOptimum po = acs_solve(sv, 0.7, mix);
  CHECK(implicit_stationarity(sv, po.params, 0.7, mix) <= 1e-6);

  // saturated weights: plain gradient (inf-norm) of the unweighted logistic objective
  const Problem lg = logit_toy();
  Vector th(3);
  th << 0.2, -0.1, 0.05;
  Vector grad = Vector::Zero(3);
  grad.head(2) = th.head(2);
  for (Eigen::Index i = 0; i < lg.n(); ++i) {
    const double m = lg.data().y()(i) * (lg.data().X().row(i).dot(th.head(2)) + th(2));
    const double s = lg.hyper().C / (1.0 + std::exp(m)) * lg.data().y()(i);
    grad.head(2) -= s * lg.data().X().row(i).transpose();
    grad(2) -= s;
  }
  CHECK(implicit_stationarity(lg, th, 1e9, lin) == doctest::Approx(grad.lpNorm<Eigen::Infinity>()).epsilon(1e-6));
}
