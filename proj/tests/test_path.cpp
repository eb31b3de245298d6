#include <doctest.h>

#include "agepath/acs.hpp"
#include "agepath/path.hpp"
#include "checks.hpp"

#include <cmath>

using namespace agepath;

namespace {

struct Traced {
  std::shared_ptr<const Problem> pb;
  SpRegularizer reg;
  double lo = 0.0, hi = 0.0;
  AgePath path;
};

std::shared_ptr<const Problem> noisy_problem(ModelKind kind, std::uint64_t seed, Eigen::Index n = 50) {
  const Task task = task_for(kind);
  SynthOptions o;
  o.w0_scale = 4.0;
  o.separation = 2.5;
  Dataset ds = synthesize(n, 3, task, seed, o).data;
  ds = inject_noise(ds, {0.3, task == Task::regression ? NoiseKind::target_perturb : NoiseKind::label_flip, seed}).data;
  Hyper h;
  h.alpha = 0.02;
  h.kernel.gamma = 0.5;
  return std::make_shared<const Problem>(kind, std::move(ds), h);
}

// Ranges where the partition actually moves; see checks.hpp for the SVM floor.
std::pair<double, double> busy_range(const Problem& pb) {
  switch (pb.kind()) {
    case ModelKind::svm: return {1.5, 4.0};
    case ModelKind::logistic: return {1.0, 3.0};
    case ModelKind::lasso: return {check::lambda_at_quantile(pb, 0.3), check::lambda_at_quantile(pb, 0.95)};
  }
  return {1.0, 2.0};
}

Traced trace_busy(ModelKind kind, SpRegularizer reg, std::uint64_t seed, std::vector<double> record_at = {}) {
  Traced t;
  t.pb = noisy_problem(kind, seed);
  t.reg = reg;
  std::tie(t.lo, t.hi) = busy_range(*t.pb);
  TraceConfig cfg;
  cfg.record_at = std::move(record_at);
  const PartialOptimum init = acs_solve(*t.pb, t.lo, reg, {}, check::full_fit(*t.pb));
  t.path = trace_path(t.pb, reg, t.lo, t.hi, cfg, init);
  return t;
}

std::vector<double> uniform(double lo, double hi, int k) {
  std::vector<double> out;
  for (int i = 1; i <= k; ++i) out.push_back(lo + (hi - lo) * i / (k + 1));
  return out;
}

}  // namespace

TEST_CASE("no boundary inside the range gives a single smooth segment") {
  const auto pb = noisy_problem(ModelKind::lasso, 3);
  const SpRegularizer reg = SpRegularizer::linear();
  const double top = pb->losses(check::full_fit(*pb)).maxCoeff();
  const double lo = 10.0 * top, hi = 20.0 * top;
  const AgePath path = trace_path(pb, reg, lo, hi);
  CHECK(path.events.empty());
  REQUIRE(path.points.size() >= 2);
  CHECK(path.points.front().lambda == lo);
  CHECK(path.points.back().lambda == hi);
  for (const auto& p : path.points) CHECK(p.segment == 0);
}

TEST_CASE("lasso path matches a dense ACS grid between jumps") {
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    const auto pb = noisy_problem(ModelKind::lasso, seed);
    const auto [lo, hi] = busy_range(*pb);
    const std::vector<double> grid = make_grid(lo, hi, (hi - lo) / 400);
    TraceConfig cfg;
    cfg.record_at = grid;
    const SpRegularizer reg = SpRegularizer::linear();
    const AgePath path = trace_path(pb, reg, lo, hi, cfg, acs_solve(*pb, lo, reg, {}, check::full_fit(*pb)));
    const auto dense = acs_grid_path(*pb, grid, reg, {}, true, check::full_fit(*pb));
    INFO("seed " << seed);
    CHECK(path.turning_count() > 0);
    double worst = 0.0;
    for (std::size_t k = 0; k < grid.size(); ++k) {
      bool near_jump = false;
      for (const auto& e : path.events)
        near_jump |= e.kind == EventKind::jump && std::abs(e.lambda - grid[k]) <= 1e-2 * (hi - lo);
      if (near_jump) continue;
      worst = std::max(worst, (evaluate_path(path, grid[k]) - dense[k].params).lpNorm<Eigen::Infinity>());
    }
    CHECK(worst <= 1e-3);
  }
}

TEST_CASE("jump events sit where dense ACS is discontinuous") {
  int seen = 0;
  for (std::uint64_t seed = 1; seed <= 6 && seen < 2; ++seed) {
    const Traced t = trace_busy(ModelKind::lasso, SpRegularizer::linear(), seed);
    for (const auto& e : t.path.events) {
      if (e.kind != EventKind::jump) continue;
      const double eps = 1e-4 * (t.hi - t.lo);
      if (e.lambda - 3 * eps < t.lo || e.lambda + eps > t.hi) continue;
      // continue the pre-jump branch across the event and compare with a smooth step
      const Vector before = evaluate_path(t.path, e.lambda - 3 * eps);
      const auto run = acs_grid_path(*t.pb, {e.lambda - 3 * eps, e.lambda - eps, e.lambda + eps}, t.reg,
                                     check::fd_oracle_config(), true, before);
      const double smooth = (run[1].params - run[0].params).lpNorm<Eigen::Infinity>();
      const double across = (run[2].params - run[1].params).lpNorm<Eigen::Infinity>();
      INFO("seed " << seed << " jump at " << e.lambda << " smooth " << smooth << " across " << across);
      CHECK(across > 10.0 * smooth + 1e-6);
      ++seen;
    }
  }
  CHECK(seen > 0);
}

TEST_CASE("KKT residual at sampled lambdas along every traced path") {
  for (auto kind : {ModelKind::svm, ModelKind::lasso, ModelKind::logistic})
    for (auto reg : {SpRegularizer::linear(), SpRegularizer::mixture(0.5)}) {
      const auto pb = noisy_problem(kind, 2);
      const auto [lo, hi] = busy_range(*pb);
      const std::vector<double> sample = uniform(lo, hi, 100);
      const Traced t = trace_busy(kind, reg, 2, sample);
      INFO(to_string(kind) << " " << to_string(reg.family));
      double worst = 0.0;
      for (double lam : sample) worst = std::max(worst, kkt_residual(*t.pb, reg, evaluate_path(t.path, lam), lam));
      CHECK(worst <= 1e-6);
    }
}

TEST_CASE("path invariants") {
  for (auto kind : {ModelKind::svm, ModelKind::lasso, ModelKind::logistic})
    for (auto reg : {SpRegularizer::linear(), SpRegularizer::mixture(0.5)}) {
      const Traced t = trace_busy(kind, reg, 4);
      const Problem& pb = *t.pb;
      INFO(to_string(kind) << " " << to_string(reg.family));
      CHECK(t.path.restart_count() == t.path.jump_count());
      for (const auto& e : t.path.events) {
        CHECK(e.restarted == (e.kind == EventKind::jump));
        CHECK(!e.violators.empty());
      }
      const auto cover = static_cast<std::size_t>(pb.n() + (kind == ModelKind::lasso ? pb.d() : 0));
      double prev = -1.0, worst_v = 0.0, worst_sum = 0.0, worst_sub = 0.0;
      for (const auto& p : t.path.points) {
        CHECK(p.lambda > prev);
        prev = p.lambda;
        CHECK(p.partition.size() == cover);
        worst_v = std::max(worst_v, (p.weights - pb.weights(p.params, reg, p.lambda)).lpNorm<Eigen::Infinity>());
        if (kind == ModelKind::svm) worst_sum = std::max(worst_sum, std::abs(pb.data().y().dot(p.params.head(pb.n()))));
        if (kind == ModelKind::lasso) {
          const Vector r = pb.data().X() * p.params - pb.data().y();
          const Vector grad = pb.data().X().transpose() * p.weights.cwiseProduct(r) / static_cast<double>(pb.n());
          for (Eigen::Index j = 0; j < pb.d(); ++j)
            if (p.params(j) == 0.0) worst_sub = std::max(worst_sub, std::abs(grad(j)) / pb.hyper().alpha);
        }
      }
      CHECK(worst_v <= 1e-8);
      CHECK(worst_sum <= 1e-7);
      CHECK(worst_sub <= 1.0 + 1e-6);
    }
}

TEST_CASE("classify_event") {
  const auto pb = noisy_problem(ModelKind::lasso, 1);
  const SpRegularizer reg = SpRegularizer::linear();
  const double lam = check::lambda_at_quantile(*pb, 0.6);
  const PartialOptimum po = acs_solve(*pb, lam, reg, {}, check::full_fit(*pb));
  auto plug = make_plugin(pb, reg);
  plug->reset(po.params, lam);
  CHECK(classify_event(*plug, lam) == EventKind::turning);
  plug->unpack(plug->pack().array() + 1.0);
  CHECK(classify_event(*plug, lam) == EventKind::jump);
}

TEST_CASE("trace_path rejects a start that is not a partial optimum") {
  const auto pb = noisy_problem(ModelKind::logistic, 1);
  const SpRegularizer reg = SpRegularizer::linear();
  PartialOptimum bad;
  bad.params = Vector::Constant(pb->param_dim(), 0.7);
  CHECK_THROWS_AS(trace_path(pb, reg, 1.0, 2.0, {}, bad), std::invalid_argument);
  CHECK_THROWS_AS(trace_path(pb, reg, 2.0, 1.0), std::invalid_argument);
}

TEST_CASE("evaluate_path") {
  AgePath path;
  path.meta.lambda_min = 1.0;
  path.meta.lambda_max = 4.0;
  auto pt = [](double lam, double v, int seg) {
    PathPoint p;
    p.lambda = lam;
    p.params = Vector::Constant(2, v);
    p.segment = seg;
    return p;
  };
  path.points = {pt(1.0, 0.0, 0), pt(2.0, 2.0, 0), pt(2.5, 7.0, 1), pt(3.0, 7.0, 1), pt(4.0, 9.0, 1)};
  CHECK(evaluate_path(path, 2.0)(0) == 2.0);
  CHECK(evaluate_path(path, 1.5)(1) == doctest::Approx(1.0));
  CHECK(evaluate_path(path, 2.75)(0) == 7.0);
  // never across the jump between 2.0 and 2.5
  CHECK(evaluate_path(path, 2.4)(0) == 2.0);
  CHECK(evaluate_path(path, 4.0)(0) == 9.0);
  CHECK_THROWS_AS(evaluate_path(path, 0.5), std::out_of_range);
  CHECK_THROWS_AS(evaluate_path(path, 4.5), std::out_of_range);

  // mid-segment query against a fresh ACS solve
  const Traced t = trace_busy(ModelKind::logistic, SpRegularizer::linear(), 1);
  for (std::size_t k = 1; k + 1 < t.path.points.size(); k += 7) {
    const auto& a = t.path.points[k];
    const auto& b = t.path.points[k + 1];
    if (a.segment != b.segment || a.partition != b.partition) continue;
    const double mid = 0.5 * (a.lambda + b.lambda);
    const Vector ref = acs_solve(*t.pb, mid, t.reg, check::fd_oracle_config(), a.params).params;
    const double scale = (b.params - a.params).lpNorm<Eigen::Infinity>();
    INFO("lambda " << mid);
    CHECK((evaluate_path(t.path, mid) - ref).lpNorm<Eigen::Infinity>() <= std::max(1e-6, 0.5 * scale));
  }
}

TEST_CASE("best_on_path") {
  const Traced t = trace_busy(ModelKind::lasso, SpRegularizer::linear(), 1);
  const BestPoint flat = best_on_path(t.path, [](const Vector&) { return 1.0; });
  CHECK(flat.lambda == t.lo);
  // scorer decreasing in lambda through a lookup of the point
  const BestPoint last = best_on_path(t.path, [&](const Vector& p) {
    for (const auto& q : t.path.points)
      if (&q.params == &p) return -q.lambda;
    return 0.0;
  });
  CHECK(last.lambda == t.hi);
  CHECK_THROWS(best_on_path(AgePath{}, [](const Vector&) { return 0.0; }));
}

TEST_CASE("tracing is deterministic") {
  const Traced a = trace_busy(ModelKind::svm, SpRegularizer::mixture(0.5), 5);
  const Traced b = trace_busy(ModelKind::svm, SpRegularizer::mixture(0.5), 5);
  REQUIRE(a.path.points.size() == b.path.points.size());
  REQUIRE(a.path.events.size() == b.path.events.size());
  for (std::size_t k = 0; k < a.path.points.size(); ++k) {
    CHECK(a.path.points[k].lambda == b.path.points[k].lambda);
    CHECK(a.path.points[k].params == b.path.points[k].params);
  }
  for (std::size_t k = 0; k < a.path.events.size(); ++k) CHECK(a.path.events[k].lambda == b.path.events[k].lambda);
}
