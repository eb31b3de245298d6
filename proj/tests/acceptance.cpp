// Acceptance run: one PASS/FAIL line per criterion with the measured values.
//
//   acceptance [--only N[,N...]] [--xfail N[,N...]]
//
// Exit status is 0 when every criterion passes, or when the failing set is
// exactly the --xfail list.
#include "agepath/acs.hpp"
#include "agepath/path.hpp"
#include "agepath/run.hpp"
#include "agepath/verify.hpp"
#include "checks.hpp"
#include "oracles.hpp"

#include <fmt/format.h>

#include <chrono>
#include <cstring>
#include <functional>
#include <iostream>
#include <random>
#include <set>
#include <sstream>

using namespace agepath;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::set<int> parse_list(const char* s) {
  std::set<int> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) out.insert(std::stoi(tok));
  return out;
}

// ---- shared instances ----------------------------------------------------

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

std::pair<double, double> busy_range(const Problem& pb) {
  switch (pb.kind()) {
    case ModelKind::svm: return {1.5, 4.0};
    case ModelKind::logistic: return {1.0, 3.0};
    case ModelKind::lasso: return {check::lambda_at_quantile(pb, 0.3), check::lambda_at_quantile(pb, 0.95)};
  }
  return {1.0, 2.0};
}

struct Run {
  std::string name;
  std::shared_ptr<const Problem> pb;
  SpRegularizer reg;
  double lo = 0.0, hi = 0.0;
  Vector start;  // unweighted fit; seeds both the path and the dense grid
  AgePath path;
};

// Three seeds per model, each with both regularizer families.
std::vector<Run> make_runs() {
  std::vector<Run> out;
  for (auto kind : {ModelKind::svm, ModelKind::lasso, ModelKind::logistic})
    for (std::uint64_t seed = 1; seed <= 3; ++seed)
      for (auto reg : {SpRegularizer::linear(), SpRegularizer::mixture(0.5)}) {
        Run r;
        r.name = fmt::format("{}/{}/{}", to_string(kind), to_string(reg.family), seed);
        r.pb = noisy_problem(kind, seed);
        r.reg = reg;
        std::tie(r.lo, r.hi) = busy_range(*r.pb);
        r.start = check::full_fit(*r.pb);
        out.push_back(std::move(r));
      }
  return out;
}

AgePath trace_from_start(const Run& r, std::vector<double> record_at) {
  TraceConfig cfg;
  cfg.record_at = std::move(record_at);
  const PartialOptimum init = acs_solve(*r.pb, r.lo, r.reg, {}, r.start);
  return trace_path(r.pb, r.reg, r.lo, r.hi, cfg, init);
}

std::vector<double> interior(double lo, double hi, int k) {
  std::vector<double> out;
  for (int i = 1; i <= k; ++i) out.push_back(lo + (hi - lo) * i / (k + 1));
  return out;
}

std::vector<Run>& runs() {
  static std::vector<Run> r = make_runs();
  return r;
}

// ---- criteria ------------------------------------------------------------

Outcome c1_regularizers() {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  int bad_mono = 0, bad_ends = 0;
  double worst_oracle = 0.0;
  for (auto fam : {SpFamily::hard, SpFamily::linear, SpFamily::mixture})
    for (int k = 0; k < 1000; ++k) {
      const double lam = std::exp(std::log(1e-3) + U(rng) * std::log(1e6));
      const double l = lam * 3.0 * U(rng);
      const SpRegularizer r = fam == SpFamily::mixture ? SpRegularizer::mixture(std::exp(std::log(0.05) + U(rng) * std::log(400.0)))
                                                       : SpRegularizer{fam, 0.0};
      const double v = weight(r, l, lam);
      const double dl = 1e-3 * lam * (0.01 + U(rng));
      if (weight(r, l + dl, lam) > v) ++bad_mono;
      if (weight(r, l, lam * (1.0 + 1e-3 * (0.01 + U(rng)))) < v) ++bad_mono;
      if (weight(r, 0.0, lam) != 1.0 || weight(r, 1e6 * lam, lam) > 1e-6) ++bad_ends;
      worst_oracle = std::max(worst_oracle, std::abs(v - oracle::grid_argmin(r, l, lam, 2000)));
    }
  return {bad_mono == 0 && bad_ends == 0 && worst_oracle <= 1e-6,
          fmt::format("3000 triples: monotonicity violations {}, endpoint violations {}, max |v - argmin| {:.2e}",
                      bad_mono, bad_ends, worst_oracle)};
}

Outcome c2_ode() {
  bool ok = true;
  std::string detail;
  for (auto kind : {ModelKind::svm, ModelKind::lasso, ModelKind::logistic})
    for (auto fam : {SpFamily::linear, SpFamily::mixture}) {
      int usable = 0;
      double worst = 0.0;
      for (std::uint64_t seed = 1; usable < 20 && seed <= 200; ++seed) {
        const check::Instance in = check::random_instance(kind, fam, seed);
        std::mt19937_64 rng(seed);
        const double q = std::uniform_real_distribution<double>(0.2, 0.9)(rng);
        const FdResult r = check::rhs_vs_fd(in, check::lambda_at_quantile(*in.pb, q));
        if (!r.usable) continue;
        ++usable;
        worst = std::max(worst, r.worst_rel);
      }
      ok &= usable >= 20 && worst <= 1e-2;
      detail += fmt::format(" {}/{} n={} worst={:.1e};", to_string(kind), to_string(fam), usable, worst);
    }
  return {ok, detail};
}

Outcome c3_consistency() {
  bool ok = true;
  double worst_all = 0.0;
  std::size_t compared = 0;
  std::string detail;
  for (Run& r : runs()) {
    const std::vector<double> grid = make_grid(r.lo, r.hi, 1e-3);
    r.path = trace_from_start(r, grid);
    const auto dense = acs_grid_path(*r.pb, grid, r.reg, {}, true, r.start);
    double worst = 0.0;
    for (std::size_t k = 0; k < grid.size(); ++k) {
      bool near = false;
      for (const auto& e : r.path.events) near |= e.kind == EventKind::jump && std::abs(e.lambda - grid[k]) <= 1e-2;
      if (near) continue;
      ++compared;
      worst = std::max(worst, (evaluate_path(r.path, grid[k]) - dense[k].params).lpNorm<Eigen::Infinity>());
    }
    if (worst > 1e-3) detail += fmt::format(" {} dev {:.2e};", r.name, worst);
    ok &= worst <= 1e-3;
    worst_all = std::max(worst_all, worst);
  }
  return {ok, fmt::format("{} paths, {} shared lambdas, max deviation {:.2e}{}", runs().size(), compared, worst_all, detail)};
}

Outcome c4_kkt() {
  double worst = 0.0;
  for (const Run& r : runs()) {
    const std::vector<double> sample = interior(r.lo, r.hi, 100);
    const AgePath path = trace_from_start(r, sample);
    for (double lam : sample) worst = std::max(worst, kkt_residual(*r.pb, r.reg, evaluate_path(path, lam), lam));
  }
  return {worst <= 1e-6, fmt::format("{} paths x 100 lambdas, max residual {:.2e}", runs().size(), worst)};
}

Outcome c5_implicit() {
  int points = 0;
  double worst = 0.0;
  for (std::uint64_t seed = 1; points < 50; ++seed)
    for (auto kind : {ModelKind::svm, ModelKind::lasso, ModelKind::logistic})
      for (auto fam : {SpFamily::linear, SpFamily::mixture}) {
        const check::Instance in = check::random_instance(kind, fam, 100 + seed);
        const double lam = check::lambda_at_quantile(*in.pb, 0.5);
        const PartialOptimum po = acs_solve(*in.pb, lam, in.reg, {}, check::full_fit(*in.pb));
        worst = std::max(worst, std::abs(implicit_stationarity(*in.pb, po.params, lam, in.reg) -
                                         kkt_residual(*in.pb, in.reg, po.params, lam)));
        ++points;
      }
  return {worst <= 1e-6, fmt::format("{} fixed points, max |implicit - kkt| {:.2e}", points, worst)};
}

// Event counts are totals over each model's runs; restarts must match jumps
// on every run.
Outcome c6_economy() {
  bool ok = true;
  std::string detail;
  for (auto kind : {ModelKind::svm, ModelKind::lasso}) {
    std::size_t turning = 0, jumps = 0;
    for (const Run& r : runs()) {
      if (r.pb->kind() != kind) continue;
      const AgePath& p = r.path;
      turning += p.turning_count();
      jumps += p.jump_count();
      ok &= p.restart_count() == p.jump_count();
      detail += fmt::format(" {} {}t/{}j/{}r;", r.name, p.turning_count(), p.jump_count(), p.restart_count());
    }
    ok &= turning + jumps > 0 && jumps < turning;
    detail += fmt::format(" {} total {}t/{}j;", to_string(kind), turning, jumps);
  }
  return {ok, "turning/jump/restarts:" + detail};
}

Outcome c7_speed() {
  RunConfig cfg;
  cfg.command = Command::bench;
  cfg.model = ModelKind::logistic;
  cfg.synth_n = 500;
  cfg.synth_d = 5;
  cfg.noise = 0.3;
  cfg.lambda_min = 0.1;
  cfg.lambda_max = 20.0;
  cfg.acs_step = 0.5;
  cfg.trials = 5;
  const BenchReport rep = run_bench(cfg);
  int wins = 0;
  std::string times;
  for (const auto& t : rep.trials) {
    wins += t.gaga_seconds < t.acs_seconds;
    times += fmt::format(" {:.3f}/{:.3f}", t.gaga_seconds, t.acs_seconds);
  }
  return {wins >= 4, fmt::format("logistic n=500: GAGA faster in {}/5 trials; gaga/acs seconds:{}; speedup {:.2f}", wins,
                                 times, rep.speedup)};
}

Outcome c8_robustness() {
  bool ok = true;
  std::string detail;
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    SynthOptions o;
    o.w0_scale = 4.0;
    const Dataset all = synthesize(200, 5, Task::regression, seed, o).data;
    const SplitResult sp = split(all, 0.75, seed);
    const Dataset train = inject_noise(sp.train, {0.3, NoiseKind::target_perturb, seed}).data;
    Hyper h;
    h.alpha = 0.02;
    const auto pb = std::make_shared<const Problem>(ModelKind::lasso, train, h);
    auto val_error = [&](const Vector& w) { return (sp.test.X() * w - sp.test.y()).squaredNorm() / sp.test.n(); };
    const Vector base = weighted_fit(*pb, Vector::Ones(pb->n())).params;
    const double lo = check::lambda_at_quantile(*pb, 0.3), hi = 1.2 * pb->losses(base).maxCoeff();
    for (auto reg : {SpRegularizer::linear(), SpRegularizer::mixture(0.5)}) {
      const AgePath path = trace_path(pb, reg, lo, hi, {}, acs_solve(*pb, lo, reg, {}, base));
      const BestPoint best = best_on_path(path, val_error);
      const double at_max = val_error(path.points.back().params), unweighted = val_error(base);
      const bool good = best.score <= at_max && best.score <= unweighted;
      ok &= good;
      detail += fmt::format(" seed {} {}: best {:.4f} at {:.3g}, lambda_max {:.4f}, unweighted {:.4f};", seed,
                            to_string(reg.family), best.score, best.lambda, at_max, unweighted);
    }
  }
  return {ok, "validation MSE" + detail};
}

Outcome c9_conservation() {
  double sum = 0.0, sub = 0.0;
  std::size_t points = 0;
  for (const Run& r : runs()) {
    const Problem& pb = *r.pb;
    for (const auto& p : r.path.points) {
      ++points;
      if (pb.kind() == ModelKind::svm) sum = std::max(sum, std::abs(pb.data().y().dot(p.params.head(pb.n()))));
      if (pb.kind() == ModelKind::lasso) {
        const Vector res = pb.data().X() * p.params - pb.data().y();
        const Vector g = pb.data().X().transpose() * p.weights.cwiseProduct(res) / static_cast<double>(pb.n());
        for (Eigen::Index j = 0; j < pb.d(); ++j)
          if (p.params(j) == 0.0) sub = std::max(sub, std::abs(g(j)) / pb.hyper().alpha);
      }
    }
  }
  return {sum <= 1e-7 && sub <= 1.0 + 1e-6,
          fmt::format("{} recorded points: max |sum alpha y| {:.2e}, max inactive |subgradient| {:.9f}", points, sum, sub)};
}

}  // namespace

int main(int argc, char** argv) {
  std::set<int> only, xfail;
  for (int i = 1; i < argc; ++i) {
    if (!std::strcmp(argv[i], "--only") && i + 1 < argc) only = parse_list(argv[++i]);
    else if (!std::strcmp(argv[i], "--xfail") && i + 1 < argc) xfail = parse_list(argv[++i]);
    else {
      std::cerr << "usage: acceptance [--only N,...] [--xfail N,...]\n";
      return 64;
    }
  }
  // 9 reads the paths traced by 3, and 6 reads them too
  if (only.count(6) || only.count(9)) only.insert(3);

  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"SP-regularizer axioms", c1_regularizers},
      {"ODE correctness vs ACS differences", c2_ode},
      {"path consistency vs dense ACS", c3_consistency},
      {"KKT residual sweep", c4_kkt},
      {"implicit objective consistency", c5_implicit},
      {"critical-point economy", c6_economy},
      {"speedup over the ACS sweep", c7_speed},
      {"robustness curve", c8_robustness},
      {"conservation along paths", c9_conservation},
  };
  std::set<int> failed;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (!only.empty() && !only.count(id)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (!o.pass) failed.insert(id);
    std::cout << fmt::format("[{}] {}. {} ({:.1f}s): {}", o.pass ? "PASS" : "FAIL", id, criteria[i].first, secs, o.detail)
              << std::endl;
  }
  std::cout << fmt::format("{} of {} criteria passed", criteria.size() - failed.size() - (only.empty() ? 0 : criteria.size() - only.size()),
                           only.empty() ? criteria.size() : only.size())
            << std::endl;
  if (failed.empty()) return 0;
  std::set<int> expected;
  for (int x : xfail)
    if (only.empty() || only.count(x)) expected.insert(x);
  if (failed == expected) {
    std::cout << "all failures are listed as expected\n";
    return 0;
  }
  return 1;
}
