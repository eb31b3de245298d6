#include "agepath/run.hpp"

#include "agepath/log.hpp"
#include "agepath/path_export.hpp"
#include "agepath/verify.hpp"

#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <stdexcept>

namespace agepath {

using json = nlohmann::ordered_json;
namespace fs = std::filesystem;

std::string_view to_string(Command c) {
  switch (c) {
    case Command::path: return "path";
    case Command::acs: return "acs";
    case Command::bench: return "bench";
    case Command::verify: return "verify";
  }
  return "?";
}

Command parse_command(std::string_view s) {
  if (s == "path") return Command::path;
  if (s == "acs") return Command::acs;
  if (s == "bench") return Command::bench;
  if (s == "verify") return Command::verify;
  throw std::invalid_argument("unknown command '" + std::string(s) + "'");
}

void RunConfig::validate() const {
  if (!(lambda_min > 0.0) || !(lambda_min < lambda_max) || !std::isfinite(lambda_max))
    throw std::invalid_argument("need 0 < lmin < lmax");
  if (!(acs_step > 0.0)) throw std::invalid_argument("acs-step must be positive");
  if (data.empty() && (synth_n < 2 || synth_d < 1)) throw std::invalid_argument("synthetic data needs n >= 2, d >= 1");
  if (!(noise >= 0.0 && noise <= 1.0)) throw std::invalid_argument("noise ratio must lie in [0,1]");
  if (trials < 1) throw std::invalid_argument("trials must be at least 1");
  if (!(verify_step >= 0.0)) throw std::invalid_argument("verify step must be non-negative");
  reg.validate();
  hyper.validate(model);
  acs.validate();
  if (reg.family == SpFamily::hard && command != Command::acs)
    throw std::invalid_argument("the hard regularizer has a piecewise-constant path; only the acs command supports it");
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream)};
  std::mt19937_64 rng(seq);
  return rng();
}

Dataset make_dataset(const RunConfig& cfg, std::uint64_t seed) {
  const Task task = task_for(cfg.model);
  Dataset ds;
  if (!cfg.data.empty()) {
    const std::string ext = fs::path(cfg.data).extension().string();
    ds = load(cfg.data, ext == ".csv" ? FileFormat::csv : FileFormat::libsvm, task);
  } else {
    ds = synthesize(cfg.synth_n, cfg.synth_d, task, derive_seed(seed, 0)).data;
  }
  if (cfg.noise > 0.0) {
    const NoiseKind kind = task == Task::regression ? NoiseKind::target_perturb : NoiseKind::label_flip;
    ds = inject_noise(ds, {cfg.noise, kind, derive_seed(seed, 1)}).data;
  }
  return cfg.standardize ? standardize(ds) : ds;
}

Dataset make_dataset(const RunConfig& cfg) { return make_dataset(cfg, cfg.seed); }

namespace {

using Clock = std::chrono::steady_clock;

double since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::shared_ptr<const Problem> make_problem(const RunConfig& cfg, std::uint64_t seed) {
  return std::make_shared<const Problem>(cfg.model, make_dataset(cfg, seed), cfg.hyper);
}

void prepare_out(const RunConfig& cfg) {
  if (!cfg.out.empty()) fs::create_directories(cfg.out);
}

void write_text(const RunConfig& cfg, const std::string& name, const std::string& text) {
  if (cfg.out.empty()) return;
  std::ofstream os(fs::path(cfg.out) / name, std::ios::binary);
  os << text << '\n';
  if (!os) throw std::runtime_error("write failed: " + (fs::path(cfg.out) / name).string());
}

void write_path(const RunConfig& cfg, const std::string& stem, const AgePath& path) {
  if (cfg.out.empty()) return;
  write_jsonl((fs::path(cfg.out) / (stem + ".jsonl")).string(), path);
  write_csv((fs::path(cfg.out) / (stem + ".csv")).string(), path);
}

std::vector<SetLabel> coarse_partition(const Problem& pb, const SpRegularizer& reg, const Vector& params,
                                       double lambda) {
  std::vector<SetLabel> out;
  const Vector l = pb.losses(params);
  for (double x : l) out.push_back(static_cast<SetLabel>(region(reg, x, lambda)));
  if (pb.kind() == ModelKind::lasso)
    for (double w : params) out.push_back(w != 0.0 ? SetLabel::active : SetLabel::inactive);
  return out;
}

PathMeta meta_for(const RunConfig& cfg, const Problem& pb) {
  return {cfg.model, cfg.reg, cfg.hyper, cfg.lambda_min, cfg.lambda_max, cfg.trace, pb.param_names(), pb.n()};
}

std::vector<double> interior(double lo, double hi, int k) {
  std::vector<double> out;
  for (int i = 1; i <= k; ++i) out.push_back(lo + (hi - lo) * i / (k + 1));
  return out;
}

bool near_jump(const AgePath& path, double lambda, double margin) {
  return std::any_of(path.events.begin(), path.events.end(), [&](const CriticalEvent& e) {
    return e.kind == EventKind::jump && std::abs(e.lambda - lambda) <= margin;
  });
}

}  // namespace

std::string PathRun::summary_json() const {
  json j;
  j["points"] = path.points.size();
  j["events"] = {{"turning", path.turning_count()}, {"jump", path.jump_count()}};
  j["restarts"] = path.restart_count();
  j["wall_seconds"] = seconds;
  return j.dump(2);
}

PathRun run_path(const RunConfig& cfg) {
  cfg.validate();
  const auto pb = make_problem(cfg, cfg.seed);
  PathRun out;
  const auto t0 = Clock::now();
  const PartialOptimum init = acs_solve(*pb, cfg.lambda_min, cfg.reg, cfg.acs);
  out.path = trace_path(pb, cfg.reg, cfg.lambda_min, cfg.lambda_max, cfg.trace, init);
  out.seconds = since(t0);
  log::info("path: {} points, {} turning, {} jump, {:.3f}s", out.path.points.size(), out.path.turning_count(),
            out.path.jump_count(), out.seconds);
  prepare_out(cfg);
  write_path(cfg, "path", out.path);
  write_text(cfg, "summary.json", out.summary_json());
  return out;
}

std::string AcsRun::summary_json() const {
  json j;
  j["points"] = path.points.size();
  j["inner_iterations"] = inner_iterations;
  j["wall_seconds"] = seconds;
  return j.dump(2);
}

AcsRun run_acs(const RunConfig& cfg) {
  cfg.validate();
  const auto pb = make_problem(cfg, cfg.seed);
  const std::vector<double> grid = make_grid(cfg.lambda_min, cfg.lambda_max, cfg.acs_step);
  AcsRun out;
  const auto t0 = Clock::now();
  const auto sols = acs_grid_path(*pb, grid, cfg.reg, cfg.acs);
  out.seconds = since(t0);
  out.path.meta = meta_for(cfg, *pb);
  for (const auto& s : sols) {
    out.inner_iterations += s.inner_iters;
    out.path.points.push_back({s.lambda, s.params, s.weights, coarse_partition(*pb, cfg.reg, s.params, s.lambda), 0});
  }
  prepare_out(cfg);
  write_path(cfg, "acs", out.path);
  return out;
}

MeanStd mean_std(const std::vector<double>& xs) {
  MeanStd m;
  if (xs.empty()) return m;
  for (double x : xs) m.mean += x;
  m.mean /= static_cast<double>(xs.size());
  if (xs.size() < 2) return m;
  double ss = 0.0;
  for (double x : xs) ss += (x - m.mean) * (x - m.mean);
  m.std = std::sqrt(ss / static_cast<double>(xs.size() - 1));
  return m;
}

std::string BenchReport::to_json() const {
  json j;
  j["gaga_seconds"] = {{"mean", gaga.mean}, {"std", gaga.std}};
  j["acs_seconds"] = {{"mean", acs.mean}, {"std", acs.std}};
  j["speedup"] = speedup;
  json t = json::array();
  for (const auto& x : trials)
    t.push_back({{"seed", x.seed},
                 {"gaga_seconds", x.gaga_seconds},
                 {"acs_seconds", x.acs_seconds},
                 {"max_deviation", x.max_deviation},
                 {"agree_fraction", x.agree_fraction},
                 {"events", x.events},
                 {"jumps", x.jumps}});
  j["trials"] = t;
  return j.dump(2);
}

BenchReport run_bench(const RunConfig& cfg) {
  cfg.validate();
  BenchReport rep;
  const std::vector<double> grid = make_grid(cfg.lambda_min, cfg.lambda_max, cfg.acs_step);
  std::vector<double> tg, ta;
  for (int t = 0; t < cfg.trials; ++t) {
    BenchTrial tr;
    tr.seed = cfg.seed + static_cast<std::uint64_t>(t);
    // data and kernel are built outside both timers
    const auto pb = make_problem(cfg, tr.seed);

    auto t0 = Clock::now();
    const AgePath path = trace_path(pb, cfg.reg, cfg.lambda_min, cfg.lambda_max, cfg.trace);
    tr.gaga_seconds = since(t0);

    t0 = Clock::now();
    const auto sols = acs_grid_path(*pb, grid, cfg.reg, cfg.acs);
    tr.acs_seconds = since(t0);

    std::size_t agree = 0;
    for (std::size_t k = 0; k < grid.size(); ++k) {
      const double dev = (evaluate_path(path, grid[k]) - sols[k].params).lpNorm<Eigen::Infinity>();
      tr.max_deviation = std::max(tr.max_deviation, dev);
      agree += dev <= 1e-3;
    }
    tr.agree_fraction = static_cast<double>(agree) / static_cast<double>(grid.size());
    tr.events = path.events.size();
    tr.jumps = path.jump_count();
    log::info("bench trial {}: gaga {:.4f}s acs {:.4f}s", t + 1, tr.gaga_seconds, tr.acs_seconds);
    tg.push_back(tr.gaga_seconds);
    ta.push_back(tr.acs_seconds);
    rep.trials.push_back(tr);
  }
  rep.gaga = mean_std(tg);
  rep.acs = mean_std(ta);
  rep.speedup = rep.acs.mean / rep.gaga.mean;
  prepare_out(cfg);
  write_text(cfg, "bench.json", rep.to_json());
  return rep;
}

bool VerifyReport::pass() const {
  return std::all_of(checks.begin(), checks.end(), [](const VerifyCheck& c) { return c.pass; });
}

std::string VerifyReport::to_json() const {
  json j;
  j["pass"] = pass();
  json c = json::array();
  for (const auto& x : checks) c.push_back({{"name", x.name}, {"value", x.value}, {"limit", x.limit}, {"pass", x.pass}});
  j["checks"] = c;
  j["segment_deviation"] = segment_deviation;
  json f = json::array();
  for (const auto& r : fd_table) f.push_back({{"lambda", r.lambda}, {"usable", r.usable}, {"worst_rel", r.worst_rel}});
  j["fd_table"] = f;
  j["counts"] = {{"turning", turning}, {"jump", jumps}, {"restarts", restarts}};
  return j.dump(2);
}

VerifyReport run_verify(const RunConfig& cfg) {
  cfg.validate();
  const auto pb = make_problem(cfg, cfg.seed);
  const double lo = cfg.lambda_min, hi = cfg.lambda_max;
  const double step = cfg.verify_step > 0.0 ? cfg.verify_step : 1e-3 * (hi - lo);
  const std::vector<double> grid = make_grid(lo, hi, step);
  const std::vector<double> sample = interior(lo, hi, 100);

  // both arms start from the same partial optimum
  const Vector start = weighted_fit(*pb, Vector::Ones(pb->n()), cfg.acs).params;
  const PartialOptimum init = acs_solve(*pb, lo, cfg.reg, cfg.acs, start);

  TraceConfig tc = cfg.trace;
  tc.record_at = grid;
  tc.record_at.insert(tc.record_at.end(), sample.begin(), sample.end());
  auto plugin = make_plugin(pb, cfg.reg);
  plugin->rhs_scale = cfg.rhs_scale;
  const AgePath path = trace_path(*plugin, lo, hi, init, tc);
  const auto dense = acs_grid_path(*pb, grid, cfg.reg, cfg.acs, true, start);

  VerifyReport rep;
  rep.turning = path.turning_count();
  rep.jumps = path.jump_count();
  rep.restarts = path.restart_count();

  // dense ACS against the path, per segment, away from jumps
  const double margin = 1e-2;
  double worst = 0.0;
  for (std::size_t k = 0; k < grid.size(); ++k) {
    if (near_jump(path, grid[k], margin)) continue;
    const double dev = (evaluate_path(path, grid[k]) - dense[k].params).lpNorm<Eigen::Infinity>();
    std::size_t seg = 0;
    for (const auto& e : path.events) seg += e.kind == EventKind::jump && e.lambda < grid[k];
    if (rep.segment_deviation.size() <= seg) rep.segment_deviation.resize(seg + 1, 0.0);
    rep.segment_deviation[seg] = std::max(rep.segment_deviation[seg], dev);
    worst = std::max(worst, dev);
  }
  rep.checks.push_back({"path_vs_dense_acs", worst, 1e-3, worst <= 1e-3});

  double kkt = 0.0;
  for (double lam : sample) kkt = std::max(kkt, kkt_residual(*pb, cfg.reg, evaluate_path(path, lam), lam));
  rep.checks.push_back({"kkt_sweep", kkt, 1e-6, kkt <= 1e-6});

  // rhs against ACS differences, started from the path itself
  double fd_worst = 0.0;
  std::size_t usable = 0;
  for (std::size_t k = 4; k < sample.size(); k += 10) {
    const double lam = sample[k];
    if (near_jump(path, lam, margin)) continue;
    const FdResult r = rhs_vs_fd(pb, cfg.reg, lam, evaluate_path(path, lam), 1e-4, fd_oracle_config(), cfg.rhs_scale);
    rep.fd_table.push_back({lam, r.usable, r.worst_rel});
    if (!r.usable) continue;
    ++usable;
    fd_worst = std::max(fd_worst, r.worst_rel);
  }
  rep.checks.push_back({"rhs_vs_finite_difference", fd_worst, 1e-2, usable > 0 && fd_worst <= 1e-2});

  // implicit objective against the partial-optimum residual at ACS fixed points
  double gap = 0.0;
  for (std::size_t k = 0; k < dense.size(); k += std::max<std::size_t>(1, dense.size() / 50)) {
    const auto& s = dense[k];
    gap = std::max(gap, std::abs(implicit_stationarity(*pb, s.params, s.lambda, cfg.reg) -
                                 kkt_residual(*pb, cfg.reg, s.params, s.lambda)));
  }
  rep.checks.push_back({"implicit_consistency", gap, 1e-6, gap <= 1e-6});

  const bool economy = rep.restarts == rep.jumps && rep.jumps <= rep.turning + rep.jumps;
  rep.checks.push_back({"restarts_equal_jumps", static_cast<double>(rep.restarts), static_cast<double>(rep.jumps), economy});

  prepare_out(cfg);
  write_text(cfg, "verify.json", rep.to_json());
  return rep;
}

}  // namespace agepath
