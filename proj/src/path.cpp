#include "agepath/path.hpp"

#include "agepath/log.hpp"
#include "agepath/ode.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace agepath {

std::string_view to_string(EventKind k) { return k == EventKind::turning ? "turning" : "jump"; }

std::size_t AgePath::turning_count() const {
  return static_cast<std::size_t>(
      std::count_if(events.begin(), events.end(), [](const auto& e) { return e.kind == EventKind::turning; }));
}
std::size_t AgePath::jump_count() const { return events.size() - turning_count(); }
std::size_t AgePath::restart_count() const {
  return static_cast<std::size_t>(std::count_if(events.begin(), events.end(), [](const auto& e) { return e.restarted; }));
}

EventKind classify_event(const ModelPlugin& plugin, double lambda, double kkt_tol, double monitor_floor,
                         const std::vector<int>& ignore) {
  const double stat = kkt_residual(plugin.problem(), plugin.reg(), plugin.params(), lambda);
  if (!(stat <= kkt_tol)) return EventKind::jump;
  const Vector m = plugin.monitors(lambda, plugin.pack());
  for (Eigen::Index k = 0; k < m.size(); ++k) {
    if (std::find(ignore.begin(), ignore.end(), static_cast<int>(k)) != ignore.end()) continue;
    if (m(k) < -monitor_floor) return EventKind::jump;
  }
  return EventKind::turning;
}

namespace {

// Event location relative to the traced range. Tighter than needed for the
// location itself so a state caught past a boundary is off by round-off only.
constexpr double kEventTol = 1e-10;

int monitor_id(const ModelPlugin& pl, const Violator& v) {
  return static_cast<int>(v.feature ? pl.problem().n() + v.index : v.index);
}

class Tracker {
 public:
  Tracker(ModelPlugin& pl, double lmin, double lmax, const TraceConfig& cfg)
      : pl_(pl), lmin_(lmin), lmax_(lmax), cfg_(cfg) {
    const double range = lmax - lmin;
    if (cfg_.delta <= 0.0) cfg_.delta = 1e-3 * range;
    if (cfg_.probe <= 0.0) cfg_.probe = cfg_.delta;
    if (cfg_.max_step <= 0.0) cfg_.max_step = range / 10.0;
    if (cfg_.max_events == 0) cfg_.max_events = 50 * static_cast<std::size_t>(pl.problem().n());
    std::sort(cfg_.record_at.begin(), cfg_.record_at.end());
  }

  AgePath run(const PartialOptimum& init) {
    pl_.reset(init.params, lmin_);
    const double r0 = pl_.kkt_residual(lmin_);
    if (!(r0 <= cfg_.kkt_tol))
      throw std::invalid_argument("trace_path: initial point is not a partial optimum (KKT residual " +
                                  std::to_string(r0) + ")");
    path_.meta = {pl_.problem().kind(), pl_.reg(), pl_.problem().hyper(), lmin_, lmax_, cfg_,
                  pl_.problem().param_names(), pl_.problem().n()};
    record(lmin_);

    double lam = lmin_;
    std::vector<int> pending;  // monitors that fired at `lam`
    while (true) {
      if (pending.empty()) {
        if (lam >= lmax_) break;
        IvpResult res = integrate(spec(lam, lmax_, {}));
        record_trajectory(res, lam);
        if (res.status == IvpStatus::reached_end) {
          pl_.unpack(res.last().y);
          lam = lmax_;
          break;
        }
        if (res.status == IvpStatus::failure) {
          pl_.unpack(res.last().y);
          log::info("integrator failure at lambda={:.10g}: {}", res.last().t, res.failure_reason);
          lam = warm_restart(res.last().t, {});
          continue;
        }
        pl_.unpack(res.y_event);
        lam = res.t_event;
        pending = res.event_monitors;
      }
      lam = handle_event(lam, pending);
    }
    record(lmax_);
    return std::move(path_);
  }

 private:
  IvpSpec spec(double t0, double t1, std::vector<bool> armed) const {
    IvpSpec s;
    s.rhs = [this](double t, const Vector& x) { return pl_.rhs(t, x); };
    s.monitors = [this](double t, const Vector& x) { return pl_.monitors(t, x); };
    s.t0 = t0;
    s.t1 = t1;
    s.y0 = pl_.pack();
    s.rtol = cfg_.rtol;
    s.atol = cfg_.atol;
    s.max_step = cfg_.max_step;
    s.expect_positive = true;
    s.zero_tol = cfg_.monitor_floor;
    s.armed = std::move(armed);
    // event tolerance relative to the whole range, not the remaining piece
    s.event_tol_rel = kEventTol * (lmax_ - lmin_) / (t1 - t0);
    for (double r : cfg_.record_at)
      if (r > t0 && r <= t1) s.stops.push_back(r);
    return s;
  }

  void record(double lam) {
    if (!path_.points.empty() && lam <= path_.points.back().lambda) return;
    path_.points.push_back({lam, pl_.params(), pl_.weights(lam), pl_.partition(), segment_});
  }

  void record_trajectory(const IvpResult& res, double from) {
    for (const auto& s : res.trajectory) {
      if (s.t <= from) continue;
      pl_.unpack(s.y);
      record(s.t);
    }
  }

  // Monitors about to cross within the event tolerance join the event.
  std::vector<int> with_simultaneous(double lam, std::vector<int> ids) {
    const Vector x = pl_.pack();
    const double tau = 1e-8 * (lmax_ - lmin_);
    if (lam + tau > lmax_) return ids;
    const Vector m = pl_.monitors(lam, x);
    const Vector mp = pl_.monitors(lam + tau, x + tau * pl_.rhs(lam, x));
    for (Eigen::Index k = 0; k < m.size(); ++k)
      if (mp(k) < -cfg_.monitor_floor && std::find(ids.begin(), ids.end(), static_cast<int>(k)) == ids.end())
        ids.push_back(static_cast<int>(k));
    std::sort(ids.begin(), ids.end());
    return ids;
  }

  double handle_event(double lam_e, std::vector<int>& pending) {
    if (++n_events_ > cfg_.max_events)
      throw std::runtime_error("trace_path: more than " + std::to_string(cfg_.max_events) + " events");
    record(lam_e);
    const Vector params_e = pl_.params();
    const std::vector<int> ids = with_simultaneous(lam_e, pending);
    pending.clear();
    const std::vector<Violator> viol = pl_.repartition(lam_e, ids);

    const double t1 = std::min(lam_e + cfg_.probe, lmax_);
    if (t1 <= lam_e) {
      const EventKind k = classify_event(pl_, lam_e, cfg_.kkt_tol, cfg_.monitor_floor, ids);
      if (k == EventKind::turning) {
        path_.events.push_back({lam_e, k, viol, false});
        return lmax_;
      }
      pl_.reset(params_e, lam_e);
      return warm_restart(lam_e, viol);
    }

    std::vector<bool> armed(static_cast<std::size_t>(pl_.monitor_count()), true);
    for (const auto& v : viol) armed[static_cast<std::size_t>(monitor_id(pl_, v))] = false;
    IvpResult res = integrate(spec(lam_e, t1, armed));
    if (res.status == IvpStatus::failure) {
      pl_.reset(params_e, lam_e);
      return warm_restart(lam_e, viol);
    }
    const OdeSample& end = res.status == IvpStatus::event ? res.trajectory.back() : res.last();
    pl_.unpack(res.status == IvpStatus::event ? res.y_event : end.y);
    const double lam_p = res.status == IvpStatus::event ? res.t_event : end.t;
    const std::vector<int> fired = res.status == IvpStatus::event ? res.event_monitors : std::vector<int>{};

    const EventKind kind = classify_event(pl_, lam_p, cfg_.kkt_tol, cfg_.monitor_floor, fired);
    if (kind == EventKind::jump) {
      log::debug("jump at lambda={:.10g} (residual {:.3e})", lam_e, pl_.kkt_residual(lam_p));
      pl_.reset(params_e, lam_e);
      return warm_restart(lam_e, viol);
    }
    log::debug("turning point at lambda={:.10g}", lam_e);
    path_.events.push_back({lam_e, EventKind::turning, viol, false});
    record_trajectory(res, lam_e);
    pl_.unpack(res.status == IvpStatus::event ? res.y_event : end.y);
    pending = fired;
    return lam_p;
  }

  double warm_restart(double lam_e, std::vector<Violator> viol) {
    const double target = std::min(lam_e + cfg_.delta, lmax_);
    const std::vector<SetLabel> before = pl_.partition();
    const Vector start = pl_.params();
    ++segment_;
    // requested points inside the gap are solved directly
    Vector from = start;
    std::vector<PathPoint> gap;
    for (double r : cfg_.record_at)
      if (r > lam_e && r < target) {
        from = solve_at(r, from);
        pl_.reset(from, r);
        gap.push_back({r, pl_.params(), pl_.weights(r), pl_.partition(), segment_});
      }
    pl_.reset(solve_at(target, from), target);
    if (viol.empty()) {
      const std::vector<SetLabel> after = pl_.partition();
      const Eigen::Index n = pl_.problem().n();
      for (std::size_t k = 0; k < before.size() && k < after.size(); ++k)
        if (before[k] != after[k]) {
          const bool feat = static_cast<Eigen::Index>(k) >= n;
          viol.push_back({feat ? static_cast<Eigen::Index>(k) - n : static_cast<Eigen::Index>(k), feat, before[k], after[k]});
        }
      if (viol.empty()) {
        // no set changed across the restart: report the tightest monitor
        const Vector m = pl_.monitors(target, pl_.pack());
        Eigen::Index k = 0;
        if (m.size()) m.minCoeff(&k);
        const bool feat = k >= n;
        viol.push_back({feat ? k - n : k, feat, after.empty() ? SetLabel::E : after[static_cast<std::size_t>(k)],
                        after.empty() ? SetLabel::E : after[static_cast<std::size_t>(k)]});
      }
    }
    path_.events.push_back({lam_e, EventKind::jump, std::move(viol), true});
    for (auto& p : gap) path_.points.push_back(std::move(p));
    record(target);
    return target;
  }

  Vector solve_at(double lam, const Vector& start) const {
    try {
      return acs_solve(pl_.problem(), lam, pl_.reg(), cfg_.acs, start).params;
    } catch (const ConvergenceError& e) {
      log::warn("warm start at lambda={:.10g} did not converge: {}", lam, e.what());
      return e.last_iterate();
    }
  }

  ModelPlugin& pl_;
  double lmin_, lmax_;
  TraceConfig cfg_;
  AgePath path_;
  int segment_ = 0;
  std::size_t n_events_ = 0;
};

}  // namespace

AgePath trace_path(ModelPlugin& plugin, double lambda_min, double lambda_max, const PartialOptimum& init,
                   const TraceConfig& cfg) {
  if (!(lambda_min > 0.0) || !(lambda_min < lambda_max))
    throw std::invalid_argument("trace_path: need 0 < lambda_min < lambda_max");
  Tracker t(plugin, lambda_min, lambda_max, cfg);
  return t.run(init);
}

AgePath trace_path(std::shared_ptr<const Problem> problem, const SpRegularizer& reg, double lambda_min,
                   double lambda_max, const TraceConfig& cfg, const std::optional<PartialOptimum>& init) {
  auto plugin = make_plugin(problem, reg);
  const PartialOptimum start = init ? *init : acs_solve(*problem, lambda_min, reg, cfg.acs);
  return trace_path(*plugin, lambda_min, lambda_max, start, cfg);
}

Vector evaluate_path(const AgePath& path, double lambda) {
  if (path.points.empty()) throw std::invalid_argument("evaluate_path: empty path");
  const double lo = path.meta.lambda_min, hi = path.meta.lambda_max;
  if (lambda < lo || lambda > hi) throw std::out_of_range("evaluate_path: lambda outside the traced range");
  const auto& pts = path.points;
  auto it = std::upper_bound(pts.begin(), pts.end(), lambda,
                             [](double v, const PathPoint& p) { return v < p.lambda; });
  if (it == pts.begin()) return pts.front().params;
  const PathPoint& a = *(it - 1);
  if (it == pts.end() || a.lambda == lambda || it->segment != a.segment) return a.params;
  const PathPoint& b = *it;
  const double s = (lambda - a.lambda) / (b.lambda - a.lambda);
  return (1.0 - s) * a.params + s * b.params;
}

BestPoint best_on_path(const AgePath& path, const std::function<double(const Vector&)>& scorer) {
  if (path.points.empty()) throw std::invalid_argument("best_on_path: empty path");
  BestPoint best;
  bool first = true;
  for (const auto& p : path.points) {
    const double s = scorer(p.params);
    if (first || s < best.score) {
      best = {p.lambda, p.params, s};
      first = false;
    }
  }
  return best;
}

}  // namespace agepath
