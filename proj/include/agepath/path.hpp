#pragma once

#include "agepath/acs.hpp"
#include "agepath/models/plugin.hpp"

#include <functional>
#include <memory>
#include <optional>
#include <vector>

namespace agepath {

struct TraceConfig {
  double kkt_tol = 1e-6;
  double delta = 0.0;           // warm-start offset after a jump; 0 -> 1e-3 (lmax - lmin)
  double probe = 0.0;           // integration length used to classify an event; 0 -> delta
  double rtol = 1e-8;
  double atol = 1e-10;
  double max_step = 0.0;        // 0 -> (lmax - lmin) / 10
  std::size_t max_events = 0;   // 0 -> 50 n
  double monitor_floor = 1e-9;  // monitors within this of zero count as on the boundary
  std::vector<double> record_at;
  AcsConfig acs;
};

enum class EventKind { turning, jump };
std::string_view to_string(EventKind k);

struct CriticalEvent {
  double lambda = 0.0;
  EventKind kind = EventKind::turning;
  std::vector<Violator> violators;
  bool restarted = false;
};

struct PathPoint {
  double lambda = 0.0;
  Vector params;
  Vector weights;
  std::vector<SetLabel> partition;
  int segment = 0;  // increments at every jump
};

struct PathMeta {
  ModelKind model = ModelKind::lasso;
  SpRegularizer reg;
  Hyper hyper;
  double lambda_min = 0.0;
  double lambda_max = 0.0;
  TraceConfig cfg;
  std::vector<std::string> param_names;
  Eigen::Index n = 0;
};

struct AgePath {
  std::vector<PathPoint> points;
  std::vector<CriticalEvent> events;
  PathMeta meta;

  std::size_t turning_count() const;
  std::size_t jump_count() const;
  std::size_t restart_count() const;
};

// Requires `init` to be a partial optimum at lambda_min.
AgePath trace_path(ModelPlugin& plugin, double lambda_min, double lambda_max, const PartialOptimum& init,
                   const TraceConfig& cfg = {});

// Convenience form: builds the plugin and, without `init`, starts from ACS at lambda_min.
AgePath trace_path(std::shared_ptr<const Problem> problem, const SpRegularizer& reg, double lambda_min,
                   double lambda_max, const TraceConfig& cfg = {},
                   const std::optional<PartialOptimum>& init = std::nullopt);

// Turning iff the KKT residual is within tolerance and no monitor (other
// than `ignore`) shows the live partition disagreeing with the state.
EventKind classify_event(const ModelPlugin& plugin, double lambda, double kkt_tol = 1e-6,
                         double monitor_floor = 1e-9, const std::vector<int>& ignore = {});

Vector evaluate_path(const AgePath& path, double lambda);

struct BestPoint {
  double lambda = 0.0;
  Vector params;
  double score = 0.0;
};
BestPoint best_on_path(const AgePath& path, const std::function<double(const Vector&)>& scorer);

}  // namespace agepath
