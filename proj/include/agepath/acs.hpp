#pragma once

#include "agepath/problem.hpp"
#include "agepath/regularizers.hpp"

#include <optional>
#include <vector>

namespace agepath {

struct AcsConfig {
  double inner_tol = 1e-10;
  double outer_tol = 1e-8;
  int max_outer = 10000;
  long max_inner = 100000;

  void validate() const;
};

struct FitResult {
  Vector params;
  long iterations = 0;
  double residual = 0.0;
  bool converged = true;
};

// argmin_w of the v-weighted convex subproblem.
FitResult weighted_fit(const Problem& pb, const Vector& v, const AcsConfig& cfg = {},
                       const std::optional<Vector>& warm = std::nullopt);

struct PartialOptimum {
  Vector params;
  Vector weights;
  double lambda = 0.0;
  int outer_iters = 0;
  long inner_iters = 0;
};

class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& what, Vector last, double residual)
      : std::runtime_error(what), last_(std::move(last)), residual_(residual) {}
  const Vector& last_iterate() const { return last_; }
  double residual() const { return residual_; }

 private:
  Vector last_;
  double residual_;
};

// Optional per-half-step record of the SPL objective, for descent checks.
struct AcsTrace {
  std::vector<double> objective;
};

PartialOptimum acs_solve(const Problem& pb, double lambda, const SpRegularizer& reg,
                         const AcsConfig& cfg = {}, const std::optional<Vector>& init = std::nullopt,
                         AcsTrace* trace = nullptr);

// `init` seeds the first solve, and every solve when warm_start is off.
std::vector<PartialOptimum> acs_grid_path(const Problem& pb, const std::vector<double>& grid,
                                          const SpRegularizer& reg, const AcsConfig& cfg = {},
                                          bool warm_start = true, const std::optional<Vector>& init = std::nullopt);

// Norm of the minimum-norm (sub)gradient of the implicit objective
// R(w) + sum F_lambda(l_i(w)).
double implicit_stationarity(const Problem& pb, const Vector& params, double lambda,
                             const SpRegularizer& reg);

std::vector<double> make_grid(double lo, double hi, double step);

}  // namespace agepath
