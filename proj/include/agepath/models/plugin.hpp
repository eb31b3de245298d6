#pragma once

#include "agepath/problem.hpp"
#include "agepath/regularizers.hpp"

#include <cstdint>
#include <memory>
#include <vector>

namespace agepath {

// Sample sets (E/M/D, or the SVM refinement of E) and Lasso feature sets.
enum class SetLabel : std::uint8_t { E, M, D, EN, EZ, EP, active, inactive };
std::string_view to_string(SetLabel s);

struct Violator {
  Eigen::Index index = 0;
  bool feature = false;
  SetLabel from = SetLabel::E;
  SetLabel to = SetLabel::E;
};

constexpr double kGTol = 1e-8;

// Live path state for one model. The tracker drives it through
// pack/unpack, rhs, monitors and repartition. Monitors are positive while
// the current partition is consistent with the state.
class ModelPlugin {
 public:
  struct Jacobians {
    Matrix Jx;
    Vector Jl;
  };

  ModelPlugin(std::shared_ptr<const Problem> problem, SpRegularizer reg);
  virtual ~ModelPlugin() = default;

  const Problem& problem() const { return *problem_; }
  const std::shared_ptr<const Problem>& problem_ptr() const { return problem_; }
  const SpRegularizer& reg() const { return reg_; }

  // Load full parameters and derive the partition from them.
  virtual void reset(const Vector& params, double lambda) = 0;
  virtual Vector params() const = 0;
  virtual Eigen::Index state_dim() const = 0;
  virtual Vector pack() const = 0;
  virtual void unpack(const Vector& x) = 0;
  virtual Vector monitors(double lambda, const Vector& x) const = 0;
  virtual std::vector<Violator> repartition(double lambda, const std::vector<int>& monitor_ids) = 0;
  // samples first, then (lasso) features
  virtual std::vector<SetLabel> partition() const = 0;
  virtual Vector kkt_map(double lambda, const Vector& x) const = 0;
  virtual Jacobians jacobian(double lambda, const Vector& x) const = 0;

  // d x / d lambda = -Jx^+ Jl
  Vector rhs(double lambda, const Vector& x) const;

  // Partition-free stationarity of the current params, combined with the
  // amount by which the live partition disagrees with them.
  double kkt_residual(double lambda) const;
  double partition_violation(double lambda) const;
  Vector losses() const { return problem_->losses(params()); }
  Vector weights(double lambda) const { return problem_->weights(params(), reg_, lambda); }
  Eigen::Index monitor_count() const;

  // Test hook: multiplies every rhs evaluation.
  double rhs_scale = 1.0;
  mutable bool rank_deficient = false;

 protected:
  Region region_of(double loss, double lambda) const { return region(reg_, loss, lambda); }
  // Signed distance to leaving `r`; positive inside.
  double region_margin(Region r, double loss, double lambda) const;
  Region region_after(Region r, double loss, double lambda) const;

  std::shared_ptr<const Problem> problem_;
  SpRegularizer reg_;
};

std::unique_ptr<ModelPlugin> make_plugin(std::shared_ptr<const Problem> problem, const SpRegularizer& reg);

// Partition-free stationarity residual with weights recomputed from the losses.
double kkt_residual(const Problem& pb, const SpRegularizer& reg, const Vector& params, double lambda);

// Labels for svm/logistic, real values for lasso.
Vector predict(const Problem& pb, const Vector& params, const Matrix& Xq);
Vector decision_function(const Problem& pb, const Vector& params, const Matrix& Xq);
Vector predict_proba(const Problem& pb, const Vector& params, const Matrix& Xq);

}  // namespace agepath
