#pragma once

#include "agepath/models/plugin.hpp"

namespace agepath {

double svm_kkt_residual(const Problem& pb, const SpRegularizer& reg, const Vector& params, double lambda);

std::vector<SetLabel> svm_partition(const Vector& g, const Vector& losses, double lambda,
                                    const SpRegularizer& reg, double g_tol = kGTol);

class SvmPlugin final : public ModelPlugin {
 public:
  SvmPlugin(std::shared_ptr<const Problem> problem, SpRegularizer reg);

  void reset(const Vector& params, double lambda) override;
  Vector params() const override;
  Eigen::Index state_dim() const override;
  Vector pack() const override;
  void unpack(const Vector& x) override;
  Vector monitors(double lambda, const Vector& x) const override;
  std::vector<Violator> repartition(double lambda, const std::vector<int>& monitor_ids) override;
  std::vector<SetLabel> partition() const override { return sets_; }
  Vector kkt_map(double lambda, const Vector& x) const override;
  Jacobians jacobian(double lambda, const Vector& x) const override;

 private:
  // samples whose alpha is an ODE variable, in pack order
  void rebuild_vars();
  bool is_var(SetLabel s) const;
  Vector alpha_from(const Vector& x, double* b) const;
  Region region_for(SetLabel s) const;

  Vector alpha_;
  double b_ = 0.0;
  std::vector<SetLabel> sets_;
  std::vector<Eigen::Index> vars_;
};

}  // namespace agepath
