#pragma once

#include "agepath/models/plugin.hpp"

namespace agepath {

double logit_kkt_residual(const Problem& pb, const SpRegularizer& reg, const Vector& params, double lambda);

class LogitPlugin final : public ModelPlugin {
 public:
  LogitPlugin(std::shared_ptr<const Problem> problem, SpRegularizer reg);

  void reset(const Vector& params, double lambda) override;
  Vector params() const override { return theta_; }
  Eigen::Index state_dim() const override { return theta_.size(); }
  Vector pack() const override { return theta_; }
  void unpack(const Vector& x) override { theta_ = x; }
  Vector monitors(double lambda, const Vector& x) const override;
  std::vector<Violator> repartition(double lambda, const std::vector<int>& monitor_ids) override;
  std::vector<SetLabel> partition() const override;
  Vector kkt_map(double lambda, const Vector& x) const override;
  Jacobians jacobian(double lambda, const Vector& x) const override;

 private:
  Vector theta_;  // (w, b)
  std::vector<Region> regions_;
};

}  // namespace agepath
