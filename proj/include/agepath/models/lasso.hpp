#pragma once

#include "agepath/models/plugin.hpp"

namespace agepath {

double lasso_kkt_residual(const Problem& pb, const SpRegularizer& reg, const Vector& w, double lambda);

class LassoPlugin final : public ModelPlugin {
 public:
  LassoPlugin(std::shared_ptr<const Problem> problem, SpRegularizer reg);

  void reset(const Vector& params, double lambda) override;
  Vector params() const override { return w_; }
  Eigen::Index state_dim() const override { return static_cast<Eigen::Index>(active_idx_.size()); }
  Vector pack() const override;
  void unpack(const Vector& x) override;
  Vector monitors(double lambda, const Vector& x) const override;
  std::vector<Violator> repartition(double lambda, const std::vector<int>& monitor_ids) override;
  std::vector<SetLabel> partition() const override;
  Vector kkt_map(double lambda, const Vector& x) const override;
  Jacobians jacobian(double lambda, const Vector& x) const override;

  const std::vector<Eigen::Index>& active() const { return active_idx_; }
  const std::vector<Region>& regions() const { return regions_; }

 private:
  Vector expand(const Vector& x) const;
  Vector smooth_grad(double lambda, const Vector& w) const;
  void rebuild_active();

  Vector w_;
  Vector sgn_;
  std::vector<bool> is_active_;
  std::vector<Eigen::Index> active_idx_;
  std::vector<Region> regions_;
};

}  // namespace agepath
