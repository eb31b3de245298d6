#include "agepath/verify.hpp"

#include <algorithm>
#include <cmath>

namespace agepath {

AcsConfig fd_oracle_config() {
  AcsConfig c;
  c.outer_tol = 1e-11;
  c.inner_tol = 1e-12;
  c.max_outer = 20000;
  return c;
}

FdResult rhs_vs_fd(std::shared_ptr<const Problem> pb, const SpRegularizer& reg, double lambda, const Vector& start,
                   double h, const AcsConfig& cfg, double rhs_scale) {
  FdResult out;
  const PartialOptimum mid = acs_solve(*pb, lambda, reg, cfg, start);
  const PartialOptimum lo = acs_solve(*pb, lambda - h, reg, cfg, mid.params);
  const PartialOptimum hi = acs_solve(*pb, lambda + h, reg, cfg, mid.params);
  auto plug = make_plugin(pb, reg);
  plug->rhs_scale = rhs_scale;
  plug->reset(lo.params, lambda - h);
  const auto plo = plug->partition();
  plug->reset(hi.params, lambda + h);
  const auto phi = plug->partition();
  plug->reset(mid.params, lambda);
  if (plug->partition() != plo || plug->partition() != phi) return out;
  out.usable = true;
  const Vector x = plug->pack();
  const Vector p0 = plug->params();
  plug->unpack(x + plug->rhs(lambda, x));
  out.analytic = plug->params() - p0;
  out.numeric = (hi.params - lo.params) / (2 * h);
  for (Eigen::Index k = 0; k < out.numeric.size(); ++k) {
    const double a = out.analytic(k), b = out.numeric(k);
    if (std::max(std::abs(a), std::abs(b)) <= 1e-6) continue;
    out.worst_rel = std::max(out.worst_rel, std::abs(a - b) / std::max(std::abs(a), std::abs(b)));
  }
  return out;
}

}  // namespace agepath
