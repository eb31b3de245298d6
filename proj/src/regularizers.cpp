#include "agepath/regularizers.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace agepath {

namespace {

void check_args(double loss, double lambda) {
  if (!std::isfinite(loss) || loss < 0.0)
    throw std::invalid_argument("sp-regularizer: loss must be finite and non-negative, got " +
                                std::to_string(loss));
  if (!std::isfinite(lambda) || lambda <= 0.0)
    throw std::invalid_argument("sp-regularizer: lambda must be positive, got " +
                                std::to_string(lambda));
}

}  // namespace

SpRegularizer SpRegularizer::mixture(double gamma) {
  SpRegularizer r{SpFamily::mixture, gamma};
  r.validate();
  return r;
}

void SpRegularizer::validate() const {
  if (family == SpFamily::mixture && !(gamma > 0.0 && std::isfinite(gamma)))
    throw std::invalid_argument("mixture regularizer needs gamma > 0");
}

Thresholds thresholds(const SpRegularizer& reg, double lambda) {
  if (reg.family == SpFamily::mixture) {
    const double r = lambda * reg.gamma / (lambda + reg.gamma);
    return {r * r, lambda * lambda};
  }
  return {lambda, lambda};
}

Region region(const SpRegularizer& reg, double loss, double lambda) {
  check_args(loss, lambda);
  const Thresholds t = thresholds(reg, lambda);
  if (reg.family != SpFamily::mixture) return loss < lambda ? Region::E : Region::D;
  if (loss < t.lower) return Region::E;
  if (loss > t.upper) return Region::D;
  return Region::M;
}

double weight_in(const SpRegularizer& reg, Region r, double loss, double lambda) {
  switch (r) {
    case Region::D:
      return 0.0;
    case Region::E:
      return reg.family == SpFamily::linear ? 1.0 - loss / lambda : 1.0;
    case Region::M:
      return reg.gamma * (1.0 / std::sqrt(loss) - 1.0 / lambda);
  }
  return 0.0;
}

WeightGrads weight_grads_in(const SpRegularizer& reg, Region r, double loss, double lambda) {
  if (r == Region::E && reg.family == SpFamily::linear)
    return {-1.0 / lambda, loss / (lambda * lambda)};
  if (r == Region::M)
    return {-0.5 * reg.gamma / (loss * std::sqrt(loss)), reg.gamma / (lambda * lambda)};
  return {0.0, 0.0};
}

double weight(const SpRegularizer& reg, double loss, double lambda) {
  const Region r = region(reg, loss, lambda);
  const double v = weight_in(reg, r, loss, lambda);
  // the M formula is exactly 1 and 0 at the closed boundaries up to rounding
  return std::clamp(v, 0.0, 1.0);
}

WeightGrads weight_grads(const SpRegularizer& reg, double loss, double lambda) {
  check_args(loss, lambda);
  const Thresholds t = thresholds(reg, lambda);
  if (loss == t.lower || loss == t.upper)
    throw std::domain_error("weight_grads: loss lies exactly on a region boundary");
  return weight_grads_in(reg, region(reg, loss, lambda), loss, lambda);
}

double implicit_loss(const SpRegularizer& reg, double loss, double lambda) {
  check_args(loss, lambda);
  switch (reg.family) {
    case SpFamily::hard:
      return std::min(loss, lambda);
    case SpFamily::linear: {
      const double l = std::min(loss, lambda);
      return l - l * l / (2.0 * lambda);
    }
    case SpFamily::mixture: {
      const Thresholds t = thresholds(reg, lambda);
      if (loss <= t.lower) return loss;
      const double l = std::min(loss, t.upper);
      return t.lower + 2.0 * reg.gamma * (std::sqrt(l) - std::sqrt(t.lower)) -
             reg.gamma * (l - t.lower) / lambda;
    }
  }
  return 0.0;
}

double sp_penalty(const SpRegularizer& reg, double v, double lambda) {
  switch (reg.family) {
    case SpFamily::hard:
      return -lambda * v;
    case SpFamily::linear:
      return lambda * (0.5 * v * v - v);
    case SpFamily::mixture:
      return reg.gamma * reg.gamma / (v + reg.gamma / lambda);
  }
  return 0.0;
}

std::string_view to_string(SpFamily f) {
  switch (f) {
    case SpFamily::hard: return "hard";
    case SpFamily::linear: return "linear";
    case SpFamily::mixture: return "mixture";
  }
  return "?";
}

std::string_view to_string(Region r) {
  switch (r) {
    case Region::E: return "E";
    case Region::M: return "M";
    case Region::D: return "D";
  }
  return "?";
}

SpFamily parse_family(std::string_view s) {
  if (s == "hard") return SpFamily::hard;
  if (s == "linear") return SpFamily::linear;
  if (s == "mixture") return SpFamily::mixture;
  throw std::invalid_argument("unknown regularizer '" + std::string(s) + "'");
}

}  // namespace agepath
