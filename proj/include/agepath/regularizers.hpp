#pragma once

#include <string>
#include <string_view>

namespace agepath {

enum class SpFamily { hard, linear, mixture };

struct SpRegularizer {
  SpFamily family = SpFamily::linear;
  double gamma = 0.0;  // mixture only

  static SpRegularizer hard() { return {SpFamily::hard, 0.0}; }
  static SpRegularizer linear() { return {SpFamily::linear, 0.0}; }
  static SpRegularizer mixture(double gamma);

  void validate() const;
};

// E = easy, M = moderate (mixture only), D = discarded.
enum class Region { E, M, D };

struct WeightGrads {
  double d_loss = 0.0;
  double d_lambda = 0.0;
};

struct Thresholds {
  double lower;  // weight is 1 below this
  double upper;  // weight is 0 at/above this
};

Thresholds thresholds(const SpRegularizer& reg, double lambda);

double weight(const SpRegularizer& reg, double loss, double lambda);
Region region(const SpRegularizer& reg, double loss, double lambda);
WeightGrads weight_grads(const SpRegularizer& reg, double loss, double lambda);
double implicit_loss(const SpRegularizer& reg, double loss, double lambda);

// f(v, lambda), the penalty whose minimisation gives weight().
double sp_penalty(const SpRegularizer& reg, double v, double lambda);

// Region-local formulas, evaluated without clamping. The path ODEs use these
// so the weight map stays smooth while a partition is held fixed.
double weight_in(const SpRegularizer& reg, Region r, double loss, double lambda);
WeightGrads weight_grads_in(const SpRegularizer& reg, Region r, double loss, double lambda);

std::string_view to_string(SpFamily f);
std::string_view to_string(Region r);
SpFamily parse_family(std::string_view s);

}  // namespace agepath
