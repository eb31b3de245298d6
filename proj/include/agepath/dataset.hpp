#pragma once

#include "agepath/linalg.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace agepath {

enum class Task { classification, regression };

struct Standardization {
  Vector mean;
  Vector scale;
};

class Dataset {
 public:
  Dataset() = default;
  // Validates shape, finiteness and (for classification) the +-1 labels.
  Dataset(Matrix features, Vector targets, Task task, std::vector<std::string> names = {});

  const Matrix& X() const { return X_; }
  const Vector& y() const { return y_; }
  Task task() const { return task_; }
  Eigen::Index n() const { return X_.rows(); }
  Eigen::Index d() const { return X_.cols(); }
  const std::vector<std::string>& feature_names() const { return names_; }
  const std::optional<Standardization>& standardization() const { return std_; }

  Dataset subset(const std::vector<Eigen::Index>& rows) const;
  Dataset with_targets(Vector targets) const;

  friend Dataset standardize(const Dataset& ds);
  friend bool operator==(const Dataset& a, const Dataset& b);

 private:
  Matrix X_;
  Vector y_;
  Task task_ = Task::regression;
  std::vector<std::string> names_;
  std::optional<Standardization> std_;
};

class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : std::runtime_error(what + " (line " + std::to_string(line) + ")"), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

enum class FileFormat { csv, libsvm };

Dataset load(const std::string& path, FileFormat format, Task task);
Dataset parse_csv(std::string_view text, Task task);
Dataset parse_libsvm(std::string_view text, Task task, Eigen::Index d = 0);
void save_csv(const Dataset& ds, const std::string& path);
std::string to_csv(const Dataset& ds);

enum class NoiseKind { label_flip, target_perturb };

struct NoiseSpec {
  double ratio = 0.0;
  NoiseKind kind = NoiseKind::label_flip;
  std::uint64_t seed = 0;
};

struct NoisyDataset {
  Dataset data;
  std::vector<Eigen::Index> corrupted;  // sorted
};

NoisyDataset inject_noise(const Dataset& ds, const NoiseSpec& spec);

struct SynthOptions {
  double noise_scale = 0.1;  // regression target noise
  double w0_scale = 1.0;     // regression generator magnitude
  double separation = 4.0;   // distance between class centres, in units of sigma
  std::optional<Vector> w0;  // overrides the random regression generator
};

struct Synthetic {
  Dataset data;
  Vector w0;        // regression generator
  Vector centre;    // classification: +1 class centre (the -1 centre is its negation)
};

Synthetic synthesize(Eigen::Index n, Eigen::Index d, Task task, std::uint64_t seed,
                     const SynthOptions& opt = {});

struct SplitResult {
  Dataset train;
  Dataset test;
  std::vector<Eigen::Index> train_rows;
  std::vector<Eigen::Index> test_rows;
};

SplitResult split(const Dataset& ds, double train_fraction, std::uint64_t seed);

// {n, d, task, seed, w0} descriptor.
struct SynthDescriptor {
  Eigen::Index n = 0;
  Eigen::Index d = 0;
  Task task = Task::regression;
  std::uint64_t seed = 0;
  std::optional<Vector> w0;
};
SynthDescriptor read_descriptor(const std::string& json_text);
std::string write_descriptor(const SynthDescriptor& desc);
Synthetic synthesize(const SynthDescriptor& desc, SynthOptions opt = {});

std::string_view to_string(Task t);
Task parse_task(std::string_view s);

}  // namespace agepath
