#pragma once

#include "agepath/dataset.hpp"
#include "agepath/path.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace agepath {

enum class Command { path, acs, bench, verify };
std::string_view to_string(Command c);
Command parse_command(std::string_view s);

struct RunConfig {
  Command command = Command::path;
  ModelKind model = ModelKind::lasso;
  SpRegularizer reg;
  Hyper hyper;
  double lambda_min = 0.1;
  double lambda_max = 20.0;
  double acs_step = 0.5;
  std::string data;  // csv or libsvm file; empty -> synthetic
  Eigen::Index synth_n = 100;
  Eigen::Index synth_d = 5;
  double noise = 0.0;
  bool standardize = false;  // zero-mean unit-variance features
  std::uint64_t seed = 1;
  std::string out;  // output directory; empty -> nothing written
  int trials = 20;  // bench
  TraceConfig trace;
  AcsConfig acs;
  double verify_step = 0.0;  // dense ACS grid for verify; 0 -> 1e-3 (lmax - lmin)
  double rhs_scale = 1.0;    // fault injection hook for verify

  void validate() const;
};

// Every random stream of a run comes from cfg.seed through this.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

// File or synthetic data, then noise. `seed` replaces cfg.seed (bench trials).
Dataset make_dataset(const RunConfig& cfg, std::uint64_t seed);
Dataset make_dataset(const RunConfig& cfg);

struct PathRun {
  AgePath path;
  double seconds = 0.0;
  std::string summary_json() const;
};
// Writes path.jsonl, path.csv and summary.json under cfg.out.
PathRun run_path(const RunConfig& cfg);

struct AcsRun {
  AgePath path;  // grid solutions as points, no events
  double seconds = 0.0;
  long inner_iterations = 0;
  std::string summary_json() const;
};
// Writes acs.jsonl and acs.csv under cfg.out.
AcsRun run_acs(const RunConfig& cfg);

struct BenchTrial {
  std::uint64_t seed = 0;
  double gaga_seconds = 0.0;
  double acs_seconds = 0.0;
  double max_deviation = 0.0;   // sup over the ACS grid
  double agree_fraction = 0.0;  // grid points within 1e-3
  std::size_t events = 0, jumps = 0;
};

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;
};
MeanStd mean_std(const std::vector<double>& xs);

struct BenchReport {
  std::vector<BenchTrial> trials;
  MeanStd gaga, acs;
  double speedup = 0.0;  // mean ACS time over mean GAGA time
  std::string to_json() const;
};
// Writes bench.json under cfg.out.
BenchReport run_bench(const RunConfig& cfg);

struct VerifyCheck {
  std::string name;
  double value = 0.0;
  double limit = 0.0;
  bool pass = false;
};

struct FdRow {
  double lambda = 0.0;
  bool usable = false;
  double worst_rel = 0.0;
};

struct VerifyReport {
  std::vector<VerifyCheck> checks;
  std::vector<double> segment_deviation;
  std::vector<FdRow> fd_table;
  std::size_t turning = 0, jumps = 0, restarts = 0;
  bool pass() const;
  std::string to_json() const;
};
// Writes verify.json under cfg.out.
VerifyReport run_verify(const RunConfig& cfg);

}  // namespace agepath
