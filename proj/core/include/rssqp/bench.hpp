// SPDX-License-Identifier: Apache-2.0
//
// Experiment grid runner and record serialization.
#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "rssqp/sqp.hpp"

namespace rssqp {

struct ExperimentGrid {
  std::vector<std::string> problems;
  std::vector<double> sigmas{10.0, 1.0, 0.1};
  std::vector<int> sample_sizes{50, 500, 5000, 50000, 100000};
  std::vector<int> checkpoints{10, 50, 200, 500, 1000, 5000};
  int trials = 20;
  std::uint64_t master_seed = 20240101;
  // Run one solve per checkpoint tier instead of snapshotting one trajectory.
  bool independent_runs = false;
  // Measure wall time per record; off by default so output is reproducible.
  bool wall_time = false;

  /// Throws InvalidArgument on an invalid grid.
  void validate() const;
  std::size_t record_count() const;
};

struct TrialRecord {
  std::string problem;
  double sigma = 0.0;
  int sample_size = 0;
  int trial = 0;
  int checkpoint_iter = 0;
  double log10_dist = 0.0;
  double phi = 0.0;
  std::optional<double> chi;
  double rho = 0.0;
  double alpha = 0.0;
  double zeta = 0.0;
  int accepted_steps = 0;
  double wall_time_ms = 0.0;
  std::uint64_t seed = 0;
  // Set on failed rows; numeric fields are then not meaningful.
  std::optional<std::string> error;

  bool operator==(const TrialRecord&) const = default;
};

/// Seed of one trial, a pure function of the master seed and the grid coordinates.
std::uint64_t trial_seed(std::uint64_t master_seed, const std::string& problem,
                         std::size_t sigma_index, std::size_t sample_index, int trial);

/// jobs <= 0 means RSSQP_JOBS from the environment, else 1.
int resolve_jobs(int jobs);

/// Records sorted by (problem order, sigma order, sample-size order, trial, checkpoint).
/// Per-trial failures become rows with `error` set.
std::vector<TrialRecord> run_experiment_grid(const ExperimentGrid& grid, const SolverConfig& config,
                                             int jobs = 0);

enum class RecordFormat { Csv, Json };

RecordFormat parse_record_format(const std::string& s);

inline constexpr const char* kCsvHeader =
    "problem,sigma,sample_size,trial,checkpoint_iter,log10_dist,phi,chi,rho,alpha,zeta,"
    "accepted_steps,wall_time_ms,seed";

void write_records(const std::vector<TrialRecord>& records, std::ostream& out, RecordFormat format);

/// Throws std::runtime_error naming the path on IO failure.
void write_records(const std::vector<TrialRecord>& records, const std::filesystem::path& path,
                   RecordFormat format);

/// Inverse of write_records.
std::vector<TrialRecord> parse_records(std::istream& in, RecordFormat format);

/// `key = value` lines mirroring the bench flags; '#' starts a comment.
/// Lists are comma separated. Unknown keys throw InvalidArgument.
struct BenchFileConfig {
  ExperimentGrid grid;
  std::optional<std::string> out;
  std::optional<RecordFormat> format;
  std::optional<int> jobs;
};

BenchFileConfig parse_bench_config(std::istream& in, const BenchFileConfig& base = {});

}  // namespace rssqp
