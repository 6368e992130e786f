#pragma once

#include "iar/dataset.hpp"
#include "iar/problems.hpp"
#include "iar/solver.hpp"

#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace iar {

enum class Scaling { none, minmax };

struct ExperimentConfig {
  std::string dataset;
  std::string test_dataset;  // optional
  LoadOptions load;
  std::vector<Index> hidden;  // empty: linear sigmoid model
  Scaling scale = Scaling::none;
  Index runs = 1;
  std::string out_dir = ".";
  SolverConfig solver;
  /// Exact training/testing losses are traced only up to this many samples.
  Index exact_loss_max_samples = 100000;

  void validate() const;
};

struct RunSummary {
  Index run = 0;
  std::uint64_t seed = 0;
  std::string status;  // stop reason, or "error: ..." when the run failed
  Index iterations = 0;
  Index successful = 0;
  double total_cm = 0.0;
  double train_loss = 0.0;
  double test_loss = 0.0;
  double classification_rate = 0.0;

  bool ok() const { return !status.starts_with("error"); }
};

struct RunOutcome {
  RunSummary summary;
  Vector x;
  std::vector<TraceEvent> trace;
};

/// One seeded run on in-memory data. Testing metrics are NaN without a test set.
RunOutcome run_single(std::shared_ptr<const Dataset> train, const Dataset* test,
                      const std::vector<Index>& hidden,
                      const SolverConfig& solver, Index run_index,
                      Index exact_loss_max_samples = 100000);

/// Mean over the successful runs of a summary table.
RunSummary mean_summary(const std::vector<RunSummary>& runs);

struct ExperimentResult {
  std::vector<RunSummary> runs;
  RunSummary mean;
};

/// Loads the data, executes config.runs seeded runs (seed, seed + 1, ...),
/// and writes trace_<run>.csv plus summary.csv into out_dir. A failing run is
/// recorded and the remaining runs continue.
ExperimentResult run_experiment(const ExperimentConfig& config, std::ostream& log);

/// Trace CSV: header row, one row per outer iteration.
void write_trace_csv(std::ostream& out, const std::vector<TraceEvent>& trace);
std::vector<TraceEvent> read_trace_csv(std::istream& in);

void write_summary_csv(std::ostream& out, const std::vector<RunSummary>& runs,
                       const RunSummary& mean);

/// Cumulative CM rebuilt from the per-iteration work columns.
std::vector<double> recompute_cm(const std::vector<TraceEvent>& trace, Index components);

}  // namespace iar
