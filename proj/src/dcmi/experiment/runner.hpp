#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "dcmi/experiment/config.hpp"
#include "dcmi/experiment/report.hpp"

namespace dcmi::experiment {

class BudgetError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Training config of one run: the variant's unused loss weights are zeroed so
// the report echoes what was actually optimized.
train::TrainConfig run_config(const ExperimentConfig& config, model::Variant variant, std::uint64_t seed);

struct Job {
  model::Variant variant = model::Variant::dcmi;
  std::uint64_t seed = 0;
  double lambda1 = 0.0;
  double lambda2 = 0.0;
};

// Trains every job on a pool of `workers` threads. Results come back in job
// order regardless of scheduling. A failing job records its error; the others
// still run. on_done is called from worker threads, one job at a time.
std::vector<RunOutcome> run_jobs(const ExperimentConfig& config, const data::Splits& splits,
                                 const std::vector<Job>& jobs, std::size_t workers,
                                 const std::function<void(const RunOutcome&, const train::TrainResult*)>& on_done = {});

struct SeedAggregate {
  MetricSummary macro;
  MetricSummary micro;
  std::vector<RunOutcome> runs;
  bool partial = false;
};
// n_seeds runs of one variant with seeds derived from config.base_seed.
SeedAggregate run_seeds(const ExperimentConfig& config, const data::Splits& splits, model::Variant variant,
                        std::size_t n_seeds);

struct ExperimentResult {
  std::vector<RunOutcome> runs;
  std::vector<std::string> domain_names;
  std::string aggregate;
  bool partial = false;
};

// Variant x seed matrix. When write_outputs is set, writes into
// config.output_dir: report_<variant>_<seed>.json, losses_<variant>_<seed>.csv,
// repr_<variant>_<seed>.csv (if requested) and aggregate.md, each staged to a
// temporary name and renamed on completion.
ExperimentResult run_experiment(const ExperimentConfig& config, bool write_outputs = true);

struct SweepResult {
  std::vector<SweepCell> cells;
  std::optional<std::size_t> best;
  std::vector<RunOutcome> runs;
  std::string aggregate;
  bool partial = false;
};

// Number of training runs a sweep would need.
std::size_t sweep_run_count(const ExperimentConfig& config);

// lambda1 x lambda2 grid with sweep.seeds seeds per cell over the variants
// that use lambda. Throws BudgetError (with a size estimate) when the run
// count exceeds sweep.max_runs. Writes sweep.json and aggregate.md.
SweepResult run_sweep(const ExperimentConfig& config, bool write_outputs = true);

}  // namespace dcmi::experiment
