#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "dcmi/model/dcmi_model.hpp"
#include "dcmi/train/trainer.hpp"

namespace dcmi::experiment {

// Outcome of one (variant, seed) training run.
struct RunOutcome {
  model::Variant variant = model::Variant::dcmi;
  std::uint64_t seed = 0;
  double lambda1 = 0.0;
  double lambda2 = 0.0;
  std::optional<train::RunReport> report;  // unset when the run aborted
  std::string error;
};

// Pretty-printed JSON; undefined metrics are null and no wall-clock data is
// included, so identical runs serialize identically.
std::string report_json(const train::RunReport& report);

// epoch,l_sup,l_dom,l_con,val_macro_auc,val_micro_auc; absent values are empty.
std::string losses_csv(const train::RunReport& report);

struct MetricSummary {
  std::optional<double> mean;
  double stddev = 0.0;
  std::size_t count = 0;
};
// Mean and sample standard deviation over the defined values only.
MetricSummary summarize_metric(const std::vector<std::optional<double>>& values);

// Markdown tables: variants x (Macro, Micro), then domains x variants, as
// "mean ± std" percentages. Aborted runs mark the aggregate as partial.
std::string aggregate_markdown(const std::vector<RunOutcome>& runs, const std::vector<std::string>& domain_names,
                               std::size_t expected_runs);

// One row per (lambda1, lambda2) cell with mean validation and test macro
// AUC; the best validation cell is marked.
struct SweepCell {
  double lambda1 = 0.0;
  double lambda2 = 0.0;
  MetricSummary val_macro;
  MetricSummary test_macro;
  MetricSummary test_micro;
};
std::string sweep_markdown(const std::vector<SweepCell>& cells, std::optional<std::size_t> best,
                           std::size_t failed_runs);
std::string sweep_json(const std::vector<SweepCell>& cells, std::optional<std::size_t> best);

}  // namespace dcmi::experiment
