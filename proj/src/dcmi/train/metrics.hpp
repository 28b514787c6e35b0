#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace dcmi::train {

// Probability that a random positive outranks a random negative, ties
// counted as 1/2, via the Mann-Whitney rank statistic with average ranks.
// nullopt when the labels contain a single class. Labels are 0/1.
std::optional<double> auc(std::span<const double> scores, std::span<const int> labels);

struct DomainMetric {
  std::size_t samples = 0;
  std::size_t positives = 0;
  std::optional<double> auc;  // nullopt: single-class cell, excluded from macro
};

struct Evaluation {
  std::optional<double> macro_auc;
  std::optional<double> micro_auc;
  std::vector<DomainMetric> per_domain;
  std::vector<std::size_t> skipped_domains;  // domains with samples but undefined AUC
};

// Macro: unweighted mean over domains with a defined AUC. Micro: AUC of all
// samples pooled. A label counts as positive when it equals 1.
Evaluation evaluate_scores(std::span<const double> scores, std::span<const int> labels,
                           std::span<const int> domains, std::size_t num_domains);

struct Summary {
  double mean = 0.0;
  double stddev = 0.0;  // sample standard deviation; 0 for a single value
  std::size_t count = 0;
};
Summary summarize(std::span<const double> values);

}  // namespace dcmi::train
