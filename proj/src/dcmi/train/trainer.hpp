#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "dcmi/data/dataset.hpp"
#include "dcmi/model/dcmi_model.hpp"
#include "dcmi/text/vocab.hpp"
#include "dcmi/train/metrics.hpp"

namespace dcmi::train {

struct TrainConfig {
  model::Variant variant = model::Variant::dcmi;
  double lambda1 = 50.0;
  double lambda2 = 6.0;
  double lr = 3e-5;
  std::size_t epochs = 5;
  std::size_t batch_size = 64;
  std::uint64_t seed = 0;
  bool drs = true;
  double drs_defer_fraction = 0.8;

  std::size_t dim = 64;  // representation size d
  std::size_t embedding_dim = 32;
  std::size_t hidden_dim = 64;
  double dropout = 0.5;
  double embedding_init_std = 1.0;
  std::size_t vocab_size = 5000;
  std::size_t max_len = 128;

  double tau_min = 0.0025;
  double mask_init_std = 0.0;
  bool pin_masks = false;
  bool compensate = true;
  model::EvalDomain eval_domain = model::EvalDomain::record;
  bool probe_routing = true;
};

// Empty when valid; otherwise "field: problem" messages.
std::vector<std::string> validate(const TrainConfig& config);

struct EpochTrace {
  std::size_t epoch = 0;
  // Batch means; NaN when the term is not part of the variant's objective.
  double l_sup = std::numeric_limits<double>::quiet_NaN();
  double l_dom = std::numeric_limits<double>::quiet_NaN();
  double l_con = std::numeric_limits<double>::quiet_NaN();
  std::optional<double> val_macro_auc;
  std::optional<double> val_micro_auc;
};

struct RunReport {
  TrainConfig config;
  std::vector<std::string> domain_names;
  std::size_t best_epoch = 0;
  std::vector<EpochTrace> epochs;
  Evaluation test;
  std::optional<double> best_val_macro_auc;
  std::size_t clamped_compensations = 0;
  std::vector<double> batch_sup_trace;  // L_sup of every batch in order; not serialized
};

struct TrainResult {
  std::unique_ptr<model::DcmiModel> model;
  text::Vocab vocab;
  RunReport report;
};

class TrainingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

model::Batch make_batch(const data::Dataset& dataset, std::span<const std::size_t> rows, const text::Vocab& vocab,
                        std::size_t max_len);

model::ModelConfig model_config(const TrainConfig& config, std::size_t vocab_size, std::size_t num_classes,
                                std::size_t num_domains);

// Scores a split in eval mode (dataset-provided domain mask unless
// eval_domain is argmax).
Evaluation evaluate(model::DcmiModel& model, const text::Vocab& vocab, const data::Dataset& split,
                    std::size_t max_len, model::EvalDomain mode = model::EvalDomain::record);

// Full training run on the given splits; returns the best-validation
// snapshot, evaluated on the test split. Throws TrainingError (with epoch and
// batch context) when the loss diverges or routing is violated.
TrainResult train(const TrainConfig& config, const data::Splits& splits);

}  // namespace dcmi::train
