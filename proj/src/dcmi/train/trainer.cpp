#include "dcmi/train/trainer.hpp"

#include <algorithm>
#include <numeric>
#include <random>

#include "dcmi/autodiff/ops.hpp"
#include "dcmi/model/components.hpp"
#include "dcmi/seed.hpp"
#include "dcmi/train/adam.hpp"

namespace dcmi::train {

namespace {

enum Stream : std::uint64_t { kShuffle = 10, kDropout = 11 };

std::vector<std::string> texts_of(const data::Dataset& ds) {
  std::vector<std::string> out;
  out.reserve(ds.size());
  for (const auto& s : ds.samples()) out.push_back(s.text);
  return out;
}

// Running mean of one loss term over an epoch.
struct TermMean {
  double sum = 0.0;
  std::size_t n = 0;
  void add(const ad::Var& v) {
    if (!v.valid()) return;
    sum += v.value().item();
    ++n;
  }
  double get() const { return n ? sum / static_cast<double>(n) : std::numeric_limits<double>::quiet_NaN(); }
};

}  // namespace

std::vector<std::string> validate(const TrainConfig& c) {
  std::vector<std::string> out;
  if (c.lambda1 < 0.0 || !std::isfinite(c.lambda1)) out.emplace_back("lambda1: must be a finite value >= 0");
  if (c.lambda2 < 0.0 || !std::isfinite(c.lambda2)) out.emplace_back("lambda2: must be a finite value >= 0");
  if (!(c.lr > 0.0)) out.emplace_back("lr: must be > 0");
  if (c.epochs < 1) out.emplace_back("epochs: must be >= 1");
  if (c.batch_size < 1) out.emplace_back("batch_size: must be >= 1");
  if (!(c.drs_defer_fraction >= 0.0 && c.drs_defer_fraction <= 1.0)) out.emplace_back("drs_defer_fraction: must be in [0,1]");
  if (c.dim < 1) out.emplace_back("dim: must be >= 1");
  if (c.embedding_dim < 1) out.emplace_back("embedding_dim: must be >= 1");
  if (c.hidden_dim < 1) out.emplace_back("hidden_dim: must be >= 1");
  if (!(c.dropout >= 0.0 && c.dropout < 1.0)) out.emplace_back("dropout: must be in [0,1)");
  if (!(c.embedding_init_std > 0.0)) out.emplace_back("embedding_init_std: must be > 0");
  if (c.vocab_size < 2) out.emplace_back("vocab_size: must be >= 2");
  if (c.max_len < 1) out.emplace_back("max_len: must be >= 1");
  if (!(c.tau_min > 0.0 && c.tau_min <= 1.0)) out.emplace_back("tau_min: must be in (0,1]");
  if (!(c.mask_init_std >= 0.0)) out.emplace_back("mask_init_std: must be >= 0");
  return out;
}

model::Batch make_batch(const data::Dataset& dataset, std::span<const std::size_t> rows, const text::Vocab& vocab,
                        std::size_t max_len) {
  model::Batch b;
  b.tokens.reserve(rows.size());
  for (auto r : rows) {
    const auto& s = dataset.samples().at(r);
    auto ids = text::tokenize(s.text, vocab, max_len);
    // Texts without tokens are encoded as a single unknown token.
    if (ids.empty()) ids.push_back(text::Vocab::kUnknown);
    b.tokens.push_back(std::move(ids));
    b.labels.push_back(s.label);
    b.domains.push_back(s.domain);
  }
  return b;
}

model::ModelConfig model_config(const TrainConfig& c, std::size_t vocab_size, std::size_t num_classes,
                                std::size_t num_domains) {
  model::ModelConfig mc;
  mc.variant = c.variant;
  mc.encoder = text::EncoderConfig{.vocab_size = vocab_size,
                                   .embedding_dim = c.embedding_dim,
                                   .hidden_dim = c.hidden_dim,
                                   .output_dim = c.dim,
                                   .dropout = c.dropout,
                                   .embedding_init_std = c.embedding_init_std};
  mc.num_classes = num_classes;
  mc.num_domains = num_domains;
  mc.tau_min = c.tau_min;
  mc.mask_init_std = c.mask_init_std;
  mc.pin_masks = c.pin_masks;
  mc.compensate = c.compensate;
  return mc;
}

Evaluation evaluate(model::DcmiModel& model, const text::Vocab& vocab, const data::Dataset& split,
                    std::size_t max_len, model::EvalDomain mode) {
  if (split.empty()) throw std::invalid_argument("cannot evaluate an empty split");
  std::vector<std::size_t> rows(split.size());
  std::iota(rows.begin(), rows.end(), std::size_t{0});
  const auto batch = make_batch(split, rows, vocab, max_len);
  const auto scores = model.positive_scores(batch, mode);
  return evaluate_scores(scores, batch.labels, batch.domains, split.num_domains());
}

TrainResult train(const TrainConfig& config, const data::Splits& splits) {
  if (auto problems = validate(config); !problems.empty()) throw std::invalid_argument(problems.front());
  const auto& train_set = splits.train;
  if (train_set.empty()) throw std::invalid_argument("training split is empty");

  TrainResult result;
  result.vocab = text::build_vocab(texts_of(train_set), config.vocab_size);
  result.model = std::make_unique<model::DcmiModel>(
      model_config(config, result.vocab.size(), train_set.num_classes(), train_set.num_domains()), config.seed);
  auto& model = *result.model;
  auto& report = result.report;
  report.config = config;
  report.domain_names = train_set.domain_names();

  Adam adam(model.parameters(), AdamOptions{.lr = config.lr});
  std::mt19937_64 shuffle_rng(derive_seed(config.seed, kShuffle));
  std::mt19937_64 dropout_rng(derive_seed(config.seed, kDropout));

  const std::size_t n = train_set.size();
  const std::size_t batches = (n + config.batch_size - 1) / config.batch_size;
  std::vector<ad::Tensor> best_state;
  std::optional<double> best_score;

  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    std::vector<std::size_t> order(n);
    const auto weights = config.drs ? data::drs_weights(train_set, epoch, config.epochs, config.drs_defer_fraction)
                                    : std::vector<double>{};
    const bool resample = config.drs && std::any_of(weights.begin(), weights.end(),
                                                    [&](double w) { return w != weights.front(); });
    if (resample) {
      std::discrete_distribution<std::size_t> pick(weights.begin(), weights.end());
      for (auto& o : order) o = pick(shuffle_rng);
    } else {
      std::iota(order.begin(), order.end(), std::size_t{0});
      std::shuffle(order.begin(), order.end(), shuffle_rng);
    }

    TermMean sup, dom, con;
    for (std::size_t b = 0; b < batches; ++b) {
      const double tau = model::anneal_temperature(b, batches, config.tau_min);
      model.set_temperature(tau);
      const auto first = order.begin() + static_cast<std::ptrdiff_t>(b * config.batch_size);
      const auto last = order.begin() + static_cast<std::ptrdiff_t>(std::min(n, (b + 1) * config.batch_size));
      const std::vector<std::size_t> rows(first, last);
      const auto batch = make_batch(train_set, rows, result.vocab, config.max_len);

      if (config.probe_routing && epoch == 0 && b == 0) {
        const auto probe = model::probe_routing(model, batch, tau);
        if (!probe.ok()) throw TrainingError("gradient routing violated: " + probe.violations.front());
      }

      adam.zero_grad();
      const auto context = "epoch " + std::to_string(epoch) + ", batch " + std::to_string(b);
      try {
        ad::Graph g;
        const auto losses = model.forward(g, batch,
                                          model::StepSettings{.tau = tau,
                                                              .lambda1 = config.lambda1,
                                                              .lambda2 = config.lambda2,
                                                              .mode = text::Mode::train,
                                                              .dropout_rng = &dropout_rng});
        g.backward(losses.total);
        sup.add(losses.sup);
        dom.add(losses.dom);
        con.add(losses.con);
        report.batch_sup_trace.push_back(losses.sup.value().item());
        adam.step();
      } catch (const ad::NumericError& e) {
        throw TrainingError("training diverged at " + context + ": " + e.what());
      }
    }

    EpochTrace trace{.epoch = epoch, .l_sup = sup.get(), .l_dom = dom.get(), .l_con = con.get(), .val_macro_auc = {}, .val_micro_auc = {}};
    if (!splits.val.empty()) {
      const auto ev = evaluate(model, result.vocab, splits.val, config.max_len, config.eval_domain);
      trace.val_macro_auc = ev.macro_auc;
      trace.val_micro_auc = ev.micro_auc;
    }
    // Selection by validation macro AUC, falling back to micro when no domain
    // is defined; with no usable validation signal the latest epoch wins.
    const auto score = trace.val_macro_auc ? trace.val_macro_auc : trace.val_micro_auc;
    if (best_state.empty() || (!score && !best_score) || (score && (!best_score || *score > *best_score))) {
      best_state = model.state();
      best_score = score;
      report.best_epoch = epoch;
      report.best_val_macro_auc = trace.val_macro_auc;
    }
    report.epochs.push_back(trace);
  }

  model.load_state(best_state);
  report.clamped_compensations = model.clamped_coordinates();
  if (!splits.test.empty()) {
    report.test = evaluate(model, result.vocab, splits.test, config.max_len, config.eval_domain);
  }
  return result;
}

}  // namespace dcmi::train
