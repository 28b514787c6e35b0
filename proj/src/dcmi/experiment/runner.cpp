#include "dcmi/experiment/runner.hpp"

#include <algorithm>
#include <atomic>
#include <filesystem>
#include <mutex>
#include <numeric>
#include <thread>

#include "dcmi/io/atomic_file.hpp"
#include "dcmi/model/export.hpp"

namespace dcmi::experiment {

namespace fs = std::filesystem;

train::TrainConfig run_config(const ExperimentConfig& config, model::Variant variant, std::uint64_t seed) {
  train::TrainConfig t = config.train;
  t.variant = variant;
  t.seed = seed;
  const auto f = model::features(variant);
  if (!f.domain_classifier) t.lambda1 = 0.0;
  if (!f.contrastive) t.lambda2 = 0.0;
  return t;
}

std::vector<RunOutcome> run_jobs(const ExperimentConfig& config, const data::Splits& splits,
                                 const std::vector<Job>& jobs, std::size_t workers,
                                 const std::function<void(const RunOutcome&, const train::TrainResult*)>& on_done) {
  std::vector<RunOutcome> out(jobs.size());
  std::atomic<std::size_t> next{0};
  std::mutex done_mutex;

  auto worker = [&] {
    for (std::size_t i = next++; i < jobs.size(); i = next++) {
      const auto& job = jobs[i];
      auto& o = out[i];
      o.variant = job.variant;
      o.seed = job.seed;
      auto tc = run_config(config, job.variant, job.seed);
      if (model::features(job.variant).domain_classifier) tc.lambda1 = job.lambda1;
      if (model::features(job.variant).contrastive) tc.lambda2 = job.lambda2;
      o.lambda1 = tc.lambda1;
      o.lambda2 = tc.lambda2;
      std::optional<train::TrainResult> result;
      try {
        result = train::train(tc, splits);
        o.report = result->report;
      } catch (const std::exception& e) {
        o.error = e.what();
      }
      if (on_done) {
        std::lock_guard lock(done_mutex);
        on_done(o, result ? &*result : nullptr);
      }
    }
  };

  const std::size_t n = std::max<std::size_t>(1, std::min(workers, jobs.size()));
  if (n == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t k = 0; k < n; ++k) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  return out;
}

SeedAggregate run_seeds(const ExperimentConfig& config, const data::Splits& splits, model::Variant variant,
                        std::size_t n_seeds) {
  if (n_seeds < 1) throw std::invalid_argument("run_seeds: n_seeds must be >= 1");
  std::vector<Job> jobs;
  for (std::size_t k = 0; k < n_seeds; ++k) {
    jobs.push_back(Job{variant, run_seed(config, k), config.train.lambda1, config.train.lambda2});
  }
  SeedAggregate agg;
  agg.runs = run_jobs(config, splits, jobs, config.workers);
  std::vector<std::optional<double>> macro, micro;
  for (const auto& r : agg.runs) {
    if (!r.report) {
      agg.partial = true;
      continue;
    }
    macro.push_back(r.report->test.macro_auc);
    micro.push_back(r.report->test.micro_auc);
  }
  agg.macro = summarize_metric(macro);
  agg.micro = summarize_metric(micro);
  return agg;
}

namespace {

std::string run_name(model::Variant v, std::uint64_t seed) {
  return std::string(model::to_string(v)) + "_" + std::to_string(seed);
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw io::IoError("cannot create output directory " + dir.string());
}

void write_run_outputs(const ExperimentConfig& config, const data::Splits& splits, const RunOutcome& o,
                       const train::TrainResult* result) {
  if (!o.report) return;
  const auto name = run_name(o.variant, o.seed);
  io::write_file_atomic(config.output_dir / ("report_" + name + ".json"), report_json(*o.report));
  io::write_file_atomic(config.output_dir / ("losses_" + name + ".csv"), losses_csv(*o.report));
  if (config.export_representations && result && !splits.test.empty()) {
    std::vector<std::size_t> rows(splits.test.size());
    std::iota(rows.begin(), rows.end(), std::size_t{0});
    const auto batch = train::make_batch(splits.test, rows, result->vocab, o.report->config.max_len);
    std::vector<std::size_t> ids;
    for (const auto& s : splits.test.samples()) ids.push_back(s.id);
    model::export_representations(*result->model, batch, ids, config.output_dir / ("repr_" + name + ".csv"));
  }
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& config, bool write_outputs) {
  if (auto problems = check_config(config); !problems.empty()) throw ConfigError(problems);
  const auto splits = prepare_data(config);
  if (write_outputs) ensure_dir(config.output_dir);

  std::vector<Job> jobs;
  for (auto v : config.variants) {
    for (std::size_t k = 0; k < config.seeds; ++k) {
      jobs.push_back(Job{v, run_seed(config, k), config.train.lambda1, config.train.lambda2});
    }
  }
  std::string io_error;
  auto on_done = [&](const RunOutcome& o, const train::TrainResult* result) {
    if (!write_outputs || !io_error.empty()) return;
    try {
      write_run_outputs(config, splits, o, result);
    } catch (const std::exception& e) {
      io_error = e.what();
    }
  };

  ExperimentResult res;
  res.runs = run_jobs(config, splits, jobs, config.workers, on_done);
  res.domain_names = splits.train.domain_names();
  res.partial = std::any_of(res.runs.begin(), res.runs.end(), [](const RunOutcome& o) { return !o.report; });
  res.aggregate = aggregate_markdown(res.runs, res.domain_names, jobs.size());
  if (write_outputs) {
    if (!io_error.empty()) throw io::IoError(io_error);
    io::write_file_atomic(config.output_dir / "aggregate.md", res.aggregate);
  }
  return res;
}

namespace {

std::vector<model::Variant> sweep_variants(const ExperimentConfig& config) {
  std::vector<model::Variant> out;
  for (auto v : config.variants) {
    const auto f = model::features(v);
    if (f.domain_classifier || f.contrastive) out.push_back(v);
  }
  return out;
}

}  // namespace

std::size_t sweep_run_count(const ExperimentConfig& config) {
  if (!config.sweep) return 0;
  return config.sweep->cells() * sweep_variants(config).size() * config.sweep->seeds;
}

SweepResult run_sweep(const ExperimentConfig& config, bool write_outputs) {
  if (auto problems = check_config(config); !problems.empty()) throw ConfigError(problems);
  if (!config.sweep) throw ConfigError({"sweep: a sweep grid is required"});
  const auto& sw = *config.sweep;
  const auto variants = sweep_variants(config);
  if (variants.empty()) throw ConfigError({"variants: no listed variant uses lambda1 or lambda2"});

  const std::size_t runs = sweep_run_count(config);
  if (runs > sw.max_runs) {
    throw BudgetError("sweep needs " + std::to_string(runs) + " training runs (" + std::to_string(sw.lambda1.size()) +
                      " x " + std::to_string(sw.lambda2.size()) + " cells x " + std::to_string(variants.size()) +
                      " variants x " + std::to_string(sw.seeds) + " seeds, " + std::to_string(config.train.epochs) +
                      " epochs each); budget is sweep.max_runs = " + std::to_string(sw.max_runs));
  }
  const auto splits = prepare_data(config);
  if (write_outputs) ensure_dir(config.output_dir);

  std::vector<Job> jobs;
  for (double l1 : sw.lambda1)
    for (double l2 : sw.lambda2)
      for (auto v : variants)
        for (std::size_t k = 0; k < sw.seeds; ++k) jobs.push_back(Job{v, run_seed(config, k), l1, l2});

  SweepResult res;
  res.runs = run_jobs(config, splits, jobs, config.workers);
  std::size_t failed = 0;
  std::size_t j = 0;
  for (double l1 : sw.lambda1) {
    for (double l2 : sw.lambda2) {
      SweepCell cell{l1, l2, {}, {}, {}};
      std::vector<std::optional<double>> val, macro, micro;
      for (std::size_t k = 0; k < variants.size() * sw.seeds; ++k, ++j) {
        const auto& o = res.runs[j];
        if (!o.report) {
          ++failed;
          continue;
        }
        val.push_back(o.report->best_val_macro_auc);
        macro.push_back(o.report->test.macro_auc);
        micro.push_back(o.report->test.micro_auc);
      }
      cell.val_macro = summarize_metric(val);
      cell.test_macro = summarize_metric(macro);
      cell.test_micro = summarize_metric(micro);
      res.cells.push_back(cell);
    }
  }
  for (std::size_t i = 0; i < res.cells.size(); ++i) {
    const auto& m = res.cells[i].val_macro.mean;
    if (m && (!res.best || *m > *res.cells[*res.best].val_macro.mean)) res.best = i;
  }
  res.partial = failed > 0;
  res.aggregate = sweep_markdown(res.cells, res.best, failed);
  if (write_outputs) {
    io::write_file_atomic(config.output_dir / "sweep.json", sweep_json(res.cells, res.best));
    io::write_file_atomic(config.output_dir / "aggregate.md", res.aggregate);
  }
  return res;
}

}  // namespace dcmi::experiment
