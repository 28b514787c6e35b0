#include "dcmi/dcmi.h"

#include <cstdlib>
#include <cstring>
#include <string>
#include <vector>

#include "dcmi/data/dataset.hpp"
#include "dcmi/experiment/config.hpp"
#include "dcmi/experiment/report.hpp"
#include "dcmi/experiment/runner.hpp"
#include "dcmi/io/atomic_file.hpp"
#include "dcmi/train/metrics.hpp"

struct dcmi_experiment {
  dcmi::experiment::ExperimentConfig config;
  std::vector<dcmi::experiment::RunOutcome> runs;
  std::string aggregate;
};

namespace {

thread_local std::string last_error;

dcmi_status fail(dcmi_status status, std::string message) {
  last_error = std::move(message);
  return status;
}

char* duplicate(const std::string& s) {
  auto* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out) std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

std::string join_lines(const std::vector<std::string>& lines) {
  std::string out;
  for (const auto& l : lines) out += l + "\n";
  return out;
}

// Maps library exceptions onto status codes.
template <typename F>
dcmi_status guarded(F&& body) {
  last_error.clear();
  try {
    return body();
  } catch (const dcmi::experiment::ConfigError& e) {
    return fail(DCMI_INVALID_CONFIG, join_lines(e.diagnostics()));
  } catch (const dcmi::experiment::BudgetError& e) {
    return fail(DCMI_BUDGET_EXCEEDED, e.what());
  } catch (const dcmi::io::IoError& e) {
    return fail(DCMI_IO_ERROR, e.what());
  } catch (const dcmi::data::DataError& e) {
    return fail(DCMI_IO_ERROR, e.what());
  } catch (const std::invalid_argument& e) {
    return fail(DCMI_INVALID_ARGUMENT, e.what());
  } catch (const std::exception& e) {
    return fail(DCMI_RUNTIME_ERROR, e.what());
  } catch (...) {
    return fail(DCMI_RUNTIME_ERROR, "unknown error");
  }
}

dcmi_status store_result(dcmi_experiment* exp, std::vector<dcmi::experiment::RunOutcome> runs, std::string aggregate,
                         bool partial) {
  exp->runs = std::move(runs);
  exp->aggregate = std::move(aggregate);
  if (!partial) return DCMI_OK;
  for (const auto& r : exp->runs) {
    if (!r.report) {
      return fail(DCMI_RUNTIME_ERROR, std::string(dcmi::model::to_string(r.variant)) + " seed " +
                                          std::to_string(r.seed) + ": " + r.error);
    }
  }
  return fail(DCMI_RUNTIME_ERROR, "some runs aborted");
}

}  // namespace

extern "C" {

const char* dcmi_version(void) { return "0.1.0"; }

const char* dcmi_last_error(void) { return last_error.c_str(); }

const char* dcmi_status_name(dcmi_status status) {
  switch (status) {
    case DCMI_OK: return "ok";
    case DCMI_INVALID_ARGUMENT: return "invalid argument";
    case DCMI_INVALID_CONFIG: return "invalid config";
    case DCMI_IO_ERROR: return "I/O error";
    case DCMI_RUNTIME_ERROR: return "runtime error";
    case DCMI_BUDGET_EXCEEDED: return "budget exceeded";
  }
  return "unknown status";
}

void dcmi_string_free(char* s) { std::free(s); }

dcmi_status dcmi_experiment_load(const char* path, dcmi_experiment** out) {
  if (!path || !out) return fail(DCMI_INVALID_ARGUMENT, "path and out must not be null");
  *out = nullptr;
  return guarded([&] {
    auto config = dcmi::experiment::load_config(path);
    *out = new dcmi_experiment{std::move(config), {}, {}};
    return DCMI_OK;
  });
}

dcmi_status dcmi_experiment_load_string(const char* json, const char* base_dir, dcmi_experiment** out) {
  if (!json || !out) return fail(DCMI_INVALID_ARGUMENT, "json and out must not be null");
  *out = nullptr;
  return guarded([&] {
    auto config = dcmi::experiment::load_config_string(json, base_dir ? base_dir : "");
    *out = new dcmi_experiment{std::move(config), {}, {}};
    return DCMI_OK;
  });
}

void dcmi_experiment_free(dcmi_experiment* exp) { delete exp; }

dcmi_status dcmi_experiment_set_output_dir(dcmi_experiment* exp, const char* dir) {
  if (!exp || !dir) return fail(DCMI_INVALID_ARGUMENT, "experiment and dir must not be null");
  if (!*dir) return fail(DCMI_INVALID_ARGUMENT, "output dir must not be empty");
  exp->config.output_dir = dir;
  return DCMI_OK;
}

dcmi_status dcmi_experiment_set_workers(dcmi_experiment* exp, size_t workers) {
  if (!exp) return fail(DCMI_INVALID_ARGUMENT, "experiment must not be null");
  if (workers < 1) return fail(DCMI_INVALID_ARGUMENT, "workers must be >= 1");
  exp->config.workers = workers;
  return DCMI_OK;
}

dcmi_status dcmi_experiment_apply_preset(dcmi_experiment* exp, const char* name) {
  if (!exp || !name) return fail(DCMI_INVALID_ARGUMENT, "experiment and name must not be null");
  const auto l = dcmi::experiment::preset_lambdas(name);
  if (!l) return fail(DCMI_INVALID_CONFIG, std::string("preset: unknown preset \"") + name + "\" (expected asc, dsc or rfd)");
  exp->config.train.lambda1 = l->first;
  exp->config.train.lambda2 = l->second;
  return DCMI_OK;
}

dcmi_status dcmi_experiment_run(dcmi_experiment* exp) {
  if (!exp) return fail(DCMI_INVALID_ARGUMENT, "experiment must not be null");
  return guarded([&] {
    auto res = dcmi::experiment::run_experiment(exp->config);
    return store_result(exp, std::move(res.runs), std::move(res.aggregate), res.partial);
  });
}

dcmi_status dcmi_experiment_sweep(dcmi_experiment* exp) {
  if (!exp) return fail(DCMI_INVALID_ARGUMENT, "experiment must not be null");
  return guarded([&] {
    auto res = dcmi::experiment::run_sweep(exp->config);
    return store_result(exp, std::move(res.runs), std::move(res.aggregate), res.partial);
  });
}

size_t dcmi_experiment_result_count(const dcmi_experiment* exp) { return exp ? exp->runs.size() : 0; }

dcmi_status dcmi_experiment_result_json(const dcmi_experiment* exp, size_t index, char** out) {
  if (!exp || !out) return fail(DCMI_INVALID_ARGUMENT, "experiment and out must not be null");
  *out = nullptr;
  if (index >= exp->runs.size()) return fail(DCMI_INVALID_ARGUMENT, "result index out of range");
  const auto& r = exp->runs[index];
  if (!r.report) return fail(DCMI_RUNTIME_ERROR, r.error);
  *out = duplicate(dcmi::experiment::report_json(*r.report));
  return *out ? DCMI_OK : fail(DCMI_RUNTIME_ERROR, "out of memory");
}

dcmi_status dcmi_experiment_result_auc(const dcmi_experiment* exp, size_t index, double* macro, double* micro) {
  if (!exp || !macro || !micro) return fail(DCMI_INVALID_ARGUMENT, "arguments must not be null");
  if (index >= exp->runs.size()) return fail(DCMI_INVALID_ARGUMENT, "result index out of range");
  const auto& r = exp->runs[index];
  if (!r.report) return fail(DCMI_RUNTIME_ERROR, r.error);
  if (!r.report->test.macro_auc || !r.report->test.micro_auc) return fail(DCMI_INVALID_ARGUMENT, "AUC undefined");
  *macro = *r.report->test.macro_auc;
  *micro = *r.report->test.micro_auc;
  return DCMI_OK;
}

dcmi_status dcmi_experiment_aggregate(const dcmi_experiment* exp, char** out) {
  if (!exp || !out) return fail(DCMI_INVALID_ARGUMENT, "experiment and out must not be null");
  *out = duplicate(exp->aggregate);
  return *out ? DCMI_OK : fail(DCMI_RUNTIME_ERROR, "out of memory");
}

dcmi_status dcmi_validate_file(const char* path, char** diagnostics) {
  if (!path || !diagnostics) return fail(DCMI_INVALID_ARGUMENT, "path and diagnostics must not be null");
  *diagnostics = nullptr;
  return guarded([&] {
    try {
      dcmi::experiment::load_config(path);
    } catch (const dcmi::experiment::ConfigError& e) {
      *diagnostics = duplicate(join_lines(e.diagnostics()));
      return fail(DCMI_INVALID_CONFIG, join_lines(e.diagnostics()));
    }
    *diagnostics = duplicate("ok\n");
    return DCMI_OK;
  });
}

dcmi_status dcmi_validate_string(const char* json, const char* base_dir, char** diagnostics) {
  if (!json || !diagnostics) return fail(DCMI_INVALID_ARGUMENT, "json and diagnostics must not be null");
  *diagnostics = nullptr;
  return guarded([&] {
    std::vector<std::string> diags;
    if (!dcmi::experiment::parse_config(json, diags, base_dir ? base_dir : "")) {
      *diagnostics = duplicate(join_lines(diags));
      return fail(DCMI_INVALID_CONFIG, join_lines(diags));
    }
    *diagnostics = duplicate("ok\n");
    return DCMI_OK;
  });
}

dcmi_status dcmi_auc(const double* scores, const int* labels, size_t n, double* out) {
  if (!out || (n > 0 && (!scores || !labels))) return fail(DCMI_INVALID_ARGUMENT, "arguments must not be null");
  for (size_t i = 0; i < n; ++i) {
    if (labels[i] != 0 && labels[i] != 1) return fail(DCMI_INVALID_ARGUMENT, "labels must be 0 or 1");
  }
  return guarded([&] {
    const auto a = dcmi::train::auc({scores, n}, {labels, n});
    if (!a) return fail(DCMI_INVALID_ARGUMENT, "AUC undefined: labels contain a single class");
    *out = *a;
    return DCMI_OK;
  });
}

dcmi_status dcmi_log_grid(double max, size_t points, double min, double* out) {
  if (!out) return fail(DCMI_INVALID_ARGUMENT, "out must not be null");
  return guarded([&] {
    const auto grid = dcmi::experiment::log_grid(max, points, min);
    std::copy(grid.begin(), grid.end(), out);
    return DCMI_OK;
  });
}

dcmi_status dcmi_generate_synthetic_jsonl(const char* spec_json, const char* path) {
  if (!spec_json || !path) return fail(DCMI_INVALID_ARGUMENT, "spec_json and path must not be null");
  return guarded([&] {
    std::vector<std::string> diags;
    const auto spec = dcmi::experiment::parse_synthetic(spec_json, diags);
    if (!spec) return fail(DCMI_INVALID_CONFIG, join_lines(diags));
    dcmi::data::save_jsonl(dcmi::data::generate_synthetic(*spec), path);
    return DCMI_OK;
  });
}

}  // extern "C"
