// dcmi command-line runner. Talks to the library only through dcmi.h.
//
//   dcmi run <config> [--out DIR] [--workers N] [--preset asc|dsc|rfd]
//   dcmi sweep <config> [--out DIR] [--workers N] [--preset ...]
//   dcmi validate <config>
//
// Exit codes: 0 success, 1 runtime abort or I/O failure, 2 invalid config.

#include <cstdio>
#include <string>

#include "CLI11.hpp"
#include "dcmi/dcmi.h"

namespace {

int exit_code(dcmi_status s) {
  switch (s) {
    case DCMI_OK: return 0;
    case DCMI_INVALID_CONFIG:
    case DCMI_INVALID_ARGUMENT:
    case DCMI_BUDGET_EXCEEDED: return 2;
    default: return 1;
  }
}

// One-line cause: the first line of the library's message.
std::string first_line(const char* msg) {
  std::string s = msg ? msg : "";
  if (auto nl = s.find('\n'); nl != std::string::npos) s.resize(nl);
  return s;
}

int report_failure(const char* what, dcmi_status s) {
  std::fprintf(stderr, "dcmi %s: %s: %s\n", what, dcmi_status_name(s), first_line(dcmi_last_error()).c_str());
  return exit_code(s);
}

struct RunOptions {
  std::string config;
  std::string out;
  std::size_t workers = 0;
  std::string preset;
};

int execute(const RunOptions& opt, bool sweep) {
  const char* what = sweep ? "sweep" : "run";
  dcmi_experiment* exp = nullptr;
  dcmi_status s = dcmi_experiment_load(opt.config.c_str(), &exp);
  if (s != DCMI_OK) return report_failure(what, s);
  if (!opt.out.empty() && (s = dcmi_experiment_set_output_dir(exp, opt.out.c_str())) != DCMI_OK) {
    dcmi_experiment_free(exp);
    return report_failure(what, s);
  }
  if (opt.workers > 0 && (s = dcmi_experiment_set_workers(exp, opt.workers)) != DCMI_OK) {
    dcmi_experiment_free(exp);
    return report_failure(what, s);
  }
  if (!opt.preset.empty() && (s = dcmi_experiment_apply_preset(exp, opt.preset.c_str())) != DCMI_OK) {
    dcmi_experiment_free(exp);
    return report_failure(what, s);
  }

  s = sweep ? dcmi_experiment_sweep(exp) : dcmi_experiment_run(exp);
  char* aggregate = nullptr;
  if ((s == DCMI_OK || s == DCMI_RUNTIME_ERROR) && dcmi_experiment_aggregate(exp, &aggregate) == DCMI_OK) {
    std::fputs(aggregate, stdout);
    dcmi_string_free(aggregate);
  }
  const int code = s == DCMI_OK ? 0 : report_failure(what, s);
  dcmi_experiment_free(exp);
  return code;
}

int validate(const std::string& config) {
  char* diagnostics = nullptr;
  const dcmi_status s = dcmi_validate_file(config.c_str(), &diagnostics);
  if (diagnostics) {
    std::fputs(diagnostics, s == DCMI_OK ? stdout : stderr);
    dcmi_string_free(diagnostics);
  } else if (s != DCMI_OK) {
    std::fprintf(stderr, "%s\n", first_line(dcmi_last_error()).c_str());
  }
  return exit_code(s);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-domain imbalanced text classification experiments"};
  app.set_version_flag("--version", std::string(dcmi_version()));
  app.require_subcommand(1);

  RunOptions run_opt, sweep_opt;
  std::string validate_path;
  auto add_run_flags = [](CLI::App* sub, RunOptions& o) {
    sub->add_option("config", o.config, "Experiment config (JSON)")->required();
    sub->add_option("--out", o.out, "Output directory (overrides output.dir)");
    sub->add_option("--workers", o.workers, "Parallel training runs")->check(CLI::PositiveNumber);
    sub->add_option("--preset", o.preset, "Lambda preset")->check(CLI::IsMember({"asc", "dsc", "rfd"}));
  };
  auto* run = app.add_subcommand("run", "Train every variant x seed and write reports");
  add_run_flags(run, run_opt);
  auto* sweep = app.add_subcommand("sweep", "Grid search over lambda1 x lambda2");
  add_run_flags(sweep, sweep_opt);
  auto* val = app.add_subcommand("validate", "Check a config without running anything");
  val->add_option("config", validate_path, "Experiment config (JSON)")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  if (*run) return execute(run_opt, false);
  if (*sweep) return execute(sweep_opt, true);
  return validate(validate_path);
}
