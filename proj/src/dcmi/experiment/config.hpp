#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "dcmi/data/dataset.hpp"
#include "dcmi/data/synthetic.hpp"
#include "dcmi/model/dcmi_model.hpp"
#include "dcmi/train/trainer.hpp"

namespace dcmi::experiment {

struct SweepConfig {
  std::vector<double> lambda1{0.0};
  std::vector<double> lambda2{0.0};
  std::size_t seeds = 1;
  std::size_t max_runs = 400;
  std::size_t cells() const { return lambda1.size() * lambda2.size(); }
};

struct ExperimentConfig {
  std::optional<data::SyntheticSpec> synthetic;
  std::filesystem::path jsonl;  // used when synthetic is unset

  std::array<double, 3> split{0.8, 0.1, 0.1};
  std::size_t downsample_train = 1;
  std::size_t downsample_val = 1;

  std::vector<model::Variant> variants;
  train::TrainConfig train;  // variant and seed are filled per run
  std::size_t seeds = 5;
  std::uint64_t base_seed = 0;
  std::optional<SweepConfig> sweep;

  std::filesystem::path output_dir = "dcmi_out";
  bool export_representations = false;
  std::size_t workers = 1;

  std::filesystem::path source_dir;  // relative jsonl paths resolve against this
};

// Raised when a config cannot be used; carries every diagnostic.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(std::vector<std::string> diagnostics);
  const std::vector<std::string>& diagnostics() const { return diagnostics_; }

 private:
  std::vector<std::string> diagnostics_;
};

// Named lambda presets: asc (50, 6), dsc (30, 15), rfd (4, 3).
std::optional<std::pair<double, double>> preset_lambdas(std::string_view name);

// Parses JSON text and collects "field: problem" diagnostics for every
// schema or semantic violation. Returns nullopt when diagnostics is nonempty.
std::optional<ExperimentConfig> parse_config(std::string_view json_text, std::vector<std::string>& diagnostics,
                                             const std::filesystem::path& source_dir = {});

// A standalone synthetic settings object (the data.synthetic schema); seed
// defaults to 0. Diagnostics use the data.synthetic field prefix.
std::optional<data::SyntheticSpec> parse_synthetic(std::string_view json_text, std::vector<std::string>& diagnostics);

// Semantic checks shared by validate and run (also applied by parse_config).
std::vector<std::string> check_config(const ExperimentConfig& config);

// Throws ConfigError.
ExperimentConfig load_config(const std::filesystem::path& path);
ExperimentConfig load_config_string(std::string_view json_text, const std::filesystem::path& source_dir = {});

// 0 followed by points-1 values log-spaced from min up to max (inclusive).
std::vector<double> log_grid(double max, std::size_t points, double min = 0.01);

// Training seed of the k-th seed run.
std::uint64_t run_seed(const ExperimentConfig& config, std::size_t k);

// Dataset ingestion or generation, then split and down-sampling.
data::Splits prepare_data(const ExperimentConfig& config);

}  // namespace dcmi::experiment
