#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace dcmi::data {

struct Sample {
  std::size_t id = 0;
  std::string text;
  int label = 0;
  int domain = 0;
};

class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Immutable collection of samples with C classes and M named domains.
class Dataset {
 public:
  Dataset() = default;
  // Throws DataError when a label or domain is out of range.
  Dataset(std::vector<Sample> samples, std::size_t num_classes, std::vector<std::string> domain_names);

  const std::vector<Sample>& samples() const { return samples_; }
  std::size_t size() const { return samples_.size(); }
  bool empty() const { return samples_.empty(); }
  std::size_t num_classes() const { return num_classes_; }
  std::size_t num_domains() const { return domain_names_.size(); }
  const std::vector<std::string>& domain_names() const { return domain_names_; }

  std::size_t count(std::size_t domain, std::size_t label) const;
  std::size_t domain_count(std::size_t domain) const;
  std::vector<std::size_t> class_counts() const;

  // Same classes and domains, only the selected samples (in the given order).
  Dataset subset(std::span<const std::size_t> indices) const;

 private:
  std::vector<Sample> samples_;
  std::size_t num_classes_ = 0;
  std::vector<std::string> domain_names_;
  std::vector<std::size_t> counts_;  // domain-major (domain, class) table
};

// JSONL with one {"text": str, "label": int, "domain": str} object per line.
// Domain ids follow first appearance. Errors cite the 1-based line number.
Dataset load_jsonl(const std::filesystem::path& path);
void save_jsonl(const Dataset& dataset, const std::filesystem::path& path);

struct Splits {
  Dataset train, val, test;
};

// Stratified by (domain, class): global sizes are round(N * val) and
// round(N * test); each cell gets its floor share and leftover slots go by
// largest remainder to cells that keep at least one training sample.
// Throws std::invalid_argument unless fractions are positive and sum to 1.
Splits split(const Dataset& dataset, std::array<double, 3> fractions, std::uint64_t seed);

// Keeps ceil(n / factor) samples of every nonempty (domain, class) cell.
Dataset downsample(const Dataset& dataset, std::size_t factor, std::uint64_t seed);

// Deferred class-balanced sampling weights: uniform before
// defer_fraction * total_epochs, inverse class frequency afterwards.
std::vector<double> drs_weights(const Dataset& dataset, std::size_t epoch, std::size_t total_epochs,
                                double defer_fraction = 0.8);

}  // namespace dcmi::data
