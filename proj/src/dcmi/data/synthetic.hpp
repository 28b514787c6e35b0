#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "dcmi/data/dataset.hpp"

namespace dcmi::data {

// Recipe for a binary multi-domain text benchmark. Each sample is a bag of
//   sentiment tokens  s<k>      polarity follows the domain's group mapping
//   domain tokens     d<j>w<r>  identify the domain
//   group tokens      g<g>w<r>  shared by every domain of a similarity group
//   noise tokens      n<r>      uninformative
// Inverted domains store the opposite label of the polarity their text expresses.
struct SyntheticSpec {
  // Per-domain sample counts. When empty, counts follow a power law:
  // round(head_count * (j + 1)^-power_exponent), at least 1, for num_domains domains.
  std::vector<std::size_t> counts;
  std::size_t num_domains = 0;
  std::size_t head_count = 0;
  double power_exponent = 1.0;

  // Fraction of class-1 samples; one value for all domains or one per domain.
  std::vector<double> positive_rates{0.5};

  std::size_t sentiment_vocab = 40;
  std::size_t sentiment_tokens = 3;
  double sentiment_purity = 0.8;  // chance a sentiment token agrees with the expressed polarity
  std::size_t domain_vocab = 8;
  std::size_t domain_tokens = 1;
  std::size_t group_vocab = 0;
  std::size_t group_tokens = 0;
  std::size_t noise_vocab = 50;
  std::size_t noise_tokens = 4;

  // Similarity group per domain (empty = one group). Group 0 uses the base
  // polarity mapping; every other group flips a group_divergence fraction of
  // the sentiment tokens.
  std::vector<int> groups;
  double group_divergence = 0.0;
  std::vector<int> inverted;

  std::vector<std::string> domain_names;  // optional; defaults to domain<j>
  std::uint64_t seed = 0;
};

// Empty when the settings are valid; otherwise one message per problem.
std::vector<std::string> validate(const SyntheticSpec& spec);

std::vector<std::size_t> domain_counts(const SyntheticSpec& spec);
// +1 / -1 per sentiment token under the given group's mapping.
std::vector<int> polarity_map(const SyntheticSpec& spec, int group);
int group_of(const SyntheticSpec& spec, std::size_t domain);
bool is_inverted(const SyntheticSpec& spec, std::size_t domain);

// Deterministic for a fixed spec (including seed). Throws std::invalid_argument
// when validate() reports problems.
Dataset generate_synthetic(const SyntheticSpec& spec);

}  // namespace dcmi::data
