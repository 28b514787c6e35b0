#include "dcmi/data/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

#include "dcmi/seed.hpp"

namespace dcmi::data {

std::vector<std::size_t> domain_counts(const SyntheticSpec& spec) {
  if (!spec.counts.empty()) return spec.counts;
  std::vector<std::size_t> out;
  for (std::size_t j = 0; j < spec.num_domains; ++j) {
    const double n = static_cast<double>(spec.head_count) * std::pow(static_cast<double>(j + 1), -spec.power_exponent);
    out.push_back(std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(n))));
  }
  return out;
}

std::vector<std::string> validate(const SyntheticSpec& spec) {
  std::vector<std::string> problems;
  const auto counts = domain_counts(spec);
  const std::size_t m = counts.size();
  if (m == 0) problems.emplace_back("counts: at least one domain required (explicit counts or num_domains + head_count)");
  if (spec.counts.empty() && spec.head_count == 0 && spec.num_domains > 0) problems.emplace_back("head_count: must be >= 1");
  for (std::size_t j = 0; j < spec.counts.size(); ++j) {
    if (spec.counts[j] < 1) problems.push_back("counts[" + std::to_string(j) + "]: must be >= 1");
  }
  if (spec.positive_rates.size() != 1 && spec.positive_rates.size() != m) {
    problems.emplace_back("positive_rates: give one rate or one per domain");
  }
  for (double r : spec.positive_rates) {
    if (!(r > 0.0 && r < 1.0)) problems.emplace_back("positive_rates: each rate must be in (0,1)");
  }
  auto vocab_check = [&](const char* name, std::size_t vocab, std::size_t per_sample) {
    if (vocab == 0 && per_sample > 0) problems.push_back(std::string(name) + ": vocabulary of 0 with nonzero tokens per sample");
  };
  vocab_check("sentiment_vocab", spec.sentiment_vocab, spec.sentiment_tokens);
  vocab_check("domain_vocab", spec.domain_vocab, spec.domain_tokens);
  vocab_check("group_vocab", spec.group_vocab, spec.group_tokens);
  vocab_check("noise_vocab", spec.noise_vocab, spec.noise_tokens);
  if (spec.sentiment_tokens > 0 && spec.sentiment_vocab < 2) {
    problems.emplace_back("sentiment_vocab: need at least 2 tokens (one per polarity)");
  }
  if (spec.sentiment_tokens + spec.domain_tokens + spec.group_tokens + spec.noise_tokens == 0) {
    problems.emplace_back("tokens per sample: at least one token required");
  }
  if (!(spec.sentiment_purity >= 0.5 && spec.sentiment_purity <= 1.0)) {
    problems.emplace_back("sentiment_purity: must be in [0.5,1]");
  }
  if (!(spec.group_divergence >= 0.0 && spec.group_divergence <= 1.0)) {
    problems.emplace_back("group_divergence: must be in [0,1]");
  }
  if (!spec.groups.empty() && spec.groups.size() != m) problems.emplace_back("groups: one group id per domain");
  for (int g : spec.groups) {
    if (g < 0) problems.emplace_back("groups: ids must be >= 0");
  }
  for (int j : spec.inverted) {
    if (j < 0 || static_cast<std::size_t>(j) >= m) {
      problems.push_back("inverted: domain " + std::to_string(j) + " is out of range");
    }
  }
  if (!spec.domain_names.empty() && spec.domain_names.size() != m) {
    problems.emplace_back("domain_names: one name per domain");
  }
  return problems;
}

int group_of(const SyntheticSpec& spec, std::size_t domain) {
  return spec.groups.empty() ? 0 : spec.groups.at(domain);
}

bool is_inverted(const SyntheticSpec& spec, std::size_t domain) {
  return std::find(spec.inverted.begin(), spec.inverted.end(), static_cast<int>(domain)) != spec.inverted.end();
}

std::vector<int> polarity_map(const SyntheticSpec& spec, int group) {
  const std::size_t s = spec.sentiment_vocab;
  std::vector<int> polarity(s);
  for (std::size_t k = 0; k < s; ++k) polarity[k] = k < s / 2 ? +1 : -1;
  if (group == 0 || spec.group_divergence == 0.0) return polarity;
  std::vector<std::size_t> order(s);
  for (std::size_t k = 0; k < s; ++k) order[k] = k;
  std::mt19937_64 rng(derive_seed(spec.seed, 1000 + static_cast<std::uint64_t>(group)));
  std::shuffle(order.begin(), order.end(), rng);
  const auto flips = static_cast<std::size_t>(std::llround(spec.group_divergence * static_cast<double>(s)));
  for (std::size_t k = 0; k < flips; ++k) polarity[order[k]] = -polarity[order[k]];
  return polarity;
}

Dataset generate_synthetic(const SyntheticSpec& spec) {
  if (auto problems = validate(spec); !problems.empty()) {
    std::string msg = "invalid synthetic spec:";
    for (const auto& p : problems) msg += " " + p + ";";
    throw std::invalid_argument(msg);
  }
  const auto counts = domain_counts(spec);
  const std::size_t m = counts.size();
  std::vector<std::string> names = spec.domain_names;
  if (names.empty()) {
    for (std::size_t j = 0; j < m; ++j) names.push_back("domain" + std::to_string(j));
  }

  std::mt19937_64 rng(spec.seed);
  std::vector<Sample> samples;
  for (std::size_t j = 0; j < m; ++j) {
    const std::size_t n = counts[j];
    const double rate = spec.positive_rates.size() == 1 ? spec.positive_rates[0] : spec.positive_rates[j];
    auto positives = static_cast<std::size_t>(std::llround(rate * static_cast<double>(n)));
    if (n >= 2) positives = std::clamp<std::size_t>(positives, 1, n - 1);
    std::vector<int> labels(n, 0);
    std::fill(labels.begin(), labels.begin() + static_cast<std::ptrdiff_t>(positives), 1);
    std::shuffle(labels.begin(), labels.end(), rng);

    const int group = group_of(spec, j);
    const auto polarity = polarity_map(spec, group);
    std::vector<std::size_t> pools[2];  // [0] negative, [1] positive tokens under this mapping
    for (std::size_t k = 0; k < polarity.size(); ++k) pools[polarity[k] > 0 ? 1 : 0].push_back(k);
    const bool inverted = is_inverted(spec, j);

    std::bernoulli_distribution agree(spec.sentiment_purity);
    for (std::size_t i = 0; i < n; ++i) {
      const int label = labels[i];
      const int expressed = inverted ? 1 - label : label;
      std::vector<std::string> tokens;
      for (std::size_t k = 0; k < spec.sentiment_tokens; ++k) {
        const int pol = agree(rng) ? expressed : 1 - expressed;
        const auto& pool = pools[pol];
        if (pool.empty()) continue;
        std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
        tokens.push_back("s" + std::to_string(pool[pick(rng)]));
      }
      auto draw = [&](std::size_t count, std::size_t vocab, const std::string& prefix) {
        if (vocab == 0) return;
        std::uniform_int_distribution<std::size_t> pick(0, vocab - 1);
        for (std::size_t k = 0; k < count; ++k) tokens.push_back(prefix + std::to_string(pick(rng)));
      };
      draw(spec.domain_tokens, spec.domain_vocab, "d" + std::to_string(j) + "w");
      draw(spec.group_tokens, spec.group_vocab, "g" + std::to_string(group) + "w");
      draw(spec.noise_tokens, spec.noise_vocab, "n");
      std::shuffle(tokens.begin(), tokens.end(), rng);

      std::string text;
      for (const auto& t : tokens) {
        if (!text.empty()) text += ' ';
        text += t;
      }
      samples.push_back(Sample{samples.size(), std::move(text), label, static_cast<int>(j)});
    }
  }
  return Dataset(std::move(samples), 2, std::move(names));
}

}  // namespace dcmi::data
