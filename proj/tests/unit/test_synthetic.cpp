#include "doctest.h"

#include <cmath>
#include <sstream>

#include "dcmi/data/synthetic.hpp"
#include "dcmi/train/metrics.hpp"

using namespace dcmi::data;

namespace {

SyntheticSpec base_spec() {
  SyntheticSpec s;
  s.counts = {400, 200, 100};
  s.positive_rates = {0.3};
  s.sentiment_tokens = 4;
  s.seed = 17;
  return s;
}

// Counts sentiment tokens that are positive under the base mapping.
double unigram_score(const std::string& text, const std::vector<int>& polarity) {
  std::istringstream in(text);
  double score = 0.0;
  for (std::string t; in >> t;) {
    if (t.size() > 1 && t[0] == 's') score += polarity[std::stoul(t.substr(1))];
  }
  return score;
}

}  // namespace

TEST_CASE("spec validation reports each problem") {
  SyntheticSpec s;
  CHECK_FALSE(validate(s).empty());
  s = base_spec();
  CHECK(validate(s).empty());
  s.inverted = {5};
  s.sentiment_purity = 1.5;
  CHECK(validate(s).size() >= 2);
  CHECK_THROWS_AS(generate_synthetic(s), std::invalid_argument);
}

TEST_CASE("power-law counts") {
  SyntheticSpec s;
  s.num_domains = 4;
  s.head_count = 100;
  s.power_exponent = 1.0;
  CHECK(domain_counts(s) == std::vector<std::size_t>{100, 50, 33, 25});
}

TEST_CASE("generated sizes and positive rates follow the settings") {
  const auto s = base_spec();
  const auto d = generate_synthetic(s);
  CHECK(d.size() == 700);
  for (std::size_t j = 0; j < 3; ++j) {
    const double n = static_cast<double>(d.domain_count(j));
    const double sigma = std::sqrt(0.3 * 0.7 / n);
    CHECK(std::abs(static_cast<double>(d.count(j, 1)) / n - 0.3) <= 3.0 * sigma);
  }
}

TEST_CASE("generation is deterministic in the seed") {
  auto s = base_spec();
  const auto a = generate_synthetic(s);
  const auto b = generate_synthetic(s);
  CHECK(a.samples()[123].text == b.samples()[123].text);
  s.seed = 18;
  const auto c = generate_synthetic(s);
  bool differs = false;
  for (std::size_t i = 0; i < a.size(); ++i) differs |= a.samples()[i].text != c.samples()[i].text;
  CHECK(differs);
}

TEST_CASE("inverted domains reverse the unigram signal") {
  auto s = base_spec();
  s.inverted = {2};
  const auto d = generate_synthetic(s);
  const auto polarity = polarity_map(s, 0);
  for (std::size_t j = 0; j < 3; ++j) {
    std::vector<double> scores;
    std::vector<int> labels;
    for (const auto& x : d.samples()) {
      if (x.domain != static_cast<int>(j)) continue;
      scores.push_back(unigram_score(x.text, polarity));
      labels.push_back(x.label);
    }
    const auto auc = dcmi::train::auc(scores, labels);
    REQUIRE(auc);
    if (j == 2) {
      CHECK(*auc < 0.5);
    } else {
      CHECK(*auc > 0.5);
    }
  }
}

TEST_CASE("group divergence flips a fraction of polarities") {
  auto s = base_spec();
  s.groups = {0, 0, 1};
  s.group_divergence = 0.5;
  const auto p0 = polarity_map(s, 0), p1 = polarity_map(s, 1);
  std::size_t flipped = 0;
  for (std::size_t k = 0; k < p0.size(); ++k) flipped += p0[k] != p1[k];
  CHECK(flipped == p0.size() / 2);
  CHECK(group_of(s, 2) == 1);
  CHECK(is_inverted(s, 1) == false);
}
