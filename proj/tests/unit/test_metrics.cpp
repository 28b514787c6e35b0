#include "doctest.h"

#include <random>

#include "dcmi/train/metrics.hpp"

using namespace dcmi::train;

namespace {

// O(n^2) pair count: positives above negatives, ties worth one half.
double pair_auc(const std::vector<double>& s, const std::vector<int>& y) {
  double wins = 0.0, pairs = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (y[i] != 1) continue;
    for (std::size_t j = 0; j < s.size(); ++j) {
      if (y[j] != 0) continue;
      pairs += 1.0;
      wins += s[i] > s[j] ? 1.0 : s[i] == s[j] ? 0.5 : 0.0;
    }
  }
  return wins / pairs;
}

}  // namespace

TEST_CASE("auc on small hand-checked inputs") {
  CHECK(*auc(std::vector<double>{0.1, 0.4, 0.35, 0.8}, std::vector<int>{0, 0, 1, 1}) == doctest::Approx(0.75));
  CHECK(*auc(std::vector<double>{1, 2, 3}, std::vector<int>{0, 1, 1}) == 1.0);
  CHECK(*auc(std::vector<double>{3, 2, 1}, std::vector<int>{0, 1, 1}) == 0.0);
  CHECK(*auc(std::vector<double>{5, 5, 5, 5}, std::vector<int>{0, 1, 0, 1}) == 0.5);
  CHECK_FALSE(auc(std::vector<double>{1, 2}, std::vector<int>{1, 1}).has_value());
  CHECK_THROWS(auc(std::vector<double>{1, 2}, std::vector<int>{1}));
}

TEST_CASE("auc agrees with pair counting, ties included") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 2 + rng() % 60;
    std::vector<double> s(n);
    std::vector<int> y(n);
    for (std::size_t i = 0; i < n; ++i) {
      s[i] = static_cast<double>(rng() % 7);
      y[i] = static_cast<int>(rng() % 2);
    }
    y[0] = 0;
    y[1] = 1;
    CHECK(std::abs(*auc(s, y) - pair_auc(s, y)) < 1e-12);
  }
}

TEST_CASE("auc is invariant under strictly increasing transforms") {
  std::mt19937_64 rng(6);
  std::normal_distribution<double> n(0.0, 1.0);
  std::vector<double> s(50), t(50);
  std::vector<int> y(50);
  for (std::size_t i = 0; i < 50; ++i) {
    s[i] = n(rng);
    t[i] = std::exp(3.0 * s[i]) + 1.0;
    y[i] = static_cast<int>(i % 2);
  }
  CHECK(*auc(s, y) == *auc(t, y));
}

TEST_CASE("macro skips single-class domains; micro pools everything") {
  const std::vector<double> s{0.9, 0.1, 0.8, 0.2, 0.7, 0.6};
  const std::vector<int> y{1, 0, 1, 0, 1, 1};
  const std::vector<int> d{0, 0, 1, 1, 2, 2};
  const auto ev = evaluate_scores(s, y, d, 4);
  CHECK(*ev.macro_auc == 1.0);
  CHECK(ev.micro_auc.has_value());
  CHECK(ev.skipped_domains == std::vector<std::size_t>{2});
  CHECK(ev.per_domain[3].samples == 0);
  CHECK(ev.per_domain[2].positives == 2);
}

TEST_CASE("summarize uses the sample standard deviation") {
  const auto one = summarize(std::vector<double>{0.7});
  CHECK(one.mean == 0.7);
  CHECK(one.stddev == 0.0);
  const auto two = summarize(std::vector<double>{1.0, 3.0});
  CHECK(two.mean == 2.0);
  CHECK(two.stddev == doctest::Approx(std::sqrt(2.0)));
  CHECK(two.count == 2);
}
