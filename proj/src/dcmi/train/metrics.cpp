#include "dcmi/train/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace dcmi::train {

std::optional<double> auc(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size()) throw std::invalid_argument("auc: scores and labels differ in length");
  const std::size_t n = scores.size();
  std::size_t pos = 0;
  for (int y : labels) pos += y == 1 ? 1 : 0;
  const std::size_t neg = n - pos;
  if (pos == 0 || neg == 0) return std::nullopt;

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

  // Sum of 1-based average ranks of the positives; exact in double for
  // any realistic n since ranks are multiples of 1/2.
  double rank_sum = 0.0;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j + 1 < n && scores[order[j + 1]] == scores[order[i]]) ++j;
    const double avg_rank = (static_cast<double>(i + 1) + static_cast<double>(j + 1)) / 2.0;
    for (std::size_t k = i; k <= j; ++k) {
      if (labels[order[k]] == 1) rank_sum += avg_rank;
    }
    i = j + 1;
  }
  const double p = static_cast<double>(pos);
  const double u = rank_sum - p * (p + 1.0) / 2.0;
  return u / (p * static_cast<double>(neg));
}

Evaluation evaluate_scores(std::span<const double> scores, std::span<const int> labels,
                           std::span<const int> domains, std::size_t num_domains) {
  if (scores.size() != labels.size() || scores.size() != domains.size()) {
    throw std::invalid_argument("evaluate: scores, labels and domains differ in length");
  }
  Evaluation ev;
  ev.micro_auc = auc(scores, labels);
  ev.per_domain.resize(num_domains);
  std::vector<std::vector<double>> s(num_domains);
  std::vector<std::vector<int>> y(num_domains);
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const auto j = static_cast<std::size_t>(domains[i]);
    if (j >= num_domains) throw std::out_of_range("evaluate: domain id out of range");
    s[j].push_back(scores[i]);
    y[j].push_back(labels[i]);
  }
  double total = 0.0;
  std::size_t defined = 0;
  for (std::size_t j = 0; j < num_domains; ++j) {
    auto& dm = ev.per_domain[j];
    dm.samples = s[j].size();
    dm.positives = static_cast<std::size_t>(std::count(y[j].begin(), y[j].end(), 1));
    dm.auc = auc(s[j], y[j]);
    if (dm.auc) {
      total += *dm.auc;
      ++defined;
    } else if (dm.samples > 0) {
      ev.skipped_domains.push_back(j);
    }
  }
  if (defined > 0) ev.macro_auc = total / static_cast<double>(defined);
  return ev;
}

Summary summarize(std::span<const double> values) {
  Summary s;
  s.count = values.size();
  if (values.empty()) return s;
  if (std::all_of(values.begin(), values.end(), [&](double v) { return v == values.front(); })) {
    s.mean = values.front();
    return s;
  }
  s.mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - s.mean) * (v - s.mean);
    s.stddev = std::sqrt(ss / static_cast<double>(values.size() - 1));
  }
  return s;
}

}  // namespace dcmi::train
