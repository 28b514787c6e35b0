#include "dcmi/experiment/report.hpp"

#include <cmath>
#include <cstdio>
#include <map>

#include "json.hpp"

namespace dcmi::experiment {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

ordered_json maybe(const std::optional<double>& v) { return v ? ordered_json(*v) : ordered_json(nullptr); }
ordered_json maybe(double v) { return std::isnan(v) ? ordered_json(nullptr) : ordered_json(v); }

ordered_json config_json(const train::TrainConfig& c) {
  ordered_json j;
  j["variant"] = std::string(model::to_string(c.variant));
  j["seed"] = c.seed;
  j["lambda1"] = c.lambda1;
  j["lambda2"] = c.lambda2;
  j["lr"] = c.lr;
  j["epochs"] = c.epochs;
  j["batch_size"] = c.batch_size;
  j["drs"] = c.drs;
  j["drs_defer_fraction"] = c.drs_defer_fraction;
  j["dim"] = c.dim;
  j["embedding_dim"] = c.embedding_dim;
  j["hidden_dim"] = c.hidden_dim;
  j["dropout"] = c.dropout;
  j["embedding_init_std"] = c.embedding_init_std;
  j["vocab_size"] = c.vocab_size;
  j["max_len"] = c.max_len;
  j["tau_min"] = c.tau_min;
  j["mask_init_std"] = c.mask_init_std;
  j["compensate"] = c.compensate;
  j["eval_domain"] = c.eval_domain == model::EvalDomain::argmax ? "argmax" : "record";
  return j;
}

std::string number(double x, const char* fmt) {
  char buf[64];
  std::snprintf(buf, sizeof buf, fmt, x);
  return buf;
}

std::string cell(const MetricSummary& s) {
  if (!s.mean) return "n/a";
  std::string out = number(100.0 * *s.mean, "%.1f");
  if (s.count > 1) out += " ± " + number(100.0 * s.stddev, "%.1f");
  return out;
}

}  // namespace

std::string report_json(const train::RunReport& r) {
  ordered_json j;
  j["variant"] = std::string(model::to_string(r.config.variant));
  j["seed"] = r.config.seed;
  j["config"] = config_json(r.config);
  j["test"]["macro_auc"] = maybe(r.test.macro_auc);
  j["test"]["micro_auc"] = maybe(r.test.micro_auc);
  ordered_json domains = ordered_json::array();
  for (std::size_t d = 0; d < r.test.per_domain.size(); ++d) {
    const auto& m = r.test.per_domain[d];
    ordered_json e;
    e["name"] = d < r.domain_names.size() ? r.domain_names[d] : std::to_string(d);
    e["samples"] = m.samples;
    e["positives"] = m.positives;
    e["auc"] = maybe(m.auc);
    domains.push_back(e);
  }
  j["test"]["domains"] = domains;
  ordered_json skipped = ordered_json::array();
  for (auto d : r.test.skipped_domains) skipped.push_back(d < r.domain_names.size() ? r.domain_names[d] : std::to_string(d));
  j["test"]["skipped_domains"] = skipped;
  j["best_epoch"] = r.best_epoch;
  j["best_val_macro_auc"] = maybe(r.best_val_macro_auc);
  ordered_json epochs = ordered_json::array();
  for (const auto& e : r.epochs) {
    ordered_json t;
    t["epoch"] = e.epoch;
    t["l_sup"] = maybe(e.l_sup);
    t["l_dom"] = maybe(e.l_dom);
    t["l_con"] = maybe(e.l_con);
    t["val_macro_auc"] = maybe(e.val_macro_auc);
    t["val_micro_auc"] = maybe(e.val_micro_auc);
    epochs.push_back(t);
  }
  j["epochs"] = epochs;
  j["clamped_compensations"] = r.clamped_compensations;
  return j.dump(2) + "\n";
}

std::string losses_csv(const train::RunReport& r) {
  auto field = [](double v) { return std::isnan(v) ? std::string() : number(v, "%.9g"); };
  auto opt = [](const std::optional<double>& v) { return v ? number(*v, "%.9g") : std::string(); };
  std::string out = "epoch,l_sup,l_dom,l_con,val_macro_auc,val_micro_auc\n";
  for (const auto& e : r.epochs) {
    out += std::to_string(e.epoch) + "," + field(e.l_sup) + "," + field(e.l_dom) + "," + field(e.l_con) + "," +
           opt(e.val_macro_auc) + "," + opt(e.val_micro_auc) + "\n";
  }
  return out;
}

MetricSummary summarize_metric(const std::vector<std::optional<double>>& values) {
  std::vector<double> defined;
  for (const auto& v : values)
    if (v) defined.push_back(*v);
  MetricSummary s;
  if (defined.empty()) return s;
  const auto t = train::summarize(defined);
  s.mean = t.mean;
  s.stddev = t.stddev;
  s.count = t.count;
  return s;
}

std::string aggregate_markdown(const std::vector<RunOutcome>& runs, const std::vector<std::string>& domain_names,
                               std::size_t expected_runs) {
  // Variants in first-seen order.
  std::vector<model::Variant> order;
  std::map<model::Variant, std::vector<const train::RunReport*>> by_variant;
  std::vector<const RunOutcome*> failed;
  for (const auto& r : runs) {
    if (!by_variant.contains(r.variant)) order.push_back(r.variant);
    auto& list = by_variant[r.variant];
    if (r.report) {
      list.push_back(&*r.report);
    } else {
      failed.push_back(&r);
    }
  }
  std::size_t completed = 0;
  for (const auto& [v, list] : by_variant) completed += list.size();

  std::string out = "# Aggregate results\n\n";
  if (!failed.empty() || completed < expected_runs) {
    out += "**PARTIAL**: " + std::to_string(completed) + " of " + std::to_string(expected_runs) +
           " runs completed.\n\n";
    for (const auto* f : failed) {
      out += "- " + std::string(model::to_string(f->variant)) + " seed " + std::to_string(f->seed) + ": " + f->error +
             "\n";
    }
    out += "\n";
  }
  out += "AUC (%), mean ± sample std over seeds.\n\n";
  out += "| Model | Macro | Micro | Seeds |\n|---|---|---|---|\n";
  for (auto v : order) {
    std::vector<std::optional<double>> macro, micro;
    for (const auto* r : by_variant[v]) {
      macro.push_back(r->test.macro_auc);
      micro.push_back(r->test.micro_auc);
    }
    out += "| " + std::string(model::to_string(v)) + " | " + cell(summarize_metric(macro)) + " | " +
           cell(summarize_metric(micro)) + " | " + std::to_string(by_variant[v].size()) + " |\n";
  }

  out += "\n## Per-domain AUC (%)\n\n| Domain |";
  for (auto v : order) out += " " + std::string(model::to_string(v)) + " |";
  out += "\n|---|";
  for (std::size_t i = 0; i < order.size(); ++i) out += "---|";
  out += "\n";
  std::map<std::size_t, std::size_t> skips;
  for (std::size_t d = 0; d < domain_names.size(); ++d) {
    out += "| " + domain_names[d] + " |";
    for (auto v : order) {
      std::vector<std::optional<double>> vals;
      for (const auto* r : by_variant[v]) {
        if (d < r->test.per_domain.size()) vals.push_back(r->test.per_domain[d].auc);
        for (auto s : r->test.skipped_domains)
          if (s == d) ++skips[d];
      }
      out += " " + cell(summarize_metric(vals)) + " |";
    }
    out += "\n";
  }
  if (!skips.empty()) {
    out += "\nDomains excluded from macro AUC in some runs (single-class test cell):";
    for (const auto& [d, n] : skips) out += " " + domain_names[d] + " (" + std::to_string(n) + " runs)";
    out += "\n";
  }
  return out;
}

std::string sweep_markdown(const std::vector<SweepCell>& cells, std::optional<std::size_t> best,
                           std::size_t failed_runs) {
  std::string out = "# Lambda sweep\n\n";
  if (failed_runs > 0) out += "**PARTIAL**: " + std::to_string(failed_runs) + " runs aborted.\n\n";
  if (best) {
    out += "Best cell by validation macro AUC: lambda1 = " + number(cells[*best].lambda1, "%g") +
           ", lambda2 = " + number(cells[*best].lambda2, "%g") + "\n\n";
  }
  out += "| lambda1 | lambda2 | Val macro | Test macro | Test micro |\n|---|---|---|---|---|\n";
  for (std::size_t i = 0; i < cells.size(); ++i) {
    const auto& c = cells[i];
    const bool mark = best && *best == i;
    auto wrap = [&](const std::string& s) { return mark ? "**" + s + "**" : s; };
    out += "| " + wrap(number(c.lambda1, "%g")) + " | " + wrap(number(c.lambda2, "%g")) + " | " +
           wrap(cell(c.val_macro)) + " | " + wrap(cell(c.test_macro)) + " | " + wrap(cell(c.test_micro)) + " |\n";
  }
  return out;
}

std::string sweep_json(const std::vector<SweepCell>& cells, std::optional<std::size_t> best) {
  ordered_json j;
  ordered_json list = ordered_json::array();
  for (const auto& c : cells) {
    ordered_json e;
    e["lambda1"] = c.lambda1;
    e["lambda2"] = c.lambda2;
    e["val_macro_auc"] = maybe(c.val_macro.mean);
    e["test_macro_auc"] = maybe(c.test_macro.mean);
    e["test_micro_auc"] = maybe(c.test_micro.mean);
    e["runs"] = c.val_macro.count;
    list.push_back(e);
  }
  j["cells"] = list;
  if (best) {
    j["best"] = {{"lambda1", cells[*best].lambda1}, {"lambda2", cells[*best].lambda2}};
  } else {
    j["best"] = nullptr;
  }
  return j.dump(2) + "\n";
}

}  // namespace dcmi::experiment
