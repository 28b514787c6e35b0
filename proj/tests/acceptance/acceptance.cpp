// Acceptance suite: one PASS/FAIL line per criterion.
//
//   acceptance            run all eight
//   acceptance 2 5        run only the listed criteria
//
// Exit status is nonzero when any selected criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "dcmi/autodiff/gradcheck.hpp"
#include "dcmi/autodiff/ops.hpp"
#include "dcmi/data/synthetic.hpp"
#include "dcmi/experiment/runner.hpp"
#include "dcmi/model/components.hpp"
#include "dcmi/model/dcmi_model.hpp"
#include "dcmi/train/metrics.hpp"
#include "dcmi/train/trainer.hpp"

#ifndef DCMI_CONFIG_DIR
#define DCMI_CONFIG_DIR "configs"
#endif

namespace ad = dcmi::ad;
namespace fs = std::filesystem;
using namespace dcmi;
using model::Variant;

namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
};

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

std::string fmt(const char* f, double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, x);
  return buf;
}

// ---------------------------------------------------------------------------
// 1. Gradient correctness

model::ModelConfig small_model(Variant v, std::mt19937_64& rng) {
  model::ModelConfig c;
  c.variant = v;
  c.encoder = {.vocab_size = 16, .embedding_dim = 4, .hidden_dim = 6, .output_dim = 8, .dropout = 0.0,
               .embedding_init_std = 1.0};
  c.num_classes = 2;
  c.num_domains = 3;
  c.mask_init_std = std::uniform_real_distribution<double>(0.1, 1.0)(rng);
  return c;
}

model::Batch random_batch(std::mt19937_64& rng, std::size_t n, std::size_t vocab, std::size_t domains) {
  model::Batch b;
  std::uniform_int_distribution<std::size_t> tok(1, vocab - 1), len(1, 6);
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<std::size_t> seq(len(rng));
    for (auto& t : seq) t = tok(rng);
    b.tokens.push_back(seq);
    b.labels.push_back(static_cast<int>(rng() % 2));
    b.domains.push_back(static_cast<int>(rng() % domains));
  }
  return b;
}

double direct_compensation(double v, double tau, double tau_min) {
  return tau * (std::cosh(v / tau) + 1.0) / (tau_min * (std::cosh(v) + 1.0));
}

Verdict gradient_correctness() {
  Stopwatch sw;
  std::mt19937_64 rng(2024);
  double worst = 0.0, worst_comp = 0.0;
  std::string where;
  for (int cfg = 0; cfg < 20; ++cfg) {
    model::DcmiModel m(small_model(Variant::dcmi, rng), rng());
    const auto batch = random_batch(rng, 4, 16, 3);
    const double tau = std::uniform_real_distribution<double>(0.05, 1.0)(rng);
    model::StepSettings step{.tau = tau,
                             .lambda1 = std::uniform_real_distribution<double>(0.5, 5.0)(rng),
                             .lambda2 = std::uniform_real_distribution<double>(0.5, 5.0)(rng),
                             .mode = text::Mode::eval};
    // Stop-gradient inputs are frozen at the unperturbed point for the
    // numerical side; the analytic side treats them as constants anyway.
    model::DetachedInputs frozen;
    {
      ad::Graph g;
      frozen = m.forward(g, batch, step).detached;
    }
    step.detached = &frozen;
    const auto params = m.parameters();
    using Pick = std::function<ad::Var(const model::Losses&)>;
    const std::pair<const char*, Pick> terms[] = {
        {"L_sup", [](const model::Losses& l) { return l.sup; }},
        {"L_dom", [](const model::Losses& l) { return l.dom; }},
        {"L_con", [](const model::Losses& l) { return l.con; }},
        {"L", [](const model::Losses& l) { return l.total; }},
    };
    for (const auto& [name, pick] : terms) {
      auto build = [&](ad::Graph& g) { return pick(m.forward(g, batch, step)); };
      // Gradients below 1e-6 are compared on the absolute scale 1e-10, the
      // roundoff level of a central difference at eps = 1e-5.
      const auto r = ad::check_gradients(build, params, 1e-5, 1e-4, 1e-6);
      if (r.max_rel_error > worst) {
        worst = r.max_rel_error;
        where = std::string(name) + " " + r.worst + " (config " + std::to_string(cfg) + ", analytic " +
                fmt("%.3e", r.worst_analytic) + ", numeric " + fmt("%.3e", r.worst_numeric) + ")";
      }
    }

    // The transform applied during backward against the closed form.
    for (auto* p : params) p->zero_grad();
    {
      ad::Graph g;
      g.backward(m.forward(g, batch, step).total, ad::BackwardOptions{.apply_transforms = false});
    }
    const ad::Tensor raw = m.domain_embeddings->grad;
    for (auto* p : params) p->zero_grad();
    m.set_temperature(tau);
    {
      ad::Graph g;
      g.backward(m.forward(g, batch, step).total);
    }
    const auto& v = m.domain_embeddings->value;
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (raw[i] == 0.0) continue;
      const double applied = m.domain_embeddings->grad[i] / raw[i];
      const double want = direct_compensation(v[i], tau, m.config().tau_min);
      worst_comp = std::max(worst_comp, std::abs(applied - want) / want);
    }
  }
  const double t = sw.seconds();
  return {worst < 1e-4 && worst_comp < 1e-10 && t < 60.0,
          "max rel err " + fmt("%.2e", worst) + " at " + where + "; compensation rel err " + fmt("%.2e", worst_comp) +
              "; " + fmt("%.1fs", t)};
}

// ---------------------------------------------------------------------------
// 2. Gradient routing

Verdict gradient_routing() {
  Stopwatch sw;
  std::mt19937_64 rng(7);
  std::vector<std::string> problems;
  std::size_t checked = 0;
  for (auto v : {Variant::dcmi, Variant::dcmi_no_dom, Variant::dcmi_no_dom_no_con, Variant::d_al, Variant::mtl}) {
    for (int rep = 0; rep < 5; ++rep) {
      model::DcmiModel m(small_model(v, rng), rng());
      const auto probe = model::probe_routing(m, random_batch(rng, 4, 16, 3), 0.5);
      for (const auto& [term, groups] : probe.max_abs_grad) {
        const auto& allowed = model::routed_groups(term);
        for (const auto& [group, mx] : groups) {
          ++checked;
          const bool routed = allowed.contains(group);
          const bool has_params = !m.groups().members[group].empty();
          if (!routed && mx != 0.0) {
            problems.push_back(std::string(model::to_string(v)) + ": " + std::string(model::to_string(term)) +
                               " reached " + std::string(model::to_string(group)));
          }
          if (routed && has_params && mx == 0.0) {
            problems.push_back(std::string(model::to_string(v)) + ": " + std::string(model::to_string(term)) +
                               " missed " + std::string(model::to_string(group)));
          }
        }
      }
    }
  }
  const double t = sw.seconds();
  std::string detail = std::to_string(checked) + " (term, group) pairs; " + fmt("%.2fs", t);
  if (!problems.empty()) detail = problems.front() + " (" + std::to_string(problems.size()) + " problems)";
  return {problems.empty() && t < 10.0, detail};
}

// ---------------------------------------------------------------------------
// 3. AUC oracle

double pair_count_auc(const std::vector<double>& s, const std::vector<int>& y) {
  double wins = 0.0, pairs = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (y[i] != 1) continue;
    for (std::size_t j = 0; j < s.size(); ++j) {
      if (y[j] != 0) continue;
      pairs += 1.0;
      wins += s[i] > s[j] ? 1.0 : (s[i] == s[j] ? 0.5 : 0.0);
    }
  }
  return wins / pairs;
}

Verdict auc_oracle() {
  Stopwatch sw;
  std::mt19937_64 rng(99);
  double worst = 0.0;
  for (int inst = 0; inst < 1000; ++inst) {
    const std::size_t n = 2 + rng() % 499;
    std::vector<double> s(n);
    std::vector<int> y(n);
    std::normal_distribution<double> nd(0.0, 1.0);
    const std::size_t levels = 1 + rng() % 20;  // coarse rounding injects ties
    for (std::size_t i = 0; i < n; ++i) {
      s[i] = inst % 2 ? std::round(nd(rng) * static_cast<double>(levels)) : nd(rng);
      y[i] = static_cast<int>(rng() % 2);
    }
    if (inst % 2 == 0) {
      for (std::size_t i = 1; i < n; i += 3) s[i] = s[i - 1];
    }
    y[0] = 0;
    y[1] = 1;
    worst = std::max(worst, std::abs(*train::auc(s, y) - pair_count_auc(s, y)));
  }
  const double t = sw.seconds();
  return {worst <= 1e-12 && t < 30.0, "max |diff| " + fmt("%.1e", worst) + " over 1000 instances; " + fmt("%.1fs", t)};
}

// ---------------------------------------------------------------------------
// 4. D-AL equivalence

Verdict dal_equivalence() {
  data::SyntheticSpec spec;
  spec.counts = {100, 60, 40};
  spec.positive_rates = {0.4};
  spec.seed = 5;
  const auto splits = data::split(data::generate_synthetic(spec), {0.6, 0.2, 0.2}, 3);

  train::TrainConfig c;
  c.epochs = 3;
  c.batch_size = 16;
  c.lr = 1e-2;
  c.dim = 16;
  c.embedding_dim = 16;
  c.hidden_dim = 16;
  c.vocab_size = 500;
  c.max_len = 32;
  c.seed = 42;
  c.lambda1 = 0.0;
  c.lambda2 = 0.0;

  auto pinned = c;
  pinned.variant = Variant::dcmi;
  pinned.pin_masks = true;
  auto dal = c;
  dal.variant = Variant::d_al;
  const auto a = train::train(pinned, splits).report.batch_sup_trace;
  const auto b = train::train(dal, splits).report.batch_sup_trace;
  std::size_t mismatches = 0;
  for (std::size_t i = 0; i < std::min(a.size(), b.size()); ++i) mismatches += a[i] != b[i];
  const bool same = a.size() == b.size() && mismatches == 0 && !a.empty();
  return {same, std::to_string(a.size()) + " batches, " + std::to_string(mismatches) + " differing L_sup values (" +
                    std::to_string(splits.train.size() + splits.val.size() + splits.test.size()) + " samples)"};
}

// ---------------------------------------------------------------------------
// Benchmarks shared by 5, 6 and 7

struct VariantScore {
  double macro = 0.0;
  double micro = 0.0;
  std::size_t runs = 0;
};

struct BenchResult {
  std::map<Variant, VariantScore> scores;
  std::vector<std::string> failures;
  double seconds = 0.0;
};

// DCMI_ACCEPTANCE_CONFIGS points the benchmarks at another config directory.
fs::path config_dir() {
  const char* env = std::getenv("DCMI_ACCEPTANCE_CONFIGS");
  return env && *env ? fs::path(env) : fs::path(DCMI_CONFIG_DIR);
}

experiment::ExperimentConfig load_bench(const char* name) { return experiment::load_config(config_dir() / name); }

BenchResult run_bench(const experiment::ExperimentConfig& config) {
  Stopwatch sw;
  BenchResult out;
  const auto res = experiment::run_experiment(config, false);
  for (const auto& r : res.runs) {
    if (!r.report || !r.report->test.macro_auc || !r.report->test.micro_auc) {
      out.failures.push_back(std::string(model::to_string(r.variant)) + ": " + r.error);
      continue;
    }
    auto& s = out.scores[r.variant];
    s.macro += *r.report->test.macro_auc;
    s.micro += *r.report->test.micro_auc;
    ++s.runs;
  }
  for (auto& [v, s] : out.scores) {
    s.macro /= static_cast<double>(s.runs);
    s.micro /= static_cast<double>(s.runs);
  }
  out.seconds = sw.seconds();
  return out;
}

const BenchResult& inversion_bench() {
  static const BenchResult r = run_bench(load_bench("bench_inversion.json"));
  return r;
}

const BenchResult& similar_bench() {
  static const BenchResult r = run_bench(load_bench("bench_similar.json"));
  return r;
}

// Bayes score under the generator's own polarity mapping: the classifier a
// learner isolated to one domain could at best reach.
std::vector<double> oracle_domain_auc(const data::SyntheticSpec& spec) {
  const auto ds = data::generate_synthetic(spec);
  std::vector<std::vector<double>> scores(ds.num_domains());
  std::vector<std::vector<int>> labels(ds.num_domains());
  for (const auto& s : ds.samples()) {
    const auto polarity = data::polarity_map(spec, data::group_of(spec, static_cast<std::size_t>(s.domain)));
    double score = 0.0;
    std::istringstream in(s.text);
    for (std::string t; in >> t;) {
      if (t.size() > 1 && t[0] == 's') score += polarity[std::stoul(t.substr(1))];
    }
    if (data::is_inverted(spec, static_cast<std::size_t>(s.domain))) score = -score;
    scores[s.domain].push_back(score);
    labels[s.domain].push_back(s.label);
  }
  std::vector<double> out;
  for (std::size_t j = 0; j < scores.size(); ++j) out.push_back(train::auc(scores[j], labels[j]).value_or(0.0));
  return out;
}

bool complete(const BenchResult& r, std::initializer_list<Variant> vs, std::string& why) {
  if (!r.failures.empty()) {
    why = "aborted run: " + r.failures.front();
    return false;
  }
  for (auto v : vs) {
    if (!r.scores.contains(v)) {
      why = "benchmark config lacks variant " + std::string(model::to_string(v));
      return false;
    }
  }
  return true;
}

// ---------------------------------------------------------------------------
// 5. Divergent domains

Verdict divergent_domains() {
  const auto config = load_bench("bench_inversion.json");
  const auto oracle = oracle_domain_auc(*config.synthetic);
  const double oracle_min = *std::min_element(oracle.begin(), oracle.end());
  const auto& r = inversion_bench();
  std::string why;
  if (!complete(r, {Variant::d_al, Variant::dcmi}, why)) return {false, why};
  const double dal = r.scores.at(Variant::d_al).macro, dc = r.scores.at(Variant::dcmi).macro;
  const bool ok = oracle_min >= 0.95 && dal <= 0.65 && dc >= 0.80 && dc - dal >= 0.15 && r.seconds < 600.0;
  return {ok, "oracle min domain AUC " + fmt("%.3f", oracle_min) + "; macro D-AL " + fmt("%.3f", dal) + ", DCMI " +
                  fmt("%.3f", dc) + ", gap " + fmt("%.3f", dc - dal) + "; " + fmt("%.0fs", r.seconds)};
}

// ---------------------------------------------------------------------------
// 6. Ablation ordering

Verdict ablation_ordering() {
  bool ok = true;
  std::string detail;
  for (const auto& [name, bench] : {std::pair{"inversion", &inversion_bench}, std::pair{"similar", &similar_bench}}) {
    const auto& r = bench();
    std::string why;
    if (!complete(r, {Variant::dcmi, Variant::dcmi_no_dom, Variant::dcmi_no_dom_no_con}, why)) return {false, why};
    const double full = r.scores.at(Variant::dcmi).macro;
    const double no_dom = r.scores.at(Variant::dcmi_no_dom).macro;
    const double none = r.scores.at(Variant::dcmi_no_dom_no_con).macro;
    ok = ok && full - no_dom >= -0.01 && no_dom - none >= -0.01 && full - none >= 0.02;
    if (!detail.empty()) detail += "; ";
    detail += std::string(name) + ": " + fmt("%.3f", full) + " / " + fmt("%.3f", no_dom) + " / " + fmt("%.3f", none) +
              " (total gap " + fmt("%+.3f", full - none) + ")";
  }
  return {ok, "DCMI / -L_dom / -L_dom,L_con macro; " + detail};
}

// ---------------------------------------------------------------------------
// 7. Tail transfer

Verdict tail_transfer() {
  const auto config = load_bench("bench_similar.json");
  const auto counts = data::domain_counts(*config.synthetic);
  const auto splits = experiment::prepare_data(config);
  std::size_t smallest = splits.train.size();
  for (std::size_t j = 0; j < counts.size(); ++j) smallest = std::min(smallest, splits.train.domain_count(j));

  const auto& r = similar_bench();
  std::string why;
  if (!complete(r, {Variant::d_al, Variant::dcmi}, why)) return {false, why};
  const auto& dal = r.scores.at(Variant::d_al);
  const auto& dc = r.scores.at(Variant::dcmi);
  const bool ok = smallest <= 25 && dc.macro - dal.macro >= 0.03 && std::abs(dc.micro - dal.micro) <= 0.05;
  return {ok, "macro gap " + fmt("%+.3f", dc.macro - dal.macro) + ", micro gap " + fmt("%+.3f", dc.micro - dal.micro) +
                  "; smallest tail has " + std::to_string(smallest) + " training samples"};
}

// ---------------------------------------------------------------------------
// 8. Determinism

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Verdict determinism() {
  auto config = experiment::load_config(config_dir() / "minimal.json");
  config.seeds = 2;
  const auto base = fs::temp_directory_path() / "dcmi_acceptance_determinism";
  fs::remove_all(base);
  config.output_dir = base / "a";
  config.workers = 1;
  experiment::run_experiment(config);
  config.output_dir = base / "b";
  config.workers = 4;
  experiment::run_experiment(config);

  std::size_t compared = 0, differing = 0;
  for (const auto& e : fs::directory_iterator(base / "a")) {
    const auto name = e.path().filename().string();
    if (name.rfind("report_", 0) != 0) continue;
    ++compared;
    if (slurp(e.path()) != slurp(base / "b" / name)) ++differing;
  }
  fs::remove_all(base);
  return {compared > 0 && differing == 0,
          std::to_string(compared) + " report files compared across reruns, " + std::to_string(differing) + " differ"};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<const char*, std::function<Verdict()>>> criteria = {
      {"gradient correctness", gradient_correctness},
      {"gradient routing", gradient_routing},
      {"AUC oracle equivalence", auc_oracle},
      {"D-AL equivalence", dal_equivalence},
      {"divergent-domain pattern", divergent_domains},
      {"ablation ordering", ablation_ordering},
      {"tail transfer", tail_transfer},
      {"determinism", determinism},
  };

  std::set<int> selected;
  for (int i = 1; i < argc; ++i) selected.insert(std::atoi(argv[i]));

  int failed = 0;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    const int id = static_cast<int>(k + 1);
    if (!selected.empty() && !selected.contains(id)) continue;
    Verdict v;
    try {
      v = criteria[k].second();
    } catch (const std::exception& e) {
      v = {false, std::string("error: ") + e.what()};
    }
    std::printf("%s criterion %d (%s): %s\n", v.pass ? "PASS" : "FAIL", id, criteria[k].first, v.detail.c_str());
    std::fflush(stdout);
    failed += v.pass ? 0 : 1;
  }
  return failed == 0 ? 0 : 1;
}
