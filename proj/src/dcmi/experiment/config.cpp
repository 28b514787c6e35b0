#include "dcmi/experiment/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "dcmi/seed.hpp"
#include "json.hpp"

namespace dcmi::experiment {

using nlohmann::json;

ConfigError::ConfigError(std::vector<std::string> diagnostics)
    : std::runtime_error(diagnostics.empty() ? "invalid config" : diagnostics.front()),
      diagnostics_(std::move(diagnostics)) {}

std::optional<std::pair<double, double>> preset_lambdas(std::string_view name) {
  if (name == "asc") return std::pair{50.0, 6.0};
  if (name == "dsc") return std::pair{30.0, 15.0};
  if (name == "rfd") return std::pair{4.0, 3.0};
  return std::nullopt;
}

std::vector<double> log_grid(double max, std::size_t points, double min) {
  if (points == 0) throw std::invalid_argument("log_grid: points must be >= 1");
  if (!(max > 0.0) || !(min > 0.0) || min > max) throw std::invalid_argument("log_grid: need 0 < min <= max");
  std::vector<double> out{0.0};
  if (points == 1) return out;
  if (points == 2) {
    out.push_back(max);
    return out;
  }
  const double lo = std::log(min), hi = std::log(max);
  for (std::size_t k = 0; k + 1 < points; ++k) {
    const double t = static_cast<double>(k) / static_cast<double>(points - 2);
    out.push_back(k + 2 == points ? max : std::exp(lo + t * (hi - lo)));
  }
  return out;
}

std::uint64_t run_seed(const ExperimentConfig& config, std::size_t k) { return config.base_seed + k; }

namespace {

// Walks one JSON object, reporting type errors and unknown keys under a
// dotted field path.
class Reader {
 public:
  Reader(const json& obj, std::string path, std::vector<std::string>& diags)
      : obj_(obj), path_(std::move(path)), diags_(diags) {}

  std::string field(std::string_view key) const { return path_.empty() ? std::string(key) : path_ + "." + std::string(key); }
  void problem(std::string_view key, const std::string& what) const { diags_.push_back(field(key) + ": " + what); }
  bool has(std::string_view key) {
    seen_.insert(std::string(key));
    return obj_.contains(std::string(key));
  }
  const json& at(std::string_view key) const { return obj_.at(std::string(key)); }

  void number(std::string_view key, double& out) {
    if (!has(key)) return;
    const auto& v = at(key);
    if (!v.is_number()) return problem(key, "expected a number");
    out = v.get<double>();
  }
  void count(std::string_view key, std::size_t& out) {
    if (!has(key)) return;
    const auto& v = at(key);
    if (!v.is_number_integer() || v.get<long long>() < 0) return problem(key, "expected a non-negative integer");
    out = v.get<std::size_t>();
  }
  void seed(std::string_view key, std::uint64_t& out) {
    if (!has(key)) return;
    const auto& v = at(key);
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0)) {
      return problem(key, "expected a non-negative integer");
    }
    out = v.get<std::uint64_t>();
  }
  void boolean(std::string_view key, bool& out) {
    if (!has(key)) return;
    const auto& v = at(key);
    if (!v.is_boolean()) return problem(key, "expected true or false");
    out = v.get<bool>();
  }
  void string(std::string_view key, std::string& out) {
    if (!has(key)) return;
    const auto& v = at(key);
    if (!v.is_string()) return problem(key, "expected a string");
    out = v.get<std::string>();
  }
  template <typename T>
  void list(std::string_view key, std::vector<T>& out) {
    if (!has(key)) return;
    const auto& v = at(key);
    if (!v.is_array()) return problem(key, "expected an array");
    std::vector<T> tmp;
    for (std::size_t i = 0; i < v.size(); ++i) {
      const auto& e = v[i];
      const std::string where = std::string(key) + "[" + std::to_string(i) + "]";
      if constexpr (std::is_same_v<T, std::string>) {
        if (!e.is_string()) return problem(where, "expected a string");
      } else if constexpr (std::is_floating_point_v<T>) {
        if (!e.is_number()) return problem(where, "expected a number");
      } else if constexpr (std::is_signed_v<T>) {
        if (!e.is_number_integer()) return problem(where, "expected an integer");
      } else {
        if (!e.is_number_integer() || e.get<long long>() < 0) return problem(where, "expected a non-negative integer");
      }
      tmp.push_back(e.get<T>());
    }
    out = std::move(tmp);
  }
  // Nested object, or nullptr (with a diagnostic when present but not an object).
  const json* object(std::string_view key) {
    if (!has(key)) return nullptr;
    const auto& v = at(key);
    if (!v.is_object()) {
      problem(key, "expected an object");
      return nullptr;
    }
    return &v;
  }
  void finish() const {
    for (const auto& [k, v] : obj_.items()) {
      if (!seen_.contains(k)) diags_.push_back(field(k) + ": unknown key");
    }
  }

 private:
  const json& obj_;
  std::string path_;
  std::vector<std::string>& diags_;
  std::set<std::string> seen_;
};

data::SyntheticSpec read_synthetic(const json& obj, std::vector<std::string>& diags) {
  data::SyntheticSpec s;
  Reader r(obj, "data.synthetic", diags);
  r.list("counts", s.counts);
  r.count("num_domains", s.num_domains);
  r.count("head_count", s.head_count);
  r.number("power_exponent", s.power_exponent);
  r.list("positive_rates", s.positive_rates);
  r.count("sentiment_vocab", s.sentiment_vocab);
  r.count("sentiment_tokens", s.sentiment_tokens);
  r.number("sentiment_purity", s.sentiment_purity);
  r.count("domain_vocab", s.domain_vocab);
  r.count("domain_tokens", s.domain_tokens);
  r.count("group_vocab", s.group_vocab);
  r.count("group_tokens", s.group_tokens);
  r.count("noise_vocab", s.noise_vocab);
  r.count("noise_tokens", s.noise_tokens);
  r.list("groups", s.groups);
  r.number("group_divergence", s.group_divergence);
  r.list("inverted", s.inverted);
  r.list("domain_names", s.domain_names);
  r.seed("seed", s.seed);
  r.finish();
  return s;
}

std::vector<double> read_grid(Reader& r, std::string_view key, std::vector<std::string>& diags) {
  std::vector<double> grid{0.0};
  if (!r.has(key)) return grid;
  const auto& v = r.at(key);
  if (v.is_array()) {
    r.list(key, grid);
    return grid;
  }
  if (!v.is_object()) {
    r.problem(key, "expected an array of values or {\"log_grid\": {...}}");
    return grid;
  }
  Reader g(v, r.field(key), diags);
  const json* lg = g.object("log_grid");
  g.finish();
  if (!lg) {
    g.problem("log_grid", "required when the grid is an object");
    return grid;
  }
  Reader l(*lg, r.field(key) + ".log_grid", diags);
  double max = 5000.0, min = 0.01;
  std::size_t points = 200;
  l.number("max", max);
  l.number("min", min);
  l.count("points", points);
  l.finish();
  if (points < 1) {
    l.problem("points", "must be >= 1");
  } else if (!(max > 0.0) || !(min > 0.0) || min > max) {
    l.problem("max", "need 0 < min <= max");
  } else {
    grid = log_grid(max, points, min);
  }
  return grid;
}

void read_train(const json& obj, train::TrainConfig& t, std::vector<std::string>& diags) {
  Reader r(obj, "train", diags);
  r.number("lambda1", t.lambda1);
  r.number("lambda2", t.lambda2);
  r.number("lr", t.lr);
  r.count("epochs", t.epochs);
  r.count("batch_size", t.batch_size);
  r.boolean("drs", t.drs);
  r.number("drs_defer_fraction", t.drs_defer_fraction);
  r.count("dim", t.dim);
  r.count("embedding_dim", t.embedding_dim);
  r.count("hidden_dim", t.hidden_dim);
  r.number("dropout", t.dropout);
  r.number("embedding_init_std", t.embedding_init_std);
  r.count("vocab_size", t.vocab_size);
  r.count("max_len", t.max_len);
  r.number("tau_min", t.tau_min);
  r.number("mask_init_std", t.mask_init_std);
  r.boolean("compensate", t.compensate);
  std::string eval_domain;
  r.string("eval_domain", eval_domain);
  if (eval_domain == "argmax") {
    t.eval_domain = model::EvalDomain::argmax;
  } else if (!eval_domain.empty() && eval_domain != "record") {
    r.problem("eval_domain", "must be \"record\" or \"argmax\"");
  }
  r.finish();
}

}  // namespace

std::vector<std::string> check_config(const ExperimentConfig& c) {
  std::vector<std::string> out;
  if (c.synthetic) {
    for (const auto& p : data::validate(*c.synthetic)) out.push_back("data.synthetic." + p);
  } else if (c.jsonl.empty()) {
    out.emplace_back("data: a data source is required (\"synthetic\" or \"jsonl\")");
  } else {
    const auto path = c.jsonl.is_absolute() ? c.jsonl : c.source_dir / c.jsonl;
    if (!std::filesystem::is_regular_file(path)) out.push_back("data.jsonl: file not found: " + path.string());
  }
  double total = 0.0;
  const char* names[] = {"split.train", "split.val", "split.test"};
  for (std::size_t i = 0; i < 3; ++i) {
    if (!(c.split[i] > 0.0 && c.split[i] < 1.0)) out.push_back(std::string(names[i]) + ": must be in (0,1)");
    total += c.split[i];
  }
  if (std::abs(total - 1.0) > 1e-9) out.emplace_back("split: fractions must sum to 1");
  if (c.downsample_train < 1) out.emplace_back("downsample.train: must be >= 1");
  if (c.downsample_val < 1) out.emplace_back("downsample.val: must be >= 1");
  if (c.variants.empty()) out.emplace_back("variants: at least one variant is required");
  for (const auto& p : train::validate(c.train)) out.push_back("train." + p);
  if (c.seeds < 1) out.emplace_back("seeds: must be >= 1");
  if (c.workers < 1) out.emplace_back("workers: must be >= 1");
  if (c.output_dir.empty()) out.emplace_back("output.dir: must not be empty");
  if (c.sweep) {
    const auto& s = *c.sweep;
    if (s.lambda1.empty()) out.emplace_back("sweep.lambda1: grid must not be empty");
    if (s.lambda2.empty()) out.emplace_back("sweep.lambda2: grid must not be empty");
    for (double v : s.lambda1)
      if (!(v >= 0.0) || !std::isfinite(v)) out.emplace_back("sweep.lambda1: grid values must be finite and >= 0");
    for (double v : s.lambda2)
      if (!(v >= 0.0) || !std::isfinite(v)) out.emplace_back("sweep.lambda2: grid values must be finite and >= 0");
    if (s.seeds < 1) out.emplace_back("sweep.seeds: must be >= 1");
    if (s.max_runs < 1) out.emplace_back("sweep.max_runs: must be >= 1");
  }
  return out;
}

std::optional<ExperimentConfig> parse_config(std::string_view text, std::vector<std::string>& diags,
                                             const std::filesystem::path& source_dir) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    diags.push_back(std::string("config: invalid JSON (") + e.what() + ")");
    return std::nullopt;
  }
  if (!root.is_object()) {
    diags.emplace_back("config: top level must be an object");
    return std::nullopt;
  }

  ExperimentConfig c;
  c.source_dir = source_dir;
  bool synthetic_seed_given = false;
  Reader r(root, "", diags);

  if (const json* data = r.object("data")) {
    Reader d(*data, "data", diags);
    const json* syn = d.object("synthetic");
    std::string jsonl;
    d.string("jsonl", jsonl);
    d.finish();
    if (syn && !jsonl.empty()) d.problem("jsonl", "give either \"synthetic\" or \"jsonl\", not both");
    if (syn) {
      c.synthetic = read_synthetic(*syn, diags);
      synthetic_seed_given = syn->contains("seed");
    }
    c.jsonl = jsonl;
  }
  if (const json* split = r.object("split")) {
    Reader s(*split, "split", diags);
    s.number("train", c.split[0]);
    s.number("val", c.split[1]);
    s.number("test", c.split[2]);
    s.finish();
  }
  if (const json* ds = r.object("downsample")) {
    Reader s(*ds, "downsample", diags);
    s.count("train", c.downsample_train);
    s.count("val", c.downsample_val);
    s.finish();
  }
  std::vector<std::string> variants;
  r.list("variants", variants);
  for (std::size_t i = 0; i < variants.size(); ++i) {
    if (auto v = model::parse_variant(variants[i])) {
      c.variants.push_back(*v);
    } else {
      r.problem("variants[" + std::to_string(i) + "]",
                "unknown variant \"" + variants[i] + "\" (expected dcmi, dcmi_no_dom, dcmi_no_dom_no_con, d_al or mtl)");
    }
  }

  std::string preset;
  r.string("preset", preset);
  if (!preset.empty()) {
    if (auto l = preset_lambdas(preset)) {
      c.train.lambda1 = l->first;
      c.train.lambda2 = l->second;
    } else {
      r.problem("preset", "unknown preset \"" + preset + "\" (expected asc, dsc or rfd)");
    }
  }
  // Explicit train fields override the preset.
  if (const json* t = r.object("train")) read_train(*t, c.train, diags);

  r.count("seeds", c.seeds);
  r.seed("base_seed", c.base_seed);
  r.count("workers", c.workers);

  if (const json* sw = r.object("sweep")) {
    SweepConfig s;
    Reader w(*sw, "sweep", diags);
    s.lambda1 = read_grid(w, "lambda1", diags);
    s.lambda2 = read_grid(w, "lambda2", diags);
    w.count("seeds", s.seeds);
    w.count("max_runs", s.max_runs);
    w.finish();
    c.sweep = s;
  }
  if (const json* out = r.object("output")) {
    Reader o(*out, "output", diags);
    std::string dir;
    o.string("dir", dir);
    if (out->contains("dir")) c.output_dir = dir;
    o.boolean("export_representations", c.export_representations);
    o.finish();
  }
  r.finish();

  // Generation seed defaults to the base seed.
  if (c.synthetic && !synthetic_seed_given) c.synthetic->seed = c.base_seed;
  if (!root.contains("data")) diags.emplace_back("data: a data source is required (\"synthetic\" or \"jsonl\")");
  if (!root.contains("variants")) diags.emplace_back("variants: at least one variant is required");
  if (diags.empty()) {
    for (auto& p : check_config(c)) diags.push_back(std::move(p));
  }
  if (!diags.empty()) return std::nullopt;
  return c;
}

std::optional<data::SyntheticSpec> parse_synthetic(std::string_view text, std::vector<std::string>& diags) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    diags.push_back(std::string("data.synthetic: invalid JSON (") + e.what() + ")");
    return std::nullopt;
  }
  if (!root.is_object()) {
    diags.emplace_back("data.synthetic: expected an object");
    return std::nullopt;
  }
  auto spec = read_synthetic(root, diags);
  if (diags.empty()) {
    for (const auto& p : data::validate(spec)) diags.push_back("data.synthetic." + p);
  }
  if (!diags.empty()) return std::nullopt;
  return spec;
}

ExperimentConfig load_config_string(std::string_view text, const std::filesystem::path& source_dir) {
  std::vector<std::string> diags;
  auto c = parse_config(text, diags, source_dir);
  if (!c) throw ConfigError(std::move(diags));
  return *c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError({"config: cannot open " + path.string()});
  std::stringstream buf;
  buf << in.rdbuf();
  return load_config_string(buf.str(), path.parent_path());
}

data::Splits prepare_data(const ExperimentConfig& c) {
  enum Stream : std::uint64_t { kSplit = 20, kDownTrain = 21, kDownVal = 22 };
  const data::Dataset full = c.synthetic
                                 ? data::generate_synthetic(*c.synthetic)
                                 : data::load_jsonl(c.jsonl.is_absolute() ? c.jsonl : c.source_dir / c.jsonl);
  auto splits = data::split(full, c.split, derive_seed(c.base_seed, kSplit));
  splits.train = data::downsample(splits.train, c.downsample_train, derive_seed(c.base_seed, kDownTrain));
  splits.val = data::downsample(splits.val, c.downsample_val, derive_seed(c.base_seed, kDownVal));
  return splits;
}

}  // namespace dcmi::experiment
