#include "dcmi/data/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <random>

#include "json.hpp"

namespace dcmi::data {

Dataset::Dataset(std::vector<Sample> samples, std::size_t num_classes, std::vector<std::string> domain_names)
    : samples_(std::move(samples)), num_classes_(num_classes), domain_names_(std::move(domain_names)) {
  if (num_classes_ < 1) throw DataError("dataset needs at least one class");
  if (domain_names_.empty()) throw DataError("dataset needs at least one domain");
  counts_.assign(domain_names_.size() * num_classes_, 0);
  for (const auto& s : samples_) {
    if (s.label < 0 || static_cast<std::size_t>(s.label) >= num_classes_) {
      throw DataError("sample " + std::to_string(s.id) + ": label " + std::to_string(s.label) + " out of range");
    }
    if (s.domain < 0 || static_cast<std::size_t>(s.domain) >= domain_names_.size()) {
      throw DataError("sample " + std::to_string(s.id) + ": domain " + std::to_string(s.domain) + " out of range");
    }
    ++counts_[static_cast<std::size_t>(s.domain) * num_classes_ + static_cast<std::size_t>(s.label)];
  }
}

std::size_t Dataset::count(std::size_t domain, std::size_t label) const {
  return counts_.at(domain * num_classes_ + label);
}

std::size_t Dataset::domain_count(std::size_t domain) const {
  std::size_t n = 0;
  for (std::size_t c = 0; c < num_classes_; ++c) n += count(domain, c);
  return n;
}

std::vector<std::size_t> Dataset::class_counts() const {
  std::vector<std::size_t> out(num_classes_, 0);
  for (std::size_t j = 0; j < num_domains(); ++j)
    for (std::size_t c = 0; c < num_classes_; ++c) out[c] += count(j, c);
  return out;
}

Dataset Dataset::subset(std::span<const std::size_t> indices) const {
  std::vector<Sample> picked;
  picked.reserve(indices.size());
  for (auto i : indices) picked.push_back(samples_.at(i));
  return Dataset(std::move(picked), num_classes_, domain_names_);
}

Dataset load_jsonl(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());

  std::vector<Sample> samples;
  std::vector<std::string> domains;
  std::map<std::string, int> domain_ids;
  int max_label = 0;
  std::size_t line_no = 0;
  for (std::string line; std::getline(in, line);) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    auto fail = [&](const std::string& why) {
      return DataError(path.string() + ":" + std::to_string(line_no) + ": " + why);
    };
    nlohmann::json obj;
    try {
      obj = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw fail(std::string("invalid JSON (") + e.what() + ")");
    }
    if (!obj.is_object()) throw fail("expected a JSON object");
    for (const char* key : {"text", "label", "domain"}) {
      if (!obj.contains(key)) throw fail(std::string("missing field '") + key + "'");
    }
    if (!obj["text"].is_string()) throw fail("field 'text' must be a string");
    if (!obj["label"].is_number_integer()) throw fail("field 'label' must be an integer");
    if (!obj["domain"].is_string()) throw fail("field 'domain' must be a string");
    const auto label = obj["label"].get<long long>();
    if (label < 0 || label > 1'000'000) throw fail("field 'label' must be a non-negative class index");
    const auto name = obj["domain"].get<std::string>();
    auto [it, inserted] = domain_ids.emplace(name, static_cast<int>(domains.size()));
    if (inserted) domains.push_back(name);
    samples.push_back(Sample{samples.size(), obj["text"].get<std::string>(), static_cast<int>(label), it->second});
    max_label = std::max(max_label, static_cast<int>(label));
  }
  if (samples.empty()) throw DataError(path.string() + ": dataset is empty");
  return Dataset(std::move(samples), static_cast<std::size_t>(std::max(max_label + 1, 2)), std::move(domains));
}

void save_jsonl(const Dataset& dataset, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  for (const auto& s : dataset.samples()) {
    nlohmann::json obj{{"text", s.text}, {"label", s.label},
                       {"domain", dataset.domain_names()[static_cast<std::size_t>(s.domain)]}};
    out << obj.dump() << '\n';
  }
  if (!out) throw DataError("failed writing " + path.string());
}

namespace {

// Sample indices grouped by (domain, class) cell in cell order.
std::vector<std::vector<std::size_t>> cells_of(const Dataset& dataset) {
  std::vector<std::vector<std::size_t>> cells(dataset.num_domains() * dataset.num_classes());
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    const auto& s = dataset.samples()[i];
    cells[static_cast<std::size_t>(s.domain) * dataset.num_classes() + static_cast<std::size_t>(s.label)].push_back(i);
  }
  return cells;
}

}  // namespace

Splits split(const Dataset& dataset, std::array<double, 3> fractions, std::uint64_t seed) {
  for (double f : fractions) {
    if (!(f > 0.0)) throw std::invalid_argument("split fractions must be positive");
  }
  if (std::abs(fractions[0] + fractions[1] + fractions[2] - 1.0) > 1e-9) {
    throw std::invalid_argument("split fractions must sum to 1");
  }
  const auto n_total = static_cast<double>(dataset.size());
  auto cells = cells_of(dataset);
  std::mt19937_64 rng(seed);
  for (auto& c : cells) std::shuffle(c.begin(), c.end(), rng);

  // Allocation per cell: [val, test]; the rest goes to train.
  std::vector<std::array<std::size_t, 2>> alloc(cells.size(), {0, 0});
  for (int part = 0; part < 2; ++part) {
    const double f = fractions[static_cast<std::size_t>(part) + 1];
    auto target = static_cast<std::size_t>(std::llround(n_total * f));
    std::size_t assigned = 0;
    std::vector<std::pair<double, std::size_t>> remainders;
    for (std::size_t c = 0; c < cells.size(); ++c) {
      const double share = static_cast<double>(cells[c].size()) * f;
      auto base = static_cast<std::size_t>(std::floor(share));
      // A cell always keeps one training sample.
      const std::size_t room = cells[c].empty() ? 0 : cells[c].size() - 1 - alloc[c][0] - alloc[c][1];
      base = std::min(base, room);
      alloc[c][static_cast<std::size_t>(part)] = base;
      assigned += base;
      remainders.emplace_back(share - std::floor(share), c);
    }
    std::stable_sort(remainders.begin(), remainders.end(),
                     [](const auto& a, const auto& b) { return a.first > b.first; });
    for (const auto& [rem, c] : remainders) {
      if (assigned >= target) break;
      if (cells[c].empty()) continue;
      const std::size_t used = alloc[c][0] + alloc[c][1];
      if (used + 1 >= cells[c].size()) continue;
      ++alloc[c][static_cast<std::size_t>(part)];
      ++assigned;
    }
  }

  std::vector<std::size_t> train, val, test;
  for (std::size_t c = 0; c < cells.size(); ++c) {
    const auto& cell = cells[c];
    std::size_t k = 0;
    for (; k < alloc[c][1]; ++k) test.push_back(cell[k]);
    for (std::size_t v = 0; v < alloc[c][0]; ++v, ++k) val.push_back(cell[k]);
    for (; k < cell.size(); ++k) train.push_back(cell[k]);
  }
  for (auto* part : {&train, &val, &test}) std::sort(part->begin(), part->end());
  return Splits{dataset.subset(train), dataset.subset(val), dataset.subset(test)};
}

Dataset downsample(const Dataset& dataset, std::size_t factor, std::uint64_t seed) {
  if (factor < 1) throw std::invalid_argument("down-sampling factor must be >= 1");
  if (factor == 1) return dataset;
  auto cells = cells_of(dataset);
  std::mt19937_64 rng(seed);
  std::vector<std::size_t> kept;
  for (auto& c : cells) {
    if (c.empty()) continue;
    std::shuffle(c.begin(), c.end(), rng);
    const std::size_t keep = (c.size() + factor - 1) / factor;
    kept.insert(kept.end(), c.begin(), c.begin() + static_cast<std::ptrdiff_t>(keep));
  }
  std::sort(kept.begin(), kept.end());
  return dataset.subset(kept);
}

std::vector<double> drs_weights(const Dataset& dataset, std::size_t epoch, std::size_t total_epochs,
                                double defer_fraction) {
  if (epoch >= total_epochs) throw std::invalid_argument("epoch must be < total_epochs");
  if (dataset.empty()) throw std::invalid_argument("no samples to weight");
  std::vector<double> w(dataset.size(), 1.0);
  if (static_cast<double>(epoch) < defer_fraction * static_cast<double>(total_epochs)) return w;
  const auto counts = dataset.class_counts();
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    w[i] = 1.0 / static_cast<double>(counts[static_cast<std::size_t>(dataset.samples()[i].label)]);
  }
  return w;
}

}  // namespace dcmi::data
