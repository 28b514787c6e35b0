#include "dcmi/text/vocab.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <stdexcept>

namespace dcmi::text {

Vocab::Vocab() : tokens_{kUnknownToken} {}

Vocab::Vocab(const std::vector<std::string>& tokens) : Vocab() {
  for (const auto& t : tokens) {
    if (t.empty() || t == kUnknownToken) throw std::invalid_argument("invalid vocabulary token '" + t + "'");
    if (!ids_.emplace(t, tokens_.size()).second) {
      throw std::invalid_argument("duplicate vocabulary token '" + t + "'");
    }
    tokens_.push_back(t);
  }
}

std::size_t Vocab::id(std::string_view token) const {
  auto it = ids_.find(std::string(token));
  return it == ids_.end() ? kUnknown : it->second;
}

void Vocab::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write vocabulary to " + path.string());
  for (std::size_t i = 1; i < tokens_.size(); ++i) out << tokens_[i] << '\n';
  if (!out) throw std::runtime_error("failed writing vocabulary to " + path.string());
}

Vocab Vocab::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read vocabulary from " + path.string());
  std::vector<std::string> tokens;
  for (std::string line; std::getline(in, line);) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    tokens.push_back(line);
  }
  return Vocab(tokens);
}

std::vector<std::string> split_tokens(std::string_view text) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : text) {
    const auto c = static_cast<unsigned char>(ch);
    if (std::isspace(c)) {
      if (!cur.empty()) out.push_back(std::move(cur));
      cur.clear();
    } else {
      cur.push_back(static_cast<char>(std::tolower(c)));
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

Vocab build_vocab(const std::vector<std::string>& corpus, std::size_t max_size) {
  if (max_size < 2) throw std::invalid_argument("vocabulary max_size must be >= 2");
  if (corpus.empty()) throw std::invalid_argument("cannot build a vocabulary from an empty corpus");

  std::map<std::string, std::size_t> counts;
  for (const auto& text : corpus) {
    for (auto& t : split_tokens(text)) {
      if (t != Vocab::kUnknownToken) ++counts[t];
    }
  }
  std::vector<std::pair<std::string, std::size_t>> ranked(counts.begin(), counts.end());
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  std::vector<std::string> kept;
  for (std::size_t i = 0; i < ranked.size() && kept.size() + 1 < max_size; ++i) kept.push_back(ranked[i].first);
  return Vocab(kept);
}

std::vector<std::size_t> tokenize(std::string_view text, const Vocab& vocab, std::size_t max_len) {
  if (max_len == 0) throw std::invalid_argument("max_len must be >= 1");
  std::vector<std::size_t> ids;
  for (const auto& t : split_tokens(text)) {
    if (ids.size() == max_len) break;
    ids.push_back(vocab.id(t));
  }
  return ids;
}

}  // namespace dcmi::text
