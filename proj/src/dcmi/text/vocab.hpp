#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace dcmi::text {

// Token -> id map with id 0 reserved for unknown tokens.
class Vocab {
 public:
  static constexpr std::size_t kUnknown = 0;
  static constexpr const char* kUnknownToken = "<unk>";

  Vocab();
  // Tokens receive ids 1..n in the given order; duplicates are rejected.
  explicit Vocab(const std::vector<std::string>& tokens);

  std::size_t size() const { return tokens_.size(); }
  std::size_t id(std::string_view token) const;
  const std::string& token(std::size_t id) const { return tokens_.at(id); }
  bool contains(std::string_view token) const { return id(token) != kUnknown; }

  // One token per line; line k (0-based) holds id k + 1.
  void save(const std::filesystem::path& path) const;
  static Vocab load(const std::filesystem::path& path);

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, std::size_t> ids_;
};

// Lowercase + whitespace split.
std::vector<std::string> split_tokens(std::string_view text);

// Keeps the max_size - 1 most frequent tokens (ties broken lexicographically)
// after the unknown token. Throws std::invalid_argument on an empty corpus or
// max_size < 2.
Vocab build_vocab(const std::vector<std::string>& corpus, std::size_t max_size);

std::vector<std::size_t> tokenize(std::string_view text, const Vocab& vocab, std::size_t max_len);

}  // namespace dcmi::text
