#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace foon {

/// Word vectors, each stored unit-normalized.
class EmbeddingTable {
public:
  EmbeddingTable() = default;
  explicit EmbeddingTable(std::size_t dimension) : dimension_(dimension) {}

  /// Text format: first line "count dimension", then "token v1 ... vd" per line.
  static EmbeddingTable load(const std::filesystem::path& path);
  static EmbeddingTable parse(std::string_view text);

  /// Adds (or replaces) a token; the vector is normalized on insertion.
  void add(std::string token, std::vector<double> vector);

  std::size_t dimension() const { return dimension_; }
  std::size_t size() const { return vectors_.size(); }
  const std::vector<double>* find(std::string_view token) const;

private:
  std::size_t dimension_ = 0;
  std::unordered_map<std::string, std::vector<double>> vectors_;
};

struct SimilarityConfig {
  double threshold = 0.90;
};

/// A known single token maps to its vector; a multi-word phrase to the
/// renormalized mean of its known tokens; nothing known gives nullopt.
std::optional<std::vector<double>> embed(const EmbeddingTable& table, std::string_view phrase);

/// Cosine of the embedded phrases. When either side cannot be embedded this
/// falls back to exact string match (1 or 0).
double similarity(const EmbeddingTable& table, std::string_view a, std::string_view b);

/// Number of pairs (i, j) in I x S whose similarity exceeds the threshold.
std::size_t compute_similarity(const EmbeddingTable& table, const SimilarityConfig& cfg,
                               std::span<const std::string> required, std::span<const std::string> known);

struct NearestIngredient {
  std::string name;
  double confidence = 0.0;  // 100 * similarity
};

/// Candidate with the highest similarity to `x`; ties go to the
/// lexicographically smallest name.
NearestIngredient nearest_ingredient(const EmbeddingTable& table, std::string_view x,
                                     std::span<const std::string> candidates);

}  // namespace foon
