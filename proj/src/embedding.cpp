#include "foon/embedding.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "foon/document.hpp"
#include "foon/error.hpp"
#include "foon/model.hpp"

namespace foon {

EmbeddingTable EmbeddingTable::load(const std::filesystem::path& path) {
  return parse(read_text_file(path));
}

EmbeddingTable EmbeddingTable::parse(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string header;
  if (!std::getline(in, header)) throw ParseError("line 1", "empty embedding file");
  std::istringstream hs(header);
  std::size_t count = 0;
  std::size_t dim = 0;
  if (!(hs >> count >> dim) || dim == 0) throw ParseError("line 1", "expected 'count dimension'");
  EmbeddingTable table(dim);
  std::string line;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream ls(line);
    std::string token;
    if (!(ls >> token)) continue;
    std::vector<double> v;
    v.reserve(dim);
    double x = 0.0;
    while (ls >> x) v.push_back(x);
    if (!ls.eof()) throw ParseError("line " + std::to_string(line_no), "non-numeric vector component");
    if (v.size() != dim) {
      throw ParseError("line " + std::to_string(line_no),
                       "expected " + std::to_string(dim) + " components, got " + std::to_string(v.size()));
    }
    try {
      table.add(token, std::move(v));
    } catch (const ValidationError& e) {
      throw ParseError("line " + std::to_string(line_no), e.what());
    }
  }
  if (table.size() != count) {
    throw ParseError("line 1", "header declares " + std::to_string(count) + " vectors, file has " +
                                   std::to_string(table.size()));
  }
  return table;
}

void EmbeddingTable::add(std::string token, std::vector<double> vector) {
  if (vector.size() != dimension_) {
    throw ValidationError("embedding_similarity", "vector for '" + token + "' has wrong dimension");
  }
  const double norm = std::sqrt(std::inner_product(vector.begin(), vector.end(), vector.begin(), 0.0));
  if (!(norm > 0.0) || !std::isfinite(norm)) {
    throw ValidationError("embedding_similarity", "vector for '" + token + "' cannot be normalized");
  }
  for (auto& x : vector) x /= norm;
  vectors_[normalize_name(token)] = std::move(vector);
}

const std::vector<double>* EmbeddingTable::find(std::string_view token) const {
  auto it = vectors_.find(std::string(token));
  return it == vectors_.end() ? nullptr : &it->second;
}

std::optional<std::vector<double>> embed(const EmbeddingTable& table, std::string_view phrase) {
  std::vector<double> sum(table.dimension(), 0.0);
  std::size_t known = 0;
  std::istringstream words{std::string(phrase)};
  std::string word;
  while (words >> word) {
    if (const auto* v = table.find(word)) {
      for (std::size_t i = 0; i < sum.size(); ++i) sum[i] += (*v)[i];
      ++known;
    }
  }
  if (known == 0) return std::nullopt;
  const double norm = std::sqrt(std::inner_product(sum.begin(), sum.end(), sum.begin(), 0.0));
  // Opposite token vectors can cancel out entirely.
  if (!(norm > 0.0)) return std::nullopt;
  for (auto& x : sum) x /= norm;
  return sum;
}

double similarity(const EmbeddingTable& table, std::string_view a, std::string_view b) {
  if (a == b) return 1.0;
  const auto va = embed(table, a);
  const auto vb = embed(table, b);
  if (!va || !vb) return a == b ? 1.0 : 0.0;
  const double dot = std::inner_product(va->begin(), va->end(), vb->begin(), 0.0);
  return std::clamp(dot, -1.0, 1.0);
}

std::size_t compute_similarity(const EmbeddingTable& table, const SimilarityConfig& cfg,
                               std::span<const std::string> required, std::span<const std::string> known) {
  std::size_t count = 0;
  for (const auto& i : required) {
    for (const auto& j : known) {
      if (similarity(table, i, j) > cfg.threshold) ++count;
    }
  }
  return count;
}

NearestIngredient nearest_ingredient(const EmbeddingTable& table, std::string_view x,
                                     std::span<const std::string> candidates) {
  if (candidates.empty()) {
    throw PreconditionError("embedding_similarity", "nearest_ingredient needs at least one candidate");
  }
  bool any_embeddable = embed(table, x).has_value();
  for (const auto& c : candidates) any_embeddable = any_embeddable || embed(table, c).has_value();
  if (!any_embeddable) {
    throw PlanningError("embedding_similarity",
                        "no embedding basis for substitution of '" + std::string(x) + "'");
  }
  const std::string* best = nullptr;
  double best_sim = 0.0;
  for (const auto& c : candidates) {
    const double s = similarity(table, x, c);
    if (!best || s > best_sim || (s == best_sim && c < *best)) {
      best = &c;
      best_sim = s;
    }
  }
  return {*best, 100.0 * best_sim};
}

}  // namespace foon
