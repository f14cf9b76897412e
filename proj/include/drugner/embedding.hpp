#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "drugner/corpus.hpp"

namespace drugner {

inline constexpr const char* kPadToken = "*";

struct CbowConfig {
    int dimension = 100;
    int window = 5;  // tokens per side
    int epochs = 5;
    double learning_rate = 0.025;  // linearly decayed
    int negative_samples = 5;
    std::uint64_t min_count = 1;
    std::uint64_t rng_seed = 1;
};

/// Token -> vector map with deterministic token order. The pad token `*` maps
/// to the zero vector; unknown tokens fall back to a vector seeded from the
/// token's hash so lookups are total and reproducible.
class EmbeddingTable {
  public:
    EmbeddingTable() = default;
    EmbeddingTable(int dimension, std::vector<std::string> tokens,
                   std::vector<std::vector<float>> vectors);

    int dimension() const { return dimension_; }
    std::size_t size() const { return tokens_.size(); }
    const std::vector<std::string>& tokens() const { return tokens_; }
    bool contains(const std::string& token) const { return index_.count(token) != 0; }

    /// Total lookup: stored vector, zeros for `*`, hash-seeded fallback otherwise.
    std::vector<float> vector_of(const std::string& token) const;
    /// Stored vector only; throws DataError for unknown tokens.
    const std::vector<float>& stored(const std::string& token) const;

    void insert(const std::string& token, std::vector<float> v);

  private:
    int dimension_ = 0;
    std::vector<std::string> tokens_;
    std::vector<std::vector<float>> vectors_;
    std::unordered_map<std::string, std::size_t> index_;
};

struct DistanceStats {
    std::string group_pair;  // drug-drug | drug-nondrug | nondrug-nondrug
    double mean_euclidean = 0.0;
    double mean_cosine = 0.0;
    std::uint64_t pair_count = 0;
};

enum class PairNormalization {
    OrderedPairs,    // 1/(n(n-1)) over the upper-triangle sum
    UnorderedPairs,  // 2/(n(n-1))
};

EmbeddingTable train_cbow(const std::vector<TokenizedSentence>& sentences,
                          const CbowConfig& config);

double cosine(std::span<const float> u, std::span<const float> v);
double euclidean(std::span<const float> u, std::span<const float> v);
double cosine(const std::vector<float>& u, const std::vector<float>& v);
double euclidean(const std::vector<float>& u, const std::vector<float>& v);

std::vector<DistanceStats> group_distance_stats(const EmbeddingTable& table,
                                                const std::unordered_set<std::string>& drug_tokens);

double mean_pairwise_euclidean(const std::vector<std::vector<float>>& vectors,
                               PairNormalization norm = PairNormalization::OrderedPairs);

std::vector<std::string> nearest_neighbors(const EmbeddingTable& table, const std::string& token,
                                           std::size_t k);

/// Text: header `token_count dimension`, then `token v1 .. vD` per line at 9
/// significant digits. Binary: same header line, then little-endian f32 rows.
void save_embedding_text(const EmbeddingTable& table, const std::string& path);
EmbeddingTable load_embedding_text(const std::string& path);
void save_embedding_binary(const EmbeddingTable& table, const std::string& path);
EmbeddingTable load_embedding_binary(const std::string& path);

}  // namespace drugner
