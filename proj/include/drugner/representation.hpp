#pragma once

#include <array>
#include <string>
#include <unordered_set>
#include <vector>

#include "drugner/corpus.hpp"
#include "drugner/embedding.hpp"

namespace drugner {

inline constexpr int kTupleWidth = 5;
inline constexpr int kTupleClasses = 6;

/// Reference list of drug / drug-n token sequences (1..5 tokens), ordered
/// longest-first so labeling resolves to the longest match.
class DrugLexicon {
  public:
    DrugLexicon() = default;
    explicit DrugLexicon(std::vector<std::vector<std::string>> entries);

    const std::vector<std::vector<std::string>>& entries() const { return entries_; }
    bool empty() const { return entries_.size() == 0; }

    /// True when `seq` (length 1..5) is an entry.
    bool contains(const std::vector<std::string>& seq) const;
    bool contains_joined(const std::string& joined, std::size_t length) const;
    std::size_t max_length() const { return max_length_; }

  private:
    std::vector<std::vector<std::string>> entries_;
    std::array<std::unordered_set<std::string>, kTupleWidth + 1> by_length_;  // join(' ') keys
    std::size_t max_length_ = 0;
};

struct TupleSample {
    std::array<std::string, kTupleWidth> tokens;
    int label = 1;  // 1 = non-drug, 1+k = first k tokens form a drug name
    std::vector<float> vec;  // 5*D concatenation
};

struct SequenceStep {
    std::string token;
    std::vector<float> features;  // [v_i ; distance block], 2*D wide
    int label = 0;                // 1 when the token lies inside a drug-name occurrence
};

struct SequenceSample {
    std::string sentence_id;
    std::vector<SequenceStep> steps;
};

enum class DistanceBlock {
    Displacement,     // v_i - v_{i-1} componentwise
    ScalarBroadcast,  // euclidean(v_i, v_{i-1}) copied across D slots
};

DrugLexicon build_drug_lexicon(const std::vector<AnnotatedSentence>& sentences);

int label_tuple(const std::array<std::string, kTupleWidth>& tokens, const DrugLexicon& lexicon);

std::vector<float> vectorize_tuple(const std::array<std::string, kTupleWidth>& tokens,
                                   const EmbeddingTable& table);

/// Windows over the concatenated token stream of all sentences (stride 1,
/// tuples may straddle sentence boundaries).
std::vector<TupleSample> technique1_tuples(const std::vector<TokenizedSentence>& sentences,
                                           const EmbeddingTable& table,
                                           const DrugLexicon& lexicon);

/// Per-sentence windows, right-padded with `*`; every token starts one tuple.
std::vector<TupleSample> technique2_tuples(const std::vector<TokenizedSentence>& sentences,
                                           const EmbeddingTable& table,
                                           const DrugLexicon& lexicon);

/// Per-sentence step sequences: [vector ; distance-to-previous] features with
/// binary per-token labels. Sentence ids are taken from `ids` when given.
std::vector<SequenceSample> technique3_sequences(
    const std::vector<TokenizedSentence>& sentences, const EmbeddingTable& table,
    const DrugLexicon& lexicon, DistanceBlock block = DistanceBlock::Displacement,
    const std::vector<std::string>* ids = nullptr);

/// Binary token labels for one sentence (1 inside any lexicon occurrence).
std::vector<int> sequence_labels(const std::vector<std::string>& tokens,
                                 const DrugLexicon& lexicon);

std::string tuples_to_tsv(const std::vector<TupleSample>& tuples);
std::vector<TupleSample> tuples_from_tsv(const std::string& text);
std::string sequences_to_tsv(const std::vector<SequenceSample>& sequences);
std::vector<SequenceSample> sequences_from_tsv(const std::string& text);

}  // namespace drugner
