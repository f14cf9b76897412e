#pragma once

#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include "drugner/corpus.hpp"
#include "drugner/representation.hpp"

namespace drugner {

/// Set of drug-name candidates; comparison is exact token-sequence equality
/// after lowercasing.
using NameSet = std::set<std::vector<std::string>>;

struct EvalReport {
    double precision = 0;
    double recall = 0;
    double f_score = 0;
    std::uint64_t true_positive = 0;
    std::uint64_t false_positive = 0;
    std::uint64_t false_negative = 0;
};

/// Exact set-intersection scoring with the harmonic-mean F. Empty extraction
/// (or empty gold) keeps the report total: the undefined ratio is reported as
/// 1 with a warning.
EvalReport score(const NameSet& extracted, const NameSet& gold);

/// Token-level binary P/R/F over flat prediction/label pairs (diagnostic).
EvalReport score_binary_labels(const std::vector<int>& predicted, const std::vector<int>& gold);

/// Tuple predicted class c > 1 contributes its leading c-1 tokens.
NameSet tuples_to_nameset(const std::vector<int>& predictions,
                          const std::vector<TupleSample>& tuples);

/// Maximal runs of label-1 tokens per sentence become candidates.
NameSet sequences_to_nameset(const std::vector<std::vector<int>>& predictions,
                             const std::vector<SequenceSample>& sequences);

/// Gold name set: tokenized drug / drug-n surfaces annotated in `sentences`.
NameSet gold_nameset(const std::vector<AnnotatedSentence>& sentences);

std::string report_to_text(const EvalReport& r);

}  // namespace drugner
