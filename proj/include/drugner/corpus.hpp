#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace drugner {

enum class EntityKind { Drug, DrugN, Group, Brand };

const char* entity_kind_name(EntityKind k);
EntityKind entity_kind_from(const std::string& name);  // throws DataError on unknown

/// One annotated span; offsets are 0-based, both ends inclusive.
struct EntityAnnotation {
    std::size_t char_start = 0;
    std::size_t char_end = 0;
    std::string surface;  // lowercase substring of the sentence at [char_start..char_end]
    EntityKind kind = EntityKind::Drug;
};

struct AnnotatedSentence {
    std::string id;
    std::string text;
    std::vector<EntityAnnotation> annotations;
};

struct TokenizedSentence {
    std::vector<std::string> tokens;
};

struct FrequencyEntry {
    std::string token;
    std::uint64_t count = 0;
    std::size_t rank = 0;  // 1-based, non-increasing count, ties by first occurrence
};

class FrequencyTable {
  public:
    FrequencyTable() = default;
    FrequencyTable(std::vector<FrequencyEntry> entries, std::uint64_t total_tokens);

    const std::vector<FrequencyEntry>& entries() const { return entries_; }
    std::uint64_t total_tokens() const { return total_tokens_; }
    std::size_t unique_tokens() const { return entries_.size(); }

    /// Count of a token, 0 if absent.
    std::uint64_t count_of(const std::string& token) const;
    /// Rank of a token, 0 if absent.
    std::size_t rank_of(const std::string& token) const;

  private:
    std::vector<FrequencyEntry> entries_;
    std::uint64_t total_tokens_ = 0;
    std::unordered_map<std::string, std::size_t> index_;  // token -> entries_ position
};

struct FrequencyPartition {
    int part_index = 0;  // 1-based
    std::vector<std::string> member_tokens;  // in rank order
    std::uint64_t sum_frequency = 0;
    std::size_t first_rank = 0;
    std::size_t last_rank = 0;
};

struct QuartileRange {
    std::size_t first_rank = 0;
    std::size_t last_rank = 0;  // 0 when the range is empty
    std::uint64_t sum_frequency = 0;
};

enum class CorpusFormat { Xml, Tsv };

/// SemEval-style XML or line-oriented fixture TSV (id, text, `start-end:kind`
/// annotations joined by ';'). Multi-span charOffsets keep the first span and
/// emit a warning.
std::vector<AnnotatedSentence> parse_semeval_corpus(const std::string& path, CorpusFormat format);
std::vector<AnnotatedSentence> parse_corpus_xml_text(const std::string& xml, const std::string& origin);
std::vector<AnnotatedSentence> parse_corpus_tsv_text(const std::string& tsv, const std::string& origin);

/// Round-trippable serialization in the fixture TSV layout.
std::string corpus_to_tsv(const std::vector<AnnotatedSentence>& sentences);

/// Lowercase + whitespace split; attached punctuation is kept.
TokenizedSentence tokenize(const AnnotatedSentence& sentence);
TokenizedSentence tokenize_text(const std::string& text);
std::vector<TokenizedSentence> tokenize_all(const std::vector<AnnotatedSentence>& sentences);

FrequencyTable build_frequency_table(const std::vector<TokenizedSentence>& sentences);

/// Contiguous rank-order partitions; a part closes at the first token whose
/// inclusion brings its running sum to total/n_parts, the last part takes the
/// remainder.
std::vector<FrequencyPartition> partition_by_cumulative_frequency(const FrequencyTable& table,
                                                                  int n_parts);

/// Four contiguous rank ranges of near-equal unique-token counts
/// (boundaries at round(i*N/4)) with their frequency sums.
std::vector<QuartileRange> quartile_report(const FrequencyTable& table);

std::string frequency_table_to_tsv(const FrequencyTable& table);
FrequencyTable frequency_table_from_tsv(const std::string& text);

/// Stats report: one record per partition plus the quartile ranges.
std::string stats_report(const FrequencyTable& table, int n_parts);

}  // namespace drugner
