#include "drugner/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>

#include "drugner/util.hpp"

namespace drugner {

const char* entity_kind_name(EntityKind k) {
    switch (k) {
        case EntityKind::Drug: return "drug";
        case EntityKind::DrugN: return "drug-n";
        case EntityKind::Group: return "group";
        case EntityKind::Brand: return "brand";
    }
    return "?";
}

EntityKind entity_kind_from(const std::string& name) {
    std::string n = to_lower(name);
    if (n == "drug") return EntityKind::Drug;
    if (n == "drug-n" || n == "drug_n") return EntityKind::DrugN;
    if (n == "group") return EntityKind::Group;
    if (n == "brand") return EntityKind::Brand;
    throw DataError("unknown entity kind: " + name);
}

FrequencyTable::FrequencyTable(std::vector<FrequencyEntry> entries, std::uint64_t total_tokens)
    : entries_(std::move(entries)), total_tokens_(total_tokens) {
    index_.reserve(entries_.size());
    for (std::size_t i = 0; i < entries_.size(); ++i) index_[entries_[i].token] = i;
}

std::uint64_t FrequencyTable::count_of(const std::string& token) const {
    auto it = index_.find(token);
    return it == index_.end() ? 0 : entries_[it->second].count;
}

std::size_t FrequencyTable::rank_of(const std::string& token) const {
    auto it = index_.find(token);
    return it == index_.end() ? 0 : entries_[it->second].rank;
}

namespace {

// Builds one annotation from an inclusive offset pair, deriving the surface
// from the sentence text.
EntityAnnotation make_annotation(const AnnotatedSentence& s, std::size_t start, std::size_t end,
                                 EntityKind kind) {
    if (start > end)
        throw DataError("annotation error in sentence " + s.id + ": start " +
                        std::to_string(start) + " > end " + std::to_string(end));
    if (end >= s.text.size())
        throw DataError("annotation error in sentence " + s.id + ": offset " +
                        std::to_string(end) + " outside text of length " +
                        std::to_string(s.text.size()));
    EntityAnnotation a;
    a.char_start = start;
    a.char_end = end;
    a.kind = kind;
    a.surface = to_lower(s.text.substr(start, end - start + 1));
    return a;
}

// "79-107" or multi-span "40-58;92-105" (first span kept, with a warning).
std::pair<std::size_t, std::size_t> parse_offsets(const std::string& spec,
                                                  const std::string& sentence_id) {
    std::string span = spec;
    if (auto semi = spec.find(';'); semi != std::string::npos) {
        span = spec.substr(0, semi);
        warn("sentence " + sentence_id + ": multi-span offset '" + spec +
             "', using first span only");
    }
    auto dash = span.find('-');
    if (dash == std::string::npos || dash == 0 || dash + 1 >= span.size())
        throw DataError("annotation error in sentence " + sentence_id + ": bad offset '" +
                        spec + "'");
    try {
        std::size_t start = std::stoull(span.substr(0, dash));
        std::size_t end = std::stoull(span.substr(dash + 1));
        return {start, end};
    } catch (const std::exception&) {
        throw DataError("annotation error in sentence " + sentence_id + ": bad offset '" +
                        spec + "'");
    }
}

void collect_sentences(const boost::property_tree::ptree& node,
                       std::vector<AnnotatedSentence>& out) {
    for (const auto& [name, child] : node) {
        if (name == "sentence") {
            AnnotatedSentence s;
            s.id = child.get<std::string>("<xmlattr>.id", "");
            s.text = child.get<std::string>("<xmlattr>.text", "");
            // keep the store line-oriented; 1:1 replacement preserves offsets
            for (char& ch : s.text)
                if (ch == '\t' || ch == '\n' || ch == '\r') ch = ' ';
            for (const auto& [cname, cnode] : child) {
                if (cname != "entity") continue;
                std::string offsets = cnode.get<std::string>("<xmlattr>.charOffset");
                std::string type = cnode.get<std::string>("<xmlattr>.type");
                std::string etext = cnode.get<std::string>("<xmlattr>.text", "");
                auto [start, end] = parse_offsets(offsets, s.id);
                EntityAnnotation a = make_annotation(s, start, end, entity_kind_from(type));
                if (!etext.empty() && to_lower(etext) != a.surface)
                    warn("sentence " + s.id + ": entity text '" + etext +
                         "' differs from sentence span '" + a.surface + "'");
                s.annotations.push_back(std::move(a));
            }
            out.push_back(std::move(s));
        } else if (name != "<xmlattr>") {
            collect_sentences(child, out);
        }
    }
}

}  // namespace

std::vector<AnnotatedSentence> parse_corpus_xml_text(const std::string& xml,
                                                     const std::string& origin) {
    namespace pt = boost::property_tree;
    pt::ptree tree;
    std::istringstream in(xml);
    try {
        pt::read_xml(in, tree);
    } catch (const pt::xml_parser_error& e) {
        throw DataError("parse error in " + origin + " at line " + std::to_string(e.line()) +
                        ": " + e.message());
    }
    std::vector<AnnotatedSentence> out;
    collect_sentences(tree, out);
    return out;
}

std::vector<AnnotatedSentence> parse_corpus_tsv_text(const std::string& tsv,
                                                     const std::string& origin) {
    std::vector<AnnotatedSentence> out;
    std::istringstream in(tsv);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        auto fields = split_on(line, '\t');
        if (fields.size() < 2)
            throw DataError("parse error in " + origin + " at line " + std::to_string(lineno) +
                            ": expected at least id<TAB>text");
        AnnotatedSentence s;
        s.id = fields[0];
        s.text = fields[1];
        if (fields.size() >= 3 && !fields[2].empty()) {
            for (const auto& item : split_on(fields[2], ';')) {
                if (item.empty()) continue;
                auto colon = item.rfind(':');
                if (colon == std::string::npos)
                    throw DataError("parse error in " + origin + " at line " +
                                    std::to_string(lineno) + ": bad annotation '" + item + "'");
                auto [start, end] = parse_offsets(item.substr(0, colon), s.id);
                s.annotations.push_back(
                    make_annotation(s, start, end, entity_kind_from(item.substr(colon + 1))));
            }
        }
        out.push_back(std::move(s));
    }
    return out;
}

std::vector<AnnotatedSentence> parse_semeval_corpus(const std::string& path, CorpusFormat format) {
    std::string content = read_text_file(path);
    return format == CorpusFormat::Xml ? parse_corpus_xml_text(content, path)
                                       : parse_corpus_tsv_text(content, path);
}

std::string corpus_to_tsv(const std::vector<AnnotatedSentence>& sentences) {
    std::string out;
    for (const auto& s : sentences) {
        out += s.id;
        out += '\t';
        out += s.text;
        out += '\t';
        for (std::size_t i = 0; i < s.annotations.size(); ++i) {
            const auto& a = s.annotations[i];
            if (i) out += ';';
            out += std::to_string(a.char_start) + "-" + std::to_string(a.char_end) + ":" +
                   entity_kind_name(a.kind);
        }
        out += '\n';
    }
    return out;
}

TokenizedSentence tokenize_text(const std::string& text) {
    return TokenizedSentence{split_ws(to_lower(text))};
}

TokenizedSentence tokenize(const AnnotatedSentence& sentence) {
    return tokenize_text(sentence.text);
}

std::vector<TokenizedSentence> tokenize_all(const std::vector<AnnotatedSentence>& sentences) {
    std::vector<TokenizedSentence> out;
    out.reserve(sentences.size());
    for (const auto& s : sentences) out.push_back(tokenize(s));
    return out;
}

FrequencyTable build_frequency_table(const std::vector<TokenizedSentence>& sentences) {
    struct Acc {
        std::uint64_t count = 0;
        std::size_t first_seen = 0;
    };
    std::unordered_map<std::string, Acc> counts;
    std::uint64_t total = 0;
    std::size_t pos = 0;
    for (const auto& s : sentences) {
        for (const auto& t : s.tokens) {
            auto [it, inserted] = counts.try_emplace(t);
            if (inserted) it->second.first_seen = pos;
            ++it->second.count;
            ++total;
            ++pos;
        }
    }
    std::vector<std::pair<std::string, Acc>> items(counts.begin(), counts.end());
    std::sort(items.begin(), items.end(), [](const auto& a, const auto& b) {
        if (a.second.count != b.second.count) return a.second.count > b.second.count;
        return a.second.first_seen < b.second.first_seen;
    });
    std::vector<FrequencyEntry> entries;
    entries.reserve(items.size());
    for (std::size_t i = 0; i < items.size(); ++i)
        entries.push_back({items[i].first, items[i].second.count, i + 1});
    return FrequencyTable(std::move(entries), total);
}

std::vector<FrequencyPartition> partition_by_cumulative_frequency(const FrequencyTable& table,
                                                                  int n_parts) {
    if (n_parts < 1) throw ConfigError("n_parts must be >= 1");
    if (static_cast<std::size_t>(n_parts) > table.unique_tokens())
        throw ConfigError("n_parts " + std::to_string(n_parts) + " exceeds unique token count " +
                          std::to_string(table.unique_tokens()));
    const auto& entries = table.entries();
    const double target = static_cast<double>(table.total_tokens()) / n_parts;
    std::vector<FrequencyPartition> parts;
    std::size_t idx = 0;
    for (int p = 1; p <= n_parts; ++p) {
        FrequencyPartition part;
        part.part_index = p;
        part.first_rank = idx + 1;
        const std::size_t parts_after = static_cast<std::size_t>(n_parts - p);
        if (p == n_parts) {
            for (; idx < entries.size(); ++idx) {
                part.member_tokens.push_back(entries[idx].token);
                part.sum_frequency += entries[idx].count;
            }
        } else {
            while (idx < entries.size()) {
                part.member_tokens.push_back(entries[idx].token);
                part.sum_frequency += entries[idx].count;
                ++idx;
                std::size_t remaining = entries.size() - idx;
                if (part.sum_frequency >= target || remaining == parts_after) break;
            }
        }
        part.last_rank = idx;
        parts.push_back(std::move(part));
    }
    return parts;
}

std::vector<QuartileRange> quartile_report(const FrequencyTable& table) {
    const auto& entries = table.entries();
    const std::size_t n = entries.size();
    std::vector<QuartileRange> out;
    std::size_t prev = 0;
    for (int q = 1; q <= 4; ++q) {
        std::size_t bound = static_cast<std::size_t>(std::llround(q * n / 4.0));
        QuartileRange r;
        r.first_rank = prev + 1;
        r.last_rank = bound >= r.first_rank ? bound : 0;
        if (r.last_rank) {
            for (std::size_t i = r.first_rank - 1; i < r.last_rank; ++i)
                r.sum_frequency += entries[i].count;
            prev = r.last_rank;
        } else {
            r.last_rank = 0;
        }
        out.push_back(r);
    }
    return out;
}

std::string frequency_table_to_tsv(const FrequencyTable& table) {
    std::string out = "total\t" + std::to_string(table.total_tokens()) + "\tunique\t" +
                      std::to_string(table.unique_tokens()) + "\n";
    for (const auto& e : table.entries())
        out += e.token + "\t" + std::to_string(e.count) + "\t" + std::to_string(e.rank) + "\n";
    return out;
}

FrequencyTable frequency_table_from_tsv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line)) throw DataError("empty frequency table file");
    auto header = split_on(line, '\t');
    if (header.size() != 4 || header[0] != "total" || header[2] != "unique")
        throw DataError("bad frequency table header: " + line);
    std::uint64_t total = std::stoull(header[1]);
    std::vector<FrequencyEntry> entries;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        auto f = split_on(line, '\t');
        if (f.size() != 3) throw DataError("bad frequency table row: " + line);
        entries.push_back({f[0], std::stoull(f[1]), std::stoull(f[2])});
    }
    return FrequencyTable(std::move(entries), total);
}

std::string stats_report(const FrequencyTable& table, int n_parts) {
    std::string out;
    out += "tokens total=" + std::to_string(table.total_tokens()) +
           " unique=" + std::to_string(table.unique_tokens()) + "\n";
    for (const auto& p : partition_by_cumulative_frequency(table, n_parts)) {
        out += "partition " + std::to_string(p.part_index) +
               " unique=" + std::to_string(p.member_tokens.size()) +
               " sum_frequency=" + std::to_string(p.sum_frequency) + " ranks=" +
               std::to_string(p.first_rank) + "-" + std::to_string(p.last_rank) + "\n";
    }
    int q = 0;
    for (const auto& r : quartile_report(table)) {
        ++q;
        if (r.last_rank == 0) {
            out += "quartile " + std::to_string(q) + " empty\n";
            continue;
        }
        out += "quartile " + std::to_string(q) + " ranks=" + std::to_string(r.first_rank) + "-" +
               std::to_string(r.last_rank) +
               " sum_frequency=" + std::to_string(r.sum_frequency) + "\n";
    }
    return out;
}

}  // namespace drugner
