#include "drugner/representation.hpp"

#include <algorithm>
#include <sstream>

#include "drugner/util.hpp"

namespace drugner {

DrugLexicon::DrugLexicon(std::vector<std::vector<std::string>> entries) {
    std::sort(entries.begin(), entries.end(), [](const auto& a, const auto& b) {
        if (a.size() != b.size()) return a.size() > b.size();
        return a < b;
    });
    entries.erase(std::unique(entries.begin(), entries.end()), entries.end());
    for (auto& e : entries) {
        if (e.empty() || e.size() > kTupleWidth)
            throw DataError("lexicon entry length must be 1..5");
        by_length_[e.size()].insert(join(e, " "));
        max_length_ = std::max(max_length_, e.size());
    }
    entries_ = std::move(entries);
}

bool DrugLexicon::contains(const std::vector<std::string>& seq) const {
    if (seq.empty() || seq.size() > kTupleWidth) return false;
    return contains_joined(join(seq, " "), seq.size());
}

bool DrugLexicon::contains_joined(const std::string& joined, std::size_t length) const {
    if (length == 0 || length > kTupleWidth) return false;
    return by_length_[length].count(joined) != 0;
}

DrugLexicon build_drug_lexicon(const std::vector<AnnotatedSentence>& sentences) {
    std::vector<std::vector<std::string>> entries;
    for (const auto& s : sentences) {
        for (const auto& a : s.annotations) {
            if (a.kind != EntityKind::Drug && a.kind != EntityKind::DrugN) continue;
            auto tokens = split_ws(to_lower(a.surface));
            if (tokens.empty()) continue;
            if (tokens.size() > kTupleWidth) {
                warn("drug name '" + a.surface + "' has " + std::to_string(tokens.size()) +
                     " tokens, exceeds tuple width; excluded from lexicon");
                continue;
            }
            entries.push_back(std::move(tokens));
        }
    }
    return DrugLexicon(std::move(entries));
}

int label_tuple(const std::array<std::string, kTupleWidth>& tokens, const DrugLexicon& lexicon) {
    std::string joined;
    std::size_t best = 0;
    for (std::size_t k = 1; k <= kTupleWidth; ++k) {
        if (k > 1) joined += ' ';
        joined += tokens[k - 1];
        if (k <= lexicon.max_length() && lexicon.contains_joined(joined, k)) best = k;
    }
    return static_cast<int>(best) + 1;
}

std::vector<float> vectorize_tuple(const std::array<std::string, kTupleWidth>& tokens,
                                   const EmbeddingTable& table) {
    std::vector<float> out;
    out.reserve(static_cast<std::size_t>(kTupleWidth) * table.dimension());
    for (const auto& tok : tokens) {
        auto v = table.vector_of(tok);
        out.insert(out.end(), v.begin(), v.end());
    }
    return out;
}

std::vector<TupleSample> technique1_tuples(const std::vector<TokenizedSentence>& sentences,
                                           const EmbeddingTable& table,
                                           const DrugLexicon& lexicon) {
    std::vector<std::string> stream;
    for (const auto& s : sentences)
        stream.insert(stream.end(), s.tokens.begin(), s.tokens.end());
    std::vector<TupleSample> out;
    if (stream.size() < kTupleWidth) {
        warn("technique 1: token stream shorter than " + std::to_string(kTupleWidth) +
             ", no tuples produced");
        return out;
    }
    out.reserve(stream.size() - kTupleWidth + 1);
    for (std::size_t i = 0; i + kTupleWidth <= stream.size(); ++i) {
        TupleSample t;
        for (int k = 0; k < kTupleWidth; ++k) t.tokens[k] = stream[i + k];
        t.label = label_tuple(t.tokens, lexicon);
        t.vec = vectorize_tuple(t.tokens, table);
        out.push_back(std::move(t));
    }
    return out;
}

std::vector<TupleSample> technique2_tuples(const std::vector<TokenizedSentence>& sentences,
                                           const EmbeddingTable& table,
                                           const DrugLexicon& lexicon) {
    std::vector<TupleSample> out;
    for (const auto& s : sentences) {
        const auto& toks = s.tokens;
        for (std::size_t i = 0; i < toks.size(); ++i) {
            TupleSample t;
            for (int k = 0; k < kTupleWidth; ++k)
                t.tokens[k] = i + k < toks.size() ? toks[i + k] : kPadToken;
            t.label = label_tuple(t.tokens, lexicon);
            t.vec = vectorize_tuple(t.tokens, table);
            out.push_back(std::move(t));
        }
    }
    return out;
}

std::vector<int> sequence_labels(const std::vector<std::string>& tokens,
                                 const DrugLexicon& lexicon) {
    std::vector<int> labels(tokens.size(), 0);
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        std::string joined;
        for (std::size_t len = 1; len <= lexicon.max_length() && i + len <= tokens.size();
             ++len) {
            if (len > 1) joined += ' ';
            joined += tokens[i + len - 1];
            if (lexicon.contains_joined(joined, len))
                for (std::size_t k = i; k < i + len; ++k) labels[k] = 1;
        }
    }
    return labels;
}

std::vector<SequenceSample> technique3_sequences(const std::vector<TokenizedSentence>& sentences,
                                                 const EmbeddingTable& table,
                                                 const DrugLexicon& lexicon, DistanceBlock block,
                                                 const std::vector<std::string>* ids) {
    const int dim = table.dimension();
    std::vector<SequenceSample> out;
    out.reserve(sentences.size());
    for (std::size_t si = 0; si < sentences.size(); ++si) {
        const auto& toks = sentences[si].tokens;
        SequenceSample seq;
        seq.sentence_id = ids ? (*ids)[si] : std::to_string(si);
        auto labels = sequence_labels(toks, lexicon);
        std::vector<float> prev;
        for (std::size_t i = 0; i < toks.size(); ++i) {
            SequenceStep step;
            step.token = toks[i];
            step.label = labels[i];
            auto v = table.vector_of(toks[i]);
            step.features.assign(v.begin(), v.end());
            step.features.resize(2 * static_cast<std::size_t>(dim), 0.0f);
            if (i > 0) {
                if (block == DistanceBlock::Displacement) {
                    for (int d = 0; d < dim; ++d) step.features[dim + d] = v[d] - prev[d];
                } else {
                    float dist = static_cast<float>(euclidean(v, prev));
                    for (int d = 0; d < dim; ++d) step.features[dim + d] = dist;
                }
            }
            prev = std::move(v);
            seq.steps.push_back(std::move(step));
        }
        out.push_back(std::move(seq));
    }
    return out;
}

std::string tuples_to_tsv(const std::vector<TupleSample>& tuples) {
    std::string out;
    for (const auto& t : tuples) {
        for (const auto& tok : t.tokens) {
            out += tok;
            out += '\t';
        }
        out += std::to_string(t.label);
        for (float x : t.vec) {
            out += '\t';
            out += fmt_g9(x);
        }
        out += '\n';
    }
    return out;
}

std::vector<TupleSample> tuples_from_tsv(const std::string& text) {
    std::vector<TupleSample> out;
    std::istringstream in(text);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        auto f = split_on(line, '\t');
        if (f.size() < kTupleWidth + 1)
            throw DataError("bad tuple row at line " + std::to_string(lineno));
        TupleSample t;
        for (int k = 0; k < kTupleWidth; ++k) t.tokens[k] = f[k];
        t.label = std::stoi(f[kTupleWidth]);
        t.vec.reserve(f.size() - kTupleWidth - 1);
        for (std::size_t i = kTupleWidth + 1; i < f.size(); ++i)
            t.vec.push_back(std::stof(f[i]));
        out.push_back(std::move(t));
    }
    return out;
}

std::string sequences_to_tsv(const std::vector<SequenceSample>& sequences) {
    std::string out;
    for (const auto& s : sequences) {
        out += "sentence\t" + s.sentence_id + "\t" + std::to_string(s.steps.size()) + "\n";
        for (const auto& step : s.steps) {
            out += step.token + "\t" + std::to_string(step.label);
            for (float x : step.features) {
                out += '\t';
                out += fmt_g9(x);
            }
            out += '\n';
        }
    }
    return out;
}

std::vector<SequenceSample> sequences_from_tsv(const std::string& text) {
    std::vector<SequenceSample> out;
    std::istringstream in(text);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        auto f = split_on(line, '\t');
        if (f[0] == "sentence") {
            if (f.size() != 3) throw DataError("bad sequence header at line " + std::to_string(lineno));
            SequenceSample s;
            s.sentence_id = f[1];
            s.steps.reserve(std::stoull(f[2]));
            out.push_back(std::move(s));
        } else {
            if (out.empty() || f.size() < 2)
                throw DataError("bad sequence row at line " + std::to_string(lineno));
            SequenceStep step;
            step.token = f[0];
            step.label = std::stoi(f[1]);
            step.features.reserve(f.size() - 2);
            for (std::size_t i = 2; i < f.size(); ++i) step.features.push_back(std::stof(f[i]));
            out.back().steps.push_back(std::move(step));
        }
    }
    return out;
}

}  // namespace drugner
