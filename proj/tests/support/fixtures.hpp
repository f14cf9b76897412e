// Shared fixtures and independent brute-force oracles for the test suites.
// Oracles deliberately avoid the library's indexing structures.
#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "drugner/corpus.hpp"
#include "drugner/embedding.hpp"
#include "drugner/representation.hpp"
#include "drugner/rng.hpp"

namespace fixtures {

// The three DrugBank sample sentences with their annotated drug names.
inline std::vector<drugner::AnnotatedSentence> drugbank_sample() {
    using drugner::AnnotatedSentence;
    std::vector<AnnotatedSentence> out;
    {
        AnnotatedSentence s;
        s.id = "s1";
        s.text =
            "modification of surface histidine residues abolishes the cytotoxic activity of "
            "clostridium difficile toxin a";
        drugner::EntityAnnotation a;
        a.char_start = 79;
        a.char_end = 107;
        a.kind = drugner::EntityKind::DrugN;
        a.surface = "clostridium difficile toxin a";
        s.annotations.push_back(a);
        out.push_back(s);
    }
    {
        AnnotatedSentence s;
        s.id = "s2";
        s.text = "antimicrobial activity of ganoderma lucidum extract alone and in with some "
                 "antibiotics.";
        drugner::EntityAnnotation a;
        a.char_start = 26;
        a.char_end = 50;
        a.kind = drugner::EntityKind::Drug;
        a.surface = "ganoderma lucidum extract";
        s.annotations.push_back(a);
        out.push_back(s);
    }
    {
        AnnotatedSentence s;
        s.id = "s3";
        s.text = "on the other hand, surprisingly, green tea gallocatechins, "
                 "(-)-epigallocatechin-3-o-gallate and theasinensin a, potently enhanced the "
                 "promoter activity (182 and 247% activity at 1 microm, respectively).";
        drugner::EntityAnnotation a;
        a.char_start = 33;
        a.char_end = 56;
        a.kind = drugner::EntityKind::Drug;
        a.surface = "green tea gallocatechins";
        s.annotations.push_back(a);
        out.push_back(s);
    }
    return out;
}

// Tiny embedding table with hand-set vectors; dimension D, one vector per
// token, deterministic from the token order.
inline drugner::EmbeddingTable toy_table(const std::vector<std::string>& tokens, int dim,
                                         std::uint64_t seed = 7) {
    drugner::EmbeddingTable table(dim, {}, {});
    drugner::Rng rng(seed);
    for (const auto& t : tokens) {
        std::vector<float> v(dim);
        for (auto& x : v) x = static_cast<float>(rng.uniform(-1.0, 1.0));
        table.insert(t, std::move(v));
    }
    return table;
}

// --- independent oracles -------------------------------------------------

// Longest-prefix label by linear scan over the raw entry list.
inline int oracle_label_tuple(const std::array<std::string, 5>& tokens,
                              const std::vector<std::vector<std::string>>& entries) {
    int best = 0;
    for (const auto& e : entries) {
        if (e.size() > 5) continue;
        bool match = true;
        for (std::size_t k = 0; k < e.size(); ++k)
            if (tokens[k] != e[k]) {
                match = false;
                break;
            }
        if (match && static_cast<int>(e.size()) > best) best = static_cast<int>(e.size());
    }
    return best + 1;
}

// Per-token coverage labels by scanning every (entry, start) pair.
inline std::vector<int> oracle_token_labels(const std::vector<std::string>& tokens,
                                            const std::vector<std::vector<std::string>>& entries) {
    std::vector<int> labels(tokens.size(), 0);
    for (const auto& e : entries) {
        if (e.empty() || e.size() > tokens.size()) continue;
        for (std::size_t start = 0; start + e.size() <= tokens.size(); ++start) {
            bool match = true;
            for (std::size_t k = 0; k < e.size(); ++k)
                if (tokens[start + k] != e[k]) {
                    match = false;
                    break;
                }
            if (match)
                for (std::size_t k = start; k < start + e.size(); ++k) labels[k] = 1;
        }
    }
    return labels;
}

// Random annotated corpus with planted 1..5-token drug names. Common tokens
// are drawn from a frequent pool so candidate-selection fixtures behave like
// the real distribution.
struct RandomCorpus {
    std::vector<drugner::AnnotatedSentence> sentences;
    std::vector<std::vector<std::string>> drug_entries;  // raw, duplicated entries allowed
};

inline RandomCorpus random_corpus(int n_sentences, std::uint64_t seed) {
    drugner::Rng rng(seed);
    std::vector<std::string> common;
    for (int i = 0; i < 20; ++i) common.push_back("w" + std::to_string(i));
    std::vector<std::vector<std::string>> drugs;
    for (int i = 0; i < 12; ++i) {
        int len = 1 + static_cast<int>(rng.uniform_index(5));
        std::vector<std::string> name;
        for (int k = 0; k < len; ++k)
            name.push_back("drug" + std::to_string(i) + (len > 1 ? "p" + std::to_string(k) : ""));
        drugs.push_back(name);
    }

    RandomCorpus corpus;
    for (int s = 0; s < n_sentences; ++s) {
        std::vector<std::string> tokens;
        int len = 4 + static_cast<int>(rng.uniform_index(8));
        for (int i = 0; i < len; ++i)
            tokens.push_back(common[rng.uniform_index(common.size())]);
        std::vector<std::pair<std::size_t, const std::vector<std::string>*>> planted;
        if (rng.uniform01() < 0.7) {
            const auto& name = drugs[rng.uniform_index(drugs.size())];
            std::size_t pos = rng.uniform_index(tokens.size() + 1);
            tokens.insert(tokens.begin() + pos, name.begin(), name.end());
            planted.emplace_back(pos, &name);
        }
        drugner::AnnotatedSentence sent;
        sent.id = "r" + std::to_string(s);
        std::vector<std::size_t> starts(tokens.size());
        std::string text;
        for (std::size_t i = 0; i < tokens.size(); ++i) {
            starts[i] = text.size();
            text += tokens[i];
            if (i + 1 < tokens.size()) text += ' ';
        }
        sent.text = text;
        for (auto& [pos, name] : planted) {
            drugner::EntityAnnotation a;
            a.char_start = starts[pos];
            std::size_t last = pos + name->size() - 1;
            a.char_end = starts[last] + tokens[last].size() - 1;
            a.kind = drugner::EntityKind::Drug;
            a.surface = sent.text.substr(a.char_start, a.char_end - a.char_start + 1);
            sent.annotations.push_back(a);
            corpus.drug_entries.push_back(*name);
        }
        corpus.sentences.push_back(std::move(sent));
    }
    return corpus;
}

// Scratch directory under the build tree.
inline std::filesystem::path temp_dir(const std::string& name) {
    auto dir = std::filesystem::temp_directory_path() / ("drugner-test-" + name);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

}  // namespace fixtures
