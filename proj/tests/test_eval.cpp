#include <doctest.h>

#include <cmath>

#include "drugner/eval.hpp"
#include "drugner/rng.hpp"
#include "drugner/util.hpp"
#include "support/fixtures.hpp"

using namespace drugner;

namespace {

NameSet names(std::initializer_list<std::vector<std::string>> list) { return NameSet(list); }

}  // namespace

TEST_CASE("score on hand sets") {
    auto r = score(names({{"a"}, {"b"}, {"d"}}), names({{"a"}, {"b"}, {"c"}}));
    CHECK(r.true_positive == 2);
    CHECK(r.false_positive == 1);
    CHECK(r.false_negative == 1);
    CHECK(r.precision == doctest::Approx(2.0 / 3.0));
    CHECK(r.recall == doctest::Approx(2.0 / 3.0));
    CHECK(r.f_score == doctest::Approx(2.0 / 3.0));
}

TEST_CASE("identical nonempty sets score perfectly") {
    auto gold = names({{"sodium", "acid", "phosphate"}, {"plenaxis"}});
    auto r = score(gold, gold);
    CHECK(r.precision == 1.0);
    CHECK(r.recall == 1.0);
    CHECK(r.f_score == 1.0);
}

TEST_CASE("empty extraction keeps the report total") {
    set_warnings_enabled(false);
    auto r = score({}, names({{"a"}}));
    set_warnings_enabled(true);
    CHECK(r.precision == 1.0);  // convention, with warning
    CHECK(r.recall == 0.0);
    CHECK(r.f_score == 0.0);
}

TEST_CASE("count consistency: TP+FP = |extracted|, TP+FN = |gold|") {
    Rng rng(12);
    for (int trial = 0; trial < 30; ++trial) {
        NameSet extracted, gold;
        for (int i = 0; i < 12; ++i) {
            std::vector<std::string> name{"n" + std::to_string(rng.uniform_index(9))};
            if (rng.uniform01() < 0.5) extracted.insert(name);
            if (rng.uniform01() < 0.5) gold.insert(name);
        }
        if (extracted.empty() || gold.empty()) continue;
        auto r = score(extracted, gold);
        CHECK(r.true_positive + r.false_positive == extracted.size());
        CHECK(r.true_positive + r.false_negative == gold.size());
        // harmonic identity and mean bound
        double pr = r.precision + r.recall;
        if (pr > 0)
            CHECK(r.f_score == doctest::Approx(2 * r.precision * r.recall / pr).epsilon(1e-12));
        CHECK(r.f_score <= (r.precision + r.recall) / 2 + 1e-12);
    }
}

TEST_CASE("table-12 style internal consistency of the harmonic mean") {
    // P=1, R=0.8921 reproduces the published F at 4 decimals
    NameSet gold, extracted;
    for (int i = 0; i < 10000; ++i) gold.insert({"g" + std::to_string(i)});
    int tp = 8921;
    int k = 0;
    for (const auto& name : gold) {
        if (k++ >= tp) break;
        extracted.insert(name);
    }
    auto r = score(extracted, gold);
    CHECK(r.precision == 1.0);
    CHECK(r.recall == doctest::Approx(0.8921).epsilon(1e-12));
    CHECK(std::abs(r.f_score - 0.9430) < 5e-5);
}

TEST_CASE("tuples_to_nameset extracts leading tokens per predicted class") {
    std::vector<TupleSample> tuples(3);
    tuples[0].tokens = {"clostridium", "difficile", "toxin", "a", "antimicrobial"};
    tuples[1].tokens = {"studies", "with", "plenaxis", "were", "performed"};
    tuples[2].tokens = {"plenaxis", "were", "performed", "cytochrome", "p-450"};
    auto set = tuples_to_nameset({5, 1, 2}, tuples);
    CHECK(set == names({{"clostridium", "difficile", "toxin", "a"}, {"plenaxis"}}));

    CHECK(tuples_to_nameset({1, 1, 1}, tuples).empty());

    // duplicates collapse under set semantics
    auto dup = tuples_to_nameset({2, 1, 2}, {tuples[2], tuples[1], tuples[2]});
    CHECK(dup == names({{"plenaxis"}}));

    CHECK_THROWS_AS(tuples_to_nameset({1, 1}, tuples), DataError);
}

TEST_CASE("sequences_to_nameset merges contiguous runs") {
    SequenceSample s1, s2;
    s1.sentence_id = "1";
    for (const char* t : {"drug", "interaction", "studies", "with", "plenaxis", "were",
                          "performed"}) {
        SequenceStep st;
        st.token = t;
        s1.steps.push_back(st);
    }
    s2.sentence_id = "2";
    for (const char* t : {"cytochrome", "p-450", "is", "not", "known", "in", "the"}) {
        SequenceStep st;
        st.token = t;
        s2.steps.push_back(st);
    }
    auto set = sequences_to_nameset({{0, 0, 0, 0, 1, 0, 0}, {1, 1, 0, 0, 0, 0, 0}}, {s1, s2});
    CHECK(set == names({{"plenaxis"}, {"cytochrome", "p-450"}}));

    CHECK(sequences_to_nameset({{0, 0, 0, 0, 0, 0, 0}, {0, 0, 0, 0, 0, 0, 0}}, {s1, s2}).empty());
}

TEST_CASE("gold nameset collects drug and drug-n surfaces only") {
    auto sentences = fixtures::drugbank_sample();
    // add a brand annotation that must not appear
    EntityAnnotation brand;
    brand.char_start = 0;
    brand.char_end = 11;
    brand.kind = EntityKind::Brand;
    brand.surface = "modification";
    sentences[0].annotations.push_back(brand);
    auto gold = gold_nameset(sentences);
    CHECK(gold == names({{"clostridium", "difficile", "toxin", "a"},
                         {"ganoderma", "lucidum", "extract"},
                         {"green", "tea", "gallocatechins"}}));
}

TEST_CASE("label-oracle round trip: gold tuple labels reproduce the test-set entries") {
    auto corpus = fixtures::random_corpus(80, 909);
    auto lexicon = build_drug_lexicon(corpus.sentences);
    auto toks = tokenize_all(corpus.sentences);
    auto table = fixtures::toy_table({}, 2);
    auto tuples = technique2_tuples(toks, table, lexicon);

    std::vector<int> gold_labels;
    for (const auto& t : tuples) gold_labels.push_back(t.label);
    auto extracted = tuples_to_nameset(gold_labels, tuples);

    // expected: exactly the lexicon entries that occur in the sentences
    NameSet expected;
    for (const auto& e : lexicon.entries()) {
        bool found = false;
        for (const auto& s : toks) {
            for (std::size_t start = 0; !found && start + e.size() <= s.tokens.size(); ++start) {
                bool match = true;
                for (std::size_t k = 0; k < e.size(); ++k)
                    if (s.tokens[start + k] != e[k]) {
                        match = false;
                        break;
                    }
                found = match;
            }
            if (found) break;
        }
        if (found) expected.insert(e);
    }
    CHECK(extracted == expected);
}

TEST_CASE("report text pins four decimals") {
    EvalReport r;
    r.precision = 1.0;
    r.recall = 0.64739999;
    r.f_score = 0.78590001;
    r.true_positive = 3;
    auto text = report_to_text(r);
    CHECK(text.find("precision 1.0000") != std::string::npos);
    CHECK(text.find("recall 0.6474") != std::string::npos);
    CHECK(text.find("f_score 0.7859") != std::string::npos);
    CHECK(text.find("true_positive 3") != std::string::npos);
}

TEST_CASE("binary label scorer counts token-level matches") {
    auto r = score_binary_labels({1, 0, 1, 1, 0}, {1, 0, 0, 1, 1});
    CHECK(r.true_positive == 2);
    CHECK(r.false_positive == 1);
    CHECK(r.false_negative == 1);
    CHECK_THROWS_AS(score_binary_labels({1}, {1, 0}), DataError);
}
