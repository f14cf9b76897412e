#include <doctest.h>

#include "drugner/selection.hpp"
#include "drugner/util.hpp"
#include "support/fixtures.hpp"

using namespace drugner;

namespace {

TupleSample make_tuple(const std::string& t1, int label, std::vector<float> vec) {
    TupleSample t;
    t.tokens = {t1, "*", "*", "*", "*"};
    t.label = label;
    t.vec = std::move(vec);
    return t;
}

// Skewed table: "the" dominates part 1; rare tokens land in parts 2-3.
FrequencyTable skewed_table() {
    std::vector<TokenizedSentence> sents;
    for (int i = 0; i < 30; ++i) sents.push_back({{"the"}});
    for (int i = 0; i < 6; ++i) sents.push_back({{"mid1"}});
    for (int i = 0; i < 5; ++i) sents.push_back({{"mid2"}});
    sents.push_back({{"rare1"}});
    sents.push_back({{"rare2"}});
    sents.push_back({{"rare3"}});
    return build_frequency_table(sents);
}

}  // namespace

TEST_CASE("select_all is the identity") {
    CHECK(select_all({}).empty());
    std::vector<TupleSample> tuples{make_tuple("a", 1, {0}), make_tuple("b", 2, {1})};
    auto out = select_all(tuples);
    REQUIRE(out.size() == 2);
    CHECK(out[0].tokens[0] == "a");
    CHECK(out[1].tokens[0] == "b");
}

TEST_CASE("select_lower_two_thirds keeps tuples whose lead token is not in part 1") {
    auto table = skewed_table();
    // part 1 should be exactly {"the"} (30 of 45 tokens >= 15 target)
    auto parts = partition_by_cumulative_frequency(table, 3);
    REQUIRE(parts[0].member_tokens == std::vector<std::string>{"the"});

    std::vector<TupleSample> tuples{
        make_tuple("the", 1, {0}),   make_tuple("mid1", 1, {0}), make_tuple("rare1", 2, {0}),
        make_tuple("unseen", 2, {0}), make_tuple("the", 1, {0}),
    };
    auto kept = select_lower_two_thirds(tuples, table);
    REQUIRE(kept.size() == 3);
    CHECK(kept[0].tokens[0] == "mid1");
    CHECK(kept[1].tokens[0] == "rare1");
    CHECK(kept[2].tokens[0] == "unseen");  // absent token counts as rarest
}

TEST_CASE("select_lower_two_thirds empties when every lead token is frequent") {
    auto table = skewed_table();
    std::vector<TupleSample> tuples{make_tuple("the", 1, {0}), make_tuple("the", 1, {1})};
    CHECK(select_lower_two_thirds(tuples, table).empty());
}

TEST_CASE("drug-recall preservation: rare-lead drug tuples all survive") {
    // mirrors the token-distribution tables: every drug lead token is rare
    auto corpus = fixtures::random_corpus(120, 555);
    std::vector<TokenizedSentence> train_tok = tokenize_all(corpus.sentences);
    // inflate common-token counts so part 1 is only common tokens
    for (int i = 0; i < 40; ++i) train_tok.push_back({{"w0", "w1", "w2", "w3"}});
    auto table = build_frequency_table(train_tok);

    auto lexicon = build_drug_lexicon(corpus.sentences);
    auto emb = fixtures::toy_table({}, 2);
    auto tuples = technique2_tuples(tokenize_all(corpus.sentences), emb, lexicon);
    auto kept = select_lower_two_thirds(tuples, table);

    std::size_t drug_before = 0, drug_after = 0;
    for (const auto& t : tuples) drug_before += t.label > 1;
    for (const auto& t : kept) drug_after += t.label > 1;
    REQUIRE(drug_before > 0);
    CHECK(drug_after == drug_before);       // 100% of drug tuples retained
    CHECK(kept.size() < tuples.size());     // and some noise removed
}

TEST_CASE("kmeans separates two well-separated blobs") {
    Rng rng(9);
    std::vector<std::vector<double>> points;
    std::vector<int> truth;
    for (int i = 0; i < 40; ++i) {
        double cx = i < 20 ? 0.0 : 100.0;
        points.push_back({cx + rng.uniform(-1, 1), cx + rng.uniform(-1, 1)});
        truth.push_back(i < 20 ? 0 : 1);
    }
    auto model = kmeans(points, 2, 42);
    // nearest-centroid oracle agreement
    for (std::size_t i = 0; i < points.size(); ++i) {
        double d0 = 0, d1 = 0;
        for (int d = 0; d < 2; ++d) {
            d0 += (points[i][d] - model.centroids[0][d]) * (points[i][d] - model.centroids[0][d]);
            d1 += (points[i][d] - model.centroids[1][d]) * (points[i][d] - model.centroids[1][d]);
        }
        CHECK(model.assignment[i] == (d0 <= d1 ? 0 : 1));
    }
    // blob membership: all points of a blob share one cluster
    for (int i = 1; i < 20; ++i) CHECK(model.assignment[i] == model.assignment[0]);
    for (int i = 21; i < 40; ++i) CHECK(model.assignment[i] == model.assignment[20]);
    CHECK(model.assignment[0] != model.assignment[20]);
}

TEST_CASE("kmeans trivial cases and errors") {
    std::vector<std::vector<double>> pts{{1, 1}, {2, 2}, {3, 3}};
    auto each_own = kmeans(pts, 3, 7);
    CHECK(each_own.distortion_log.back() == doctest::Approx(0.0));

    std::vector<std::vector<double>> same{{5, 5}, {5, 5}, {5, 5}};
    auto one = kmeans(same, 1, 7);
    CHECK(one.centroids[0][0] == doctest::Approx(5.0));
    CHECK(one.centroids[0][1] == doctest::Approx(5.0));

    CHECK_THROWS_AS(kmeans(pts, 4, 7), ConfigError);
    CHECK_THROWS_AS(kmeans(pts, 0, 7), ConfigError);
}

TEST_CASE("kmeans distortion is non-increasing and runs are seed-deterministic") {
    Rng rng(123);
    std::vector<std::vector<double>> points;
    for (int i = 0; i < 60; ++i)
        points.push_back({rng.uniform(-5, 5), rng.uniform(-5, 5), rng.uniform(-5, 5)});
    auto m1 = kmeans(points, 4, 99);
    auto m2 = kmeans(points, 4, 99);
    CHECK(m1.assignment == m2.assignment);
    for (std::size_t i = 1; i < m1.distortion_log.size(); ++i)
        CHECK(m1.distortion_log[i] <= m1.distortion_log[i - 1] + 1e-9);
}

TEST_CASE("cluster selection keeps the rare-token blob") {
    // two separable blobs in vector space; blob A led by a frequent token,
    // blob B led by rare tokens
    auto table = skewed_table();
    std::vector<TupleSample> tuples;
    Rng rng(5);
    for (int i = 0; i < 25; ++i) {
        bool frequent = i % 2 == 0 && i < 40;
        std::string lead = frequent ? "the" : (i % 3 ? "rare1" : "rare2");
        double cx = frequent ? 0.0 : 50.0;
        tuples.push_back(make_tuple(lead, frequent ? 1 : 2,
                                    {static_cast<float>(cx + rng.uniform(-1, 1)),
                                     static_cast<float>(cx + rng.uniform(-1, 1))}));
    }
    SelectionStrategy strategy;
    strategy.kind = SelectionKind::Cluster;
    strategy.x = 1;
    strategy.y = 2;
    auto kept = select_by_clustering(tuples, strategy, table, 17);
    REQUIRE(!kept.empty());
    for (const auto& t : kept) CHECK(t.tokens[0] != "the");
    std::size_t rare_total = 0;
    for (const auto& t : tuples) rare_total += t.tokens[0] != "the";
    CHECK(kept.size() == rare_total);
}

TEST_CASE("selection output is a subset preserving order") {
    auto corpus = fixtures::random_corpus(40, 321);
    auto lexicon = build_drug_lexicon(corpus.sentences);
    auto emb = fixtures::toy_table({}, 2);
    auto tuples = technique2_tuples(tokenize_all(corpus.sentences), emb, lexicon);
    auto table = build_frequency_table(tokenize_all(corpus.sentences));

    SelectionStrategy strategy;
    strategy.kind = SelectionKind::Cluster;
    strategy.x = 2;
    strategy.y = 3;
    for (auto kind : {SelectionKind::LowerTwoThirds, SelectionKind::Cluster}) {
        strategy.kind = kind;
        auto kept = apply_selection(tuples, strategy, table, 7);
        // order-preserving subset: match kept against tuples left to right
        std::size_t cursor = 0;
        for (const auto& k : kept) {
            bool found = false;
            while (cursor < tuples.size()) {
                if (tuples[cursor].tokens == k.tokens && tuples[cursor].vec == k.vec) {
                    found = true;
                    ++cursor;
                    break;
                }
                ++cursor;
            }
            CHECK(found);
        }
        // determinism
        auto again = apply_selection(tuples, strategy, table, 7);
        CHECK(again.size() == kept.size());
    }
}

TEST_CASE("cluster strategy validates 1 <= x < y") {
    std::vector<TupleSample> tuples{make_tuple("a", 1, {0, 0}), make_tuple("b", 1, {1, 1})};
    auto table = skewed_table();
    SelectionStrategy bad;
    bad.kind = SelectionKind::Cluster;
    bad.x = 2;
    bad.y = 2;
    CHECK_THROWS_AS(select_by_clustering(tuples, bad, table, 1), ConfigError);
    bad.x = 0;
    CHECK_THROWS_AS(select_by_clustering(tuples, bad, table, 1), ConfigError);
}

TEST_CASE("selection manifest records strategy and counts") {
    SelectionStrategy s;
    s.kind = SelectionKind::Cluster;
    s.x = 2;
    s.y = 3;
    auto text = selection_manifest(s, 100, 58, 7);
    CHECK(text.find("strategy = cluster") != std::string::npos);
    CHECK(text.find("tuples_before = 100") != std::string::npos);
    CHECK(text.find("tuples_after = 58") != std::string::npos);
}
