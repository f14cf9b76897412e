#include "drugner/embedding.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include "drugner/rng.hpp"
#include "drugner/util.hpp"

namespace drugner {

EmbeddingTable::EmbeddingTable(int dimension, std::vector<std::string> tokens,
                               std::vector<std::vector<float>> vectors)
    : dimension_(dimension), tokens_(std::move(tokens)), vectors_(std::move(vectors)) {
    if (tokens_.size() != vectors_.size()) throw DataError("embedding token/vector count mismatch");
    index_.reserve(tokens_.size());
    for (std::size_t i = 0; i < tokens_.size(); ++i) {
        if (vectors_[i].size() != static_cast<std::size_t>(dimension_))
            throw DataError("embedding vector for '" + tokens_[i] + "' has wrong length");
        index_[tokens_[i]] = i;
    }
}

void EmbeddingTable::insert(const std::string& token, std::vector<float> v) {
    if (dimension_ == 0) dimension_ = static_cast<int>(v.size());
    if (v.size() != static_cast<std::size_t>(dimension_))
        throw DataError("embedding vector for '" + token + "' has wrong length");
    auto it = index_.find(token);
    if (it != index_.end()) {
        vectors_[it->second] = std::move(v);
        return;
    }
    index_[token] = tokens_.size();
    tokens_.push_back(token);
    vectors_.push_back(std::move(v));
}

std::vector<float> EmbeddingTable::vector_of(const std::string& token) const {
    if (token == kPadToken) return std::vector<float>(dimension_, 0.0f);
    auto it = index_.find(token);
    if (it != index_.end()) return vectors_[it->second];
    // Deterministic fallback in the same range as the training init.
    Rng rng(fnv1a64(token) ^ 0x9e3779b97f4a7c15ull);
    std::vector<float> v(dimension_);
    const double scale = dimension_ > 0 ? 0.5 / dimension_ : 0.0;
    for (auto& x : v) x = static_cast<float>(rng.uniform(-scale, scale));
    return v;
}

const std::vector<float>& EmbeddingTable::stored(const std::string& token) const {
    auto it = index_.find(token);
    if (it == index_.end()) throw DataError("token not in embedding table: " + token);
    return vectors_[it->second];
}

double cosine(std::span<const float> u, std::span<const float> v) {
    if (u.size() != v.size()) throw DataError("cosine: dimension mismatch");
    double dot = 0, nu = 0, nv = 0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        dot += static_cast<double>(u[i]) * v[i];
        nu += static_cast<double>(u[i]) * u[i];
        nv += static_cast<double>(v[i]) * v[i];
    }
    if (nu == 0.0 || nv == 0.0) throw DataError("cosine: undefined for zero-norm vector");
    double c = dot / (std::sqrt(nu) * std::sqrt(nv));
    return std::clamp(c, -1.0, 1.0);
}

double euclidean(std::span<const float> u, std::span<const float> v) {
    if (u.size() != v.size()) throw DataError("euclidean: dimension mismatch");
    double acc = 0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        double d = static_cast<double>(u[i]) - v[i];
        acc += d * d;
    }
    return std::sqrt(acc);
}

double cosine(const std::vector<float>& u, const std::vector<float>& v) {
    return cosine(std::span<const float>(u), std::span<const float>(v));
}

double euclidean(const std::vector<float>& u, const std::vector<float>& v) {
    return euclidean(std::span<const float>(u), std::span<const float>(v));
}

namespace {

struct Vocab {
    std::vector<std::string> words;           // ordered by count desc, first-seen asc
    std::vector<std::uint64_t> counts;
    std::unordered_map<std::string, int> id;  // token -> index
    std::uint64_t train_tokens = 0;           // occurrences of in-vocab tokens
};

Vocab build_vocab(const std::vector<TokenizedSentence>& sentences, std::uint64_t min_count) {
    Vocab v;
    FrequencyTable table = build_frequency_table(sentences);
    for (const auto& e : table.entries()) {
        if (e.count < min_count) continue;
        if (e.token == kPadToken) continue;  // pad never trains
        v.id[e.token] = static_cast<int>(v.words.size());
        v.words.push_back(e.token);
        v.counts.push_back(e.count);
        v.train_tokens += e.count;
    }
    return v;
}

double fast_sigmoid(double x) {
    if (x > 6.0) return 1.0;
    if (x < -6.0) return 0.0;
    return 1.0 / (1.0 + std::exp(-x));
}

}  // namespace

EmbeddingTable train_cbow(const std::vector<TokenizedSentence>& sentences,
                          const CbowConfig& config) {
    if (config.dimension <= 0 || config.window < 1)
        throw ConfigError("cbow: dimension must be > 0 and window >= 1");
    std::uint64_t total = 0;
    for (const auto& s : sentences) total += s.tokens.size();
    if (total == 0) throw ConfigError("cbow: empty corpus");

    Vocab vocab = build_vocab(sentences, config.min_count);
    const int dim = config.dimension;
    const std::size_t vsize = vocab.words.size();

    Rng rng(config.rng_seed);
    std::vector<float> syn0(vsize * dim);
    std::vector<float> syn1(vsize * dim, 0.0f);
    for (auto& x : syn0) x = static_cast<float>(rng.uniform(-0.5, 0.5) / dim);

    // Unigram^0.75 sampling via prefix sums + binary search.
    std::vector<double> cumulative(vsize);
    double acc = 0;
    for (std::size_t i = 0; i < vsize; ++i) {
        acc += std::pow(static_cast<double>(vocab.counts[i]), 0.75);
        cumulative[i] = acc;
    }
    auto sample_negative = [&]() -> int {
        double r = rng.uniform01() * acc;
        auto it = std::upper_bound(cumulative.begin(), cumulative.end(), r);
        if (it == cumulative.end()) --it;
        return static_cast<int>(it - cumulative.begin());
    };

    const std::uint64_t planned = static_cast<std::uint64_t>(config.epochs) * vocab.train_tokens;
    std::uint64_t processed = 0;
    std::vector<double> hidden(dim), hidden_err(dim);
    std::vector<int> sent_ids;

    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        for (const auto& sentence : sentences) {
            sent_ids.clear();
            for (const auto& tok : sentence.tokens) {
                auto it = vocab.id.find(tok);
                if (it != vocab.id.end()) sent_ids.push_back(it->second);
            }
            for (std::size_t pos = 0; pos < sent_ids.size(); ++pos) {
                double lr = config.learning_rate *
                            (1.0 - static_cast<double>(processed) / (planned + 1));
                if (lr < config.learning_rate * 1e-4) lr = config.learning_rate * 1e-4;
                ++processed;

                // word2vec-style randomly reduced window
                int reduced = static_cast<int>(rng.uniform_index(config.window));
                int lo = static_cast<int>(pos) - config.window + reduced;
                int hi = static_cast<int>(pos) + config.window - reduced;
                std::fill(hidden.begin(), hidden.end(), 0.0);
                std::fill(hidden_err.begin(), hidden_err.end(), 0.0);
                int cw = 0;
                for (int p = lo; p <= hi; ++p) {
                    if (p < 0 || p >= static_cast<int>(sent_ids.size()) ||
                        p == static_cast<int>(pos))
                        continue;
                    const float* v = &syn0[static_cast<std::size_t>(sent_ids[p]) * dim];
                    for (int d = 0; d < dim; ++d) hidden[d] += v[d];
                    ++cw;
                }
                if (cw == 0) continue;
                for (int d = 0; d < dim; ++d) hidden[d] /= cw;

                const int target = sent_ids[pos];
                for (int n = 0; n <= config.negative_samples; ++n) {
                    int word;
                    double label;
                    if (n == 0) {
                        word = target;
                        label = 1.0;
                    } else {
                        word = sample_negative();
                        if (word == target) continue;
                        label = 0.0;
                    }
                    float* out = &syn1[static_cast<std::size_t>(word) * dim];
                    double dot = 0;
                    for (int d = 0; d < dim; ++d) dot += hidden[d] * out[d];
                    double g = (label - fast_sigmoid(dot)) * lr;
                    for (int d = 0; d < dim; ++d) {
                        hidden_err[d] += g * out[d];
                        out[d] += static_cast<float>(g * hidden[d]);
                    }
                }
                for (int p = lo; p <= hi; ++p) {
                    if (p < 0 || p >= static_cast<int>(sent_ids.size()) ||
                        p == static_cast<int>(pos))
                        continue;
                    float* v = &syn0[static_cast<std::size_t>(sent_ids[p]) * dim];
                    for (int d = 0; d < dim; ++d) v[d] += static_cast<float>(hidden_err[d]);
                }
            }
        }
    }

    // Assemble: trained vectors, hash-seeded vectors for below-min-count
    // tokens, zero vector for pad when it occurs in the corpus.
    EmbeddingTable table(dim, {}, {});
    for (std::size_t i = 0; i < vsize; ++i) {
        std::vector<float> v(syn0.begin() + i * dim, syn0.begin() + (i + 1) * dim);
        table.insert(vocab.words[i], std::move(v));
    }
    FrequencyTable all = build_frequency_table(sentences);
    for (const auto& e : all.entries()) {
        if (table.contains(e.token)) continue;
        if (e.token == kPadToken) {
            table.insert(e.token, std::vector<float>(dim, 0.0f));
        } else {
            table.insert(e.token, table.vector_of(e.token));  // hash fallback
        }
    }
    return table;
}

std::vector<DistanceStats> group_distance_stats(
    const EmbeddingTable& table, const std::unordered_set<std::string>& drug_tokens) {
    std::vector<const std::vector<float>*> drug, nondrug;
    for (const auto& tok : table.tokens()) {
        if (tok == kPadToken) continue;
        if (drug_tokens.count(tok)) {
            drug.push_back(&table.stored(tok));
        } else {
            nondrug.push_back(&table.stored(tok));
        }
    }
    for (const auto& tok : drug_tokens)
        if (!table.contains(tok)) throw DataError("drug token not in table: " + tok);

    auto within = [](const std::vector<const std::vector<float>*>& g, DistanceStats& st) {
        for (std::size_t i = 0; i < g.size(); ++i)
            for (std::size_t j = i + 1; j < g.size(); ++j) {
                st.mean_euclidean += euclidean(*g[i], *g[j]);
                st.mean_cosine += cosine(*g[i], *g[j]);
                ++st.pair_count;
            }
    };
    auto across = [](const std::vector<const std::vector<float>*>& a,
                     const std::vector<const std::vector<float>*>& b, DistanceStats& st) {
        for (const auto* u : a)
            for (const auto* v : b) {
                st.mean_euclidean += euclidean(*u, *v);
                st.mean_cosine += cosine(*u, *v);
                ++st.pair_count;
            }
    };

    std::vector<DistanceStats> out;
    DistanceStats dd{"drug-drug"}, dn{"drug-nondrug"}, nn{"nondrug-nondrug"};
    within(drug, dd);
    across(drug, nondrug, dn);
    within(nondrug, nn);
    for (auto* st : {&dd, &dn, &nn}) {
        if (st->pair_count == 0) {
            warn("group_distance_stats: no pairs for " + st->group_pair + ", record omitted");
            continue;
        }
        st->mean_euclidean /= st->pair_count;
        st->mean_cosine /= st->pair_count;
        out.push_back(*st);
    }
    return out;
}

double mean_pairwise_euclidean(const std::vector<std::vector<float>>& vectors,
                               PairNormalization norm) {
    const std::size_t n = vectors.size();
    if (n < 2) throw ConfigError("mean_pairwise_euclidean: need at least 2 vectors");
    double sum = 0;
    for (std::size_t i = 0; i + 1 < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) sum += euclidean(vectors[i], vectors[j]);
    double denom = static_cast<double>(n) * (n - 1);
    if (norm == PairNormalization::UnorderedPairs) denom /= 2.0;
    return sum / denom;
}

std::vector<std::string> nearest_neighbors(const EmbeddingTable& table, const std::string& token,
                                           std::size_t k) {
    if (!table.contains(token)) throw DataError("nearest_neighbors: unknown token " + token);
    const auto& q = table.stored(token);
    std::vector<std::pair<double, std::string>> scored;
    for (const auto& other : table.tokens()) {
        if (other == token) continue;
        const auto& v = table.stored(other);
        double nv = 0;
        for (float x : v) nv += static_cast<double>(x) * x;
        if (nv == 0.0) continue;  // pad and other zero vectors have no direction
        scored.emplace_back(cosine(q, v), other);
    }
    std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first > b.first;
        return a.second < b.second;
    });
    if (scored.size() > k) scored.resize(k);
    std::vector<std::string> out;
    out.reserve(scored.size());
    for (auto& [c, t] : scored) out.push_back(std::move(t));
    return out;
}

void save_embedding_text(const EmbeddingTable& table, const std::string& path) {
    std::string out = std::to_string(table.size()) + " " + std::to_string(table.dimension()) + "\n";
    for (const auto& tok : table.tokens()) {
        out += tok;
        for (float x : table.stored(tok)) {
            out += ' ';
            out += fmt_g9(x);
        }
        out += '\n';
    }
    write_text_file(path, out);
}

EmbeddingTable load_embedding_text(const std::string& path) {
    std::istringstream in(read_text_file(path));
    std::size_t count;
    int dim;
    if (!(in >> count >> dim)) throw DataError("bad embedding header in " + path);
    EmbeddingTable table(dim, {}, {});
    std::string tok;
    for (std::size_t i = 0; i < count; ++i) {
        if (!(in >> tok)) throw DataError("truncated embedding file " + path);
        std::vector<float> v(dim);
        for (int d = 0; d < dim; ++d)
            if (!(in >> v[d])) throw DataError("truncated embedding row in " + path);
        table.insert(tok, std::move(v));
    }
    return table;
}

void save_embedding_binary(const EmbeddingTable& table, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write " + path);
    std::string header = "drugner-emb-bin " + std::to_string(table.size()) + " " +
                         std::to_string(table.dimension()) + "\n";
    out.write(header.data(), static_cast<std::streamsize>(header.size()));
    for (const auto& tok : table.tokens()) {
        out.write(tok.data(), static_cast<std::streamsize>(tok.size()));
        out.put('\0');
        const auto& v = table.stored(tok);
        static_assert(sizeof(float) == 4);
        out.write(reinterpret_cast<const char*>(v.data()),
                  static_cast<std::streamsize>(v.size() * sizeof(float)));
    }
}

EmbeddingTable load_embedding_binary(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open " + path);
    std::string header;
    std::getline(in, header);
    std::istringstream hs(header);
    std::string magic;
    std::size_t count;
    int dim;
    if (!(hs >> magic >> count >> dim) || magic != "drugner-emb-bin")
        throw DataError("bad binary embedding header in " + path);
    EmbeddingTable table(dim, {}, {});
    for (std::size_t i = 0; i < count; ++i) {
        std::string tok;
        std::getline(in, tok, '\0');
        std::vector<float> v(dim);
        in.read(reinterpret_cast<char*>(v.data()),
                static_cast<std::streamsize>(v.size() * sizeof(float)));
        if (!in) throw DataError("truncated binary embedding file " + path);
        table.insert(tok, std::move(v));
    }
    return table;
}

}  // namespace drugner
