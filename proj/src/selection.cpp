#include "drugner/selection.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <unordered_set>

#include "drugner/rng.hpp"
#include "drugner/util.hpp"

namespace drugner {

SelectionKind selection_kind_from(const std::string& name) {
    if (name == "all") return SelectionKind::All;
    if (name == "lower_two_thirds") return SelectionKind::LowerTwoThirds;
    if (name == "cluster") return SelectionKind::Cluster;
    throw ConfigError("unknown selection strategy: " + name);
}

const char* selection_kind_name(SelectionKind k) {
    switch (k) {
        case SelectionKind::All: return "all";
        case SelectionKind::LowerTwoThirds: return "lower_two_thirds";
        case SelectionKind::Cluster: return "cluster";
    }
    return "?";
}

std::vector<TupleSample> select_all(const std::vector<TupleSample>& tuples) { return tuples; }

std::vector<TupleSample> select_lower_two_thirds(const std::vector<TupleSample>& tuples,
                                                 const FrequencyTable& table) {
    auto parts = partition_by_cumulative_frequency(table, 3);
    std::unordered_set<std::string> top(parts[0].member_tokens.begin(),
                                        parts[0].member_tokens.end());
    std::vector<TupleSample> out;
    for (const auto& t : tuples)
        if (!top.count(t.tokens[0])) out.push_back(t);
    return out;
}

namespace {

double dist2(const std::vector<double>& a, const std::vector<double>& b) {
    double acc = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        double d = a[i] - b[i];
        acc += d * d;
    }
    return acc;
}

}  // namespace

ClusterModel kmeans(const std::vector<std::vector<double>>& vectors, int k, std::uint64_t seed,
                    int max_iter) {
    const std::size_t n = vectors.size();
    if (k < 1 || static_cast<std::size_t>(k) > n)
        throw ConfigError("kmeans: k must be in [1, point count]");
    Rng rng(seed);

    // k-means++ seeding
    ClusterModel model;
    model.k = k;
    model.centroids.push_back(vectors[rng.uniform_index(n)]);
    std::vector<double> d2(n, std::numeric_limits<double>::max());
    while (model.centroids.size() < static_cast<std::size_t>(k)) {
        const auto& last = model.centroids.back();
        double total = 0;
        for (std::size_t i = 0; i < n; ++i) {
            d2[i] = std::min(d2[i], dist2(vectors[i], last));
            total += d2[i];
        }
        std::size_t pick = 0;
        if (total > 0) {
            double r = rng.uniform01() * total;
            double acc = 0;
            for (std::size_t i = 0; i < n; ++i) {
                acc += d2[i];
                if (acc >= r) {
                    pick = i;
                    break;
                }
            }
        } else {
            pick = rng.uniform_index(n);  // all points identical
        }
        model.centroids.push_back(vectors[pick]);
    }

    model.assignment.assign(n, -1);
    std::vector<std::vector<double>> sums(k, std::vector<double>(vectors[0].size()));
    std::vector<std::size_t> sizes(k);
    for (int iter = 0; iter < max_iter; ++iter) {
        bool changed = false;
        double distortion = 0;
        for (std::size_t i = 0; i < n; ++i) {
            int best = 0;
            double best_d = dist2(vectors[i], model.centroids[0]);
            for (int c = 1; c < k; ++c) {
                double d = dist2(vectors[i], model.centroids[c]);
                if (d < best_d) {
                    best_d = d;
                    best = c;
                }
            }
            distortion += best_d;
            if (model.assignment[i] != best) {
                model.assignment[i] = best;
                changed = true;
            }
        }
        model.distortion_log.push_back(distortion);
        model.iterations = iter + 1;
        if (!changed) break;

        for (int c = 0; c < k; ++c) {
            std::fill(sums[c].begin(), sums[c].end(), 0.0);
            sizes[c] = 0;
        }
        for (std::size_t i = 0; i < n; ++i) {  // fixed-order reduction
            int c = model.assignment[i];
            ++sizes[c];
            for (std::size_t d = 0; d < vectors[i].size(); ++d) sums[c][d] += vectors[i][d];
        }
        for (int c = 0; c < k; ++c) {
            if (sizes[c] == 0) continue;  // empty cluster keeps its centroid
            for (std::size_t d = 0; d < sums[c].size(); ++d)
                model.centroids[c][d] = sums[c][d] / sizes[c];
        }
    }
    return model;
}

std::vector<TupleSample> select_by_clustering(const std::vector<TupleSample>& tuples,
                                              const SelectionStrategy& strategy,
                                              const FrequencyTable& table, std::uint64_t seed) {
    if (strategy.kind != SelectionKind::Cluster)
        throw ConfigError("select_by_clustering requires a cluster strategy");
    if (strategy.x < 1 || strategy.x >= strategy.y)
        throw ConfigError("cluster selection requires 1 <= x < y");
    if (tuples.empty()) return {};

    std::vector<std::vector<double>> points;
    points.reserve(tuples.size());
    for (const auto& t : tuples) points.emplace_back(t.vec.begin(), t.vec.end());
    ClusterModel model = kmeans(points, strategy.y, seed);

    // Rank clusters by ascending mean token-1 training frequency; drug names
    // are rare, so low-frequency clusters are the candidates.
    std::vector<double> freq_sum(strategy.y, 0.0);
    std::vector<std::size_t> members(strategy.y, 0);
    for (std::size_t i = 0; i < tuples.size(); ++i) {
        int c = model.assignment[i];
        freq_sum[c] += static_cast<double>(table.count_of(tuples[i].tokens[0]));
        ++members[c];
    }
    std::vector<int> order(strategy.y);
    for (int c = 0; c < strategy.y; ++c) order[c] = c;
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        double ma = members[a] ? freq_sum[a] / members[a] : std::numeric_limits<double>::max();
        double mb = members[b] ? freq_sum[b] / members[b] : std::numeric_limits<double>::max();
        if (ma != mb) return ma < mb;
        return a < b;
    });
    std::unordered_set<int> keep(order.begin(), order.begin() + strategy.x);

    std::vector<TupleSample> out;
    for (std::size_t i = 0; i < tuples.size(); ++i)
        if (keep.count(model.assignment[i])) out.push_back(tuples[i]);
    return out;
}

std::vector<TupleSample> apply_selection(const std::vector<TupleSample>& tuples,
                                         const SelectionStrategy& strategy,
                                         const FrequencyTable& table, std::uint64_t seed) {
    switch (strategy.kind) {
        case SelectionKind::All: return select_all(tuples);
        case SelectionKind::LowerTwoThirds: return select_lower_two_thirds(tuples, table);
        case SelectionKind::Cluster: return select_by_clustering(tuples, strategy, table, seed);
    }
    throw ConfigError("unknown selection kind");
}

std::string selection_manifest(const SelectionStrategy& strategy, std::size_t before,
                               std::size_t after, std::uint64_t seed) {
    std::string out;
    out += "strategy = " + std::string(selection_kind_name(strategy.kind)) + "\n";
    if (strategy.kind == SelectionKind::Cluster) {
        out += "x = " + std::to_string(strategy.x) + "\n";
        out += "y = " + std::to_string(strategy.y) + "\n";
        out += "seed = " + std::to_string(seed) + "\n";
    }
    out += "tuples_before = " + std::to_string(before) + "\n";
    out += "tuples_after = " + std::to_string(after) + "\n";
    return out;
}

}  // namespace drugner
