#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "drugner/corpus.hpp"
#include "drugner/representation.hpp"

namespace drugner {

enum class SelectionKind { All, LowerTwoThirds, Cluster };

struct SelectionStrategy {
    SelectionKind kind = SelectionKind::All;
    int x = 2;  // clusters kept (cluster kind only)
    int y = 3;  // clusters formed
};

SelectionKind selection_kind_from(const std::string& name);
const char* selection_kind_name(SelectionKind k);

struct ClusterModel {
    int k = 0;
    std::vector<std::vector<double>> centroids;
    std::vector<int> assignment;          // point index -> cluster id
    std::vector<double> distortion_log;   // per Lloyd iteration
    int iterations = 0;
};

/// Identity filter.
std::vector<TupleSample> select_all(const std::vector<TupleSample>& tuples);

/// Keeps tuples whose token-1 falls in partitions 2..3 of a 3-way
/// cumulative-frequency split of the training table; unseen tokens count as
/// rarest and are kept.
std::vector<TupleSample> select_lower_two_thirds(const std::vector<TupleSample>& tuples,
                                                 const FrequencyTable& table);

/// Lloyd's iterations from seeded k-means++ starts; deterministic per seed.
ClusterModel kmeans(const std::vector<std::vector<double>>& vectors, int k, std::uint64_t seed,
                    int max_iter = 100);

/// Clusters tuple vectors into strategy.y groups and keeps the strategy.x
/// clusters with the lowest mean training-corpus frequency of token-1.
std::vector<TupleSample> select_by_clustering(const std::vector<TupleSample>& tuples,
                                              const SelectionStrategy& strategy,
                                              const FrequencyTable& table, std::uint64_t seed);

std::vector<TupleSample> apply_selection(const std::vector<TupleSample>& tuples,
                                         const SelectionStrategy& strategy,
                                         const FrequencyTable& table, std::uint64_t seed);

std::string selection_manifest(const SelectionStrategy& strategy, std::size_t before,
                               std::size_t after, std::uint64_t seed);

}  // namespace drugner
