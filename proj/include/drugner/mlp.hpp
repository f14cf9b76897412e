#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "drugner/nn.hpp"
#include "drugner/representation.hpp"

namespace drugner {

enum class RegKind { L0, L1, L2Euclidean };

RegKind reg_kind_from(const std::string& name);
const char* reg_kind_name(RegKind k);

/// Weight-decay coefficient: L0 -> 0, L1 -> 1, L2 -> mean pairwise euclidean
/// distance of the training vectors.
double resolve_lambda(RegKind kind, const std::vector<TupleSample>& tuples,
                      PairNormalization norm = PairNormalization::OrderedPairs);

struct MlpConfig {
    std::vector<int> layer_sizes = {500, 100, 100, 6};
    double learning_rate = 1.0;
    double momentum = 0.5;
    int epochs = 100;
    int batch_size = 100;
    RegKind regularization = RegKind::L0;
    PairNormalization l2_normalization = PairNormalization::OrderedPairs;
    std::uint64_t rng_seed = 1;
};

struct MlpParams {
    nn::Net net;
    double lambda = 0.0;
};

struct Prediction {
    std::vector<int> classes;                     // 1-based
    std::vector<std::vector<double>> posteriors;  // per-sample class distribution
};

std::pair<MlpParams, nn::TrainReport> mlp_train(const std::vector<TupleSample>& tuples,
                                                const MlpConfig& config);

Prediction mlp_predict(const MlpParams& params, const std::vector<TupleSample>& tuples);
Prediction net_predict_classes(const nn::Net& net, const std::vector<std::vector<double>>& X);

/// Dense view of a tuple dataset: X holds vectors, Y one-hot labels.
void tuples_to_dataset(const std::vector<TupleSample>& tuples, int input_dim, int classes,
                       std::vector<std::vector<double>>& X, std::vector<std::vector<double>>& Y);

std::string train_report_to_log(const nn::TrainReport& report);

}  // namespace drugner
