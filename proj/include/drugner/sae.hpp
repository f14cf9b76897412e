#pragma once

#include <cstdint>
#include <vector>

#include "drugner/mlp.hpp"
#include "drugner/nn.hpp"
#include "drugner/representation.hpp"

namespace drugner {

/// One autoencoder of the stack: in -> hidden (act) -> in (identity output),
/// trained to reconstruct its input under a KL sparsity penalty.
struct AutoencoderConfig {
    int input = 500;
    int hidden = 100;
    nn::Act activation = nn::Act::Sigmoid;
    nn::Act output_activation = nn::Act::Identity;  // reconstruction layer
    double learning_rate = 1.0;
    double momentum = 0.5;
    double sparsity_target = 0.05;
    double sparsity_weight = 3.0;
    int epochs = 30;
    int batch_size = 100;
    double corruption = 0.0;  // optional denoising mask probability, off by default
};

struct SaeConfig {
    std::vector<AutoencoderConfig> autoencoders;
    int classes = 6;
    double finetune_learning_rate = 1.0;
    double finetune_momentum = 0.5;
    int finetune_epochs = 30;
    int finetune_batch_size = 100;
    std::uint64_t rng_seed = 1;

    static SaeConfig stacked_defaults();
};

struct Autoencoder {
    nn::Net net;  // [in, hidden, in]
    nn::TrainReport report;
    std::vector<double> encode(const std::vector<double>& x) const;
};

struct SaeModel {
    std::vector<Autoencoder> autoencoders;
    nn::Net net;  // stacked encoders + softmax head
    nn::TrainReport finetune;
};

Autoencoder train_autoencoder(const std::vector<std::vector<double>>& X,
                              const AutoencoderConfig& config, std::uint64_t seed);

SaeModel sae_train(const std::vector<TupleSample>& tuples, const SaeConfig& config);
Prediction sae_predict(const SaeModel& model, const std::vector<TupleSample>& tuples);

}  // namespace drugner
