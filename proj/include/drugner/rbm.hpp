#pragma once

#include <cstdint>
#include <vector>

#include "drugner/nn.hpp"
#include "drugner/mlp.hpp"
#include "drugner/representation.hpp"

namespace drugner {

/// Binary-unit RBM driven with real-valued inputs in [0,1] used as
/// probabilities.
struct Rbm {
    int visible = 0;
    int hidden = 0;
    std::vector<double> W;      // hidden x visible
    std::vector<double> vbias;  // visible
    std::vector<double> hbias;  // hidden
};

struct RbmTrainConfig {
    double alpha = 1.0;  // learning rate
    double momentum = 0.0;
    int batch_size = 100;
    int cd_steps = 1;
    int epochs = 30;
    std::uint64_t rng_seed = 1;
};

struct DbnConfig {
    std::vector<std::pair<int, int>> rbm_sizes = {{500, 100}, {100, 100}};
    RbmTrainConfig pretrain;
    int classes = 6;
    // Supervised fine-tuning of the unrolled encoder + softmax head.
    double finetune_learning_rate = 1.0;
    double finetune_momentum = 0.5;
    int finetune_epochs = 30;
    int finetune_batch_size = 100;
    bool freeze_pretrained = false;
    std::uint64_t rng_seed = 1;
};

struct RbmPretrainResult {
    Rbm rbm;
    std::vector<double> reconstruction_error;  // per epoch, mean squared
};

struct DbnModel {
    nn::Net net;
    std::vector<RbmPretrainResult> pretrain;
    nn::TrainReport finetune;
};

/// CD-k updates on data scaled to [0,1]; throws DataError on out-of-range
/// inputs.
RbmPretrainResult rbm_pretrain(const std::vector<std::vector<double>>& data, int visible,
                               int hidden, const RbmTrainConfig& config);

/// Hidden activation probabilities for one visible vector.
std::vector<double> rbm_hidden_probs(const Rbm& rbm, const std::vector<double>& v);
std::vector<double> rbm_reconstruct(const Rbm& rbm, const std::vector<double>& v);

/// F(v) = -vbias.v - sum_j softplus(hbias_j + W_j.v)
double rbm_free_energy(const Rbm& rbm, const std::vector<double>& v);

/// Affine [-1,1] -> [0,1] map used before RBM training; throws DataError when
/// the result leaves [0,1].
std::vector<std::vector<double>> scale_unit_interval(const std::vector<std::vector<double>>& X);

DbnModel dbn_train(const std::vector<TupleSample>& tuples, const DbnConfig& config);
Prediction dbn_predict(const DbnModel& model, const std::vector<TupleSample>& tuples);

}  // namespace drugner
