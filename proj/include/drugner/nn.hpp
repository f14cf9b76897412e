#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace drugner::nn {

enum class Act { Sigmoid, Tanh, Softmax, Identity };

struct Layer {
    int in = 0;
    int out = 0;
    Act act = Act::Sigmoid;
    std::vector<double> W;  // out x in, row-major
    std::vector<double> b;  // out
};

struct Net {
    std::vector<Layer> layers;
    int input_dim() const { return layers.empty() ? 0 : layers.front().in; }
    int output_dim() const { return layers.empty() ? 0 : layers.back().out; }
};

Net make_net(const std::vector<int>& sizes, const std::vector<Act>& acts, std::uint64_t seed);

/// KL sparsity penalty on the activations of layers[layer_index]. For Tanh
/// layers the mean activation is measured on (a+1)/2.
struct SparsitySpec {
    int layer_index = -1;
    double target = 0.05;
    double weight = 0.0;
};

struct NetGrads {
    std::vector<std::vector<double>> dW, db;
};
NetGrads zero_grads(const Net& net);

struct LossParts {
    double data = 0;      // mean over samples of 1/2 ||out - y||^2
    double reg = 0;       // (lambda/2) sum W^2, biases excluded
    double sparsity = 0;  // beta * sum_j KL(rho || rho_hat_j)
    double total() const { return data + reg + sparsity; }
};

/// Forward pass; acts[0] is the input, acts[L] the output.
void net_forward(const Net& net, const std::vector<double>& x,
                 std::vector<std::vector<double>>& acts);
std::vector<double> net_predict(const Net& net, const std::vector<double>& x);

LossParts net_loss(const Net& net, const std::vector<std::vector<double>>& X,
                   const std::vector<std::vector<double>>& Y, double weight_decay,
                   const SparsitySpec* sparsity = nullptr);

/// Loss over the sample set plus analytic gradients (data term averaged over
/// the set, decay and sparsity terms included once).
LossParts net_loss_and_grads(const Net& net, const std::vector<std::vector<double>>& X,
                             const std::vector<std::vector<double>>& Y, double weight_decay,
                             const SparsitySpec* sparsity, NetGrads& grads);

struct NetTrainConfig {
    double learning_rate = 1.0;
    double momentum = 0.5;
    int epochs = 100;
    int batch_size = 100;
    double weight_decay = 0.0;
    std::uint64_t rng_seed = 1;
    std::vector<bool> frozen_layers;  // optional, per-layer update mask
};

struct EpochStats {
    int epoch = 0;
    double data_loss = 0;
    double reg_loss = 0;  // decay + sparsity
    double wall_ms = 0;
};

struct TrainReport {
    std::vector<EpochStats> epochs;
    double wall_ms_total = 0;
};

/// Mini-batch gradient descent with momentum; throws DivergenceError naming
/// the epoch when the full-batch loss stops being finite.
TrainReport train_net(Net& net, const std::vector<std::vector<double>>& X,
                      const std::vector<std::vector<double>>& Y, const NetTrainConfig& config,
                      const SparsitySpec* sparsity = nullptr);

double sum_squared_weights(const Net& net);

}  // namespace drugner::nn
