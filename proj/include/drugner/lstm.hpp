#pragma once

#include <cstdint>
#include <vector>

#include "drugner/nn.hpp"
#include "drugner/representation.hpp"

namespace drugner {

enum class LstmLoss { SquaredError, CrossEntropy };

/// One stacked layer of peephole LSTM cells with the input gate coupled to
/// the forget gate (i = 1 - f), so only f and o carry parameters.
struct LstmLayerParams {
    int in = 0;
    int hidden = 0;
    std::vector<double> Wf, Wc, Wo;  // hidden x in
    std::vector<double> Uf, Uc, Uo;  // hidden x hidden
    std::vector<double> pf, po;      // peepholes (f reads c_{t-1}, o reads c_t)
    std::vector<double> bf, bc, bo;
};

struct LstmParams {
    int input_dim = 0;
    std::vector<LstmLayerParams> layers;
    std::vector<double> Wy;  // dense sigmoid output over the top hidden state
    double by = 0.0;
};

struct LstmConfig {
    int input_dimension = 200;
    std::vector<int> hidden_sizes = {2, 2};
    double learning_rate = 0.001;
    double momentum = 0.9;
    int epochs = 30;
    int frame = 2;  // BPTT truncation window; >= sequence length means full BPTT
    LstmLoss loss = LstmLoss::SquaredError;
    double threshold = 0.5;
    std::uint64_t rng_seed = 1;
};

struct LstmGrads {
    std::vector<LstmLayerParams> layers;  // same shapes, used as accumulators
    std::vector<double> Wy;
    double by = 0.0;
};

/// Per-step gate activations of one forward pass, for inspection.
struct LstmTrace {
    // [layer][t][unit]
    std::vector<std::vector<std::vector<double>>> f, i, o, c, h;
    std::vector<double> outputs;  // per-step sigmoid output
};

LstmParams make_lstm(int input_dim, const std::vector<int>& hidden_sizes, std::uint64_t seed);
LstmGrads zero_lstm_grads(const LstmParams& params);

std::vector<double> lstm_outputs(const LstmParams& params,
                                 const std::vector<std::vector<double>>& features);
LstmTrace lstm_forward_trace(const LstmParams& params,
                             const std::vector<std::vector<double>>& features);

/// Summed per-step loss plus analytic gradients under truncated BPTT:
/// gradients do not cross chunk boundaries at multiples of `frame`, forward
/// state does.
double lstm_loss_and_grads(const LstmParams& params,
                           const std::vector<std::vector<double>>& features,
                           const std::vector<int>& labels, int frame, LstmLoss loss,
                           LstmGrads& grads);

struct LstmTrainResult {
    LstmParams params;
    nn::TrainReport report;
};

/// Online (per-sentence) gradient descent with momentum over shuffled
/// sentences; deterministic per seed.
LstmTrainResult lstm_train(const std::vector<SequenceSample>& sequences,
                           const LstmConfig& config);

std::vector<std::vector<int>> lstm_predict(const LstmParams& params,
                                           const std::vector<SequenceSample>& sequences,
                                           double threshold = 0.5);

std::vector<std::vector<double>> sequence_features(const SequenceSample& s);

}  // namespace drugner
