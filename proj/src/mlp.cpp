#include "drugner/mlp.hpp"

#include <algorithm>

#include "drugner/util.hpp"

namespace drugner {

RegKind reg_kind_from(const std::string& name) {
    std::string n = to_lower(name);
    if (n == "l0") return RegKind::L0;
    if (n == "l1") return RegKind::L1;
    if (n == "l2" || n == "l2_euclidean") return RegKind::L2Euclidean;
    throw ConfigError("unknown regularization: " + name);
}

const char* reg_kind_name(RegKind k) {
    switch (k) {
        case RegKind::L0: return "L0";
        case RegKind::L1: return "L1";
        case RegKind::L2Euclidean: return "L2_euclidean";
    }
    return "?";
}

double resolve_lambda(RegKind kind, const std::vector<TupleSample>& tuples,
                      PairNormalization norm) {
    switch (kind) {
        case RegKind::L0: return 0.0;
        case RegKind::L1: return 1.0;
        case RegKind::L2Euclidean: {
            if (tuples.size() < 2)
                throw ConfigError("L2 regularization needs at least 2 training vectors");
            std::vector<std::vector<float>> vecs;
            vecs.reserve(tuples.size());
            for (const auto& t : tuples) vecs.push_back(t.vec);
            return mean_pairwise_euclidean(vecs, norm);
        }
    }
    throw ConfigError("unknown regularization kind");
}

void tuples_to_dataset(const std::vector<TupleSample>& tuples, int input_dim, int classes,
                       std::vector<std::vector<double>>& X, std::vector<std::vector<double>>& Y) {
    X.clear();
    Y.clear();
    X.reserve(tuples.size());
    Y.reserve(tuples.size());
    for (const auto& t : tuples) {
        if (t.vec.size() != static_cast<std::size_t>(input_dim))
            throw DataError("tuple vector width " + std::to_string(t.vec.size()) +
                            " does not match input width " + std::to_string(input_dim));
        if (t.label < 1 || t.label > classes)
            throw DataError("tuple label " + std::to_string(t.label) + " outside 1.." +
                            std::to_string(classes));
        X.emplace_back(t.vec.begin(), t.vec.end());
        std::vector<double> y(classes, 0.0);
        y[t.label - 1] = 1.0;
        Y.push_back(std::move(y));
    }
}

std::pair<MlpParams, nn::TrainReport> mlp_train(const std::vector<TupleSample>& tuples,
                                                const MlpConfig& config) {
    if (config.layer_sizes.size() < 2) throw ConfigError("mlp: need at least input/output sizes");
    std::vector<std::vector<double>> X, Y;
    tuples_to_dataset(tuples, config.layer_sizes.front(), config.layer_sizes.back(), X, Y);

    std::vector<nn::Act> acts(config.layer_sizes.size() - 1, nn::Act::Sigmoid);
    acts.back() = nn::Act::Softmax;
    MlpParams params;
    params.net = nn::make_net(config.layer_sizes, acts, config.rng_seed);
    params.lambda = resolve_lambda(config.regularization, tuples, config.l2_normalization);

    nn::NetTrainConfig tc;
    tc.learning_rate = config.learning_rate;
    tc.momentum = config.momentum;
    tc.epochs = config.epochs;
    tc.batch_size = config.batch_size;
    tc.weight_decay = params.lambda;
    tc.rng_seed = config.rng_seed;
    nn::TrainReport report = nn::train_net(params.net, X, Y, tc);
    return {std::move(params), std::move(report)};
}

Prediction net_predict_classes(const nn::Net& net, const std::vector<std::vector<double>>& X) {
    Prediction pred;
    pred.classes.reserve(X.size());
    pred.posteriors.reserve(X.size());
    for (const auto& x : X) {
        auto out = nn::net_predict(net, x);
        auto best = std::max_element(out.begin(), out.end());
        pred.classes.push_back(static_cast<int>(best - out.begin()) + 1);
        pred.posteriors.push_back(std::move(out));
    }
    return pred;
}

Prediction mlp_predict(const MlpParams& params, const std::vector<TupleSample>& tuples) {
    std::vector<std::vector<double>> X;
    X.reserve(tuples.size());
    for (const auto& t : tuples) {
        if (t.vec.size() != static_cast<std::size_t>(params.net.input_dim()))
            throw DataError("tuple vector width does not match network input");
        X.emplace_back(t.vec.begin(), t.vec.end());
    }
    return net_predict_classes(params.net, X);
}

std::string train_report_to_log(const nn::TrainReport& report) {
    std::string out = "epoch\tdata_loss\treg_loss\twall_ms\n";
    for (const auto& e : report.epochs)
        out += std::to_string(e.epoch) + "\t" + fmt_g9(e.data_loss) + "\t" + fmt_g9(e.reg_loss) +
               "\t" + fmt_g9(e.wall_ms) + "\n";
    return out;
}

}  // namespace drugner
