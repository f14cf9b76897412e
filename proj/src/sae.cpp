#include "drugner/sae.hpp"

#include "drugner/rng.hpp"
#include "drugner/util.hpp"

namespace drugner {

SaeConfig SaeConfig::stacked_defaults() {
    SaeConfig c;
    AutoencoderConfig ae1;
    ae1.input = 500;
    ae1.hidden = 100;
    ae1.activation = nn::Act::Sigmoid;
    ae1.learning_rate = 1.0;
    AutoencoderConfig ae2;
    ae2.input = 100;
    ae2.hidden = 100;
    ae2.activation = nn::Act::Tanh;
    ae2.learning_rate = 2.0;
    c.autoencoders = {ae1, ae2};
    return c;
}

std::vector<double> Autoencoder::encode(const std::vector<double>& x) const {
    std::vector<std::vector<double>> acts;
    nn::net_forward(net, x, acts);
    return acts[1];
}

Autoencoder train_autoencoder(const std::vector<std::vector<double>>& X,
                              const AutoencoderConfig& config, std::uint64_t seed) {
    if (X.empty()) throw ConfigError("autoencoder: empty dataset");
    Autoencoder ae;
    ae.net = nn::make_net({config.input, config.hidden, config.input},
                          {config.activation, config.output_activation}, seed);

    std::vector<std::vector<double>> inputs = X;
    if (config.corruption > 0.0) {
        Rng rng(seed ^ 0xda7a5eedull);
        for (auto& row : inputs)
            for (auto& x : row)
                if (rng.uniform01() < config.corruption) x = 0.0;
    }

    nn::SparsitySpec sp;
    sp.layer_index = 0;
    sp.target = config.sparsity_target;
    sp.weight = config.sparsity_weight;

    nn::NetTrainConfig tc;
    tc.learning_rate = config.learning_rate;
    tc.momentum = config.momentum;
    tc.epochs = config.epochs;
    tc.batch_size = config.batch_size;
    tc.rng_seed = seed;
    // Targets are the clean inputs even when corruption is on.
    ae.report = nn::train_net(ae.net, inputs, X, tc, sp.weight > 0 ? &sp : nullptr);
    return ae;
}

SaeModel sae_train(const std::vector<TupleSample>& tuples, const SaeConfig& config) {
    if (config.autoencoders.empty()) throw ConfigError("sae: need at least one autoencoder");
    for (std::size_t i = 1; i < config.autoencoders.size(); ++i)
        if (config.autoencoders[i].input != config.autoencoders[i - 1].hidden)
            throw ConfigError("sae: autoencoder sizes do not chain");

    std::vector<std::vector<double>> X, Y;
    tuples_to_dataset(tuples, config.autoencoders.front().input, config.classes, X, Y);

    SaeModel model;
    std::vector<std::vector<double>> layer_input = X;
    for (std::size_t l = 0; l < config.autoencoders.size(); ++l) {
        model.autoencoders.push_back(
            train_autoencoder(layer_input, config.autoencoders[l], config.rng_seed + l));
        if (l + 1 < config.autoencoders.size()) {
            std::vector<std::vector<double>> next;
            next.reserve(layer_input.size());
            for (const auto& x : layer_input)
                next.push_back(model.autoencoders.back().encode(x));
            layer_input = std::move(next);
        }
    }

    std::vector<int> sizes;
    sizes.push_back(config.autoencoders.front().input);
    std::vector<nn::Act> acts;
    for (const auto& ae : config.autoencoders) {
        sizes.push_back(ae.hidden);
        acts.push_back(ae.activation);
    }
    sizes.push_back(config.classes);
    acts.push_back(nn::Act::Softmax);
    model.net = nn::make_net(sizes, acts, config.rng_seed);
    for (std::size_t l = 0; l < model.autoencoders.size(); ++l) {
        model.net.layers[l].W = model.autoencoders[l].net.layers[0].W;
        model.net.layers[l].b = model.autoencoders[l].net.layers[0].b;
    }

    nn::NetTrainConfig tc;
    tc.learning_rate = config.finetune_learning_rate;
    tc.momentum = config.finetune_momentum;
    tc.epochs = config.finetune_epochs;
    tc.batch_size = config.finetune_batch_size;
    tc.rng_seed = config.rng_seed;
    model.finetune = nn::train_net(model.net, X, Y, tc);
    return model;
}

Prediction sae_predict(const SaeModel& model, const std::vector<TupleSample>& tuples) {
    std::vector<std::vector<double>> X;
    X.reserve(tuples.size());
    for (const auto& t : tuples) X.emplace_back(t.vec.begin(), t.vec.end());
    return net_predict_classes(model.net, X);
}

}  // namespace drugner
