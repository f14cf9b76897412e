#include "drugner/rbm.hpp"

#include <cmath>

#include "drugner/rng.hpp"
#include "drugner/util.hpp"

namespace drugner {

namespace {

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

double softplus(double x) { return x > 30.0 ? x : std::log1p(std::exp(x)); }

void hidden_probs_into(const Rbm& rbm, const std::vector<double>& v, std::vector<double>& h) {
    h.assign(rbm.hidden, 0.0);
    for (int j = 0; j < rbm.hidden; ++j) {
        const double* w = &rbm.W[static_cast<std::size_t>(j) * rbm.visible];
        double acc = rbm.hbias[j];
        for (int i = 0; i < rbm.visible; ++i) acc += w[i] * v[i];
        h[j] = sigmoid(acc);
    }
}

void visible_probs_into(const Rbm& rbm, const std::vector<double>& h, std::vector<double>& v) {
    v.assign(rbm.visible, 0.0);
    for (int i = 0; i < rbm.visible; ++i) v[i] = rbm.vbias[i];
    for (int j = 0; j < rbm.hidden; ++j) {
        const double* w = &rbm.W[static_cast<std::size_t>(j) * rbm.visible];
        for (int i = 0; i < rbm.visible; ++i) v[i] += w[i] * h[j];
    }
    for (int i = 0; i < rbm.visible; ++i) v[i] = sigmoid(v[i]);
}

}  // namespace

std::vector<double> rbm_hidden_probs(const Rbm& rbm, const std::vector<double>& v) {
    std::vector<double> h;
    hidden_probs_into(rbm, v, h);
    return h;
}

std::vector<double> rbm_reconstruct(const Rbm& rbm, const std::vector<double>& v) {
    std::vector<double> h = rbm_hidden_probs(rbm, v);
    std::vector<double> r;
    visible_probs_into(rbm, h, r);
    return r;
}

double rbm_free_energy(const Rbm& rbm, const std::vector<double>& v) {
    double f = 0;
    for (int i = 0; i < rbm.visible; ++i) f -= rbm.vbias[i] * v[i];
    for (int j = 0; j < rbm.hidden; ++j) {
        const double* w = &rbm.W[static_cast<std::size_t>(j) * rbm.visible];
        double acc = rbm.hbias[j];
        for (int i = 0; i < rbm.visible; ++i) acc += w[i] * v[i];
        f -= softplus(acc);
    }
    return f;
}

RbmPretrainResult rbm_pretrain(const std::vector<std::vector<double>>& data, int visible,
                               int hidden, const RbmTrainConfig& config) {
    if (data.empty()) throw ConfigError("rbm_pretrain: empty dataset");
    for (const auto& v : data) {
        if (v.size() != static_cast<std::size_t>(visible))
            throw DataError("rbm_pretrain: sample width mismatch");
        for (double x : v)
            if (x < 0.0 || x > 1.0)
                throw DataError("rbm_pretrain: input outside [0,1] after scaling");
    }

    Rng rng(config.rng_seed);
    RbmPretrainResult result;
    Rbm& rbm = result.rbm;
    rbm.visible = visible;
    rbm.hidden = hidden;
    rbm.W.resize(static_cast<std::size_t>(hidden) * visible);
    for (auto& w : rbm.W) w = rng.uniform(-0.1, 0.1);
    rbm.vbias.assign(visible, 0.0);
    rbm.hbias.assign(hidden, 0.0);

    std::vector<double> vW(rbm.W.size(), 0.0), vvb(visible, 0.0), vhb(hidden, 0.0);
    std::vector<double> gW(rbm.W.size()), gvb(visible), ghb(hidden);
    std::vector<double> h0, h0_state(hidden), v1, h1;

    for (int epoch = 1; epoch <= config.epochs; ++epoch) {
        double recon = 0;
        for (std::size_t start = 0; start < data.size();
             start += static_cast<std::size_t>(config.batch_size)) {
            std::size_t end =
                std::min(data.size(), start + static_cast<std::size_t>(config.batch_size));
            std::fill(gW.begin(), gW.end(), 0.0);
            std::fill(gvb.begin(), gvb.end(), 0.0);
            std::fill(ghb.begin(), ghb.end(), 0.0);
            for (std::size_t s = start; s < end; ++s) {
                const auto& v0 = data[s];
                hidden_probs_into(rbm, v0, h0);
                for (int j = 0; j < hidden; ++j)
                    h0_state[j] = rng.uniform01() < h0[j] ? 1.0 : 0.0;
                // CD-k chain; visible units stay as probabilities
                visible_probs_into(rbm, h0_state, v1);
                hidden_probs_into(rbm, v1, h1);
                for (int k = 1; k < config.cd_steps; ++k) {
                    for (int j = 0; j < hidden; ++j)
                        h0_state[j] = rng.uniform01() < h1[j] ? 1.0 : 0.0;
                    visible_probs_into(rbm, h0_state, v1);
                    hidden_probs_into(rbm, v1, h1);
                }
                for (int j = 0; j < hidden; ++j) {
                    double* g = &gW[static_cast<std::size_t>(j) * visible];
                    for (int i = 0; i < visible; ++i) g[i] += h0[j] * v0[i] - h1[j] * v1[i];
                    ghb[j] += h0[j] - h1[j];
                }
                for (int i = 0; i < visible; ++i) {
                    gvb[i] += v0[i] - v1[i];
                    double d = v0[i] - v1[i];
                    recon += d * d;
                }
            }
            const double scale = config.alpha / static_cast<double>(end - start);
            for (std::size_t i = 0; i < rbm.W.size(); ++i) {
                vW[i] = config.momentum * vW[i] + scale * gW[i];
                rbm.W[i] += vW[i];
            }
            for (int i = 0; i < visible; ++i) {
                vvb[i] = config.momentum * vvb[i] + scale * gvb[i];
                rbm.vbias[i] += vvb[i];
            }
            for (int j = 0; j < hidden; ++j) {
                vhb[j] = config.momentum * vhb[j] + scale * ghb[j];
                rbm.hbias[j] += vhb[j];
            }
        }
        recon /= static_cast<double>(data.size());
        if (!std::isfinite(recon))
            throw DivergenceError("rbm training diverged at epoch " + std::to_string(epoch));
        result.reconstruction_error.push_back(recon);
    }
    return result;
}

std::vector<std::vector<double>> scale_unit_interval(const std::vector<std::vector<double>>& X) {
    std::vector<std::vector<double>> out = X;
    for (auto& row : out)
        for (auto& x : row) {
            x = (x + 1.0) / 2.0;
            if (x < 0.0 || x > 1.0)
                throw DataError("input outside [0,1] after affine scaling; embedding value "
                                "left [-1,1]");
        }
    return out;
}

DbnModel dbn_train(const std::vector<TupleSample>& tuples, const DbnConfig& config) {
    if (config.rbm_sizes.empty()) throw ConfigError("dbn: need at least one RBM");
    for (std::size_t i = 1; i < config.rbm_sizes.size(); ++i)
        if (config.rbm_sizes[i].first != config.rbm_sizes[i - 1].second)
            throw ConfigError("dbn: rbm sizes do not chain");

    std::vector<std::vector<double>> X, Y;
    tuples_to_dataset(tuples, config.rbm_sizes.front().first, config.classes, X, Y);
    std::vector<std::vector<double>> layer_input = scale_unit_interval(X);

    DbnModel model;
    RbmTrainConfig pc = config.pretrain;
    for (std::size_t l = 0; l < config.rbm_sizes.size(); ++l) {
        auto [nv, nh] = config.rbm_sizes[l];
        pc.rng_seed = config.pretrain.rng_seed + l;
        model.pretrain.push_back(rbm_pretrain(layer_input, nv, nh, pc));
        if (l + 1 < config.rbm_sizes.size()) {
            std::vector<std::vector<double>> next;
            next.reserve(layer_input.size());
            for (const auto& v : layer_input)
                next.push_back(rbm_hidden_probs(model.pretrain.back().rbm, v));
            layer_input = std::move(next);
        }
    }

    // Unroll the stack into a feed-forward net and attach the softmax head.
    std::vector<int> sizes;
    sizes.push_back(config.rbm_sizes.front().first);
    for (auto [nv, nh] : config.rbm_sizes) sizes.push_back(nh);
    sizes.push_back(config.classes);
    std::vector<nn::Act> acts(sizes.size() - 1, nn::Act::Sigmoid);
    acts.back() = nn::Act::Softmax;
    model.net = nn::make_net(sizes, acts, config.rng_seed);
    for (std::size_t l = 0; l < model.pretrain.size(); ++l) {
        model.net.layers[l].W = model.pretrain[l].rbm.W;
        model.net.layers[l].b = model.pretrain[l].rbm.hbias;
    }

    nn::NetTrainConfig tc;
    tc.learning_rate = config.finetune_learning_rate;
    tc.momentum = config.finetune_momentum;
    tc.epochs = config.finetune_epochs;
    tc.batch_size = config.finetune_batch_size;
    tc.rng_seed = config.rng_seed;
    if (config.freeze_pretrained) {
        tc.frozen_layers.assign(model.net.layers.size(), false);
        for (std::size_t l = 0; l < model.pretrain.size(); ++l) tc.frozen_layers[l] = true;
    }
    std::vector<std::vector<double>> Xs = scale_unit_interval(X);
    model.finetune = nn::train_net(model.net, Xs, Y, tc);
    return model;
}

Prediction dbn_predict(const DbnModel& model, const std::vector<TupleSample>& tuples) {
    std::vector<std::vector<double>> X;
    X.reserve(tuples.size());
    for (const auto& t : tuples) X.emplace_back(t.vec.begin(), t.vec.end());
    return net_predict_classes(model.net, scale_unit_interval(X));
}

}  // namespace drugner
