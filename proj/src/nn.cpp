#include "drugner/nn.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>

#include "drugner/rng.hpp"
#include "drugner/util.hpp"

namespace drugner::nn {

namespace {

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

void apply_activation(Act act, std::vector<double>& z) {
    switch (act) {
        case Act::Sigmoid:
            for (auto& v : z) v = sigmoid(v);
            break;
        case Act::Tanh:
            for (auto& v : z) v = std::tanh(v);
            break;
        case Act::Identity:
            break;
        case Act::Softmax: {
            double mx = *std::max_element(z.begin(), z.end());
            double sum = 0;
            for (auto& v : z) {
                v = std::exp(v - mx);
                sum += v;
            }
            for (auto& v : z) v /= sum;
            break;
        }
    }
}

// dL/da -> dL/dz in place, given the post-activation values a.
void backprop_activation(Act act, const std::vector<double>& a, std::vector<double>& d) {
    switch (act) {
        case Act::Sigmoid:
            for (std::size_t i = 0; i < d.size(); ++i) d[i] *= a[i] * (1.0 - a[i]);
            break;
        case Act::Tanh:
            for (std::size_t i = 0; i < d.size(); ++i) d[i] *= 1.0 - a[i] * a[i];
            break;
        case Act::Identity:
            break;
        case Act::Softmax: {
            double dot = 0;
            for (std::size_t i = 0; i < d.size(); ++i) dot += a[i] * d[i];
            for (std::size_t i = 0; i < d.size(); ++i) d[i] = a[i] * (d[i] - dot);
            break;
        }
    }
}

}  // namespace

Net make_net(const std::vector<int>& sizes, const std::vector<Act>& acts, std::uint64_t seed) {
    if (sizes.size() < 2 || acts.size() != sizes.size() - 1)
        throw ConfigError("make_net: need N>=2 sizes and N-1 activations");
    Rng rng(seed);
    Net net;
    for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
        Layer layer;
        layer.in = sizes[l];
        layer.out = sizes[l + 1];
        layer.act = acts[l];
        double r = std::sqrt(6.0 / (layer.in + layer.out));
        if (acts[l] == Act::Sigmoid) r *= 4.0;  // Glorot scaling for sigmoid
        layer.W.resize(static_cast<std::size_t>(layer.out) * layer.in);
        for (auto& w : layer.W) w = rng.uniform(-r, r);
        layer.b.assign(layer.out, 0.0);
        net.layers.push_back(std::move(layer));
    }
    return net;
}

NetGrads zero_grads(const Net& net) {
    NetGrads g;
    for (const auto& l : net.layers) {
        g.dW.emplace_back(l.W.size(), 0.0);
        g.db.emplace_back(l.b.size(), 0.0);
    }
    return g;
}

void net_forward(const Net& net, const std::vector<double>& x,
                 std::vector<std::vector<double>>& acts) {
    acts.resize(net.layers.size() + 1);
    acts[0] = x;
    for (std::size_t l = 0; l < net.layers.size(); ++l) {
        const Layer& layer = net.layers[l];
        auto& z = acts[l + 1];
        z.assign(layer.out, 0.0);
        const auto& a = acts[l];
        for (int o = 0; o < layer.out; ++o) {
            const double* w = &layer.W[static_cast<std::size_t>(o) * layer.in];
            double acc = layer.b[o];
            for (int i = 0; i < layer.in; ++i) acc += w[i] * a[i];
            z[o] = acc;
        }
        apply_activation(layer.act, z);
    }
}

std::vector<double> net_predict(const Net& net, const std::vector<double>& x) {
    std::vector<std::vector<double>> acts;
    net_forward(net, x, acts);
    return acts.back();
}

double sum_squared_weights(const Net& net) {
    double s = 0;
    for (const auto& l : net.layers)
        for (double w : l.W) s += w * w;
    return s;
}

namespace {

// Clamped mean activation in (0,1); Tanh activations are mapped via (a+1)/2.
double sparsity_rho_hat(Act act, double mean_a) {
    double rho = act == Act::Tanh ? (mean_a + 1.0) / 2.0 : mean_a;
    return std::clamp(rho, 1e-6, 1.0 - 1e-6);
}

struct SparsityState {
    std::vector<double> rho_hat;   // per hidden unit
    std::vector<double> d_pre;     // beta * KL' * mapping derivative
    double penalty = 0;
};

SparsityState compute_sparsity(const Net& net, const SparsitySpec& sp,
                               const std::vector<std::vector<std::vector<double>>>& all_acts) {
    SparsityState st;
    const Act act = net.layers[sp.layer_index].act;
    const int width = net.layers[sp.layer_index].out;
    const std::size_t m = all_acts.size();
    st.rho_hat.assign(width, 0.0);
    for (const auto& acts : all_acts)
        for (int j = 0; j < width; ++j) st.rho_hat[j] += acts[sp.layer_index + 1][j];
    st.d_pre.assign(width, 0.0);
    const double rho = sp.target;
    for (int j = 0; j < width; ++j) {
        double rh = sparsity_rho_hat(act, st.rho_hat[j] / static_cast<double>(m));
        st.rho_hat[j] = rh;
        st.penalty += sp.weight * (rho * std::log(rho / rh) +
                                   (1.0 - rho) * std::log((1.0 - rho) / (1.0 - rh)));
        double map_deriv = act == Act::Tanh ? 0.5 : 1.0;
        st.d_pre[j] = sp.weight * (-rho / rh + (1.0 - rho) / (1.0 - rh)) * map_deriv;
    }
    return st;
}

}  // namespace

LossParts net_loss_and_grads(const Net& net, const std::vector<std::vector<double>>& X,
                             const std::vector<std::vector<double>>& Y, double weight_decay,
                             const SparsitySpec* sparsity, NetGrads& grads) {
    const std::size_t m = X.size();
    if (m == 0) throw ConfigError("net_loss_and_grads: empty sample set");
    const std::size_t L = net.layers.size();
    grads = zero_grads(net);

    // Two passes when a sparsity penalty is active: its gradient needs the
    // batch-mean hidden activation before any sample can be backpropagated.
    std::vector<std::vector<std::vector<double>>> all_acts(m);
    for (std::size_t s = 0; s < m; ++s) net_forward(net, X[s], all_acts[s]);

    SparsityState sp_state;
    bool use_sparsity = sparsity && sparsity->weight > 0.0 && sparsity->layer_index >= 0;
    if (use_sparsity) sp_state = compute_sparsity(net, *sparsity, all_acts);

    LossParts loss;
    std::vector<std::vector<double>> delta(L + 1);
    for (std::size_t s = 0; s < m; ++s) {
        const auto& acts = all_acts[s];
        const auto& out = acts[L];
        auto& dout = delta[L];
        dout.assign(out.size(), 0.0);
        for (std::size_t i = 0; i < out.size(); ++i) {
            double e = out[i] - Y[s][i];
            loss.data += 0.5 * e * e;
            dout[i] = e;
        }
        for (std::size_t l = L; l-- > 0;) {
            const Layer& layer = net.layers[l];
            auto& d = delta[l + 1];
            // The penalty reaches every sample's path with weight 1/m, which
            // the batch-mean division below supplies.
            if (use_sparsity && static_cast<int>(l) == sparsity->layer_index)
                for (int j = 0; j < layer.out; ++j) d[j] += sp_state.d_pre[j];
            backprop_activation(layer.act, acts[l + 1], d);
            auto& dW = grads.dW[l];
            auto& db = grads.db[l];
            const auto& a_prev = acts[l];
            for (int o = 0; o < layer.out; ++o) {
                double* g = &dW[static_cast<std::size_t>(o) * layer.in];
                for (int i = 0; i < layer.in; ++i) g[i] += d[o] * a_prev[i];
                db[o] += d[o];
            }
            if (l > 0) {
                auto& dprev = delta[l];
                dprev.assign(layer.in, 0.0);
                for (int o = 0; o < layer.out; ++o) {
                    const double* w = &layer.W[static_cast<std::size_t>(o) * layer.in];
                    for (int i = 0; i < layer.in; ++i) dprev[i] += w[i] * d[o];
                }
            }
        }
    }

    loss.data /= static_cast<double>(m);
    for (std::size_t l = 0; l < L; ++l) {
        for (auto& g : grads.dW[l]) g /= static_cast<double>(m);
        for (auto& g : grads.db[l]) g /= static_cast<double>(m);
    }
    if (weight_decay != 0.0) {
        for (std::size_t l = 0; l < L; ++l) {
            const auto& W = net.layers[l].W;
            for (std::size_t i = 0; i < W.size(); ++i) {
                loss.reg += 0.5 * weight_decay * W[i] * W[i];
                grads.dW[l][i] += weight_decay * W[i];
            }
        }
    }
    if (use_sparsity) loss.sparsity = sp_state.penalty;
    return loss;
}

LossParts net_loss(const Net& net, const std::vector<std::vector<double>>& X,
                   const std::vector<std::vector<double>>& Y, double weight_decay,
                   const SparsitySpec* sparsity) {
    const std::size_t m = X.size();
    if (m == 0) throw ConfigError("net_loss: empty sample set");
    LossParts loss;
    std::vector<std::vector<std::vector<double>>> all_acts;
    bool use_sparsity = sparsity && sparsity->weight > 0.0 && sparsity->layer_index >= 0;
    if (use_sparsity) all_acts.resize(m);

    std::vector<std::vector<double>> acts;
    for (std::size_t s = 0; s < m; ++s) {
        net_forward(net, X[s], acts);
        const auto& out = acts.back();
        for (std::size_t i = 0; i < out.size(); ++i) {
            double e = out[i] - Y[s][i];
            loss.data += 0.5 * e * e;
        }
        if (use_sparsity) all_acts[s] = acts;
    }
    loss.data /= static_cast<double>(m);
    if (weight_decay != 0.0) loss.reg = 0.5 * weight_decay * sum_squared_weights(net);
    if (use_sparsity) loss.sparsity = compute_sparsity(net, *sparsity, all_acts).penalty;
    return loss;
}

TrainReport train_net(Net& net, const std::vector<std::vector<double>>& X,
                      const std::vector<std::vector<double>>& Y, const NetTrainConfig& config,
                      const SparsitySpec* sparsity) {
    if (X.size() != Y.size() || X.empty()) throw ConfigError("train_net: bad dataset");
    if (config.batch_size < 1) throw ConfigError("train_net: batch_size must be >= 1");
    Rng rng(config.rng_seed);
    NetGrads velocity = zero_grads(net);
    NetGrads grads;
    std::vector<std::size_t> order(X.size());
    std::iota(order.begin(), order.end(), 0);

    TrainReport report;
    auto t0 = std::chrono::steady_clock::now();
    for (int epoch = 1; epoch <= config.epochs; ++epoch) {
        auto e0 = std::chrono::steady_clock::now();
        rng.shuffle(order);
        for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
            std::size_t end = std::min(order.size(), start + config.batch_size);
            std::vector<std::vector<double>> bx, by;
            bx.reserve(end - start);
            by.reserve(end - start);
            for (std::size_t i = start; i < end; ++i) {
                bx.push_back(X[order[i]]);
                by.push_back(Y[order[i]]);
            }
            net_loss_and_grads(net, bx, by, config.weight_decay, sparsity, grads);
            for (std::size_t l = 0; l < net.layers.size(); ++l) {
                if (l < config.frozen_layers.size() && config.frozen_layers[l]) continue;
                auto& W = net.layers[l].W;
                auto& b = net.layers[l].b;
                for (std::size_t i = 0; i < W.size(); ++i) {
                    velocity.dW[l][i] =
                        config.momentum * velocity.dW[l][i] - config.learning_rate * grads.dW[l][i];
                    W[i] += velocity.dW[l][i];
                }
                for (std::size_t i = 0; i < b.size(); ++i) {
                    velocity.db[l][i] =
                        config.momentum * velocity.db[l][i] - config.learning_rate * grads.db[l][i];
                    b[i] += velocity.db[l][i];
                }
            }
        }
        LossParts full = net_loss(net, X, Y, config.weight_decay, sparsity);
        auto e1 = std::chrono::steady_clock::now();
        EpochStats stats;
        stats.epoch = epoch;
        stats.data_loss = full.data;
        stats.reg_loss = full.reg + full.sparsity;
        stats.wall_ms = std::chrono::duration<double, std::milli>(e1 - e0).count();
        report.epochs.push_back(stats);
        if (!std::isfinite(full.total()))
            throw DivergenceError("training diverged at epoch " + std::to_string(epoch));
    }
    report.wall_ms_total =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    return report;
}

}  // namespace drugner::nn
