#include "drugner/lstm.hpp"

#include <chrono>
#include <cmath>
#include <numeric>

#include "drugner/rng.hpp"
#include "drugner/util.hpp"

namespace drugner {

namespace {

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

void init_tensor(std::vector<double>& t, std::size_t n, Rng& rng, double r) {
    t.resize(n);
    for (auto& x : t) x = rng.uniform(-r, r);
}

// Forward cache for one sequence: per layer, per step.
struct Cache {
    // [layer][t][unit]
    std::vector<std::vector<std::vector<double>>> f, g, o, c, h, tanhc;
    std::vector<double> y;  // per-step output
};

void forward_sequence(const LstmParams& params, const std::vector<std::vector<double>>& features,
                      Cache& cache) {
    const std::size_t T = features.size();
    const std::size_t L = params.layers.size();
    cache.f.assign(L, {});
    cache.g.assign(L, {});
    cache.o.assign(L, {});
    cache.c.assign(L, {});
    cache.h.assign(L, {});
    cache.tanhc.assign(L, {});
    for (std::size_t l = 0; l < L; ++l) {
        cache.f[l].resize(T);
        cache.g[l].resize(T);
        cache.o[l].resize(T);
        cache.c[l].resize(T);
        cache.h[l].resize(T);
        cache.tanhc[l].resize(T);
    }
    cache.y.assign(T, 0.0);

    for (std::size_t t = 0; t < T; ++t) {
        const std::vector<double>* x = &features[t];
        for (std::size_t l = 0; l < L; ++l) {
            const auto& p = params.layers[l];
            const int H = p.hidden;
            const int I = p.in;
            const std::vector<double>* h_prev = t > 0 ? &cache.h[l][t - 1] : nullptr;
            const std::vector<double>* c_prev = t > 0 ? &cache.c[l][t - 1] : nullptr;
            auto& f = cache.f[l][t];
            auto& g = cache.g[l][t];
            auto& o = cache.o[l][t];
            auto& c = cache.c[l][t];
            auto& h = cache.h[l][t];
            auto& tc = cache.tanhc[l][t];
            f.resize(H);
            g.resize(H);
            o.resize(H);
            c.resize(H);
            h.resize(H);
            tc.resize(H);
            for (int j = 0; j < H; ++j) {
                const double* wf = &p.Wf[static_cast<std::size_t>(j) * I];
                const double* wc = &p.Wc[static_cast<std::size_t>(j) * I];
                double zf = p.bf[j], zc = p.bc[j];
                for (int i = 0; i < I; ++i) {
                    zf += wf[i] * (*x)[i];
                    zc += wc[i] * (*x)[i];
                }
                if (h_prev) {
                    const double* uf = &p.Uf[static_cast<std::size_t>(j) * H];
                    const double* uc = &p.Uc[static_cast<std::size_t>(j) * H];
                    for (int k = 0; k < H; ++k) {
                        zf += uf[k] * (*h_prev)[k];
                        zc += uc[k] * (*h_prev)[k];
                    }
                }
                if (c_prev) zf += p.pf[j] * (*c_prev)[j];
                f[j] = sigmoid(zf);
                g[j] = std::tanh(zc);
                double cp = c_prev ? (*c_prev)[j] : 0.0;
                c[j] = f[j] * cp + (1.0 - f[j]) * g[j];
            }
            for (int j = 0; j < H; ++j) {
                const double* wo = &p.Wo[static_cast<std::size_t>(j) * I];
                double zo = p.bo[j] + p.po[j] * c[j];
                for (int i = 0; i < I; ++i) zo += wo[i] * (*x)[i];
                if (h_prev) {
                    const double* uo = &p.Uo[static_cast<std::size_t>(j) * H];
                    for (int k = 0; k < H; ++k) zo += uo[k] * (*h_prev)[k];
                }
                o[j] = sigmoid(zo);
                tc[j] = std::tanh(c[j]);
                h[j] = o[j] * tc[j];
            }
            x = &h;
        }
        const auto& top = cache.h[L - 1][t];
        double zy = params.by;
        for (std::size_t k = 0; k < top.size(); ++k) zy += params.Wy[k] * top[k];
        cache.y[t] = sigmoid(zy);
    }
}

}  // namespace

LstmParams make_lstm(int input_dim, const std::vector<int>& hidden_sizes, std::uint64_t seed) {
    if (input_dim < 1 || hidden_sizes.empty())
        throw ConfigError("lstm: need input dimension and at least one hidden layer");
    Rng rng(seed);
    LstmParams params;
    params.input_dim = input_dim;
    int in = input_dim;
    const double r = 0.1;
    for (int H : hidden_sizes) {
        LstmLayerParams p;
        p.in = in;
        p.hidden = H;
        std::size_t wi = static_cast<std::size_t>(H) * in;
        std::size_t wu = static_cast<std::size_t>(H) * H;
        init_tensor(p.Wf, wi, rng, r);
        init_tensor(p.Wc, wi, rng, r);
        init_tensor(p.Wo, wi, rng, r);
        init_tensor(p.Uf, wu, rng, r);
        init_tensor(p.Uc, wu, rng, r);
        init_tensor(p.Uo, wu, rng, r);
        init_tensor(p.pf, H, rng, r);
        init_tensor(p.po, H, rng, r);
        p.bf.assign(H, 0.0);
        p.bc.assign(H, 0.0);
        p.bo.assign(H, 0.0);
        params.layers.push_back(std::move(p));
        in = H;
    }
    init_tensor(params.Wy, in, rng, r);
    params.by = 0.0;
    return params;
}

LstmGrads zero_lstm_grads(const LstmParams& params) {
    LstmGrads g;
    for (const auto& p : params.layers) {
        LstmLayerParams z;
        z.in = p.in;
        z.hidden = p.hidden;
        z.Wf.assign(p.Wf.size(), 0.0);
        z.Wc.assign(p.Wc.size(), 0.0);
        z.Wo.assign(p.Wo.size(), 0.0);
        z.Uf.assign(p.Uf.size(), 0.0);
        z.Uc.assign(p.Uc.size(), 0.0);
        z.Uo.assign(p.Uo.size(), 0.0);
        z.pf.assign(p.pf.size(), 0.0);
        z.po.assign(p.po.size(), 0.0);
        z.bf.assign(p.bf.size(), 0.0);
        z.bc.assign(p.bc.size(), 0.0);
        z.bo.assign(p.bo.size(), 0.0);
        g.layers.push_back(std::move(z));
    }
    g.Wy.assign(params.Wy.size(), 0.0);
    g.by = 0.0;
    return g;
}

std::vector<double> lstm_outputs(const LstmParams& params,
                                 const std::vector<std::vector<double>>& features) {
    Cache cache;
    forward_sequence(params, features, cache);
    return cache.y;
}

LstmTrace lstm_forward_trace(const LstmParams& params,
                             const std::vector<std::vector<double>>& features) {
    Cache cache;
    forward_sequence(params, features, cache);
    LstmTrace trace;
    trace.f = cache.f;
    trace.o = cache.o;
    trace.c = cache.c;
    trace.h = cache.h;
    trace.outputs = cache.y;
    trace.i = cache.f;
    for (auto& layer : trace.i)
        for (auto& step : layer)
            for (auto& v : step) v = 1.0 - v;
    return trace;
}

double lstm_loss_and_grads(const LstmParams& params,
                           const std::vector<std::vector<double>>& features,
                           const std::vector<int>& labels, int frame, LstmLoss loss,
                           LstmGrads& grads) {
    const std::size_t T = features.size();
    if (labels.size() != T) throw DataError("lstm: feature/label length mismatch");
    if (frame < 1) throw ConfigError("lstm: frame must be >= 1");
    grads = zero_lstm_grads(params);
    if (T == 0) return 0.0;

    Cache cache;
    forward_sequence(params, features, cache);
    const std::size_t L = params.layers.size();

    double total = 0;
    for (std::size_t t = 0; t < T; ++t) {
        double y = cache.y[t], target = labels[t];
        if (loss == LstmLoss::SquaredError) {
            total += 0.5 * (y - target) * (y - target);
        } else {
            const double eps = 1e-12;
            total -= target * std::log(y + eps) + (1.0 - target) * std::log(1.0 - y + eps);
        }
    }

    // dh/dc accumulators per layer per step; contributions never cross the
    // chunk boundary at multiples of `frame`.
    std::vector<std::vector<std::vector<double>>> dh(L), dc(L);
    for (std::size_t l = 0; l < L; ++l) {
        dh[l].assign(T, std::vector<double>(params.layers[l].hidden, 0.0));
        dc[l].assign(T, std::vector<double>(params.layers[l].hidden, 0.0));
    }

    for (std::size_t t = T; t-- > 0;) {
        const std::size_t chunk_start = (t / static_cast<std::size_t>(frame)) * frame;
        // output layer
        double y = cache.y[t], target = labels[t];
        double dzy = loss == LstmLoss::SquaredError ? (y - target) * y * (1.0 - y) : (y - target);
        const auto& top = cache.h[L - 1][t];
        for (std::size_t k = 0; k < top.size(); ++k) {
            grads.Wy[k] += dzy * top[k];
            dh[L - 1][t][k] += params.Wy[k] * dzy;
        }
        grads.by += dzy;

        for (std::size_t l = L; l-- > 0;) {
            const auto& p = params.layers[l];
            auto& gp = grads.layers[l];
            const int H = p.hidden;
            const int I = p.in;
            const std::vector<double>& x = l == 0 ? features[t] : cache.h[l - 1][t];
            const std::vector<double>* h_prev = t > 0 ? &cache.h[l][t - 1] : nullptr;
            const std::vector<double>* c_prev = t > 0 ? &cache.c[l][t - 1] : nullptr;
            const bool carry = t > chunk_start;

            const auto& f = cache.f[l][t];
            const auto& g = cache.g[l][t];
            const auto& o = cache.o[l][t];
            const auto& c = cache.c[l][t];
            const auto& tc = cache.tanhc[l][t];
            auto& dht = dh[l][t];
            auto& dct = dc[l][t];
            std::vector<double> dx(I, 0.0);

            for (int j = 0; j < H; ++j) {
                double dcj = dct[j] + dht[j] * o[j] * (1.0 - tc[j] * tc[j]);
                // output gate (peeps at c_t)
                double dzo = dht[j] * tc[j] * o[j] * (1.0 - o[j]);
                double* gwo = &gp.Wo[static_cast<std::size_t>(j) * I];
                const double* wo = &p.Wo[static_cast<std::size_t>(j) * I];
                for (int i = 0; i < I; ++i) {
                    gwo[i] += dzo * x[i];
                    dx[i] += wo[i] * dzo;
                }
                if (h_prev) {
                    double* guo = &gp.Uo[static_cast<std::size_t>(j) * H];
                    for (int k = 0; k < H; ++k) guo[k] += dzo * (*h_prev)[k];
                    if (carry) {
                        const double* uo = &p.Uo[static_cast<std::size_t>(j) * H];
                        for (int k = 0; k < H; ++k) dh[l][t - 1][k] += uo[k] * dzo;
                    }
                }
                gp.po[j] += dzo * c[j];
                gp.bo[j] += dzo;
                dcj += p.po[j] * dzo;

                // candidate (gated by i = 1 - f)
                double dzc = dcj * (1.0 - f[j]) * (1.0 - g[j] * g[j]);
                double* gwc = &gp.Wc[static_cast<std::size_t>(j) * I];
                const double* wc = &p.Wc[static_cast<std::size_t>(j) * I];
                for (int i = 0; i < I; ++i) {
                    gwc[i] += dzc * x[i];
                    dx[i] += wc[i] * dzc;
                }
                if (h_prev) {
                    double* guc = &gp.Uc[static_cast<std::size_t>(j) * H];
                    for (int k = 0; k < H; ++k) guc[k] += dzc * (*h_prev)[k];
                    if (carry) {
                        const double* uc = &p.Uc[static_cast<std::size_t>(j) * H];
                        for (int k = 0; k < H; ++k) dh[l][t - 1][k] += uc[k] * dzc;
                    }
                }
                gp.bc[j] += dzc;

                // forget gate; dc/df = c_{t-1} - g under coupling
                double cp = c_prev ? (*c_prev)[j] : 0.0;
                double dzf = dcj * (cp - g[j]) * f[j] * (1.0 - f[j]);
                double* gwf = &gp.Wf[static_cast<std::size_t>(j) * I];
                const double* wf = &p.Wf[static_cast<std::size_t>(j) * I];
                for (int i = 0; i < I; ++i) {
                    gwf[i] += dzf * x[i];
                    dx[i] += wf[i] * dzf;
                }
                if (h_prev) {
                    double* guf = &gp.Uf[static_cast<std::size_t>(j) * H];
                    for (int k = 0; k < H; ++k) guf[k] += dzf * (*h_prev)[k];
                    if (carry) {
                        const double* uf = &p.Uf[static_cast<std::size_t>(j) * H];
                        for (int k = 0; k < H; ++k) dh[l][t - 1][k] += uf[k] * dzf;
                    }
                }
                gp.pf[j] += dzf * cp;
                gp.bf[j] += dzf;

                if (carry) dc[l][t - 1][j] += dcj * f[j] + p.pf[j] * dzf;
            }
            if (l > 0)
                for (int i = 0; i < I; ++i) dh[l - 1][t][i] += dx[i];
        }
    }
    return total;
}

namespace {

template <typename F>
void for_each_lstm_tensor(LstmParams& p, LstmGrads& g, LstmGrads& v, F&& fn) {
    for (std::size_t l = 0; l < p.layers.size(); ++l) {
        auto& pp = p.layers[l];
        auto& gg = g.layers[l];
        auto& vv = v.layers[l];
        fn(pp.Wf, gg.Wf, vv.Wf);
        fn(pp.Wc, gg.Wc, vv.Wc);
        fn(pp.Wo, gg.Wo, vv.Wo);
        fn(pp.Uf, gg.Uf, vv.Uf);
        fn(pp.Uc, gg.Uc, vv.Uc);
        fn(pp.Uo, gg.Uo, vv.Uo);
        fn(pp.pf, gg.pf, vv.pf);
        fn(pp.po, gg.po, vv.po);
        fn(pp.bf, gg.bf, vv.bf);
        fn(pp.bc, gg.bc, vv.bc);
        fn(pp.bo, gg.bo, vv.bo);
    }
    fn(p.Wy, g.Wy, v.Wy);
}

}  // namespace

std::vector<std::vector<double>> sequence_features(const SequenceSample& s) {
    std::vector<std::vector<double>> out;
    out.reserve(s.steps.size());
    for (const auto& step : s.steps) out.emplace_back(step.features.begin(), step.features.end());
    return out;
}

LstmTrainResult lstm_train(const std::vector<SequenceSample>& sequences,
                           const LstmConfig& config) {
    if (sequences.empty()) throw ConfigError("lstm_train: empty dataset");
    for (const auto& s : sequences)
        for (const auto& step : s.steps)
            if (step.features.size() != static_cast<std::size_t>(config.input_dimension))
                throw DataError("lstm_train: step feature width != input dimension");

    LstmTrainResult result;
    result.params = make_lstm(config.input_dimension, config.hidden_sizes, config.rng_seed);
    LstmGrads velocity = zero_lstm_grads(result.params);
    LstmGrads grads;
    Rng rng(config.rng_seed ^ 0x5e9u);

    std::vector<std::vector<std::vector<double>>> feats;
    std::vector<std::vector<int>> labels;
    std::uint64_t total_steps = 0;
    for (const auto& s : sequences) {
        feats.push_back(sequence_features(s));
        std::vector<int> lab;
        lab.reserve(s.steps.size());
        for (const auto& step : s.steps) lab.push_back(step.label);
        total_steps += s.steps.size();
        labels.push_back(std::move(lab));
    }
    if (total_steps == 0) throw ConfigError("lstm_train: dataset has no steps");

    std::vector<std::size_t> order(sequences.size());
    std::iota(order.begin(), order.end(), 0);

    auto t0 = std::chrono::steady_clock::now();
    for (int epoch = 1; epoch <= config.epochs; ++epoch) {
        auto e0 = std::chrono::steady_clock::now();
        rng.shuffle(order);
        for (std::size_t idx : order) {
            if (feats[idx].empty()) continue;
            lstm_loss_and_grads(result.params, feats[idx], labels[idx], config.frame, config.loss,
                                grads);
            for_each_lstm_tensor(result.params, grads, velocity,
                                 [&](std::vector<double>& p, std::vector<double>& g,
                                     std::vector<double>& v) {
                                     for (std::size_t i = 0; i < p.size(); ++i) {
                                         v[i] = config.momentum * v[i] -
                                                config.learning_rate * g[i];
                                         p[i] += v[i];
                                     }
                                 });
            velocity.by = config.momentum * velocity.by - config.learning_rate * grads.by;
            result.params.by += velocity.by;
        }
        double epoch_loss = 0;
        for (std::size_t i = 0; i < feats.size(); ++i) {
            if (feats[i].empty()) continue;
            Cache cache;
            forward_sequence(result.params, feats[i], cache);
            for (std::size_t t = 0; t < feats[i].size(); ++t) {
                double y = cache.y[t], target = labels[i][t];
                if (config.loss == LstmLoss::SquaredError) {
                    epoch_loss += 0.5 * (y - target) * (y - target);
                } else {
                    const double eps = 1e-12;
                    epoch_loss -=
                        target * std::log(y + eps) + (1.0 - target) * std::log(1.0 - y + eps);
                }
            }
        }
        epoch_loss /= static_cast<double>(total_steps);
        auto e1 = std::chrono::steady_clock::now();
        nn::EpochStats stats;
        stats.epoch = epoch;
        stats.data_loss = epoch_loss;
        stats.reg_loss = 0.0;
        stats.wall_ms = std::chrono::duration<double, std::milli>(e1 - e0).count();
        result.report.epochs.push_back(stats);
        if (!std::isfinite(epoch_loss))
            throw DivergenceError("lstm training diverged at epoch " + std::to_string(epoch));
    }
    result.report.wall_ms_total =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    return result;
}

std::vector<std::vector<int>> lstm_predict(const LstmParams& params,
                                           const std::vector<SequenceSample>& sequences,
                                           double threshold) {
    std::vector<std::vector<int>> out;
    out.reserve(sequences.size());
    for (const auto& s : sequences) {
        std::vector<int> labels;
        if (!s.steps.empty()) {
            auto y = lstm_outputs(params, sequence_features(s));
            labels.reserve(y.size());
            for (double v : y) labels.push_back(v > threshold ? 1 : 0);
        }
        out.push_back(std::move(labels));
    }
    return out;
}

}  // namespace drugner
