#include "drugner/gradcheck.hpp"

#include <cmath>

#include "drugner/util.hpp"

namespace drugner {

namespace {

void check_epsilon(double epsilon) {
    if (epsilon < 1e-6 || epsilon > 1e-3)
        throw ConfigError("gradient check epsilon must be in [1e-6, 1e-3]");
}

// Both-tiny gradients are noise-dominated in the finite difference; treat as
// agreeing.
void update(GradCheckResult& result, double analytic, double numeric, const std::string& name,
            std::size_t index) {
    double scale = std::max(std::abs(analytic), std::abs(numeric));
    if (scale < 1e-7) return;
    double rel = std::abs(analytic - numeric) / scale;
    if (rel > result.max_rel_dev) {
        result.max_rel_dev = rel;
        result.worst_param = name + "[" + std::to_string(index) + "]";
    }
}

}  // namespace

GradCheckResult gradient_check_net(nn::Net& net, const std::vector<std::vector<double>>& X,
                                   const std::vector<std::vector<double>>& Y, double weight_decay,
                                   const nn::SparsitySpec* sparsity, double epsilon) {
    check_epsilon(epsilon);
    nn::NetGrads grads;
    nn::net_loss_and_grads(net, X, Y, weight_decay, sparsity, grads);

    GradCheckResult result;
    auto probe = [&](std::vector<double>& param, const std::vector<double>& grad,
                     const std::string& name) {
        for (std::size_t i = 0; i < param.size(); ++i) {
            double saved = param[i];
            param[i] = saved + epsilon;
            double plus = nn::net_loss(net, X, Y, weight_decay, sparsity).total();
            param[i] = saved - epsilon;
            double minus = nn::net_loss(net, X, Y, weight_decay, sparsity).total();
            param[i] = saved;
            update(result, grad[i], (plus - minus) / (2 * epsilon), name, i);
        }
    };
    for (std::size_t l = 0; l < net.layers.size(); ++l) {
        probe(net.layers[l].W, grads.dW[l], "layer" + std::to_string(l) + ".W");
        probe(net.layers[l].b, grads.db[l], "layer" + std::to_string(l) + ".b");
    }
    return result;
}

GradCheckResult gradient_check_rbm_free_energy(Rbm& rbm, const std::vector<double>& v,
                                               double epsilon) {
    check_epsilon(epsilon);
    // Analytic: dF/dvb_i = -v_i; dF/dhb_j = -sig_j; dF/dW_ji = -sig_j * v_i
    // with sig_j = sigmoid(hbias_j + W_j . v).
    std::vector<double> sig = rbm_hidden_probs(rbm, v);
    GradCheckResult result;
    auto probe = [&](std::vector<double>& param, auto analytic_at, const std::string& name) {
        for (std::size_t i = 0; i < param.size(); ++i) {
            double saved = param[i];
            param[i] = saved + epsilon;
            double plus = rbm_free_energy(rbm, v);
            param[i] = saved - epsilon;
            double minus = rbm_free_energy(rbm, v);
            param[i] = saved;
            update(result, analytic_at(i), (plus - minus) / (2 * epsilon), name, i);
        }
    };
    probe(rbm.vbias, [&](std::size_t i) { return -v[i]; }, "vbias");
    probe(rbm.hbias, [&](std::size_t j) { return -sig[j]; }, "hbias");
    probe(rbm.W,
          [&](std::size_t idx) {
              std::size_t j = idx / rbm.visible, i = idx % rbm.visible;
              return -sig[j] * v[i];
          },
          "W");
    return result;
}

GradCheckResult gradient_check_lstm(LstmParams& params,
                                    const std::vector<std::vector<double>>& features,
                                    const std::vector<int>& labels, int frame, LstmLoss loss,
                                    double epsilon) {
    check_epsilon(epsilon);
    LstmGrads grads;
    lstm_loss_and_grads(params, features, labels, frame, loss, grads);

    GradCheckResult result;
    auto probe = [&](std::vector<double>& param, const std::vector<double>& grad,
                     const std::string& name) {
        LstmGrads scratch;
        for (std::size_t i = 0; i < param.size(); ++i) {
            double saved = param[i];
            param[i] = saved + epsilon;
            double plus = lstm_loss_and_grads(params, features, labels, frame, loss, scratch);
            param[i] = saved - epsilon;
            double minus = lstm_loss_and_grads(params, features, labels, frame, loss, scratch);
            param[i] = saved;
            update(result, grad[i], (plus - minus) / (2 * epsilon), name, i);
        }
    };
    for (std::size_t l = 0; l < params.layers.size(); ++l) {
        auto& p = params.layers[l];
        auto& g = grads.layers[l];
        const std::string pre = "layer" + std::to_string(l) + ".";
        probe(p.Wf, g.Wf, pre + "Wf");
        probe(p.Wc, g.Wc, pre + "Wc");
        probe(p.Wo, g.Wo, pre + "Wo");
        probe(p.Uf, g.Uf, pre + "Uf");
        probe(p.Uc, g.Uc, pre + "Uc");
        probe(p.Uo, g.Uo, pre + "Uo");
        probe(p.pf, g.pf, pre + "pf");
        probe(p.po, g.po, pre + "po");
        probe(p.bf, g.bf, pre + "bf");
        probe(p.bc, g.bc, pre + "bc");
        probe(p.bo, g.bo, pre + "bo");
    }
    probe(params.Wy, grads.Wy, "Wy");
    {
        double saved = params.by;
        params.by = saved + epsilon;
        LstmGrads scratch;
        double plus = lstm_loss_and_grads(params, features, labels, frame, loss, scratch);
        params.by = saved - epsilon;
        double minus = lstm_loss_and_grads(params, features, labels, frame, loss, scratch);
        params.by = saved;
        update(result, grads.by, (plus - minus) / (2 * epsilon), "by", 0);
    }
    return result;
}

}  // namespace drugner
