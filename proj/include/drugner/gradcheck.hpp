#pragma once

#include <string>
#include <vector>

#include "drugner/lstm.hpp"
#include "drugner/nn.hpp"
#include "drugner/rbm.hpp"

namespace drugner {

struct GradCheckResult {
    double max_rel_dev = 0.0;
    std::string worst_param;  // e.g. "layer1.W[37]"
};

/// Central finite differences against analytic gradients for every parameter.
/// Entries where both gradients are below 1e-7 in magnitude count as exact.
GradCheckResult gradient_check_net(nn::Net& net, const std::vector<std::vector<double>>& X,
                                   const std::vector<std::vector<double>>& Y, double weight_decay,
                                   const nn::SparsitySpec* sparsity, double epsilon);

/// Checks d free_energy / d theta for one visible vector.
GradCheckResult gradient_check_rbm_free_energy(Rbm& rbm, const std::vector<double>& v,
                                               double epsilon);

/// Full-sequence BPTT check (pass frame >= length for the full gradient).
GradCheckResult gradient_check_lstm(LstmParams& params,
                                    const std::vector<std::vector<double>>& features,
                                    const std::vector<int>& labels, int frame, LstmLoss loss,
                                    double epsilon);

}  // namespace drugner
